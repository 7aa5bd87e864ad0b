"""Analysing a user-defined metric and field from expression strings.

Everything the catalog does is available for custom data: metric entries,
field components and the chart-domain predicate are small arithmetic
expressions in x1, x2, x3 (the same strings accepted in the CLI's JSON
config). Expression-backed data gets exact first derivatives through dual
numbers; an opaque Python callable would fall back to central differences.

Here: a rescaled round 2-sphere times a line, metric
    4 r^2 (dx1^2 + dx2^2) / (1 + x1^2 + x2^2)^2 + dx3^2,
with the unit field along the line factor. The field is parallel, so the
plane field is integrable (defect 0) and every mixed curvature vanishes.
"""

import numpy as np

import geocontact as gc

R = 1.5  # sphere radius
conformal = f"4*{R**2!r}/(1 + x1^2 + x2^2)^2"
man = gc.manifold_from_exprs(
    "s2xr", ((conformal, "0", "0"), ("0", conformal, "0"), ("0", "0", "1")))
fld = gc.UnitField.from_exprs("line", ("0", "0", "1"))

p = np.array([0.3, -0.4, 2.0])
d = gc.diagnose_point(man, fld, p)
print(f"at {p}:")
print(f"  unit defect      {d.unit_defect:.2e}")
print(f"  geodesic defect  {d.geodesic_defect:.2e}")
print(f"  contact defect   {d.contact_defect:+.2e}   (plane field integrable)")
print(f"  Delta, delta     {d.Delta:+.6f}, {d.delta:+.6f}")
print(f"  Ric(X)           {d.ric_X:+.2e}")

# the sphere factor still has curvature 1/R^2 in its own plane
K = gc.sectional(man, p, np.array([1.0, 0, 0]), np.array([0.0, 1, 0]))
print(f"  K(sphere plane)  {K:+.6f}   (1/R^2 = {1 / R**2:+.6f})")

print("""
The same analysis through the CLI takes a JSON config like:

    {
      "manifold": {
        "metric": [["%s", "0", "0"],
                   ["0", "%s", "0"],
                   ["0", "0", "1"]],
        "domain": "true"
      },
      "field": {"components": ["0", "0", "1"]},
      "grid": {"min": [-1, -1, -1], "max": [1, 1, 1], "counts": [3, 3, 3]}
    }

saved to config.json and run with:  geocontact analyze --config config.json
""" % (conformal, conformal))
