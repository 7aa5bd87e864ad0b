"""Tour of the built-in catalog.

Each entry pairs a chart metric with a unit field whose flow lines are
geodesics. The one number to watch is the contact defect B21 - B12 of the
shape operator: nonzero means the orthogonal plane field is a contact
structure at that point, zero means it is integrable there.
"""

import numpy as np

import geocontact as gc

print(f"{'entry':22s} {'contact':>9s} {'eigenvalues':>26s} "
      f"{'Ric(X)':>8s} {'rank':>4s} {'Killing?':>8s}")
print("-" * 84)

for name in ("euclidean_parallel", "euclidean_skew", "s3_hopf", "s3_weighted(2,3)",
             "h2xr_vertical", "h3_vertical", "heisenberg_reeb"):
    entry = gc.builtin(name)
    p = np.asarray(entry.orbit.start, float)
    d = gc.diagnose_point(entry.manifold, entry.field, p)
    if isinstance(d.eigen, gc.RealPair):
        eig = f"real ({d.eigen.lam:+.3f}, {d.eigen.mu:+.3f})"
    else:
        eig = f"complex {d.eigen.a:+.3f} +/- {d.eigen.b:.3f}i"
    killing = "yes" if d.killing_defect < 1e-8 else "no"
    print(f"{name:22s} {d.contact_defect:+9.4f} {eig:>26s} "
          f"{d.ric_X:+8.4f} {d.beta_rank:4d} {killing:>8s}")

print()
print("Reading the table:")
print(" * zero contact defect with real eigenvalues = integrable plane field")
print("   (the two hyperbolic examples: the planes {x3 = const} / {x2 = const})")
print(" * complex eigenvalues force a nonzero defect, hence a contact structure")
print(" * a Killing unit field has skew shape operator, so its real part is 0")
