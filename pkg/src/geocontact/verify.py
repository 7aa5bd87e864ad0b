"""Theorem-level verdict suites over grids and orbits, plus the contact
volume quadrature.

Each suite walks a sample set, decides per sample whether the hypotheses of
the named statement hold (within tolerances) and whether its conclusion
does; a violation is a sample with hypotheses satisfied but conclusion
failed. Numerical floors make the exact statements decidable:

    |B21 - B12| <= not_contact   counts as "not contact at the sample"
    |B21 - B12| >  contact_floor counts as "contact at the sample"
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np

from .catalog import CatalogEntry
from .curvature import sectional
from .errors import ConfigError, NoParametrization, NotConstantCurvature
from .field import PointDiagnosis, RealPair, contact_defect_grid, diagnose_point
from .flow import integrate_orbit

THEOREM_IDS = ("T3.1", "C3.2", "T5.1", "C5.2", "T6.1", "P7.6")


@dataclass
class Tolerances:
    """Numerical floors used by the verdict suites; all config-overridable."""

    unit_defect: float = 1e-6
    geodesic_defect: float = 1e-6
    not_contact: float = 1e-8
    contact_floor: float = 1e-6
    killing: float = 1e-8
    hypothesis: float = 1e-6
    orbit_residual: float = 1e-4

    @classmethod
    def from_mapping(cls, mapping):
        base = cls()
        for key, value in (mapping or {}).items():
            if not hasattr(base, key):
                raise ConfigError(f"unknown tolerance {key!r}")
            setattr(base, key, float(value))
        return base


@dataclass
class TheoremReport:
    theorem: str
    entry: str
    samples: int
    hypothesis_satisfied: int
    conclusion_satisfied: int
    violations: list  # (point, PointDiagnosis) pairs
    verdict: str      # consistent | violated | hypotheses-not-met
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "theorem": self.theorem,
            "entry": self.entry,
            "samples": self.samples,
            "hypothesis_satisfied": self.hypothesis_satisfied,
            "conclusion_satisfied": self.conclusion_satisfied,
            "violations": [_violation_dict(p, d) for p, d in self.violations],
            "verdict": self.verdict,
            "details": self.details,
        }


def _violation_dict(p, diag: PointDiagnosis):
    eig = diag.eigen
    if isinstance(eig, RealPair):
        eig_doc = {"kind": "real", "lam": eig.lam, "mu": eig.mu}
    else:
        eig_doc = {"kind": "complex", "a": eig.a, "b": eig.b}
    return {
        "point": [float(c) for c in p],
        "unit_defect": diag.unit_defect,
        "geodesic_defect": diag.geodesic_defect,
        "killing_defect": diag.killing_defect,
        "contact_defect": diag.contact_defect,
        "eigen": eig_doc,
        "ric_X": diag.ric_X,
        "Delta": diag.Delta,
        "delta": diag.delta,
        "beta_rank": diag.beta_rank,
    }


def _finish(theorem, entry_name, diags, hyp_mask, concl_mask, details=None):
    violations = [(d.p, d) for d, h, c in zip(diags, hyp_mask, concl_mask) if h and not c]
    hyp = int(np.sum(hyp_mask))
    if violations:
        verdict = "violated"
    elif hyp == 0:
        verdict = "hypotheses-not-met"
    else:
        verdict = "consistent"
    concl = int(sum(1 for h, c in zip(hyp_mask, concl_mask) if h and c))
    return TheoremReport(theorem=theorem, entry=entry_name, samples=len(diags),
                         hypothesis_satisfied=hyp, conclusion_satisfied=concl,
                         violations=violations, verdict=verdict,
                         details=details or {})


def _grid_points(entry: CatalogEntry, points):
    if points is not None:
        return np.asarray(points, float)
    if entry.grid is None:
        raise ConfigError(f"{entry.name} has no sample grid; provide one")
    return entry.grid.points()


def _diagnose_all(entry: CatalogEntry, points):
    return [diagnose_point(entry.manifold, entry.field, p) for p in points]


def _real_eig_max(diag):
    if isinstance(diag.eigen, RealPair):
        return max(abs(diag.eigen.lam), abs(diag.eigen.mu))
    return None


def _beta_norm(diag):
    return float(np.linalg.norm(diag.beta.B))


# ---------------------------------------------------------------------------
# Space forms
# ---------------------------------------------------------------------------

def check_constant_curvature(entry: CatalogEntry, c, points, spread_tol=1e-4, seed=0):
    """Sectional spread over random planes; raises NotConstantCurvature."""
    rng = np.random.default_rng(seed)
    pts = np.asarray(points, float)
    sel = pts[rng.choice(len(pts), size=min(10, len(pts)), replace=False)]
    values = []
    for p in sel:
        for _ in range(5):
            v = rng.standard_normal(3)
            w = rng.standard_normal(3)
            values.append(sectional(entry.manifold, p, v, w))
    values = np.asarray(values)
    spread = float(values.max() - values.min())
    if spread > spread_tol or abs(values.mean() - c) > spread_tol:
        raise NotConstantCurvature(
            f"{entry.name}: sectional values in [{values.min():.6f}, {values.max():.6f}], "
            f"expected constant {c}")
    return spread


def verify_space_form(entry: CatalogEntry, c: float, points=None,
                      theorem: str = "T5.1", tol: Optional[Tolerances] = None) -> TheoremReport:
    """Eigenvalue bounds (T5.1) or contact conclusions (C5.2) on a space form.

    For curvature c the real eigenvalues of the shape operator must be
    absent (c > 0), zero (c = 0) or bounded by sqrt(|c|) in absolute value
    (c < 0); the corollary form translates these into contact verdicts.
    """
    tol = tol or Tolerances()
    pts = _grid_points(entry, points)
    spread = check_constant_curvature(entry, c, pts)
    diags = _diagnose_all(entry, pts)
    bound = np.sqrt(abs(c))
    hyp = [True] * len(diags)  # constant curvature holds globally (prechecked)
    concl = []
    if theorem == "T5.1":
        for d in diags:
            m = _real_eig_max(d)
            if m is None:
                concl.append(True)
            elif c > 0:
                concl.append(False)
            else:
                concl.append(m <= bound + tol.hypothesis)
    elif theorem == "C5.2":
        for d in diags:
            is_contact = abs(d.contact_defect) > tol.contact_floor
            not_contact = abs(d.contact_defect) <= tol.not_contact
            if c > 0:
                concl.append(is_contact)
            elif c == 0:
                nonzero_beta = _beta_norm(d) > tol.hypothesis
                concl.append(is_contact if nonzero_beta else not is_contact)
            else:
                m = _real_eig_max(d)
                concl.append(True if not not_contact
                             else (m is not None and m <= bound + tol.hypothesis))
    else:
        raise ConfigError(f"verify_space_form handles T5.1/C5.2, not {theorem!r}")
    return _finish(theorem, entry.name, diags, hyp, concl,
                   details={"c": c, "sectional_spread": spread})


# ---------------------------------------------------------------------------
# Ricci criteria
# ---------------------------------------------------------------------------

def verify_ricci(entry: CatalogEntry, points=None, theorem: str = "C3.2",
                 tol: Optional[Tolerances] = None) -> TheoremReport:
    """Nonnegative-Ricci contact criterion (C3.2) or the non-contact
    dichotomy (T3.1): at a non-contact sample either Ric(X) < 0 or both
    Ric(X) and beta vanish."""
    tol = tol or Tolerances()
    pts = _grid_points(entry, points)
    diags = _diagnose_all(entry, pts)
    hyp, concl = [], []
    for d in diags:
        bnorm = _beta_norm(d)
        if theorem == "C3.2":
            h = d.ric_X >= -tol.hypothesis and bnorm > tol.hypothesis
            c = abs(d.contact_defect) > tol.contact_floor
        elif theorem == "T3.1":
            h = abs(d.contact_defect) <= tol.not_contact
            c = (d.ric_X < tol.hypothesis) or \
                (abs(d.ric_X) <= tol.hypothesis and bnorm <= tol.hypothesis)
        else:
            raise ConfigError(f"verify_ricci handles C3.2/T3.1, not {theorem!r}")
        hyp.append(h)
        concl.append(c if h else True)
    return _finish(theorem, entry.name, diags, hyp, concl)


# ---------------------------------------------------------------------------
# Parallel Jacobi tensor criterion
# ---------------------------------------------------------------------------

def _strided_jacobi_drift(traj, dt_window: float) -> float:
    """||nabla_X R_X|| estimate from Jacobi-tensor drift over a time window.

    Longer windows suppress the 1/dt amplification of the pointwise
    curvature evaluation noise while still detecting genuine drift.
    """
    stride = max(1, min(len(traj) - 1, int(round(dt_window / traj.step))))
    dm = traj.M[stride:] - traj.M[:-stride]
    return float(np.sqrt((dm ** 2).sum(axis=(1, 2))).max() / (stride * traj.step))


def verify_parallel_jacobi(entry: CatalogEntry, points=None, orbit_t_end: float = 0.1,
                           orbit_step: float = 1e-3, seed_counts=(3, 3, 3),
                           tol: Optional[Tolerances] = None) -> TheoremReport:
    """Contact criterion for fields with flow-parallel Jacobi tensor (T6.1).

    From every seed a short orbit measures ||nabla_X R_X|| by finite
    differences of the Jacobi tensor in the transported frame; where that
    hypothesis holds and either the largest mixed curvature is positive or
    it vanishes with full-rank beta, the sample must be contact.

    Completeness of the field, which the underlying statement needs, is not
    measurable from finitely many samples and is assumed (it holds for every
    catalog entry by construction).
    """
    tol = tol or Tolerances()
    if points is None:
        if entry.grid is None:
            raise ConfigError(f"{entry.name} has no sample grid; provide seeds")
        points = entry.grid.subgrid(seed_counts).points()
    pts = np.asarray(points, float)
    diags, hyp, concl = [], [], []
    defects = []
    for p in pts:
        d = diagnose_point(entry.manifold, entry.field, p)
        diags.append(d)
        traj = integrate_orbit(entry.manifold, entry.field, p, orbit_t_end,
                               orbit_step, with_jacobi=False)
        pj = _strided_jacobi_drift(traj, orbit_t_end / 2) if len(traj) >= 2 else np.inf
        defects.append(pj)
        parallel_ok = pj < tol.hypothesis
        case_i = d.Delta > tol.hypothesis
        case_ii = abs(d.Delta) <= tol.hypothesis and d.beta_rank == 2
        h = parallel_ok and (case_i or case_ii)
        hyp.append(h)
        concl.append(abs(d.contact_defect) > tol.contact_floor if h else True)
    return _finish("T6.1", entry.name, diags, hyp, concl,
                   details={"max_jacobi_tensor_drift": float(np.max(defects)),
                            "orbit_t_end": orbit_t_end, "orbit_step": orbit_step})


# ---------------------------------------------------------------------------
# Contact volume
# ---------------------------------------------------------------------------

@dataclass
class VolumeResult:
    value: float
    nodes: int
    estimated_error: float
    parametrization: str

    def to_dict(self):
        return asdict(self)


def _midpoint_value(entry: CatalogEntry, nodes: int, orientation: int) -> float:
    param = entry.manifold.volume_param
    axes = [(np.arange(nodes) + 0.5) * (hi - lo) / nodes + lo for lo, hi in param.box]
    cell = np.prod([(hi - lo) / nodes for lo, hi in param.box])
    mesh = np.meshgrid(*axes, indexing="ij")
    params = np.stack([m.ravel() for m in mesh], axis=1)
    pts = param.chart_map(params)
    defect = contact_defect_grid(entry.manifold, entry.field, pts, orientation=orientation)
    return float(np.sum(defect * param.density(params)) * cell)


def volume_integral(entry: CatalogEntry, nodes: int, orientation: int = 1) -> VolumeResult:
    """Contact volume by midpoint quadrature: integral of the contact defect
    against the Riemannian volume, in the orientation of the parametrization.

    ``estimated_error`` is the difference against the half-resolution grid.
    """
    if entry.manifold.volume_param is None:
        raise NoParametrization(f"{entry.name} has no integration parametrization")
    if nodes < 2:
        raise ConfigError("need at least 2 nodes per axis")
    value = _midpoint_value(entry, nodes, orientation)
    coarse = _midpoint_value(entry, max(2, nodes // 2), orientation)
    return VolumeResult(value=value, nodes=nodes,
                        estimated_error=abs(value - coarse),
                        parametrization=entry.manifold.volume_param.name)


def reebability_verdict(entry: CatalogEntry, volume: VolumeResult,
                        killing_defect_max: float,
                        tol: Optional[Tolerances] = None) -> str:
    """Killing fields on closed manifolds are Reeb fields iff the contact
    volume is nonzero; decided up to the quadrature error estimate."""
    tol = tol or Tolerances()
    if killing_defect_max < tol.killing:
        if abs(volume.value) > 3.0 * volume.estimated_error:
            return "reeb-realizable"
        if abs(volume.value) <= volume.estimated_error:
            return "not-reeb"
    return "inconclusive"


def verify_reebability(entry: CatalogEntry, nodes: int = 32,
                       tol: Optional[Tolerances] = None) -> TheoremReport:
    """P7.6 consistency: a Killing field measured contact everywhere must
    have nonzero contact volume (be Reeb-realizable)."""
    tol = tol or Tolerances()
    if entry.manifold.volume_param is None:
        return TheoremReport("P7.6", entry.name, 0, 0, 0, [], "hypotheses-not-met",
                             details={"reason": "no closed-manifold parametrization"})
    pts = entry.grid.points()
    diags = _diagnose_all(entry, pts)
    killing_max = max(d.killing_defect for d in diags)
    volume = volume_integral(entry, nodes)
    verdict_reeb = reebability_verdict(entry, volume, killing_max, tol)
    contact_everywhere = all(abs(d.contact_defect) > tol.contact_floor for d in diags)
    hyp = [killing_max < tol.killing] * len(diags)
    concl = [(verdict_reeb == "reeb-realizable") if contact_everywhere else True] * len(diags)
    report = _finish("P7.6", entry.name, diags, hyp, concl,
                     details={"volume": volume.to_dict(),
                              "killing_defect_max": killing_max,
                              "reebability": verdict_reeb})
    return report


# ---------------------------------------------------------------------------
# Master suite
# ---------------------------------------------------------------------------

def applicable_theorems(entry: CatalogEntry):
    ids = ["T3.1", "C3.2", "T6.1"]
    if entry.space_form_c is not None:
        ids = ["T5.1", "C5.2"] + ids
    if entry.manifold.volume_param is not None:
        ids.append("P7.6")
    return ids


def run_theorem(entry: CatalogEntry, theorem: str, c: Optional[float] = None,
                points=None, tol: Optional[Tolerances] = None,
                volume_nodes: int = 32) -> TheoremReport:
    """Dispatch a single theorem suite for one entry."""
    if theorem in ("T5.1", "C5.2"):
        cc = entry.space_form_c if c is None else c
        if cc is None:
            raise ConfigError(f"{entry.name} has no constant-curvature value; pass c")
        return verify_space_form(entry, cc, points, theorem=theorem, tol=tol)
    if theorem in ("T3.1", "C3.2"):
        return verify_ricci(entry, points, theorem=theorem, tol=tol)
    if theorem == "T6.1":
        return verify_parallel_jacobi(entry, points, tol=tol)
    if theorem == "P7.6":
        return verify_reebability(entry, nodes=volume_nodes, tol=tol)
    raise ConfigError(f"unknown theorem id {theorem!r}; known: {THEOREM_IDS}")


def verify_all(entries, tol: Optional[Tolerances] = None, volume_nodes: int = 32):
    """Every applicable suite over the given entries; reports in a stable order."""
    reports = []
    for entry in entries:
        for theorem in applicable_theorems(entry):
            reports.append(run_theorem(entry, theorem, tol=tol, volume_nodes=volume_nodes))
    return reports
