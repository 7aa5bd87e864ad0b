"""Pointwise analysis of a candidate geodesic unit field.

Everything here reduces to the shape operator beta(v) = nabla_v X restricted
to the orthogonal plane field: its symmetric part measures the failure of
the flow to be isometric, its antisymmetric part is the contact defect
d(alpha)(e1, e2) = B21 - B12, and its eigenvalues drive the space-form and
rank criteria.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import expr
from .curvature import (EIGEN_DISC_TOL, christoffel, covariant_derivative,
                        jacobi_tensor, vector_jacobian)
from .errors import NotUnit
from .geometry import (ChartedManifold, Frame, as_points, frame_at, frames_at,
                       g_norm, inner)

UNIT_TOL = 1e-6
RANK_REL_TOL = 1e-6
RANK_ABS_TOL = 1e-9


@dataclass
class UnitField:
    """Candidate geodesic vector field given by three component functions."""

    name: str
    component_fn: Callable[[np.ndarray], np.ndarray]  # (N, 3) -> (N, 3)
    component_exprs: Optional[tuple] = None  # 3 ExprAst, when expression-backed

    @classmethod
    def from_exprs(cls, name, components):
        asts = tuple(expr.parse(c) for c in components)

        def fn(pts):
            n = pts.shape[0]
            out = np.empty((n, 3))
            for i in range(3):
                vals = np.asarray(expr.eval_scalar(asts[i], pts), dtype=float)
                out[:, i] = vals if vals.ndim else np.full(n, float(vals))
            return out

        return cls(name=name, component_fn=fn, component_exprs=asts)

    @classmethod
    def from_callable(cls, name, fn):
        return cls(name=name, component_fn=fn)

    def value(self, p):
        pts, single = as_points(p)
        out = np.asarray(self.component_fn(pts), dtype=float)
        return out[0] if single else out

    __call__ = value


# ---------------------------------------------------------------------------
# Defects
# ---------------------------------------------------------------------------

def unit_defect(man: ChartedManifold, X: UnitField, p) -> float:
    """| <X, X> - 1 | at p."""
    man.require_inside(as_points(p)[0])
    g = man.metric_at(p)
    xv = X.value(p)
    return abs(inner(g, xv, xv) - 1.0)


def geodesic_defect(man: ChartedManifold, X: UnitField, p) -> float:
    """g-norm of nabla_X X at p; zero for geodesic fields."""
    g = man.metric_at(p)
    acc = covariant_derivative(man, p, X, X.value(p))
    return float(g_norm(g, acc))


def killing_defect(man: ChartedManifold, X: UnitField, p, frame: Frame | None = None) -> float:
    """Largest entry of the symmetrised covariant differential of X.

    Computed over the full orthonormal frame (X, e1, e2); vanishes exactly
    when the flow of X is isometric.
    """
    g = man.metric_at(p)
    if frame is None:
        frame = frame_at(g, X.value(p))
    basis = np.stack(frame.basis())
    derivs = covariant_derivative(man, np.repeat(as_points(p)[0], 3, axis=0), X, basis)
    gram = derivs @ g @ basis.T  # gram[i, j] = <nabla_{f_i} X, f_j>
    return float(np.abs(gram + gram.T).max())


# ---------------------------------------------------------------------------
# Shape operator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BetaMatrix:
    """2x2 matrix B_ij = <beta(e_j), e_i> of the shape operator in a frame.

    ``tangency`` records max |<nabla_{e_i} X, X>|, which must vanish for a
    unit field (the image of beta lies in X-perp).
    """

    B: np.ndarray
    frame: Frame
    tangency: float


def beta_matrix(man: ChartedManifold, X: UnitField, p, frame: Frame | None = None,
                unit_tol: float = UNIT_TOL) -> BetaMatrix:
    ud = unit_defect(man, X, p)
    if ud > unit_tol:
        raise NotUnit(f"field {X.name!r} has unit defect {ud:.3e} at {p}")
    g = man.metric_at(p)
    if frame is None:
        frame = frame_at(g, X.value(p))
    e = np.stack([frame.e1, frame.e2])
    derivs = covariant_derivative(man, np.repeat(as_points(p)[0], 2, axis=0), X, e)
    b = e @ g @ derivs.T  # b[i, j] = <beta(e_j), e_i>
    tangency = float(np.abs(derivs @ g @ frame.X).max())
    return BetaMatrix(B=b, frame=frame, tangency=tangency)


def contact_defect(beta: BetaMatrix) -> float:
    """d(alpha)(e1, e2) = B21 - B12; zero iff beta is self-adjoint."""
    return float(beta.B[1, 0] - beta.B[0, 1])


@dataclass(frozen=True)
class RealPair:
    lam: float
    mu: float


@dataclass(frozen=True)
class ComplexPair:
    """Conjugate eigenvalues a +/- b*i with b > 0."""

    a: float
    b: float


EigenClass = RealPair | ComplexPair


def eigen_classify(beta: BetaMatrix) -> EigenClass:
    """Closed-form 2x2 eigenvalues; complex only beyond the discriminant noise floor."""
    b = beta.B
    tr = b[0, 0] + b[1, 1]
    det = b[0, 0] * b[1, 1] - b[0, 1] * b[1, 0]
    disc = tr * tr - 4.0 * det
    if disc < -EIGEN_DISC_TOL:
        return ComplexPair(a=float(0.5 * tr), b=float(0.5 * np.sqrt(-disc)))
    root = np.sqrt(max(disc, 0.0))
    return RealPair(lam=float(0.5 * (tr + root)), mu=float(0.5 * (tr - root)))


def beta_rank(beta: BetaMatrix, rel_tol: float = RANK_REL_TOL,
              abs_tol: float = RANK_ABS_TOL) -> int:
    """Numerical rank of B from its singular values."""
    sv = np.linalg.svd(beta.B, compute_uv=False)
    cut = max(rel_tol * sv[0], abs_tol)
    return int(np.sum(sv > cut))


# ---------------------------------------------------------------------------
# Per-point diagnosis
# ---------------------------------------------------------------------------

@dataclass
class PointDiagnosis:
    p: np.ndarray
    unit_defect: float
    geodesic_defect: float
    killing_defect: float
    contact_defect: float
    eigen: EigenClass
    ric_X: float
    Delta: float
    delta: float
    beta_rank: int
    beta: BetaMatrix


def diagnose_point(man: ChartedManifold, X: UnitField, p,
                   unit_tol: float = UNIT_TOL) -> PointDiagnosis:
    """Evaluate every pointwise diagnostic of the field at p."""
    pt = np.asarray(p, dtype=float)
    man.require_inside(as_points(pt)[0])
    g = man.metric_at(pt)
    frame = frame_at(g, X.value(pt))
    beta = beta_matrix(man, X, pt, frame=frame, unit_tol=unit_tol)
    jac = jacobi_tensor(man, pt, frame)
    return PointDiagnosis(
        p=pt,
        unit_defect=unit_defect(man, X, pt),
        geodesic_defect=geodesic_defect(man, X, pt),
        killing_defect=killing_defect(man, X, pt, frame=frame),
        contact_defect=contact_defect(beta),
        eigen=eigen_classify(beta),
        ric_X=float(jac.matrix[0, 0] + jac.matrix[1, 1]),
        Delta=jac.Delta,
        delta=jac.delta,
        beta_rank=beta_rank(beta),
        beta=beta,
    )


# ---------------------------------------------------------------------------
# Vectorised contact defect (quadrature fast path)
# ---------------------------------------------------------------------------

def contact_defect_grid(man: ChartedManifold, X: UnitField, points,
                        orientation: int = 1):
    """Contact defect at an (N, 3) batch of points in oriented frames.

    Same mathematics as ``contact_defect(beta_matrix(...))`` point by point,
    vectorised for quadrature over large grids.
    """
    pts, single = as_points(points)
    g = np.asarray(man.metric_fn(pts), dtype=float)
    xv = np.asarray(X.component_fn(pts), dtype=float)
    xn = xv / g_norm(g, xv)[:, None]
    e1, e2 = frames_at(g, xn, orientation=orientation)
    jac = vector_jacobian(man, X, pts)
    gam = christoffel(man, pts)

    def nabla(v):
        return (np.einsum("nkj,nj->nk", jac, v)
                + np.einsum("nkij,ni,nj->nk", gam, v, xv))

    b21 = inner(g, nabla(e1), e2)
    b12 = inner(g, nabla(e2), e1)
    out = b21 - b12
    return float(out[0]) if single else out
