"""Christoffel symbols, Riemann/sectional/Ricci curvature and the Jacobi tensor.

Index conventions (fixed here once and validated by the space-form tests):

    Gamma[k, i, j]    = Gamma^k_ij
    R[l, i, j, k]     = component l of R(d_i, d_j) d_k
    R(x, y)z          = nabla_x nabla_y z - nabla_y nabla_x z - nabla_[x,y] z
    K(v, w)           = <R(v, w)w, v> / (|v|^2 |w|^2 - <v, w>^2)

With these signs the round sphere has K = +1 and hyperbolic space K = -1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr
from .errors import DegeneratePlane, SingularMetric
from .geometry import ChartedManifold, Frame, as_points, inner, metric_partials

MAX_METRIC_CONDITION = 1e12

#: discriminants within this of zero count as a repeated real eigenvalue
EIGEN_DISC_TOL = 1e-12


def christoffel(man: ChartedManifold, p):
    """Levi-Civita connection coefficients Gamma^k_ij from the Koszul formula."""
    pts, single = as_points(p)
    g = np.asarray(man.metric_fn(pts), dtype=float)
    cond = np.linalg.cond(g)
    if np.any(~np.isfinite(cond)) or np.any(cond > MAX_METRIC_CONDITION):
        raise SingularMetric(f"metric of {man.name!r} numerically singular")
    dg = metric_partials(man, pts)  # (n, k, i, j) = d_k g_ij
    ginv = np.linalg.inv(g)
    # term_{ijl} = d_i g_jl + d_j g_il - d_l g_ij  (dg axes are n, k, i, j)
    term = dg + np.einsum("njil->nijl", dg) - np.einsum("nlij->nijl", dg)
    gamma = 0.5 * np.einsum("nkl,nijl->nkij", ginv, term)
    return gamma[0] if single else gamma


def christoffel_with_partials(man: ChartedManifold, p):
    """Gamma and its central-difference partials in one stencil-batched pass.

    Returns (gam, dgam) with gam[..., k, i, j] = Gamma^k_ij and
    dgam[..., m, k, i, j] = d_m Gamma^k_ij. The point itself and all six
    stencil shifts are evaluated as a single batch.
    """
    pts, single = as_points(p)
    man.require_inside(pts)
    n = pts.shape[0]
    h = man.diff_step
    batch = np.empty((7, n, 3))
    batch[0] = pts
    for k in range(3):
        batch[1 + 2 * k] = pts
        batch[1 + 2 * k][:, k] += h
        batch[2 + 2 * k] = pts
        batch[2 + 2 * k][:, k] -= h
    gam_all = christoffel(man, batch.reshape(-1, 3)).reshape(7, n, 3, 3, 3)
    gam = gam_all[0]
    dgam = np.stack([(gam_all[1 + 2 * m] - gam_all[2 + 2 * m]) / (2 * h) for m in range(3)],
                    axis=1)
    if single:
        return gam[0], dgam[0]
    return gam, dgam


def christoffel_partials(man: ChartedManifold, p):
    """Central-difference partials dG[m, k, i, j] = d_m Gamma^k_ij."""
    return christoffel_with_partials(man, p)[1]


def assemble_riemann(gam, dgam):
    """R[l, i, j, k] from Gamma and its partials (leading batch axis)."""
    return (np.einsum("niljk->nlijk", dgam)            # d_i G^l_jk
            - np.einsum("njlik->nlijk", dgam)          # d_j G^l_ik
            + np.einsum("nlim,nmjk->nlijk", gam, gam)
            - np.einsum("nljm,nmik->nlijk", gam, gam))


def riemann_tensor(man: ChartedManifold, p):
    """Full curvature tensor R[l, i, j, k], the l-component of R(d_i, d_j) d_k."""
    pts, single = as_points(p)
    gam, dgam = christoffel_with_partials(man, pts)
    riem = assemble_riemann(gam, dgam)
    return riem[0] if single else riem


def riemann(man: ChartedManifold, p, x, y, z):
    """Curvature vector R(x, y)z at p."""
    riem = riemann_tensor(man, p)
    return np.einsum("lijk,i,j,k->l", riem, np.asarray(x, float),
                     np.asarray(y, float), np.asarray(z, float))


def sectional(man: ChartedManifold, p, v, w):
    """Sectional curvature of the plane spanned by v and w."""
    g = man.metric_at(p)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    gram = inner(g, v, v) * inner(g, w, w) - inner(g, v, w) ** 2
    if gram <= 1e-12:
        raise DegeneratePlane("sectional curvature of a degenerate plane")
    return float(inner(g, riemann(man, p, v, w, w), v) / gram)


@dataclass(frozen=True)
class JacobiTensor:
    """Matrix of v -> R(v, X)X on X-perp in an orthonormal frame.

    ``Delta`` and ``delta`` are its eigenvalues, the maximum and minimum of
    the mixed sectional curvatures K(v, X) over the plane field.
    """

    matrix: np.ndarray  # (2, 2)
    Delta: float
    delta: float


def _sym_eigenvalues(m):
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    # self-adjoint input: a (numerically) negative discriminant means a
    # repeated eigenvalue, so clamp at zero
    disc = max(tr * tr - 4.0 * det, 0.0)
    root = np.sqrt(disc)
    return 0.5 * (tr + root), 0.5 * (tr - root)


def jacobi_tensor_matrix(man: ChartedManifold, p, frame: Frame):
    g = man.metric_at(p)
    riem = riemann_tensor(man, p)
    e = np.stack([frame.e1, frame.e2])  # (2, 3)
    rx = np.einsum("lijk,ai,j,k->al", riem, e, frame.X, frame.X)  # R(e_a, X)X
    return np.einsum("bl,lm,am->ab", rx, g, e).T  # M_ab = <R(e_b,X)X, e_a>


def jacobi_tensor(man: ChartedManifold, p, frame: Frame) -> JacobiTensor:
    m = jacobi_tensor_matrix(man, p, frame)
    big, small = _sym_eigenvalues(m)
    return JacobiTensor(matrix=m, Delta=float(big), delta=float(small))


def ricci_direction(man: ChartedManifold, p, X, frame: Frame | None = None) -> float:
    """Ricci curvature in the unit direction X: K(e1, X) + K(e2, X)."""
    from .geometry import frame_at  # local import to keep module load light
    if frame is None:
        frame = frame_at(man.metric_at(p), X)
    m = jacobi_tensor_matrix(man, p, frame)
    return float(m[0, 0] + m[1, 1])


# ---------------------------------------------------------------------------
# Covariant differentiation of vector fields
# ---------------------------------------------------------------------------

def vector_jacobian(man: ChartedManifold, W, p):
    """Component Jacobian jac[..., i, j] = d_j W^i of a vector field.

    Uses dual numbers when W exposes ``component_exprs`` (and the manifold
    is in dual mode), falling back to central differences otherwise.
    """
    pts, single = as_points(p)
    n = pts.shape[0]
    exprs = getattr(W, "component_exprs", None)
    if exprs is not None and man.diff_mode == "dual":
        jac = np.empty((n, 3, 3))
        for i in range(3):
            d = expr.eval_dual(exprs[i], pts)
            jac[:, i, :] = d.partials if d.partials.ndim == 2 else np.broadcast_to(d.partials, (n, 3))
    else:
        h = man.diff_step
        fn = W if callable(W) else W.value
        jac = np.empty((n, 3, 3))
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            man.require_inside(np.concatenate([pts + e, pts - e]))
            jac[:, :, j] = (np.asarray(fn(pts + e), float) - np.asarray(fn(pts - e), float)) / (2 * h)
    return jac[0] if single else jac


def _field_values(W, pts):
    fn = W if callable(W) else W.value
    return np.asarray(fn(pts), dtype=float)


def covariant_derivative(man: ChartedManifold, p, W, v):
    """(nabla_v W) at p: directional derivative plus Christoffel correction."""
    pts, single = as_points(p)
    man.require_inside(pts)
    jac = vector_jacobian(man, W, pts)
    gam = christoffel(man, pts)
    wval = _field_values(W, pts)
    v = np.asarray(v, dtype=float)
    vb = np.broadcast_to(v, pts.shape) if v.ndim == 1 else v
    out = np.einsum("nkj,nj->nk", jac, vb) + np.einsum("nkij,ni,nj->nk", gam, vb, wval)
    return out[0] if single else out


def parallel_jacobi_defect(man: ChartedManifold, sample_a, sample_b) -> float:
    """Finite-difference norm of nabla_X R_X between consecutive orbit samples.

    Both samples must carry parallel-transported frames; the Jacobi tensor is
    evaluated in each sample's own frame and the Frobenius norm of the
    difference is divided by the time step.
    """
    dt = float(sample_b.t - sample_a.t)
    ma = jacobi_tensor_matrix(man, sample_a.p, sample_a.frame)
    mb = jacobi_tensor_matrix(man, sample_b.p, sample_b.frame)
    return float(np.linalg.norm(mb - ma) / dt)
