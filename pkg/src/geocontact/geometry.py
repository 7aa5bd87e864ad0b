"""Charts, metrics, frames and the differentiation backend.

Points and tangent vectors are plain numpy arrays of shape (3,) in chart
coordinates; most kernels also accept an (N, 3) batch and then return
an output with a leading batch axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import expr
from .errors import DegenerateSeed, OutOfChart

Array = np.ndarray

#: default absolute step for central differences on opaque functions
DEFAULT_DIFF_STEP = 1e-5

#: residual bound enforced on constructed orthonormal frames
FRAME_TOL = 1e-10

#: sine of the angle below which a seed counts as parallel to the field
SEED_ANGLE_TOL = 1e-6

_STD_BASIS = np.eye(3)


def as_points(p):
    """Normalise input to an (N, 3) float array; report if it was a single point."""
    arr = np.asarray(p, dtype=float)
    if arr.ndim == 1:
        if arr.shape != (3,):
            raise ValueError("a point has exactly 3 coordinates")
        return arr[None, :], True
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError("expected shape (3,) or (N, 3)")
    return arr, False


@dataclass(frozen=True)
class VolumeParametrization:
    """Rectangular parameter box mapped onto the manifold for quadrature.

    ``chart_map`` sends (N, 3) parameter tuples to chart points, ``density``
    gives the Riemannian volume density relative to the parameter measure.
    """

    name: str
    box: tuple  # ((a1, b1), (a2, b2), (a3, b3))
    chart_map: Callable[[Array], Array]
    density: Callable[[Array], Array]


@dataclass
class ChartedManifold:
    """A single chart: metric field plus domain predicate on an open set.

    When the metric entries are expression-backed (``metric_exprs``), first
    derivatives of the metric are computed exactly with dual numbers; for an
    opaque ``metric_fn`` (or with ``diff_mode="central"``) central
    differences with step ``diff_step`` are used instead.
    """

    name: str
    metric_fn: Callable[[Array], Array]  # (N, 3) -> (N, 3, 3)
    domain_fn: Callable[[Array], Array]  # (N, 3) -> (N,) bool
    metric_exprs: Optional[tuple] = None  # 3x3 nested tuple of ExprAst
    diff_mode: str = "dual"
    diff_step: float = DEFAULT_DIFF_STEP
    volume_param: Optional[VolumeParametrization] = field(default=None, repr=False)

    def metric_at(self, p) -> Array:
        pts, single = as_points(p)
        g = np.asarray(self.metric_fn(pts), dtype=float)
        return g[0] if single else g

    def contains(self, p):
        pts, single = as_points(p)
        ok = np.asarray(self.domain_fn(pts), dtype=bool) & np.all(np.isfinite(pts), axis=1)
        return bool(ok[0]) if single else ok

    def require_inside(self, pts):
        if not np.all(self.contains(pts)):
            raise OutOfChart(f"point outside the chart of {self.name!r}")


def _broadcast_column(values, n):
    out = np.asarray(values, dtype=float)
    if out.ndim == 0:
        return np.full(n, float(out))
    return out


def _distinct_upper(asts):
    """Group the 6 upper-triangle slots by structurally identical ASTs."""
    groups = {}
    for i in range(3):
        for j in range(i, 3):
            groups.setdefault(asts[i][j], []).append((i, j))
    return groups


def metric_fn_from_exprs(asts):
    """Vectorised metric evaluator from a 3x3 (upper-triangle read) AST table."""
    groups = _distinct_upper(asts)

    def fn(pts):
        n = pts.shape[0]
        g = np.empty((n, 3, 3))
        for ast, slots in groups.items():
            col = _broadcast_column(expr.eval_scalar(ast, pts), n)
            for i, j in slots:
                g[:, i, j] = g[:, j, i] = col
        return g
    return fn


def manifold_from_exprs(name, entries, domain="true", **kwargs) -> ChartedManifold:
    """Build a chart from 3x3 metric expression strings and a domain expression.

    Only the upper triangle of ``entries`` is read (the metric is symmetric
    by storage). ``domain`` is either the literal "true" or an expression
    whose positivity defines the chart.
    """
    asts = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(i, 3):
            asts[i][j] = asts[j][i] = expr.parse(entries[i][j])
    asts = tuple(tuple(row) for row in asts)

    if isinstance(domain, str):
        if domain.strip() == "true":
            def domain_fn(pts):
                return np.ones(pts.shape[0], dtype=bool)
        else:
            dom_ast = expr.parse(domain)

            def domain_fn(pts):
                vals = expr.eval_scalar(dom_ast, pts)
                return np.asarray(vals) > 0.0
    else:
        domain_fn = domain

    return ChartedManifold(name=name, metric_fn=metric_fn_from_exprs(asts),
                           domain_fn=domain_fn, metric_exprs=asts, **kwargs)


# ---------------------------------------------------------------------------
# Metric derivatives
# ---------------------------------------------------------------------------

def _stencil(pts, h):
    """All 6 axis shifts of pts: shape (6, N, 3), order (+1,-1,+2,-2,+3,-3)."""
    n = pts.shape[0]
    out = np.empty((6, n, 3))
    for k in range(3):
        out[2 * k] = pts
        out[2 * k][:, k] += h
        out[2 * k + 1] = pts
        out[2 * k + 1][:, k] -= h
    return out


def metric_partials(man: ChartedManifold, p):
    """First partials of the metric: dg[..., k, i, j] = d_k g_ij."""
    pts, single = as_points(p)
    man.require_inside(pts)
    n = pts.shape[0]
    if man.metric_exprs is not None and man.diff_mode == "dual":
        dg = np.empty((n, 3, 3, 3))
        for ast, slots in _distinct_upper(man.metric_exprs).items():
            d = expr.eval_dual(ast, pts)
            part = d.partials if d.partials.ndim == 2 else np.broadcast_to(d.partials, (n, 3))
            for i, j in slots:
                dg[:, :, i, j] = dg[:, :, j, i] = part
    else:
        h = man.diff_step
        shifted = _stencil(pts, h)
        man.require_inside(shifted.reshape(-1, 3))
        gs = np.asarray(man.metric_fn(shifted.reshape(-1, 3)), dtype=float).reshape(6, n, 3, 3)
        dg = np.stack([(gs[2 * k] - gs[2 * k + 1]) / (2 * h) for k in range(3)], axis=1)
    return dg[0] if single else dg


# ---------------------------------------------------------------------------
# Inner products and frames
# ---------------------------------------------------------------------------

def inner(gm, v, w):
    """g-inner product; supports (3, 3) with (3,) vectors or batched (N, ...) input."""
    gm = np.asarray(gm, dtype=float)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if gm.ndim == 2:
        return float(v @ gm @ w)
    return np.einsum("ni,nij,nj->n", v, gm, w)


def g_norm(gm, v):
    return np.sqrt(inner(gm, v, v))


@dataclass(frozen=True)
class Frame:
    """g-orthonormal frame (X, e1, e2) at a point, X the unit field value."""

    X: Array
    e1: Array
    e2: Array

    def basis(self):
        return self.X, self.e1, self.e2


def frame_residual(gm, frame: Frame) -> float:
    """Max deviation of the frame Gram matrix from the identity."""
    vecs = np.stack(frame.basis())
    gram = vecs @ np.asarray(gm) @ vecs.T
    return float(np.abs(gram - np.eye(3)).max())


def orthonormal_complement(gm, X, seed1=None, seed2=None):
    """Gram-Schmidt completion of X to a g-orthonormal frame of its complement.

    Seeds default to the first two standard basis vectors. A seed within
    angle SEED_ANGLE_TOL of span(X) is skipped; if both seeds are skipped a
    DegenerateSeed is raised. When fewer than two seeds survive, remaining
    directions are drawn from the standard basis triple, in order.
    """
    gm = np.asarray(gm, dtype=float)
    X = np.asarray(X, dtype=float)
    Xn = X / g_norm(gm, X)
    seeds = [_STD_BASIS[0] if seed1 is None else np.asarray(seed1, dtype=float),
             _STD_BASIS[1] if seed2 is None else np.asarray(seed2, dtype=float)]

    accepted = []
    seeds_used = 0
    for which, cand in enumerate(seeds + [b for b in _STD_BASIS]):
        if len(accepted) == 2:
            break
        v = cand - inner(gm, cand, Xn) * Xn
        for u in accepted:
            v = v - inner(gm, v, u) * u
        norm = g_norm(gm, v)
        if norm <= SEED_ANGLE_TOL * g_norm(gm, cand):
            continue
        if which >= 2 and seeds_used == 0 and len(accepted) == 0:
            # both explicit seeds were degenerate with span(X)
            raise DegenerateSeed("both seeds parallel to the field; "
                                 "retry with the standard basis triple")
        if which < 2:
            seeds_used += 1
        accepted.append(v / norm)
    if len(accepted) < 2:
        raise DegenerateSeed("could not complete an orthonormal frame")
    return accepted[0], accepted[1]


def frame_at(gm, X, seed1=None, seed2=None, prev: Frame | None = None,
             orientation: int = 1) -> Frame:
    """Orthonormal frame of X-perp with deterministic orientation.

    The frame is oriented so that det[X e1 e2] has the sign of
    ``orientation`` in chart coordinates (e2 is flipped if needed). With
    ``prev`` given, e1 and e2 are instead sign-aligned with the previous
    frame so that frames vary continuously along a sampled orbit.
    """
    gm = np.asarray(gm, dtype=float)
    X = np.asarray(X, dtype=float)
    Xn = X / g_norm(gm, X)
    try:
        e1, e2 = orthonormal_complement(gm, Xn, seed1, seed2)
    except DegenerateSeed:
        # standard basis fallback: the two directions least aligned with X
        overlap = [abs(inner(gm, b, Xn)) / g_norm(gm, b) for b in _STD_BASIS]
        i, j = np.argsort(overlap)[:2]
        e1, e2 = orthonormal_complement(gm, Xn, _STD_BASIS[min(i, j)], _STD_BASIS[max(i, j)])
    if prev is not None:
        if inner(gm, e1, prev.e1) < 0:
            e1 = -e1
        if inner(gm, e2, prev.e2) < 0:
            e2 = -e2
    elif orientation * np.linalg.det(np.stack([Xn, e1, e2], axis=1)) < 0:
        e2 = -e2
    return Frame(Xn, e1, e2)


def frames_at(g, X, orientation: int = 1):
    """Batched frames from the standard-basis seeds.

    ``g``: (N, 3, 3), ``X``: (N, 3) with unit g-norm (not checked). Returns
    (e1, e2) of shape (N, 3) each, oriented like ``orientation``.
    Implements the same greedy seed rule as ``orthonormal_complement`` with
    the standard basis triple as candidates.
    """
    g = np.asarray(g, dtype=float)
    X = np.asarray(X, dtype=float)
    n = g.shape[0]
    picked = []
    used = np.zeros((n, 3), dtype=bool)  # candidate k already consumed
    for _ in range(2):
        e = np.zeros((n, 3))
        have = np.zeros(n, dtype=bool)
        for k in range(3):
            cand = np.broadcast_to(_STD_BASIS[k], (n, 3))
            v = cand - inner(g, cand, X)[:, None] * X
            for u in picked:
                v = v - inner(g, v, u)[:, None] * u
            norm = g_norm(g, v)
            ok = (~have) & (~used[:, k]) & (norm > SEED_ANGLE_TOL * g_norm(g, cand))
            e[ok] = v[ok] / norm[ok, None]
            used[ok, k] = True
            have |= ok
        if not np.all(have):
            raise DegenerateSeed("standard basis failed to span the complement")
        picked.append(e)
    e1, e2 = picked
    det = np.linalg.det(np.stack([X, e1, e2], axis=2))
    flip = orientation * det < 0
    e2[flip] = -e2[flip]
    return e1, e2
