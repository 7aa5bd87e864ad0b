"""Orbit integration, parallel transport, adapted Jacobi fields and the
Riccati / trace-evolution / Wronskian diagnostics along flow lines.

The orbit, the parallel frame and the Jacobi components are integrated
jointly as one augmented first-order system with classical fixed-step RK4:

    p'   = X(p)
    e_a' = -Gamma(p)(X(p), e_a)                   (parallel transport)
    J''  = -M(t) J     in frame components, M the Jacobi-tensor matrix

Since frames are parallel and X is geodesic, the second-order Jacobi
equation reduces exactly to scalar components in the transported frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .curvature import (assemble_riemann, christoffel, christoffel_with_partials,
                        riemann_tensor, vector_jacobian)
from .errors import OutOfChart, PoleReached, StepTooLarge
from .field import UnitField, beta_matrix
from .geometry import ChartedManifold, Frame, frame_at, inner

#: target accuracy of the fixed-step integration; residual invariants are
#: asserted against small multiples of this
DEFAULT_INTEGRATION_TOL = 1e-5

FRAME_DRIFT_LIMIT = 1e-6


def rk4_step(f, t, y, h):
    """One classical Runge-Kutta 4 step for y' = f(t, y)."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@dataclass
class OrbitSample:
    """One integration sample: point, transported frame and attached data."""

    t: float
    p: np.ndarray
    frame: Frame
    B: Optional[np.ndarray] = None      # shape operator matrix (2, 2)
    M: Optional[np.ndarray] = None      # Jacobi tensor matrix (2, 2)
    J: Optional[np.ndarray] = None      # first adapted solution, components (2,)
    Jdot: Optional[np.ndarray] = None
    Jt: Optional[np.ndarray] = None     # second adapted solution
    Jtdot: Optional[np.ndarray] = None
    A: Optional[float] = None           # Wronskian of (J, Jt)


@dataclass
class Trajectory:
    """Orbit of a unit field with per-sample frames, B, M and Jacobi data.

    Array layout: t (n,), points (n, 3), e1/e2 (n, 3), B/M (n, 2, 2); the
    Jacobi blocks J, Jdot, Jt, Jtdot are (n, 2) and A is (n,) when the
    canonical adapted pair was integrated (``with_jacobi``).
    """

    t: np.ndarray
    points: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    B: np.ndarray
    M: np.ndarray
    X_along: np.ndarray  # unit field values at the samples, (n, 3)
    step: float
    truncated: bool = False
    J: Optional[np.ndarray] = None
    Jdot: Optional[np.ndarray] = None
    Jt: Optional[np.ndarray] = None
    Jtdot: Optional[np.ndarray] = None
    A: Optional[np.ndarray] = None
    adapted_residual: Optional[float] = None
    _samples: Optional[list] = field(default=None, repr=False)

    def __len__(self):
        return self.t.shape[0]

    @property
    def samples(self):
        if self._samples is None:
            self._samples = [
                OrbitSample(
                    t=float(self.t[k]), p=self.points[k],
                    frame=Frame(self.X_along[k], self.e1[k], self.e2[k]),
                    B=self.B[k], M=self.M[k],
                    J=None if self.J is None else self.J[k],
                    Jdot=None if self.Jdot is None else self.Jdot[k],
                    Jt=None if self.Jt is None else self.Jt[k],
                    Jtdot=None if self.Jtdot is None else self.Jtdot[k],
                    A=None if self.A is None else float(self.A[k]),
                )
                for k in range(len(self))
            ]
        return self._samples

    def ambient_jacobi(self, which="J"):
        """Adapted solution as ambient chart vectors J1*e1 + J2*e2, shape (n, 3)."""
        comp = getattr(self, which)
        if comp is None:
            raise ValueError("trajectory carries no Jacobi data")
        return comp[:, 0, None] * self.e1 + comp[:, 1, None] * self.e2


def _transport_rhs(man, X, with_jacobi, njac):
    def rhs(t, y):
        p = y[0:3]
        e = y[3:9].reshape(2, 3)
        xv = X.value(p)
        if not with_jacobi:
            gam = christoffel(man, p)
            de = -np.einsum("kij,i,aj->ak", gam, xv, e)
            return np.concatenate([xv, de.ravel()])
        gam, dgam = christoffel_with_partials(man, p)
        dp = xv
        de = -np.einsum("kij,i,aj->ak", gam, xv, e)
        riem = assemble_riemann(gam[None], dgam[None])[0]
        g = man.metric_at(p)
        rx = np.einsum("lijk,ai,j,k->al", riem, e, xv, xv)    # R(e_a, X)X
        m = np.einsum("bl,lm,am->ab", rx, g, e).T             # M_ab = <R(e_b,X)X, e_a>
        out = [dp, de.ravel()]
        blocks = y[9:].reshape(njac, 2, 2)                    # per solution: (J, Jdot)
        for s in range(njac):
            j, jdot = blocks[s]
            out.extend([jdot, -m @ j])
        return np.concatenate(out)
    return rhs


def integrate_orbit(man: ChartedManifold, X: UnitField, p0, t_end, step,
                    with_jacobi=True, jacobi_inits=None, seeds=(None, None)) -> Trajectory:
    """Integrate the orbit of X from p0 with transported frames.

    Stops early (``truncated``) if the orbit or an RK4 stage leaves the
    chart. ``jacobi_inits`` is an optional list of (J0, Jdot0) frame
    component pairs; by default the canonical adapted pair with J(0) = e1,
    Jt(0) = e2 and J'(0) = B(0) J(0) is integrated alongside.
    """
    p0 = np.asarray(p0, dtype=float)
    if not man.contains(p0):
        raise OutOfChart(f"orbit start outside the chart of {man.name!r}")
    if step <= 0:
        raise ValueError("step must be positive")

    g0 = man.metric_at(p0)
    fr0 = frame_at(g0, X.value(p0), seed1=seeds[0], seed2=seeds[1])
    b0 = beta_matrix(man, X, p0, frame=fr0).B
    if with_jacobi and jacobi_inits is None:
        jacobi_inits = [(np.array([1.0, 0.0]), b0 @ np.array([1.0, 0.0])),
                        (np.array([0.0, 1.0]), b0 @ np.array([0.0, 1.0]))]
    njac = len(jacobi_inits) if with_jacobi else 0

    y = [p0, fr0.e1, fr0.e2]
    if with_jacobi:
        for j0, jdot0 in jacobi_inits:
            y.extend([np.asarray(j0, float), np.asarray(jdot0, float)])
    y = np.concatenate(y)

    rhs = _transport_rhs(man, X, with_jacobi, njac)
    # keep the grid uniform and land exactly on t_end
    nsteps = max(1, int(round(t_end / step)))
    step = t_end / nsteps
    states = [y]
    truncated = False
    for _ in range(nsteps):
        try:
            y_next = rk4_step(rhs, 0.0, y, step)
        except OutOfChart:
            truncated = True
            break
        if not man.contains(y_next[0:3]):
            truncated = True
            break
        y = y_next
        states.append(y)

    arr = np.stack(states)
    n = arr.shape[0]
    t = np.arange(n) * step
    points = arr[:, 0:3]
    e1 = arr[:, 3:6]
    e2 = arr[:, 6:9]

    g = man.metric_at(points)
    xv = X.value(points)
    xn = xv / np.sqrt(inner(g, xv, xv))[:, None]
    drift = _frame_drift(g, xn, e1, e2)
    if drift > FRAME_DRIFT_LIMIT:
        raise StepTooLarge(
            f"frame orthonormality drifted to {drift:.3e}; halve the step")

    traj = Trajectory(t=t, points=points, e1=e1, e2=e2,
                      B=_beta_along(man, X, g, xv, points, e1, e2),
                      M=_jacobi_along(man, g, points, xn, e1, e2),
                      X_along=xn, step=step, truncated=truncated)
    if with_jacobi:
        blocks = arr[:, 9:].reshape(n, njac, 2, 2)
        traj.J, traj.Jdot = blocks[:, 0, 0, :], blocks[:, 0, 1, :]
        if njac > 1:
            traj.Jt, traj.Jtdot = blocks[:, 1, 0, :], blocks[:, 1, 1, :]
            traj.A = traj.J[:, 0] * traj.Jt[:, 1] - traj.J[:, 1] * traj.Jt[:, 0]
        res = [np.linalg.norm(blocks[:, s, 1, :] - np.einsum("nij,nj->ni", traj.B, blocks[:, s, 0, :]), axis=1)
               for s in range(njac)]
        traj.adapted_residual = float(np.max(res))
    return traj


def _frame_drift(g, xn, e1, e2):
    vecs = np.stack([xn, e1, e2], axis=1)   # (n, 3, 3)
    gram = np.einsum("nai,nij,nbj->nab", vecs, g, vecs)
    return float(np.abs(gram - np.eye(3)).max())


def _beta_along(man, X, g, xv, points, e1, e2):
    jac = vector_jacobian(man, X, points)
    gam = christoffel(man, points)
    e = np.stack([e1, e2], axis=1)  # (n, 2, 3)
    derivs = (np.einsum("nkj,naj->nak", jac, e)
              + np.einsum("nkij,nai,nj->nak", gam, e, xv))
    return np.einsum("nai,nij,nbj->nba", derivs, g, e)  # B[n, i, j] = <beta(e_j), e_i>


def _jacobi_along(man, g, points, xn, e1, e2):
    riem = riemann_tensor(man, points)
    e = np.stack([e1, e2], axis=1)
    rx = np.einsum("nlijk,nai,nj,nk->nal", riem, e, xn, xn)
    return np.einsum("nbl,nlm,nam->nab", rx, g, e)


# ---------------------------------------------------------------------------
# Adapted Jacobi fields
# ---------------------------------------------------------------------------

@dataclass
class AdaptedJacobi:
    """An adapted Jacobi solution along an orbit, in frame components."""

    t: np.ndarray
    J: np.ndarray      # (n, 2)
    Jdot: np.ndarray   # (n, 2)
    residual: float    # max |Jdot - B J| over the samples

    def norms(self):
        return np.linalg.norm(self.J, axis=1)


def adapted_jacobi(man: ChartedManifold, X: UnitField, traj: Trajectory, v0) -> AdaptedJacobi:
    """Integrate the adapted Jacobi field with J(0) = v0 along traj's orbit.

    v0 is an ambient tangent vector orthogonal to X at the orbit start (to
    within 1e-8); the initial derivative is beta(v0) as dictated by
    adaptedness, and the reported residual measures how well J' = beta(J)
    persists along the orbit.
    """
    p0 = traj.points[0]
    g0 = man.metric_at(p0)
    fr0 = Frame(traj.X_along[0], traj.e1[0], traj.e2[0])
    v0 = np.asarray(v0, dtype=float)
    if abs(inner(g0, v0, fr0.X)) > 1e-8:
        raise ValueError("v0 must be orthogonal to the field at the orbit start")
    comp = np.array([inner(g0, v0, fr0.e1), inner(g0, v0, fr0.e2)])
    b0 = traj.B[0]
    sub = integrate_orbit(man, X, p0, float(traj.t[-1]), traj.step,
                          with_jacobi=True, jacobi_inits=[(comp, b0 @ comp)])
    return AdaptedJacobi(t=sub.t, J=sub.J, Jdot=sub.Jdot, residual=sub.adapted_residual)


# ---------------------------------------------------------------------------
# Residuals along trajectories
# ---------------------------------------------------------------------------

def riccati_residual(man: ChartedManifold, X: UnitField, traj: Trajectory) -> float:
    """max over interior samples of || B' + B^2 + M ||_F in the parallel frame."""
    if len(traj) < 3:
        raise ValueError("need at least 3 samples")
    b, m, h = traj.B, traj.M, traj.step
    bdot = (b[2:] - b[:-2]) / (2.0 * h)
    res = bdot + np.einsum("nij,njk->nik", b[1:-1], b[1:-1]) + m[1:-1]
    return float(np.sqrt((res ** 2).sum(axis=(1, 2))).max())


def trace_evolution_residual(man: ChartedManifold, X: UnitField, traj: Trajectory) -> float:
    """max over interior samples of | (tr B)' + Ric(X) + tr(B^2) |."""
    if len(traj) < 3:
        raise ValueError("need at least 3 samples")
    trb = np.trace(traj.B, axis1=1, axis2=2)
    ric = np.trace(traj.M, axis1=1, axis2=2)
    trb2 = np.einsum("nij,nji->n", traj.B, traj.B)
    ddt = (trb[2:] - trb[:-2]) / (2.0 * traj.step)
    return float(np.abs(ddt + ric[1:-1] + trb2[1:-1]).max())


@dataclass
class WronskianResult:
    t: np.ndarray
    A: np.ndarray            # measured determinant of the adapted pair
    A_expected: np.ndarray   # exp of the trapezoid integral of tr B
    residual: float          # max |A - A_expected|


def wronskian(traj: Trajectory) -> WronskianResult:
    """Wronskian A(t) of the canonical adapted pair against exp(int tr B)."""
    if traj.A is None:
        raise ValueError("trajectory was integrated without the adapted pair")
    trb = np.trace(traj.B, axis1=1, axis2=2)
    integral = np.concatenate([[0.0], np.cumsum(0.5 * (trb[1:] + trb[:-1]) * traj.step)])
    expected = np.exp(integral)
    return WronskianResult(t=traj.t, A=traj.A, A_expected=expected,
                           residual=float(np.abs(traj.A - expected).max()))


def max_parallel_jacobi_defect(traj: Trajectory) -> float:
    """max over consecutive samples of ||M(t+h) - M(t)||_F / h."""
    dm = np.diff(traj.M, axis=0)
    return float(np.sqrt((dm ** 2).sum(axis=(1, 2))).max() / traj.step)


def noncontact_eigen_drift(traj: Trajectory, defect_tol: float = 1e-8):
    """Optional diagnostic: eigenvalue drift along a non-contact orbit.

    Returns the max deviation of the real shape-operator eigenvalues from
    their initial values, or None if any sample is contact (|B21 - B12|
    above ``defect_tol``). Reported for information only.
    """
    defect = traj.B[:, 1, 0] - traj.B[:, 0, 1]
    if np.any(np.abs(defect) > defect_tol):
        return None
    tr = np.trace(traj.B, axis1=1, axis2=2)
    det = traj.B[:, 0, 0] * traj.B[:, 1, 1] - traj.B[:, 0, 1] * traj.B[:, 1, 0]
    disc = np.clip(tr * tr - 4.0 * det, 0.0, None)
    lam = 0.5 * (tr + np.sqrt(disc))
    mu = 0.5 * (tr - np.sqrt(disc))
    return float(max(np.abs(lam - lam[0]).max(), np.abs(mu - mu[0]).max()))


# ---------------------------------------------------------------------------
# Space-form closed forms
# ---------------------------------------------------------------------------

def arcoth(x):
    """Inverse hyperbolic cotangent, 0.5 log((x+1)/(x-1)) for |x| > 1."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) <= 1.0):
        raise ValueError("arcoth requires |x| > 1")
    out = 0.5 * np.log((x + 1.0) / (x - 1.0))
    return float(out) if out.ndim == 0 else out


def jacobi_component_closed_form(kappa: float, j0: float, jp0: float, t):
    """Solution of j'' + kappa j = 0 with j(0) = j0, j'(0) = jp0."""
    t = np.asarray(t, dtype=float)
    if kappa > 0:
        r = np.sqrt(kappa)
        out = j0 * np.cos(r * t) + (jp0 / r) * np.sin(r * t)
    elif kappa < 0:
        r = np.sqrt(-kappa)
        out = j0 * np.cosh(r * t) + (jp0 / r) * np.sinh(r * t)
    else:
        out = j0 + jp0 * t
    return float(out) if out.ndim == 0 else out


def first_zero_space_form(c: float, lam: float):
    """Smallest positive zero of the normalised component (j0 = 1, j'0 = lam).

    Returns None when the component stays positive for positive times; for
    c < 0 this is exactly the rigidity regime lam >= -sqrt(|c|).
    """
    if c > 0:
        r = np.sqrt(c)
        return float((np.pi / 2 - np.arctan(-lam / r)) / r)  # arccot into (0, pi)
    if c == 0:
        return -1.0 / lam if lam < 0 else None
    r = np.sqrt(-c)
    ratio = -lam / r
    if ratio > 1.0:
        return float(arcoth(ratio) / r)
    return None


def trace_comparison(f0: float, t: float) -> float:
    """Comparison solution of f' + f^2/2 = 0 with f(0) = f0.

    Closed form ((t/2) + 1/f0)^(-1); blows up at t = -2/f0, where
    PoleReached is raised.
    """
    if f0 == 0.0:
        raise ValueError("f0 must be nonzero")
    if abs(t + 2.0 / f0) < 1e-12:
        raise PoleReached(f"comparison function pole at t = {-2.0 / f0!r}")
    return 1.0 / (t / 2.0 + 1.0 / f0)
