"""Orbit integration, adapted Jacobi fields, residuals and closed forms."""

import numpy as np
import pytest
from scipy.optimize import brentq

import geocontact as gc
from geocontact.errors import OutOfChart, PoleReached, StepTooLarge
from geocontact.flow import (adapted_jacobi, arcoth, first_zero_space_form,
                             integrate_orbit, jacobi_component_closed_form,
                             max_parallel_jacobi_defect, noncontact_eigen_drift,
                             riccati_residual, rk4_step, trace_comparison,
                             trace_evolution_residual, wronskian)

ORBIT_NAMES = ["euclidean_parallel", "euclidean_skew", "s3_hopf", "s3_weighted(2,3)",
               "h2xr_vertical", "h3_vertical", "heisenberg_reeb"]


# ---------------------------------------------------------------------------
# Orbit integration
# ---------------------------------------------------------------------------

def test_flat_parallel_orbit_exact(entries):
    entry = entries["euclidean_parallel"]
    traj = integrate_orbit(entry.manifold, entry.field, np.zeros(3), 1.0, 1e-2)
    np.testing.assert_allclose(traj.points[-1], [0, 0, 1], atol=1e-15)


def test_h3_orbit_exponential(entries):
    entry = entries["h3_vertical"]
    traj = integrate_orbit(entry.manifold, entry.field, np.array([0.0, 0, 1.0]),
                           2.0, 1e-3, with_jacobi=False)
    assert abs(traj.points[-1, 2] - np.exp(2.0)) / np.exp(2.0) < 1e-8


def test_hopf_orbit_periodic(entries):
    entry = entries["s3_hopf"]
    p0 = np.array([0.3, 0.2, 0.1])
    traj = integrate_orbit(entry.manifold, entry.field, p0, 2 * np.pi, 1e-3,
                           with_jacobi=False)
    assert np.abs(traj.points[-1] - p0).max() < 1e-6


def test_orbit_requires_in_chart_start(entries):
    entry = entries["h3_vertical"]
    with pytest.raises(OutOfChart):
        integrate_orbit(entry.manifold, entry.field, np.array([0.0, 0, -1.0]), 1.0, 1e-2)


def test_orbit_truncates_at_chart_boundary():
    man = gc.manifold_from_exprs(
        "slab", (("1", "0", "0"), ("0", "1", "0"), ("0", "0", "1")), domain="1 - x3")
    z = gc.UnitField.from_exprs("z", ("0", "0", "1"))
    traj = integrate_orbit(man, z, np.array([0.0, 0.0, 0.5]), 2.0, 1e-2)
    assert traj.truncated
    assert traj.points[-1, 2] < 1.0


def test_step_too_large_raises(entries):
    entry = entries["s3_hopf"]
    with pytest.raises(StepTooLarge):
        integrate_orbit(entry.manifold, entry.field, np.array([0.3, 0.2, 0.1]), 2.0, 0.5)


def test_rk4_convergence_order(entries):
    """Halving the step cuts the endpoint error by at least 8x."""
    entry = entries["h3_vertical"]
    p0 = np.array([0.0, 0.0, 1.0])
    errors = []
    for h in (0.02, 0.01):
        traj = integrate_orbit(entry.manifold, entry.field, p0, 1.0, h, with_jacobi=False)
        errors.append(abs(traj.points[-1, 2] - np.e))
    assert errors[0] / errors[1] >= 8.0


def test_frames_stay_parallel(entries, orbit_cache):
    """Covariant derivative of the transported frame vanishes numerically."""
    from geocontact.curvature import christoffel
    entry = entries["s3_hopf"]
    traj = orbit_cache("s3_hopf")
    k = len(traj) // 2
    h = traj.step
    de1 = (traj.e1[k + 1] - traj.e1[k - 1]) / (2 * h)
    gam = christoffel(entry.manifold, traj.points[k])
    cov = de1 + np.einsum("kij,i,j->k", gam, traj.X_along[k], traj.e1[k])
    assert np.abs(cov).max() < 1e-5


# ---------------------------------------------------------------------------
# Adapted Jacobi fields
# ---------------------------------------------------------------------------

def test_h3_adapted_jacobi_decays(entries, orbit_cache):
    traj = orbit_cache("h3_vertical")
    norms = np.linalg.norm(traj.J, axis=1)
    expected = np.exp(-traj.t)
    assert np.abs(norms / expected - 1.0).max() < 1e-6


def test_flat_adapted_jacobi_constant(entries):
    entry = entries["euclidean_parallel"]
    traj = integrate_orbit(entry.manifold, entry.field, np.zeros(3), 1.0, 1e-2)
    assert np.abs(traj.J - traj.J[0]).max() < 1e-14


def test_hopf_adapted_jacobi_norm_constant(entries, orbit_cache):
    """The flow is isometric, so adapted solutions keep their length."""
    traj = orbit_cache("s3_hopf")
    norms = np.linalg.norm(traj.J, axis=1)
    assert np.abs(norms - 1.0).max() < 1e-5


def test_adapted_jacobi_custom_start(entries, orbit_cache):
    entry = entries["h3_vertical"]
    traj = orbit_cache("h3_vertical")
    v0 = traj.e1[0] - 2.0 * traj.e2[0]  # in the orthogonal plane at the start
    sol = adapted_jacobi(entry.manifold, entry.field, traj, v0)
    assert sol.residual < 1e-8
    np.testing.assert_allclose(sol.J[0], [1.0, -2.0], atol=1e-12)
    np.testing.assert_allclose(sol.norms(), np.sqrt(5.0) * np.exp(-sol.t), rtol=1e-6)


def test_adapted_jacobi_rejects_nonorthogonal_start(entries, orbit_cache):
    entry = entries["h3_vertical"]
    traj = orbit_cache("h3_vertical")
    with pytest.raises(ValueError):
        adapted_jacobi(entry.manifold, entry.field, traj, traj.X_along[0])


@pytest.mark.parametrize("name", ORBIT_NAMES)
def test_adaptedness_residual(entries, orbit_cache, name):
    assert orbit_cache(name).adapted_residual < 1e-4


@pytest.mark.parametrize("name", ["euclidean_parallel", "euclidean_skew",
                                  "s3_hopf", "heisenberg_reeb"])
def test_rigidity_no_interior_zeros(entries, orbit_cache, name):
    """Complete fields on these spaces admit no vanishing adapted solution."""
    traj = orbit_cache(name)
    assert np.linalg.norm(traj.J, axis=1).min() > 1e-9
    assert np.linalg.norm(traj.Jt, axis=1).min() > 1e-9


def test_commutation_flow_transversal(entries):
    """The adapted solution matches the finite-difference flow transversal."""
    entry = entries["h3_vertical"]
    p0 = np.array([0.0, 0.0, 1.0])
    step, t_end, s = 5e-3, 1.0, 1e-4
    traj = integrate_orbit(entry.manifold, entry.field, p0, t_end, step)
    v0 = traj.e1[0]
    shifted = integrate_orbit(entry.manifold, entry.field, p0 + s * v0, t_end, step,
                              with_jacobi=False)
    transversal = (shifted.points - traj.points) / s
    ambient = traj.ambient_jacobi("J")
    assert np.abs(transversal - ambient).max() < 1e-3


# ---------------------------------------------------------------------------
# Residuals along catalog orbits
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", ORBIT_NAMES)
def test_riccati_and_trace_residuals(entries, orbit_cache, name):
    entry = entries[name]
    traj = orbit_cache(name)
    assert riccati_residual(entry.manifold, entry.field, traj) < 1e-4
    assert trace_evolution_residual(entry.manifold, entry.field, traj) < 1e-4


def test_h3_trace_identity_values(entries, orbit_cache):
    traj = orbit_cache("h3_vertical")
    trb = np.trace(traj.B, axis1=1, axis2=2)
    ric = np.trace(traj.M, axis1=1, axis2=2)
    trb2 = np.einsum("nij,nji->n", traj.B, traj.B)
    assert np.abs(trb + 2.0).max() < 1e-9
    assert np.abs(ric + 2.0).max() < 1e-8
    assert np.abs(trb2 - 2.0).max() < 1e-9


def test_heisenberg_trace_values(entries, orbit_cache):
    traj = orbit_cache("heisenberg_reeb")
    assert np.abs(np.trace(traj.B, axis1=1, axis2=2)).max() < 1e-10
    assert np.abs(np.trace(traj.M, axis1=1, axis2=2) - 0.5).max() < 1e-8
    assert np.abs(np.einsum("nij,nji->n", traj.B, traj.B) + 0.5).max() < 1e-10


# ---------------------------------------------------------------------------
# Wronskian
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", ORBIT_NAMES)
def test_wronskian_identity(entries, orbit_cache, name):
    wr = wronskian(orbit_cache(name))
    rel = np.abs(wr.A - wr.A_expected) / np.maximum(1.0, np.abs(wr.A))
    assert rel.max() < 1e-4


def test_wronskian_h3_closed_form(orbit_cache):
    wr = wronskian(orbit_cache("h3_vertical"))
    assert np.abs(wr.A / np.exp(-2.0 * wr.t) - 1.0).max() < 1e-4


def test_wronskian_flat_and_hopf(orbit_cache):
    assert np.abs(wronskian(orbit_cache("euclidean_parallel")).A - 1.0).max() < 1e-12
    assert np.abs(wronskian(orbit_cache("s3_hopf")).A - 1.0).max() < 1e-4


def test_wronskian_needs_jacobi_pair(entries):
    entry = entries["euclidean_parallel"]
    traj = integrate_orbit(entry.manifold, entry.field, np.zeros(3), 0.1, 1e-2,
                           with_jacobi=False)
    with pytest.raises(ValueError):
        wronskian(traj)


def test_parallel_jacobi_defect_h3(orbit_cache):
    assert max_parallel_jacobi_defect(orbit_cache("h3_vertical")) < 1e-6


def test_noncontact_eigen_drift_diagnostic(orbit_cache):
    drift = noncontact_eigen_drift(orbit_cache("h3_vertical"))
    assert drift is not None and drift < 1e-8
    assert noncontact_eigen_drift(orbit_cache("s3_hopf")) is None


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def test_closed_form_samples():
    assert abs(jacobi_component_closed_form(1.0, 1.0, 0.0, np.pi / 2)) < 1e-15
    assert jacobi_component_closed_form(0.0, 1.0, -2.0, 0.5) == 0.0
    t0 = arcoth(2.0)
    assert abs(jacobi_component_closed_form(-1.0, 1.0, -2.0, t0)) < 1e-15


def test_closed_form_matches_rk4_integration():
    rng = np.random.default_rng(53)
    for kappa in (-2.0, -1.0, 0.0, 0.5, 3.0):
        j0, jp0 = rng.uniform(-2, 2, 2)

        def f(t, y):
            return np.array([y[1], -kappa * y[0]])

        y = np.array([j0, jp0])
        h = 1e-3
        for k in range(1000):
            y = rk4_step(f, k * h, y, h)
        assert abs(y[0] - jacobi_component_closed_form(kappa, j0, jp0, 1.0)) < 1e-10


def test_arcoth():
    assert abs(arcoth(2.0) - 0.5 * np.log(3.0)) < 1e-15
    with pytest.raises(ValueError):
        arcoth(0.5)


def test_first_zero_examples():
    assert abs(first_zero_space_form(1.0, 0.0) - np.pi / 2) < 1e-15
    assert first_zero_space_form(0.0, -2.0) == 0.5
    assert first_zero_space_form(-1.0, -0.5) is None
    assert first_zero_space_form(0.0, 0.0) is None
    assert first_zero_space_form(0.0, 1.5) is None
    assert abs(first_zero_space_form(-1.0, -2.0) - arcoth(2.0)) < 1e-15


def test_first_zero_against_root_finder():
    """Independent oracle: bracket and bisect the closed-form component."""
    for c, lam in [(1.0, 0.0), (1.0, 1.3), (2.0, -0.4), (0.0, -2.0), (-1.0, -2.0),
                   (-4.0, -3.0)]:
        t0 = first_zero_space_form(c, lam)
        f = lambda t: jacobi_component_closed_form(c, 1.0, lam, t)
        ts = np.linspace(1e-9, 25.0, 40000)
        vals = f(ts)
        sign_change = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
        assert len(sign_change) > 0
        k = sign_change[0]
        root = brentq(f, ts[k], ts[k + 1], xtol=1e-12)
        assert abs(root - t0) < 1e-9


def test_no_zero_in_rigidity_regime():
    ts = np.linspace(0.0, 20.0, 20001)
    for lam in (-0.5, 0.0, 0.7, 1.0):
        assert first_zero_space_form(-1.0, lam) is None
        assert np.all(jacobi_component_closed_form(-1.0, 1.0, lam, ts) > 0.0)
    # boundary eigenvalue: cosh(t) - sinh(t) = exp(-t) stays positive but
    # cancels catastrophically in floating point for large t
    assert first_zero_space_form(-1.0, -1.0) is None
    short = np.linspace(0.0, 5.0, 5001)
    assert np.all(jacobi_component_closed_form(-1.0, 1.0, -1.0, short) > 0.0)


def test_trace_comparison():
    assert trace_comparison(-1.0, 0.0) == -1.0
    assert trace_comparison(-1.0, 1.0) == -2.0
    t = 2.0 - 1e-7
    assert trace_comparison(-1.0, t) < -1e6
    with pytest.raises(PoleReached):
        trace_comparison(-1.0, 2.0)
    with pytest.raises(ValueError):
        trace_comparison(0.0, 1.0)
