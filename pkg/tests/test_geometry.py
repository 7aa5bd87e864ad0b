"""Charts, metric derivatives and orthonormal frames."""

import numpy as np
import pytest

import geocontact as gc
from geocontact.errors import DegenerateSeed, OutOfChart
from geocontact.geometry import (frame_at, frame_residual, frames_at, g_norm,
                                 inner, metric_partials, orthonormal_complement)


def flat():
    return gc.manifold_from_exprs("flat", (("1", "0", "0"), ("0", "1", "0"), ("0", "0", "1")))


# ---------------------------------------------------------------------------
# Metric partials
# ---------------------------------------------------------------------------

def test_flat_partials_vanish():
    dg = metric_partials(flat(), np.array([0.3, -0.7, 1.1]))
    assert np.abs(dg).max() == 0.0


def h3_partials_oracle(p):
    # g_ij = delta_ij / x3^2 differentiates to d3 g_ij = -2 delta_ij / x3^3
    dg = np.zeros((3, 3, 3))
    dg[2] = -2.0 * np.eye(3) / p[2] ** 3
    return dg


def test_h3_partials_match_analytic(entries):
    man = entries["h3_vertical"].manifold
    p = np.array([0.0, 0.0, 2.0])
    dg = metric_partials(man, p)
    assert abs(dg[2, 0, 0] - (-0.25)) < 1e-14
    np.testing.assert_allclose(dg, h3_partials_oracle(p), atol=1e-14)


def test_h2xr_partials_match_analytic(entries):
    man = entries["h2xr_vertical"].manifold
    dg = metric_partials(man, np.array([0.0, 1.0, 0.0]))
    assert abs(dg[1, 0, 0] - (-2.0)) < 1e-14
    assert abs(dg[1, 1, 1] - (-2.0)) < 1e-14
    assert np.abs(dg[0]).max() == 0.0 and np.abs(dg[2]).max() == 0.0


def test_central_differences_second_order():
    """Halving the step shrinks the central-difference error by >= 3x."""
    man = gc.builtin("h3_vertical").manifold  # fresh copy, mode gets mutated
    p = np.array([0.2, -0.4, 1.3])
    exact = metric_partials(man, p)  # dual-number backend
    man.diff_mode = "central"
    errors = []
    for h in (1e-3, 5e-4):
        man.diff_step = h
        errors.append(np.abs(metric_partials(man, p) - exact).max())
    assert errors[0] / errors[1] >= 3.0


def test_partials_out_of_chart():
    man = gc.builtin("h3_vertical").manifold
    with pytest.raises(OutOfChart):
        metric_partials(man, np.array([0.0, 0.0, -1.0]))
    # central-difference stencil must stay inside as well
    man.diff_mode = "central"
    man.diff_step = 1e-2
    with pytest.raises(OutOfChart):
        metric_partials(man, np.array([0.0, 0.0, 5e-3]))


# ---------------------------------------------------------------------------
# Inner products
# ---------------------------------------------------------------------------

def test_inner_examples(entries):
    assert inner(np.eye(3), np.array([1.0, 0, 0]), np.array([0.0, 1, 0])) == 0.0
    g = entries["h3_vertical"].manifold.metric_at(np.array([0.0, 0.0, 2.0]))
    assert abs(inner(g, np.array([0.0, 0, 1]), np.array([0.0, 0, 1])) - 0.25) < 1e-15


def test_inner_positive_definite(entries):
    rng = np.random.default_rng(3)
    man = entries["heisenberg_reeb"].manifold
    for _ in range(25):
        p = rng.uniform(-1.5, 1.5, 3)
        v = rng.standard_normal(3)
        assert inner(man.metric_at(p), v, v) > 0.0


# ---------------------------------------------------------------------------
# Frames
# ---------------------------------------------------------------------------

def test_complement_identity_vertical():
    e1, e2 = orthonormal_complement(np.eye(3), np.array([0.0, 0, 1]))
    np.testing.assert_allclose(e1, [1, 0, 0])
    np.testing.assert_allclose(e2, [0, 1, 0])


def test_complement_first_seed_rejected():
    e1, e2 = orthonormal_complement(np.eye(3), np.array([1.0, 0, 0]),
                                    np.array([1.0, 0, 0]), np.array([0.0, 1, 0]))
    np.testing.assert_allclose(e1, [0, 1, 0])
    np.testing.assert_allclose(e2, [0, 0, 1])


def test_complement_h3(entries):
    g = entries["h3_vertical"].manifold.metric_at(np.array([0.0, 0.0, 2.0]))
    e1, e2 = orthonormal_complement(g, np.array([0.0, 0.0, 2.0]))
    np.testing.assert_allclose(e1, [2, 0, 0], atol=1e-12)
    np.testing.assert_allclose(e2, [0, 2, 0], atol=1e-12)


def test_both_seeds_degenerate_raises():
    X = np.array([0.0, 0, 1])
    with pytest.raises(DegenerateSeed):
        orthonormal_complement(np.eye(3), X, X, 2.0 * X)
    # the frame builder falls back to the standard triple on its own
    fr = frame_at(np.eye(3), X, seed1=X, seed2=2.0 * X)
    assert frame_residual(np.eye(3), fr) < 1e-12


def test_frame_residual_small_everywhere(entries):
    rng = np.random.default_rng(11)
    for name in ("s3_hopf", "heisenberg_reeb", "h3_vertical"):
        entry = entries[name]
        for p in entry.grid.points()[rng.choice(125, 20, replace=False)]:
            g = entry.manifold.metric_at(p)
            fr = frame_at(g, entry.field.value(p))
            assert frame_residual(g, fr) < 1e-10


def test_frame_orientation_positive(entries):
    entry = entries["s3_hopf"]
    for p in entry.grid.points()[::13]:
        g = entry.manifold.metric_at(p)
        fr = frame_at(g, entry.field.value(p))
        assert np.linalg.det(np.stack(fr.basis(), axis=1)) > 0
        fr_neg = frame_at(g, entry.field.value(p), orientation=-1)
        assert np.linalg.det(np.stack(fr_neg.basis(), axis=1)) < 0


def test_frame_continuity_along_orbit(entries, orbit_cache):
    """Pointwise frames aligned with the previous sample never flip."""
    entry = entries["s3_hopf"]
    traj = orbit_cache("s3_hopf")
    prev = None
    for p in traj.points[::50]:
        g = entry.manifold.metric_at(p)
        fr = frame_at(g, entry.field.value(p), prev=prev)
        if prev is not None:
            assert inner(g, fr.e1, prev.e1) > 0
            assert inner(g, fr.e2, prev.e2) > 0
        prev = fr


def test_frames_at_matches_single_points(entries):
    entry = entries["heisenberg_reeb"]
    pts = entry.grid.points()[::7]
    g = entry.manifold.metric_at(pts)
    xv = entry.field.value(pts)
    xn = xv / g_norm(g, xv)[:, None]
    e1, e2 = frames_at(g, xn)
    for k, p in enumerate(pts):
        fr = frame_at(entry.manifold.metric_at(p), entry.field.value(p))
        np.testing.assert_allclose(e1[k], fr.e1, atol=1e-12)
        np.testing.assert_allclose(e2[k], fr.e2, atol=1e-12)


def test_domain_predicate_strict(entries):
    man = entries["h3_vertical"].manifold
    assert not man.contains(np.array([0.0, 0.0, 0.0]))  # boundary is outside
    assert man.contains(np.array([0.0, 0.0, 1e-8]))
    assert not man.contains(np.array([0.0, 0.0, np.inf]))
