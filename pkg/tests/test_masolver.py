"""Continuity-path solver for the 1-D coupled Monge-Ampere system."""

import math

import numpy as np
import pytest

from torifano.errors import ConfigurationError, DomainMismatchError, InputError
from torifano.masolver import (
    DEFAULT_T_SCHEDULE,
    at_stage,
    initial_state,
    interval_weighted_mean,
    legendre_dual,
    ma_step_1d,
    make_grid,
    obstruction_residual,
    reference_potential,
    solve_continuity_1d,
    w_diagnostics,
)

PAIR = ((-0.75, 0.25), (-0.25, 0.75))
MIRROR = ((-1.0, 0.25), (-0.25, 1.0))


def fs_exact(xs):
    return 2.0 * np.log(np.cosh(xs / 2.0)) + math.log(4.0)


def bisect(fn, lo, hi, steps=80):
    flo = fn(lo)
    assert flo * fn(hi) < 0
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if (fn(mid) < 0) == (flo < 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_fubini_study_sup_error():
    result = solve_continuity_1d([(-1.0, 1.0)])
    assert result.status == "Converged"
    err = np.max(np.abs(result.state.f[0] - fs_exact(result.state.xs)))
    assert err < 1e-4
    assert abs(result.state.mass - 1.0) <= 5e-4
    assert abs(result.diagnostics["obstruction_residual"]) < 1e-6


def test_exact_solution_is_near_fixed_point():
    state = initial_state([(-1.0, 1.0)], t=1.0)
    xs = state.xs
    exact_f = fs_exact(xs)
    exact_slope = np.tanh(xs / 2.0)
    state = state.__class__(
        t=1.0,
        xs=xs,
        spacing=state.spacing,
        intervals=state.intervals,
        vfields=state.vfields,
        f=(exact_f,),
        slopes=(exact_slope,),
        h_ref=state.h_ref,
        h_slopes=state.h_slopes,
        rho=np.exp(-exact_f),
        mass=state.mass,
        w_min=float(exact_f.min()),
        x_w=0.0,
        growth_eps=state.growth_eps,
        update_norm=float("inf"),
    )
    stepped = ma_step_1d(state, relaxation=1.0)
    assert stepped.update_norm < 1e-5


def test_mirror_pair_symmetry():
    result = solve_continuity_1d(MIRROR)
    assert result.status == "Converged"
    f1, f2 = result.state.f
    assert np.max(np.abs(f2 - f1[::-1])) < 1e-6
    assert abs(result.state.mass - 1.0) <= 5e-4
    assert abs(result.diagnostics["obstruction_residual"]) < 1e-6


def test_unbalanced_fields_are_obstructed():
    result = solve_continuity_1d(PAIR, vfields=(2.0, 0.0))
    assert result.status == "Obstructed"
    diag = result.diagnostics
    assert diag["heuristic_detection"] is True
    assert "reason" in diag and diag["t"] <= 1.0
    want = interval_weighted_mean(-0.75, 0.25, 2.0) + 0.25
    assert diag["barycenter_residual"] == pytest.approx(want, abs=1e-13)
    assert diag["barycenter_residual"] == pytest.approx(0.156518, abs=1e-6)


def test_balanced_fields_converge():
    a1 = interval_weighted_mean(-0.75, 0.25, 2.0)

    def h(v):
        return interval_weighted_mean(-0.25, 0.75, v) + a1

    v2 = bisect(h, -20.0, 20.0)
    result = solve_continuity_1d(PAIR, vfields=(2.0, v2))
    assert result.status == "Converged"
    assert abs(result.diagnostics["obstruction_residual"]) < 1e-6
    assert abs(result.diagnostics["barycenter_residual"]) < 1e-12


def test_obstruction_cooccurs_with_nonzero_residual():
    a1 = interval_weighted_mean(-0.75, 0.25, 2.0)
    v2 = bisect(lambda v: interval_weighted_mean(-0.25, 0.75, v) + a1, -20.0, 20.0)
    cases = [
        ((0.0, 0.0), PAIR),
        ((2.0, 0.0), PAIR),
        ((0.0, 2.0), PAIR),
        ((-1.0, -1.0), PAIR),
        ((2.0, v2), PAIR),
        ((1.5,), ((-1.0, 1.0),)),
        ((0.0,), ((-1.0, 1.0),)),
    ]
    for vfields, intervals in cases:
        total = sum(
            interval_weighted_mean(a, b, v) for (a, b), v in zip(intervals, vfields)
        )
        result = solve_continuity_1d(intervals, vfields=vfields, spacing=0.008)
        assert (result.status == "Obstructed") == (abs(total) > 1e-9), (
            vfields,
            total,
            result.status,
        )
        assert result.diagnostics["barycenter_residual"] == pytest.approx(
            total, abs=1e-12
        )
        if result.status == "Obstructed":
            assert result.diagnostics["heuristic_detection"] is True


def test_per_step_transport_identity_on_wide_grid():
    # integral of f'' e^{V f'} equals G(f') at the right edge minus the left
    # edge; on a window wide enough that the tail mass is below 1e-8 this
    # must equal the weighted volume to the same accuracy after every sweep.
    def gfun(p, a, v):
        if v == 0.0:
            return p - a
        return (math.exp(v * p) - math.exp(v * a)) / v

    for t in (0.0, 0.5):
        state = initial_state(PAIR, vfields=(0.3, -0.2), R=21.0, spacing=0.02)
        state = at_stage(state, t)
        for _ in range(5):
            state = ma_step_1d(state, relaxation=1.0)
            for (a, b), v, slope in zip(state.intervals, state.vfields, state.slopes):
                vol = gfun(b, a, v)
                swept = gfun(float(slope[-1]), a, v) - gfun(float(slope[0]), a, v)
                assert abs(swept / vol - 1.0) <= 1e-8


def test_stage_zero_is_a_one_step_fixed_point():
    state = initial_state([(-1.0, 1.0), (-0.5, 0.5)])
    first = ma_step_1d(state, relaxation=1.0)
    second = ma_step_1d(first, relaxation=1.0)
    assert second.update_norm == 0.0


def test_sweeps_preserve_convexity_and_slope_range():
    state = at_stage(initial_state(PAIR, vfields=(0.5, -0.5)), 0.75)
    zero_idx = len(state.xs) // 2
    for _ in range(30):
        state = ma_step_1d(state)
        for (a, b), f, slope in zip(state.intervals, state.f, state.slopes):
            assert np.min(np.diff(f, n=2)) >= -1e-10
            assert slope.min() >= a - 1e-12 and slope.max() <= b + 1e-12
        assert abs(state.f[0][zero_idx] - state.f[1][zero_idx]) < 1e-12


def test_reference_potential_closed_forms():
    seg = ((-1.0,), (1.0,))
    for x in (-2.0, 0.0, 0.7):
        assert reference_potential(seg, (x,)) == pytest.approx(
            math.log(math.cosh(x)), abs=1e-12
        )
    square = ((1, 1), (1, -1), (-1, 1), (-1, -1))
    for pt in ((0.3, -1.2), (2.0, 0.1)):
        split = reference_potential(seg, pt[:1]) + reference_potential(seg, pt[1:])
        assert reference_potential(square, pt) == pytest.approx(split, abs=1e-12)
    with pytest.raises(InputError):
        reference_potential((), (0.0,))


def test_reference_gradient_saturates_inside_polytope():
    square = ((1, 1), (1, -1), (-1, 1), (-1, -1))
    delta = 1e-4

    def grad(pt):
        out = []
        for j in range(2):
            hi = list(pt)
            lo = list(pt)
            hi[j] += delta
            lo[j] -= delta
            out.append(
                (reference_potential(square, hi) - reference_potential(square, lo))
                / (2 * delta)
            )
        return out

    gx, gy = grad((20.0, 0.3))
    assert abs(gx - 1.0) < 1e-6
    assert abs(gy - math.tanh(0.3)) < 1e-6


def test_legendre_quadratic_is_self_dual():
    xs = np.arange(-1500, 1501, dtype=float) * 0.002
    f = xs * xs / 2.0
    p = np.arange(-500, 501, dtype=float) * 0.002
    dual = legendre_dual(xs, f, p)
    assert np.max(np.abs(dual.u - p * p / 2.0)) < 1e-6


def test_legendre_log_cosh_frozen_value():
    xs = np.arange(-4000, 4001, dtype=float) * 0.002
    f = np.log(np.cosh(xs))
    dual = legendre_dual(xs, f, np.array([0.5]))
    want = 0.5 * math.atanh(0.5) + 0.5 * math.log(0.75)
    assert dual.u[0] == pytest.approx(want, abs=1e-6)
    assert want == pytest.approx(0.130812, abs=5e-7)


def test_legendre_domain_mismatch():
    xs = np.arange(-1000, 1001, dtype=float) * 0.004
    with pytest.raises(DomainMismatchError):
        legendre_dual(xs, np.log(np.cosh(xs)), np.array([1.5]))


def test_legendre_sup_identity_for_converged_potential():
    result = solve_continuity_1d([(-1.0, 1.0)])
    xs = result.state.xs
    f = result.state.f[0]
    h = result.state.h_ref[0]
    p = np.linspace(-0.999, 0.999, 999)
    u = legendre_dual(xs, f, p).u
    hstar = legendre_dual(xs, h, p).u
    lhs = float(np.max(np.abs(u - hstar)))
    rhs = float(np.max(np.abs(f - h)))
    assert abs(lhs - rhs) <= 2 * result.state.spacing + 1e-6
    assert rhs == pytest.approx(math.log(4.0), abs=1e-4)
    assert legendre_dual(xs, f, np.array([0.0])).u[0] == pytest.approx(
        -math.log(4.0), abs=1e-4
    )


def test_w_diagnostics_reference_and_converged():
    state = initial_state([(-1.0, 1.0)])
    diag = w_diagnostics(state)
    assert diag["x_w"] == 0.0
    assert diag["w_min"] == 0.0
    assert diag["growth_eps"] > 0
    assert diag["mass"] == pytest.approx(math.pi, abs=1e-3)

    result = solve_continuity_1d([(-1.0, 1.0)])
    diag = w_diagnostics(result.state)
    assert diag["w_min"] == pytest.approx(math.log(4.0), abs=1e-4)
    assert abs(diag["x_w"]) <= result.state.spacing
    assert diag["growth_eps"] > 0


def test_obstruction_residual_vanishes_by_symmetry():
    state = initial_state([(-1.0, 1.0)], t=1.0)
    assert abs(obstruction_residual(state)) < 1e-12


def test_grid_refinement_is_second_order():
    coarse = solve_continuity_1d([(-1.0, 1.0)], spacing=0.04)
    fine = solve_continuity_1d([(-1.0, 1.0)], spacing=0.02)
    assert coarse.status == fine.status == "Converged"
    diff = np.max(np.abs(coarse.state.f[0] - fine.state.f[0][::2]))
    assert diff <= 4 * 0.04**2


def test_snapshots_follow_schedule():
    result = solve_continuity_1d([(-1.0, 1.0)], include_arrays=True)
    assert len(result.snapshots) == len(DEFAULT_T_SCHEDULE)
    for snap, t in zip(result.snapshots, DEFAULT_T_SCHEDULE):
        assert snap["t"] == t
        assert snap["iterations"] >= 1
        assert len(snap["grid"]) == len(result.state.xs)
        assert len(snap["f"]) == 1 and len(snap["rho"]) == len(snap["grid"])
    lean = solve_continuity_1d([(-1.0, 1.0)])
    assert "grid" not in lean.snapshots[0]


def test_configuration_errors():
    with pytest.raises(ConfigurationError):
        make_grid(spacing=0.06)
    with pytest.raises(ConfigurationError):
        make_grid(spacing=0.0)
    with pytest.raises(ConfigurationError):
        make_grid(R=-1.0)
    with pytest.raises(ConfigurationError):
        solve_continuity_1d([(-1.0, 1.0)], t_schedule=(0.0, 0.5))
    with pytest.raises(ConfigurationError):
        solve_continuity_1d([(-1.0, 1.0)], t_schedule=(0.5, 0.25, 1.0))
    state = initial_state([(-1.0, 1.0)])
    with pytest.raises(ConfigurationError):
        ma_step_1d(state, relaxation=0.0)
    with pytest.raises(ConfigurationError):
        ma_step_1d(state, relaxation=1.5)
    with pytest.raises(InputError):
        initial_state([(1.0, -1.0)])
    with pytest.raises(InputError):
        initial_state([(-1.0, 1.0)], vfields=(1.0, 2.0))
