"""Continuity path for the coupled real Monge-Ampere system on the line.

The stage-t system for convex potentials f_i with slope images P_i = [a_i, b_i]
is

    f_i'' e^{V_i f_i'} / Vol_{V_i}(P_i) = e^{-t sum f - (1-t) sum h},

driven from the reference potentials h_i (vertex log-sum-exp) at t=0 to the
soliton-type equation at t=1.  Each sweep replaces the slope of f_i by the
cumulative-mass transport map G_i^{-1}(Vol_i * Phi) and under-relaxes.  The
cumulative distribution Phi carries an exponential tail estimate beyond both
grid ends; without it the truncation error of the box is O(e^{-R}), which
dominates the discretization error at the default window.

Solutions exist along the whole path exactly when the weighted barycenters
cancel; otherwise the minimizer of w = sum(t f_i + (1-t) h_i) drifts or the
updates stall, which is reported as an obstruction rather than an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, DomainMismatchError, InputError

DEFAULT_T_SCHEDULE = (0.0, 0.25, 0.5, 0.75, 0.9, 1.0)
MAX_SPACING = 0.05
# Decay-rate floor for the tail estimate; a flatter density than this at the
# window edge means mass is escaping and shows up in the drift detector.
MIN_EDGE_DECAY = 0.05


def reference_potential(vertices, x):
    """log of the average of e^{<y, x>} over the vertex set of P_i.

    Smooth, convex, with gradient image the interior of the polytope; this
    is the canonical reference potential for every part of a decomposition.
    """
    vertices = [tuple(float(c) for c in v) for v in vertices]
    if not vertices:
        raise InputError("reference potential needs at least one vertex")
    x = tuple(float(c) for c in x)
    exps = [sum(a * b for a, b in zip(v, x)) for v in vertices]
    peak = max(exps)
    return peak + math.log(sum(math.exp(e - peak) for e in exps) / len(exps))


def _ref_values_1d(a, b, xs):
    # h(x) = log((e^{ax} + e^{bx})/2), slope a + (b-a)*sigmoid((b-a)x)
    values = np.logaddexp(a * xs, b * xs) - math.log(2.0)
    u = (b - a) * xs
    sig = np.empty_like(xs)
    pos = u >= 0
    sig[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    sig[~pos] = np.exp(u[~pos]) / (1.0 + np.exp(u[~pos]))
    slopes = a + (b - a) * sig
    return values, slopes


def _weighted_length(a, b, v):
    if abs(v) < 1e-12:
        return b - a
    return (math.exp(v * b) - math.exp(v * a)) / v


def interval_weighted_mean(a, b, v):
    """Mean of the interval under the density e^{v s}, in closed form."""
    if abs(v) < 1e-12:
        return 0.5 * (a + b)
    ea, eb = math.exp(v * a), math.exp(v * b)
    return ((b - 1.0 / v) * eb - (a - 1.0 / v) * ea) / (eb - ea)


def _transport_slope(y, a, b, v):
    """Inverse of G(p) = integral_a^p e^{vs} ds, clipped to [a, b]."""
    if abs(v) < 1e-12:
        slope = a + y
    else:
        arg = np.maximum(math.exp(v * a) + v * y, 1e-300)
        slope = np.log(arg) / v
    return np.clip(slope, a, b)


def _cumtrapz(y, dx):
    out = np.empty_like(y)
    out[0] = 0.0
    np.cumsum((y[1:] + y[:-1]) * (dx / 2.0), out=out[1:])
    return out


@dataclass(frozen=True)
class MAState:
    """One point on the continuity path, with its grid diagnostics.

    ``mass`` is the tail-corrected integral of rho; ``w_min``/``x_w`` locate
    the minimum of w = sum(t f_i + (1-t) h_i) and ``growth_eps`` is the
    largest linear growth rate w admits away from that minimum.
    """

    t: float
    xs: np.ndarray
    spacing: float
    intervals: tuple
    vfields: tuple
    f: tuple
    slopes: tuple
    h_ref: tuple
    h_slopes: tuple
    rho: np.ndarray
    mass: float
    w_min: float
    x_w: float
    growth_eps: float
    update_norm: float


def _edge_tails(rho, wprime_left, wprime_right):
    decay_l = max(-wprime_left, MIN_EDGE_DECAY)
    decay_r = max(wprime_right, MIN_EDGE_DECAY)
    return float(rho[0]) / decay_l, float(rho[-1]) / decay_r


def _diagnose(t, xs, spacing, intervals, vfields, f, slopes, h_ref, h_slopes, update_norm):
    w = t * sum(f) + (1.0 - t) * sum(h_ref)
    rho = np.exp(-w)
    wprime_l = t * sum(s[0] for s in slopes) + (1.0 - t) * sum(s[0] for s in h_slopes)
    wprime_r = t * sum(s[-1] for s in slopes) + (1.0 - t) * sum(s[-1] for s in h_slopes)
    tail_l, tail_r = _edge_tails(rho, wprime_l, wprime_r)
    mass = float(tail_l + np.trapezoid(rho, dx=spacing) + tail_r)
    idx = int(np.argmin(w))
    w_min = float(w[idx])
    x_w = float(xs[idx])
    away = np.abs(xs - x_w) > 0.5 * spacing
    growth = (w[away] - w_min + 0.1) / np.abs(xs[away] - x_w)
    growth_eps = float(growth.min()) if growth.size else 0.0
    return MAState(
        t=t,
        xs=xs,
        spacing=spacing,
        intervals=intervals,
        vfields=vfields,
        f=f,
        slopes=slopes,
        h_ref=h_ref,
        h_slopes=h_slopes,
        rho=rho,
        mass=mass,
        w_min=w_min,
        x_w=x_w,
        growth_eps=growth_eps,
        update_norm=update_norm,
    )


def make_grid(R=8.0, spacing=0.004):
    if spacing > MAX_SPACING:
        raise ConfigurationError(f"grid spacing {spacing} is above {MAX_SPACING}")
    if spacing <= 0 or R <= 0:
        raise ConfigurationError("grid needs positive radius and spacing")
    half = int(round(R / spacing))
    if half < 4:
        raise ConfigurationError("grid radius is below four spacings")
    # Symmetric integer grid: x=0 is always a node, so the normalization
    # f_i(0) is well defined.
    return np.arange(-half, half + 1, dtype=float) * spacing


def initial_state(intervals, vfields=None, R=8.0, spacing=0.004, t=0.0):
    intervals = tuple((float(a), float(b)) for a, b in intervals)
    for a, b in intervals:
        if not a < b:
            raise InputError(f"interval [{a}, {b}] has empty interior")
    if vfields is None:
        vfields = tuple(0.0 for _ in intervals)
    vfields = tuple(float(v) for v in vfields)
    if len(vfields) != len(intervals):
        raise InputError("need one field value per interval")
    xs = make_grid(R, spacing)
    h_ref, h_slopes = [], []
    for a, b in intervals:
        values, slopes = _ref_values_1d(a, b, xs)
        h_ref.append(values)
        h_slopes.append(slopes)
    h_ref = tuple(h_ref)
    h_slopes = tuple(h_slopes)
    return _diagnose(
        float(t), xs, float(spacing), intervals, vfields,
        tuple(v.copy() for v in h_ref), tuple(s.copy() for s in h_slopes),
        h_ref, h_slopes, update_norm=float("inf"),
    )


def at_stage(state, t):
    """Warm start: same potentials, new path parameter."""
    return _diagnose(
        float(t), state.xs, state.spacing, state.intervals, state.vfields,
        state.f, state.slopes, state.h_ref, state.h_slopes, state.update_norm,
    )


def ma_step_1d(state, relaxation=0.5):
    """One transport sweep at fixed t, under-relaxed by ``relaxation``.

    Candidate slopes come from inverting the cumulative mass through each
    G_i; candidate potentials are their integrals anchored at x=0, with the
    common constant pinned so the updated density has unit mass (for t>0).
    """
    if not 0.0 < relaxation <= 1.0:
        raise ConfigurationError("relaxation must lie in (0, 1]")
    xs, dx, t = state.xs, state.spacing, state.t
    k = len(state.intervals)
    zero_idx = len(xs) // 2

    cum = _cumtrapz(state.rho, dx)
    wprime_l = t * sum(s[0] for s in state.slopes) + (1 - t) * sum(s[0] for s in state.h_slopes)
    wprime_r = t * sum(s[-1] for s in state.slopes) + (1 - t) * sum(s[-1] for s in state.h_slopes)
    tail_l, tail_r = _edge_tails(state.rho, wprime_l, wprime_r)
    total = tail_l + float(cum[-1]) + tail_r
    phi = (tail_l + cum) / total

    cand_slopes = []
    cand_f = []
    for (a, b), v in zip(state.intervals, state.vfields):
        vol = _weighted_length(a, b, v)
        slope = _transport_slope(vol * phi, a, b, v)
        # G is strictly increasing for finite V, so the inverted slope must
        # inherit the monotonicity of the cumulative mass.
        assert np.all(np.diff(slope) >= -1e-12), "transport slope not monotone"
        ftilde = _cumtrapz(slope, dx)
        ftilde -= ftilde[zero_idx]
        cand_slopes.append(slope)
        cand_f.append(ftilde)

    if t > 0.0:
        w_cand = t * sum(cand_f) + (1.0 - t) * sum(state.h_ref)
        rho_cand = np.exp(-w_cand)
        sl = t * sum(s[0] for s in cand_slopes) + (1 - t) * sum(s[0] for s in state.h_slopes)
        sr = t * sum(s[-1] for s in cand_slopes) + (1 - t) * sum(s[-1] for s in state.h_slopes)
        tl, tr = _edge_tails(rho_cand, sl, sr)
        total_cand = tl + float(np.trapezoid(rho_cand, dx=dx)) + tr
        kappa = math.log(total_cand) / (t * k)
        cand_f = [ft + kappa for ft in cand_f]

    lam = relaxation
    new_f = tuple((1 - lam) * f + lam * c for f, c in zip(state.f, cand_f))
    new_slopes = tuple(
        (1 - lam) * s + lam * c for s, c in zip(state.slopes, cand_slopes)
    )
    update_norm = max(
        float(np.max(np.abs(nf - f))) for nf, f in zip(new_f, state.f)
    )
    return _diagnose(
        t, xs, dx, state.intervals, state.vfields,
        new_f, new_slopes, state.h_ref, state.h_slopes, update_norm,
    )


def w_diagnostics(state):
    return {
        "w_min": state.w_min,
        "x_w": state.x_w,
        "growth_eps": state.growth_eps,
        "mass": state.mass,
    }


def obstruction_residual(state):
    """Grid quadrature of (sum f_i') e^{-sum f_i}.

    At an exact solution of the t=1 system this equals the sum of the
    weighted barycenters, which vanishes precisely when the path can close.
    """
    slope_sum = sum(state.slopes)
    density = np.exp(-sum(state.f))
    return float(np.trapezoid(slope_sum * density, dx=state.spacing))


@dataclass(frozen=True)
class DualPotential:
    p: np.ndarray
    u: np.ndarray


def legendre_dual(xs, fvals, p_grid):
    """Discrete Legendre transform u(p) = max_x (p x - f(x)).

    The transform is only meaningful where the slope range of the data
    covers the requested momenta; anything outside raises DomainMismatch.
    """
    xs = np.asarray(xs, dtype=float)
    fvals = np.asarray(fvals, dtype=float)
    p_grid = np.asarray(p_grid, dtype=float)
    slopes = np.diff(fvals) / np.diff(xs)
    tol = max(float(np.max(np.diff(xs))), 1e-9)
    if p_grid.min() < slopes.min() - tol or p_grid.max() > slopes.max() + tol:
        raise DomainMismatchError(
            f"momenta [{p_grid.min()}, {p_grid.max()}] outside slope range "
            f"[{slopes.min()}, {slopes.max()}]"
        )
    u = np.max(p_grid[:, None] * xs[None, :] - fvals[None, :], axis=1)
    return DualPotential(p=p_grid, u=u)


@dataclass(frozen=True)
class ContinuityResult:
    status: str  # "Converged" | "Obstructed"
    state: MAState
    diagnostics: dict
    snapshots: tuple


def _snapshot(state, iterations, include_arrays):
    snap = {
        "t": state.t,
        "iterations": iterations,
        "mass": state.mass,
        "update_norm": state.update_norm,
        "w_min": state.w_min,
        "x_w": state.x_w,
        "growth_eps": state.growth_eps,
    }
    if include_arrays:
        snap["grid"] = state.xs.tolist()
        snap["f"] = [f.tolist() for f in state.f]
        snap["rho"] = state.rho.tolist()
    return snap


def solve_continuity_1d(
    intervals,
    vfields=None,
    t_schedule=DEFAULT_T_SCHEDULE,
    R=8.0,
    spacing=0.004,
    tol=1e-9,
    max_iter=2500,
    relaxation=0.5,
    include_arrays=False,
):
    """Sweep the continuity path, warm-starting every stage.

    Returns Converged with the final t=1 state, or Obstructed as soon as
    the w-minimizer drifts past R/2 or the updates stall above ``tol``
    (less than one percent progress across a 50-sweep window).  Both are
    computed outcomes, not errors.
    """
    t_schedule = tuple(float(t) for t in t_schedule)
    if not t_schedule or t_schedule[-1] != 1.0:
        raise ConfigurationError("t schedule must end at t = 1")
    if any(t1 >= t2 for t1, t2 in zip(t_schedule, t_schedule[1:])):
        raise ConfigurationError("t schedule must increase")

    state = initial_state(intervals, vfields, R=R, spacing=spacing, t=t_schedule[0])
    # Exact obstruction witness, independent of the grid: the path can close
    # only when the weighted interval means cancel.
    residual_exact = sum(
        interval_weighted_mean(a, b, v)
        for (a, b), v in zip(state.intervals, state.vfields)
    )
    snapshots = []
    for t in t_schedule:
        state = at_stage(state, t)
        history = []
        obstructed = None
        for it in range(1, max_iter + 1):
            state = ma_step_1d(state, relaxation)
            history.append(state.update_norm)
            if abs(state.x_w) > R / 2.0:
                obstructed = f"w-minimizer drifted to {state.x_w:.3f}"
                break
            if state.update_norm < tol:
                break
            if len(history) > 50 and history[-1] > 0.99 * history[-51]:
                obstructed = (
                    f"updates stalled near {state.update_norm:.3e} at t={t}"
                )
                break
        else:
            it = max_iter
            obstructed = f"no convergence in {max_iter} sweeps at t={t}"
        snapshots.append(_snapshot(state, it, include_arrays))
        if obstructed:
            diagnostics = w_diagnostics(state)
            diagnostics.update(
                {
                    "reason": obstructed,
                    "t": t,
                    "update_norm": state.update_norm,
                    "obstruction_residual": obstruction_residual(state),
                    "barycenter_residual": residual_exact,
                    # The exact theory ties obstruction to a nonzero
                    # barycenter residual; the detection thresholds above
                    # are numerical judgment calls.
                    "heuristic_detection": True,
                }
            )
            return ContinuityResult(
                status="Obstructed",
                state=state,
                diagnostics=diagnostics,
                snapshots=tuple(snapshots),
            )
    diagnostics = w_diagnostics(state)
    diagnostics.update(
        {
            "t": 1.0,
            "update_norm": state.update_norm,
            "obstruction_residual": obstruction_residual(state),
            "barycenter_residual": residual_exact,
        }
    )
    return ContinuityResult(
        status="Converged",
        state=state,
        diagnostics=diagnostics,
        snapshots=tuple(snapshots),
    )
