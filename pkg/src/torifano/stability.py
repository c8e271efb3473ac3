"""Existence criteria for coupled Kahler-Einstein metrics and solitons.

A decomposition of the anticanonical class is a k-row support matrix whose
rows are ample and whose columns sum to the all-ones vector, so that the
row polytopes Minkowski-sum to the anticanonical polytope.  The coupled
Kahler-Einstein verdict is the vanishing of the barycenter sum; the coupled
soliton verdict replaces barycenters by e^{<V,p>}-weighted ones, and the
common soliton field is the minimizer of the strictly convex log-mass sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import moments
from .errors import DegenerateLiftError, InputError
from .geometry import (
    Ampleness,
    ampleness_class,
    polytope_from_halfspaces,
    polytope_from_support,
    triangulate,
)

KE_FLOAT_TOL = 1e-10


def _vec(xs):
    return tuple(x if isinstance(x, float) else Fraction(x) for x in xs)


class Decomposition:
    """A tuple of polytopes decomposing the anticanonical polytope.

    Fan-based instances remember their support matrix; raw instances (built
    straight from halfspace data) only carry the polytopes, so the
    normalization checks that need support numbers are skipped for them.
    """

    def __init__(self, polytopes, fan=None, support_matrix=None):
        polytopes = tuple(polytopes)
        if not polytopes:
            raise InputError("decomposition needs at least one polytope")
        dim = polytopes[0].dim
        if any(p.dim != dim for p in polytopes):
            raise InputError("decomposition parts must share one dimension")
        for i, p in enumerate(polytopes):
            if p.degenerate:
                raise InputError(f"part {i} is degenerate (empty interior)")
        self.polytopes = polytopes
        self.fan = fan
        self.support_matrix = support_matrix

    @classmethod
    def from_fan(cls, fan, rows):
        rows = tuple(_vec(row) for row in rows)
        for row in rows:
            if len(row) != fan.nrays:
                raise InputError("support row length must match ray count")
        polys = tuple(polytope_from_support(fan, row) for row in rows)
        return cls(polys, fan=fan, support_matrix=rows)

    @classmethod
    def from_polytopes(cls, polytopes):
        return cls(tuple(polytopes))

    @property
    def k(self):
        return len(self.polytopes)

    @property
    def dim(self):
        return self.polytopes[0].dim

    @cached_property
    def meshes(self):
        return tuple(triangulate(p) for p in self.polytopes)

    @cached_property
    def exact(self):
        return all(
            not isinstance(x, float) for p in self.polytopes for v in p.vertices for x in v
        )


@dataclass(frozen=True)
class DecompositionReport:
    k: int
    row_ampleness: tuple
    column_sums: tuple
    failures: tuple

    @property
    def ok(self):
        return not self.failures


def validate_decomposition(fan, matrix):
    """Check each row is Ample and the columns sum to the all-ones vector."""
    rows = tuple(_vec(row) for row in matrix)
    if not rows:
        raise InputError("decomposition needs at least one row")
    failures = []
    kinds = []
    for i, row in enumerate(rows):
        if len(row) != fan.nrays:
            raise InputError(f"row {i} length {len(row)} != ray count {fan.nrays}")
        amp = ampleness_class(fan, row)
        kinds.append(amp.kind.value)
        if amp.kind is not Ampleness.AMPLE:
            failures.append(("row-not-ample", i, amp.kind.value, amp.witness))
    sums = tuple(sum(row[j] for row in rows) for j in range(fan.nrays))
    for j, s in enumerate(sums):
        if s != 1:
            failures.append(("column-sum", j, str(s)))
    return DecompositionReport(
        k=len(rows),
        row_ampleness=tuple(kinds),
        column_sums=sums,
        failures=tuple(failures),
    )


def sum_barycenter(decomposition):
    """Sum of the part barycenters; exact on rational input."""
    total = None
    for mesh in decomposition.meshes:
        b = moments.barycenter(mesh)
        total = b if total is None else tuple(x + y for x, y in zip(total, b))
    return total


def destabilizer(decomposition):
    """-sum of barycenters, or None when the sum vanishes."""
    s = sum_barycenter(decomposition)
    if all(x == 0 for x in s):
        return None
    return tuple(-x for x in s)


@dataclass(frozen=True)
class KEVerdict:
    exists: bool
    sum_barycenter: tuple
    destabilizer: tuple
    exact: bool
    tol: float


def coupled_ke_verdict(decomposition, tol=KE_FLOAT_TOL):
    """Coupled Kahler-Einstein existence: barycenter sum equal to zero.

    Rational input is decided exactly; float input (irrational parameters)
    compares against ``tol`` in the sup norm.
    """
    s = sum_barycenter(decomposition)
    exact = all(not isinstance(x, float) for x in s)
    if exact:
        exists = all(x == 0 for x in s)
    else:
        exists = max(abs(float(x)) for x in s) < tol
    dest = None if exists else tuple(-x for x in s)
    return KEVerdict(
        exists=exists, sum_barycenter=s, destabilizer=dest, exact=exact, tol=tol
    )


@dataclass(frozen=True)
class SolitonResidual:
    total: tuple
    per_polytope: tuple

    @property
    def norm(self):
        return float(np.linalg.norm(self.total))


def soliton_residual(decomposition, vfields):
    """Sum of weighted barycenters A_{P_i}(V_i) for per-part fields."""
    vfields = [tuple(float(x) for x in v) for v in vfields]
    if len(vfields) != decomposition.k:
        raise InputError("need one vector field per part")
    per = tuple(
        moments.weighted_barycenter(mesh, v)
        for mesh, v in zip(decomposition.meshes, vfields)
    )
    total = tuple(sum(a[i] for a in per) for i in range(decomposition.dim))
    return SolitonResidual(total=total, per_polytope=per)


@dataclass(frozen=True)
class SolitonSolution:
    vfield: tuple
    residual_norm: float
    iterations: int
    converged: bool
    hessian_condition: float
    per_polytope_A: tuple


def solve_soliton(decomposition, tol=1e-11, max_iter=50, start=None):
    """Common soliton field via damped Newton on V -> sum_i log Vol_V(P_i).

    The objective is strictly convex and proper, so the minimizer is the
    unique zero of the gradient sum_i A_{P_i}(V).  Steps are halved until
    the objective decreases; the Hessian (sum of weighted covariances) is
    checked positive definite at every iterate.  Non-convergence returns
    the best iterate with ``converged=False`` instead of raising.
    """
    n = decomposition.dim
    meshes = decomposition.meshes
    v = np.zeros(n) if start is None else np.array([float(x) for x in start])

    def grad_at(vv):
        per = [
            np.array(moments.weighted_barycenter(mesh, tuple(vv)))
            for mesh in meshes
        ]
        return sum(per), per

    def objective(vv):
        return sum(moments.log_weighted_volume(mesh, tuple(vv)) for mesh in meshes)

    hess = np.eye(n)
    grad, per = grad_at(v)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        residual = float(np.linalg.norm(grad))
        if residual <= tol:
            return SolitonSolution(
                vfield=tuple(float(x) for x in v),
                residual_norm=residual,
                iterations=iterations - 1,
                converged=True,
                hessian_condition=float(np.linalg.cond(hess)),
                per_polytope_A=tuple(tuple(a) for a in per),
            )
        hess = sum(
            moments.weighted_covariance(mesh, tuple(v)) for mesh in meshes
        )
        eigs = np.linalg.eigvalsh(hess)
        if eigs[0] <= 0:
            raise ArithmeticError("weighted covariance lost positive definiteness")
        step = np.linalg.solve(hess, -grad)
        scale = 1.0
        if residual > 1e-6:
            # Damped phase: halve the step until the objective decreases.
            # Near the optimum the decrease drops below float resolution,
            # so small residuals take the full Newton step instead.
            base = objective(v)
            for _ in range(60):
                trial = v + scale * step
                if objective(trial) < base:
                    break
                scale /= 2.0
        v = v + scale * step
        grad, per = grad_at(v)
    residual = float(np.linalg.norm(grad))
    return SolitonSolution(
        vfield=tuple(float(x) for x in v),
        residual_norm=residual,
        iterations=iterations,
        converged=residual <= tol,
        hessian_condition=float(np.linalg.cond(hess)),
        per_polytope_A=tuple(tuple(a) for a in per),
    )


@dataclass(frozen=True)
class DFReport:
    value: object
    vfield: tuple
    sum_barycenter: tuple


def df_invariant(decomposition, vfield):
    """Donaldson-Futaki pairing <v, sum of barycenters>; exact on rationals."""
    s = sum_barycenter(decomposition)
    v = _vec(vfield)
    if len(v) != len(s):
        raise InputError("vector field has wrong dimension")
    value = sum(a * b for a, b in zip(v, s))
    return DFReport(value=value, vfield=v, sum_barycenter=s)


@dataclass(frozen=True)
class LiftedConfig:
    polytope: object
    cap: object
    vfield: tuple
    volume_lifted: object
    volume_product: object

    @property
    def identity_holds(self):
        return self.volume_lifted == self.volume_product


def lifted_config(polytope, vfield, cap=None):
    """Lift P to {(p, s) : p in P, -<v,p> <= s <= cap} and check volumes.

    The prism volume factors exactly as Vol(P) * (cap + <v, b(P)>); both
    sides are computed independently (the left by triangulating the lifted
    polytope) and recorded.  Rational data only.
    """
    v = _vec(vfield)
    if any(isinstance(x, float) for x in v) or any(
        isinstance(x, float) for p in polytope.vertices for x in p
    ):
        raise InputError("lifted configurations are exact-rational only")
    if len(v) != polytope.dim:
        raise InputError("vector field has wrong dimension")
    heights = [-sum(a * b for a, b in zip(v, vert)) for vert in polytope.vertices]
    top = max(heights)
    if cap is None:
        cap = top + 1
    cap = Fraction(cap)
    if cap < top:
        raise DegenerateLiftError(
            f"cap {cap} cuts below the graph maximum {top}"
        )
    n = polytope.dim
    halfspaces = [(tuple(d) + (0,), c) for d, c in polytope.halfspaces]
    halfspaces.append((tuple(v) + (1,), Fraction(0)))
    halfspaces.append((tuple(Fraction(0) for _ in range(n)) + (-1,), cap))
    lifted = polytope_from_halfspaces(halfspaces, provenance="lift")
    if lifted.degenerate:
        raise DegenerateLiftError("lifted polytope is degenerate")
    vol_lifted = moments.volume(triangulate(lifted))
    base_mesh = triangulate(polytope)
    vol_base = moments.volume(base_mesh)
    b = moments.barycenter(base_mesh)
    vol_product = vol_base * (cap + sum(a * x for a, x in zip(v, b)))
    return LiftedConfig(
        polytope=lifted,
        cap=cap,
        vfield=v,
        volume_lifted=vol_lifted,
        volume_product=vol_product,
    )
