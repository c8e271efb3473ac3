"""Exact and exponentially weighted moments of polytopes.

Volumes and barycenters of rational meshes are exact.  The weighted
functionals Vol_V(P) = integral of e^{<V,p>} and its normalized first moment
A_P(V) use divided differences of exp over simplex vertex nodes, with a
series fallback for clustered nodes; second moments go through the
independent quadrature route in :mod:`.quadrature`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import linalg, quadrature
from .errors import InputError
from .geometry import Polytope, SimplexMesh, triangulate

# Divided-difference blocks narrower than this are summed by the symmetric
# series; wider blocks use the two-term ratio recurrence.
SERIES_SPREAD = 0.25
EXP_GUARD = 700.0


def _kahan(values):
    total = 0.0
    comp = 0.0
    for x in values:
        y = x - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def _mesh(p):
    if isinstance(p, SimplexMesh):
        return p
    if isinstance(p, Polytope):
        return triangulate(p)
    raise InputError("expected a Polytope or SimplexMesh")


def _simplex_volume_factor(simplex):
    """|det| of the edge matrix, i.e. dim! times the simplex volume."""
    base = simplex[0]
    edges = [[a - b for a, b in zip(v, base)] for v in simplex[1:]]
    return abs(linalg.det(edges))


def volume(mesh):
    """Total volume, exact for rational meshes."""
    mesh = _mesh(mesh)
    n = mesh.dim
    nf = math.factorial(n)
    total = sum(_simplex_volume_factor(s) for s in mesh.simplices)
    return total / nf if isinstance(total, float) else Fraction(total, nf)


def barycenter(mesh):
    """Volume-weighted centroid, exact for rational meshes."""
    mesh = _mesh(mesh)
    n = mesh.dim
    total = None
    moment = None
    for simplex in mesh.simplices:
        w = _simplex_volume_factor(simplex)
        centroid = tuple(sum(v[i] for v in simplex) / (n + 1) for i in range(n))
        if total is None:
            total = w
            moment = [w * x for x in centroid]
        else:
            total = total + w
            moment = [m + w * x for m, x in zip(moment, centroid)]
    if total == 0:
        raise InputError("zero-volume mesh has no barycenter")
    return tuple(m / total for m in moment)


# ---------------------------------------------------------------------------
# divided differences of exp


def _dd_series(nodes):
    """Divided difference of exp over clustered nodes.

    Mean-shift the nodes, then sum h_k(b)/ (m+k)! where h_k is the complete
    homogeneous symmetric polynomial; for spread < 1/4 the terms decay
    faster than 8^-k, so the loop below is effectively exact.
    """
    m = len(nodes) - 1
    mean = sum(nodes) / len(nodes)
    bs = [x - mean for x in nodes]
    kmax = 34
    h = [0.0] * (kmax + 1)
    h[0] = 1.0
    for b in bs:
        for k in range(1, kmax + 1):
            h[k] += b * h[k - 1]
    acc = 0.0
    for k in range(kmax, -1, -1):
        acc += h[k] / math.factorial(m + k)
    return math.exp(mean) * acc


def divided_difference_exp(nodes):
    """[a_0, ..., a_m] exp, stable across clustered and separated nodes."""
    xs = sorted(float(x) for x in nodes)
    count = len(xs)
    if count == 0:
        raise InputError("divided difference needs at least one node")
    prev = [math.exp(x) for x in xs]
    if count == 1:
        return prev[0]
    for length in range(2, count + 1):
        cur = []
        for i in range(count - length + 1):
            j = i + length - 1
            gap = xs[j] - xs[i]
            if gap < SERIES_SPREAD:
                cur.append(_dd_series(xs[i : j + 1]))
            else:
                cur.append((prev[i + 1] - prev[i]) / gap)
        prev = cur
    return prev[0]


def _nodes(simplex, vfield, shift):
    nodes = []
    for v in simplex:
        a = float(sum(float(c) * float(x) for c, x in zip(vfield, v))) - shift
        if abs(a) > EXP_GUARD:
            raise OverflowError(
                f"exponent {a:.3g} outside the +-{EXP_GUARD:.0f} guard"
            )
        nodes.append(a)
    return nodes


def exp_integral_simplex(simplex, vfield):
    """Integral of e^{<V,p>} over one simplex via divided differences."""
    simplex = tuple(tuple(v) for v in simplex)
    n = len(simplex) - 1
    if any(len(v) != n for v in simplex):
        raise InputError("expected an n-simplex with n+1 vertices")
    nodes = _nodes(simplex, vfield, 0.0)
    return float(_simplex_volume_factor(simplex)) * divided_difference_exp(nodes)


def _shift_for(mesh, vfield):
    b = barycenter(mesh)
    return float(sum(float(c) * float(x) for c, x in zip(vfield, b)))


def weighted_volume(mesh, vfield):
    """Vol_V(P): integral of e^{<V,p>} over the mesh.

    The exponent is pre-shifted by <V, barycenter> so large fields stay in
    range; terms are accumulated in mesh order with compensated summation.
    """
    mesh = _mesh(mesh)
    shift = _shift_for(mesh, vfield)
    terms = []
    for simplex in mesh.simplices:
        nodes = _nodes(simplex, vfield, shift)
        terms.append(float(_simplex_volume_factor(simplex)) * divided_difference_exp(nodes))
    return math.exp(shift) * _kahan(terms)


def log_weighted_volume(mesh, vfield):
    """log Vol_V(P), safe for fields whose mass would overflow a float."""
    mesh = _mesh(mesh)
    shift = _shift_for(mesh, vfield)
    terms = []
    for simplex in mesh.simplices:
        nodes = _nodes(simplex, vfield, shift)
        terms.append(float(_simplex_volume_factor(simplex)) * divided_difference_exp(nodes))
    total = _kahan(terms)
    if total <= 0:
        raise ArithmeticError("nonpositive weighted mass")
    return shift + math.log(total)


def weighted_barycenter(mesh, vfield):
    """A_P(V): the e^{<V,p>}-weighted barycenter.

    First moments use the same divided-difference kernel with one repeated
    node per vertex; the barycenter shift cancels in the ratio, so this is
    overflow-free for fields within the guard.
    """
    mesh = _mesh(mesh)
    n = mesh.dim
    shift = _shift_for(mesh, vfield)
    mass_terms = []
    first_terms = [[] for _ in range(n)]
    for simplex in mesh.simplices:
        nodes = _nodes(simplex, vfield, shift)
        w = float(_simplex_volume_factor(simplex))
        mass_terms.append(w * divided_difference_exp(nodes))
        for j, v in enumerate(simplex):
            dd_j = divided_difference_exp(nodes + [nodes[j]])
            for axis in range(n):
                first_terms[axis].append(w * float(v[axis]) * dd_j)
    mass = _kahan(mass_terms)
    if mass <= 0:
        raise ArithmeticError("nonpositive weighted mass")
    return tuple(_kahan(first_terms[axis]) / mass for axis in range(n))


def weighted_covariance(mesh, vfield, rtol=1e-12):
    """Covariance of the e^{<V,p>}-weighted measure on P.

    Equals both the Jacobian dA_P/dV and the Hessian of log Vol_V(P).
    Computed on the quadrature route so it stays independent of the
    divided-difference kernel.
    """
    mesh = _mesh(mesh)
    shift = _shift_for(mesh, vfield)
    m0, m1, m2 = _quad_moments(mesh, vfield, shift, rtol)
    a = m1 / m0
    cov = m2 / m0 - np.outer(a, a)
    return (cov + cov.T) / 2.0


def _quad_moments(mesh, vfield, shift, rtol=1e-12):
    n = mesh.dim
    m0 = 0.0
    m1 = np.zeros(n)
    m2 = np.zeros((n, n))
    for simplex in mesh.simplices:
        c0, c1, c2 = quadrature.exp_moments_simplex(simplex, vfield, shift, rtol)
        m0 += c0
        m1 += c1
        m2 += c2
    return m0, m1, m2


@dataclass(frozen=True)
class MomentReport:
    volume: object
    barycenter: tuple
    vfield: tuple
    weighted_volume: float
    weighted_barycenter: tuple
    covariance: object
    err_estimate: float


def moment_report(p, vfield=None):
    """Bundle exact and weighted moments of one polytope.

    ``err_estimate`` is the relative disagreement of the two independent
    weighted-mass routes (divided differences vs quadrature).
    """
    mesh = _mesh(p)
    if vfield is None:
        vfield = tuple(0.0 for _ in range(mesh.dim))
    vfield = tuple(float(x) for x in vfield)
    vol = volume(mesh)
    bary = barycenter(mesh)
    wvol = weighted_volume(mesh, vfield)
    wbary = weighted_barycenter(mesh, vfield)
    shift = _shift_for(mesh, vfield)
    m0, m1, m2 = _quad_moments(mesh, vfield, shift)
    a = m1 / m0
    cov = m2 / m0 - np.outer(a, a)
    cov = (cov + cov.T) / 2.0
    quad_mass = math.exp(shift) * m0
    err = abs(wvol - quad_mass) / abs(wvol) if wvol else 0.0
    return MomentReport(
        volume=vol,
        barycenter=bary,
        vfield=vfield,
        weighted_volume=wvol,
        weighted_barycenter=wbary,
        covariance=cov,
        err_estimate=err,
    )
