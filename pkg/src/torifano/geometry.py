"""Fans, support vectors, polytopes, and exact triangulation.

The combinatorial layer works over ``fractions.Fraction`` whenever the input
data is rational, so smoothness, completeness, ampleness, vertex positions,
volumes and barycenters are exact.  Float offsets are accepted for the few
workflows that genuinely need irrational parameters; those go through the
same code paths with a small absolute tolerance.

Conventions: a ray is a primitive integer column vector; a support vector
``c`` over a fan with rays ``d_j`` cuts out ``P = {x : <d_j, x> >= -c_j}``.
Raw halfspace input uses the same lower-bound form.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from . import linalg
from .errors import EmptyPolytopeError, InputError, UnboundedPolytopeError

DEFAULT_FLOAT_TOL = 1e-9

# Brute-force vertex enumeration is intended for this regime only.
MAX_RAW_DIM = 6
MAX_RAW_HALFSPACES = 32


def _coerce(x):
    if isinstance(x, float):
        return x
    return Fraction(x)


def _vec(xs):
    return tuple(_coerce(x) for x in xs)


def _all_exact(values):
    return all(not isinstance(v, float) for v in values)


def dot(u, v):
    return sum(a * b for a, b in zip(u, v))


# ---------------------------------------------------------------------------
# fans


@dataclass(frozen=True)
class Fan:
    """A simplicial fan given by primitive rays and maximal cones.

    ``max_cones`` lists index tuples into ``rays``; each maximal cone of a
    smooth complete fan has exactly ``dim`` rays.
    """

    rays: tuple
    max_cones: tuple

    def __post_init__(self):
        rays = tuple(tuple(int(x) for x in r) for r in self.rays)
        if not rays:
            raise InputError("fan needs at least one ray")
        n = len(rays[0])
        if any(len(r) != n for r in rays):
            raise InputError("rays must share one dimension")
        cones = tuple(tuple(sorted(int(i) for i in cone)) for cone in self.max_cones)
        for cone in cones:
            if len(cone) != n:
                raise InputError(f"maximal cone {cone} must have {n} rays")
            if any(i < 0 or i >= len(rays) for i in cone):
                raise InputError(f"cone index out of range in {cone}")
            if len(set(cone)) != n:
                raise InputError(f"repeated ray in cone {cone}")
        object.__setattr__(self, "rays", rays)
        object.__setattr__(self, "max_cones", cones)

    @property
    def dim(self):
        return len(self.rays[0])

    @property
    def nrays(self):
        return len(self.rays)


@dataclass(frozen=True)
class FanReport:
    smooth: bool
    complete: bool
    fano: bool
    witnesses: tuple = ()

    @property
    def ok(self):
        return self.smooth and self.complete and self.fano


def validate_fan(fan):
    """Check primitivity, smoothness, completeness and the Fano condition.

    Duplicate or non-primitive rays are hard input errors; the three named
    properties come back as booleans with witnesses for any failure.
    """
    for i, ray in enumerate(fan.rays):
        if gcd(*(abs(x) for x in ray)) != 1:
            raise InputError(f"ray {i} not primitive: {ray}")
    seen = {}
    for i, ray in enumerate(fan.rays):
        if ray in seen:
            raise InputError(f"ray {i} duplicates ray {seen[ray]}")
        seen[ray] = i

    witnesses = []
    smooth = True
    for ci, cone in enumerate(fan.max_cones):
        d = linalg.det([fan.rays[i] for i in cone])
        if abs(d) != 1:
            smooth = False
            witnesses.append(("smooth", {"cone": cone, "det": str(d)}))

    # A complete simplicial fan is characterized by every wall (codimension-1
    # cone) lying in exactly two maximal cones.
    wall_count = {}
    for cone in fan.max_cones:
        for wall in itertools.combinations(cone, fan.dim - 1):
            wall_count[wall] = wall_count.get(wall, 0) + 1
    complete = bool(fan.max_cones)
    for wall, count in sorted(wall_count.items()):
        if count != 2:
            complete = False
            witnesses.append(("complete", {"wall": wall, "incidence": count}))

    fano = False
    if smooth and complete:
        ones = tuple(Fraction(1) for _ in fan.rays)
        amp = ampleness_class(fan, ones)
        fano = amp.kind is Ampleness.AMPLE
        if not fano:
            witnesses.append(("fano", {"ampleness": amp.kind.value, "witness": amp.witness}))
    return FanReport(smooth=smooth, complete=complete, fano=fano, witnesses=tuple(witnesses))


def vertex_from_equalities(normals, offsets):
    """Solve <d_j, v> = -c_j for the listed normals; None when singular."""
    rhs = [-_coerce(c) for c in offsets]
    mat = [_vec(d) for d in normals]
    tol = 0 if _all_exact([x for row in mat for x in row] + rhs) else DEFAULT_FLOAT_TOL
    return linalg.solve(mat, rhs, tol=tol)


class Ampleness(enum.Enum):
    AMPLE = "Ample"
    NEF_ONLY = "NefOnly"
    NOT_CONVEX = "NotConvex"


@dataclass(frozen=True)
class AmplenessReport:
    kind: Ampleness
    witness: tuple = None  # (cone index, ray index) where convexity fails/ties


def ampleness_class(fan, c):
    """Classify a support vector as Ample, NefOnly, or NotConvex.

    For each maximal cone the candidate vertex is solved exactly; strictness
    of all non-defining halfspaces at every candidate is ampleness, an
    equality somewhere (without violation) is the nef boundary.
    """
    c = _vec(c)
    if len(c) != fan.nrays:
        raise InputError("support vector length must match ray count")
    nef_witness = None
    for ci, cone in enumerate(fan.max_cones):
        v = vertex_from_equalities([fan.rays[j] for j in cone], [c[j] for j in cone])
        if v is None:
            raise InputError(f"cone {cone} is not simplicial of full rank")
        for j in range(fan.nrays):
            if j in cone:
                continue
            slack = dot(fan.rays[j], v) + c[j]
            if slack < 0:
                return AmplenessReport(Ampleness.NOT_CONVEX, (ci, j))
            if slack == 0 and nef_witness is None:
                nef_witness = (ci, j)
    if nef_witness is not None:
        return AmplenessReport(Ampleness.NEF_ONLY, nef_witness)
    return AmplenessReport(Ampleness.AMPLE)


# ---------------------------------------------------------------------------
# polytopes


@dataclass(frozen=True)
class Polytope:
    """Bounded intersection of halfspaces with enumerated vertices.

    ``halfspaces[j]`` is a ``(normal, offset)`` pair for
    ``<normal, x> >= -offset``; ``tight_sets[j]`` lists the vertex indices on
    its boundary and ``redundant[j]`` flags halfspaces whose tight set spans
    less than a facet.  ``degenerate`` marks empty or lower-dimensional
    intersections, which carry no mesh.
    """

    dim: int
    halfspaces: tuple
    vertices: tuple
    tight_sets: tuple
    redundant: tuple
    provenance: str
    degenerate: bool = False

    @property
    def nvertices(self):
        return len(self.vertices)

    def interior_point(self):
        n = len(self.vertices)
        return tuple(sum(v[i] for v in self.vertices) / n for i in range(self.dim))


def _dedup_vertices(candidates, tol):
    out = []
    for v in candidates:
        dup = False
        for w in out:
            if tol == 0:
                dup = v == w
            else:
                dup = all(abs(a - b) <= tol for a, b in zip(v, w))
            if dup:
                break
        if not dup:
            out.append(v)
    return out


def _tight_and_redundant(dim, halfspaces, vertices, tol):
    tight_sets = []
    redundant = []
    for normal, offset in halfspaces:
        tight = tuple(
            i for i, v in enumerate(vertices) if abs(dot(normal, v) + offset) <= tol
        )
        tight_sets.append(tight)
        pts = [vertices[i] for i in tight]
        # A halfspace supports a facet exactly when its contact set has
        # affine dimension dim-1; anything less is implied by the others.
        redundant.append(linalg.affine_rank(pts, tol) < dim - 1)
    return tuple(tight_sets), tuple(redundant)


def polytope_from_support(fan, c):
    """Polytope of a support vector over a smooth complete fan.

    One candidate vertex per maximal cone, duplicates merged, infeasible
    candidates (non-convex supports) dropped.  Empty interior comes back as
    a degenerate polytope rather than an error.
    """
    c = _vec(c)
    if len(c) != fan.nrays:
        raise InputError("support vector length must match ray count")
    exact = _all_exact(c)
    tol = 0 if exact else DEFAULT_FLOAT_TOL
    halfspaces = tuple((fan.rays[j], c[j]) for j in range(fan.nrays))

    candidates = []
    for cone in fan.max_cones:
        v = vertex_from_equalities([fan.rays[j] for j in cone], [c[j] for j in cone])
        if v is None:
            raise InputError(f"cone {cone} is not simplicial of full rank")
        if all(dot(d, v) + off >= -tol for d, off in halfspaces):
            candidates.append(v)
    vertices = tuple(_dedup_vertices(candidates, tol))
    n = fan.dim
    degenerate = linalg.affine_rank(vertices, tol) < n
    tight_sets, redundant = _tight_and_redundant(n, halfspaces, vertices, tol)
    return Polytope(
        dim=n,
        halfspaces=halfspaces,
        vertices=vertices,
        tight_sets=tight_sets,
        redundant=redundant,
        provenance="fan-support",
        degenerate=degenerate,
    )


def _fm_feasible(halfspaces, tol):
    """Fourier-Motzkin feasibility for <d, x> + c >= 0 systems.

    Returns (feasible, certificate); the certificate is the most violated
    constant constraint left after eliminating every variable.
    """
    rows = [tuple(_coerce(x) for x in d) + (_coerce(c),) for d, c in halfspaces]
    nvars = len(halfspaces[0][0])

    def _normalize(row):
        scale = max(abs(x) for x in row[:-1]) if any(row[:-1]) else (abs(row[-1]) or 1)
        if scale == 0:
            return row
        return tuple(x / scale for x in row)

    for var in range(nvars - 1, -1, -1):
        pos, neg, rest = [], [], []
        for row in rows:
            a = row[var]
            if a > tol:
                pos.append(row)
            elif a < -tol:
                neg.append(row)
            else:
                rest.append(row[:var] + row[var + 1 :])
        combined = set()
        for p in pos:
            for m in neg:
                new = tuple(
                    p[var] * m[k] - m[var] * p[k]
                    for k in range(len(p))
                    if k != var
                )
                combined.add(_normalize(new))
        rows = rest + sorted(combined)
    worst = min((row[-1] for row in rows), default=Fraction(0))
    return worst >= -tol, worst


def _recession_direction(normals, tol):
    """A nonzero direction d with <normal, d> >= 0 for all rows, if any."""
    n = len(normals[0])
    lineality = linalg.kernel_vector(normals, tol)
    if lineality is not None:
        return lineality
    for subset in itertools.combinations(range(len(normals)), n - 1):
        sub = [normals[j] for j in subset]
        if linalg.rank(sub, tol) != n - 1:
            continue
        d = linalg.kernel_vector(sub, tol)
        if d is None:
            continue
        for cand in (d, tuple(-x for x in d)):
            if all(dot(row, cand) >= -tol for row in normals):
                return cand
    return None


def polytope_from_halfspaces(halfspaces, tol=None, provenance="raw"):
    """Vertex enumeration for an explicit halfspace list, brute force.

    Solves every n-subset of the system exactly, keeps feasible solutions,
    and classifies empty and unbounded inputs.  Intended for dimension <= 6
    and at most 32 halfspaces; beyond that is an input error, not a slow
    path.
    """
    hs = [(_vec(d), _coerce(c)) for d, c in halfspaces]
    if not hs:
        raise InputError("need at least one halfspace")
    n = len(hs[0][0])
    m = len(hs)
    if any(len(d) != n for d, _ in hs):
        raise InputError("halfspace normals must share one dimension")
    if n > MAX_RAW_DIM or m > MAX_RAW_HALFSPACES:
        raise InputError(
            f"raw halfspace regime is dim <= {MAX_RAW_DIM}, m <= {MAX_RAW_HALFSPACES}"
        )
    exact = _all_exact([x for d, c in hs for x in (*d, c)])
    if tol is None:
        tol = 0 if exact else DEFAULT_FLOAT_TOL

    normals = [d for d, _ in hs]
    candidates = []
    for subset in itertools.combinations(range(m), n):
        v = linalg.solve(
            [normals[j] for j in subset],
            [-hs[j][1] for j in subset],
            tol=tol if tol else 0,
        )
        if v is None:
            continue
        if all(dot(d, v) + c >= -tol for d, c in hs):
            candidates.append(v)
    vertices = tuple(_dedup_vertices(candidates, tol))

    if not vertices:
        feasible, certificate = _fm_feasible(hs, tol)
        if not feasible:
            raise EmptyPolytopeError(
                "halfspace system is infeasible", certificate=str(certificate)
            )
        direction = _recession_direction(normals, tol)
        raise UnboundedPolytopeError(
            "feasible but has no vertex", direction=direction
        )
    direction = _recession_direction(normals, tol)
    if direction is not None:
        raise UnboundedPolytopeError(
            f"unbounded along {direction}", direction=direction
        )

    degenerate = linalg.affine_rank(vertices, tol) < n
    tight_sets, redundant = _tight_and_redundant(n, hs, vertices, tol)
    return Polytope(
        dim=n,
        halfspaces=tuple(hs),
        vertices=vertices,
        tight_sets=tight_sets,
        redundant=redundant,
        provenance=provenance,
        degenerate=degenerate,
    )


def support_function(polytope, u):
    """max_{p in P} <u, p>, evaluated on the vertex set."""
    u = _vec(u)
    if len(u) != polytope.dim:
        raise InputError("direction has wrong dimension")
    if not polytope.vertices:
        raise InputError("support function of an empty polytope")
    return max(dot(u, v) for v in polytope.vertices)


def translate(polytope, t):
    """Translate a polytope; offsets shift by <d_j, t>."""
    t = _vec(t)
    if len(t) != polytope.dim:
        raise InputError("translation has wrong dimension")
    if all(x == 0 for x in t):
        return polytope
    vertices = tuple(tuple(a + b for a, b in zip(v, t)) for v in polytope.vertices)
    halfspaces = tuple((d, c + dot(d, t)) for d, c in polytope.halfspaces)
    return Polytope(
        dim=polytope.dim,
        halfspaces=halfspaces,
        vertices=vertices,
        tight_sets=polytope.tight_sets,
        redundant=polytope.redundant,
        provenance="translate",
        degenerate=polytope.degenerate,
    )


def minkowski_sum(fan, parts):
    """Sum support vectors over one fan and rebuild the polytope.

    All parts must be Ample or NefOnly.  The construction is linear per
    maximal cone, which is asserted, along with support-number additivity
    on every ray direction.
    """
    parts = [_vec(c) for c in parts]
    if not parts:
        raise InputError("need at least one summand")
    for c in parts:
        if len(c) != fan.nrays:
            raise InputError("support vector length must match ray count")
        kind = ampleness_class(fan, c).kind
        if kind is Ampleness.NOT_CONVEX:
            raise InputError("Minkowski summands must be Ample or NefOnly")
    total = tuple(sum(c[j] for c in parts) for j in range(fan.nrays))
    poly = polytope_from_support(fan, total)

    part_polys = [polytope_from_support(fan, c) for c in parts]
    for cone in fan.max_cones:
        rays = [fan.rays[j] for j in cone]
        vsum = vertex_from_equalities(rays, [total[j] for j in cone])
        pieces = [
            vertex_from_equalities(rays, [c[j] for j in cone]) for c in parts
        ]
        combined = tuple(sum(p[i] for p in pieces) for i in range(fan.dim))
        assert vsum == combined, "per-cone vertices must add"
    for j in range(fan.nrays):
        lhs = sum(
            min(dot(fan.rays[j], v) for v in pp.vertices) for pp in part_polys
        )
        assert lhs == -total[j], "support numbers must add on rays"
    return total, poly


# ---------------------------------------------------------------------------
# triangulation


@dataclass(frozen=True)
class SimplexMesh:
    """Disjoint simplices covering a polytope, as coordinate tuples."""

    simplices: tuple
    parent: Polytope = field(compare=False, default=None)

    @property
    def dim(self):
        return len(self.simplices[0]) - 1 if self.simplices else 0


def triangulate(polytope, apex="lexmin"):
    """Deterministic boundary-cone triangulation.

    Every face is coned from its lexicographically extreme vertex over the
    triangulations of the facets that miss it.  The scheme depends only on
    vertex coordinates, so it is independent of input ordering.
    """
    if polytope.degenerate:
        raise InputError("cannot triangulate a degenerate polytope")
    if apex not in ("lexmin", "lexmax"):
        raise InputError("apex rule must be 'lexmin' or 'lexmax'")
    verts = polytope.vertices
    n = polytope.dim
    tol = 0 if _all_exact([x for v in verts for x in v]) else DEFAULT_FLOAT_TOL
    pick = min if apex == "lexmin" else max

    facet_sets = []
    for tight, red in zip(polytope.tight_sets, polytope.redundant):
        if red:
            continue
        key = tuple(sorted(tight))
        if key not in facet_sets:
            facet_sets.append(key)

    cache = {}

    def tri_face(face, d):
        if face in cache:
            return cache[face]
        if d == 0:
            result = [face]
        elif len(face) == d + 1:
            result = [face]
        else:
            apex_idx = pick(face, key=lambda i: verts[i])
            result = []
            seen = []
            for tight in facet_sets:
                sub = tuple(i for i in face if i in tight)
                if apex_idx in sub or sub in seen:
                    continue
                if linalg.affine_rank([verts[i] for i in sub], tol) != d - 1:
                    continue
                seen.append(sub)
                for simplex in tri_face(sub, d - 1):
                    result.append((apex_idx,) + simplex)
        cache[face] = result
        return result

    top = tuple(range(len(verts)))
    simplices = []
    for idx_tuple in tri_face(top, n):
        pts = tuple(verts[i] for i in idx_tuple)
        edges = [[a - b for a, b in zip(p, pts[0])] for p in pts[1:]]
        if abs(linalg.det(edges)) <= tol:
            raise ArithmeticError("degenerate simplex in triangulation")
        simplices.append(pts)
    return SimplexMesh(simplices=tuple(simplices), parent=polytope)
