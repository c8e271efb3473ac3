"""Problem documents: the JSON exchange format and the built-in registry.

A document carries either fan data (rays, max_cones, decomposition matrix)
or raw halfspace lists, one list per decomposition part.  Rationals travel
as "p/q" strings and stay exact; any float anywhere switches the geometry
pipeline to float tolerances.  Raw halfspaces may arrive in the dual
"leq" convention, in which case normals are negated at ingestion and the
conversion is recorded in the document notes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InputError, UnknownExampleError

HEXAGON_DEFAULT_T = Fraction(1, 10)


def parse_scalar(value, where):
    """int and "p/q" strings parse exactly; floats stay floats."""
    if isinstance(value, bool):
        raise InputError(f"{where}: expected a number, got a boolean")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"{where}: invalid rational {value!r} ({exc})") from None
    raise InputError(f"{where}: expected a number or 'p/q' string, got {type(value).__name__}")


def format_scalar(value):
    if isinstance(value, Fraction):
        return str(value)
    return value


def _int_vector(value, length, where):
    if not isinstance(value, (list, tuple)) or len(value) != length:
        raise InputError(f"{where}: expected an integer vector of length {length}")
    out = []
    for i, entry in enumerate(value):
        if isinstance(entry, bool) or not isinstance(entry, int):
            raise InputError(f"{where}[{i}]: expected an integer")
        out.append(entry)
    return tuple(out)


@dataclass(frozen=True)
class ProblemDocument:
    name: str
    dimension: int
    rays: tuple | None = None
    max_cones: tuple | None = None
    decomposition: tuple | None = None
    halfspaces: tuple | None = None
    vector_fields: tuple | None = None
    options: dict = field(default_factory=dict)
    notes: tuple = ()

    @property
    def k(self):
        if self.decomposition is not None:
            return len(self.decomposition)
        return len(self.halfspaces)

    @property
    def exact(self):
        """True when no float contaminates the geometry data."""
        if self.halfspaces is not None:
            for part in self.halfspaces:
                for normal, offset in part:
                    if isinstance(offset, float) or any(
                        isinstance(x, float) for x in normal
                    ):
                        return False
        return True


def _is_halfspace_pair(entry):
    return (
        isinstance(entry, (list, tuple))
        and len(entry) == 2
        and isinstance(entry[0], (list, tuple))
        and isinstance(entry[1], (int, float, str))
    )


def _parse_halfspaces(raw, dim, form, notes):
    if not isinstance(raw, (list, tuple)) or not raw:
        raise InputError("halfspaces: expected a non-empty list")
    if all(_is_halfspace_pair(e) for e in raw):
        parts = [raw]
    elif all(
        isinstance(p, (list, tuple)) and p and all(_is_halfspace_pair(e) for e in p)
        for p in raw
    ):
        parts = list(raw)
    else:
        raise InputError(
            "halfspaces: expected [normal, offset] pairs, "
            "or one list of pairs per decomposition part"
        )
    sign = 1
    if form == "leq":
        sign = -1
        notes.append("halfspaces converted from leq form (normals negated) at ingestion")
    elif form != "geq":
        raise InputError(f"halfspace_form: expected 'geq' or 'leq', got {form!r}")
    out = []
    for i, part in enumerate(parts):
        rows = []
        for j, (normal, offset) in enumerate(part):
            where = f"halfspaces[{i}][{j}]"
            if len(normal) != dim:
                raise InputError(f"{where}: normal has length {len(normal)}, expected {dim}")
            d = tuple(sign * parse_scalar(x, where) for x in normal)
            rows.append((d, parse_scalar(offset, where)))
        out.append(tuple(rows))
    return tuple(out)


def document_from_dict(data, default_name="unnamed"):
    if not isinstance(data, dict):
        raise InputError("document: expected a JSON object")
    known = {
        "name", "dimension", "rays", "max_cones", "decomposition",
        "halfspaces", "halfspace_form", "vector_fields", "options", "notes",
    }
    for key in data:
        if key not in known:
            raise InputError(f"document: unknown field {key!r}")
    name = data.get("name", default_name)
    dim = data.get("dimension")
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise InputError("dimension: expected a positive integer")

    fan_keys = [k for k in ("rays", "max_cones", "decomposition") if data.get(k) is not None]
    has_raw = data.get("halfspaces") is not None
    if has_raw and fan_keys:
        raise InputError("document: exactly one geometry source (rays+max_cones+decomposition or halfspaces)")
    if not has_raw and len(fan_keys) != 3:
        raise InputError("document: exactly one geometry source (rays+max_cones+decomposition or halfspaces)")

    notes = list(data.get("notes", ()))
    rays = max_cones = decomposition = halfspaces = None
    if has_raw:
        halfspaces = _parse_halfspaces(
            data["halfspaces"], dim, data.get("halfspace_form", "geq"), notes
        )
        k = len(halfspaces)
    else:
        rays = tuple(
            _int_vector(r, dim, f"rays[{i}]") for i, r in enumerate(data["rays"])
        )
        max_cones = []
        for i, cone in enumerate(data["max_cones"]):
            cone = tuple(cone)
            for idx in cone:
                if isinstance(idx, bool) or not isinstance(idx, int) or not 0 <= idx < len(rays):
                    raise InputError(f"max_cones[{i}]: ray index {idx!r} out of range")
            max_cones.append(cone)
        max_cones = tuple(max_cones)
        matrix = data["decomposition"]
        if not isinstance(matrix, (list, tuple)) or not matrix:
            raise InputError("decomposition: expected a non-empty matrix")
        decomposition = []
        for i, row in enumerate(matrix):
            if len(row) != len(rays):
                raise InputError(f"decomposition[{i}]: expected {len(rays)} entries")
            decomposition.append(
                tuple(parse_scalar(x, f"decomposition[{i}][{j}]") for j, x in enumerate(row))
            )
        decomposition = tuple(decomposition)
        k = len(decomposition)

    vector_fields = None
    if data.get("vector_fields") is not None:
        vf = data["vector_fields"]
        if len(vf) != k:
            raise InputError(f"vector_fields: expected {k} vectors, one per part")
        vector_fields = tuple(
            tuple(parse_scalar(x, f"vector_fields[{i}]") for x in row)
            if len(row) == dim
            else _bad_vf(i, dim)
            for i, row in enumerate(vf)
        )

    options = data.get("options", {})
    if not isinstance(options, dict):
        raise InputError("options: expected an object")
    return ProblemDocument(
        name=str(name),
        dimension=dim,
        rays=rays,
        max_cones=max_cones,
        decomposition=decomposition,
        halfspaces=halfspaces,
        vector_fields=vector_fields,
        options=dict(options),
        notes=tuple(notes),
    )


def _bad_vf(i, dim):
    raise InputError(f"vector_fields[{i}]: expected a vector of length {dim}")


def document_to_dict(doc):
    out = {"name": doc.name, "dimension": doc.dimension}
    if doc.halfspaces is not None:
        out["halfspaces"] = [
            [[list(map(format_scalar, normal)), format_scalar(offset)] for normal, offset in part]
            for part in doc.halfspaces
        ]
        out["halfspace_form"] = "geq"
    else:
        out["rays"] = [list(r) for r in doc.rays]
        out["max_cones"] = [list(c) for c in doc.max_cones]
        out["decomposition"] = [[format_scalar(x) for x in row] for row in doc.decomposition]
    if doc.vector_fields is not None:
        out["vector_fields"] = [[format_scalar(x) for x in row] for row in doc.vector_fields]
    if doc.options:
        out["options"] = doc.options
    if doc.notes:
        out["notes"] = list(doc.notes)
    return out


def dumps_document(doc):
    return json.dumps(document_to_dict(doc), indent=2, sort_keys=True)


def load_problem(path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc})") from None
    return document_from_dict(data, default_name=str(path))


# Built-in registry.  Fan data is standard; the 4-fold bundle example ships
# as raw halfspaces because its fan's maximal cones are never needed.

_PE_NORMALS_LEQ = (
    (-1, -1, 0, -2),
    (1, 0, 0, -2),
    (0, 1, 0, -2),
    (0, 0, -1, 3),
    (0, 0, 1, 3),
    (0, 0, 0, 6),
    (0, 0, 0, -6),
)


def critical_bundle_parameter():
    """Larger root of 112 c^2 - 112 c + 23, where the barycenter sum vanishes."""
    return 0.5 + math.sqrt(5.0 / 7.0) / 4.0


def _pe_part(c):
    rows = []
    for j, d in enumerate(_PE_NORMALS_LEQ):
        offset = c if j in (3, 4) else Fraction(1, 2)
        rows.append((tuple(-x for x in d), offset))
    return tuple(rows)


def _pe_document(param):
    if param in (None, "", "critical"):
        c = critical_bundle_parameter()
        label = "critical"
    else:
        # No range gate: outside (1/4, 3/4) the class stops being ample and
        # halfspaces go redundant, which the geometry layer reports.
        c = parse_scalar(param, "pE-4fold-c parameter")
        label = str(param)
    one_minus = 1 - c if isinstance(c, Fraction) else 1.0 - c
    return ProblemDocument(
        name=f"pE-4fold-c:{label}",
        dimension=4,
        halfspaces=(_pe_part(c), _pe_part(one_minus)),
        notes=("halfspace normals are the negated leq-form bundle rays",),
    )


def _hexagon_document(param):
    t = HEXAGON_DEFAULT_T if param in (None, "") else parse_scalar(param, "hexagon-dP6-t parameter")
    if isinstance(t, Fraction) and not -Fraction(1, 2) < t < Fraction(1, 2):
        raise InputError(f"hexagon-dP6-t: parameter {t} outside (-1/2, 1/2)")
    half = Fraction(1, 2)
    row_plus = [half, half + t, half, half, half, half]
    row_minus = [half, half - t, half, half, half, half]
    return ProblemDocument(
        name=f"hexagon-dP6-t:{t}",
        dimension=2,
        rays=((1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1)),
        max_cones=((0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)),
        decomposition=(tuple(row_plus), tuple(row_minus)),
    )


def _simple_fan_document(name, dim, rays, max_cones):
    ones = tuple(Fraction(1) for _ in rays)
    return ProblemDocument(
        name=name,
        dimension=dim,
        rays=rays,
        max_cones=max_cones,
        decomposition=(ones,),
    )


def _registry():
    return {
        "p2": lambda p: _simple_fan_document(
            "p2", 2, ((1, 0), (0, 1), (-1, -1)), ((0, 1), (1, 2), (2, 0))
        ),
        "p1xp1": lambda p: _simple_fan_document(
            "p1xp1", 2,
            ((1, 0), (0, 1), (-1, 0), (0, -1)),
            ((0, 1), (1, 2), (2, 3), (3, 0)),
        ),
        "blowup-p2-1pt": lambda p: _simple_fan_document(
            "blowup-p2-1pt", 2,
            ((1, 0), (0, 1), (-1, -1), (1, 1)),
            ((0, 3), (3, 1), (1, 2), (2, 0)),
        ),
        "hexagon-dP6-t": _hexagon_document,
        "pE-4fold-c": _pe_document,
        "p1-fubini": lambda p: _simple_fan_document(
            "p1-fubini", 1, ((1,), (-1,)), ((0,), (1,))
        ),
    }


def registry_names():
    return tuple(sorted(_registry()))


def builtin_example(spec):
    """Look up "name" or "name:param" in the registry."""
    name, _, param = spec.partition(":")
    if name == "hexagon-dP6":
        name = "hexagon-dP6-t"
    registry = _registry()
    if name not in registry:
        raise UnknownExampleError(
            f"unknown example {name!r}; registry: {', '.join(registry_names())}"
        )
    return registry[name](param or None)
