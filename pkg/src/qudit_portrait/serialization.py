"""JSON documents for states, placements and grouping specs.

Complex matrices are row-major nested arrays of ``[re, im]`` pairs. Every
index written to or read from a document is 1-based.
"""
import hashlib
import json
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import PortraitError, SpecFormatError
from .inequalities import GroupingSpec
from .placements import IndexPlacement, lex_placement, placement_from_cells
from .states import (
    DensityMatrix, ProbabilityVector, validate_density_matrix,
    validate_probability_vector,
)

DATA_PACKAGE = "qudit_portrait.data"


def matrix_to_json(matrix) -> list:
    """Convert a complex matrix to nested ``[re, im]`` lists."""
    matrix = np.asarray(matrix, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in matrix]


def matrix_from_json(data) -> np.ndarray:
    """Convert nested ``[re, im]`` pairs (or plain reals) to a complex matrix.

    Raises:
        SpecFormatError: If the data is not a rectangular 2D array
    """
    try:
        values = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SpecFormatError(f"Matrix entries are not numeric: {exc}") from exc

    if values.ndim == 3 and values.shape[-1] == 2:
        return values[..., 0] + 1j * values[..., 1]
    if values.ndim == 2:
        return values.astype(complex)
    raise SpecFormatError(f"Expected a 2D matrix of reals or [re, im] pairs, got shape {values.shape}")


def vector_document(p: ProbabilityVector) -> dict:
    return {"kind": "vector", "p": [float(x) for x in p.components]}


def density_document(rho: DensityMatrix) -> dict:
    return {"kind": "density", "rho": matrix_to_json(rho.matrix)}


def parse_state(doc, tol=None) -> ProbabilityVector | DensityMatrix:
    """Validate a state document.

    Accepted forms are ``{"kind": "vector", "p"}``, ``{"kind": "density",
    "rho"}``, ``{"kind": "tomogram", "w", ...}`` (read as its probability
    vector) and bare arrays: a flat list is a vector, a nested list a
    density matrix.

    Raises:
        SpecFormatError: If the document has an unknown shape
        PortraitError: If validation of the contents fails
    """
    try:
        return _parse_state(doc, tol)
    except TypeError as exc:
        raise SpecFormatError(f"State entries must be numbers: {exc}") from exc


def _parse_state(doc, tol) -> ProbabilityVector | DensityMatrix:
    if isinstance(doc, list):
        depth = np.ndim(np.asarray(doc, dtype=object))
        if depth == 1:
            return validate_probability_vector(doc, tol)
        return validate_density_matrix(matrix_from_json(doc), tol)

    if not isinstance(doc, dict):
        raise SpecFormatError(f"Unsupported state document of type {type(doc).__name__}")

    kind = doc.get("kind")
    try:
        if kind == "vector":
            return validate_probability_vector(doc["p"], tol)
        if kind == "density":
            return validate_density_matrix(matrix_from_json(doc["rho"]), tol)
        if kind == "tomogram":
            return validate_probability_vector(doc["w"], tol)
    except KeyError as exc:
        raise SpecFormatError(f"State document of kind '{kind}' lacks field {exc}") from exc
    raise SpecFormatError(f"Unknown state kind {kind!r}")


def placement_to_json(placement: IndexPlacement) -> dict:
    return {
        "shape": list(placement.shape),
        "assignment": [[c + 1 for c in cell] for cell in placement.cells],
    }


def placement_from_json(doc, n: int | None = None) -> IndexPlacement:
    """Read a placement; without ``assignment`` the lexicographic one is used.

    Args:
        doc: ``{"shape": [...], "assignment": [[1-based cell], ...]}``
        n: Component count, required when the assignment is omitted

    Raises:
        SpecFormatError: If fields are missing or malformed
    """
    if not isinstance(doc, dict) or "shape" not in doc:
        raise SpecFormatError("Placement document needs a 'shape' field")
    try:
        shape = [int(d) for d in doc["shape"]]
    except (TypeError, ValueError) as exc:
        raise SpecFormatError(f"Placement shape must be a list of integers: {exc}") from exc

    assignment = doc.get("assignment")
    if assignment is None:
        if n is None:
            raise SpecFormatError("Placement without an assignment needs a component count")
        return lex_placement(n, shape)

    try:
        cells = [[int(c) - 1 for c in cell] for cell in assignment]
    except (TypeError, ValueError) as exc:
        raise SpecFormatError(f"Malformed assignment: {exc}") from exc
    return placement_from_cells(shape, cells)


def grouping_to_json(spec: GroupingSpec) -> dict:
    def one_based(side):
        return [[[k + 1 for k in group] for group in family] for family in side]

    return {
        "n": spec.n,
        "label": spec.label,
        "lhs": one_based(spec.lhs),
        "rhs": one_based(spec.rhs),
        "audit_only": spec.audit_only,
        "note": spec.note,
    }


def grouping_from_json(doc, label: str = "") -> GroupingSpec:
    """Read a GroupingSpec document with 1-based indices.

    Raises:
        SpecFormatError: If required fields are missing or not nested lists
        IndexOutOfRange: If an index falls outside 1..n
        OverlappingGroups: If groups within a family share an index
    """
    if not isinstance(doc, dict):
        raise SpecFormatError("Grouping spec must be a JSON object")
    missing = [key for key in ("n", "lhs", "rhs") if key not in doc]
    if missing:
        raise SpecFormatError(f"Grouping spec lacks fields {missing}")

    def zero_based(side):
        return [[[int(k) - 1 for k in group] for group in family] for family in side]

    try:
        n = int(doc["n"])
        lhs, rhs = zero_based(doc["lhs"]), zero_based(doc["rhs"])
    except (TypeError, ValueError) as exc:
        raise SpecFormatError(f"n must be an integer and groups lists of lists of integers: {exc}") from exc

    return GroupingSpec.from_groups(
        n, lhs, rhs,
        label=doc.get("label") or label,
        audit_only=bool(doc.get("audit_only", False)),
        note=doc.get("note", ""),
    )


def bundled_spec_names() -> list[str]:
    """Names of the grouping specs shipped with the package."""
    return sorted(
        entry.name.removesuffix(".json")
        for entry in resources.files(DATA_PACKAGE).iterdir()
        if entry.name.endswith(".json")
    )


def bundled_spec(name: str) -> GroupingSpec:
    """Load a bundled grouping spec by name, with or without ``.json``.

    Raises:
        SpecFormatError: If no spec of that name ships with the package
    """
    stem = name.removesuffix(".json")
    if stem not in bundled_spec_names():
        raise SpecFormatError(f"No bundled spec '{name}', choose from {bundled_spec_names()}")
    text = resources.files(DATA_PACKAGE).joinpath(f"{stem}.json").read_text(encoding="utf-8")
    return grouping_from_json(json.loads(text), label=stem)


def load_json(path) -> object:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def load_grouping(source: str) -> GroupingSpec:
    """Read a grouping spec from a file path, falling back to bundled names."""
    path = Path(source)
    if path.is_file():
        return grouping_from_json(load_json(path), label=path.stem)
    return bundled_spec(source)


def canonical_dumps(obj) -> str:
    """Deterministic JSON text: sorted keys, fixed separators."""
    try:
        return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"
    except ValueError as exc:
        raise PortraitError(f"Document holds a non-finite number: {exc}") from exc


def write_json(path, obj) -> None:
    Path(path).write_text(canonical_dumps(obj), encoding="utf-8")


def digest(obj) -> str:
    """SHA-256 of the canonical JSON encoding."""
    return hashlib.sha256(canonical_dumps(obj).encode("utf-8")).hexdigest()
