import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations, islice, permutations
from math import factorial

import numpy as np

from .config import get_tolerances
from .errors import (
    ArityMismatch, BudgetTooLarge, DimensionMismatch, IndexOutOfRange,
    OverlappingGroups,
)
from .numerics import row_entropies
from .placements import (
    IndexPlacement, embed_density, embed_vector, marginal_table, partial_trace,
    occupied_levels, compress_zero_levels, permuted_placement,
)
from .states import (
    DensityMatrix, ProbabilityVector, RandomSource, sample_simplex,
    shannon_entropy, von_neumann_entropy,
)

logger = logging.getLogger(__name__)

MAX_EXHAUSTIVE_PERMUTATIONS = 10_000_000
_SCAN_CHUNK = 20_000


class InequalityKind(Enum):
    """Entropic inequalities derivable from a placement."""
    SUBADDITIVITY = "subadditivity"
    STRONG_SUBADDITIVITY = "strong-subadditivity"

    @property
    def arity(self) -> int:
        return 2 if self is InequalityKind.SUBADDITIVITY else 3


def default_kind(placement: IndexPlacement) -> InequalityKind:
    """Subadditivity for two-axis placements, strong subadditivity for three."""
    if placement.arity == 2:
        return InequalityKind.SUBADDITIVITY
    if placement.arity == 3:
        return InequalityKind.STRONG_SUBADDITIVITY
    raise ArityMismatch(f"No inequality is defined for a {placement.arity}-axis placement")


def _require_arity(placement: IndexPlacement, arity: int) -> None:
    if placement.arity != arity:
        raise ArityMismatch(f"Expected a {arity}-axis placement, got shape {placement.shape}")


@dataclass(frozen=True)
class InequalityVerdict:
    """Outcome of one check of lhs <= rhs."""
    lhs: float
    rhs: float
    gap: float
    holds: bool
    tolerance: float
    label: str = ""

    @classmethod
    def from_sides(cls, lhs: float, rhs: float, tolerance: float, label: str = "") -> "InequalityVerdict":
        gap = float(rhs) - float(lhs)
        return cls(
            lhs=float(lhs), rhs=float(rhs), gap=gap,
            holds=bool(gap >= -tolerance), tolerance=float(tolerance), label=label,
        )

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "gap": self.gap,
            "holds": self.holds,
            "tolerance": self.tolerance,
        }


Family = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class GroupingSpec:
    """An entropy inequality described by index groups.

    Each side is a list of families; each family is a list of pairwise
    disjoint index groups G contributing -(sum_{k in G} p_k) ln(sum_{k in G} p_k).
    The inequality reads lhs <= rhs. Indices are 0-based.
    """
    n: int
    lhs: tuple[Family, ...]
    rhs: tuple[Family, ...]
    label: str = ""
    audit_only: bool = False
    note: str = ""

    def __post_init__(self):
        for side in (self.lhs, self.rhs):
            for family in side:
                seen: set[int] = set()
                for group in family:
                    if not group:
                        raise IndexOutOfRange("Index groups must not be empty")
                    for index in group:
                        if not 0 <= index < self.n:
                            raise IndexOutOfRange(f"Index {index} is outside [0, {self.n})")
                        if index in seen:
                            raise OverlappingGroups(
                                f"Index {index} appears twice within one family of '{self.label}'"
                            )
                        seen.add(index)

    @classmethod
    def from_groups(cls, n: int, lhs, rhs, label: str = "", audit_only: bool = False, note: str = "") -> "GroupingSpec":
        """Build a spec from nested lists, normalizing them to tuples."""
        def normalize(side):
            return tuple(tuple(tuple(int(k) for k in group) for group in family) for family in side)

        return cls(n=int(n), lhs=normalize(lhs), rhs=normalize(rhs),
                   label=label, audit_only=audit_only, note=note)

    def side_matrix(self, side: str, width: int | None = None) -> np.ndarray:
        """Indicator matrix (width x groups) mapping components to group sums."""
        families = self.lhs if side == "lhs" else self.rhs
        groups = [group for family in families for group in family]
        indicator = np.zeros((width or self.n, len(groups)))
        for column, group in enumerate(groups):
            indicator[list(group), column] = 1.0
        return indicator


@dataclass(frozen=True)
class QuantumSSAResult:
    """Strong-subadditivity verdict together with the three portraits."""
    verdict: InequalityVerdict
    r12: DensityMatrix
    r23: DensityMatrix
    r2: DensityMatrix
    placement: IndexPlacement

    def compressed(self) -> dict[str, DensityMatrix]:
        """Portraits with structurally empty levels removed."""
        return {
            name: compress_zero_levels(portrait, occupied_levels(self.placement, keep))
            for name, keep, portrait in (
                ("R12", (0, 1), self.r12), ("R23", (1, 2), self.r23), ("R2", (1,), self.r2)
            )
        }


class BudgetMode(Enum):
    ALL = "all"
    IDENTITY = "identity"
    RANDOM = "random"


@dataclass(frozen=True)
class ScanBudget:
    """Which permutations a scan evaluates."""
    mode: BudgetMode = BudgetMode.ALL
    count: int = 0

    @classmethod
    def parse(cls, text: str) -> "ScanBudget":
        """Parse ``all``, ``identity`` or ``random:K``.

        Raises:
            ValueError: If the text matches none of the forms
        """
        text = text.strip().lower()
        if text == "all":
            return cls(BudgetMode.ALL)
        if text == "identity":
            return cls(BudgetMode.IDENTITY, 1)
        if text.startswith("random:"):
            count = int(text.split(":", 1)[1])
            if count < 1:
                raise ValueError(f"Random budget must be at least 1, got {count}")
            return cls(BudgetMode.RANDOM, count)
        raise ValueError(f"Unknown scan budget '{text}'")

    def describe(self) -> str:
        if self.mode is BudgetMode.RANDOM:
            return f"random:{self.count}"
        return self.mode.value


@dataclass(frozen=True, eq=False)
class PermutationScanReport:
    """Extremes of an inequality gap over relabelings of the components."""
    kind: InequalityKind
    count: int
    min_gap: float
    argmin: tuple[int, ...]
    max_gap: float
    argmax: tuple[int, ...]
    gaps: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "count": self.count,
            "min_gap": self.min_gap,
            "argmin": [s + 1 for s in self.argmin],
            "max_gap": self.max_gap,
            "argmax": [s + 1 for s in self.argmax],
        }


@dataclass(frozen=True)
class FalsificationResult:
    """First violating input found by ``falsify``, if any."""
    spec_label: str
    evaluated: int
    vector: ProbabilityVector | None = None
    verdict: InequalityVerdict | None = None
    source: str | None = None  # "corner" or "random"

    @property
    def violated(self) -> bool:
        return self.vector is not None

    def to_dict(self) -> dict:
        return {
            "spec": self.spec_label,
            "evaluated": self.evaluated,
            "violation": None if self.vector is None else {
                "p": self.vector.components.tolist(),
                "source": self.source,
                **self.verdict.to_dict(),
            },
        }


def subadditivity_classical(p: ProbabilityVector, placement: IndexPlacement, tolerance: float | None = None) -> InequalityVerdict:
    """Check H(1,2) <= H(1) + H(2) for a vector placed on two axes.

    Args:
        p: Probability vector of placement.n components
        placement: Two-axis placement
        tolerance: Verdict tolerance, defaults to the classical one

    Returns:
        InequalityVerdict: lhs = H(1,2), rhs = H(1) + H(2)

    Raises:
        ArityMismatch: If the placement does not have two axes
    """
    _require_arity(placement, 2)
    if tolerance is None:
        tolerance = get_tolerances().classical_verdict

    table = embed_vector(p, placement)
    h12 = shannon_entropy(ProbabilityVector(components=table.values.reshape(-1)))
    h1 = shannon_entropy(marginal_table(table, (0,)))
    h2 = shannon_entropy(marginal_table(table, (1,)))

    verdict = InequalityVerdict.from_sides(h12, h1 + h2, tolerance, "H(1,2) <= H(1) + H(2)")
    logger.debug("Classical subadditivity on %s: gap=%.3e", placement.shape, verdict.gap)
    return verdict


def strong_subadditivity_classical(p: ProbabilityVector, placement: IndexPlacement, tolerance: float | None = None) -> InequalityVerdict:
    """Check H(1,2,3) + H(2) <= H(1,2) + H(2,3) for a vector placed on three axes.

    Raises:
        ArityMismatch: If the placement does not have three axes
    """
    _require_arity(placement, 3)
    if tolerance is None:
        tolerance = get_tolerances().classical_verdict

    table = embed_vector(p, placement)
    h123 = shannon_entropy(ProbabilityVector(components=table.values.reshape(-1)))
    h2 = shannon_entropy(marginal_table(table, (1,)))
    h12 = shannon_entropy(marginal_table(table, (0, 1)))
    h23 = shannon_entropy(marginal_table(table, (1, 2)))

    verdict = InequalityVerdict.from_sides(
        h123 + h2, h12 + h23, tolerance, "H(1,2,3) + H(2) <= H(1,2) + H(2,3)"
    )
    logger.debug("Classical strong subadditivity on %s: gap=%.3e", placement.shape, verdict.gap)
    return verdict


def shannon_information(p: ProbabilityVector, placement: IndexPlacement) -> float:
    """Shannon information I = H(1) + H(2) - H(1,2) of a two-axis placement."""
    return subadditivity_classical(p, placement).gap


def subadditivity_quantum(rho: DensityMatrix, placement: IndexPlacement, tolerance: float | None = None) -> InequalityVerdict:
    """Check S(1,2) <= S(1) + S(2) for a density matrix placed on two axes.

    Raises:
        ArityMismatch: If the placement does not have two axes
    """
    _require_arity(placement, 2)
    if tolerance is None:
        tolerance = get_tolerances().quantum_verdict

    padded = embed_density(rho, placement)
    s12 = von_neumann_entropy(padded)
    s1 = von_neumann_entropy(partial_trace(padded, (0,)))
    s2 = von_neumann_entropy(partial_trace(padded, (1,)))

    verdict = InequalityVerdict.from_sides(s12, s1 + s2, tolerance, "S(1,2) <= S(1) + S(2)")
    logger.debug("Quantum subadditivity on %s: gap=%.3e", placement.shape, verdict.gap)
    return verdict


def strong_subadditivity_quantum(rho: DensityMatrix, placement: IndexPlacement, tolerance: float | None = None) -> QuantumSSAResult:
    """Check S(rho) + S(R2) <= S(R12) + S(R23) for a qudit placed on three axes.

    The portraits R12, R23 and R2 are partial traces of the zero-padded
    matrix, laid out on the kept axes (not compressed).

    Raises:
        ArityMismatch: If the placement does not have three axes
    """
    _require_arity(placement, 3)
    if tolerance is None:
        tolerance = get_tolerances().quantum_verdict

    padded = embed_density(rho, placement)
    r12 = partial_trace(padded, (0, 1))
    r23 = partial_trace(padded, (1, 2))
    r2 = partial_trace(padded, (1,))

    verdict = InequalityVerdict.from_sides(
        von_neumann_entropy(padded) + von_neumann_entropy(r2),
        von_neumann_entropy(r12) + von_neumann_entropy(r23),
        tolerance,
        "S(rho) + S(R2) <= S(R12) + S(R23)",
    )
    logger.debug("Quantum strong subadditivity on %s: gap=%.3e", placement.shape, verdict.gap)
    return QuantumSSAResult(verdict=verdict, r12=r12, r23=r23, r2=r2, placement=placement)


def quantum_cmi(rho: DensityMatrix, placement: IndexPlacement) -> float:
    """Conditional mutual information S(R12) + S(R23) - S(rho) - S(R2)."""
    return strong_subadditivity_quantum(rho, placement).verdict.gap


def _groups_by_cell(placement: IndexPlacement, keep: tuple[int, ...]) -> Family:
    # Groups come out ordered by their smallest component
    buckets: dict[tuple[int, ...], list[int]] = {}
    for component, cell in enumerate(placement.cells):
        buckets.setdefault(tuple(cell[axis] for axis in keep), []).append(component)
    return tuple(tuple(group) for group in buckets.values())


def derive_grouping(placement: IndexPlacement, kind: InequalityKind | None = None, label: str = "") -> GroupingSpec:
    """Express a placement's inequality as a GroupingSpec.

    Empty lattice cells contribute no group. Evaluating the result with
    ``evaluate_grouping`` reproduces the placement-based verdict.

    Raises:
        ArityMismatch: If kind does not match the placement's arity
    """
    kind = kind or default_kind(placement)
    _require_arity(placement, kind.arity)

    if kind is InequalityKind.SUBADDITIVITY:
        lhs = (_groups_by_cell(placement, (0, 1)),)
        rhs = (_groups_by_cell(placement, (0,)), _groups_by_cell(placement, (1,)))
    else:
        lhs = (_groups_by_cell(placement, (0, 1, 2)), _groups_by_cell(placement, (1,)))
        rhs = (_groups_by_cell(placement, (0, 1)), _groups_by_cell(placement, (1, 2)))

    label = label or f"{kind.value} on {'x'.join(map(str, placement.shape))}"
    return GroupingSpec(n=placement.n, lhs=lhs, rhs=rhs, label=label)


def _grouping_sides(rows: np.ndarray, spec: GroupingSpec) -> tuple[np.ndarray, np.ndarray]:
    width = rows.shape[1]
    lhs = row_entropies(rows @ spec.side_matrix("lhs", width))
    rhs = row_entropies(rows @ spec.side_matrix("rhs", width))
    return lhs, rhs


def evaluate_grouping(p: ProbabilityVector, spec: GroupingSpec, tol: float | None = None) -> InequalityVerdict:
    """Evaluate both sides of a grouping spec on one vector.

    Args:
        p: Probability vector with at least spec.n components
        spec: The inequality as index groups
        tol: Verdict tolerance, defaults to the classical one

    Returns:
        InequalityVerdict: Sums of grouped entropies on each side

    Raises:
        IndexOutOfRange: If the spec addresses components p does not have
    """
    if p.dimension < spec.n:
        raise IndexOutOfRange(f"Spec '{spec.label}' addresses {spec.n} components, vector has {p.dimension}")
    if tol is None:
        tol = get_tolerances().classical_verdict

    lhs, rhs = _grouping_sides(p.components[np.newaxis, :], spec)
    return InequalityVerdict.from_sides(lhs[0], rhs[0], tol, spec.label)


def _corner_cases(n: int) -> np.ndarray:
    basis = np.eye(n)
    pairs = list(combinations(range(n), 2))
    mixtures = np.zeros((len(pairs), n))
    for row, (i, j) in enumerate(pairs):
        mixtures[row, [i, j]] = 0.5
    return np.vstack([basis, mixtures])


def falsify(spec: GroupingSpec, trials: int, rng: RandomSource, n: int | None = None) -> FalsificationResult:
    """Search for an input that violates a grouping spec.

    Corner cases come first (every basis vector, then every two-index
    1/2-1/2 mixture in lexicographic pair order), followed by ``trials``
    simplex-uniform draws. The first input whose gap falls below
    -violation is returned.

    Args:
        spec: Inequality under audit
        trials: Number of random draws after the corner cases (may be 0)
        rng: Random stream
        n: Vector dimension, defaults to spec.n

    Returns:
        FalsificationResult: The first violation, or an empty result

    Raises:
        IndexOutOfRange: If n is smaller than spec.n
    """
    n = spec.n if n is None else n
    if n < spec.n:
        raise IndexOutOfRange(f"Spec '{spec.label}' needs {spec.n} components, got n={n}")
    if trials < 0:
        raise ValueError(f"Trial count must be nonnegative, got {trials}")

    tol = get_tolerances()
    threshold = -tol.violation
    evaluated = 0

    def first_violation(rows: np.ndarray, source: str) -> FalsificationResult | None:
        nonlocal evaluated
        lhs, rhs = _grouping_sides(rows, spec)
        bad = np.flatnonzero(rhs - lhs < threshold)
        if bad.size == 0:
            evaluated += len(rows)
            return None

        index = bad[0]
        evaluated += int(index) + 1
        verdict = InequalityVerdict.from_sides(lhs[index], rhs[index], tol.violation, spec.label)
        logger.info("Spec '%s' violated by a %s input after %d evaluations (gap=%.3e)",
                    spec.label, source, evaluated, verdict.gap)
        return FalsificationResult(
            spec_label=spec.label, evaluated=evaluated,
            vector=ProbabilityVector(components=rows[index].copy()), verdict=verdict, source=source,
        )

    found = first_violation(_corner_cases(n), "corner")
    if found:
        return found

    remaining = trials
    while remaining > 0:
        batch = min(remaining, _SCAN_CHUNK)
        found = first_violation(sample_simplex(n, batch, rng), "random")
        if found:
            return found
        remaining -= batch

    logger.info("Spec '%s' survived %d evaluations", spec.label, evaluated)
    return FalsificationResult(spec_label=spec.label, evaluated=evaluated)


def _classical_gaps(rows: np.ndarray, placement: IndexPlacement, kind: InequalityKind) -> np.ndarray:
    """Gap of the placement inequality for many vectors at once."""
    count = rows.shape[0]
    tables = np.zeros((count, placement.size))
    tables[:, placement.flat_indices] = rows
    tables = tables.reshape((count,) + placement.shape)

    def entropy(keep):
        dropped = tuple(1 + axis for axis in range(placement.arity) if axis not in keep)
        marginal = tables.sum(axis=dropped) if dropped else tables
        return row_entropies(marginal.reshape(count, -1))

    if kind is InequalityKind.SUBADDITIVITY:
        return entropy((0,)) + entropy((1,)) - entropy((0, 1))
    return entropy((0, 1)) + entropy((1, 2)) - entropy((0, 1, 2)) - entropy((1,))


def _quantum_gap(rho: DensityMatrix, placement: IndexPlacement, kind: InequalityKind) -> float:
    if kind is InequalityKind.SUBADDITIVITY:
        return subadditivity_quantum(rho, placement).gap
    return strong_subadditivity_quantum(rho, placement).verdict.gap


def _budget_permutations(n: int, budget: ScanBudget, rng: RandomSource | None):
    if budget.mode is BudgetMode.ALL:
        if factorial(n) > MAX_EXHAUSTIVE_PERMUTATIONS:
            raise BudgetTooLarge(f"{n}! permutations exceed the exhaustive limit of {MAX_EXHAUSTIVE_PERMUTATIONS}")
        return permutations(range(n))
    if budget.mode is BudgetMode.IDENTITY:
        return iter([tuple(range(n))])
    if rng is None:
        raise ValueError("A random budget needs a RandomSource")
    return (tuple(int(s) for s in rng.generator.permutation(n)) for _ in range(budget.count))


def scan_permutations(state, placement: IndexPlacement, budget: ScanBudget, rng: RandomSource | None = None, kind: InequalityKind | None = None) -> PermutationScanReport:
    """Evaluate an inequality under relabelings of the components.

    For each permutation sigma the input is checked on
    ``permuted_placement(placement, sigma)``. Exhaustive budgets iterate in
    lexicographic order; ties in the extremes resolve to the
    lexicographically smallest sigma.

    Args:
        state: ProbabilityVector or DensityMatrix of placement.n components
        placement: Base placement
        budget: Exhaustive, identity-only or random permutation budget
        rng: Random stream, required for random budgets
        kind: Inequality, defaults to the one matching the placement arity

    Returns:
        PermutationScanReport: Extremes, their permutations and all gaps

    Raises:
        BudgetTooLarge: If an exhaustive scan would exceed 10^7 permutations
    """
    kind = kind or default_kind(placement)
    _require_arity(placement, kind.arity)
    if state.dimension != placement.n:
        raise DimensionMismatch(f"Input has {state.dimension} components, placement expects {placement.n}")

    sigmas = _budget_permutations(placement.n, budget, rng)
    gap_chunks: list[np.ndarray] = []
    sigma_chunks: list[np.ndarray] = []

    while chunk := list(islice(sigmas, _SCAN_CHUNK)):
        index = np.array(chunk, dtype=np.int16)
        sigma_chunks.append(index)
        if isinstance(state, ProbabilityVector):
            # Component k sits in the base cell of sigma[k]
            rows = np.zeros(index.shape)
            np.put_along_axis(rows, index.astype(np.intp), np.broadcast_to(state.components, index.shape), axis=1)
            gap_chunks.append(_classical_gaps(rows, placement, kind))
        else:
            gap_chunks.append(np.array([
                _quantum_gap(state, permuted_placement(placement, sigma), kind) for sigma in chunk
            ]))

    if not gap_chunks:
        raise ValueError("Scan budget selected no permutations")
    gaps = np.concatenate(gap_chunks)
    seen = np.concatenate(sigma_chunks)

    def extreme(value: float) -> tuple[int, ...]:
        tied = seen[gaps == value]
        # lexsort treats its last key as primary
        first = np.lexsort(tied.T[::-1])[0]
        return tuple(int(s) for s in tied[first])

    report = PermutationScanReport(
        kind=kind, count=int(gaps.size),
        min_gap=float(gaps.min()), argmin=extreme(gaps.min()),
        max_gap=float(gaps.max()), argmax=extreme(gaps.max()),
        gaps=gaps,
    )
    logger.info("Scanned %d permutations: min gap %.3e, max gap %.3e",
                report.count, report.min_gap, report.max_gap)
    return report
