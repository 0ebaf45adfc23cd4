"""Command-line front end.

Every subcommand writes one JSON report to standard output (or ``--output``).
Exit codes: 0 when the run completed and every check held, 1 when ``check``
found a violated inequality, 2 on any usage or input error.
"""
import argparse
import json
import logging
import sys
import time
from contextlib import nullcontext
from dataclasses import dataclass, field
from pathlib import Path

from .config import override_tolerances
from .errors import PortraitError, SpecFormatError
from .inequalities import (
    InequalityKind, ScanBudget, default_kind, derive_grouping,
    evaluate_grouping, falsify, scan_permutations, strong_subadditivity_classical,
    strong_subadditivity_quantum, subadditivity_classical, subadditivity_quantum,
)
from .placements import IndexPlacement, lex_placement
from .serialization import (
    canonical_dumps, density_document, digest, grouping_to_json, load_grouping,
    load_json, parse_state, placement_from_json, placement_to_json,
    vector_document, write_json,
)
from .states import (
    DensityMatrix, ProbabilityVector, RandomSource, diagonal_density,
    sample_density_matrix, sample_probability_vector,
)
from .tomography import PresetVariant, compute_tomogram, preset_grouping

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_ERROR = 2

TOMOGRAM_SPECS = {
    "sa-derived": (InequalityKind.SUBADDITIVITY, PresetVariant.DERIVED),
    "sa-printed": (InequalityKind.SUBADDITIVITY, PresetVariant.PRINTED),
    "ssa-derived": (InequalityKind.STRONG_SUBADDITIVITY, PresetVariant.DERIVED),
    "ssa-printed": (InequalityKind.STRONG_SUBADDITIVITY, PresetVariant.PRINTED),
}


@dataclass
class RunReport:
    """Machine-readable record of one CLI run."""
    command: str
    arguments: dict
    seed: int | None = None
    input_digests: dict[str, str] = field(default_factory=dict)
    verdicts: list[dict] = field(default_factory=list)
    results: dict = field(default_factory=dict)
    elapsed: float = 0.0

    def _reproducible_part(self) -> dict:
        return {
            "command": self.command,
            "arguments": self.arguments,
            "seed": self.seed,
            "input_digests": self.input_digests,
            "verdicts": self.verdicts,
            "results": self.results,
        }

    @property
    def digest(self) -> str:
        """SHA-256 over everything except timing."""
        return digest(self._reproducible_part())

    def to_dict(self) -> dict:
        return {**self._reproducible_part(), "digest": self.digest, "elapsed": self.elapsed}

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        return cls(
            command=data["command"],
            arguments=data["arguments"],
            seed=data.get("seed"),
            input_digests=data.get("input_digests", {}),
            verdicts=data.get("verdicts", []),
            results=data.get("results", {}),
            elapsed=data.get("elapsed", 0.0),
        )


def parse_shape(text: str) -> tuple[int, ...]:
    """Parse a shape string such as ``2x2x2`` or ``3x2``.

    Raises:
        SpecFormatError: If the text is not positive integers joined by 'x'
    """
    try:
        shape = tuple(int(part) for part in text.lower().split("x"))
    except ValueError as exc:
        raise SpecFormatError(f"Invalid shape '{text}', expected e.g. 2x2x2") from exc
    if not shape or any(n < 1 for n in shape):
        raise SpecFormatError(f"Invalid shape '{text}', dimensions must be positive")
    return shape


def _read_state(path: str, report: RunReport) -> ProbabilityVector | DensityMatrix:
    doc = load_json(path)
    report.input_digests[str(path)] = digest(doc)
    return parse_state(doc)


def _resolve_placement(args, n: int, report: RunReport) -> IndexPlacement:
    if args.placement:
        doc = load_json(args.placement)
        report.input_digests[str(args.placement)] = digest(doc)
        return placement_from_json(doc, n=n)
    if args.shape:
        return lex_placement(n, parse_shape(args.shape))
    raise SpecFormatError("Either --shape or --placement is required")


def _as_density(state) -> DensityMatrix:
    return state if isinstance(state, DensityMatrix) else diagonal_density(state)


def _as_vector(state) -> ProbabilityVector:
    if isinstance(state, ProbabilityVector):
        return state
    raise SpecFormatError("Classical checks need a probability vector input")


def cmd_check(args) -> tuple[RunReport, int]:
    """Check the placement inequality on one input."""
    report = RunReport(command="check", arguments={
        "mode": args.mode, "shape": args.shape, "theta": args.theta, "phi": args.phi,
    })
    state = _read_state(args.input, report)

    if args.mode == "tomogram":
        tomogram = compute_tomogram(_as_density(state), args.theta, args.phi)
        report.results["tomogram"] = tomogram.to_dict()
        state = tomogram.w

    placement = _resolve_placement(args, state.dimension, report)
    kind = default_kind(placement)
    report.results["placement"] = placement_to_json(placement)
    report.results["grouping"] = grouping_to_json(derive_grouping(placement, kind))

    if args.mode == "quantum":
        check = subadditivity_quantum if kind is InequalityKind.SUBADDITIVITY else strong_subadditivity_quantum
        outcome = check(_as_density(state), placement)
        verdict = outcome if kind is InequalityKind.SUBADDITIVITY else outcome.verdict
    else:
        check = subadditivity_classical if kind is InequalityKind.SUBADDITIVITY else strong_subadditivity_classical
        verdict = check(_as_vector(state), placement)

    report.verdicts.append(verdict.to_dict())
    return report, EXIT_OK if verdict.holds else EXIT_VIOLATED


def cmd_scan(args) -> tuple[RunReport, int]:
    """Scan the placement inequality over relabelings of the input."""
    budget = ScanBudget.parse(args.budget)
    report = RunReport(command="scan", arguments={"shape": args.shape, "budget": budget.describe()}, seed=args.seed)
    state = _read_state(args.input, report)
    placement = _resolve_placement(args, state.dimension, report)

    scan = scan_permutations(state, placement, budget, rng=RandomSource(args.seed))
    report.results["placement"] = placement_to_json(placement)
    report.results["scan"] = scan.to_dict()
    return report, EXIT_OK


def cmd_falsify(args) -> tuple[RunReport, int]:
    """Search for a violation of a grouping spec; finding one is not an error."""
    spec = load_grouping(args.spec)
    report = RunReport(
        command="falsify", arguments={"spec": args.spec, "n": args.n, "trials": args.trials}, seed=args.seed,
    )
    report.input_digests[args.spec] = digest(grouping_to_json(spec))

    result = falsify(spec, args.trials, RandomSource(args.seed), n=args.n)
    report.results["grouping"] = grouping_to_json(spec)
    report.results["falsification"] = result.to_dict()
    report.results["outcome"] = "violated" if result.violated else "none"
    if result.violated:
        report.verdicts.append(result.verdict.to_dict())
    return report, EXIT_OK


def cmd_tomogram(args) -> tuple[RunReport, int]:
    """Compute a tomogram and optionally evaluate a preset inequality on it."""
    report = RunReport(command="tomogram", arguments={"theta": args.theta, "phi": args.phi, "spec": args.spec})
    rho = _as_density(_read_state(args.input, report))
    tomogram = compute_tomogram(rho, args.theta, args.phi)
    report.results["tomogram"] = tomogram.to_dict()

    if args.spec:
        kind, variant = TOMOGRAM_SPECS[args.spec]
        spec = preset_grouping(tomogram.j, kind, variant)
        report.results["grouping"] = grouping_to_json(spec)
        report.verdicts.append(evaluate_grouping(tomogram.w, spec).to_dict())
    return report, EXIT_OK


def cmd_sample(args) -> tuple[RunReport, int]:
    """Write seeded random states as JSON files."""
    rank = args.rank or args.n
    report = RunReport(command="sample", arguments={
        "kind": args.kind, "n": args.n, "rank": rank, "count": args.count,
    }, seed=args.seed)
    rng = RandomSource(args.seed)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = {}
    for index in range(args.count):
        if args.kind == "vector":
            doc = vector_document(sample_probability_vector(args.n, rng))
        else:
            doc = density_document(sample_density_matrix(args.n, rank, rng))
        path = out / f"{args.kind}_{index:03d}.json"
        write_json(path, doc)
        files[path.name] = digest(doc)
        logger.info("Wrote %s", path)

    report.results["files"] = files
    return report, EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "scan": cmd_scan,
    "falsify": cmd_falsify,
    "tomogram": cmd_tomogram,
    "sample": cmd_sample,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tolerance", type=float, help="verdict tolerance for this run")
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")

    parser = argparse.ArgumentParser(
        prog="qudit-portrait",
        description="Entropic inequalities for single qudits via index placements.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def add_lattice_flags(sub):
        group = sub.add_mutually_exclusive_group()
        group.add_argument("--shape", help="lexicographic placement, e.g. 2x2x2")
        group.add_argument("--placement", help="placement JSON file")

    check = commands.add_parser("check", parents=[common], help="check one inequality")
    check.add_argument("--mode", choices=["classical", "quantum", "tomogram"], default="classical")
    check.add_argument("--input", required=True, help="state JSON file")
    check.add_argument("--theta", type=float, default=0.0)
    check.add_argument("--phi", type=float, default=0.0)
    add_lattice_flags(check)

    scan = commands.add_parser("scan", parents=[common], help="scan over component permutations")
    scan.add_argument("--input", required=True, help="state JSON file")
    scan.add_argument("--budget", default="all", help="all, identity or random:K")
    add_lattice_flags(scan)

    audit = commands.add_parser("falsify", parents=[common], help="search for a violation of a grouping spec")
    audit.add_argument("--spec", required=True, help="spec JSON file or bundled name, e.g. eq12")
    audit.add_argument("--n", type=int, help="vector dimension (default: the spec's)")
    audit.add_argument("--trials", type=int, default=10_000)

    tomogram = commands.add_parser("tomogram", parents=[common], help="spin tomogram of a density matrix")
    tomogram.add_argument("--input", required=True, help="density matrix JSON file")
    tomogram.add_argument("--theta", type=float, default=0.0)
    tomogram.add_argument("--phi", type=float, default=0.0)
    tomogram.add_argument("--spec", choices=sorted(TOMOGRAM_SPECS))

    sample = commands.add_parser("sample", parents=[common], help="write random states")
    sample.add_argument("--kind", choices=["vector", "density"], required=True)
    sample.add_argument("--n", type=int, required=True)
    sample.add_argument("--rank", type=int, help="Ginibre rank (default n)")
    sample.add_argument("--count", type=int, default=1)
    sample.add_argument("--out", required=True, help="output directory")

    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)

    tolerance = nullcontext()
    if args.tolerance is not None:
        tolerance = override_tolerances(classical_verdict=args.tolerance, quantum_verdict=args.tolerance)

    started = time.perf_counter()
    try:
        with tolerance:
            report, code = COMMANDS[args.command](args)
        report.elapsed = time.perf_counter() - started

        text = canonical_dumps(report.to_dict())
        if args.output:
            Path(args.output).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    except (PortraitError, json.JSONDecodeError, OSError, TypeError, ValueError) as exc:
        print(f"qudit-portrait {args.command}: {exc}", file=sys.stderr)
        return EXIT_ERROR

    logger.info("%s finished with exit code %d", args.command, code)
    return code


if __name__ == "__main__":
    sys.exit(main())
