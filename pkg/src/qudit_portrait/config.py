from contextlib import contextmanager
from dataclasses import dataclass, fields, replace
from typing import Iterator


@dataclass(frozen=True)
class Tolerances:
    """Numeric tolerances shared by every check in the package."""
    hermitian: float = 1e-10  # max |H - H^dagger| entrywise
    trace: float = 1e-9  # |Tr rho - 1|
    normalization: float = 1e-9  # |sum p - 1|
    probability_clamp: float = 1e-12  # p in [-clamp, 0) is set to 0
    eigenvalue_clamp: float = 1e-10  # lambda in [-clamp, 0) is set to 0
    classical_verdict: float = 1e-12  # Shannon-entropy verdicts
    quantum_verdict: float = 1e-9  # von Neumann verdicts
    violation: float = 1e-6  # gap threshold used by the falsifier


_active = Tolerances()


def get_tolerances() -> Tolerances:
    """Return the active tolerance record."""
    return _active


@contextmanager
def override_tolerances(**changes: float) -> Iterator[Tolerances]:
    """Temporarily replace fields of the global tolerance record.

    Args:
        **changes: Field names of ``Tolerances`` mapped to new values

    Yields:
        Tolerances: The record in force inside the block

    Raises:
        ValueError: If a field name is unknown
    """
    global _active
    known = {f.name for f in fields(Tolerances)}
    unknown = set(changes) - known
    if unknown:
        raise ValueError(f"Unknown tolerance fields: {sorted(unknown)}")

    previous = _active
    _active = replace(previous, **changes)
    try:
        yield _active
    finally:
        _active = previous
