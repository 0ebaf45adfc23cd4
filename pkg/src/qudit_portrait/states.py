from dataclasses import dataclass, field
from math import prod

import numpy as np

from .config import get_tolerances
from .errors import (
    BadRank, DimensionMismatch, NegativeEntry, NonHermitian, NonSquare,
    NotNormalized, NotPositive, TraceNotOne, ZeroVector,
)
from .numerics import entropy_kernel, hermitian_spectrum


@dataclass(frozen=True, eq=False)
class ProbabilityVector:
    """A nonnegative N-vector summing to one (classical state or tomogram)."""
    components: np.ndarray

    @property
    def dimension(self) -> int:
        return len(self.components)

    def __len__(self) -> int:
        return len(self.components)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A Hermitian, positive semidefinite, unit-trace complex matrix.

    ``dims`` records the lattice axes the levels are laid out on (big-endian,
    row-major). A plain single-qudit state has ``dims == (N,)``.
    """
    matrix: np.ndarray
    dims: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not self.dims:
            object.__setattr__(self, "dims", (self.matrix.shape[0],))
        if prod(self.dims) != self.matrix.shape[0]:
            raise DimensionMismatch(
                f"Axis dimensions {self.dims} do not multiply to {self.matrix.shape[0]}"
            )

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def arity(self) -> int:
        return len(self.dims)

    def with_dims(self, dims) -> "DensityMatrix":
        """Return the same matrix viewed on a different axis layout."""
        return DensityMatrix(matrix=self.matrix, dims=tuple(int(d) for d in dims))


class RandomSource:
    """Seeded random stream; equal (seed, stream) pairs give equal draws."""

    def __init__(self, seed: int, stream: int = 0):
        """Initialize the stream.

        Args:
            seed: Nonnegative integer seed (64-bit range)
            stream: Independent stream id for parallel users
        """
        if seed < 0 or stream < 0:
            raise ValueError("Seed and stream id must be nonnegative")
        self.seed = int(seed)
        self.stream = int(stream)
        self.generator = np.random.default_rng(
            np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        )

    def spawn(self, stream: int) -> "RandomSource":
        """Derive an independent stream from the same seed."""
        return RandomSource(self.seed, stream)

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed}, stream={self.stream})"


def validate_probability_vector(raw, tol=None) -> ProbabilityVector:
    """Validate raw numbers as a probability vector.

    Entries in [-clamp, 0) are clamped to zero; nothing is renormalized.

    Args:
        raw: Sequence of reals
        tol: Tolerance record, defaults to the global one

    Returns:
        ProbabilityVector: The validated vector

    Raises:
        NegativeEntry: If an entry is below -clamp
        NotNormalized: If the input is empty, non-finite, or does not sum to 1
    """
    tol = tol or get_tolerances()
    values = np.asarray(raw, dtype=float).reshape(-1)

    if values.size == 0:
        raise NotNormalized("Probability vector is empty")
    if not np.all(np.isfinite(values)):
        raise NotNormalized("Probability vector has non-finite entries")

    lowest = values.min()
    if lowest < -tol.probability_clamp:
        raise NegativeEntry(f"Entry {lowest!r} is negative")
    values = np.where(values < 0.0, 0.0, values)

    total = values.sum()
    if abs(total - 1.0) > tol.normalization:
        raise NotNormalized(f"Entries sum to {total!r}, expected 1")

    return ProbabilityVector(components=values)


def validate_density_matrix(raw, tol=None, dims=None) -> DensityMatrix:
    """Validate a raw complex matrix as a density matrix.

    Args:
        raw: Square complex matrix
        tol: Tolerance record, defaults to the global one
        dims: Optional axis layout of the levels

    Returns:
        DensityMatrix: The validated (exactly Hermitian) matrix

    Raises:
        NonSquare: If the input is not square
        NonHermitian: If the input is not Hermitian within tolerance
        TraceNotOne: If the trace differs from 1
        NotPositive: If an eigenvalue lies below -eigenvalue_clamp
    """
    tol = tol or get_tolerances()
    matrix = np.asarray(raw, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.size == 0:
        raise NonSquare(f"Expected a nonempty square matrix, got shape {matrix.shape}")

    asymmetry = np.max(np.abs(matrix - matrix.conj().T))
    if asymmetry > tol.hermitian:
        raise NonHermitian(f"Matrix asymmetry {asymmetry:.3e} exceeds {tol.hermitian:.1e}")
    matrix = (matrix + matrix.conj().T) / 2

    trace = np.trace(matrix).real
    if abs(trace - 1.0) > tol.trace:
        raise TraceNotOne(f"Trace is {trace!r}, expected 1")

    lowest = hermitian_spectrum(matrix, tol.hermitian).values[-1]
    if lowest < -tol.eigenvalue_clamp:
        raise NotPositive(f"Minimum eigenvalue {lowest:.3e} is negative")

    return DensityMatrix(matrix=matrix, dims=tuple(dims) if dims else ())


def shannon_entropy(p: ProbabilityVector) -> float:
    """Shannon entropy -sum p ln p of a probability vector, in nats."""
    return entropy_kernel(p.components, clip=get_tolerances().probability_clamp)


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """Von Neumann entropy -Tr rho ln rho, in nats."""
    return entropy_kernel(hermitian_spectrum(rho.matrix).values)


def sample_probability_vector(n: int, rng: RandomSource) -> ProbabilityVector:
    """Draw a vector uniformly from the (n-1)-simplex.

    Args:
        n: Dimension, at least 1
        rng: Random stream

    Returns:
        ProbabilityVector: Normalized exponential draws (flat Dirichlet)
    """
    return ProbabilityVector(components=sample_simplex(n, 1, rng)[0])


def sample_simplex(n: int, count: int, rng: RandomSource) -> np.ndarray:
    """Draw ``count`` simplex-uniform rows of length ``n`` at once."""
    if n < 1:
        raise DimensionMismatch(f"Dimension must be at least 1, got {n}")
    draws = rng.generator.standard_exponential((count, n))
    return draws / draws.sum(axis=1, keepdims=True)


def sample_density_matrix(n: int, rank: int, rng: RandomSource) -> DensityMatrix:
    """Draw a random density matrix from the Ginibre ensemble.

    Args:
        n: Dimension
        rank: Number of Gaussian columns, 1 <= rank <= n
        rng: Random stream

    Returns:
        DensityMatrix: G G^dagger / Tr(G G^dagger)

    Raises:
        BadRank: If rank is outside [1, n]
    """
    if not 1 <= rank <= n:
        raise BadRank(f"Rank {rank} is outside [1, {n}]")

    g = rng.generator.standard_normal((n, rank)) + 1j * rng.generator.standard_normal((n, rank))
    matrix = g @ g.conj().T
    matrix = (matrix + matrix.conj().T) / 2
    return DensityMatrix(matrix=matrix / np.trace(matrix).real)


def pure_state_density(amplitudes, dims=None) -> DensityMatrix:
    """Projector onto a state vector.

    Args:
        amplitudes: Complex N-vector, not necessarily normalized
        dims: Optional axis layout, e.g. (2, 2) for two qubits

    Returns:
        DensityMatrix: v v^dagger / |v|^2

    Raises:
        ZeroVector: If the vector has zero norm
    """
    v = np.asarray(amplitudes, dtype=complex).reshape(-1)
    norm_sq = np.vdot(v, v).real
    if norm_sq == 0.0:
        raise ZeroVector("Cannot build a state from the zero vector")
    return DensityMatrix(matrix=np.outer(v, v.conj()) / norm_sq, dims=tuple(dims) if dims else ())


def diagonal_density(p: ProbabilityVector) -> DensityMatrix:
    """The classical (diagonal) density matrix of a probability vector."""
    return DensityMatrix(matrix=np.diag(p.components).astype(complex))
