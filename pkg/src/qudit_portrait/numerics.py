from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import entr

from .config import get_tolerances
from .errors import NegativeInput, NonHermitian, NonSquare


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Real eigenvalues of a Hermitian matrix, sorted descending."""
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.values)

    def clamped(self, clip: float | None = None) -> np.ndarray:
        """Return the eigenvalues with rounding noise below zero removed.

        Args:
            clip: Values in [-clip, 0) are set to exactly 0

        Returns:
            np.ndarray: Nonnegative eigenvalues, same order

        Raises:
            NegativeInput: If an eigenvalue lies below -clip
        """
        if clip is None:
            clip = get_tolerances().eigenvalue_clamp
        return _clamp(self.values, clip)

    def rank(self, threshold: float = 1e-10) -> int:
        """Count eigenvalues strictly above ``threshold``."""
        return int(np.count_nonzero(self.values > threshold))


def _clamp(values: np.ndarray, clip: float) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.size and values.min() < -clip:
        raise NegativeInput(
            f"Value {values.min():.3e} is negative beyond clamp tolerance {clip:.1e}"
        )
    return np.where(values < 0.0, 0.0, values)


def hermitian_spectrum(H, tol: float | None = None) -> Spectrum:
    """Eigenvalues of a Hermitian matrix.

    Args:
        H: Complex square matrix
        tol: Allowed entrywise asymmetry |H - H^dagger|

    Returns:
        Spectrum: Eigenvalues sorted descending

    Raises:
        NonSquare: If H is not a square 2D array
        NonHermitian: If H deviates from its adjoint by more than tol
    """
    if tol is None:
        tol = get_tolerances().hermitian

    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise NonSquare(f"Expected a square matrix, got shape {H.shape}")

    asymmetry = np.max(np.abs(H - H.conj().T)) if H.size else 0.0
    if asymmetry > tol:
        raise NonHermitian(f"Matrix asymmetry {asymmetry:.3e} exceeds {tol:.1e}")

    # Symmetrize so the solver only sees the Hermitian part
    values = scipy.linalg.eigh((H + H.conj().T) / 2, eigvals_only=True)
    return Spectrum(values=np.sort(values)[::-1])


def entropy_kernel(values, clip: float | None = None) -> float:
    """Compute -sum x ln x in nats with the 0 ln 0 = 0 convention.

    Args:
        values: Nonnegative reals (eigenvalues or probabilities)
        clip: Values in [-clip, 0) are treated as 0

    Returns:
        float: The entropy, never negative

    Raises:
        NegativeInput: If a value lies below -clip
    """
    if clip is None:
        clip = get_tolerances().eigenvalue_clamp
    return float(np.sum(entr(_clamp(values, clip))))


def row_entropies(rows: np.ndarray) -> np.ndarray:
    """Entropy of every row of a nonnegative 2D array."""
    return np.sum(entr(np.clip(rows, 0.0, None)), axis=-1)
