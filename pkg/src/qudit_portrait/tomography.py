"""Spin tomograms and the tomogram-level inequality presets.

A spin-j tomogram w(m, n) is the distribution of the spin projection m along
the direction n = (sin θ cos φ, sin θ sin φ, cos θ). It is read off the
diagonal of the rotated density matrix, so every entropic inequality that
holds for probability vectors holds for tomograms at every direction.

Levels are ordered by ascending m, so w(m) sits at 0-based index m + j.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy.special import factorial

from .config import get_tolerances
from .errors import BadDimension, BadSpin, UnsupportedPreset, UnsupportedSpin
from .inequalities import GroupingSpec, InequalityKind, derive_grouping
from .placements import (
    IndexPlacement, bipartition_placement, lex_placement, placement_from_cells,
)
from .serialization import bundled_spec
from .states import DensityMatrix, ProbabilityVector, validate_probability_vector

logger = logging.getLogger(__name__)

MAX_SPIN_DIMENSION = 16

# Factorials up to (MAX_SPIN_DIMENSION - 1)!
_FACTORIALS = factorial(np.arange(MAX_SPIN_DIMENSION), exact=False)


class PresetVariant(Enum):
    """Source of a tomogram inequality preset."""
    DERIVED = "derived"
    PRINTED = "printed"


@dataclass(frozen=True)
class EulerAngles:
    """Rotation angles in the z-y-z convention, radians."""
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if not all(np.isfinite([self.alpha, self.beta, self.gamma])):
            raise ValueError(f"Euler angles must be finite, got {self}")


@dataclass(frozen=True, eq=False)
class Tomogram:
    """Spin-projection distribution along the direction (theta, phi)."""
    j: float
    theta: float
    phi: float
    w: ProbabilityVector

    @property
    def projections(self) -> np.ndarray:
        """The m values, ascending."""
        return np.arange(self.w.dimension) - self.j

    def to_dict(self) -> dict:
        return {
            "kind": "tomogram",
            "j": self.j,
            "theta": self.theta,
            "phi": self.phi,
            "w": [float(x) for x in self.w.components],
        }


def _twice_spin(j) -> int:
    twice = 2 * float(j)
    if twice < 0 or not float(twice).is_integer():
        raise BadSpin(f"Spin must be a nonnegative half-integer, got {j}")
    if int(twice) + 1 > MAX_SPIN_DIMENSION:
        raise BadSpin(f"Spin {j} exceeds the supported dimension {MAX_SPIN_DIMENSION}")
    return int(twice)


def spin_for_dimension(n: int) -> float:
    """The spin j with 2j + 1 = n.

    Raises:
        BadDimension: If n is not a positive dimension within range
    """
    if not 1 <= n <= MAX_SPIN_DIMENSION:
        raise BadDimension(f"Dimension {n} is not 2j + 1 for a supported spin")
    return (n - 1) / 2


def wigner_small_d(j, beta: float) -> np.ndarray:
    """Wigner small-d matrix d^j(beta), rows m', columns m, both ascending.

    Uses the finite factorial sum with all factorials taken from a
    precomputed table. Entry [m' + j, m + j] equals <j m'| exp(-i beta J_y) |j m>.

    Args:
        j: Spin, a nonnegative integer or half-integer
        beta: Polar rotation angle in radians

    Returns:
        np.ndarray: Real orthogonal (2j+1) x (2j+1) matrix

    Raises:
        BadSpin: If 2j is not a nonnegative integer or 2j + 1 > 16
    """
    return _small_d(_twice_spin(j), float(beta)).copy()


@lru_cache(maxsize=4096)
def _small_d(twice: int, beta: float) -> np.ndarray:
    size = twice + 1
    cos_half, sin_half = np.cos(beta / 2), np.sin(beta / 2)
    fact = _FACTORIALS

    d = np.zeros((size, size))
    # With a = j + m' and b = j + m every factorial argument is an integer
    for a in range(size):
        for b in range(size):
            s = np.arange(max(0, b - a), min(b, twice - a) + 1)
            if s.size == 0:
                continue
            prefactor = np.sqrt(fact[a] * fact[twice - a] * fact[b] * fact[twice - b])
            denom = fact[b - s] * fact[a - b + s] * fact[twice - a - s] * fact[s]
            terms = (
                (-1.0) ** (a - b + s) * prefactor / denom
                * cos_half ** (twice + b - a - 2 * s)
                * sin_half ** (a - b + 2 * s)
            )
            d[a, b] = terms.sum()
    d.setflags(write=False)
    return d


def rotation_unitary(j, angles: EulerAngles) -> np.ndarray:
    """Irreducible representation D(alpha, beta, gamma) of a rotation.

    D = exp(-i alpha J_z) d(beta) exp(-i gamma J_z) with J_z = diag(m).

    Raises:
        BadSpin: As for ``wigner_small_d``
    """
    d = wigner_small_d(j, angles.beta)
    m = np.arange(d.shape[0]) - float(j)
    return (
        np.exp(-1j * angles.alpha * m)[:, np.newaxis]
        * d
        * np.exp(-1j * angles.gamma * m)[np.newaxis, :]
    )


def _tomogram_values(matrix: np.ndarray, j: float, theta: float, phi: float) -> np.ndarray:
    # w(m) = <m| D^dagger rho D |m> = sum_{k,l} conj(D[k, m]) rho[k, l] D[l, m]
    rotation = rotation_unitary(j, EulerAngles(alpha=phi, beta=theta))
    return np.einsum("km,kl,lm->m", rotation.conj(), matrix, rotation).real


def compute_tomogram(rho: DensityMatrix, theta: float, phi: float) -> Tomogram:
    """Spin tomogram of a qudit along (theta, phi).

    The rotation is u = D(phi, theta, 0)^dagger, so theta = 0 returns the
    diagonal of rho for every phi.

    Args:
        rho: Density matrix of dimension 2j + 1
        theta: Polar angle of the quantization axis
        phi: Azimuthal angle of the quantization axis

    Returns:
        Tomogram: Validated distribution over m = -j..j

    Raises:
        BadDimension: If rho's dimension is not 2j + 1 for a supported spin
    """
    j = spin_for_dimension(rho.dimension)
    w = _tomogram_values(rho.matrix, j, theta, phi)
    # Validated states may carry eigenvalues down to -eigenvalue_clamp
    w = np.where(w >= -get_tolerances().eigenvalue_clamp, np.maximum(w, 0.0), w)
    w = validate_probability_vector(w)
    logger.debug("Tomogram j=%s at theta=%.4f phi=%.4f", j, theta, phi)
    return Tomogram(j=j, theta=float(theta), phi=float(phi), w=w)


def tomogram_grid(rho: DensityMatrix, thetas, phis) -> np.ndarray:
    """Tomograms over a (theta, phi) grid.

    Returns:
        np.ndarray: Shape (len(thetas), len(phis), 2j + 1); row [i, k] is the
        tomogram at (thetas[i], phis[k])
    """
    j = spin_for_dimension(rho.dimension)
    thetas, phis = np.asarray(thetas, dtype=float), np.asarray(phis, dtype=float)
    rotations = np.array([
        [rotation_unitary(j, EulerAngles(alpha=phi, beta=theta)) for phi in phis]
        for theta in thetas
    ]).reshape(thetas.size, phis.size, rho.dimension, rho.dimension)
    return np.einsum("tpkm,kl,tplm->tpm", rotations.conj(), rho.matrix, rotations).real


_PRINTED_PRESETS = {
    (2.0, InequalityKind.SUBADDITIVITY): "appendix_j2",
    (3.0, InequalityKind.SUBADDITIVITY): "sub1_printed",
    (3.0, InequalityKind.STRONG_SUBADDITIVITY): "appendix_j3",
}


def _check_preset_spin(j) -> float:
    if float(j) not in (2.0, 3.0):
        raise UnsupportedSpin(f"Tomogram presets exist for j = 2 and j = 3, got j = {j}")
    return float(j)


def preset_placement(j, kind: InequalityKind) -> IndexPlacement:
    """The placement behind a derived tomogram preset.

    j = 3 uses the lexicographic 2x2x2 placement of seven levels, and its
    (2)|(1,3) bipartition for subadditivity. j = 2 uses the 2x3 placement
    with the hole in the middle of the second row for subadditivity and the
    lexicographic 2x2x2 placement of five levels for strong subadditivity.

    Raises:
        UnsupportedSpin: If j is not 2 or 3
    """
    j = _check_preset_spin(j)
    if j == 3.0:
        lattice = lex_placement(7, (2, 2, 2))
        if kind is InequalityKind.STRONG_SUBADDITIVITY:
            return lattice
        return bipartition_placement(lattice, (1,), (0, 2))

    if kind is InequalityKind.STRONG_SUBADDITIVITY:
        return lex_placement(5, (2, 2, 2))
    return placement_from_cells((2, 3), [(0, 0), (0, 1), (0, 2), (1, 0), (1, 2)])


def preset_grouping(j, kind: InequalityKind, variant: PresetVariant = PresetVariant.DERIVED) -> GroupingSpec:
    """Tomogram inequality over indices m = -j..j as a grouping spec.

    Args:
        j: Spin, 2 or 3
        kind: Subadditivity or strong subadditivity
        variant: Derived from a placement, or the printed transcription

    Returns:
        GroupingSpec: Printed variants carry ``audit_only=True``

    Raises:
        UnsupportedSpin: If j is not 2 or 3
        UnsupportedPreset: If no printed formula exists for (j, kind)
    """
    j = _check_preset_spin(j)
    if variant is PresetVariant.PRINTED:
        name = _PRINTED_PRESETS.get((j, kind))
        if name is None:
            raise UnsupportedPreset(f"No printed {kind.value} formula exists for j = {j:g}")
        return bundled_spec(name)

    return derive_grouping(
        preset_placement(j, kind), kind, label=f"j={j:g} tomogram {kind.value} (derived)"
    )
