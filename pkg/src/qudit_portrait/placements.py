"""Index placements of an N-level object into a padded lattice.

A placement writes the components p_1..p_N (or the levels of a density matrix)
into the cells of an n1 x n2 (x n3) lattice. Cells that receive no component
hold exact zeros. Marginals and partial traces of the padded object are then
ordinary subsystem quantities, which is how entropic inequalities of composite
systems transfer to a single qudit.

All axes, cells and component indices are 0-based here; JSON documents use
1-based numbering.
"""
from dataclasses import dataclass
from math import prod
from string import ascii_lowercase

import numpy as np

from .errors import (
    BadAxes, DimensionMismatch, NotAPermutation, PortraitTooLarge,
    ShapeMismatch, ShapeTooSmall,
)
from .states import DensityMatrix, ProbabilityVector

MAX_AXES = 3
MAX_PORTRAIT_CELLS = 16


@dataclass(frozen=True)
class IndexPlacement:
    """Injective assignment of component k to a lattice cell."""
    shape: tuple[int, ...]
    cells: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not 1 <= len(self.shape) <= MAX_AXES:
            raise BadAxes(f"Placements have 1 to {MAX_AXES} axes, got shape {self.shape}")
        if any(n < 1 for n in self.shape):
            raise BadAxes(f"Lattice dimensions must be positive, got {self.shape}")
        if len(self.cells) > self.size:
            raise ShapeTooSmall(f"{len(self.cells)} components do not fit into shape {self.shape}")

        for cell in self.cells:
            if len(cell) != len(self.shape) or any(
                not 0 <= c < n for c, n in zip(cell, self.shape)
            ):
                raise ShapeMismatch(f"Cell {cell} lies outside shape {self.shape}")
        if len(set(self.cells)) != len(self.cells):
            raise ShapeMismatch("Placement assigns two components to the same cell")

    @property
    def n(self) -> int:
        """Number of placed components."""
        return len(self.cells)

    @property
    def arity(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        """Number of lattice cells, assigned or not."""
        return prod(self.shape)

    @property
    def flat_indices(self) -> np.ndarray:
        """Row-major lattice index of every component."""
        if not self.cells:
            return np.zeros(0, dtype=int)
        return np.ravel_multi_index(tuple(np.array(self.cells).T), self.shape)

    @property
    def is_bijective(self) -> bool:
        return self.n == self.size


@dataclass(frozen=True, eq=False)
class JointTable:
    """Lattice of probabilities obtained by embedding a vector."""
    values: np.ndarray
    placement: IndexPlacement


@dataclass(frozen=True, eq=False)
class PortraitMatrix:
    """0/1 matrix acting on row-major vectorized density matrices."""
    entries: np.ndarray
    in_shape: tuple[int, ...]
    keep: tuple[int, ...]

    @property
    def out_dims(self) -> tuple[int, ...]:
        return tuple(self.in_shape[axis] for axis in self.keep)


def placement_from_cells(shape, cells) -> IndexPlacement:
    """Build a placement from explicit 0-based cells."""
    return IndexPlacement(
        shape=tuple(int(n) for n in shape),
        cells=tuple(tuple(int(c) for c in cell) for cell in cells),
    )


def lex_placement(n: int, shape) -> IndexPlacement:
    """Place components in big-endian mixed-radix order.

    Component k goes to the cell whose digits spell k in radix ``shape``, so
    for shape (2, 2, 2) component 4 (p_5) lands in cell (1, 0, 0).

    Args:
        n: Number of components
        shape: Lattice dimensions

    Returns:
        IndexPlacement: The lexicographic placement

    Raises:
        ShapeTooSmall: If n exceeds the number of cells
    """
    shape = tuple(int(d) for d in shape)
    if n > prod(shape):
        raise ShapeTooSmall(f"{n} components do not fit into shape {shape}")
    digits = np.unravel_index(np.arange(n), shape)
    return placement_from_cells(shape, zip(*digits))


def permuted_placement(base: IndexPlacement, sigma) -> IndexPlacement:
    """Move component k into the cell ``base`` gives to component sigma[k].

    Raises:
        NotAPermutation: If sigma is not a bijection on range(base.n)
    """
    sigma = tuple(int(s) for s in sigma)
    if sorted(sigma) != list(range(base.n)):
        raise NotAPermutation(f"{sigma} is not a permutation of {base.n} components")
    return IndexPlacement(shape=base.shape, cells=tuple(base.cells[s] for s in sigma))


def bipartition_placement(placement: IndexPlacement, group_a, group_b) -> IndexPlacement:
    """Merge the axes of a placement into two axes.

    Axes in ``group_a`` become the first axis and axes in ``group_b`` the
    second, each flattened row-major in the order given.

    Raises:
        BadAxes: If the groups do not partition the axes
    """
    group_a, group_b = tuple(group_a), tuple(group_b)
    if not group_a or not group_b or sorted(group_a + group_b) != list(range(placement.arity)):
        raise BadAxes(f"{group_a} | {group_b} does not partition {placement.arity} axes")

    dims_a = tuple(placement.shape[a] for a in group_a)
    dims_b = tuple(placement.shape[b] for b in group_b)
    cells = [
        (
            np.ravel_multi_index(tuple(cell[a] for a in group_a), dims_a),
            np.ravel_multi_index(tuple(cell[b] for b in group_b), dims_b),
        )
        for cell in placement.cells
    ]
    return placement_from_cells((prod(dims_a), prod(dims_b)), cells)


def _normalize_axes(keep, arity: int, proper: bool) -> tuple[int, ...]:
    keep = tuple(sorted(int(axis) for axis in keep))
    if not keep or len(set(keep)) != len(keep) or keep[0] < 0 or keep[-1] >= arity:
        raise BadAxes(f"Invalid axes {keep} for a {arity}-axis lattice")
    if proper and len(keep) == arity:
        raise BadAxes(f"Axes {keep} must be a proper subset of {arity} axes")
    return keep


def embed_vector(p: ProbabilityVector, placement: IndexPlacement) -> JointTable:
    """Write a probability vector into the lattice; empty cells hold 0.

    Raises:
        DimensionMismatch: If p does not have placement.n components
    """
    if p.dimension != placement.n:
        raise DimensionMismatch(
            f"Vector has {p.dimension} components, placement expects {placement.n}"
        )
    values = np.zeros(placement.size)
    values[placement.flat_indices] = p.components
    return JointTable(values=values.reshape(placement.shape), placement=placement)


def marginal_table(table: JointTable, keep) -> ProbabilityVector:
    """Sum the joint table over every axis not in ``keep``.

    Args:
        table: Embedded joint table
        keep: Nonempty proper subset of axes to retain

    Returns:
        ProbabilityVector: The marginal, flattened row-major over kept axes

    Raises:
        BadAxes: If keep is empty, out of range, or contains every axis
    """
    keep = _normalize_axes(keep, table.values.ndim, proper=True)
    dropped = tuple(axis for axis in range(table.values.ndim) if axis not in keep)
    return ProbabilityVector(components=table.values.sum(axis=dropped).reshape(-1))


def embed_density(rho: DensityMatrix, placement: IndexPlacement) -> DensityMatrix:
    """Zero-pad a density matrix onto the lattice levels.

    Entry (cell of j, cell of k) equals rho[j, k]; rows and columns of empty
    cells are zero. Trace and nonzero spectrum are unchanged.

    Raises:
        DimensionMismatch: If rho does not have placement.n levels
    """
    if rho.dimension != placement.n:
        raise DimensionMismatch(
            f"Density matrix has {rho.dimension} levels, placement expects {placement.n}"
        )
    padded = np.zeros((placement.size, placement.size), dtype=complex)
    idx = placement.flat_indices
    padded[np.ix_(idx, idx)] = rho.matrix
    return DensityMatrix(matrix=padded, dims=placement.shape)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Trace out every axis of ``rho.dims`` not listed in ``keep``.

    Args:
        rho: Density matrix carrying its axis layout
        keep: Axes to retain; keeping all axes returns rho unchanged

    Returns:
        DensityMatrix: Reduced matrix laid out on the kept axes

    Raises:
        BadAxes: If keep is empty or out of range
    """
    arity = rho.arity
    keep = _normalize_axes(keep, arity, proper=False)

    rows = ascii_lowercase[:arity]
    cols = [ascii_lowercase[arity + axis] if axis in keep else rows[axis] for axis in range(arity)]
    out = "".join(rows[axis] for axis in keep) + "".join(cols[axis] for axis in keep)
    subscripts = f"{rows}{''.join(cols)}->{out}"

    kept_dims = tuple(rho.dims[axis] for axis in keep)
    d_out = prod(kept_dims)
    reduced = np.einsum(subscripts, rho.matrix.reshape(rho.dims + rho.dims))
    return DensityMatrix(matrix=reduced.reshape(d_out, d_out), dims=kept_dims)


def portrait_matrix(placement: IndexPlacement, keep) -> PortraitMatrix:
    """Materialize the 0/1 matrix that realizes a partial trace.

    Row (a', b') of the output vectorization receives a one from every input
    pair (a, b) whose kept coordinates are a', b' and whose dropped
    coordinates agree.

    Raises:
        BadAxes: If keep is invalid
        PortraitTooLarge: If the lattice has more than 16 cells
    """
    shape = placement.shape
    keep = _normalize_axes(keep, placement.arity, proper=False)
    if placement.size > MAX_PORTRAIT_CELLS:
        raise PortraitTooLarge(
            f"Dense portraits are limited to {MAX_PORTRAIT_CELLS} cells, shape {shape} has {placement.size}"
        )

    d_in = placement.size
    kept_dims = tuple(shape[axis] for axis in keep)
    dropped = [axis for axis in range(placement.arity) if axis not in keep]
    d_out = prod(kept_dims)

    digits = np.indices(shape).reshape(len(shape), -1)
    a, b = (grid.reshape(-1) for grid in np.meshgrid(np.arange(d_in), np.arange(d_in), indexing="ij"))
    matching = np.all(digits[dropped][:, a] == digits[dropped][:, b], axis=0)
    a, b = a[matching], b[matching]

    out_a = np.ravel_multi_index(tuple(digits[list(keep)][:, a]), kept_dims)
    out_b = np.ravel_multi_index(tuple(digits[list(keep)][:, b]), kept_dims)

    entries = np.zeros((d_out * d_out, d_in * d_in), dtype=np.int8)
    entries[out_a * d_out + out_b, a * d_in + b] = 1
    return PortraitMatrix(entries=entries, in_shape=shape, keep=keep)


def apply_portrait(m: PortraitMatrix, rho: DensityMatrix, placement: IndexPlacement) -> DensityMatrix:
    """Vectorize, multiply by the portrait matrix, and reshape.

    Args:
        m: Portrait matrix built for ``placement.shape``
        rho: Unpadded density matrix of ``placement.n`` levels
        placement: Placement used to pad rho

    Returns:
        DensityMatrix: The portrait, laid out on the kept axes

    Raises:
        ShapeMismatch: If the portrait was built for another lattice
    """
    if m.in_shape != placement.shape:
        raise ShapeMismatch(f"Portrait expects shape {m.in_shape}, placement has {placement.shape}")

    vector = embed_density(rho, placement).matrix.reshape(-1)
    if m.entries.shape[1] != vector.size:
        raise ShapeMismatch(f"Portrait has {m.entries.shape[1]} columns, input has {vector.size} entries")

    d_out = prod(m.out_dims)
    image = m.entries @ vector
    return DensityMatrix(matrix=image.reshape(d_out, d_out), dims=m.out_dims)


def occupied_levels(placement: IndexPlacement, keep) -> np.ndarray:
    """Mask of kept-lattice levels that receive at least one component."""
    keep = _normalize_axes(keep, placement.arity, proper=False)
    kept_dims = tuple(placement.shape[axis] for axis in keep)
    mask = np.zeros(prod(kept_dims), dtype=bool)
    for cell in placement.cells:
        mask[np.ravel_multi_index(tuple(cell[axis] for axis in keep), kept_dims)] = True
    return mask


def compress_zero_levels(m, mask):
    """Drop structurally empty levels from a portrait or marginal.

    Args:
        m: DensityMatrix or ProbabilityVector over the kept lattice
        mask: Boolean mask from ``occupied_levels``; True keeps a level

    Returns:
        The same kind of object restricted to the masked levels
    """
    mask = np.asarray(mask, dtype=bool)
    if isinstance(m, DensityMatrix):
        if mask.size != m.dimension:
            raise ShapeMismatch(f"Mask has {mask.size} levels, matrix has {m.dimension}")
        if mask.all():
            return m
        return DensityMatrix(matrix=m.matrix[np.ix_(mask, mask)])

    if mask.size != m.dimension:
        raise ShapeMismatch(f"Mask has {mask.size} levels, vector has {m.dimension}")
    return ProbabilityVector(components=m.components[mask])
