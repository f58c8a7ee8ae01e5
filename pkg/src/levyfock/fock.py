"""Combinatorial backbone of the truncated extended Fock space.

A level-n slot of the space splits into blocks indexed by the integer
partitions of n in multiplicity form: a block whose index has
``alpha[k]`` parts of size ``k + 1`` stores a function of ``size(alpha)``
grid variables, symmetric within each group of equal part size.  Values
are kept only on representative tuples (coordinates sorted inside each
group, groups laid out in increasing part size); inner products restore
the full tuple sums through permutation counts.

Enumeration orders are fixed once and for all -- blocks in
reverse-lexicographic multiplicity order, representatives in
lexicographic tuple order, summations in enumeration order -- so matrix
layouts and reports are bit-stable across runs.  Block computations are
independent of each other and all inputs are immutable, so concurrent
use is safe; results are identical to sequential execution.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator

import numpy as np

from .measures import GridSpace, JumpMeasure
from .orthopoly import RecurrenceTable

__all__ = [
    "MultiIndex",
    "partitions",
    "block_weight",
    "BlockBasis",
    "block_basis",
    "SymmetricBasis",
    "symmetric_basis",
    "SymmetricTensor",
    "BlockTensor",
    "diagonal_restriction",
    "block_symmetrize",
    "FockSpace",
    "ExtendedFockVector",
    "inner_product",
    "level_inner_product",
]


@dataclass(frozen=True)
class MultiIndex:
    """Multiplicity encoding of an integer partition.

    ``multiplicities[k - 1]`` counts the parts of size ``k``; trailing
    zeros are trimmed so equal partitions compare equal.
    """

    multiplicities: tuple[int, ...] = ()

    def __post_init__(self):
        mults = tuple(int(m) for m in self.multiplicities)
        if any(m < 0 for m in mults):
            raise ValueError("multiplicities must be nonnegative")
        while mults and mults[-1] == 0:
            mults = mults[:-1]
        object.__setattr__(self, "multiplicities", mults)

    @property
    def degree(self) -> int:
        """Total degree: sum of part size times multiplicity."""
        return sum((k + 1) * m for k, m in enumerate(self.multiplicities))

    @property
    def size(self) -> int:
        """Number of parts, i.e. number of block coordinates."""
        return sum(self.multiplicities)

    @property
    def max_part(self) -> int:
        return len(self.multiplicities)

    def count(self, k: int) -> int:
        """Multiplicity of part size ``k`` (1-based)."""
        if k < 1:
            raise ValueError("part sizes are 1-based")
        return self.multiplicities[k - 1] if k <= self.max_part else 0

    def parts(self) -> Iterator[tuple[int, int]]:
        """Yield ``(part size, multiplicity)`` for every nonzero entry."""
        for k, m in enumerate(self.multiplicities, start=1):
            if m:
                yield k, m

    def raised(self, k: int) -> MultiIndex:
        """Index with one more part of size ``k``."""
        if k < 1:
            raise ValueError("part sizes are 1-based")
        mults = list(self.multiplicities) + [0] * max(0, k - self.max_part)
        mults[k - 1] += 1
        return MultiIndex(tuple(mults))

    def lowered(self, k: int) -> MultiIndex | None:
        """Index with one fewer part of size ``k``, or None if there is none."""
        if self.count(k) < 1:
            return None
        mults = list(self.multiplicities)
        mults[k - 1] -= 1
        return MultiIndex(tuple(mults))

    def __str__(self) -> str:
        if not self.multiplicities:
            return "-"
        return ",".join(str(m) for m in self.multiplicities)


def _partition_parts(n: int, largest: int) -> Iterator[tuple[int, ...]]:
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in _partition_parts(n - first, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def partitions(n: int, max_part: int | None = None) -> tuple[MultiIndex, ...]:
    """All multi-indices of degree ``n``, largest part capped if requested.

    Ordered reverse-lexicographically on the multiplicity vectors, so the
    all-singletons index comes first and the single-large-part index last.
    """
    if n < 0:
        raise ValueError("degree must be nonnegative")
    cap = n if max_part is None else min(max_part, n)
    if n == 0:
        return (MultiIndex(()),)
    if cap < 1:
        return ()
    found = []
    for parts in _partition_parts(n, cap):
        counts = Counter(parts)
        mults = tuple(counts.get(k, 0) for k in range(1, max(parts) + 1))
        found.append(MultiIndex(mults))
    found.sort(key=lambda a: a.multiplicities + (0,) * (n - a.max_part), reverse=True)
    return tuple(found)


def block_weight(alpha: MultiIndex, table: RecurrenceTable) -> float:
    """Inner-product weight of one block.

    The multinomial count of the parts times, for every part of size k,
    the squared norm of the degree-(k-1) monic polynomial divided by the
    squared factorial of k.
    """
    if alpha.max_part > table.depth:
        raise ValueError(
            f"recurrence table of depth {table.depth} too shallow for parts of size "
            f"{alpha.max_part}"
        )
    weight = float(math.factorial(alpha.degree))
    for k, m in alpha.parts():
        weight /= math.factorial(m)
        weight *= (table.norm_sq[k - 1] / math.factorial(k) ** 2) ** m
    return weight


def _arrangements(segment: tuple[int, ...]) -> int:
    count = math.factorial(len(segment))
    for c in Counter(segment).values():
        count //= math.factorial(c)
    return count


@dataclass
class BlockBasis:
    """Representative-tuple enumeration of one block over one grid.

    ``reps`` are the flat coordinate tuples (grid point indices), sorted
    within each same-part-size segment; ``mult`` counts the distinct
    within-segment rearrangements of each representative and ``sigma`` is
    its product of grid weights, so ``weight = mult * sigma`` turns sums
    over representatives into sums over all tuples.
    """

    alpha: MultiIndex
    grid: GridSpace
    reps: tuple[tuple[int, ...], ...]
    index: dict[tuple[int, ...], int]
    mult: np.ndarray
    sigma: np.ndarray
    weight: np.ndarray
    offsets: tuple[tuple[int, int], ...]  # (start, stop) per part size, 1-based list

    @property
    def dim(self) -> int:
        return len(self.reps)

    def segments(self, rep: tuple[int, ...]) -> list[tuple[int, ...]]:
        """Split a flat tuple into its per-part-size segments."""
        return [rep[start:stop] for start, stop in self.offsets]


@lru_cache(maxsize=None)
def block_basis(alpha: MultiIndex, grid: GridSpace) -> BlockBasis:
    points = range(grid.size)
    per_block = [
        tuple(itertools.combinations_with_replacement(points, alpha.count(k)))
        for k in range(1, alpha.max_part + 1)
    ]
    reps = tuple(
        tuple(itertools.chain.from_iterable(combo))
        for combo in itertools.product(*per_block)
    )

    offsets = []
    start = 0
    for k in range(1, alpha.max_part + 1):
        stop = start + alpha.count(k)
        offsets.append((start, stop))
        start = stop

    mult = np.empty(len(reps))
    sigma = np.empty(len(reps))
    for i, rep in enumerate(reps):
        m = 1
        for s, e in offsets:
            m *= _arrangements(rep[s:e])
        mult[i] = float(m)
        sigma[i] = float(np.prod([grid.weights[p] for p in rep])) if rep else 1.0
    return BlockBasis(
        alpha=alpha,
        grid=grid,
        reps=reps,
        index={rep: i for i, rep in enumerate(reps)},
        mult=mult,
        sigma=sigma,
        weight=mult * sigma,
        offsets=tuple(offsets),
    )


@dataclass
class SymmetricBasis:
    """Sorted-tuple enumeration of fully symmetric level-n functions."""

    level: int
    grid: GridSpace
    reps: tuple[tuple[int, ...], ...]
    index: dict[tuple[int, ...], int]
    mult: np.ndarray
    sigma: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.reps)


@lru_cache(maxsize=None)
def symmetric_basis(level: int, grid: GridSpace) -> SymmetricBasis:
    if level < 0:
        raise ValueError("level must be nonnegative")
    reps = tuple(itertools.combinations_with_replacement(range(grid.size), level))
    mult = np.array([float(_arrangements(rep)) for rep in reps])
    sigma = np.array(
        [float(np.prod([grid.weights[p] for p in rep])) if rep else 1.0 for rep in reps]
    )
    return SymmetricBasis(
        level=level,
        grid=grid,
        reps=reps,
        index={rep: i for i, rep in enumerate(reps)},
        mult=mult,
        sigma=sigma,
    )


@dataclass
class SymmetricTensor:
    """Fully symmetric function of ``level`` grid variables.

    Values are stored on sorted tuples in lexicographic order; arbitrary
    tuples are looked up after sorting.
    """

    grid: GridSpace
    level: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (symmetric_basis(self.level, self.grid).dim,):
            raise ValueError("value array does not match the sorted-tuple basis")

    @property
    def basis(self) -> SymmetricBasis:
        return symmetric_basis(self.level, self.grid)

    def value(self, tpl: tuple[int, ...]) -> float:
        return float(self.values[self.basis.index[tuple(sorted(tpl))]])

    @classmethod
    def zeros(cls, grid: GridSpace, level: int) -> SymmetricTensor:
        return cls(grid, level, np.zeros(symmetric_basis(level, grid).dim))

    @classmethod
    def from_function(
        cls, grid: GridSpace, level: int, fn: Callable[[tuple[int, ...]], float]
    ) -> SymmetricTensor:
        basis = symmetric_basis(level, grid)
        return cls(grid, level, np.array([float(fn(rep)) for rep in basis.reps]))

    @classmethod
    def basis_element(cls, grid: GridSpace, level: int, idx: int) -> SymmetricTensor:
        values = np.zeros(symmetric_basis(level, grid).dim)
        values[idx] = 1.0
        return cls(grid, level, values)


@dataclass
class BlockTensor:
    """Block-symmetric function stored on the representatives of one block."""

    grid: GridSpace
    alpha: MultiIndex
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (block_basis(self.alpha, self.grid).dim,):
            raise ValueError("value array does not match the block basis")

    @property
    def basis(self) -> BlockBasis:
        return block_basis(self.alpha, self.grid)

    def value(self, tpl: tuple[int, ...]) -> float:
        """Value at an arbitrary tuple in this block's layout."""
        basis = self.basis
        rep = tuple(
            itertools.chain.from_iterable(
                sorted(tpl[s:e]) for s, e in basis.offsets
            )
        )
        return float(self.values[basis.index[rep]])


def diagonal_restriction(f: SymmetricTensor, alpha: MultiIndex) -> BlockTensor:
    """Block coordinate of a symmetric tensor: each part-k coordinate repeated k times.

    The layout follows the block convention: singleton coordinates first,
    then the coordinates repeated twice, and so on.
    """
    if alpha.degree != f.level:
        raise ValueError(
            f"degree mismatch: block index has degree {alpha.degree}, tensor level {f.level}"
        )
    basis = block_basis(alpha, f.grid)
    values = np.empty(basis.dim)
    for i, rep in enumerate(basis.reps):
        expanded: list[int] = []
        for k, (s, e) in enumerate(basis.offsets, start=1):
            for p in rep[s:e]:
                expanded.extend([p] * k)
        values[i] = f.value(tuple(expanded))
    return BlockTensor(f.grid, alpha, values)


def block_symmetrize(
    fn: Callable[[tuple[int, ...]], float], alpha: MultiIndex, grid: GridSpace
) -> BlockTensor:
    """Average a raw function of ``size(alpha)`` grid variables within blocks.

    Orthogonal projection onto the block-symmetric subspace: for every
    representative, the mean of ``fn`` over all products of within-segment
    coordinate permutations.  Idempotent by construction.
    """
    basis = block_basis(alpha, grid)
    values = np.empty(basis.dim)
    for i, rep in enumerate(basis.reps):
        segs = basis.segments(rep)
        total = 0.0
        count = 0
        for perm in itertools.product(*(itertools.permutations(seg) for seg in segs)):
            total += fn(tuple(itertools.chain.from_iterable(perm)))
            count += 1
        values[i] = total / count
    return BlockTensor(grid, alpha, values)


class FockSpace:
    """Truncated extended Fock space over a grid, a measure, and its table.

    Levels run ``0 .. depth``.  Blocks are representable only while the
    recurrence table covers their largest part, so the table must either
    reach the truncation depth or exhaust the measure (depth equal to the
    atom count).  In the exhausted case the omitted blocks carry exactly
    zero inner-product weight -- the squared polynomial norms vanish on a
    finite support -- so dropping them changes nothing.
    """

    def __init__(
        self,
        grid: GridSpace,
        measure: JumpMeasure,
        table: RecurrenceTable,
        depth: int,
    ):
        if depth < 0:
            raise ValueError("truncation depth must be nonnegative")
        if table.depth < depth and table.depth < measure.atom_count:
            raise ValueError(
                f"recurrence table of depth {table.depth} too shallow for truncation "
                f"depth {depth} (the measure supports depth {measure.atom_count})"
            )
        self.grid = grid
        self.measure = measure
        self.table = table
        self.depth = depth
        self.max_part = table.depth
        self.mass = table.norm_sq[0]
        self._blocks = {
            n: partitions(n, max_part=self.max_part) for n in range(depth + 1)
        }
        self._weights = {
            (n, alpha): block_weight(alpha, table)
            for n, alphas in self._blocks.items()
            for alpha in alphas
        }

    def blocks(self, n: int) -> tuple[MultiIndex, ...]:
        return self._blocks[n]

    def block_keys(self) -> list[tuple[int, MultiIndex]]:
        return [(n, alpha) for n in range(self.depth + 1) for alpha in self._blocks[n]]

    def weight(self, n: int, alpha: MultiIndex) -> float:
        return self._weights[(n, alpha)]

    def basis(self, alpha: MultiIndex) -> BlockBasis:
        return block_basis(alpha, self.grid)

    def compatible(self, other: FockSpace) -> bool:
        return (
            self.grid == other.grid
            and self.table == other.table
            and self.depth == other.depth
        )

    def zero(self) -> ExtendedFockVector:
        data = {
            key: np.zeros(self.basis(key[1]).dim) for key in self.block_keys()
        }
        return ExtendedFockVector(self, data)

    def vacuum(self) -> ExtendedFockVector:
        v = self.zero()
        v.data[(0, MultiIndex(()))][0] = 1.0
        return v

    def basis_vector(self, n: int, alpha: MultiIndex, idx: int) -> ExtendedFockVector:
        v = self.zero()
        v.data[(n, alpha)][idx] = 1.0
        return v

    def enumerate_basis(self) -> list[tuple[int, MultiIndex, int]]:
        return [
            (n, alpha, i)
            for n, alpha in self.block_keys()
            for i in range(self.basis(alpha).dim)
        ]

    def embed_symmetric(self, f: SymmetricTensor) -> ExtendedFockVector:
        """Level-``f.level`` vector whose blocks are the diagonal restrictions of ``f``."""
        if f.level > self.depth:
            raise ValueError("tensor level exceeds the truncation depth")
        if f.grid != self.grid:
            raise ValueError("grid mismatch")
        v = self.zero()
        for alpha in self.blocks(f.level):
            v.data[(f.level, alpha)] = diagonal_restriction(f, alpha).values
        return v


@dataclass
class ExtendedFockVector:
    """Element of a truncated extended Fock space: one array per block."""

    space: FockSpace
    data: dict[tuple[int, MultiIndex], np.ndarray]

    def block(self, n: int, alpha: MultiIndex) -> BlockTensor:
        return BlockTensor(self.space.grid, alpha, self.data[(n, alpha)])

    def copy(self) -> ExtendedFockVector:
        return ExtendedFockVector(self.space, {k: v.copy() for k, v in self.data.items()})

    def scaled(self, c: float) -> ExtendedFockVector:
        return ExtendedFockVector(self.space, {k: c * v for k, v in self.data.items()})

    def __add__(self, other: ExtendedFockVector) -> ExtendedFockVector:
        if other.space is not self.space and not self.space.compatible(other.space):
            raise ValueError("vectors live in different spaces")
        return ExtendedFockVector(
            self.space, {k: self.data[k] + other.data[k] for k in self.data}
        )

    def to_lines(self) -> list[str]:
        """Serialize as one record per (level, block index, representative, value)."""
        lines = []
        for (n, alpha) in self.space.block_keys():
            basis = self.space.basis(alpha)
            values = self.data[(n, alpha)]
            for i, rep in enumerate(basis.reps):
                rep_str = ",".join(str(p) for p in rep) if rep else "-"
                lines.append(f"{n} {alpha} {rep_str} {values[i]:.17g}")
        return lines

    @classmethod
    def from_lines(cls, space: FockSpace, lines: list[str]) -> ExtendedFockVector:
        v = space.zero()
        for line in lines:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            level_str, alpha_str, rep_str, value_str = line.split()
            n = int(level_str)
            alpha = MultiIndex(
                () if alpha_str == "-" else tuple(int(m) for m in alpha_str.split(","))
            )
            rep = () if rep_str == "-" else tuple(int(p) for p in rep_str.split(","))
            basis = space.basis(alpha)
            v.data[(n, alpha)][basis.index[rep]] = float(value_str)
        return v


def _check_pairing(f: ExtendedFockVector, g: ExtendedFockVector) -> None:
    if f.space.grid != g.space.grid:
        raise ValueError("grid mismatch")
    if f.space.table != g.space.table:
        raise ValueError("recurrence table mismatch")


def level_inner_product(f: ExtendedFockVector, g: ExtendedFockVector, n: int) -> float:
    """Single-level inner product: block weights, no factorial level weight."""
    _check_pairing(f, g)
    total = 0.0
    for alpha in f.space.blocks(n):
        basis = f.space.basis(alpha)
        total += f.space.weight(n, alpha) * float(
            np.dot(basis.weight * f.data[(n, alpha)], g.data[(n, alpha)])
        )
    return total


def inner_product(f: ExtendedFockVector, g: ExtendedFockVector) -> float:
    """Full-space inner product: factorial of the level weights each level."""
    _check_pairing(f, g)
    common = min(f.space.depth, g.space.depth)
    total = 0.0
    for n in range(common + 1):
        for alpha in f.space.blocks(n):
            key = (n, alpha)
            if key not in g.data:
                continue
            basis = f.space.basis(alpha)
            total += (
                math.factorial(n)
                * f.space.weight(n, alpha)
                * float(np.dot(basis.weight * f.data[key], g.data[key]))
            )
    return total
