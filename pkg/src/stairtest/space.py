"""Product categorical spaces, sparse sample sets and sparse distances.

Elements of a space with ``n`` positions and ``c`` categories per position are
encoded as little-endian mixed-radix integers: ``index = sum_j x_j * c**j``.
Samples are stored sparsely (sorted unique indices plus counts) because the
number of samples is tiny compared to the size of the space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from .errors import InputError

if TYPE_CHECKING:
    from .stair import StairDistribution

# Vectorised encoding works in int64.
_MAX_SIZE = 2**62


@dataclass(frozen=True)
class CategoricalSpace:
    """The space of all length-``n`` tuples over ``c`` categories."""

    n: int
    c: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InputError(f"n must be a positive integer, got {self.n!r}")
        if int(self.c) != self.c or self.c < 2:
            raise InputError(f"c must be an integer >= 2, got {self.c!r}")
        if self.c**self.n > _MAX_SIZE:
            raise InputError(f"space c^n = {self.c}^{self.n} is too large to index in int64")

    @property
    def size(self) -> int:
        return self.c**self.n

    def encode(self, tup: Sequence[int]) -> int:
        return encode(tup, self)

    def decode(self, index: int) -> tuple[int, ...]:
        return decode(index, self)


def encode(tup: Sequence[int], space: CategoricalSpace) -> int:
    if len(tup) != space.n:
        raise InputError(f"expected a tuple of length {space.n}, got {len(tup)}")
    value = 0
    for j in reversed(range(space.n)):
        x = int(tup[j])
        if not 0 <= x < space.c:
            raise InputError(f"component {j} = {x} is outside [0, {space.c})")
        value = value * space.c + x
    return value


def decode(index: int, space: CategoricalSpace) -> tuple[int, ...]:
    index = int(index)
    if not 0 <= index < space.size:
        raise InputError(f"index {index} is outside [0, {space.size})")
    out = []
    for _ in range(space.n):
        index, x = divmod(index, space.c)
        out.append(x)
    return tuple(out)


def encode_many(tuples: np.ndarray, space: CategoricalSpace) -> np.ndarray:
    """Vectorised :func:`encode` over the rows of an ``(m, n)`` integer array."""
    tuples = np.asarray(tuples)
    if tuples.ndim != 2 or tuples.shape[1] != space.n:
        raise InputError(f"expected an array of shape (m, {space.n}), got {tuples.shape}")
    if tuples.size and (tuples.min() < 0 or tuples.max() >= space.c):
        raise InputError(f"tuple components must lie in [0, {space.c})")
    weights = space.c ** np.arange(space.n, dtype=np.int64)
    return tuples.astype(np.int64) @ weights


def decode_many(indices: np.ndarray, space: CategoricalSpace) -> np.ndarray:
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size and (indices.min() < 0 or indices.max() >= space.size):
        raise InputError(f"indices must lie in [0, {space.size})")
    out = np.empty((indices.shape[0], space.n), dtype=np.int64)
    rest = indices.copy()
    for j in range(space.n):
        rest, out[:, j] = np.divmod(rest, space.c)
    return out


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SparseSampleSet:
    """A multiset of samples from an unknown distribution on ``space``.

    ``indices`` is sorted and unique, ``counts`` is aligned with it and
    strictly positive.
    """

    space: CategoricalSpace
    indices: np.ndarray
    counts: np.ndarray
    m: int = field(init=False)

    def __post_init__(self):
        indices = np.array(self.indices, dtype=np.int64)
        counts = np.array(self.counts, dtype=np.int64)
        if indices.shape != counts.shape or indices.ndim != 1:
            raise InputError("indices and counts must be aligned 1-d arrays")
        if indices.size:
            if np.any(np.diff(indices) <= 0):
                raise InputError("indices must be strictly increasing")
            if indices[0] < 0 or indices[-1] >= self.space.size:
                raise InputError(f"sample indices must lie in [0, {self.space.size})")
            if counts.min() <= 0:
                raise InputError("counts must be positive")
        object.__setattr__(self, "indices", _frozen(indices))
        object.__setattr__(self, "counts", _frozen(counts))
        object.__setattr__(self, "m", int(counts.sum()))

    @classmethod
    def from_indices(cls, space: CategoricalSpace, indices: Iterable[int]) -> "SparseSampleSet":
        if not isinstance(indices, np.ndarray):
            indices = np.fromiter(indices, dtype=np.int64)
        idx, cnt = np.unique(indices.astype(np.int64), return_counts=True)
        return cls(space, idx, cnt)

    @classmethod
    def from_counts(cls, space: CategoricalSpace, counts: dict[int, int]) -> "SparseSampleSet":
        keys = sorted(int(k) for k in counts)
        return cls(space, np.array(keys, dtype=np.int64),
                   np.array([counts[k] for k in keys], dtype=np.int64))

    def as_dict(self) -> dict[int, int]:
        return {int(i): int(c) for i, c in zip(self.indices, self.counts)}

    def __eq__(self, other):
        if not isinstance(other, SparseSampleSet):
            return NotImplemented
        return (self.space == other.space and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.counts, other.counts))

    def __len__(self):
        return self.m


@dataclass(frozen=True, eq=False)
class SparsePmf:
    """A pmf stored on its support only; absent indices have probability 0."""

    space: CategoricalSpace
    indices: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        indices = np.array(self.indices, dtype=np.int64)
        probs = np.array(self.probs, dtype=np.float64)
        if indices.shape != probs.shape or indices.ndim != 1:
            raise InputError("indices and probs must be aligned 1-d arrays")
        if indices.size:
            if np.any(np.diff(indices) <= 0):
                raise InputError("indices must be strictly increasing")
            if indices[0] < 0 or indices[-1] >= self.space.size:
                raise InputError(f"pmf indices must lie in [0, {self.space.size})")
            if probs.min() < 0:
                raise InputError("probabilities must be non-negative")
        if abs(probs.sum() - 1.0) > 1e-9:
            raise InputError(f"probabilities sum to {probs.sum()!r}, not 1")
        object.__setattr__(self, "indices", _frozen(indices))
        object.__setattr__(self, "probs", _frozen(probs))

    @classmethod
    def from_dict(cls, space: CategoricalSpace, probs: dict[int, float]) -> "SparsePmf":
        keys = sorted(int(k) for k in probs if probs[k] != 0)
        return cls(space, np.array(keys, dtype=np.int64),
                   np.array([probs[k] for k in keys], dtype=np.float64))

    def as_dict(self) -> dict[int, float]:
        return {int(i): float(v) for i, v in zip(self.indices, self.probs)}


def empirical_pmf(samples: SparseSampleSet) -> SparsePmf:
    if samples.m < 1:
        raise InputError("empirical pmf of an empty sample set is undefined")
    return SparsePmf(samples.space, samples.indices, samples.counts / samples.m)


def _unsampled_per_region(p: "StairDistribution", indices: np.ndarray) -> np.ndarray:
    sampled = np.bincount(p.region_of(indices), minlength=p.s)
    return p.sizes - sampled


def tv_distance_sparse(p: "StairDistribution", q_hat: SparsePmf) -> float:
    """Total variation between a stair pmf and a sparse pmf.

    Only the support of ``q_hat`` is visited; the mass ``p`` puts on the rest
    of the space is added per flat region in closed form.
    """
    if q_hat.space != p.space:
        raise InputError("q_hat lives on a different space than p")
    px = p.pmf(q_hat.indices)
    remainder = float(np.dot(_unsampled_per_region(p, q_hat.indices), p.probs))
    return 0.5 * (float(np.abs(px - q_hat.probs).sum()) + remainder)


def l2_squared_sparse(p: "StairDistribution", q_hat: SparsePmf) -> float:
    """Squared l2 distance ``sum_x (p_x - q_x)**2``, computed sparsely."""
    if q_hat.space != p.space:
        raise InputError("q_hat lives on a different space than p")
    px = p.pmf(q_hat.indices)
    remainder = float(np.dot(_unsampled_per_region(p, q_hat.indices), p.probs**2))
    return float(((px - q_hat.probs) ** 2).sum()) + remainder


# The squared norm is what the test statistic estimates; keep the short name too.
l2_squared = l2_squared_sparse
