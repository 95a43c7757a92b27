"""Ground-truth stair distributions.

A stair distribution splits the index range of a :class:`CategoricalSpace`
into ``s`` contiguous flat regions. Every element of region ``i`` has the same
probability and the last region carries no mass at all.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConstructionError, InputError
from .space import CategoricalSpace, SparseSampleSet

MASS_TOL = 1e-9
DEFAULT_DECAY = 0.6


class FlatRegion(NamedTuple):
    id: int
    start: int
    end: int
    per_element_prob: float

    @property
    def size(self) -> int:
        return self.end - self.start


class RegionUniform:
    """A pmf that is constant on each of a fixed set of contiguous index blocks.

    ``edges`` has one more entry than ``probs``; block ``i`` (0-based) covers
    ``[edges[i], edges[i+1])``. Region ids exposed to users are 1-based.
    """

    def __init__(self, space: CategoricalSpace, edges: Sequence[int], probs: Sequence[float]):
        edges = np.array(edges, dtype=np.int64)
        probs = np.array(probs, dtype=np.float64)
        if edges.ndim != 1 or probs.shape != (edges.size - 1,):
            raise InputError("edges must have exactly one more entry than probs")
        if edges[0] != 0 or edges[-1] != space.size or np.any(np.diff(edges) <= 0):
            raise InputError("regions must be non-empty and tile the space contiguously")
        if probs.min() < 0:
            raise InputError("per-element probabilities must be non-negative")
        edges.setflags(write=False)
        probs.setflags(write=False)
        self.space = space
        self.edges = edges
        self.probs = probs
        self.sizes = np.diff(edges)
        self.sizes.setflags(write=False)
        self.region_masses = self.sizes * probs
        self.region_masses.setflags(write=False)
        if abs(self.region_masses.sum() - 1.0) > MASS_TOL:
            raise InputError(f"region masses sum to {self.region_masses.sum()!r}, not 1")

    @property
    def s(self) -> int:
        return self.probs.size

    @property
    def regions(self) -> list[FlatRegion]:
        return [FlatRegion(i + 1, int(self.edges[i]), int(self.edges[i + 1]), float(self.probs[i]))
                for i in range(self.s)]

    def region_of(self, indices) -> np.ndarray:
        """0-based region position of each index (binary search over edges)."""
        return np.searchsorted(self.edges, np.asarray(indices, dtype=np.int64), side="right") - 1

    def pmf(self, x):
        """Probability of ``x``; scalar in, scalar out, array in, array out."""
        arr = np.asarray(x, dtype=np.int64)
        if arr.size and (arr.min() < 0 or arr.max() >= self.space.size):
            raise InputError(f"element index outside [0, {self.space.size})")
        out = self.probs[self.region_of(arr)]
        return float(out) if arr.ndim == 0 else out

    def dense(self) -> np.ndarray:
        """The full pmf vector. Only sensible for small spaces."""
        return np.repeat(self.probs, self.sizes)

    def sample_indices(self, m: int, seed=None) -> np.ndarray:
        """Draw ``m`` element indices in draw order.

        Each draw picks a region with probability equal to its mass, then an
        index uniformly inside that region.
        """
        if m < 1:
            raise InputError("m must be at least 1")
        rng = np.random.default_rng(seed)
        masses = self.region_masses / self.region_masses.sum()
        region = rng.choice(self.s, size=m, p=masses)
        return rng.integers(self.edges[region], self.edges[region + 1])

    def sample(self, m: int, seed=None) -> SparseSampleSet:
        return SparseSampleSet.from_indices(self.space, self.sample_indices(m, seed))


class StairDistribution(RegionUniform):
    """Region-uniform pmf with strictly decreasing stair heights, the last one zero."""

    def __init__(self, space: CategoricalSpace, edges: Sequence[int], probs: Sequence[float]):
        super().__init__(space, edges, probs)
        if self.s < 2:
            raise ConstructionError("a stair distribution needs at least 2 regions")
        if self.probs[-1] != 0.0:
            raise ConstructionError("the last region of a stair distribution must have zero mass")
        if np.any(np.diff(self.probs) >= 0):
            raise ConstructionError(
                f"stair values must be strictly decreasing, got {self.probs.tolist()}")

    @property
    def support_size(self) -> int:
        return int(self.edges[-2])

    def __repr__(self):
        return (f"StairDistribution(n={self.space.n}, c={self.space.c}, s={self.s}, "
                f"sizes={self.sizes.tolist()}, masses={self.region_masses.tolist()})")


def factorial_support_ratio(c: int) -> float:
    """``c! / c**c``, the default fraction of the space that carries mass."""
    return math.factorial(c) / c**c


def default_mass_profile(s: int, decay: float = DEFAULT_DECAY) -> list[float]:
    """Geometric region masses ``decay**i`` normalised over the s-1 positive regions."""
    w = decay ** np.arange(s - 1)
    return (w / w.sum()).tolist()


def build_stair(space: CategoricalSpace, s: int, support_ratio: float | None = None,
                mass_profile: Sequence[float] | None = None) -> StairDistribution:
    """Build a stair pmf with ``s`` flat regions.

    The first ``ceil(support_ratio * |space|)`` indices are cut into ``s - 1``
    near-equal contiguous blocks (larger blocks first), block ``i`` receiving
    total mass ``mass_profile[i]``. The remaining indices form the zero region.
    """
    if s < 2:
        raise InputError("s must be at least 2")
    if support_ratio is None:
        support_ratio = factorial_support_ratio(space.c)
    if mass_profile is None:
        mass_profile = default_mass_profile(s)
    masses = np.asarray(mass_profile, dtype=np.float64)
    if not 0 < support_ratio <= 1:
        raise InputError(f"support_ratio must lie in (0, 1], got {support_ratio}")
    if masses.shape != (s - 1,):
        raise InputError(f"mass_profile needs {s - 1} entries, got {masses.size}")
    if masses.min() <= 0 or abs(masses.sum() - 1.0) > MASS_TOL:
        raise InputError("mass_profile entries must be positive and sum to 1")

    # Guard against 720/46656*46656 = 720.0000000001 style rounding.
    support = math.ceil(support_ratio * space.size - 1e-9)
    if support < s - 1:
        raise InputError(f"support of {support} elements cannot hold {s - 1} positive regions")
    if support >= space.size:
        raise InputError("support_ratio leaves no element for the zero-mass region")

    base, extra = divmod(support, s - 1)
    sizes = [base + 1] * extra + [base] * (s - 1 - extra)
    edges = np.concatenate([[0], np.cumsum(sizes), [space.size]])
    probs = np.concatenate([masses / np.asarray(sizes), [0.0]])
    return StairDistribution(space, edges, probs)


@dataclass(frozen=True)
class StairSpec:
    """Serializable recipe for a stair distribution plus a sampling seed."""

    n: int = 6
    c: int = 6
    s: int = 4
    support_ratio: float | None = None
    mass_profile: tuple[float, ...] | None = None
    seed: int = 0

    def build(self) -> StairDistribution:
        return build_stair(CategoricalSpace(self.n, self.c), self.s, self.support_ratio,
                           self.mass_profile)

    def resolved(self) -> "StairSpec":
        """A copy with defaults filled in, so reports pin every value."""
        p = self.build()
        ratio = (self.support_ratio if self.support_ratio is not None
                 else factorial_support_ratio(self.c))
        masses = tuple(float(x) for x in p.region_masses[:-1]) if self.mass_profile is None \
            else tuple(self.mass_profile)
        return StairSpec(self.n, self.c, self.s, ratio, masses, self.seed)

    def to_dict(self) -> dict:
        return {"n": self.n, "c": self.c, "s": self.s, "support_ratio": self.support_ratio,
                "mass_profile": None if self.mass_profile is None else list(self.mass_profile),
                "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "StairSpec":
        unknown = set(d) - {"n", "c", "s", "support_ratio", "mass_profile", "seed"}
        if unknown:
            raise InputError(f"unknown stair fields: {sorted(unknown)}")
        mp = d.get("mass_profile")
        return cls(n=int(d.get("n", 6)), c=int(d.get("c", 6)), s=int(d.get("s", 4)),
                   support_ratio=d.get("support_ratio"),
                   mass_profile=None if mp is None else tuple(float(x) for x in mp),
                   seed=int(d.get("seed", 0)))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "StairSpec":
        return cls.from_dict(json.loads(text))
