"""Binning of a stair space into a small number of bins.

Every binning built here keeps each bin inside a single flat region of the
reference stair pmf, so binning the reference loses nothing. Each region is
either kept whole or cut in two, which gives ``k`` bins with
``s <= k <= 2s``. Only the sampled indices of a cut are stored explicitly; the
rest of the region is implicit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import InputError
from .space import SparsePmf, SparseSampleSet, empirical_pmf
from .stair import RegionUniform, StairDistribution

WHOLE = "whole"
SIGN_SPLIT = "sign_split"
NULL_SPLIT = "null_split"
RANDOM_SPLIT = "random_split"
_MODES = (WHOLE, SIGN_SPLIT, NULL_SPLIT, RANDOM_SPLIT)

# Gains closer than this are treated as tied when ranking regions.
GAIN_DECIMALS = 12


@dataclass(frozen=True, eq=False)
class RegionSplit:
    """How one flat region is binned.

    ``positive`` holds the explicit side of a cut (sorted element indices);
    the other side is the rest of the region. It is empty for ``whole``.
    ``null_split`` is a cut on a region whose sign split cannot gain anything,
    forced by the requested bin count.
    """

    region_id: int
    mode: str = WHOLE
    positive: np.ndarray = None

    def __post_init__(self):
        if self.mode not in _MODES:
            raise InputError(f"unknown split mode {self.mode!r}")
        pos = np.unique(np.asarray([] if self.positive is None else self.positive, dtype=np.int64))
        if self.mode == WHOLE and pos.size:
            raise InputError("a whole region has no explicit side")
        if self.mode != WHOLE and not pos.size:
            raise InputError("a cut needs a non-empty explicit side")
        pos.setflags(write=False)
        object.__setattr__(self, "positive", pos)

    @property
    def is_split(self) -> bool:
        return self.mode != WHOLE

    def __eq__(self, other):
        if not isinstance(other, RegionSplit):
            return NotImplemented
        return (self.region_id == other.region_id and self.mode == other.mode
                and np.array_equal(self.positive, other.positive))


class Binning:
    """A partition of the space where each flat region is whole or cut in two.

    Bins are ordered by region; a cut region contributes its explicit side
    first, then the remainder.
    """

    def __init__(self, base: StairDistribution, splits: Sequence[RegionSplit]):
        splits = tuple(splits)
        if [sp.region_id for sp in splits] != list(range(1, base.s + 1)):
            raise InputError("splits must list every region id 1..s in order")
        for sp, region in zip(splits, base.regions):
            if sp.is_split:
                if sp.positive[0] < region.start or sp.positive[-1] >= region.end:
                    raise InputError(f"cut of region {sp.region_id} leaves the region")
                if sp.positive.size >= region.size:
                    raise InputError(f"cut of region {sp.region_id} leaves an empty side")
        self.base = base
        self.splits = splits
        self._split_mask = np.array([sp.is_split for sp in splits])
        self._first_bin = np.concatenate([[0], np.cumsum(1 + self._split_mask)[:-1]])
        self._positive_all = (np.concatenate([sp.positive for sp in splits])
                              if splits else np.empty(0, np.int64))

    @classmethod
    def flat(cls, base: StairDistribution) -> "Binning":
        """The coarsest binning: one bin per flat region."""
        return cls(base, [RegionSplit(i) for i in range(1, base.s + 1)])

    @property
    def s(self) -> int:
        return self.base.s

    @property
    def k(self) -> int:
        return self.s + int(self._split_mask.sum())

    @property
    def labels(self) -> list[str]:
        out = []
        for sp in self.splits:
            out += [f"{sp.region_id}+", f"{sp.region_id}-"] if sp.is_split else [str(sp.region_id)]
        return out

    def bin_of(self, indices) -> np.ndarray:
        """Bin position of each element index."""
        idx = np.asarray(indices, dtype=np.int64)
        r = self.base.region_of(idx)
        out = self._first_bin[r].copy()
        cut = self._split_mask[r] & ~np.isin(idx, self._positive_all)
        out[cut] += 1
        return out

    def bin_sizes(self) -> np.ndarray:
        sizes = []
        for sp, size in zip(self.splits, self.base.sizes):
            sizes += [sp.positive.size, size - sp.positive.size] if sp.is_split else [size]
        return np.array(sizes, dtype=np.int64)

    def to_partition(self) -> list[np.ndarray]:
        """Explicit list of bins. Only for spaces small enough to enumerate."""
        bins = self.bin_of(np.arange(self.base.space.size))
        return [np.flatnonzero(bins == b) for b in range(self.k)]

    def to_record(self) -> dict:
        return {"k": self.k, "s": self.s,
                "splits": [{"region_id": sp.region_id, "mode": sp.mode,
                            "positive": sp.positive.tolist()} for sp in self.splits]}

    @classmethod
    def from_record(cls, base: StairDistribution, record: dict) -> "Binning":
        splits = [RegionSplit(int(r["region_id"]), r["mode"], r.get("positive") or None)
                  for r in record["splits"]]
        out = cls(base, splits)
        if "k" in record and record["k"] != out.k:
            raise InputError(f"record claims k={record['k']} but describes {out.k} bins")
        return out

    def __eq__(self, other):
        if not isinstance(other, Binning):
            return NotImplemented
        return (np.array_equal(self.base.edges, other.base.edges)
                and self.splits == other.splits)

    def __repr__(self):
        modes = ", ".join(f"{sp.region_id}:{sp.mode}" for sp in self.splits)
        return f"Binning(k={self.k}, {modes})"


class ScatteredPartition:
    """A ``k``-bin partition with no regard for flat regions.

    Sampled elements carry explicit bin labels; the unsampled elements of
    each region are spread across bins by a count matrix ``remainder[b, i]``.
    """

    def __init__(self, base: StairDistribution, k: int, sampled: np.ndarray,
                 labels: np.ndarray, remainder: np.ndarray):
        self.base = base
        self.k = k
        self.sampled = np.asarray(sampled, dtype=np.int64)
        self.labels = np.asarray(labels, dtype=np.int64)
        self.remainder = np.asarray(remainder, dtype=np.int64)
        if self.remainder.shape != (k, base.s):
            raise InputError("remainder must be a k x s count matrix")

    def bin_of(self, indices) -> np.ndarray:
        idx = np.asarray(indices, dtype=np.int64)
        pos = np.searchsorted(self.sampled, idx)
        pos = np.minimum(pos, max(self.sampled.size - 1, 0))
        if not self.sampled.size or np.any(self.sampled[pos] != idx):
            raise InputError("only the elements the partition was built on can be located")
        return self.labels[pos]


AnyBinning = Union[Binning, ScatteredPartition]


def induce(binning: AnyBinning, dist) -> np.ndarray:
    """Bin probabilities (or counts, for a sample set) of ``dist`` under ``binning``.

    Region-uniform distributions are binned in closed form from region
    sizes; sparse pmfs and sample sets from their stored entries.
    """
    k = binning.k
    if isinstance(dist, SparseSampleSet):
        return np.bincount(binning.bin_of(dist.indices), weights=dist.counts,
                           minlength=k).astype(np.int64)
    if isinstance(dist, SparsePmf):
        return np.bincount(binning.bin_of(dist.indices), weights=dist.probs, minlength=k)
    if isinstance(dist, RegionUniform):
        if dist.space != binning.base.space:
            raise InputError("distribution lives on a different space than the binning")
        if isinstance(binning, ScatteredPartition):
            if not np.array_equal(dist.edges, binning.base.edges):
                raise InputError("scattered partitions only bin distributions on the reference regions")
            out = binning.remainder @ dist.probs
            np.add.at(out, binning.labels, dist.pmf(binning.sampled))
            return out
        if np.array_equal(dist.edges, binning.base.edges):
            region_mass = dist.region_masses
        else:
            region_mass = np.diff(_cumulative_mass(dist, binning.base.edges))
        out = []
        for sp, mass in zip(binning.splits, region_mass):
            if sp.is_split:
                pos = float(dist.pmf(sp.positive).sum())
                out += [pos, mass - pos]
            else:
                out.append(mass)
        return np.array(out)
    raise InputError(f"cannot bin an object of type {type(dist).__name__}")


def _cumulative_mass(dist: RegionUniform, points: np.ndarray) -> np.ndarray:
    """Mass of ``[0, x)`` for each ``x`` in ``points``."""
    points = np.asarray(points, dtype=np.int64)
    block_mass = np.concatenate([[0.0], np.cumsum(dist.sizes * dist.probs)])
    j = np.searchsorted(dist.edges, points, side="right") - 1
    j = np.minimum(j, dist.s)
    inner = np.where(j < dist.s, (points - dist.edges[j]) * dist.probs[np.minimum(j, dist.s - 1)], 0.0)
    return block_mass[j] + inner


def tv(p_binned, q_binned) -> float:
    return 0.5 * float(np.abs(np.asarray(p_binned) - np.asarray(q_binned)).sum())


def l2_squared(p_binned, q_binned) -> float:
    return float(((np.asarray(p_binned) - np.asarray(q_binned)) ** 2).sum())


def binned_tv(binning: AnyBinning, p: StairDistribution, q) -> float:
    return tv(induce(binning, p), induce(binning, _as_pmf(q)))


def _as_pmf(q):
    return empirical_pmf(q) if isinstance(q, SparseSampleSet) else q


def binning_error_to_reference(partition, p: StairDistribution) -> float:
    """Error introduced by replacing ``p`` with its bin averages.

    ``partition`` is a :class:`Binning` or an explicit list of index arrays
    covering the space exactly once.
    """
    if isinstance(partition, Binning):
        err = 0.0
        for size, prob in zip(partition.bin_sizes(), np.repeat(
                partition.base.probs, 1 + partition._split_mask)):
            mass = size * prob
            err += size * abs(prob - mass / size)
        return 0.5 * err
    if isinstance(partition, ScatteredPartition):
        raise InputError("a scattered partition is only known on sampled elements")
    bins = [np.asarray(b, dtype=np.int64) for b in partition]
    allidx = np.sort(np.concatenate(bins)) if bins else np.empty(0, np.int64)
    if not np.array_equal(allidx, np.arange(p.space.size)) or any(b.size == 0 for b in bins):
        raise InputError("bins must be non-empty and cover every element exactly once")
    err = 0.0
    for b in bins:
        px = p.pmf(b)
        err += float(np.abs(px - px.sum() / b.size).sum())
    return 0.5 * err


def in_error_family(partition, p: StairDistribution, lam: float = 0.0, tol: float = 1e-12) -> bool:
    """Whether ``partition`` loses at most ``lam`` when binning ``p``."""
    return binning_error_to_reference(partition, p) <= lam + tol


def region_gains(p: StairDistribution, q_hat: SparsePmf):
    """Per-region excess mass ``P``, deficit mass ``N`` and cut gain ``min(P, N)``.

    Elements with ``q_hat == p`` count on the deficit side; unsampled
    elements add their reference mass to the deficit in closed form.
    """
    diff = q_hat.probs - p.pmf(q_hat.indices)
    r = p.region_of(q_hat.indices)
    over = diff > 0
    excess = np.bincount(r[over], weights=diff[over], minlength=p.s)
    deficit = np.bincount(r[~over], weights=-diff[~over], minlength=p.s)
    unsampled = p.sizes - np.bincount(r, minlength=p.s)
    deficit = deficit + unsampled * p.probs
    return excess, deficit, np.minimum(excess, deficit)


def _check_k(p: StairDistribution, k: int) -> None:
    if not p.s <= k <= 2 * p.s:
        raise InputError(f"k={k} outside [s, 2s] = [{p.s}, {2 * p.s}]")
    splittable = int((p.sizes >= 2).sum())
    if k - p.s > splittable:
        raise InputError(f"k={k} needs {k - p.s} cuts but only {splittable} regions can be cut")


def _quietest_element(p: StairDistribution, q_hat: SparsePmf, i: int) -> int:
    """Element of region ``i`` with the smallest ``|q_hat - p|`` (lowest index on ties).

    When all errors in a region share one sign every cut has the same TV;
    isolating this element maximizes the squared l2 of the cut.
    """
    start, end = int(p.edges[i]), int(p.edges[i + 1])
    lo, hi = np.searchsorted(q_hat.indices, [start, end])
    sampled = q_hat.indices[lo:hi]
    err = np.abs(q_hat.probs[lo:hi] - p.probs[i])
    best_idx, best_err = None, np.inf
    if sampled.size < end - start:
        # lowest unsampled index: first gap in the sorted sampled run
        gaps = np.flatnonzero(sampled != np.arange(start, start + sampled.size))
        best_idx = start + (int(gaps[0]) if gaps.size else sampled.size)
        best_err = float(p.probs[i])
    if sampled.size:
        j = int(np.argmin(err))
        if err[j] < best_err or (err[j] == best_err and sampled[j] < best_idx):
            best_idx, best_err = int(sampled[j]), float(err[j])
    return best_idx


def optimize_binning(p: StairDistribution, q_hat, k: int) -> Binning:
    """The ``k``-bin zero-loss binning maximizing binned TV between ``p`` and ``q_hat``.

    Cutting region ``i`` along the sign of ``q_hat - p`` raises the binned
    TV by ``min(P_i, N_i)`` and these gains add up over regions, so cutting
    the ``k - s`` regions with the largest gains is the exact maximizer (ties
    go to the lowest region id). No search beats it.
    """
    q_hat = _as_pmf(q_hat)
    if q_hat.space != p.space:
        raise InputError("q_hat lives on a different space than p")
    _check_k(p, k)
    excess, deficit, gain = region_gains(p, q_hat)

    ids = np.arange(p.s)
    candidates = ids[p.sizes >= 2]
    order = sorted(candidates, key=lambda i: (-round(float(gain[i]), GAIN_DECIMALS), i))
    chosen = set(int(i) for i in order[: k - p.s])

    over = q_hat.probs > p.pmf(q_hat.indices)
    r = p.region_of(q_hat.indices)
    splits = []
    for i, region in enumerate(p.regions):
        if i not in chosen:
            splits.append(RegionSplit(region.id))
            continue
        pos = q_hat.indices[over & (r == i)]
        if excess[i] > 0 and deficit[i] > 0:
            splits.append(RegionSplit(region.id, SIGN_SPLIT, pos))
        else:
            splits.append(RegionSplit(region.id, NULL_SPLIT, [_quietest_element(p, q_hat, i)]))
    return Binning(p, splits)


def random_binning(p: StairDistribution, k: int, seed=None, samples=None) -> Binning:
    """Baseline: cut ``k - s`` randomly chosen regions by fair coin flips.

    Each sampled element of a chosen region goes to the explicit side with
    probability 1/2; unsampled elements stay on the other side. Singleton
    regions are never chosen.
    """
    _check_k(p, k)
    rng = np.random.default_rng(seed)
    sampled = np.empty(0, np.int64) if samples is None else np.asarray(samples.indices)
    candidates = np.flatnonzero(p.sizes >= 2)
    chosen = set(rng.choice(candidates, size=k - p.s, replace=False).tolist())
    r = p.region_of(sampled)
    splits = []
    for i, region in enumerate(p.regions):
        if i not in chosen:
            splits.append(RegionSplit(region.id))
            continue
        inside = sampled[r == i]
        side = inside[rng.random(inside.size) < 0.5]
        if side.size == 0:
            side = np.array([rng.integers(region.start, region.end)])
        elif side.size == region.size:
            side = np.delete(side, rng.integers(side.size))
        splits.append(RegionSplit(region.id, RANDOM_SPLIT, side))
    return Binning(p, splits)


def random_partition(p: StairDistribution, k: int, seed=None, samples=None) -> ScatteredPartition:
    """Baseline ignoring flat regions: every element lands in one of ``k`` bins uniformly.

    Sampled elements get explicit labels; unsampled elements of each region
    are spread over bins by a multinomial draw of their count.
    """
    if k < 1:
        raise InputError("k must be positive")
    rng = np.random.default_rng(seed)
    sampled = np.empty(0, np.int64) if samples is None else np.asarray(samples.indices, np.int64)
    labels = rng.integers(0, k, size=sampled.size)
    unsampled = p.sizes - np.bincount(p.region_of(sampled), minlength=p.s)
    remainder = np.stack([rng.multinomial(n, np.full(k, 1.0 / k)) for n in unsampled], axis=1)
    return ScatteredPartition(p, k, sampled, labels, remainder)
