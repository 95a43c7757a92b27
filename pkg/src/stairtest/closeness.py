"""Closeness test against a known binned reference, and the granularity sweep.

The statistic is the unbiased estimate of ``sum_A (p_A - q_A)**2`` obtained by
keeping the exact reference terms and estimating ``sum_A q_A**2`` from sample
collisions. The decision uses a one-sided percentile-bootstrap lower bound.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from .binning import induce, optimize_binning
from .errors import InputError
from .space import SparseSampleSet, empirical_pmf
from .stair import StairDistribution

L2 = "l2"
TV = "tv"

# Mixed into seeds so the held-out split never shares a stream with a test.
_SPLIT_STREAM = 7_919


@dataclass(frozen=True)
class TestConfig:
    """Settings of one closeness test.

    ``distance`` selects the tested quantity: ``"l2"`` is the squared l2
    distance (default), ``"tv"`` the plug-in binned total variation.
    ``bonferroni`` divides ``delta`` by the number of granularity levels in
    a sweep.
    """

    __test__ = False

    epsilon_test: float = 0.1
    delta: float = 0.05
    bootstrap_reps: int = 1000
    seed: int = 0
    distance: str = L2
    bonferroni: bool = False

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise InputError(f"delta must lie in (0, 1), got {self.delta}")
        if self.epsilon_test < 0:
            raise InputError(f"epsilon_test must be non-negative, got {self.epsilon_test}")
        if self.bootstrap_reps < 1:
            raise InputError("bootstrap_reps must be positive")
        if self.distance not in (L2, TV):
            raise InputError(f"distance must be 'l2' or 'tv', got {self.distance!r}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise InputError("seed must be a non-negative integer")


@dataclass(frozen=True)
class TestOutcome:
    __test__ = False

    k: int
    statistic: float
    lower_bound: float
    reject: bool


@dataclass
class GranularityResult:
    """Outcome of the granularity sweep for one model.

    ``failed_at`` is the first rejecting ``k`` or ``None``; ``highest_passed``
    is ``failed_at - 1`` (``s - 1`` if even the coarsest level rejects) or
    ``k_max`` when nothing rejects.
    """

    label: str
    s: int
    outcomes: list[TestOutcome] = field(default_factory=list)
    failed_at: Optional[int] = None
    highest_passed: int = 0
    distance: str = L2

    def to_dict(self) -> dict:
        d = asdict(self)
        d["failed_at"] = "none" if self.failed_at is None else self.failed_at
        return d


def _check_counts(p_binned, bin_counts, m):
    p_binned = np.asarray(p_binned, dtype=np.float64)
    bin_counts = np.asarray(bin_counts)
    if m < 2:
        raise InputError("the collision statistic needs at least 2 samples")
    if p_binned.shape != bin_counts.shape[-1:]:
        raise InputError("p_binned and bin_counts must have the same number of bins")
    if np.any(bin_counts.sum(axis=-1) != m):
        raise InputError(f"bin counts do not sum to m={m}")
    if abs(p_binned.sum() - 1.0) > 1e-9:
        raise InputError("p_binned does not sum to 1")
    return p_binned, bin_counts


def l2_statistic(p_binned, bin_counts, m: int):
    """Unbiased estimate of the squared l2 distance between ``p`` and the sampled ``q``.

    Works on a single count vector or a stack of them (last axis = bins).
    """
    p_binned, c = _check_counts(p_binned, bin_counts, m)
    c = c.astype(np.float64)
    collisions = (c * (c - 1)).sum(axis=-1) / (m * (m - 1))
    return (p_binned @ p_binned) - 2.0 * (c @ p_binned) / m + collisions


def tv_statistic(p_binned, bin_counts, m: int):
    p_binned, c = _check_counts(p_binned, bin_counts, m)
    return 0.5 * np.abs(p_binned - c / m).sum(axis=-1)


def _statistic(distance):
    return l2_statistic if distance == L2 else tv_statistic


def closeness_test(p_binned, bin_counts, m: int, config: TestConfig = TestConfig()) -> TestOutcome:
    """Test ``H0: d(p, q) < epsilon_test`` on binned data.

    The bootstrap resamples the bin counts from their empirical frequencies;
    its stream is seeded from ``(config.seed, k)`` so a given level always
    sees the same replicates. ``H0`` is rejected when the ``delta``-quantile
    of the replicated statistic exceeds ``epsilon_test``.
    """
    stat = _statistic(config.distance)
    bin_counts = np.asarray(bin_counts, dtype=np.int64)
    value = float(stat(p_binned, bin_counts, m))
    k = bin_counts.size
    rng = np.random.default_rng([config.seed, k])
    boot = rng.multinomial(m, bin_counts / m, size=config.bootstrap_reps)
    lower = float(np.quantile(stat(p_binned, boot, m), config.delta))
    return TestOutcome(k=k, statistic=value, lower_bound=lower,
                       reject=bool(lower > config.epsilon_test))


def split_samples(samples: SparseSampleSet, seed: int):
    """Split ``samples`` into disjoint halves (selection, test) without replacement."""
    rng = np.random.default_rng([seed, _SPLIT_STREAM])
    test_counts = rng.multivariate_hypergeometric(np.asarray(samples.counts), samples.m // 2)
    select_counts = samples.counts - test_counts
    keep_t, keep_s = test_counts > 0, select_counts > 0
    test = SparseSampleSet(samples.space, samples.indices[keep_t], test_counts[keep_t])
    select = SparseSampleSet(samples.space, samples.indices[keep_s], select_counts[keep_s])
    return select, test


def highest_granularity(p: StairDistribution, samples: SparseSampleSet,
                        config: TestConfig = TestConfig(), label: str = "q",
                        holdout: bool = False, k_min: Optional[int] = None,
                        k_max: Optional[int] = None) -> GranularityResult:
    """Sweep ``k`` from coarse to fine and stop at the first rejection.

    The same samples choose each binning and feed its test, unless
    ``holdout`` is set, in which case half of them choose and the other half
    test.
    """
    s = p.s
    k_min = s if k_min is None else k_min
    k_max = 2 * s if k_max is None else k_max
    if not s <= k_min <= k_max <= 2 * s:
        raise InputError(f"k range [{k_min}, {k_max}] must lie inside [s, 2s] = [{s}, {2 * s}]")
    if samples.space != p.space:
        raise InputError("samples live on a different space than p")
    if holdout:
        select, test = split_samples(samples, config.seed)
    else:
        select = test = samples
    if config.bonferroni:
        config = replace(config, delta=config.delta / (k_max - k_min + 1))

    q_hat = empirical_pmf(select)
    result = GranularityResult(label=label, s=s, distance=config.distance)
    for k in range(k_min, k_max + 1):
        binning = optimize_binning(p, q_hat, k)
        outcome = closeness_test(induce(binning, p), induce(binning, test), test.m, config)
        result.outcomes.append(outcome)
        if outcome.reject:
            result.failed_at = k
            break
    result.highest_passed = k_max if result.failed_at is None else result.failed_at - 1
    return result
