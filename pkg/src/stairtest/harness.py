"""Experiment drivers: ranking validation of binnings and granularity evaluation.

Every random stream is derived from the master seed and integer tags
(experiment, trial, model, level), so reports are reproducible bit for bit
and independent of execution order.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .binning import binned_tv, optimize_binning, random_binning, random_partition, induce, tv
from .closeness import TestConfig, highest_granularity
from .errors import InputError
from .io import read_sample_indices
from .space import SparseSampleSet, empirical_pmf, tv_distance_sparse
from .stair import RegionUniform, StairDistribution, StairSpec
from .synthetic import DEFAULT_SUITE, WITHIN_REGION, make_suite

VERSION = 1

# Stream tags put sample draws and binning baselines on separate RNG streams from the tests.
_SAMPLES, _BASELINE, _TEST, _CI = 1, 2, 3, 4


def derive_seed(*tags: int) -> int:
    """A 32-bit seed derived from the master seed and integer tags."""
    return int(np.random.SeedSequence([int(t) for t in tags]).generate_state(1)[0])


def kendall_tau(ranking_a, ranking_b) -> float:
    """Kendall tau-b between two rankings of the same labels.

    Each argument is either a sequence of labels ordered best-first or a
    mapping label -> score. Tied scores are handled by the tau-b correction;
    when one side is entirely tied the coefficient is undefined and 0.0 is
    returned.
    """
    a, b = _as_scores(ranking_a), _as_scores(ranking_b)
    if set(a) != set(b):
        raise InputError(f"rankings cover different labels: {sorted(set(a) ^ set(b), key=str)}")
    if len(a) < 2:
        raise InputError("kendall tau needs at least two labels")
    labels = sorted(a, key=str)
    tau = stats.kendalltau([a[x] for x in labels], [b[x] for x in labels], variant="b").statistic
    return 0.0 if np.isnan(tau) else float(tau)


def _as_scores(ranking) -> dict:
    if isinstance(ranking, Mapping):
        return dict(ranking)
    ranking = list(ranking)
    if len(set(ranking)) != len(ranking):
        raise InputError("a ranking lists each label once")
    return {label: pos for pos, label in enumerate(ranking)}


def bootstrap_mean_ci(values, level: float = 0.9, reps: int = 2000, seed: int = 0):
    """Mean of ``values`` with a percentile bootstrap interval."""
    values = np.asarray(values, dtype=np.float64)
    rng = np.random.default_rng(seed)
    means = values[rng.integers(0, values.size, size=(reps, values.size))].mean(axis=1)
    tail = (1 - level) / 2
    lo, hi = np.quantile(means, [tail, 1 - tail])
    return float(values.mean()), float(lo), float(hi)


@dataclass
class ExperimentConfig:
    """Everything needed to rerun an experiment."""

    stair: StairSpec = field(default_factory=StairSpec)
    suite: tuple[float, ...] = DEFAULT_SUITE
    suite_mode: str = WITHIN_REGION
    donor: Optional[int] = None
    samples: tuple[str, ...] = ()
    m: int = 1000
    trials: int = 50
    k_min: Optional[int] = None
    k_max: Optional[int] = None
    test: TestConfig = field(default_factory=TestConfig)
    holdout: bool = False
    random_mode: str = "region"
    seed: int = 0
    output_dir: str = "runs"

    def __post_init__(self):
        if self.trials < 1:
            raise InputError("trials must be at least 1")
        if self.m < 1:
            raise InputError("m must be at least 1")
        if self.random_mode not in ("region", "scattered"):
            raise InputError("random_mode must be 'region' or 'scattered'")
        for f in self.samples:
            if not Path(f).is_file():
                raise InputError(f"sample file {f} does not exist")

    def k_range(self, s: int) -> tuple[int, int]:
        lo = s if self.k_min is None else self.k_min
        hi = 2 * s if self.k_max is None else self.k_max
        if not s <= lo <= hi <= 2 * s:
            raise InputError(f"k range [{lo}, {hi}] must lie inside [s, 2s] = [{s}, {2 * s}]")
        return lo, hi

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["stair"] = self.stair.to_dict()
        d["test"] = asdict(self.test)
        d["suite"] = list(self.suite)
        d["samples"] = list(self.samples)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InputError(f"unknown config fields: {sorted(unknown)}")
        d = dict(d)
        if "stair" in d:
            d["stair"] = StairSpec.from_dict(d["stair"])
        if "test" in d:
            bad = set(d["test"]) - {f.name for f in fields(TestConfig)}
            if bad:
                raise InputError(f"unknown test fields: {sorted(bad)}")
            d["test"] = TestConfig(**d["test"])
        for key in ("suite", "samples"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)

    def resolved(self) -> "ExperimentConfig":
        return replace(self, stair=self.stair.resolved())


class SyntheticSource:
    """A model given as a region-uniform pmf; each trial draws fresh samples."""

    def __init__(self, label: str, dist: RegionUniform, tv_to_reference: Optional[float] = None):
        self.label = label
        self.dist = dist
        self.tv_to_reference = tv_to_reference

    def draw(self, trial: int, m: int, seed: int) -> SparseSampleSet:
        return self.dist.sample(m, seed)

    def describe(self) -> dict:
        d = {"kind": "synthetic", "label": self.label}
        if hasattr(self.dist, "describe"):
            d.update(self.dist.describe())
        return d


class FileSource:
    """A model given as a sample file; trial ``t`` uses lines ``[t*m, (t+1)*m)``."""

    def __init__(self, label: str, path, p: StairDistribution):
        self.label = label
        self.path = str(path)
        self.space, self.indices = read_sample_indices(path, p.space)

    def check(self, trials: int, m: int) -> None:
        need = trials * m
        if self.indices.size < need:
            raise InputError(f"{self.path} holds {self.indices.size} samples; "
                             f"{trials} trials of m={m} need {need}")

    def draw(self, trial: int, m: int, seed: int) -> SparseSampleSet:
        block = self.indices[trial * m:(trial + 1) * m]
        return SparseSampleSet.from_indices(self.space, block)

    def describe(self) -> dict:
        return {"kind": "file", "label": self.label, "path": self.path,
                "available": int(self.indices.size)}


def file_sources(paths: Sequence[str], p: StairDistribution) -> list[FileSource]:
    out = []
    for path in paths:
        out.append(FileSource(Path(path).stem, path, p))
    labels = [s.label for s in out]
    if len(set(labels)) != len(labels):
        raise InputError(f"sample files must have distinct names, got {labels}")
    return out


def suite_sources(p: StairDistribution, config: ExperimentConfig) -> list[SyntheticSource]:
    suite = make_suite(p, config.suite, config.suite_mode, donor=config.donor)
    return [SyntheticSource(f"q{i + 1}", q, q.exact_tv()) for i, q in enumerate(suite)]


def run_ranking_validation(config: ExperimentConfig) -> dict:
    """Rank the synthetic suite by binned empirical TV and score it with Kendall tau.

    For every trial, level ``k`` and method (``optimized`` via the error
    maximizing binning, ``random`` via the baseline) the models are ranked by
    TV between the binned reference and binned samples, and compared with the
    order of their true distances.
    """
    p = config.stair.build()
    lo, hi = config.k_range(p.s)
    models = suite_sources(p, config)
    truth = {src.label: src.tv_to_reference for src in models}
    methods = ("optimized", "random")
    per_trial = []
    for t in range(config.trials):
        draws = [src.draw(t, config.m, derive_seed(config.seed, _SAMPLES, t, i))
                 for i, src in enumerate(models)]
        rows = {}
        for k in range(lo, hi + 1):
            for method in methods:
                scores = {}
                for i, (src, samples) in enumerate(zip(models, draws)):
                    if method == "optimized":
                        b = optimize_binning(p, samples, k)
                    else:
                        seed = derive_seed(config.seed, _BASELINE, t, i, k)
                        maker = random_binning if config.random_mode == "region" else random_partition
                        b = maker(p, k, seed, samples)
                    scores[src.label] = tv(induce(b, p), induce(b, empirical_pmf(samples)))
                rows[f"{method}/{k}"] = {"binned_tv": scores, "tau": kendall_tau(truth, scores)}
        per_trial.append(rows)

    summary = {}
    for k in range(lo, hi + 1):
        for method in methods:
            taus = [row[f"{method}/{k}"]["tau"] for row in per_trial]
            mean, ci_lo, ci_hi = bootstrap_mean_ci(taus, 0.9, seed=derive_seed(config.seed, _CI, k))
            summary.setdefault(str(k), {})[method] = {"mean_tau": mean, "ci90": [ci_lo, ci_hi]}
    return {"experiment": "validate-binning", "version": VERSION,
            "config": config.resolved().to_dict(), "truth_tv": truth,
            "models": [src.describe() for src in models],
            "summary": summary, "trials": per_trial}


def run_granularity_eval(config: ExperimentConfig, models=None) -> dict:
    """Run the granularity sweep for every model and trial.

    ``models`` defaults to the sample files of the config or, failing that,
    the synthetic suite. File-backed models must hold ``trials * m`` samples.
    """
    p = config.stair.build()
    lo, hi = config.k_range(p.s)
    if models is None:
        models = file_sources(config.samples, p) if config.samples else suite_sources(p, config)
    for src in models:
        if isinstance(src, FileSource):
            src.check(config.trials, config.m)

    report_models = []
    for i, src in enumerate(models):
        results, tvs = [], []
        for t in range(config.trials):
            samples = src.draw(t, config.m, derive_seed(config.seed, _SAMPLES, t, i))
            test = replace(config.test, seed=derive_seed(config.seed, _TEST, t, i))
            res = highest_granularity(p, samples, test, label=src.label, holdout=config.holdout,
                                      k_min=lo, k_max=hi)
            results.append(res)
            tvs.append(tv_distance_sparse(p, empirical_pmf(samples)))
        passed = [r.highest_passed for r in results]
        hist = {str(k): passed.count(k) for k in range(lo - 1, hi + 1)}
        report_models.append({
            "label": src.label,
            "source": src.describe(),
            "histogram_highest_passed": hist,
            "mean_highest_passed": float(np.mean(passed)),
            "passed_all": sum(r.failed_at is None for r in results),
            "empirical_tv": tvs,
            "mean_empirical_tv": float(np.mean(tvs)),
            "trials": [r.to_dict() for r in results],
        })
    return {"experiment": "granularity", "version": VERSION,
            "config": config.resolved().to_dict(), "s": p.s, "k_range": [lo, hi],
            "distance": config.test.distance, "models": report_models}


def evaluate_files(p: StairDistribution, paths: Sequence[str], test: TestConfig,
                   holdout: bool = False, k_min=None, k_max=None) -> list[dict]:
    """One granularity sweep per sample file, using every sample in the file."""
    out = []
    for src in file_sources(paths, p):
        samples = SparseSampleSet.from_indices(p.space, src.indices)
        if samples.m < 2:
            raise InputError(f"{src.path} needs at least 2 samples")
        res = highest_granularity(p, samples, test, label=src.label, holdout=holdout,
                                  k_min=k_min, k_max=k_max)
        d = res.to_dict()
        d["path"] = src.path
        d["m"] = samples.m
        d["empirical_tv"] = tv_distance_sparse(p, empirical_pmf(samples))
        out.append(d)
    return out


def binned_tv_curve(p: StairDistribution, samples: SparseSampleSet) -> dict:
    """Binned TV of the optimized binning at every level; handy for plots."""
    return {k: binned_tv(optimize_binning(p, samples, k), p, samples)
            for k in range(p.s, 2 * p.s + 1)}
