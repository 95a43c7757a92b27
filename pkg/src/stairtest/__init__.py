"""Evaluate categorical generative models against a known stair distribution.

The space is binned so that the reference loses nothing while the gap to the
model's samples is as large as possible, and a closeness test is run on the
binned distributions at increasing granularity.
"""

from .binning import (Binning, RegionSplit, ScatteredPartition, binned_tv,
                      binning_error_to_reference, in_error_family, induce, optimize_binning,
                      random_binning, random_partition)
from .closeness import (GranularityResult, TestConfig, TestOutcome, closeness_test,
                        highest_granularity, l2_statistic)
from .errors import ConstructionError, InputError
from .harness import (ExperimentConfig, kendall_tau, run_granularity_eval,
                      run_ranking_validation)
from .io import export_empirical_pmf, generate_dataset, read_samples, write_samples
from .space import (CategoricalSpace, SparsePmf, SparseSampleSet, decode, empirical_pmf, encode,
                    l2_squared_sparse, tv_distance_sparse)
from .stair import FlatRegion, StairDistribution, StairSpec, build_stair, factorial_support_ratio
from .synthetic import PerturbedDistribution, make_suite, perturb

__version__ = "0.1.0"
