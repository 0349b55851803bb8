"""Mutual information estimators for dependency analysis.

Three MI estimators are provided alongside Pearson correlation: a
Bayesian piece-wise constant model with a Dirichlet prior of arbitrary
exponent (:func:`mi_bayes`), a fixed-bin plug-in histogram
(:func:`mi_fixed_hist`) and an adaptive equiprobable partition
(:func:`mi_adaptive`). A coupled AR(1) benchmark with analytic ground truth
and a tabular ranking pipeline are built on top of them.
"""

from .adaptive import AdaptiveConfig, PartitionNode, build_partition, mi_adaptive, rank_transform
from .benchmark import (ARParams, Method, SweepResult, analytic_mi_coupled_ar, run_sweep,
                        simulate_coupled_ar)
from .binning import (BayesMI, BinCounts, EstimateWithError, histogram_counts,
                      joint_histogram_counts, log_posterior_m, mi_bayes, mi_fixed_hist,
                      optimal_bins, optimal_joint_bins, posterior_entropy,
                      sample_bin_probabilities)
from .core import (LogBase, SeriesPair, correlation, joint_entropy, mutual_information_plugin,
                   normalized_mi, shannon_entropy)
from .errors import (ContractViolationError, DegenerateRangeError, DegenerateSeriesError,
                     DomainError, EmptyInputError, InfodepError, LoadError, OutOfRangeError)
from .ranking import DataTable, DependencyReport, compute_bias, load_table, rank_dependencies

__version__ = "0.1.0"
