"""Quantile-based probability integral transform fuzzy partitioning for
multi-way fuzzy decision trees."""
from .dataset import (AttributeSchema, DataError, Dataset, FoldAssignment, Schema,
                      load_csv, load_schema, parse_schema, split_by_fold, stratified_folds,
                      write_csv)
from .fmdt import (FMDTModel, Hyperparameters, Internal, Leaf, association_degrees,
                   check_invariants, class_weights, complexity, fuzzy_entropy, fuzzy_info_gain,
                   grow_tree, matching_degree, predict, train)
from .kernels import BACKEND
from .metrics import (ConfusionMatrix, EvaluationReport, accuracy, auc, confusion,
                      cross_validate, rates)
from .partition import (FuzzyPartition, TriangularFuzzySet, build_uniform_partition,
                        map_to_original, membership, memberships)
from .pit import QuantileTable, cdf, compute_quantiles, quantile_fn, transform_dataset

__version__ = "0.1.0"
