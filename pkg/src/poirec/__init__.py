"""Top-N point-of-interest recommendation that balances sensory
compatibility against category preferences with a per-user weight."""

from .aggregation import Measure, item_compatibility, mc_score
from .aversion import AversionCurve, estimated_aversion, feature_compatibility, ideal_value, ideal_vector
from .dataio import load_dataset, write_dataset
from .domain import (DEFAULT_CATEGORIES, DEFAULT_SCHEMA, AversionDeclaration, Dataset, Feature, FeatureKind,
                     FeatureSchema, ItemProfile, UserProfile, validate)
from .evaluation import cross_validate, make_fold_plan, paired_t_test
from .predictor import (AlgorithmConfig, Family, FittedModel, Objective, RankedList, algorithm_matrix,
                        fit_alpha, fit_model, predict_rating, top_n)
from .synthetic import LatentTruth, SyntheticSpec, generate_synthetic

__version__ = "0.1.0"
