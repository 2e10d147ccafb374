"""Granular association rule mining for cold-start recommendation."""

__version__ = "0.1.0"

from .core import (
    MMER,
    AttributeSchema,
    BinaryRelation,
    Granule,
    InformationSystem,
    extension,
    finer_than,
    make_granule,
    pair_count,
)
from .errors import (
    DataFormatError,
    GranrecError,
    NoGranulesError,
    SchemaMismatchError,
    StoreFormatError,
)
from .granulation import GranuleSet, enumerate_granules, match
from .rules import GranularRule, RuleStore, load_store, save_store, train
from .recommend import (
    Recommendation,
    RecommendationEntry,
    recommend,
    recommend_rows,
    recommended_items,
)
from .datasets import MovieLensConfig, export_csv_mmer, load_csv_mmer, load_movielens
from .experiments import (
    AccuracyReport,
    Scenario,
    SweepCell,
    evaluate,
    split,
    sweep,
    write_report_csv,
)

__all__ = [
    "AccuracyReport",
    "AttributeSchema",
    "BinaryRelation",
    "DataFormatError",
    "GranrecError",
    "GranularRule",
    "Granule",
    "GranuleSet",
    "InformationSystem",
    "MMER",
    "MovieLensConfig",
    "NoGranulesError",
    "Recommendation",
    "RecommendationEntry",
    "RuleStore",
    "Scenario",
    "SchemaMismatchError",
    "StoreFormatError",
    "SweepCell",
    "enumerate_granules",
    "evaluate",
    "export_csv_mmer",
    "extension",
    "finer_than",
    "load_csv_mmer",
    "load_movielens",
    "load_store",
    "make_granule",
    "match",
    "pair_count",
    "recommend",
    "recommend_rows",
    "recommended_items",
    "save_store",
    "split",
    "sweep",
    "train",
    "write_report_csv",
]
