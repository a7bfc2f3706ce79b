"""Hybrid follow recommender for microblog corpora in the KDD Cup 2012 Track 1 layout."""

from .config import PipelineConfig, load_config, parse_config
from .dataset import Dataset, DataError, load_dataset
from .evaluation import ap_at_k, map_at_k
from .mining import KeywordClassSet, MiningConfig, mine_keyword_classes
from .pipeline import run_pipeline
from .taxonomy import UserClass, classify_user

__all__ = [
    "DataError",
    "Dataset",
    "KeywordClassSet",
    "MiningConfig",
    "PipelineConfig",
    "UserClass",
    "ap_at_k",
    "classify_user",
    "load_config",
    "load_dataset",
    "map_at_k",
    "mine_keyword_classes",
    "parse_config",
    "run_pipeline",
]

__version__ = "0.1.0"
