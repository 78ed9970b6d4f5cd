"""Classification trees, random forests and a small MLP for NBA team-season data."""

from courtside.dataset import FEATURES, Dataset, TeamSeason, parse_csv, split
from courtside.metrics import ConfusionMatrix, accuracy, confusion, majority_baseline

__all__ = [
    "FEATURES",
    "ConfusionMatrix",
    "Dataset",
    "TeamSeason",
    "accuracy",
    "confusion",
    "majority_baseline",
    "parse_csv",
    "split",
]

__version__ = "0.1.0"
