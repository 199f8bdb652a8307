from .forest import ForestModel, ForestParams, train_forest
from .metrics import EvalReport, evaluate
from .mlp import MlpModel, MlpParams, TrainingCurve, train_mlp
from .search import cross_validate, kfold_indices, random_search

__all__ = [
    "ForestModel", "ForestParams", "train_forest",
    "EvalReport", "evaluate",
    "MlpModel", "MlpParams", "TrainingCurve", "train_mlp",
    "cross_validate", "kfold_indices", "random_search",
]
