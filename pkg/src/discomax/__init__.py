"""Supervised dimensionality reduction by distance-correlation maximization."""

from .dcor import sample_dcorr2, sample_dcov2
from .solver import SolverConfig, discomax, objective_f
from .pipeline import EmbeddingModel, fit_embedding_model, kfold_cv, predict
from .baselines import save, sir

__version__ = "0.1.0"

__all__ = [
    "SolverConfig",
    "discomax",
    "objective_f",
    "sample_dcorr2",
    "sample_dcov2",
    "EmbeddingModel",
    "fit_embedding_model",
    "predict",
    "kfold_cv",
    "sir",
    "save",
]
