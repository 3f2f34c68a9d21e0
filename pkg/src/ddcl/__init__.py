"""Deep dual competitive learning: prototype clustering with soft competitive
assignments, loss-decomposition diagnostics, batch and streaming trainers,
and an energy-certified reduced flow."""

from .assignment import hard_assign, hard_assign_batch, soft_assign, soft_assign_batch
from .losses import LossWeights, ols_loss, quantization_loss, total_loss, variance_term
from .metrics import evaluate
from .trainer import RunConfig, train

__version__ = "0.1.0"

__all__ = [
    "LossWeights", "RunConfig", "evaluate", "hard_assign", "hard_assign_batch",
    "ols_loss", "quantization_loss", "soft_assign", "soft_assign_batch",
    "total_loss", "train", "variance_term",
]
