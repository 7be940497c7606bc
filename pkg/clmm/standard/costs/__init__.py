"""
costs - a directory to define cost functions to guide optimization
"""

from .contrastive import (HardPositiveContrastive, contrastive_loss,
                          fuse, fuse_batch, hard_positive_count,
                          hard_positive_gradient_ratio,
                          masked_contrastive_loss, positive_probabilities,
                          sample_fusion_weights, select_hard_positives,
                          similarity_contrastive_loss,)
from .distill import (CrossEntropy, Distillation,
                      cross_entropy, distill_loss,)

__all__ = [
    "HardPositiveContrastive", "contrastive_loss", "fuse", "fuse_batch",
    "hard_positive_count", "hard_positive_gradient_ratio",
    "masked_contrastive_loss", "positive_probabilities",
    "sample_fusion_weights", "select_hard_positives",
    "similarity_contrastive_loss",
    "CrossEntropy", "Distillation", "cross_entropy", "distill_loss",
]
