"""
clmm - a directory for the main package
"""

from .core import (evaluate_primary,
                   finetune_collaborative,
                   pretrain_contrastive,
                   run_ablation,)


__all__ = [
    "evaluate_primary",
    "finetune_collaborative",
    "pretrain_contrastive",
    "run_ablation",
]
