"""
core - a directory for the primary functionality exposed by clmm
"""

from .common import (STREAM_FINETUNE, STREAM_INIT, STREAM_PRETRAIN,
                     STREAM_SHUFFLE, STREAM_SPLIT, STREAM_SYNTH,
                     batch_indices, check_finite, copy_params,
                     parameter_count, select_params, stack_modalities,
                     stream_rng, strip_params,)
from .evaluate import (ABLATION_VARIANTS, evaluate_primary, run_ablation,)
from .finetune import (ema_update, finetune_collaborative, finetune_step,
                       init_collab_state,)
from .pretrain import (estimate_qom_prior, pretrain_contrastive,)

__all__ = [
    "STREAM_FINETUNE", "STREAM_INIT", "STREAM_PRETRAIN", "STREAM_SHUFFLE",
    "STREAM_SPLIT", "STREAM_SYNTH",
    "batch_indices", "check_finite", "copy_params", "parameter_count",
    "select_params", "stack_modalities", "stream_rng", "strip_params",
    "ABLATION_VARIANTS", "evaluate_primary", "run_ablation",
    "ema_update", "finetune_collaborative", "finetune_step",
    "init_collab_state",
    "estimate_qom_prior", "pretrain_contrastive",
]
