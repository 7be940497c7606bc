"""
networks - a directory for the stage-1 encoder and the stage-2 classifier
"""

from .encoder import (attention_heads, attention_maps, cnn_forward,
                      diff_attention, differential_attention_map, embed,
                      encode, encoder_parameter_count, init_encoder_params,
                      init_projection_params, project,)
from .dualbranch import (align_sequences, attention_weights, bigru_forward,
                         class_count_of, classify, dual_branch_forward,
                         init_dual_branch_params, mix_quality_weights,
                         phi_input_dim, predict, qom_prior, qom_scores,
                         quality_weights,)

__all__ = [
    "attention_heads", "attention_maps", "cnn_forward", "diff_attention",
    "differential_attention_map", "embed", "encode", "encoder_parameter_count",
    "init_encoder_params", "init_projection_params", "project",
    "align_sequences", "attention_weights", "bigru_forward", "class_count_of",
    "classify", "dual_branch_forward", "init_dual_branch_params",
    "mix_quality_weights", "phi_input_dim", "predict", "qom_prior",
    "qom_scores", "quality_weights",
]
