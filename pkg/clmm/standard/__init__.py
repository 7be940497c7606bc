"""
standard - a directory for standard definitions
"""

from .costs import (CrossEntropy, Distillation, HardPositiveContrastive,
                    contrastive_loss, cross_entropy, distill_loss,
                    fuse, fuse_batch, hard_positive_count,
                    hard_positive_gradient_ratio, masked_contrastive_loss,
                    positive_probabilities, sample_fusion_weights,
                    select_hard_positives, similarity_contrastive_loss,)

from .data import (apply_random_crop, apply_time_warp, augment,
                   channel_scale, draw_mixing_matrices, load_dataset,
                   noise, random_crop, read_manifest, resample_at,
                   sample_crop_offset, sample_warp_factors, save_dataset,
                   select_modalities, select_split, shuffle_labels,
                   smoothing, spectral_classify, split, synth_generate,
                   synthetic_manifest_entries, time_shift, time_warp,
                   warp_knots,)

from .functions import (conv1d, cosine_similarity_matrix, gelu,
                        glorot_uniform, l2_normalize, layer_norm,
                        linear_interpolation_matrix, log_softmax,
                        matmul, rms_norm, sigmoid, softmax,)

from .metrics import (F1_AVERAGES, accuracy, cohen_kappa, confusion_matrix,
                      format_report, macro_f1, metrics_report, per_class_f1,)

from .networks import (align_sequences, attention_heads, attention_maps,
                       attention_weights, bigru_forward, class_count_of,
                       classify, cnn_forward, diff_attention,
                       differential_attention_map, dual_branch_forward,
                       embed, encode, encoder_parameter_count,
                       init_dual_branch_params, init_encoder_params,
                       init_projection_params, mix_quality_weights,
                       phi_input_dim, predict, project, qom_prior,
                       qom_scores, quality_weights,)

from .optimizers import (SGD,)

from .utils import (CustomJSONEncoder, backward, decode_checkpoint,
                    dump_json, encode_checkpoint, ensure_parent_dir,
                    finite_diff_gradient, generate_save_file_path,
                    load_checkpoint, relative_error, save_checkpoint,)

__all__ = [
    "CrossEntropy", "Distillation", "HardPositiveContrastive",
    "contrastive_loss", "cross_entropy", "distill_loss", "fuse", "fuse_batch",
    "hard_positive_count", "hard_positive_gradient_ratio",
    "masked_contrastive_loss", "positive_probabilities",
    "sample_fusion_weights", "select_hard_positives",
    "similarity_contrastive_loss",
    "apply_random_crop", "apply_time_warp", "augment", "channel_scale",
    "draw_mixing_matrices", "load_dataset", "noise", "random_crop",
    "read_manifest", "resample_at", "sample_crop_offset",
    "sample_warp_factors", "save_dataset", "select_modalities",
    "select_split", "shuffle_labels", "smoothing", "spectral_classify",
    "split", "synth_generate", "synthetic_manifest_entries", "time_shift",
    "time_warp", "warp_knots",
    "conv1d", "cosine_similarity_matrix", "gelu", "glorot_uniform",
    "l2_normalize", "layer_norm", "linear_interpolation_matrix",
    "log_softmax", "matmul", "rms_norm", "sigmoid", "softmax",
    "F1_AVERAGES", "accuracy", "cohen_kappa", "confusion_matrix",
    "format_report", "macro_f1", "metrics_report", "per_class_f1",
    "align_sequences", "attention_heads", "attention_maps",
    "attention_weights", "bigru_forward", "class_count_of", "classify",
    "cnn_forward", "diff_attention", "differential_attention_map",
    "dual_branch_forward", "embed", "encode", "encoder_parameter_count",
    "init_dual_branch_params", "init_encoder_params",
    "init_projection_params", "mix_quality_weights", "phi_input_dim",
    "predict", "project", "qom_prior", "qom_scores", "quality_weights",
    "SGD",
    "CustomJSONEncoder", "backward", "decode_checkpoint", "dump_json",
    "encode_checkpoint", "ensure_parent_dir", "finite_diff_gradient",
    "generate_save_file_path", "load_checkpoint", "relative_error",
    "save_checkpoint",
]
