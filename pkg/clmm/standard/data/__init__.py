"""
data - a directory for dataset io, augmentation, synthetic data and splitting
"""

from .augmentation import (apply_random_crop, apply_time_warp, augment,
                           channel_scale, noise, random_crop, resample_at,
                           sample_crop_offset, sample_warp_factors,
                           smoothing, time_shift, time_warp, warp_knots,)
from .dataset import (apply_normalization, load_dataset, normalization_stats,
                      read_manifest, save_dataset, select_modalities,)
from .split import (select_split, split,)
from .synthetic import (draw_mixing_matrices, shuffle_labels,
                        spectral_classify, synth_generate,
                        synthetic_manifest_entries,)

__all__ = [
    "apply_random_crop", "apply_time_warp", "augment", "channel_scale",
    "noise", "random_crop", "resample_at", "sample_crop_offset",
    "sample_warp_factors", "smoothing", "time_shift", "time_warp", "warp_knots",
    "apply_normalization", "load_dataset", "normalization_stats",
    "read_manifest", "save_dataset", "select_modalities",
    "select_split", "split",
    "draw_mixing_matrices", "shuffle_labels", "spectral_classify",
    "synth_generate", "synthetic_manifest_entries",
]
