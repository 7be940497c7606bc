"""
augmentation.py - This module defines window augmentations.

Every augmentation draws its parameters once per sample and applies
the same draw to all modalities of the sample, each on its own time grid,
so the modalities stay aligned. Time is normalized to [0, 1] on every grid.
"""

import numpy as np
from scipy.interpolate import interp1d
from scipy.ndimage import uniform_filter1d

from clmm.models.augmentationpolicy import AugmentationPolicy
from clmm.models.errors import ConfigError

def resample_at(signal, positions):
    """
    Linearly interpolate a (channels x T) signal at normalized
    positions in [0, 1].

    Returns:
    resampled :: ndarray (channels x len(positions))
    """
    length = signal.shape[1]
    if length == 1:
        return np.repeat(signal, len(positions), axis=1)
    grid = np.linspace(0., 1., length)
    interpolant = interp1d(grid, signal, kind="linear", axis=1, assume_sorted=True)
    return interpolant(np.clip(positions, 0., 1.))


def _time_grid(modality):
    return np.linspace(0., 1., modality.shape[1])


### TIME WARP ###

def sample_warp_factors(config, rng):
    """
    Draw one speed factor per warp segment, uniform in `config.warp_range`.

    Returns:
    factors :: ndarray (warp_knots + 1)
    """
    lo, hi = config.warp_range
    return rng.uniform(lo, hi, size=config.warp_knots + 1)


def warp_knots(factors):
    """
    Build the piecewise linear warp from segment speed factors.
    Segment k covers [k, k + 1] / (K + 1) of the source and a share of the
    output proportional to its factor; the total duration is unchanged.

    Returns:
    output_knots :: ndarray (K + 2) - u, from 0 to 1
    source_knots :: ndarray (K + 2) - tau_k = k / (K + 1)
    """
    factors = np.asarray(factors, dtype=np.float64)
    segment_count = factors.size
    source_knots = np.arange(segment_count + 1) / segment_count
    output_knots = np.concatenate(([0.], np.cumsum(factors) / np.sum(factors)))
    output_knots[-1] = 1.
    return output_knots, source_knots


def apply_time_warp(window, factors, observer=None):
    """
    Warp every modality of a window with the same knot sequence.

    Arguments:
    window :: clmm.models.datamodels.MultimodalWindow
    factors :: ndarray - segment speed factors
    observer :: (int, ndarray, ndarray) -> None - receives the modality
        index and the knots applied to it

    Returns:
    warped :: clmm.models.datamodels.MultimodalWindow
    """
    output_knots, source_knots = warp_knots(factors)
    modalities = list()
    for j, modality in enumerate(window.modalities):
        if observer is not None:
            observer(j, output_knots, source_knots)
        positions = np.interp(_time_grid(modality), output_knots, source_knots)
        modalities.append(resample_at(modality, positions))
    #ENDFOR
    return window.replace(modalities=modalities)


def time_warp(window, config, rng, observer=None):
    return apply_time_warp(window, sample_warp_factors(config, rng), observer=observer)


### RANDOM CROP ###

def sample_crop_offset(config, rng):
    """
    Draw the relative start of the crop, uniform in [0, 1 - crop_fraction].
    """
    if not 0 < config.crop_fraction <= 1:
        raise ConfigError("The crop fraction must lie in (0, 1], got {}."
                          "".format(config.crop_fraction))
    return rng.uniform(0., 1. - config.crop_fraction)


def apply_random_crop(window, offset, fraction, observer=None):
    """
    Keep [offset, offset + fraction] of every modality and stretch it back
    to the full length.
    """
    if not 0 < fraction <= 1:
        raise ConfigError("The crop fraction must lie in (0, 1], got {}.".format(fraction))
    modalities = list()
    for j, modality in enumerate(window.modalities):
        if observer is not None:
            observer(j, offset, fraction)
        positions = offset + fraction * _time_grid(modality)
        modalities.append(resample_at(modality, positions))
    #ENDFOR
    return window.replace(modalities=modalities)


def random_crop(window, config, rng, observer=None):
    return apply_random_crop(window, sample_crop_offset(config, rng),
                             config.crop_fraction, observer=observer)


### OTHER AUGMENTATIONS ###

def time_shift(window, config, rng, observer=None):
    """
    Shift every modality by the same fraction of the window, holding the
    edge values.
    """
    shift = rng.uniform(-config.shift_fraction, config.shift_fraction)
    modalities = list()
    for j, modality in enumerate(window.modalities):
        if observer is not None:
            observer(j, shift)
        modalities.append(resample_at(modality, _time_grid(modality) - shift))
    #ENDFOR
    return window.replace(modalities=modalities)


def channel_scale(window, config, rng, observer=None):
    """
    Scale channel c of every modality by the same factor s_c.
    """
    lo, hi = config.scale_range
    channel_count = max(modality.shape[0] for modality in window.modalities)
    scales = rng.uniform(lo, hi, size=channel_count)
    modalities = list()
    for j, modality in enumerate(window.modalities):
        if observer is not None:
            observer(j, scales)
        modalities.append(modality * scales[:modality.shape[0], None])
    #ENDFOR
    return window.replace(modalities=modalities)


def smoothing(window, config, rng=None, observer=None):
    """
    Moving average over `smoothing_width` steps.
    """
    modalities = list()
    for j, modality in enumerate(window.modalities):
        if observer is not None:
            observer(j, config.smoothing_width)
        modalities.append(uniform_filter1d(modality, size=config.smoothing_width,
                                           axis=1, mode="nearest"))
    #ENDFOR
    return window.replace(modalities=modalities)


def noise(window, config, rng, observer=None):
    """
    Add gaussian noise with standard deviation `noise_std`.
    """
    modalities = list()
    for j, modality in enumerate(window.modalities):
        if observer is not None:
            observer(j, config.noise_std)
        modalities.append(modality + rng.normal(0., config.noise_std, size=modality.shape))
    #ENDFOR
    return window.replace(modalities=modalities)


_AUGMENTATIONS = {
    AugmentationPolicy.TIME_WARP: time_warp,
    AugmentationPolicy.RANDOM_CROP: random_crop,
    AugmentationPolicy.TIME_SHIFT: time_shift,
    AugmentationPolicy.CHANNEL_SCALE: channel_scale,
    AugmentationPolicy.SMOOTHING: smoothing,
    AugmentationPolicy.NOISE: noise,
}


def augment(window, config, rng, observer=None):
    """
    Apply the augmentation `config.method` selects.

    Arguments:
    window :: clmm.models.datamodels.MultimodalWindow
    config :: clmm.models.configs.AugmentationConfig
    rng :: numpy.random.Generator
    observer :: callable - receives the parameters applied to each modality

    Returns:
    augmented :: clmm.models.datamodels.MultimodalWindow
    """
    if config.method == AugmentationPolicy.NONE:
        return window.replace()
    return _AUGMENTATIONS[config.method](window, config, rng, observer=observer)
