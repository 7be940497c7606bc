"""
synthetic.py - This module generates a synthetic multimodal activity
dataset with cross-modal structure, plus the oracles used to check it.
"""

import numpy as np

from clmm.models.datamodels import MultimodalWindow
from clmm.models.errors import ConfigError

_MAX_MIXING_DRAWS = 100

def draw_mixing_matrices(spec, rng):
    """
    Draw one full rank (channels x latent_dim) mixing matrix per modality,
    or validate the matrices `spec` provides.

    Returns:
    matrices :: list(ndarray)
    """
    if spec.mixing_matrices is not None:
        matrices = [np.asarray(matrix, dtype=np.float64) for matrix in spec.mixing_matrices]
        for j, matrix in enumerate(matrices):
            if np.linalg.matrix_rank(matrix) < min(matrix.shape):
                raise ConfigError("synth.mixing_matrices[{}] is not full rank.".format(j))
        #ENDFOR
        return matrices
    matrices = list()
    for channel_count in spec.channels:
        for _ in range(_MAX_MIXING_DRAWS):
            matrix = rng.normal(0., 1., size=(channel_count, spec.latent_dim))
            if np.linalg.matrix_rank(matrix) == min(matrix.shape):
                break
        #ENDFOR
        matrices.append(matrix)
    #ENDFOR
    return matrices


def latent_trajectory(spec, class_index, phases):
    """
    Sum the class sinusoids: z_k(t) = A[c, k] sin(2 pi f[c, k] t / T + phase_k).

    Returns:
    latent :: ndarray (latent_dim x window_length)
    """
    t = np.arange(spec.window_length) / spec.window_length
    frequencies = np.asarray(spec.frequencies[class_index])[:, None]
    amplitudes = np.asarray(spec.amplitudes[class_index])[:, None]
    return amplitudes * np.sin(2 * np.pi * frequencies * t[None, :] + phases[:, None])


def synth_generate(spec, rng):
    """
    Generate the labeled sample pool. Each sample draws a latent phase
    jitter, maps the class latent trajectory through every modality's
    mixing matrix, and adds gaussian noise per modality.

    Arguments:
    spec :: clmm.models.configs.SyntheticSpec
    rng :: numpy.random.Generator

    Returns:
    windows :: list(clmm.models.datamodels.MultimodalWindow) - in a
        shuffled order, ids "s00000", ...
    """
    matrices = draw_mixing_matrices(spec, rng)
    labels = np.repeat(np.arange(spec.class_count), spec.samples_per_class)
    labels = labels[rng.permutation(labels.size)]
    windows = list()
    for i, label in enumerate(labels):
        phases = rng.uniform(0., 2 * np.pi, size=spec.latent_dim)
        latent = latent_trajectory(spec, label, phases)
        modalities = list()
        for matrix in matrices:
            signal = np.matmul(matrix, latent)
            if spec.noise_std > 0:
                signal = signal + rng.normal(0., spec.noise_std, size=signal.shape)
            modalities.append(signal)
        #ENDFOR
        windows.append(MultimodalWindow(modalities, label=int(label),
                                        sample_id="s{:05d}".format(i)))
    #ENDFOR
    return windows


def synthetic_manifest_entries(spec, modality_names=None):
    """
    Describe the synthetic modalities and classes in manifest form.
    """
    if modality_names is None:
        modality_names = ["m{}".format(j) for j in range(spec.modality_count)]
    modalities = [{"name": name, "channels": channels,
                   "rate_hz": spec.sample_rate, "window_len": spec.window_length}
                  for name, channels in zip(modality_names, spec.channels)]
    classes = ["class{}".format(c) for c in range(spec.class_count)]
    return modalities, classes


def spectral_classify(windows, spec):
    """
    Classify windows by the power at each class's latent frequencies.
    This is a brute-force oracle for the separability of a synthetic set.

    Returns:
    predictions :: ndarray (len(windows)) - int
    """
    bins = np.rint(np.asarray(spec.frequencies)).astype(int)
    predictions = list()
    for window in windows:
        power = sum(np.sum(np.abs(np.fft.rfft(modality, axis=1)) ** 2, axis=0)
                    for modality in window.modalities)
        valid = np.clip(bins, 0, power.size - 1)
        scores = np.sum(power[valid], axis=1)
        predictions.append(int(np.argmax(scores)))
    #ENDFOR
    return np.asarray(predictions, dtype=int)


def shuffle_labels(windows, rng):
    """
    Permute the labels across windows, destroying any link between signal
    and class while keeping the class counts.
    """
    labels = [window.label for window in windows]
    order = rng.permutation(len(labels))
    return [window.replace(label=labels[k]) if labels[k] is not None
            else window.replace(strip_label=True)
            for window, k in zip(windows, order)]
