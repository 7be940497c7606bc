"""
dataset.py - This module reads and writes multimodal dataset directories.

A dataset directory holds `manifest.json` and one CSV per sample and
modality: a header row of channel names, then one row per time step.
"""

import json
import logging
import os

import numpy as np
import pandas as pd

from clmm.models.datamodels import DatasetManifest, MultimodalWindow
from clmm.models.errors import ConfigError, LoadError
from clmm.standard.data.augmentation import resample_at
from clmm.standard.utils.jsonutil import dump_json

logger = logging.getLogger(__name__)

MANIFEST_FILE_NAME = "manifest.json"
NORMALIZATION_SPLITS = ("unlabeled", "train")
_MIN_STD = 1e-12

### READING ###

def read_manifest(manifest_path):
    """
    Accept a manifest file or the directory that contains it.

    Returns:
    manifest :: DatasetManifest
    root :: str - the directory sample paths are relative to
    """
    if os.path.isdir(manifest_path):
        manifest_path = os.path.join(manifest_path, MANIFEST_FILE_NAME)
    try:
        with open(manifest_path, "r") as manifest_file:
            dict_ = json.load(manifest_file)
    except FileNotFoundError:
        raise LoadError("The manifest {} does not exist.".format(manifest_path))
    except json.JSONDecodeError as error:
        raise LoadError("The manifest {} is not valid JSON: {}".format(manifest_path, error))
    return DatasetManifest.from_dict(dict_), os.path.dirname(os.path.abspath(manifest_path))


def read_modality_csv(file_path, channels):
    """
    Read one modality file.

    Returns:
    signal :: ndarray (channels x T)
    """
    try:
        frame = pd.read_csv(file_path, float_precision="round_trip")
    except FileNotFoundError:
        raise LoadError("The data file {} does not exist.".format(file_path))
    except pd.errors.EmptyDataError:
        raise LoadError("The data file {} is empty.".format(file_path))
    except pd.errors.ParserError as error:
        raise LoadError("The data file {} has ragged rows: {}".format(file_path, error))
    if frame.shape[1] != channels:
        raise LoadError("The data file {} has {} columns, the manifest declares {} channels."
                        "".format(file_path, frame.shape[1], channels))
    if frame.shape[0] < 1:
        raise LoadError("The data file {} has no rows.".format(file_path))
    values = frame.apply(pd.to_numeric, errors="coerce").to_numpy(dtype=np.float64)
    bad_rows = np.flatnonzero(~np.all(np.isfinite(values), axis=1))
    if bad_rows.size > 0:
        # line 1 is the header
        raise LoadError("The data file {} line {} is missing a value or is not numeric."
                        "".format(file_path, bad_rows[0] + 2))
    return values.T


def read_labels_file(file_path, manifest):
    """
    Read a CSV of `id,label` rows.

    Returns:
    labels :: dict(str -> int)
    """
    try:
        frame = pd.read_csv(file_path, dtype=str)
    except FileNotFoundError:
        raise LoadError("The labels file {} does not exist.".format(file_path))
    except pd.errors.ParserError as error:
        raise LoadError("The labels file {} has ragged rows: {}".format(file_path, error))
    if list(frame.columns) != ["id", "label"]:
        raise LoadError("The labels file {} must have the header id,label, got {}."
                        "".format(file_path, list(frame.columns)))
    known_ids = set(sample["id"] for sample in manifest.samples)
    labels = dict()
    for row_index, (sample_id, label) in enumerate(zip(frame["id"], frame["label"])):
        where = "{} line {}".format(file_path, row_index + 2)
        if sample_id not in known_ids:
            raise LoadError("{} references the unknown sample id {}.".format(where, sample_id))
        labels[sample_id] = manifest.class_index(label, where)
    #ENDFOR
    return labels


def load_dataset(manifest_path, normalize=True):
    """
    Load every sample of a dataset directory.
    Each modality is resampled to its manifest window length and, when
    `normalize` is set, z-scored per channel with statistics from the
    unlabeled and train samples.

    Arguments:
    manifest_path :: str - the manifest file or its directory
    normalize :: bool

    Returns:
    manifest :: DatasetManifest
    windows :: list(MultimodalWindow)
    """
    manifest, root = read_manifest(manifest_path)
    labels = dict()
    if manifest.labels_file is not None:
        labels = read_labels_file(os.path.join(root, manifest.labels_file), manifest)
    windows = list()
    for sample in manifest.samples:
        modalities = list()
        for j, relative_path in enumerate(sample["files_per_modality"]):
            signal = read_modality_csv(os.path.join(root, relative_path),
                                       manifest.channels[j])
            window_length = manifest.window_lengths[j]
            if signal.shape[1] != window_length:
                signal = resample_at(signal, np.linspace(0., 1., window_length))
            modalities.append(signal)
        #ENDFOR
        label = labels.get(sample["id"])
        if sample.get("label") is not None:
            label = manifest.class_index(sample["label"], "sample {}".format(sample["id"]))
        windows.append(MultimodalWindow(modalities, label=label, sample_id=sample["id"],
                                        split=sample.get("split"),
                                        subject=sample.get("subject")))
    #ENDFOR
    logger.info("Loaded %d samples with %d modalities from %s.",
                len(windows), manifest.modality_count, root)
    if normalize and windows:
        windows = apply_normalization(windows, normalization_stats(windows))
    return manifest, windows


### NORMALIZATION ###

def normalization_stats(windows):
    """
    Per-channel mean and standard deviation of each modality over the
    unlabeled and train windows (all windows when none is tagged).

    Returns:
    stats :: list(tuple(ndarray (C_j), ndarray (C_j)))
    """
    fitting = [window for window in windows if window.split in NORMALIZATION_SPLITS]
    if not fitting:
        fitting = windows
    stats = list()
    for j in range(fitting[0].modality_count):
        values = np.concatenate([window.modalities[j] for window in fitting], axis=1)
        mean = np.mean(values, axis=1)
        std = np.std(values, axis=1)
        stats.append((mean, np.where(std < _MIN_STD, 1., std)))
    #ENDFOR
    return stats


def apply_normalization(windows, stats):
    return [window.replace(modalities=[(modality - mean[:, None]) / std[:, None]
                                       for modality, (mean, std)
                                       in zip(window.modalities, stats)])
            for window in windows]


### SELECTION ###

def select_modalities(manifest, windows, names):
    """
    Keep the named modalities, in the given order.

    Returns:
    manifest :: DatasetManifest
    windows :: list(MultimodalWindow)
    """
    if names is None:
        return manifest, windows
    indices = list()
    for name in names:
        if name not in manifest.modality_names:
            raise ConfigError("Unknown modality {}, the dataset has {}."
                              "".format(name, manifest.modality_names))
        indices.append(manifest.modality_names.index(name))
    #ENDFOR
    if len(indices) < 2:
        raise ConfigError("At least 2 modalities are required, got {}.".format(names))
    samples = [dict(sample, files_per_modality=[sample["files_per_modality"][j]
                                                for j in indices])
               for sample in manifest.samples]
    selected = DatasetManifest(manifest.classes,
                               [manifest.modalities[j] for j in indices],
                               samples, labels_file=manifest.labels_file,)
    windows = [window.replace(modalities=[window.modalities[j] for j in indices])
               for window in windows]
    return selected, windows


### WRITING ###

def save_dataset(out_dir, windows, modalities, classes):
    """
    Write windows as a dataset directory. Floats are written with
    17 significant digits, so loading without normalization restores
    them exactly.

    Arguments:
    out_dir :: str
    windows :: list(MultimodalWindow)
    modalities :: list(dict) - manifest modality entries
    classes :: list(str)

    Returns:
    manifest :: DatasetManifest
    """
    samples = list()
    for window in windows:
        files = list()
        for modality, signal in zip(modalities, window.modalities):
            relative_path = os.path.join(modality["name"], "{}.csv".format(window.sample_id))
            file_path = os.path.join(out_dir, relative_path)
            os.makedirs(os.path.dirname(file_path), exist_ok=True)
            columns = ["{}_{}".format(modality["name"], c) for c in range(signal.shape[0])]
            pd.DataFrame(signal.T, columns=columns).to_csv(file_path, index=False,
                                                           float_format="%.17g")
            files.append(relative_path)
        #ENDFOR
        sample = {"id": window.sample_id, "files_per_modality": files}
        if window.label is not None:
            sample["label"] = classes[window.label]
        if window.split is not None:
            sample["split"] = window.split
        if window.subject is not None:
            sample["subject"] = window.subject
        samples.append(sample)
    #ENDFOR
    manifest = DatasetManifest(classes, modalities, samples)
    os.makedirs(out_dir, exist_ok=True)
    dump_json(manifest.to_dict(), os.path.join(out_dir, MANIFEST_FILE_NAME))
    return manifest
