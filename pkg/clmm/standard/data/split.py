"""
split.py - This module splits a labeled pool into the unlabeled,
labeled training and test sets.
"""

import numpy as np

from clmm.models.errors import ConfigError, ContractError

SPLITS = ("unlabeled", "train", "test")

def split(windows, labeled_fraction, rng, test_fraction=0.):
    """
    Stratified split. For a class with n_c samples, floor(labeled_fraction n_c)
    go to the labeled training set, floor(test_fraction n_c) to the test set
    and the rest, with labels removed, to the unlabeled set.

    Arguments:
    windows :: list(MultimodalWindow) - every window must be labeled
    labeled_fraction :: float in (0, 1)
    rng :: numpy.random.Generator
    test_fraction :: float in [0, 1)

    Returns:
    unlabeled :: list(MultimodalWindow)
    train :: list(MultimodalWindow)
    test :: list(MultimodalWindow)
    """
    if not 0 < labeled_fraction < 1:
        raise ConfigError("labeled_fraction must lie in (0, 1), got {}.".format(labeled_fraction))
    if not 0 <= test_fraction < 1:
        raise ConfigError("test_fraction must lie in [0, 1), got {}.".format(test_fraction))
    labels = [window.label for window in windows]
    if any(label is None for label in labels):
        raise ContractError("split needs a labeled pool.")
    labels = np.asarray(labels, dtype=int)
    assignment = np.empty(len(windows), dtype=object)
    for label in np.unique(labels):
        members = np.flatnonzero(labels == label)
        members = members[rng.permutation(members.size)]
        labeled_count = int(np.floor(labeled_fraction * members.size + 1e-9))
        test_count = int(np.floor(test_fraction * members.size + 1e-9))
        if labeled_count < 1:
            raise ConfigError("Class {} has {} samples; labeled_fraction {} leaves no "
                              "labeled sample.".format(label, members.size, labeled_fraction))
        if labeled_count + test_count > members.size:
            raise ConfigError("Class {} has too few samples ({}) for the requested split."
                              "".format(label, members.size))
        assignment[members[:labeled_count]] = "train"
        assignment[members[labeled_count:labeled_count + test_count]] = "test"
        assignment[members[labeled_count + test_count:]] = "unlabeled"
    #ENDFOR
    unlabeled = [window.replace(strip_label=True, split="unlabeled")
                 for window, part in zip(windows, assignment) if part == "unlabeled"]
    train = [window.replace(split="train")
             for window, part in zip(windows, assignment) if part == "train"]
    test = [window.replace(split="test")
            for window, part in zip(windows, assignment) if part == "test"]
    return unlabeled, train, test


def select_split(windows, splits):
    """
    Keep the windows whose split is in `splits`. Windows without a split
    tag are kept by every selection.
    """
    if isinstance(splits, str):
        splits = (splits,)
    for name in splits:
        if name not in SPLITS:
            raise ConfigError("Unknown split {}, expected one of {}.".format(name, SPLITS))
    #ENDFOR
    return [window for window in windows if window.split is None or window.split in splits]
