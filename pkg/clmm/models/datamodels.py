"""
datamodels.py - This module defines classes that encapsulate
multimodal samples and the dataset manifest that describes them.
"""

import numpy as np

from clmm.models.errors import DimensionError, LoadError

_DURATION_TOLERANCE = 1e-6

class MultimodalWindow(object):
    """
    This class encapsulates one time-aligned multimodal sample.

    Fields:
    label :: int - the class index, None for unlabeled samples
    modalities :: list(ndarray (channels x window_length)) - one float64
        array per modality
    sample_id :: str - a unique identifier of the sample
    split :: str - "unlabeled", "train", "test" or None
    subject :: int - the subject that produced the sample, or None
    """

    def __init__(self, modalities, label=None, sample_id=None,
                 split=None, subject=None,):
        """
        See class fields for arguments not listed here.
        """
        super().__init__()
        self.modalities = [np.asarray(modality, dtype=np.float64)
                           for modality in modalities]
        for j, modality in enumerate(self.modalities):
            if modality.ndim != 2:
                raise DimensionError("Modality {} of sample {} must be channels x time, "
                                     "got shape {}.".format(j, sample_id, modality.shape))
        #ENDFOR
        self.label = None if label is None else int(label)
        self.sample_id = sample_id
        self.split = split
        self.subject = subject


    def __repr__(self):
        return ("MultimodalWindow(id={}, label={}, shapes={})"
                "".format(self.sample_id, self.label,
                          [modality.shape for modality in self.modalities]))


    @property
    def modality_count(self):
        return len(self.modalities)


    def replace(self, modalities=None, label=None, strip_label=False, split=None):
        """
        Return a copy of this window with some fields replaced.
        """
        return MultimodalWindow(self.modalities if modalities is None else modalities,
                                label=None if strip_label else (self.label if label is None else label),
                                sample_id=self.sample_id,
                                split=self.split if split is None else split,
                                subject=self.subject,)


class DatasetManifest(object):
    """
    This class encapsulates the manifest of a dataset directory.

    Fields:
    classes :: list(str) - class names, indexed by class id
    labels_file :: str - optional CSV with `id,label` rows
    modalities :: list(dict) - {name, channels, rate_hz, window_len}
        per modality
    samples :: list(dict) - {id, files_per_modality, label?, split?,
        subject?} per sample
    """

    def __init__(self, classes, modalities, samples, labels_file=None,):
        """
        See class fields for arguments not listed here.
        """
        super().__init__()
        self.classes = [str(name) for name in classes]
        self.labels_file = labels_file
        self.modalities = [dict(modality) for modality in modalities]
        self.samples = [dict(sample) for sample in samples]
        for modality in self.modalities:
            for key in ("name", "channels", "rate_hz", "window_len"):
                if key not in modality:
                    raise LoadError("Manifest modality {} is missing the key {}."
                                    "".format(modality, key))
            #ENDFOR
        #ENDFOR
        durations = [float(modality["window_len"]) / float(modality["rate_hz"])
                     for modality in self.modalities]
        if durations and (max(durations) - min(durations)
                          > _DURATION_TOLERANCE * max(durations)):
            raise LoadError("Manifest window durations differ across modalities: {} s."
                            "".format(durations))
        ids = set()
        for sample in self.samples:
            if "id" not in sample or "files_per_modality" not in sample:
                raise LoadError("Manifest sample {} needs id and files_per_modality."
                                "".format(sample))
            if sample["id"] in ids:
                raise LoadError("Manifest sample id {} is duplicated.".format(sample["id"]))
            ids.add(sample["id"])
            if len(sample["files_per_modality"]) != len(self.modalities):
                raise LoadError("Manifest sample {} lists {} files for {} modalities."
                                "".format(sample["id"], len(sample["files_per_modality"]),
                                          len(self.modalities)))
        #ENDFOR


    @property
    def channels(self):
        return [int(modality["channels"]) for modality in self.modalities]


    @property
    def modality_count(self):
        return len(self.modalities)


    @property
    def modality_names(self):
        return [str(modality["name"]) for modality in self.modalities]


    @property
    def window_lengths(self):
        return [int(modality["window_len"]) for modality in self.modalities]


    def class_index(self, label, where):
        """
        Map a class name (or an integer class id) to its index.
        """
        if isinstance(label, (int, np.integer)) and not isinstance(label, bool):
            index = int(label)
            if 0 <= index < len(self.classes):
                return index
        elif str(label) in self.classes:
            return self.classes.index(str(label))
        raise LoadError("Unknown class {} in {}; known classes are {}."
                        "".format(label, where, self.classes))


    def to_dict(self):
        dict_ = {
            "classes": self.classes,
            "modalities": self.modalities,
            "samples": self.samples,
        }
        if self.labels_file is not None:
            dict_["labels_file"] = self.labels_file
        return dict_


    @classmethod
    def from_dict(cls, dict_):
        for key in ("classes", "modalities", "samples"):
            if key not in dict_:
                raise LoadError("The manifest is missing the key {}.".format(key))
        return cls(dict_["classes"], dict_["modalities"], dict_["samples"],
                   labels_file=dict_.get("labels_file"),)
