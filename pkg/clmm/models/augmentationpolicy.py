"""
augmentationpolicy.py - This module defines a class to specify
how multimodal windows are augmented.
"""

from enum import Enum

from clmm.models.errors import ConfigError

class AugmentationPolicy(Enum):
    """
    This class specifies the augmentation applied to each window.
    Every policy draws its parameters once per sample and applies
    them to all modalities of that sample.
    """
    NONE = 1
    TIME_WARP = 2
    RANDOM_CROP = 3
    TIME_SHIFT = 4
    CHANNEL_SCALE = 5
    SMOOTHING = 6
    NOISE = 7

    def __repr__(self):
        return self.__str__()

    def __str__(self):
        return self.name.lower()

    @classmethod
    def from_name(cls, name):
        """
        Look up a policy by its lower case name, e.g. "time_warp".
        """
        try:
            return cls[name.upper()]
        except KeyError:
            raise ConfigError("Unknown augmentation method {}, expected one of {}."
                              "".format(name, [str(policy) for policy in cls]))
