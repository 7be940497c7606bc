"""
programtype.py - This module defines a class to specify the training stage.
"""

from enum import Enum

class ProgramType(Enum):
    """
    This class specifies the training stage that produced a checkpoint.
    The value is the stage tag written to checkpoints.
    """
    PRETRAIN = 1
    FINETUNE = 2


    def __repr__(self):
        return self.__str__()


    def __str__(self):
        if self.value == 1:
            string = "pretrain"
        else:
            string = "finetune"

        return string
