"""
models - a directory for clmm's data models
"""

from .augmentationpolicy import AugmentationPolicy
from .collabstate import (CollabState, FinetuneResult, PretrainResult,
                          check_congruent, collab_state_from_tensors,
                          pretrain_result_from_tensors,)
from .configs import (AugmentationConfig, EncoderConfig, FinetuneConfig,
                      FusionConfig, PretrainConfig, RunConfig, SyntheticSpec,)
from .cost import Cost
from .datamodels import DatasetManifest, MultimodalWindow
from .dummy import Dummy
from .errors import (ClmmError, ConfigError, ContractError, DimensionError,
                     IntegrityError, LoadError,)
from .fusedviewbatch import FusedViewBatch
from .programstate import (FinetuneState, PretrainState, ProgramState,
                           config_to_json,)
from .programtype import ProgramType

__all__ = [
    "AugmentationPolicy",
    "CollabState", "FinetuneResult", "PretrainResult", "check_congruent",
    "collab_state_from_tensors", "pretrain_result_from_tensors",
    "AugmentationConfig", "EncoderConfig", "FinetuneConfig", "FusionConfig",
    "PretrainConfig", "RunConfig", "SyntheticSpec",
    "Cost", "DatasetManifest", "MultimodalWindow", "Dummy",
    "ClmmError", "ConfigError", "ContractError", "DimensionError",
    "IntegrityError", "LoadError",
    "FusedViewBatch",
    "FinetuneState", "PretrainState", "ProgramState", "config_to_json",
    "ProgramType",
]
