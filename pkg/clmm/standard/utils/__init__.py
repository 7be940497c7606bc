"""
util - This directory houses modules that extend external packages
"""

from .autogradutil import (backward, finite_diff_gradient, relative_error,)
from .checkpoint import (decode_checkpoint, encode_checkpoint,
                         load_checkpoint, save_checkpoint,)
from .fileutil import (ensure_parent_dir, generate_save_file_path,)
from .jsonutil import (CustomJSONEncoder, dump_json,)

__all__ = [
    "backward", "finite_diff_gradient", "relative_error",
    "decode_checkpoint", "encode_checkpoint",
    "load_checkpoint", "save_checkpoint",
    "ensure_parent_dir", "generate_save_file_path",
    "CustomJSONEncoder", "dump_json",
]
