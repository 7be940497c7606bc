"""
fileutil.py - This module provides utilites for interacting with files.
"""

import os

def generate_save_file_path(save_file_name, save_path):
    """
    Create the full path to a h5 history file using the base name
    save_file_name in the directory save_path. Names never collide because
    each new file gets a numeric prefix one above the largest prefix of
    the files `*_{save_file_name}.h5` already in the directory.
    The directory is created if it does not exist.

    Args:
    save_file_name :: str - the base name, e.g. "pretrain"
    save_path :: str - the directory

    Returns:
    save_file_path :: str - e.g. save_path/00003_pretrain.h5
    """
    os.makedirs(save_path, exist_ok=True)
    suffix = "_{}.h5".format(save_file_name)
    max_numeric_prefix = -1
    for file_name in os.listdir(save_path):
        prefix = file_name.split("_")[0]
        if file_name.endswith(suffix) and prefix.isdigit():
            max_numeric_prefix = max(int(prefix), max_numeric_prefix)
    #ENDFOR
    save_file_name_augmented = ("{:05d}_{}.h5"
                                "".format(max_numeric_prefix + 1,
                                          save_file_name))

    return os.path.join(save_path, save_file_name_augmented)


def ensure_parent_dir(file_path):
    parent = os.path.dirname(os.path.abspath(file_path))
    os.makedirs(parent, exist_ok=True)
