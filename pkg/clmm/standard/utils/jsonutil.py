"""
jsonutil.py - This module provides utilities for interfacing with JSON.
"""

import json

import numpy as np

from clmm.models.augmentationpolicy import AugmentationPolicy

class CustomJSONEncoder(json.JSONEncoder):
    """
    A JSON encoder for numpy scalars and arrays, as they appear in
    metrics reports and effective configurations.
    """
    def default(self, obj):
        if isinstance(obj, np.integer):
            return int(obj)
        elif isinstance(obj, np.floating):
            return float(obj)
        elif isinstance(obj, np.bool_):
            return bool(obj)
        elif isinstance(obj, np.ndarray):
            return obj.tolist()
        elif isinstance(obj, AugmentationPolicy):
            return str(obj)
        return json.JSONEncoder.default(self, obj)


def dump_json(obj, file_path):
    with open(file_path, "w") as json_file:
        json.dump(obj, json_file, cls=CustomJSONEncoder, indent=2, sort_keys=True)
        json_file.write("\n")
