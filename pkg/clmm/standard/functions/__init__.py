"""
functions - a directory for autograd compatible tensor operations
"""

from .conv import conv1d
from .convenience import (cosine_similarity_matrix, gelu, glorot_uniform,
                          l2_normalize, layer_norm,
                          linear_interpolation_matrix,
                          log_softmax, matmul,
                          rms_norm, sigmoid, softmax,)

__all__ = [
    "conv1d", "cosine_similarity_matrix", "gelu", "glorot_uniform",
    "l2_normalize", "layer_norm", "linear_interpolation_matrix",
    "log_softmax", "matmul", "rms_norm", "sigmoid", "softmax",
]
