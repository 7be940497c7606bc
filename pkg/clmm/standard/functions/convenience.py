"""
convenience.py - definitions of common computations
All functions in this module that are exported,
i.e. those that don't begin with '_', are autograd compatible.
"""

import autograd.numpy as anp
from autograd.scipy.special import logsumexp
from autograd.tracer import getval
import numpy as np

from clmm.models.errors import ContractError, DimensionError

_DEGENERATE_NORM = 1e-12
_GELU_C = np.sqrt(2 / np.pi)

### COMPUTATIONS ###

def matmul(a, b):
    """
    Compute the matrix product of two arrays, broadcasting over
    leading axes.

    Arguments:
    a :: ndarray (... x m x k)
    b :: ndarray (... x k x n)

    Returns:
    product :: ndarray (... x m x n)
    """
    a_shape = anp.shape(a)
    b_shape = anp.shape(b)
    if len(a_shape) == 0 or len(b_shape) == 0:
        raise DimensionError("matmul needs arrays, got shapes {} and {}."
                             "".format(a_shape, b_shape))
    b_inner = b_shape[0] if len(b_shape) == 1 else b_shape[-2]
    if a_shape[-1] != b_inner:
        raise DimensionError("matmul inner dimensions disagree for shapes {} and {}."
                             "".format(a_shape, b_shape))
    return anp.matmul(a, b)


def softmax(x, axis=-1):
    """
    Compute the softmax of `x` along `axis`. The log-sum-exp
    subtracts the slice maximum, so large inputs do not overflow.
    """
    return anp.exp(x - logsumexp(x, axis=axis, keepdims=True))


def log_softmax(x, axis=-1):
    """
    Compute the log of the softmax of `x` along `axis`.
    """
    return x - logsumexp(x, axis=axis, keepdims=True)


def gelu(x):
    """
    The tanh approximation of the gaussian error linear unit.
    """
    return 0.5 * x * (1 + anp.tanh(_GELU_C * (x + 0.044715 * x ** 3)))


def sigmoid(x):
    return 0.5 * (anp.tanh(0.5 * x) + 1)


def rms_norm(array, axis=-1, epsilon=1e-8):
    """
    Scale `array` to unit root mean square along `axis`.

    Arguments:
    array :: ndarray - the array to normalize
    axis :: int - the axis to normalize over
    epsilon :: float - fuzz factor

    Returns:
    normalized :: ndarray - same shape as `array`
    """
    mean_square = anp.mean(array * array, axis=axis, keepdims=True)
    return array / anp.sqrt(mean_square + epsilon)


def layer_norm(x, scale, shift, epsilon=1e-5):
    """
    Normalize the last axis of `x` to zero mean and unit variance,
    then apply the elementwise affine map.
    """
    mean = anp.mean(x, axis=-1, keepdims=True)
    centered = x - mean
    variance = anp.mean(centered * centered, axis=-1, keepdims=True)
    return centered / anp.sqrt(variance + epsilon) * scale + shift


def l2_normalize(x, axis=-1):
    """
    Scale `x` to unit euclidean norm along `axis`.
    A vector whose norm is below 1e-12 has no direction, so it is rejected.
    """
    norm = anp.sqrt(anp.sum(x * x, axis=axis, keepdims=True))
    if np.any(getval(norm) < _DEGENERATE_NORM):
        raise ContractError("degenerate embedding: norm below {} cannot be normalized."
                            "".format(_DEGENERATE_NORM))
    return x / norm


def cosine_similarity_matrix(x):
    """
    Compute the pairwise cosine similarities of the rows of `x`.
    This is a plain numpy function used for ranking, not for gradients.

    Arguments:
    x :: ndarray (n x d)

    Returns:
    similarity :: ndarray (n x n)
    """
    x = np.asarray(getval(x))
    norms = np.linalg.norm(x, axis=-1, keepdims=True)
    unit = x / np.maximum(norms, _DEGENERATE_NORM)
    return np.matmul(unit, unit.T)


def linear_interpolation_matrix(source_length, target_length):
    """
    Build the matrix that linearly resamples a sequence of
    `source_length` points onto `target_length` points with fixed endpoints.
    Multiplying by it keeps the resampling differentiable.

    Returns:
    matrix :: ndarray (target_length x source_length)
    """
    if source_length == 1:
        return np.ones((target_length, 1))
    positions = np.linspace(0, source_length - 1, target_length)
    lower = np.clip(np.floor(positions).astype(int), 0, source_length - 2)
    fraction = positions - lower
    matrix = np.zeros((target_length, source_length))
    rows = np.arange(target_length)
    matrix[rows, lower] += 1 - fraction
    matrix[rows, lower + 1] += fraction
    return matrix


def glorot_uniform(rng, shape, fan_in, fan_out):
    """
    Draw weights uniformly from +-sqrt(6 / (fan_in + fan_out)).
    """
    limit = np.sqrt(6. / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)
