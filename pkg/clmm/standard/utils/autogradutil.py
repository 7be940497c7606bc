"""
autogradutil.py - This module provides utilities for interfacing with autograd.
"""

from autograd.core import make_vjp as _make_vjp
from autograd.extend import vspace
from autograd.wrap_util import unary_to_nary
import numpy as np

from clmm.models.errors import ContractError

@unary_to_nary
def backward(function, argnum):
    """
    Get the value and the gradient of a scalar function.
    This differential operator follows autograd's value_and_grad
    implementation, but rejects non-scalar outputs explicitly.
    Every call records a fresh graph, so calling it twice on the same
    inputs yields identical gradients.

    Args:
    function :: any -> float - the loss to differentiate
    argnum :: int - the argument number to differentiate with respect to

    Returns:
    backward :: any -> tuple(loss :: float, grads :: any) - a function
        that returns the value of `function` and its gradient with respect
        to argument `argnum`, with the same structure as that argument
    """
    vjp, ans = _make_vjp(function, argnum)
    ans_vspace = vspace(ans)
    if ans_vspace.shape != () or ans_vspace.iscomplex:
        raise ContractError("backward needs a real scalar loss, got shape {}."
                            "".format(ans_vspace.shape))
    grads = vjp(ans_vspace.ones())
    return ans, grads


def finite_diff_gradient(function, x, h=1e-5):
    """
    Approximate the gradient of a scalar function with central differences
    (f(x + h e_i) - f(x - h e_i)) / 2h, one element at a time.
    This is the oracle the autograd gradients are checked against.

    Args:
    function :: ndarray -> float - the function to differentiate
    x :: ndarray - the point to differentiate at
    h :: float - the step size

    Returns:
    gradient :: ndarray - same shape as `x`
    """
    x = np.array(x, dtype=np.float64)
    gradient = np.zeros_like(x)
    flat_x = x.reshape(-1)
    flat_gradient = gradient.reshape(-1)
    for i in range(flat_x.size):
        x_i = flat_x[i]
        flat_x[i] = x_i + h
        f_plus = function(x.copy())
        flat_x[i] = x_i - h
        f_minus = function(x.copy())
        flat_x[i] = x_i
        flat_gradient[i] = (f_plus - f_minus) / (2 * h)
    #ENDFOR
    return gradient


def relative_error(a, b):
    """
    Compute max|a - b| / max(max|a|, max|b|), the error measure used
    for gradient checks.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-12)
    return np.max(np.abs(a - b)) / scale
