"""
conv.py - a module for one dimensional convolution
"""

import autograd.numpy as anp
import numpy as np

from clmm.models.errors import DimensionError

def conv1d(x, kernel, bias=None, stride=1, padding=0):
    """
    Cross-correlate a multichannel sequence with a bank of kernels.
    The sequence is zero padded, gathered into windows (im2col), and
    contracted with the kernel, so autograd differentiates it with respect
    to both `x` and `kernel`.

    Arguments:
    x :: ndarray (C_in x T) or (B x C_in x T) - the input sequence(s)
    kernel :: ndarray (C_out x C_in x K) - the kernel bank
    bias :: ndarray (C_out) - optional per output channel offset
    stride :: int >= 1 - the window step
    padding :: int >= 0 - zeros added to each end of the time axis

    Returns:
    y :: ndarray (C_out x T') or (B x C_out x T') with
        T' = floor((T + 2 padding - K) / stride) + 1
    """
    x_shape = anp.shape(x)
    kernel_shape = anp.shape(kernel)
    if len(x_shape) not in (2, 3) or len(kernel_shape) != 3:
        raise DimensionError("conv1d expects x of rank 2 or 3 and a rank 3 kernel, "
                             "got shapes {} and {}.".format(x_shape, kernel_shape))
    if x_shape[-2] != kernel_shape[1]:
        raise DimensionError("conv1d input channels disagree for x {} and kernel {}."
                             "".format(x_shape, kernel_shape))
    if stride < 1:
        raise DimensionError("conv1d stride must be >= 1, got {}.".format(stride))
    length = x_shape[-1]
    kernel_size = kernel_shape[2]
    padded_length = length + 2 * padding
    if padded_length < kernel_size:
        raise DimensionError("conv1d window {} is longer than the padded input {} "
                             "(x {}, padding {}).".format(kernel_size, padded_length,
                                                          x_shape, padding))

    if padding > 0:
        pad = anp.zeros(x_shape[:-1] + (padding,))
        x = anp.concatenate((pad, x, pad), axis=-1)
    output_length = (padded_length - kernel_size) // stride + 1
    indices = (stride * np.arange(output_length)[:, None]
               + np.arange(kernel_size)[None, :])
    # patches :: (... x C_in x T' x K)
    patches = x[..., indices]
    rank = len(x_shape) + 1
    # y :: (... x T' x C_out)
    y = anp.tensordot(patches, kernel, axes=([rank - 3, rank - 1], [1, 2]))
    y = anp.swapaxes(y, rank - 3, rank - 2)
    if bias is not None:
        y = y + anp.reshape(bias, (kernel_shape[0], 1))

    return y
