"""
common.py - This module defines methods that are used by
multiple core functionalities.
"""

from autograd.misc import flatten
import numpy as np

from clmm.models.errors import ContractError

# Random streams. Every stochastic step draws from
# numpy.random.default_rng([seed, stream, *indices]).
STREAM_INIT = 0
STREAM_PRETRAIN = 1
STREAM_FINETUNE = 2
STREAM_SPLIT = 3
STREAM_SYNTH = 4
STREAM_SHUFFLE = 5

def stream_rng(seed, stream, *indices):
    """
    Construct the generator for one stochastic step. Because the
    generator depends only on its indices, any epoch or step can be
    replayed without replaying the ones before it.

    Arguments:
    seed :: int - the run seed
    stream :: int - one of the STREAM_* constants
    indices :: int - e.g. the epoch and the batch

    Returns:
    rng :: numpy.random.Generator
    """
    return np.random.default_rng([int(seed), int(stream)] + [int(i) for i in indices])


def strip_params(params):
    """
    Flatten a parameter dictionary to optimizer format.

    Arguments:
    params :: dict(str -> ndarray)

    Returns:
    flat_params :: ndarray (parameter_count) - the parameters, ordered
        by sorted name so the layout does not depend on insertion order
    slap :: ndarray -> dict - the inverse transformation
    """
    names = sorted(params)
    shapes = [np.shape(params[name]) for name in names]
    sizes = [int(np.prod(shape, dtype=np.int64)) for shape in shapes]
    offsets = np.concatenate(([0], np.cumsum(sizes))).astype(int)
    flat_params, _ = flatten([np.asarray(params[name], dtype=np.float64) for name in names])

    def slap(flat):
        flat = np.asarray(flat, dtype=np.float64)
        return {name: flat[offsets[k]:offsets[k + 1]].reshape(shapes[k])
                for k, name in enumerate(names)}

    return flat_params, slap


def copy_params(params):
    return {name: np.array(value, dtype=np.float64, copy=True)
            for name, value in params.items()}


def select_params(params, prefix, strip_prefix=False):
    """
    Return the entries of `params` whose name starts with `prefix`.
    """
    selected = dict()
    for name, value in params.items():
        if name.startswith(prefix):
            key = name[len(prefix):] if strip_prefix else name
            selected[key] = value
    #ENDFOR
    return selected


def parameter_count(params):
    return int(sum(np.size(value) for value in params.values()))


def check_finite(value, what):
    """
    Raise a ContractError if `value` holds a NaN or an infinity.
    """
    if not np.all(np.isfinite(value)):
        raise ContractError("{} is not finite.".format(what))


def batch_indices(sample_count, batch_size, order):
    """
    Split a permutation of sample indices into consecutive batches.

    Arguments:
    sample_count :: int
    batch_size :: int
    order :: ndarray (sample_count) - the permutation to split

    Returns:
    batches :: list(ndarray)
    """
    return [order[i:i + batch_size] for i in range(0, sample_count, batch_size)]


def stack_modalities(windows):
    """
    Stack a batch of windows into one array per modality.

    Returns:
    inputs :: list(ndarray (batch x channels x window_length))
    """
    modality_count = windows[0].modality_count
    return [np.stack([window.modalities[j] for window in windows])
            for j in range(modality_count)]
