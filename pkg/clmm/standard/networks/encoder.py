"""
encoder.py - a module for the per-modality CNN - differential attention
encoder and the contrastive projection heads

Parameters live in a flat dictionary. For modality j the encoder uses
    encoder/m{j}/conv{b}/kernel, encoder/m{j}/conv{b}/bias
    encoder/m{j}/attn{l}/{w_q, w_k, w_v, w_o, lambda, ln_scale, ln_shift}
and the stage-1 projection head uses
    projection/m{j}/{w1, b1, w2, b2}.
"""

import autograd.numpy as anp
import numpy as np

from clmm.models.errors import ConfigError, DimensionError
from clmm.standard.functions import (conv1d, gelu, glorot_uniform,
                                     l2_normalize, layer_norm, matmul,
                                     rms_norm, softmax,)

### PARAMETERS ###

def init_encoder_params(config, rng):
    """
    Initialize the encoder parameters of every modality.
    Weight matrices are glorot uniform, biases are zero, lambda is
    `config.lambda_init`, and layer norms start as the identity map.

    Arguments:
    config :: clmm.models.configs.EncoderConfig - a bound configuration
    rng :: numpy.random.Generator

    Returns:
    params :: dict(str -> ndarray)
    """
    _require_bound(config)
    params = dict()
    feature_dim = config.feature_dim
    kernel_size = config.kernel_size
    for j in range(config.modality_count):
        in_channels = config.channels[j]
        for b, out_channels in enumerate(config.cnn_channels):
            prefix = "encoder/m{}/conv{}/".format(j, b)
            params[prefix + "kernel"] = glorot_uniform(rng, (out_channels, in_channels, kernel_size),
                                                       in_channels * kernel_size,
                                                       out_channels * kernel_size)
            params[prefix + "bias"] = np.zeros(out_channels)
            in_channels = out_channels
        #ENDFOR
        for l in range(config.depth):
            prefix = "encoder/m{}/attn{}/".format(j, l)
            params[prefix + "w_q"] = glorot_uniform(rng, (feature_dim, 2 * feature_dim),
                                                    feature_dim, 2 * feature_dim)
            params[prefix + "w_k"] = glorot_uniform(rng, (feature_dim, 2 * feature_dim),
                                                    feature_dim, 2 * feature_dim)
            params[prefix + "w_v"] = glorot_uniform(rng, (feature_dim, feature_dim),
                                                    feature_dim, feature_dim)
            params[prefix + "w_o"] = glorot_uniform(rng, (feature_dim, feature_dim),
                                                    feature_dim, feature_dim)
            params[prefix + "lambda"] = np.array(config.lambda_init)
            params[prefix + "ln_scale"] = np.ones(feature_dim)
            params[prefix + "ln_shift"] = np.zeros(feature_dim)
        #ENDFOR
    #ENDFOR
    return params


def init_projection_params(config, rng):
    """
    Initialize the stage-1 projection head of every modality,
    a two layer perceptron D -> D -> D_proj.
    """
    _require_bound(config)
    params = dict()
    feature_dim = config.feature_dim
    projection_dim = config.projection_dim
    for j in range(config.modality_count):
        prefix = "projection/m{}/".format(j)
        params[prefix + "w1"] = glorot_uniform(rng, (feature_dim, feature_dim),
                                               feature_dim, feature_dim)
        params[prefix + "b1"] = np.zeros(feature_dim)
        params[prefix + "w2"] = glorot_uniform(rng, (feature_dim, projection_dim),
                                               feature_dim, projection_dim)
        params[prefix + "b2"] = np.zeros(projection_dim)
    #ENDFOR
    return params


def encoder_parameter_count(config, include_projection=True):
    """
    Count the encoder (and projection head) parameters analytically.
    """
    _require_bound(config)
    feature_dim = config.feature_dim
    count = 0
    for j in range(config.modality_count):
        in_channels = config.channels[j]
        for out_channels in config.cnn_channels:
            count += out_channels * in_channels * config.kernel_size + out_channels
            in_channels = out_channels
        #ENDFOR
        attention_count = (2 * (2 * feature_dim * feature_dim)
                           + 2 * feature_dim * feature_dim
                           + 1 + 2 * feature_dim)
        count += config.depth * attention_count
        if include_projection:
            count += (feature_dim * feature_dim + feature_dim
                      + feature_dim * config.projection_dim + config.projection_dim)
    #ENDFOR
    return count


### FORWARD ###

def cnn_forward(x, params, config, modality_index):
    """
    Extract local temporal features with the modality's conv stack.

    Arguments:
    x :: ndarray (C x T_in) or (B x C x T_in) - the modality window(s)
    params :: dict - encoder parameters
    config :: clmm.models.configs.EncoderConfig
    modality_index :: int - j

    Returns:
    features :: ndarray (S x D) or (B x S x D)
    """
    channels = config.channels[modality_index]
    x_shape = anp.shape(x)
    if len(x_shape) not in (2, 3) or x_shape[-2] != channels:
        raise ConfigError("Modality {} ({}) expects {} channels, got an input of shape {}."
                          "".format(modality_index, config.modality_names[modality_index],
                                    channels, x_shape))
    y = x
    for b in range(len(config.cnn_channels)):
        prefix = "encoder/m{}/conv{}/".format(modality_index, b)
        y = gelu(conv1d(y, params[prefix + "kernel"], bias=params[prefix + "bias"],
                        stride=config.stride, padding=config.padding))
    #ENDFOR
    return anp.swapaxes(y, -1, -2)


def _split_pair(projected, head_count, head_dim):
    # (B x S x 2D) -> two (B x h x S x d) arrays
    batch_size, sequence_length, _ = anp.shape(projected)
    pair = anp.reshape(projected, (batch_size, sequence_length, head_count, 2, head_dim))
    pair = anp.transpose(pair, (3, 0, 2, 1, 4))
    return pair[0], pair[1]


def attention_maps(features, params, config, modality_index, block=0):
    """
    Compute the two softmax attention maps and the values of one
    differential attention block.

    Arguments:
    features :: ndarray (B x S x D)

    Returns:
    maps :: tuple - (a1, a2, values, lambda_) with a1, a2 ::
        (B x h x S x S), values :: (B x h x S x d), lambda_ :: scalar
    """
    prefix = "encoder/m{}/attn{}/".format(modality_index, block)
    head_count = config.head_count
    head_dim = config.head_dim
    batch_size, sequence_length, _ = anp.shape(features)
    q1, q2 = _split_pair(matmul(features, params[prefix + "w_q"]), head_count, head_dim)
    k1, k2 = _split_pair(matmul(features, params[prefix + "w_k"]), head_count, head_dim)
    values = anp.reshape(matmul(features, params[prefix + "w_v"]),
                         (batch_size, sequence_length, head_count, head_dim))
    values = anp.transpose(values, (0, 2, 1, 3))
    scale = 1. / np.sqrt(head_dim)
    a1 = softmax(anp.matmul(q1, anp.swapaxes(k1, -1, -2)) * scale, axis=-1)
    a2 = softmax(anp.matmul(q2, anp.swapaxes(k2, -1, -2)) * scale, axis=-1)
    return a1, a2, values, params[prefix + "lambda"]


def differential_attention_map(features, params, config, modality_index, block=0):
    """
    Compute softmax(Q1 K1^T / sqrt(d)) - lambda softmax(Q2 K2^T / sqrt(d))
    for every head. Each row sums to 1 - lambda.

    Returns:
    attention :: ndarray (B x h x S x S)
    """
    a1, a2, _, lambda_ = attention_maps(features, params, config, modality_index, block)
    return a1 - lambda_ * a2


def attention_heads(features, params, config, modality_index, block=0):
    """
    Compute the un-normalized output of every differential attention head.

    Returns:
    heads :: ndarray (B x h x S x d)
    """
    a1, a2, values, lambda_ = attention_maps(features, params, config, modality_index, block)
    return anp.matmul(a1 - lambda_ * a2, values)


def diff_attention(features, params, config, modality_index, block=0):
    """
    Apply one multi-head differential attention block.
    Each head is rms-normalized over the head dimension, the heads are
    concatenated and projected by W^o, and the sum with the block input
    is layer-normalized over D.

    Arguments:
    features :: ndarray (S x D) or (B x S x D)

    Returns:
    z :: ndarray - same shape as `features`
    """
    unbatched = len(anp.shape(features)) == 2
    if unbatched:
        features = features[None]
    prefix = "encoder/m{}/attn{}/".format(modality_index, block)
    batch_size, sequence_length, feature_dim = anp.shape(features)
    if feature_dim != config.feature_dim:
        raise DimensionError("diff_attention expects features of dimension {}, got shape {}."
                             "".format(config.feature_dim, anp.shape(features)))
    heads = rms_norm(attention_heads(features, params, config, modality_index, block), axis=-1)
    concat = anp.reshape(anp.transpose(heads, (0, 2, 1, 3)),
                         (batch_size, sequence_length, feature_dim))
    output = matmul(concat, params[prefix + "w_o"])
    z = layer_norm(features + output, params[prefix + "ln_scale"], params[prefix + "ln_shift"])
    if unbatched:
        z = z[0]
    return z


def encode(x, params, config, modality_index):
    """
    Encode one modality: CNN features followed by `config.depth`
    differential attention blocks.

    Arguments:
    x :: ndarray (C x T_in) or (B x C x T_in)

    Returns:
    z :: ndarray (S x D) or (B x S x D)
    """
    z = cnn_forward(x, params, config, modality_index)
    for block in range(config.depth):
        z = diff_attention(z, params, config, modality_index, block)
    #ENDFOR
    return z


def project(z, params, config, modality_index):
    """
    Map a unimodal representation to the unit sphere of the shared
    contrastive space: mean-pool over time, a two layer perceptron,
    then l2 normalization.

    Arguments:
    z :: ndarray (S x D) or (B x S x D)

    Returns:
    r :: ndarray (D_proj) or (B x D_proj)
    """
    prefix = "projection/m{}/".format(modality_index)
    pooled = anp.mean(z, axis=-2)
    hidden = gelu(matmul(pooled, params[prefix + "w1"]) + params[prefix + "b1"])
    output = matmul(hidden, params[prefix + "w2"]) + params[prefix + "b2"]
    return l2_normalize(output, axis=-1)


def embed(inputs, params, config):
    """
    Encode and project every modality of a batch.

    Arguments:
    inputs :: list(ndarray (B x C_j x T_j))

    Returns:
    embeddings :: ndarray (B x M x D_proj)
    """
    if len(inputs) != config.modality_count:
        raise DimensionError("Expected {} modalities, got {}."
                             "".format(config.modality_count, len(inputs)))
    embeddings = [project(encode(x, params, config, j), params, config, j)
                  for j, x in enumerate(inputs)]
    return anp.stack(embeddings, axis=1)


def _require_bound(config):
    if not config.is_bound:
        raise ConfigError("The encoder configuration is not bound to a dataset's modalities.")
