"""
dualbranch.py - a module for the stage-2 dual-branch classifier:
quality-guided modality weights, a bidirectional GRU over the
weighted sequence, and the fusion perceptron phi

Parameters (flat dictionary):
    dual/m{j}/score_w, dual/m{j}/score_b - attention scorer of modality j
    dual/gru_fwd/{w_x, w_h, b_x, b_h}, dual/gru_bwd/{...} - the GRU
        directions, gates ordered (reset, update, new)
    dual/phi/{w1, b1, w2, b2} - the fusion perceptron
"""

import logging

import autograd.numpy as anp
from autograd.tracer import getval
import numpy as np

from clmm.models.errors import ConfigError, ContractError, DimensionError
from clmm.standard.functions import (gelu, glorot_uniform,
                                     linear_interpolation_matrix,
                                     matmul, sigmoid, softmax,)
from clmm.standard.networks.encoder import encode

logger = logging.getLogger(__name__)

_DEGENERATE_NORM = 1e-12
GRU_DIRECTIONS = ("gru_fwd", "gru_bwd")

### PARAMETERS ###

def init_dual_branch_params(encoder_config, finetune_config, class_count, rng):
    """
    Initialize the dual-branch parameters.

    Arguments:
    encoder_config :: clmm.models.configs.EncoderConfig - a bound configuration
    finetune_config :: clmm.models.configs.FinetuneConfig
    class_count :: int - K
    rng :: numpy.random.Generator

    Returns:
    params :: dict(str -> ndarray)
    """
    if class_count < 1:
        raise ConfigError("The classifier needs at least one class, got {}.".format(class_count))
    feature_dim = encoder_config.feature_dim
    modality_count = encoder_config.modality_count
    hidden = finetune_config.gru_hidden
    params = dict()
    for j in range(modality_count):
        params["dual/m{}/score_w".format(j)] = glorot_uniform(rng, (feature_dim,), feature_dim, 1)
        params["dual/m{}/score_b".format(j)] = np.array(0.)
    #ENDFOR
    if finetune_config.use_bigru:
        for direction in GRU_DIRECTIONS:
            prefix = "dual/{}/".format(direction)
            params[prefix + "w_x"] = glorot_uniform(rng, (feature_dim, 3 * hidden),
                                                    feature_dim, 3 * hidden)
            params[prefix + "w_h"] = glorot_uniform(rng, (hidden, 3 * hidden),
                                                    hidden, 3 * hidden)
            params[prefix + "b_x"] = np.zeros(3 * hidden)
            params[prefix + "b_h"] = np.zeros(3 * hidden)
        #ENDFOR
    phi_in = phi_input_dim(encoder_config, finetune_config)
    phi_hidden = finetune_config.phi_hidden
    params["dual/phi/w1"] = glorot_uniform(rng, (phi_in, phi_hidden), phi_in, phi_hidden)
    params["dual/phi/b1"] = np.zeros(phi_hidden)
    params["dual/phi/w2"] = glorot_uniform(rng, (phi_hidden, class_count), phi_hidden, class_count)
    params["dual/phi/b2"] = np.zeros(class_count)
    return params


def phi_input_dim(encoder_config, finetune_config):
    recurrent = 2 * finetune_config.gru_hidden if finetune_config.use_bigru else 0
    return recurrent + encoder_config.modality_count * encoder_config.feature_dim


def class_count_of(params, prefix=""):
    """
    Read the class count from the classifier output shape.
    """
    return int(np.shape(params[prefix + "dual/phi/b2"])[0])


### QUALITY WEIGHTS ###

def qom_scores(embeddings):
    """
    Score each modality by how well it agrees with the cross-modal
    consensus: the mean over samples of cos(R_j, mean_m R_m).

    Arguments:
    embeddings :: ndarray (N x M x D_proj) - unlabeled embeddings

    Returns:
    scores :: ndarray (M) - None if the embeddings are degenerate
    """
    embeddings = np.asarray(getval(embeddings), dtype=np.float64)
    if embeddings.ndim != 3 or embeddings.shape[0] < 1:
        raise DimensionError("qom_scores expects embeddings of shape (N x M x D), got {}."
                             "".format(embeddings.shape))
    if not np.all(np.isfinite(embeddings)):
        return None
    consensus = np.mean(embeddings, axis=1, keepdims=True)
    norms = np.linalg.norm(embeddings, axis=-1)
    consensus_norms = np.linalg.norm(consensus, axis=-1)
    if np.any(norms < _DEGENERATE_NORM) or np.any(consensus_norms < _DEGENERATE_NORM):
        return None
    cosine = np.sum(embeddings * consensus, axis=-1) / (norms * consensus_norms)
    return np.mean(cosine, axis=0)


def qom_prior(embeddings):
    """
    Estimate the modality quality prior beta^QoM = softmax(qom_scores)
    from unlabeled embeddings. Degenerate embeddings give the uniform
    prior and a warning.

    Returns:
    prior :: ndarray (M) - sums to 1
    """
    scores = qom_scores(embeddings)
    modality_count = np.shape(embeddings)[1]
    if scores is None:
        logger.warning("Degenerate unlabeled embeddings, using the uniform quality prior.")
        return np.full(modality_count, 1. / modality_count)
    return softmax(scores)


def attention_weights(z_list, params):
    """
    Compute beta^Attn: a per-sample softmax across modalities of the
    scores of the time-pooled representations.

    Arguments:
    z_list :: list(ndarray (B x S_j x D))

    Returns:
    beta_attn :: ndarray (B x M)
    """
    scores = [matmul(anp.mean(z, axis=-2), params["dual/m{}/score_w".format(j)])
              + params["dual/m{}/score_b".format(j)]
              for j, z in enumerate(z_list)]
    return softmax(anp.stack(scores, axis=-1), axis=-1)


def mix_quality_weights(beta_attn, beta_qom, lambda_mix):
    """
    beta = (1 - lambda_mix) beta^Attn + lambda_mix beta^QoM
    """
    if not 0 <= lambda_mix <= 1:
        raise ConfigError("lambda_mix must lie in [0, 1], got {}.".format(lambda_mix))
    return (1 - lambda_mix) * beta_attn + lambda_mix * beta_qom


def quality_weights(z_list, params, beta_qom, lambda_mix, use_quality_attention=True):
    """
    Compute the modality fusion weights beta of every sample.

    Arguments:
    z_list :: list(ndarray (B x S_j x D)) - encoder outputs
    params :: dict - dual-branch parameters
    beta_qom :: ndarray (M) - the quality prior
    lambda_mix :: float in [0, 1]
    use_quality_attention :: bool - False gives beta = 1/M

    Returns:
    beta :: ndarray (B x M) - each row sums to 1
    """
    modality_count = len(z_list)
    if not 0 <= lambda_mix <= 1:
        raise ConfigError("lambda_mix must lie in [0, 1], got {}.".format(lambda_mix))
    if np.shape(beta_qom) != (modality_count,):
        raise DimensionError("The quality prior of shape {} does not match {} modalities."
                             "".format(np.shape(beta_qom), modality_count))
    batch_size = anp.shape(z_list[0])[0]
    if not use_quality_attention:
        return np.full((batch_size, modality_count), 1. / modality_count)
    return mix_quality_weights(attention_weights(z_list, params),
                               np.asarray(beta_qom)[None, :], lambda_mix)


### RECURRENT BRANCH ###

def _gru_direction(sequence, params, prefix, reverse):
    batch_size, length, _ = anp.shape(sequence)
    w_x = params[prefix + "w_x"]
    w_h = params[prefix + "w_h"]
    hidden = anp.shape(w_h)[0]
    # The input projections of all steps are independent of h.
    x_gates = matmul(sequence, w_x) + params[prefix + "b_x"]
    h = anp.zeros((batch_size, hidden))
    states = list()
    steps = range(length - 1, -1, -1) if reverse else range(length)
    for t in steps:
        x_t = x_gates[:, t, :]
        h_gates = matmul(h, w_h) + params[prefix + "b_h"]
        r = sigmoid(x_t[:, :hidden] + h_gates[:, :hidden])
        z = sigmoid(x_t[:, hidden:2 * hidden] + h_gates[:, hidden:2 * hidden])
        n = anp.tanh(x_t[:, 2 * hidden:] + r * h_gates[:, 2 * hidden:])
        h = (1 - z) * n + z * h
        states.append(h)
    #ENDFOR
    if reverse:
        states = states[::-1]
    return anp.stack(states, axis=1)


def bigru_forward(sequence, params):
    """
    Run a GRU forward and backward in time from zero initial states and
    concatenate the hidden states of each step.
        r = sigmoid(x W_r + b_r + h U_r + c_r)
        z = sigmoid(x W_z + b_z + h U_z + c_z)
        n = tanh(x W_n + b_n + r * (h U_n + c_n))
        h' = (1 - z) n + z h

    Arguments:
    sequence :: ndarray (T x D) or (B x T x D)
    params :: dict - holds dual/gru_fwd/* and dual/gru_bwd/*

    Returns:
    h_bi :: ndarray (T x 2H) or (B x T x 2H)
    """
    unbatched = len(anp.shape(sequence)) == 2
    if unbatched:
        sequence = sequence[None]
    if anp.shape(sequence)[1] < 1:
        raise DimensionError("bigru_forward needs at least one time step, got shape {}."
                             "".format(anp.shape(sequence)))
    forward = _gru_direction(sequence, params, "dual/gru_fwd/", reverse=False)
    backward = _gru_direction(sequence, params, "dual/gru_bwd/", reverse=True)
    h_bi = anp.concatenate((forward, backward), axis=-1)
    if unbatched:
        h_bi = h_bi[0]
    return h_bi


### FORWARD ###

def align_sequences(z_list):
    """
    Resample every Z_j to the shortest sequence length so that the
    modalities can be concatenated step by step.
    """
    target = min(anp.shape(z)[-2] for z in z_list)
    aligned = list()
    for z in z_list:
        length = anp.shape(z)[-2]
        if length == target:
            aligned.append(z)
        else:
            aligned.append(anp.matmul(linear_interpolation_matrix(length, target), z))
    #ENDFOR
    return aligned


def dual_branch_forward(z_list, params, beta_qom, finetune_config, reporter=None):
    """
    Classify encoder outputs:
        Z_hat = concat(beta_1 Z_1, ..., beta_M Z_M)
        F = phi(mean_t concat(H_bi, Z_hat))
    where H_bi is the bidirectional GRU over sum_j beta_j Z_j.

    Arguments:
    z_list :: list(ndarray (S_j x D) or (B x S_j x D)) - one entry per modality
    params :: dict - dual-branch parameters
    beta_qom :: ndarray (M) - the quality prior
    finetune_config :: clmm.models.configs.FinetuneConfig
    reporter :: any - receives `beta` when given

    Returns:
    logits :: ndarray (K) or (B x K)
    """
    modality_count = len(beta_qom)
    if len(z_list) != modality_count or any(z is None for z in z_list):
        raise ContractError("dual_branch_forward needs all {} modalities, got {}; "
                            "missing modalities are not supported."
                            "".format(modality_count, len(z_list)))
    for j in range(modality_count):
        if "dual/m{}/score_w".format(j) not in params:
            raise ContractError("No dual-branch parameters for modality {}.".format(j))
    #ENDFOR
    unbatched = len(anp.shape(z_list[0])) == 2
    if unbatched:
        z_list = [z[None] for z in z_list]
    z_list = align_sequences(z_list)
    beta = quality_weights(z_list, params, beta_qom, finetune_config.lambda_mix,
                           use_quality_attention=finetune_config.use_quality_attention)
    weighted = [beta[:, j, None, None] * z for j, z in enumerate(z_list)]
    features = anp.concatenate(weighted, axis=-1)
    if finetune_config.use_bigru:
        h_bi = bigru_forward(sum(weighted), params)
        features = anp.concatenate((h_bi, features), axis=-1)
    pooled = anp.mean(features, axis=1)
    hidden = gelu(matmul(pooled, params["dual/phi/w1"]) + params["dual/phi/b1"])
    logits = matmul(hidden, params["dual/phi/w2"]) + params["dual/phi/b2"]
    if reporter is not None:
        reporter.beta = beta
    if unbatched:
        logits = logits[0]
    return logits


def classify(inputs, params, encoder_config, finetune_config, beta_qom, reporter=None):
    """
    Run the full stage-2 model, encoder and dual branch.

    Arguments:
    inputs :: list(ndarray (B x C_j x T_j)) - one array per modality
    params :: dict - encoder/* and dual/* parameters

    Returns:
    logits :: ndarray (B x K)
    """
    if len(inputs) != encoder_config.modality_count:
        raise ContractError("The model needs all {} modalities, got {}; "
                            "missing modalities are not supported."
                            "".format(encoder_config.modality_count, len(inputs)))
    z_list = [encode(x, params, encoder_config, j) for j, x in enumerate(inputs)]
    return dual_branch_forward(z_list, params, beta_qom, finetune_config, reporter=reporter)


def predict(inputs, params, encoder_config, finetune_config, beta_qom):
    """
    Predict class indices.

    Returns:
    predictions :: ndarray (B) - int
    """
    logits = classify(inputs, params, encoder_config, finetune_config, beta_qom)
    return np.argmax(getval(logits), axis=-1)
