"""
contrastive.py - This module defines the multi-view fusion and the
hard-positive weighted contrastive cost of stage 1.
"""

import autograd
import autograd.numpy as anp
from autograd.scipy.special import logsumexp
from autograd.tracer import getval
import numpy as np

from clmm.models.cost import Cost
from clmm.models.errors import ConfigError, ContractError, DimensionError
from clmm.models.fusedviewbatch import FusedViewBatch
from clmm.standard.functions import cosine_similarity_matrix, matmul

### FUSION ###

def sample_fusion_weights(modality_count, view_count, weight_range, rng):
    """
    Draw P fusion weight rows: entries uniform in `weight_range`, each row
    normalized to sum to 1.

    Arguments:
    modality_count :: int - M
    view_count :: int - P
    weight_range :: tuple(float, float) - (lo, hi)
    rng :: numpy.random.Generator

    Returns:
    weights :: ndarray (P x M)
    """
    lo, hi = weight_range
    if not lo < hi:
        raise ConfigError("The fusion weight range must satisfy lo < hi, got {}."
                          "".format(list(weight_range)))
    if modality_count < 1 or view_count < 1:
        raise ConfigError("Fusion needs M >= 1 and P >= 1, got M={} and P={}."
                          "".format(modality_count, view_count))
    weights = rng.uniform(lo, hi, size=(view_count, modality_count))
    return weights / np.sum(weights, axis=1, keepdims=True)


def fuse(embeddings, weights):
    """
    V = sum_j a_j R_j. The result is not re-normalized.

    Arguments:
    embeddings :: ndarray (M x D_proj) or (N x M x D_proj) - one
        embedding per modality, optionally for N samples
    weights :: ndarray (M) or (P x M) - one or P fusion weight rows

    Returns:
    views :: ndarray - (D_proj) for one row and one sample, otherwise
        the leading axes of `embeddings` and `weights` in that order,
        e.g. (N x P x D_proj)
    """
    embedding_shape = anp.shape(embeddings)
    weight_shape = np.shape(weights)
    if (len(embedding_shape) not in (2, 3) or len(weight_shape) not in (1, 2)
        or embedding_shape[-2] != weight_shape[-1]):
        raise DimensionError("Cannot fuse modality embeddings of shape {} with weights of "
                             "shape {}.".format(embedding_shape, weight_shape))
    # (P x M) @ (N x M x D) -> (N x P x D)
    return matmul(weights, embeddings)


def fuse_batch(embeddings, weights):
    """
    Build the fused views of a batch.

    Arguments:
    embeddings :: ndarray (N x M x D_proj)
    weights :: ndarray (P x M)

    Returns:
    views :: clmm.models.fusedviewbatch.FusedViewBatch
    """
    if len(anp.shape(embeddings)) != 3 or np.ndim(weights) != 2:
        raise DimensionError("fuse_batch expects embeddings (N x M x D) and weights (P x M), "
                             "got {} and {}.".format(anp.shape(embeddings), np.shape(weights)))
    return FusedViewBatch(fuse(embeddings, weights))


### HARD POSITIVES ###

def hard_positive_count(positive_count, hard_ratio):
    """
    floor(hard_ratio * positive_count), at least 1 when hard_ratio > 0.
    """
    if positive_count < 1 or hard_ratio <= 0:
        return 0
    count = int(np.floor(hard_ratio * positive_count + 1e-9))
    return min(max(count, 1), positive_count)


def select_hard_positives(views, hard_ratio):
    """
    Mark, for every anchor, its least similar positives as hard.
    Positives are ranked by the cosine similarity of the fused views.

    Arguments:
    views :: clmm.models.fusedviewbatch.FusedViewBatch
    hard_ratio :: float in [0, 1] - rho

    Returns:
    hard_mask :: ndarray (S x S) - True on the hard pairs (s, p)
    """
    positive_mask = views.positive_mask()
    hard_mask = np.zeros_like(positive_mask)
    if hard_ratio <= 0:
        return hard_mask
    similarity = cosine_similarity_matrix(views.views)
    for s in range(views.size):
        positives = np.flatnonzero(positive_mask[s])
        count = hard_positive_count(positives.size, hard_ratio)
        order = np.argsort(similarity[s, positives], kind="stable")
        hard_mask[s, positives[order[:count]]] = True
    #ENDFOR
    return hard_mask


### LOSS ###

def _pair_weights(hard_mask, hard_weight, shape):
    if hard_mask is None:
        return np.ones(shape)
    return np.where(hard_mask, hard_weight, 1.)


def similarity_contrastive_loss(similarity, positive_mask, temperature,
                                hard_mask=None, hard_weight=1.,
                                anchor_mask=None, candidate_mask=None,):
    """
    Evaluate the weighted multi-positive contrastive loss on a
    similarity matrix:
        L = sum_s -1/|P(s)| sum_{p in P(s)}
            [w(s, p) sim(s, p) / tau - log sum_{a in C(s)} exp(sim(s, a) / tau)]
    The weight w only scales the numerator.

    Arguments:
    similarity :: ndarray (S x S) - pairwise dot products
    positive_mask :: ndarray (S x S) - P(s)
    temperature :: float - tau
    hard_mask :: ndarray (S x S) - pairs scaled by `hard_weight`
    hard_weight :: float - w_h
    anchor_mask :: ndarray (S) - anchors that contribute, all by default
    candidate_mask :: ndarray (S x S) - C(s), all a != s by default

    Returns:
    loss :: float
    """
    size = anp.shape(similarity)[0]
    if candidate_mask is None:
        candidate_mask = ~np.eye(size, dtype=bool)
    if anchor_mask is None:
        anchor_mask = np.ones(size, dtype=bool)
    logits = similarity / temperature
    log_denominator = logsumexp(anp.where(candidate_mask, logits, -np.inf),
                                axis=1, keepdims=True)
    weights = _pair_weights(hard_mask, hard_weight, (size, size))
    terms = weights * logits - log_denominator
    positive_counts = np.sum(positive_mask, axis=1)
    anchor_scale = np.where(anchor_mask & (positive_counts > 0),
                            1. / np.maximum(positive_counts, 1), 0.)
    masked_terms = anp.where(positive_mask, terms, 0.)
    return -anp.sum(anchor_scale * anp.sum(masked_terms, axis=1))


def masked_contrastive_loss(vectors, positive_mask, temperature,
                            hard_mask=None, hard_weight=1.,
                            anchor_mask=None, candidate_mask=None,):
    """
    Evaluate the contrastive loss on raw view vectors, with similarities
    V_s . V_p. See `similarity_contrastive_loss`.
    """
    similarity = matmul(vectors, anp.transpose(vectors))
    return similarity_contrastive_loss(similarity, positive_mask, temperature,
                                       hard_mask=hard_mask, hard_weight=hard_weight,
                                       anchor_mask=anchor_mask,
                                       candidate_mask=candidate_mask,)


def contrastive_loss(views, fusion_config, hard_mask=None):
    """
    Compute the hard-positive weighted contrastive loss of a batch of
    fused views. Hard positives are selected from the current views
    unless `hard_mask` is given.

    Arguments:
    views :: clmm.models.fusedviewbatch.FusedViewBatch
    fusion_config :: clmm.models.configs.FusionConfig
    hard_mask :: ndarray (S x S)

    Returns:
    loss :: float
    """
    if views.sample_count < 2:
        raise ContractError("The contrastive loss needs at least 2 raw samples per batch, "
                            "got {}; a single sample has no negatives."
                            "".format(views.sample_count))
    if views.view_count < 2:
        raise ContractError("The contrastive loss needs at least 2 views per sample, got {}."
                            "".format(views.view_count))
    if hard_mask is None:
        hard_mask = select_hard_positives(views, fusion_config.hard_ratio)
    return masked_contrastive_loss(views.views, views.positive_mask(),
                                   fusion_config.temperature,
                                   hard_mask=hard_mask,
                                   hard_weight=fusion_config.hard_weight,)


def positive_probabilities(vectors, positive_mask, temperature,
                           hard_mask=None, hard_weight=1.):
    """
    Compute q(s, p) = exp(w(s, p) sim(s, p) / tau) / sum_{a != s} exp(sim(s, a) / tau)
    for every positive pair.

    Returns:
    q :: ndarray (S x S) - zero off the positive pairs
    """
    vectors = np.asarray(getval(vectors))
    size = vectors.shape[0]
    logits = np.matmul(vectors, vectors.T) / temperature
    candidates = np.where(~np.eye(size, dtype=bool), logits, -np.inf)
    log_denominator = logsumexp(candidates, axis=1, keepdims=True)
    weights = _pair_weights(hard_mask, hard_weight, (size, size))
    q = np.exp(weights * logits - log_denominator)
    return np.where(positive_mask, q, 0.)


def hard_positive_gradient_ratio(views, fusion_config, hard_mask=None):
    """
    Measure how the hard weight changes the gradient of the loss with
    respect to the hard pair similarities: the mean over hard pairs of
    |dL/dsim| with w_h divided by |dL/dsim| with w_h = 1.

    Returns:
    ratio :: float - None when no pair is hard
    """
    vectors = np.asarray(getval(views.views))
    positive_mask = views.positive_mask()
    if hard_mask is None:
        hard_mask = select_hard_positives(views, fusion_config.hard_ratio)
    if not np.any(hard_mask):
        return None
    similarity = np.matmul(vectors, vectors.T)
    grads = list()
    for hard_weight in (fusion_config.hard_weight, 1.):
        loss = lambda sim: similarity_contrastive_loss(sim, positive_mask,
                                                       fusion_config.temperature,
                                                       hard_mask=hard_mask,
                                                       hard_weight=hard_weight,)
        grads.append(np.abs(autograd.grad(loss)(similarity)[hard_mask]))
    #ENDFOR
    return float(np.mean(grads[0] / np.maximum(grads[1], 1e-300)))


class HardPositiveContrastive(Cost):
    """
    This cost is the stage-1 contrastive loss with hard positives
    scaled by `hard_weight`.

    Fields:
    cost_multiplier
    fusion_config :: clmm.models.configs.FusionConfig
    name
    """
    name = "hard_positive_contrastive"

    def __init__(self, fusion_config, cost_multiplier=1.):
        super().__init__(cost_multiplier=cost_multiplier)
        self.fusion_config = fusion_config


    def cost(self, views, hard_mask=None):
        """
        Arguments:
        views :: clmm.models.fusedviewbatch.FusedViewBatch

        Returns:
        cost :: float
        """
        return contrastive_loss(views, self.fusion_config,
                                hard_mask=hard_mask) * self.cost_multiplier
