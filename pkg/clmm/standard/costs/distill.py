"""
distill.py - This module defines the stage-2 costs: cross entropy on
the auxiliary model and distillation from the primary model.
"""

import autograd.numpy as anp
from autograd.tracer import getval
import numpy as np

from clmm.models.cost import Cost
from clmm.models.errors import ContractError, DimensionError
from clmm.standard.functions import log_softmax, softmax

def cross_entropy(logits, labels):
    """
    Compute the batch mean of -log softmax(logits)[label].

    Arguments:
    logits :: ndarray (B x K)
    labels :: ndarray (B) - int class indices

    Returns:
    loss :: float
    """
    if labels is None or any(label is None for label in labels):
        raise ContractError("cross_entropy needs a label for every sample.")
    labels = np.asarray(labels, dtype=int)
    logits_shape = anp.shape(logits)
    if len(logits_shape) != 2 or labels.shape != (logits_shape[0],):
        raise DimensionError("cross_entropy got logits of shape {} and labels of shape {}."
                             "".format(logits_shape, labels.shape))
    if np.any(labels < 0) or np.any(labels >= logits_shape[1]):
        raise DimensionError("Labels {} are out of range for {} classes."
                             "".format(labels.tolist(), logits_shape[1]))
    log_probabilities = log_softmax(logits, axis=-1)
    return -anp.mean(log_probabilities[np.arange(logits_shape[0]), labels])


def distill_loss(auxiliary_logits, primary_logits):
    """
    Compute KL(softmax(F_primary) || softmax(F_auxiliary)), averaged over
    the batch. The primary logits are treated as constants, so gradients
    flow only into the auxiliary logits.

    Arguments:
    auxiliary_logits :: ndarray (K) or (B x K) - F_theta
    primary_logits :: ndarray (K) or (B x K) - F_xi

    Returns:
    loss :: float >= 0
    """
    auxiliary_shape = anp.shape(auxiliary_logits)
    primary_shape = np.shape(primary_logits)
    if auxiliary_shape != primary_shape:
        raise DimensionError("distill_loss class counts disagree for auxiliary logits {} "
                             "and primary logits {}.".format(auxiliary_shape, primary_shape))
    primary_logits = np.asarray(getval(primary_logits), dtype=np.float64)
    primary_log_probabilities = log_softmax(primary_logits, axis=-1)
    primary_probabilities = softmax(primary_logits, axis=-1)
    auxiliary_log_probabilities = log_softmax(auxiliary_logits, axis=-1)
    kl = anp.sum(primary_probabilities
                 * (primary_log_probabilities - auxiliary_log_probabilities), axis=-1)
    return anp.mean(kl)


class CrossEntropy(Cost):
    """
    This cost penalizes wrong class predictions of the auxiliary model.

    Fields:
    cost_multiplier
    name
    """
    name = "cross_entropy"

    def cost(self, logits, labels):
        return cross_entropy(logits, labels) * self.cost_multiplier


class Distillation(Cost):
    """
    This cost pulls the auxiliary prediction toward the primary one.
    Its multiplier is lambda_distill.

    Fields:
    cost_multiplier
    name
    """
    name = "distillation"

    def cost(self, auxiliary_logits, primary_logits):
        return distill_loss(auxiliary_logits, primary_logits) * self.cost_multiplier
