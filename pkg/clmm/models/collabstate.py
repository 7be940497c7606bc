"""
collabstate.py - This module defines the classes that carry the state and
results of the two training stages.
"""

import numpy as np

from clmm.models.errors import ContractError

class CollabState(object):
    """
    This class encapsulates the state of primary - auxiliary
    collaborative training.

    Fields:
    alpha0 :: float - the EMA momentum cap
    auxiliary :: dict(str -> ndarray) - theta, trained by gradients
    lambda_distill :: float
    primary :: dict(str -> ndarray) - theta_EMA, never differentiated
    qom_prior :: ndarray (M) - the modality quality prior
    step :: int - t, the number of EMA updates so far
    velocity :: ndarray - the optimizer velocity, None before the first step
    """

    def __init__(self, auxiliary, primary, qom_prior, alpha0=0.9,
                 lambda_distill=0.1, step=0, velocity=None,):
        """
        See class fields for arguments not listed here.
        """
        super().__init__()
        self.alpha0 = alpha0
        self.auxiliary = auxiliary
        self.lambda_distill = lambda_distill
        self.primary = primary
        self.qom_prior = np.asarray(qom_prior, dtype=np.float64)
        self.step = int(step)
        self.velocity = velocity
        check_congruent(auxiliary, primary)


    def snapshot_primary(self):
        """
        Copy theta_EMA for a concurrent reader.
        """
        return {name: np.array(value, copy=True) for name, value in self.primary.items()}


def check_congruent(auxiliary, primary):
    """
    Raise a ContractError unless the two parameter sets share names and shapes.
    """
    if set(auxiliary) != set(primary):
        drift = sorted(set(auxiliary) ^ set(primary))
        raise ContractError("The auxiliary and primary parameters differ in names: {}."
                            "".format(drift[:5]))
    for name in auxiliary:
        if np.shape(auxiliary[name]) != np.shape(primary[name]):
            raise ContractError("Parameter {} has shape {} in the auxiliary and {} in the primary."
                                "".format(name, np.shape(auxiliary[name]),
                                          np.shape(primary[name])))
    #ENDFOR


class PretrainResult(object):
    """
    This class encapsulates the result of the
    clmm.core.pretrain.pretrain_contrastive program.

    Fields:
    encoder_params :: dict - encoder/* parameters
    losses :: ndarray (epoch_count) - epoch mean losses
    projection_params :: dict - projection/* parameters
    qom_prior :: ndarray (M)
    """

    def __init__(self, encoder_params=None, losses=None,
                 projection_params=None, qom_prior=None,):
        super().__init__()
        self.encoder_params = encoder_params
        self.losses = losses
        self.projection_params = projection_params
        self.qom_prior = qom_prior


    def tensors(self):
        """
        The named tensors of a stage-1 checkpoint.
        """
        tensors = dict(self.encoder_params)
        tensors.update(self.projection_params)
        tensors["qom_prior"] = self.qom_prior
        return tensors


class FinetuneResult(object):
    """
    This class encapsulates the result of the
    clmm.core.finetune.finetune_collaborative program.

    Fields:
    history :: list(dict) - {step, ce, distill, total, alpha} per step
    state :: CollabState
    """

    def __init__(self, history=None, state=None,):
        super().__init__()
        self.history = list() if history is None else history
        self.state = state


    def tensors(self):
        """
        The named tensors of a stage-2 checkpoint.
        """
        tensors = dict()
        for name, value in self.state.auxiliary.items():
            tensors["auxiliary/" + name] = value
        for name, value in self.state.primary.items():
            tensors["primary/" + name] = value
        if self.state.velocity is not None:
            tensors["velocity/flat"] = self.state.velocity
        tensors["qom_prior"] = self.state.qom_prior
        tensors["state/step"] = np.array(float(self.state.step))
        return tensors


def _with_prefix(tensors, prefix):
    return {name[len(prefix):]: np.array(value, dtype=np.float64)
            for name, value in tensors.items() if name.startswith(prefix)}


def pretrain_result_from_tensors(tensors):
    """
    Rebuild a PretrainResult from the tensors of a stage-1 checkpoint.
    """
    if "qom_prior" not in tensors:
        raise ContractError("The stage-1 checkpoint has no qom_prior tensor.")
    encoder_params = {name: value for name, value in tensors.items()
                      if name.startswith("encoder/")}
    if not encoder_params:
        raise ContractError("The stage-1 checkpoint has no encoder parameters.")
    projection_params = {name: value for name, value in tensors.items()
                         if name.startswith("projection/")}
    return PretrainResult(encoder_params=encoder_params,
                          projection_params=projection_params,
                          qom_prior=np.array(tensors["qom_prior"]),)


def collab_state_from_tensors(tensors, alpha0=0.9, lambda_distill=0.1):
    """
    Rebuild a CollabState from the tensors of a stage-2 checkpoint.
    """
    for name in ("qom_prior", "state/step"):
        if name not in tensors:
            raise ContractError("The stage-2 checkpoint has no {} tensor.".format(name))
    auxiliary = _with_prefix(tensors, "auxiliary/")
    primary = _with_prefix(tensors, "primary/")
    if not auxiliary or not primary:
        raise ContractError("A stage-2 checkpoint needs both the auxiliary and "
                            "the primary parameters.")
    velocity = tensors.get("velocity/flat")
    if velocity is not None:
        velocity = np.array(velocity, dtype=np.float64)
    return CollabState(auxiliary, primary, np.array(tensors["qom_prior"]),
                       alpha0=alpha0, lambda_distill=lambda_distill,
                       step=int(tensors["state/step"]), velocity=velocity,)
