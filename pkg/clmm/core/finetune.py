"""
finetune.py - a module to expose the stage-2 primary - auxiliary
collaborative fine-tuning algorithm
"""

import logging

from autograd.tracer import getval
import numpy as np

from clmm.core.common import (STREAM_FINETUNE, STREAM_INIT, batch_indices,
                              check_finite, copy_params, stack_modalities,
                              stream_rng, strip_params,)
from clmm.models import (CollabState, ContractError, Dummy, FinetuneConfig,
                         FinetuneResult, FinetuneState, check_congruent,
                         config_to_json,)
from clmm.standard import (SGD, CrossEntropy, Distillation, backward,
                           classify, init_dual_branch_params,
                           init_encoder_params,)

logger = logging.getLogger(__name__)

### MAIN METHODS ###

def ema_update(state):
    """
    Move the primary parameters toward the auxiliary parameters:
        t <- t + 1
        alpha = min(1 - 1 / (t + 1), alpha0)
        theta_EMA <- alpha theta_EMA + (1 - alpha) theta

    Arguments:
    state :: clmm.models.collabstate.CollabState - updated in place

    Returns:
    alpha :: float - the momentum used
    """
    check_congruent(state.auxiliary, state.primary)
    state.step += 1
    alpha = min(1. - 1. / (state.step + 1), state.alpha0)
    state.primary = {name: alpha * state.primary[name] + (1. - alpha) * value
                     for name, value in state.auxiliary.items()}
    return alpha


def init_collab_state(encoder_config, finetune_config, class_count, seed,
                      encoder_params=None, qom_prior=None,):
    """
    Build the stage-2 state. The auxiliary and the primary start from the
    same parameters: the given encoder (or a random one) and a freshly
    initialized dual branch.

    Args:
    encoder_config :: clmm.models.configs.EncoderConfig - bound
    finetune_config :: clmm.models.configs.FinetuneConfig
    class_count :: int
    seed :: int

    encoder_params :: dict - pretrained encoder/* parameters
    qom_prior :: ndarray (M) - the quality prior, uniform when not given

    Returns:
    state :: clmm.models.collabstate.CollabState
    """
    # Index 1 keeps the stage-2 draws apart from the stage-1 init.
    rng = stream_rng(seed, STREAM_INIT, 1)
    if encoder_params is None:
        encoder_params = init_encoder_params(encoder_config, rng)
    auxiliary = copy_params(encoder_params)
    auxiliary.update(init_dual_branch_params(encoder_config, finetune_config,
                                             class_count, rng))
    modality_count = encoder_config.modality_count
    if qom_prior is None:
        qom_prior = np.full(modality_count, 1. / modality_count)
    elif np.shape(qom_prior) != (modality_count,):
        raise ContractError("The quality prior has shape {}, expected ({},)."
                            "".format(np.shape(qom_prior), modality_count))
    return CollabState(auxiliary, copy_params(auxiliary), qom_prior,
                       alpha0=finetune_config.alpha0,
                       lambda_distill=finetune_config.lambda_distill,)


def finetune_step(windows, state, encoder_config, finetune_config,
                  optimizer, reporter=None):
    """
    Run one collaborative step on a labeled batch:
    L = CE(F_theta, y) + lambda_distill KL(softmax F_EMA || softmax F_theta),
    one optimizer step on the auxiliary, then one EMA update of the
    primary. When `finetune_config.use_collaborative` is off the loss is
    plain cross-entropy and the primary is a copy of the auxiliary.

    Args:
    windows :: list(clmm.models.datamodels.MultimodalWindow) - labeled
    state :: clmm.models.collabstate.CollabState - updated in place
    encoder_config :: clmm.models.configs.EncoderConfig
    finetune_config :: clmm.models.configs.FinetuneConfig
    optimizer :: clmm.standard.optimizers.sgd.SGD - its velocity is
        replaced by the state's velocity

    reporter :: any - receives the batch quality weights as `beta`

    Returns:
    components :: dict - ce, distill, total, alpha, grads_l2
    """
    labels = [window.label for window in windows]
    if len(labels) == 0 or any(label is None for label in labels):
        raise ContractError("finetune_step needs a non-empty labeled batch.")
    labels = np.asarray(labels, dtype=int)
    if reporter is None:
        reporter = Dummy()
    inputs = stack_modalities(windows)

    # The primary is evaluated outside the differentiated function,
    # so it never receives gradients.
    primary_logits = classify(inputs, state.primary, encoder_config,
                              finetune_config, state.qom_prior)
    total, grads = (backward(_evaluate_collaborative, 0)
                    (state.auxiliary, inputs, labels, primary_logits,
                     state, encoder_config, finetune_config, reporter))
    if set(grads) != set(state.auxiliary):
        raise ContractError("Gradients were produced for parameters outside the auxiliary.")
    check_finite(total, "The stage-2 loss at step {}".format(state.step))
    reporter.beta = getval(reporter.beta)

    # Update the auxiliary.
    flat_params, slap = strip_params(state.auxiliary)
    flat_grads, _ = strip_params(grads)
    optimizer.velocity = state.velocity
    state.auxiliary = slap(optimizer.update(flat_grads, flat_params))
    state.velocity = optimizer.velocity

    # Update the primary.
    if finetune_config.use_collaborative:
        alpha = ema_update(state)
    else:
        state.step += 1
        state.primary = copy_params(state.auxiliary)
        alpha = 0.

    return {"ce": reporter.ce, "distill": reporter.distill, "total": float(total),
            "alpha": float(alpha), "grads_l2": float(np.linalg.norm(flat_grads)),}


def finetune_collaborative(config, encoder_config, windows, class_count,
                           encoder_params=None, qom_prior=None,
                           resume_state=None, save_file_path=None,):
    """
    Fine-tune the stage-2 classifier on labeled windows with the
    primary - auxiliary collaborative scheme. Use the primary for
    inference.

    Batches are drawn from a per-epoch permutation that depends only on
    the seed and the epoch, so a run resumed from a stage-2 checkpoint
    continues exactly where the interrupted run stopped.

    Args:
    config :: clmm.models.configs.RunConfig - the finetune section and
        the seed are used
    encoder_config :: clmm.models.configs.EncoderConfig - bound
    windows :: list(clmm.models.datamodels.MultimodalWindow) - labeled
    class_count :: int

    encoder_params :: dict - the stage-1 encoder. When neither this nor
        `resume_state` is given, the same architecture is trained from
        random init as a supervised baseline, without the collaborative
        scheme.
    qom_prior :: ndarray (M) - the stage-1 quality prior
    resume_state :: clmm.models.collabstate.CollabState - a state loaded
        from a stage-2 checkpoint; `encoder_params` and `qom_prior` are
        ignored when given
    save_file_path :: str - the h5 history file

    Returns:
    result :: clmm.models.collabstate.FinetuneResult
    """
    finetune_config = config.finetune
    sample_count = len(windows)
    if sample_count < 1:
        raise ContractError("Fine-tuning needs at least one labeled window.")
    if any(window.label is None for window in windows):
        raise ContractError("Fine-tuning needs labeled windows.")
    if encoder_params is None and resume_state is None:
        logger.info("No pretrained encoder, training a supervised baseline "
                    "from random init without the collaborative scheme.")
        finetune_config = FinetuneConfig.from_dict(dict(finetune_config.to_dict(),
                                                        use_collaborative=False))

    if resume_state is None:
        state = init_collab_state(encoder_config, finetune_config, class_count,
                                  config.seed, encoder_params=encoder_params,
                                  qom_prior=qom_prior,)
    else:
        state = resume_state
        state.alpha0 = finetune_config.alpha0
        state.lambda_distill = finetune_config.lambda_distill

    batch_count = len(batch_indices(sample_count, finetune_config.batch_size,
                                    np.arange(sample_count)))
    step_count = finetune_config.epoch_count * batch_count
    if state.step > step_count:
        raise ContractError("The state has already taken {} steps, the configuration "
                            "asks for {}.".format(state.step, step_count))
    if state.step > 0:
        logger.info("Resuming fine-tuning at step %d of %d.", state.step, step_count)

    costs = [CrossEntropy(), Distillation(cost_multiplier=finetune_config.lambda_distill)]
    optimizer = SGD(learning_rate=finetune_config.learning_rate,
                    momentum=finetune_config.momentum)
    pstate = FinetuneState(config_to_json(config), costs, step_count,
                           finetune_config.log_iteration_step, optimizer,
                           save_file_path, finetune_config.save_iteration_step,)
    pstate.log_and_save_initial()

    reporter = Dummy()
    result = FinetuneResult(state=state)
    for step in range(state.step, step_count):
        epoch, batch_index = divmod(step, batch_count)
        order = stream_rng(config.seed, STREAM_FINETUNE, epoch).permutation(sample_count)
        indices = batch_indices(sample_count, finetune_config.batch_size, order)[batch_index]
        components = finetune_step([windows[i] for i in indices], state,
                                   encoder_config, finetune_config, optimizer,
                                   reporter=reporter)
        pstate.log_and_save(step, components["ce"], components["distill"],
                            components["total"], components["alpha"],
                            components["grads_l2"])
        result.history.append(dict(step=step, ce=components["ce"],
                                   distill=components["distill"],
                                   total=components["total"],
                                   alpha=components["alpha"]))
    #ENDFOR

    return result


### HELPER METHODS ###

def _evaluate_collaborative(auxiliary, inputs, labels, primary_logits,
                            state, encoder_config, finetune_config, reporter):
    """
    Compute the stage-2 loss of the auxiliary.

    Arguments:
    auxiliary :: dict - the differentiated parameters
    inputs :: list(ndarray (B x C_j x T_j))
    labels :: ndarray (B) - int
    primary_logits :: ndarray (B x K) - constant
    state :: clmm.models.collabstate.CollabState
    encoder_config
    finetune_config
    reporter :: any - receives ce, distill and beta

    Returns:
    loss :: float
    """
    auxiliary_logits = classify(inputs, auxiliary, encoder_config, finetune_config,
                                state.qom_prior, reporter=reporter)
    ce = CrossEntropy().cost(auxiliary_logits, labels)
    distill = Distillation().cost(auxiliary_logits, primary_logits)
    reporter.ce = float(getval(ce))
    reporter.distill = float(getval(distill))
    if not finetune_config.use_collaborative:
        return ce
    return ce + state.lambda_distill * distill
