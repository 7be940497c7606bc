"""
pretrain.py - a module to expose the stage-1 contrastive fusion
pretraining algorithm
"""

import logging

import numpy as np

from clmm.core.common import (STREAM_INIT, STREAM_PRETRAIN,
                              batch_indices, check_finite, select_params,
                              stack_modalities, stream_rng, strip_params,)
from clmm.models import (ContractError, Dummy,
                         PretrainResult, PretrainState, config_to_json,)
from clmm.standard import (SGD, HardPositiveContrastive, augment, backward,
                           embed, fuse_batch, hard_positive_gradient_ratio,
                           init_encoder_params, init_projection_params,
                           qom_prior, sample_fusion_weights,)

logger = logging.getLogger(__name__)

# samples embedded at once when estimating the quality prior
_EMBED_CHUNK = 64

### MAIN METHODS ###

def pretrain_contrastive(config, encoder_config, windows,
                         encoder_params=None, projection_params=None,
                         save_file_path=None,):
    """
    Learn the per-modality encoders and projection heads from unlabeled
    windows by minimizing the hard-positive weighted contrastive loss of
    randomly fused views.

    Every batch is augmented (one draw per sample, shared by its
    modalities), embedded, and fused into P views per sample with fusion
    weights shared across the batch. Views of the same sample are
    positives, all other views are negatives.

    Args:
    config :: clmm.models.configs.RunConfig - the augmentation, fusion,
        pretrain sections and the seed are used
    encoder_config :: clmm.models.configs.EncoderConfig - bound to the
        modalities of `windows`
    windows :: list(clmm.models.datamodels.MultimodalWindow) - the
        training windows, labels are ignored

    encoder_params :: dict - initial encoder/* parameters, drawn from
        the init stream when not given
    projection_params :: dict - initial projection/* parameters, drawn
        from the init stream when not given
    save_file_path :: str - the h5 history file, no history is written
        when not given

    Returns:
    result :: clmm.models.collabstate.PretrainResult
    """
    pretrain_config = config.pretrain
    sample_count = len(windows)
    if sample_count < 2:
        raise ContractError("Pretraining needs at least 2 windows, got {}; "
                            "a single sample has no negatives.".format(sample_count))
    if windows[0].modality_count != encoder_config.modality_count:
        raise ContractError("The windows have {} modalities, the encoder expects {}."
                            "".format(windows[0].modality_count,
                                      encoder_config.modality_count))

    # Initialize the parameters.
    init_rng = stream_rng(config.seed, STREAM_INIT)
    if encoder_params is None:
        encoder_params = init_encoder_params(encoder_config, init_rng)
    if projection_params is None:
        projection_params = init_projection_params(encoder_config, init_rng)
    initial_params = dict(encoder_params)
    initial_params.update(projection_params)

    # Every epoch sees the same batch sizes; a trailing single sample
    # has no negatives and is dropped.
    batch_count = len(batch_indices(sample_count, pretrain_config.batch_size,
                                    np.arange(sample_count)))
    if sample_count % pretrain_config.batch_size == 1:
        batch_count -= 1
        logger.warning("%d windows with batch size %d leave a batch of 1, "
                       "dropping it every epoch.", sample_count,
                       pretrain_config.batch_size)

    cost = HardPositiveContrastive(config.fusion)
    optimizer = SGD(learning_rate=pretrain_config.learning_rate,
                    momentum=pretrain_config.momentum)
    pstate = PretrainState(config_to_json(config), [cost],
                           pretrain_config.epoch_count,
                           pretrain_config.log_epoch_step, optimizer,
                           save_file_path, pretrain_config.save_epoch_step,)
    pstate.batch_count = batch_count
    pstate.config = config
    pstate.encoder_config = encoder_config
    pstate.windows = windows
    pstate.log_and_save_initial()

    reporter = Dummy()
    reporter.batch_grads_l2 = list()
    reporter.batch_losses = list()
    reporter.iteration = 0
    result = PretrainResult(losses=list())
    # Convert the parameters from cost function format to optimizer format.
    flat_params, slap = strip_params(initial_params)
    pstate.slap = slap
    flat_params = optimizer.run(None, pretrain_config.epoch_count * batch_count,
                                flat_params, _pcj_wrap,
                                args=(pstate, reporter, result))

    params = slap(flat_params)
    result.encoder_params = select_params(params, "encoder/")
    result.projection_params = select_params(params, "projection/")
    result.losses = np.asarray(result.losses, dtype=np.float64)
    result.qom_prior = estimate_qom_prior(windows, params, encoder_config)
    logger.info("Pretraining finished, quality prior %s.",
                np.array2string(result.qom_prior, precision=4))

    return result


def estimate_qom_prior(windows, params, encoder_config):
    """
    Embed `windows` without augmentation and estimate the modality
    quality prior from the projected embeddings.

    Returns:
    prior :: ndarray (M)
    """
    embeddings = list()
    for start in range(0, len(windows), _EMBED_CHUNK):
        inputs = stack_modalities(windows[start:start + _EMBED_CHUNK])
        embeddings.append(np.asarray(embed(inputs, params, encoder_config)))
    #ENDFOR
    return qom_prior(np.concatenate(embeddings, axis=0))


### HELPER METHODS ###

def _batch(flat_params, pstate, reporter):
    """
    Draw the batch, augmentations and fusion weights of the current
    iteration. They depend only on the seed, the epoch and the batch index.
    """
    epoch, batch_index = divmod(reporter.iteration, pstate.batch_count)
    config = pstate.config
    order = stream_rng(config.seed, STREAM_PRETRAIN, epoch).permutation(len(pstate.windows))
    indices = batch_indices(len(pstate.windows), config.pretrain.batch_size, order)[batch_index]
    rng = stream_rng(config.seed, STREAM_PRETRAIN, epoch, batch_index + 1)
    augmented = [augment(pstate.windows[i], config.augmentation, rng) for i in indices]
    weights = sample_fusion_weights(pstate.encoder_config.modality_count,
                                    config.fusion.view_count,
                                    config.fusion.weight_range, rng)
    return epoch, batch_index, stack_modalities(augmented), weights


def _pcj_wrap(flat_params, pstate, reporter, result):
    """
    Do intermediary work between the optimizer feeding parameters
    to the jacobian of _evaluate_contrastive.

    Returns:
    grads :: ndarray - the gradients in optimizer format
    terminate :: bool
    """
    epoch, batch_index, inputs, weights = _batch(flat_params, pstate, reporter)
    reporter.report_gradient_ratio = (reporter.iteration == 0
                                      and logger.isEnabledFor(logging.DEBUG))
    params = pstate.slap(flat_params)
    loss, grads = backward(_evaluate_contrastive, 0)(params, inputs, weights,
                                                     pstate, reporter)
    check_finite(loss, "The contrastive loss of epoch {} batch {}"
                 "".format(epoch, batch_index))
    flat_grads, _ = strip_params(grads)
    reporter.batch_losses.append(float(loss))
    reporter.batch_grads_l2.append(float(np.linalg.norm(flat_grads)))

    # Log and save at the end of every epoch.
    if batch_index == pstate.batch_count - 1:
        epoch_loss = float(np.mean(reporter.batch_losses))
        epoch_grads_l2 = float(np.mean(reporter.batch_grads_l2))
        result.losses.append(epoch_loss)
        pstate.log_and_save(epoch, epoch_loss, epoch_grads_l2)
        reporter.batch_losses = list()
        reporter.batch_grads_l2 = list()
    reporter.iteration += 1

    return flat_grads, False


def _evaluate_contrastive(params, inputs, weights, pstate, reporter):
    """
    Compute the contrastive loss of one batch.

    Arguments:
    params :: dict - encoder/* and projection/* parameters
    inputs :: list(ndarray (B x C_j x T_j))
    weights :: ndarray (P x M) - the fusion weights of the batch
    pstate :: clmm.models.programstate.PretrainState
    reporter :: any

    Returns:
    loss :: float
    """
    embeddings = embed(inputs, params, pstate.encoder_config)
    views = fuse_batch(embeddings, weights)
    if getattr(reporter, "report_gradient_ratio", False):
        ratio = hard_positive_gradient_ratio(views, pstate.config.fusion)
        if ratio is None:
            logger.debug("No hard positives in the first batch.")
        else:
            logger.debug("Hard positive gradient ratio (w_h=%g vs 1): %.6f",
                         pstate.config.fusion.hard_weight, ratio)
    return pstate.costs[0].cost(views)
