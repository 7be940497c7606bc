"""
evaluate.py - a module to expose evaluation of the primary model and
the ablation study
"""

import logging

import numpy as np

from clmm.core.common import STREAM_SHUFFLE, stack_modalities, stream_rng
from clmm.core.finetune import finetune_collaborative
from clmm.core.pretrain import pretrain_contrastive
from clmm.models import ContractError, RunConfig
from clmm.standard import (class_count_of, confusion_matrix, metrics_report,
                           predict, shuffle_labels,)

logger = logging.getLogger(__name__)

# samples classified at once
_PREDICT_CHUNK = 64

ABLATION_VARIANTS = ("full", "no_hard", "no_collab", "baseline", "shuffled",)

### MAIN METHODS ###

def evaluate_primary(primary_params, qom_prior, encoder_config, finetune_config,
                     windows, class_names=None, average="macro",):
    """
    Classify labeled windows with the primary model and summarize the
    predictions.

    Args:
    primary_params :: dict - encoder/* and dual/* parameters of theta_EMA
    qom_prior :: ndarray (M)
    encoder_config :: clmm.models.configs.EncoderConfig - bound
    finetune_config :: clmm.models.configs.FinetuneConfig
    windows :: list(clmm.models.datamodels.MultimodalWindow) - labeled

    class_names :: list(str) - the dataset classes, must match the
        classifier's class count
    average :: str - "macro" or "weighted" F1

    Returns:
    report :: dict - see clmm.standard.metrics.metrics_report
    """
    class_count = class_count_of(primary_params)
    if class_names is not None and len(class_names) != class_count:
        raise ContractError("The checkpoint classifies {} classes, the dataset has {}."
                            "".format(class_count, len(class_names)))
    if len(windows) == 0:
        raise ContractError("There are no windows to evaluate.")
    labels = [window.label for window in windows]
    if any(label is None for label in labels):
        raise ContractError("Evaluation needs labeled windows.")
    labels = np.asarray(labels, dtype=int)
    if np.any(labels >= class_count):
        raise ContractError("Label {} is out of range for a {} class checkpoint."
                            "".format(int(np.max(labels)), class_count))

    predictions = list()
    for start in range(0, len(windows), _PREDICT_CHUNK):
        inputs = stack_modalities(windows[start:start + _PREDICT_CHUNK])
        predictions.append(predict(inputs, primary_params, encoder_config,
                                   finetune_config, qom_prior))
    #ENDFOR
    cm = confusion_matrix(labels, np.concatenate(predictions), class_count)
    return metrics_report(cm, class_names=class_names, average=average)


def run_ablation(config, encoder_config, unlabeled, train, test, class_names,
                 seeds=(0, 1, 2), variants=ABLATION_VARIANTS,):
    """
    Train and evaluate each variant once per seed:
    full - pretraining and collaborative fine-tuning,
    no_hard - pretraining with fusion.hard_weight = 1,
    no_collab - fine-tuning without the EMA primary and distillation,
    baseline - the same architecture trained from random init on the
        labeled windows only,
    shuffled - "full" with the labels of the train and test windows
        permuted together, which should score near chance.

    Args:
    config :: clmm.models.configs.RunConfig - its seed is replaced
    encoder_config :: clmm.models.configs.EncoderConfig - bound
    unlabeled :: list(MultimodalWindow) - the pretraining windows
    train :: list(MultimodalWindow) - the labeled windows
    test :: list(MultimodalWindow) - the evaluation windows
    class_names :: list(str)

    seeds :: iterable(int)
    variants :: iterable(str) - a subset of ABLATION_VARIANTS

    Returns:
    summary :: dict - per variant the accuracies per seed, their mean and
        the mean accuracy relative to "full" when it ran
    """
    for variant in variants:
        if variant not in ABLATION_VARIANTS:
            raise ContractError("Unknown ablation variant {}, expected one of {}."
                                "".format(variant, ABLATION_VARIANTS))
    #ENDFOR
    accuracies = {variant: list() for variant in variants}
    for seed in seeds:
        pretrained = dict()
        for variant in variants:
            variant_config = _variant_config(config, variant, seed)
            encoder_params = qom_prior = None
            if variant != "baseline":
                # full and no_collab share one stage-1 run per seed
                hard = variant != "no_hard"
                if hard not in pretrained:
                    pretrained[hard] = pretrain_contrastive(variant_config, encoder_config,
                                                            unlabeled)
                encoder_params = pretrained[hard].encoder_params
                qom_prior = pretrained[hard].qom_prior
            variant_train, variant_test = train, test
            if variant == "shuffled":
                shuffled = shuffle_labels(train + test, stream_rng(seed, STREAM_SHUFFLE))
                variant_train, variant_test = shuffled[:len(train)], shuffled[len(train):]
            result = finetune_collaborative(variant_config, encoder_config, variant_train,
                                            len(class_names),
                                            encoder_params=encoder_params,
                                            qom_prior=qom_prior,)
            report = evaluate_primary(result.state.snapshot_primary(), result.state.qom_prior,
                                      encoder_config, variant_config.finetune, variant_test,
                                      class_names=class_names,)
            accuracies[variant].append(report["accuracy"])
            logger.info("Ablation seed %d %s: accuracy %.4f.", seed, variant,
                        report["accuracy"])
        #ENDFOR
    #ENDFOR

    summary = dict()
    for variant in variants:
        summary[variant] = {"accuracies": accuracies[variant],
                            "mean_accuracy": float(np.mean(accuracies[variant]))}
    #ENDFOR
    if "full" in summary:
        for variant in variants:
            summary[variant]["delta_vs_full"] = (summary[variant]["mean_accuracy"]
                                                 - summary["full"]["mean_accuracy"])
        #ENDFOR
    return summary


### HELPER METHODS ###

def _variant_config(config, variant, seed):
    dict_ = config.to_dict()
    dict_["seed"] = int(seed)
    if variant == "no_hard":
        dict_["fusion"]["hard_weight"] = 1.
    elif variant in ("no_collab", "baseline"):
        dict_["finetune"]["use_collaborative"] = False
    return RunConfig.from_dict(dict_)
