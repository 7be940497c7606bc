"""
cli.py - the clmm command line driver

    clmm synth     --out DIR                      generate a synthetic dataset
    clmm pretrain  --data DIR --out CKPT          stage 1
    clmm finetune  --data DIR --checkpoint CKPT --out CKPT
                   (or --from-scratch, or --resume CKPT)   stage 2
    clmm eval      --data DIR --checkpoint CKPT   metrics of the primary model
    clmm inspect   --checkpoint CKPT              list a checkpoint
    clmm ablation  --data DIR                     full / no_hard / no_collab / baseline / shuffled

Every command accepts --config PATH, --seed N and --print-config.
The log level comes from the CLMM_LOG environment variable.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np
import pandas as pd

from clmm.core import (STREAM_SPLIT, STREAM_SYNTH, evaluate_primary,
                       finetune_collaborative, parameter_count,
                       pretrain_contrastive, run_ablation, stream_rng,)
from clmm.models import (ClmmError, ConfigError, ContractError,
                         FinetuneConfig, RunConfig,
                         collab_state_from_tensors,
                         pretrain_result_from_tensors,)
from clmm.standard import (class_count_of, dump_json, ensure_parent_dir,
                           format_report, generate_save_file_path,
                           load_checkpoint, load_dataset, save_checkpoint,
                           save_dataset, select_modalities, select_split,
                           split, synth_generate, synthetic_manifest_entries,)
from clmm.standard.metrics import F1_AVERAGES

logger = logging.getLogger("clmm")

LOG_ENV_VAR = "CLMM_LOG"
LOG_FORMAT = "%(asctime)s %(name)s %(levelname)s: %(message)s"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

### COMMANDS ###

def cmd_synth(args, config):
    """
    Generate the synthetic pool, split it and write a dataset directory.
    """
    spec = config.synth
    windows = synth_generate(spec, stream_rng(config.seed, STREAM_SYNTH))
    unlabeled, train, test = split(windows, spec.labeled_fraction,
                                   stream_rng(config.seed, STREAM_SPLIT),
                                   test_fraction=spec.test_fraction)
    modalities, classes = synthetic_manifest_entries(spec)
    save_dataset(args.out, unlabeled + train + test, modalities, classes)
    print("Wrote {} samples ({} unlabeled, {} train, {} test) to {}."
          "".format(len(windows), len(unlabeled), len(train), len(test), args.out))
    return 0


def cmd_pretrain(args, config):
    manifest, windows, encoder_config = _load(args.data, config)
    windows = select_split(windows, ("unlabeled", "train"))
    if not any(window.split == "unlabeled" or window.label is None for window in windows):
        raise ContractError("The dataset {} has no unlabeled samples to pretrain on."
                            "".format(args.data))
    result = pretrain_contrastive(config, encoder_config, windows,
                                  save_file_path=_history_path(args, "pretrain"))
    ensure_parent_dir(args.out)
    save_checkpoint(args.out, result.tensors(), 1)
    loss_log = _loss_log_path(args)
    pd.DataFrame({"epoch": np.arange(len(result.losses)),
                  "loss": result.losses}).to_csv(loss_log, index=False)
    print("Wrote the stage-1 checkpoint {} and the loss log {}.".format(args.out, loss_log))
    return 0


def cmd_finetune(args, config):
    manifest, windows, encoder_config = _load(args.data, config)
    windows = [window for window in select_split(windows, "train")
               if window.label is not None]
    class_count = len(manifest.classes)
    encoder_params = qom_prior = resume_state = None
    if args.resume is not None:
        _, tensors = load_checkpoint(args.resume, expected_stage=2)
        resume_state = collab_state_from_tensors(tensors,
                                                 alpha0=config.finetune.alpha0,
                                                 lambda_distill=config.finetune.lambda_distill,)
        _check_class_count(class_count_of(resume_state.auxiliary), manifest.classes)
    elif args.checkpoint is not None:
        _, tensors = load_checkpoint(args.checkpoint, expected_stage=1)
        pretrained = pretrain_result_from_tensors(tensors)
        encoder_params = pretrained.encoder_params
        qom_prior = pretrained.qom_prior
    elif not args.from_scratch:
        raise ConfigError("finetune needs --checkpoint, --resume or --from-scratch.")
    result = finetune_collaborative(config, encoder_config, windows, class_count,
                                    encoder_params=encoder_params, qom_prior=qom_prior,
                                    resume_state=resume_state,
                                    save_file_path=_history_path(args, "finetune"),)
    ensure_parent_dir(args.out)
    save_checkpoint(args.out, result.tensors(), 2)
    loss_log = _loss_log_path(args)
    pd.DataFrame(result.history,
                 columns=["step", "ce", "distill", "total", "alpha"]).to_csv(loss_log,
                                                                            index=False)
    print("Wrote the stage-2 checkpoint {} and the loss log {}.".format(args.out, loss_log))
    return 0


def cmd_eval(args, config):
    manifest, windows, encoder_config = _load(args.data, config)
    windows = [window for window in select_split(windows, args.split)
               if window.label is not None]
    _, tensors = load_checkpoint(args.checkpoint, expected_stage=2)
    state = collab_state_from_tensors(tensors)
    _check_class_count(class_count_of(state.primary), manifest.classes)
    # The recurrent branch is present exactly when its parameters are.
    use_bigru = "dual/gru_fwd/w_x" in state.primary
    finetune_config = FinetuneConfig.from_dict(dict(config.finetune.to_dict(),
                                                    use_bigru=use_bigru))
    report = evaluate_primary(state.primary, state.qom_prior, encoder_config,
                              finetune_config, windows, class_names=manifest.classes,
                              average=args.average,)
    print(format_report(report))
    if args.out is not None:
        ensure_parent_dir(args.out)
        dump_json(report, args.out)
    return 0


def cmd_inspect(args, config):
    stage, tensors = load_checkpoint(args.checkpoint)
    print("checkpoint: {}".format(args.checkpoint))
    print("stage: {}".format(stage))
    print("crc: ok")
    width = max([len(name) for name in tensors] + [4])
    for name in sorted(tensors):
        print("{:<{}}  {:<16}  {}".format(name, width, str(tuple(tensors[name].shape)),
                                          tensors[name].size))
    #ENDFOR
    namespaces = dict()
    for name, value in tensors.items():
        namespace = name.split("/", 1)[0]
        namespaces[namespace] = namespaces.get(namespace, 0) + value.size
    #ENDFOR
    for namespace in sorted(namespaces):
        print("{} parameters: {}".format(namespace, namespaces[namespace]))
    print("total parameters: {}".format(parameter_count(tensors)))
    return 0


def cmd_ablation(args, config):
    manifest, windows, encoder_config = _load(args.data, config)
    unlabeled = select_split(windows, ("unlabeled", "train"))
    train = [window for window in select_split(windows, "train") if window.label is not None]
    test = [window for window in select_split(windows, "test") if window.label is not None]
    summary = run_ablation(config, encoder_config, unlabeled, train, test,
                           manifest.classes, seeds=args.seeds,)
    for variant, entry in summary.items():
        print("{:<10} mean accuracy {:.4f}  delta vs full {:+.4f}"
              "".format(variant, entry["mean_accuracy"], entry.get("delta_vs_full", 0.)))
    if args.out is not None:
        ensure_parent_dir(args.out)
        dump_json(summary, args.out)
    return 0


### DRIVER ###

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="a JSON run configuration")
    common.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    common.add_argument("--print-config", action="store_true",
                        help="print the effective configuration and exit")

    parser = argparse.ArgumentParser(prog="clmm",
                                     description="two-stage contrastive learning for "
                                     "multimodal activity recognition")
    sub = parser.add_subparsers(dest="cmd", required=True)

    synth = sub.add_parser("synth", parents=[common], help="generate a synthetic dataset")
    synth.add_argument("--out", required=True, help="the dataset directory")
    synth.set_defaults(func=cmd_synth)

    pretrain = sub.add_parser("pretrain", parents=[common], help="stage-1 pretraining")
    pretrain.add_argument("--data", required=True)
    pretrain.add_argument("--out", required=True, help="the stage-1 checkpoint")
    pretrain.add_argument("--loss-log", default=None,
                          help="the epoch,loss CSV, default OUT.losses.csv")
    pretrain.add_argument("--history-dir", default=None,
                          help="write an h5 training history to this directory")
    pretrain.set_defaults(func=cmd_pretrain)

    finetune = sub.add_parser("finetune", parents=[common], help="stage-2 fine-tuning")
    finetune.add_argument("--data", required=True)
    finetune.add_argument("--out", required=True, help="the stage-2 checkpoint")
    init = finetune.add_mutually_exclusive_group()
    init.add_argument("--checkpoint", default=None, help="a stage-1 checkpoint")
    init.add_argument("--resume", default=None, help="continue from a stage-2 checkpoint")
    init.add_argument("--from-scratch", action="store_true",
                      help="train the supervised baseline without pretraining")
    finetune.add_argument("--loss-log", default=None,
                          help="the step,ce,distill,total,alpha CSV, default OUT.losses.csv")
    finetune.add_argument("--history-dir", default=None)
    finetune.set_defaults(func=cmd_finetune)

    eval_ = sub.add_parser("eval", parents=[common], help="evaluate the primary model")
    eval_.add_argument("--data", required=True)
    eval_.add_argument("--checkpoint", required=True, help="a stage-2 checkpoint")
    eval_.add_argument("--split", default="test", choices=("unlabeled", "train", "test"))
    eval_.add_argument("--average", default="macro", choices=F1_AVERAGES)
    eval_.add_argument("--out", default=None, help="write the JSON report here")
    eval_.set_defaults(func=cmd_eval)

    inspect = sub.add_parser("inspect", parents=[common], help="list a checkpoint")
    inspect.add_argument("--checkpoint", required=True)
    inspect.set_defaults(func=cmd_inspect)

    ablation = sub.add_parser("ablation", parents=[common], help="run the ablation study")
    ablation.add_argument("--data", required=True)
    ablation.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ablation.add_argument("--out", default=None, help="write the JSON summary here")
    ablation.set_defaults(func=cmd_ablation)

    return parser


def main(argv=None):
    """
    Run one command. Errors are reported as a single line
    `clmm: error: <Kind>: <message>` with exit status 1.

    Returns:
    status :: int
    """
    args = build_parser().parse_args(argv)
    try:
        _configure_logging()
        config = _load_config(args)
        if args.print_config:
            print(json.dumps(config.to_dict(), indent=2, sort_keys=True))
            return 0
        return args.func(args, config)
    except (ClmmError, OSError) as error:
        message = " ".join(str(error).split())
        print("clmm: error: {}: {}".format(type(error).__name__, message), file=sys.stderr)
        return 1


### HELPER METHODS ###

def _configure_logging():
    level = os.environ.get(LOG_ENV_VAR, "WARNING").strip().upper()
    if level not in LOG_LEVELS:
        raise ConfigError("{} must be one of {}, got {}.".format(LOG_ENV_VAR, LOG_LEVELS, level))
    logging.basicConfig(level=getattr(logging, level), format=LOG_FORMAT)
    logging.getLogger("clmm").setLevel(getattr(logging, level))


def _load_config(args):
    if args.config is None:
        config = RunConfig()
    else:
        config = RunConfig.from_json_file(args.config)
    if args.seed is not None:
        config = RunConfig.from_dict(dict(config.to_dict(), seed=args.seed))
    return config


def _load(data_path, config):
    manifest, windows = load_dataset(data_path)
    manifest, windows = select_modalities(manifest, windows, config.modalities)
    encoder_config = config.encoder.bind(manifest.modality_names, manifest.channels,
                                         manifest.window_lengths)
    return manifest, windows, encoder_config


def _check_class_count(class_count, classes):
    if class_count != len(classes):
        raise ContractError("The checkpoint classifies {} classes, the dataset has {}."
                            "".format(class_count, len(classes)))


def _loss_log_path(args):
    if args.loss_log is not None:
        loss_log = args.loss_log
    else:
        loss_log = "{}.losses.csv".format(args.out)
    ensure_parent_dir(loss_log)
    return loss_log


def _history_path(args, name):
    if args.history_dir is None:
        return None
    return generate_save_file_path(name, args.history_dir)


if __name__ == "__main__":
    sys.exit(main())
