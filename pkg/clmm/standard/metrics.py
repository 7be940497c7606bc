"""
metrics.py - This module computes classification metrics from
confusion matrices and formats evaluation reports.
"""

import logging

import numpy as np
from sklearn.metrics import confusion_matrix as _sk_confusion_matrix

from clmm.models.errors import ContractError, DimensionError

logger = logging.getLogger(__name__)

F1_AVERAGES = ("macro", "weighted")

def confusion_matrix(y_true, y_pred, class_count):
    """
    Count predictions per (true class, predicted class).

    Returns:
    cm :: ndarray (K x K) - int, rows are true classes
    """
    y_true = np.asarray(y_true, dtype=int)
    y_pred = np.asarray(y_pred, dtype=int)
    if y_true.shape != y_pred.shape:
        raise DimensionError("Got {} true labels and {} predictions."
                             "".format(y_true.shape, y_pred.shape))
    if y_true.size == 0:
        return np.zeros((class_count, class_count), dtype=int)
    return _sk_confusion_matrix(y_true, y_pred, labels=np.arange(class_count))


def _check(cm):
    cm = np.asarray(cm)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise DimensionError("A confusion matrix must be square, got shape {}.".format(cm.shape))
    if np.any(cm < 0):
        raise ContractError("A confusion matrix cannot hold negative counts.")
    total = cm.sum()
    if total <= 0:
        raise ContractError("The confusion matrix is empty; nothing was evaluated.")
    return cm.astype(np.float64), total


def accuracy(cm):
    cm, total = _check(cm)
    return float(np.trace(cm) / total)


def per_class_f1(cm):
    """
    F1 of each class, 2 TP / (2 TP + FP + FN), with 0 for classes that
    have neither support nor predictions.
    """
    cm, _ = _check(cm)
    true_positives = np.diag(cm)
    false_positives = cm.sum(axis=0) - true_positives
    false_negatives = cm.sum(axis=1) - true_positives
    denominator = 2 * true_positives + false_positives + false_negatives
    return np.where(denominator > 0,
                    2 * true_positives / np.maximum(denominator, 1), 0.)


def macro_f1(cm, average="macro"):
    """
    Average the per-class F1 scores.

    Arguments:
    cm :: ndarray (K x K)
    average :: str - "macro" (unweighted) or "weighted" (by support)
    """
    if average not in F1_AVERAGES:
        raise ContractError("Unknown F1 average {}, expected one of {}."
                            "".format(average, F1_AVERAGES))
    scores = per_class_f1(cm)
    if average == "weighted":
        support = np.asarray(cm, dtype=np.float64).sum(axis=1)
        return float(np.sum(scores * support) / support.sum())
    return float(np.mean(scores))


def cohen_kappa(cm):
    """
    kappa = (p_o - p_e) / (1 - p_e), with p_e the agreement expected from
    the marginals. When p_e = 1 kappa is defined as 0.
    """
    cm, total = _check(cm)
    p_o = np.trace(cm) / total
    p_e = np.sum(cm.sum(axis=0) * cm.sum(axis=1)) / total ** 2
    if np.isclose(p_e, 1.):
        logger.warning("Chance agreement is 1 (a single class everywhere); kappa is set to 0.")
        return 0.
    return float((p_o - p_e) / (1 - p_e))


def metrics_report(cm, class_names=None, average="macro"):
    """
    Collect the evaluation metrics of a confusion matrix.

    Returns:
    report :: dict - {accuracy, macro_f1, kappa, confusion, classes, f1_average,
        per_class_f1, sample_count}
    """
    cm = np.asarray(cm, dtype=int)
    if class_names is None:
        class_names = [str(k) for k in range(cm.shape[0])]
    return {
        "accuracy": accuracy(cm),
        "macro_f1": macro_f1(cm, average=average),
        "kappa": cohen_kappa(cm),
        "confusion": cm,
        "classes": list(class_names),
        "f1_average": average,
        "per_class_f1": per_class_f1(cm),
        "sample_count": int(cm.sum()),
    }


def format_report(report):
    """
    Render a report as an aligned plain text table.
    """
    names = report["classes"]
    width = max([len(name) for name in names] + [len("true\\pred"), 6])
    lines = [
        "accuracy | {:.4f}".format(report["accuracy"]),
        "f1 ({}) | {:.4f}".format(report["f1_average"], report["macro_f1"]),
        "kappa    | {:.4f}".format(report["kappa"]),
        "",
        " ".join(["{:>{w}}".format("true\\pred", w=width)]
                 + ["{:>{w}}".format(name, w=width) for name in names]
                 + ["{:>{w}}".format("f1", w=width)]),
    ]
    for k, name in enumerate(names):
        row = ["{:>{w}}".format(name, w=width)]
        row += ["{:>{w}d}".format(int(count), w=width) for count in report["confusion"][k]]
        row.append("{:>{w}.4f}".format(float(report["per_class_f1"][k]), w=width))
        lines.append(" ".join(row))
    #ENDFOR
    return "\n".join(lines)
