import logging

import numpy as np
import pandas as pd
from scipy import stats

from dnsgt.exceptions import DegenerateLabels, InvalidInputException
from dnsgt.mixins import Serialisable


logger = logging.getLogger(__name__)


def _check_binary(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)

    if scores.shape != labels.shape or scores.ndim != 1:
        raise InvalidInputException(f"Scores {scores.shape} and labels {labels.shape} must be matching 1D arrays.")

    if not np.isfinite(scores).all():
        raise InvalidInputException("Scores must be finite.")

    labels = labels.astype(bool)
    positives = int(labels.sum())

    if positives == 0 or positives == len(labels):
        raise DegenerateLabels("At least one positive and one negative label are needed.")

    return scores, labels


def mann_whitney_u(scores, labels):
    """Count the (positive, negative) pairs where the positive scores higher, ties counting one half.

    :param iter(float) scores:
    :param iter(int) labels: 0 or 1
    :raise dnsgt.exceptions.DegenerateLabels: if only one class is present
    :return float:
    """
    scores, labels = _check_binary(scores, labels)
    ranks = stats.rankdata(scores)
    positives = labels.sum()
    return float(ranks[labels].sum() - positives * (positives + 1) / 2)


def roc_auc(scores, labels):
    """Get the area under the ROC curve as the rank statistic P(positive > negative) + P(tie) / 2.

    :param iter(float) scores:
    :param iter(int) labels: 0 or 1
    :raise dnsgt.exceptions.DegenerateLabels: if only one class is present
    :return float:
    """
    u = mann_whitney_u(scores, labels)
    labels = np.asarray(labels).astype(bool)
    return u / (int(labels.sum()) * int((~labels).sum()))


def _f1_from_predictions(predictions, labels):
    true_positives = int((predictions & labels).sum())
    false_positives = int((predictions & ~labels).sum())
    false_negatives = int((~predictions & labels).sum())

    if true_positives == 0:
        return 0.0

    return 2 * true_positives / (2 * true_positives + false_positives + false_negatives)


def f1_at(scores, labels, threshold=0.5):
    """Get the F1 score of predicting positive when the score is at least the threshold.

    :param iter(float) scores:
    :param iter(int) labels:
    :param float threshold:
    :raise dnsgt.exceptions.DegenerateLabels: if only one class is present
    :return float:
    """
    scores, labels = _check_binary(scores, labels)
    return _f1_from_predictions(scores >= threshold, labels)


def f1_best(scores, labels):
    """Sweep every distinct score (plus 0 and 1) as the threshold and return the best F1 score, preferring the lowest
    threshold on ties.

    :param iter(float) scores:
    :param iter(int) labels:
    :raise dnsgt.exceptions.DegenerateLabels: if only one class is present
    :return (float, float): the threshold and its F1 score
    """
    scores, labels = _check_binary(scores, labels)
    best_threshold, best_value = None, -1.0

    for threshold in np.unique(np.concatenate([scores, [0.0, 1.0]])):
        value = _f1_from_predictions(scores >= threshold, labels)

        if value > best_value:
            best_threshold, best_value = float(threshold), value

    return best_threshold, best_value


def roc_curve_points(scores, labels):
    """Get the points of the ROC curve, one per distinct threshold, from (0, 0) to (1, 1).

    :param iter(float) scores:
    :param iter(int) labels:
    :return pandas.DataFrame: columns `fpr`, `tpr` and `threshold`
    """
    scores, labels = _check_binary(scores, labels)
    positives = labels.sum()
    negatives = len(labels) - positives
    rows = [{"fpr": 0.0, "tpr": 0.0, "threshold": np.inf}]

    for threshold in np.unique(scores)[::-1]:
        predictions = scores >= threshold
        rows.append(
            {
                "fpr": (predictions & ~labels).sum() / negatives,
                "tpr": (predictions & labels).sum() / positives,
                "threshold": float(threshold),
            }
        )

    return pd.DataFrame(rows, columns=["fpr", "tpr", "threshold"])


def _check_multiclass(probabilities, labels):
    probabilities = np.asarray(probabilities, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)

    if probabilities.ndim != 2 or labels.shape != (probabilities.shape[0],):
        raise InvalidInputException(
            f"Class probabilities {probabilities.shape} and labels {labels.shape} must be (n, C) and (n,)."
        )

    return probabilities, labels


def accuracy_multiclass(probabilities, labels):
    """Get the fraction of samples whose most probable class (lowest class id on ties) is the label.

    :param numpy.ndarray probabilities: (n, C)
    :param iter(int) labels:
    :return float:
    """
    probabilities, labels = _check_multiclass(probabilities, labels)
    return float((probabilities.argmax(axis=1) == labels).mean())


def macro_auc(probabilities, labels):
    """Get the one-vs-rest AUC averaged over the classes that have both positive and negative samples.

    :param numpy.ndarray probabilities: (n, C)
    :param iter(int) labels:
    :raise dnsgt.exceptions.DegenerateLabels: if no class has both
    :return float:
    """
    probabilities, labels = _check_multiclass(probabilities, labels)
    aucs = []

    for class_id in range(probabilities.shape[1]):
        members = labels == class_id

        if 0 < members.sum() < len(labels):
            aucs.append(roc_auc(probabilities[:, class_id], members))

    if not aucs:
        raise DegenerateLabels("One-vs-rest AUC needs at least two classes among the labels.")

    return float(np.mean(aucs))


def macro_f1(probabilities, labels):
    """Get the F1 score of the argmax predictions averaged over the classes that are labelled or predicted.

    :param numpy.ndarray probabilities: (n, C)
    :param iter(int) labels:
    :return float:
    """
    probabilities, labels = _check_multiclass(probabilities, labels)
    predictions = probabilities.argmax(axis=1)
    classes = np.union1d(labels, predictions)
    return float(np.mean([_f1_from_predictions(predictions == c, labels == c) for c in classes]))


class MetricReport(Serialisable):
    """Evaluation metrics of a fine-tuned model.

    :param float|None auc:
    :param float|None f1_at_05:
    :param dict|None f1_best: `{threshold, value}`
    :param float|None accuracy: multiclass tasks only
    :param list(dict)|None per_fold: the reports of individual folds
    :param int|None count: number of evaluated samples
    :return None:
    """

    _SERIALISE_FIELDS = ("auc", "f1_at_05", "f1_best", "accuracy", "per_fold", "count")

    def __init__(self, auc=None, f1_at_05=None, f1_best=None, accuracy=None, per_fold=None, count=None):
        self.auc = auc
        self.f1_at_05 = f1_at_05
        self.f1_best = f1_best
        self.accuracy = accuracy
        self.per_fold = per_fold or []
        self.count = count
        super().__init__()

    def __repr__(self):
        return f"<MetricReport(auc={self.auc}, f1_at_05={self.f1_at_05}, accuracy={self.accuracy})>"

    @classmethod
    def for_binary(cls, scores, labels):
        """Compute the binary metrics of scored labels.

        :param iter(float) scores:
        :param iter(int) labels:
        :return MetricReport:
        """
        threshold, value = f1_best(scores, labels)
        return cls(
            auc=roc_auc(scores, labels),
            f1_at_05=f1_at(scores, labels, 0.5),
            f1_best={"threshold": threshold, "value": value},
            count=len(labels),
        )

    @classmethod
    def for_multiclass(cls, probabilities, labels):
        """Compute the multiclass metrics (macro one-vs-rest AUC and macro F1).

        :param numpy.ndarray probabilities: (n, C)
        :param iter(int) labels:
        :return MetricReport:
        """
        try:
            auc = macro_auc(probabilities, labels)
        except DegenerateLabels:
            auc = None

        return cls(
            auc=auc,
            f1_at_05=macro_f1(probabilities, labels),
            accuracy=accuracy_multiclass(probabilities, labels),
            count=len(labels),
        )

    @classmethod
    def averaged(cls, reports):
        """Average fold reports, keeping each of them under `per_fold`.

        :param list(MetricReport) reports:
        :return MetricReport:
        """

        def mean(values):
            values = [value for value in values if value is not None]
            return float(np.mean(values)) if values else None

        best = [report.f1_best for report in reports if report.f1_best]

        return cls(
            auc=mean(report.auc for report in reports),
            f1_at_05=mean(report.f1_at_05 for report in reports),
            f1_best={
                "threshold": mean(item["threshold"] for item in best),
                "value": mean(item["value"] for item in best),
            }
            if best
            else None,
            accuracy=mean(report.accuracy for report in reports),
            per_fold=[report.to_primitive() for report in reports],
            count=sum(report.count or 0 for report in reports),
        )
