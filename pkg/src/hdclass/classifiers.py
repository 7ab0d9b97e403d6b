"""Average-distance and nearest-neighbor classifier families.

The classical members (AVG, SAVG, NN, NN-MADD) run on scaled Euclidean
distances computed through the gram expansion; the generalized members
(gSAVG, ggSAVG, NN-gMADD, NN-ggMADD) run on the transformed dissimilarities
from :mod:`hdclass.dissimilarity`.  Singleton partitions reduce the blocked
members to their componentwise counterparts exactly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels
from .dissimilarity import (
    BlockPartition,
    DissimilaritySpec,
    pairwise_blocked,
    pairwise_componentwise,
)

__all__ = [
    "AvgVariant",
    "NnVariant",
    "Family",
    "Dataset",
    "FittedModel",
    "fit",
    "within_class_average",
    "gsavg_discriminant",
    "classify_avg_family",
    "classify_nn_family",
    "predict_avg_family",
    "predict_nn_family",
    "madd_dissimilarity",
]


class AvgVariant(enum.Enum):
    AVG = "avg"
    SAVG = "savg"
    GSAVG = "gsavg"
    GGSAVG = "ggsavg"


class NnVariant(enum.Enum):
    NN = "nn"
    NN_MADD = "nn-madd"
    NN_GMADD = "nn-gmadd"
    NN_GGMADD = "nn-ggmadd"


class Family(enum.Enum):
    AVG_FAMILY = "avg"
    NN_FAMILY = "nn"


@dataclass(frozen=True)
class Dataset:
    """Labeled training sample: (n, d) features and integer class labels."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.intp)
        if feats.ndim != 2:
            raise ValueError("features must be a 2-d matrix")
        if labels.ndim != 1 or labels.shape[0] != feats.shape[0]:
            raise ValueError("labels must be one per feature row")
        if not np.all(np.isfinite(feats)):
            raise ValueError("non-finite entries in features")
        if labels.size and labels.min() < 0:
            raise ValueError("labels must be nonnegative class indices")
        n_classes = int(labels.max()) + 1 if labels.size else 0
        counts = np.bincount(labels, minlength=n_classes)
        if n_classes < 2:
            raise ValueError("classification needs at least 2 classes")
        if counts.min() < 1:
            missing = int(np.argmin(counts))
            raise ValueError(f"class {missing} has no training points")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1

    @cached_property
    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


@dataclass(frozen=True)
class FittedModel:
    """Immutable classifier state: training sample plus dissimilarity choice.

    ``partition=None`` selects the componentwise dissimilarity; a
    :class:`BlockPartition` selects the blocked one.
    """

    train: Dataset
    spec: DissimilaritySpec = field(default_factory=DissimilaritySpec)
    partition: BlockPartition | None = None
    family: Family = Family.AVG_FAMILY
    k: int = 1

    def __post_init__(self):
        if self.partition is not None and self.partition.dim != self.train.dim:
            raise ValueError(
                f"partition covers {self.partition.dim} coordinates, data has {self.train.dim}"
            )
        n0 = int(self.train.class_counts.min())
        if not 1 <= self.k <= n0:
            raise ValueError(f"neighbor count k={self.k} must be in [1, {n0}]")

    def _h_rows(self, Z: np.ndarray) -> np.ndarray:
        if self.partition is None:
            return pairwise_componentwise(self.spec, Z, self.train.features)
        return pairwise_blocked(self.spec, self.partition, Z, self.train.features)

    @cached_property
    def _h_train(self) -> np.ndarray:
        if self.partition is None:
            return pairwise_componentwise(self.spec, self.train.features)
        return pairwise_blocked(self.spec, self.partition, self.train.features)

    @cached_property
    def _sq_train(self) -> np.ndarray:
        sq = _kernels.scaled_sqdist(self.train.features, self.train.features)
        np.fill_diagonal(sq, 0.0)
        return sq


def fit(
    train: Dataset,
    spec: DissimilaritySpec | None = None,
    partition: BlockPartition | None = None,
    family: Family = Family.AVG_FAMILY,
    k: int = 1,
) -> FittedModel:
    """Bundle training data with a dissimilarity choice, validating shapes."""
    return FittedModel(train, spec or DissimilaritySpec(), partition, family, k)


def _require_min_class_size(train: Dataset, minimum: int, what: str) -> None:
    counts = train.class_counts
    if counts.min() < minimum:
        bad = int(np.argmin(counts))
        raise ValueError(f"class {bad} has {int(counts[bad])} points; {what} needs >= {minimum}")


def within_class_average(model: FittedModel, class_j: int) -> float:
    """Mean dissimilarity over ordered distinct pairs inside one class."""
    _require_min_class_size(model.train, 2, "the within-class average")
    means = _kernels.within_class_means(model._h_train, model.train.labels, model.train.n_classes)
    return float(means[class_j])


def gsavg_discriminant(model: FittedModel, z, class_j: int) -> float:
    """Scale-adjusted average dissimilarity of z to one class."""
    if model.family is not Family.AVG_FAMILY:
        raise ValueError("discriminant is defined for average-family models")
    _require_min_class_size(model.train, 2, "the scale-adjusted discriminant")
    Z = np.atleast_2d(np.asarray(z, dtype=np.float64))
    scores = _kernels.avg_family_scores(
        model._h_rows(Z), model._h_train, model.train.labels, model.train.n_classes, adjust=True
    )
    return float(scores[0, class_j])


def madd_dissimilarity(model: FittedModel, z, x_index: int) -> float:
    """Mean absolute difference between the dissimilarity profiles of z and
    one training point, excluding that point itself from the average."""
    if not 0 <= x_index < model.train.n:
        raise ValueError(f"training index {x_index} out of range")
    Z = np.atleast_2d(np.asarray(z, dtype=np.float64))
    psi = _kernels.madd_from_rows(model._h_rows(Z), model._h_train)
    return float(psi[0, x_index])


def _generalized_matrices(model: FittedModel, Z: np.ndarray, blocked: bool):
    """Test and train dissimilarity matrices on the requested route, reusing
    the model cache when its partition setting matches."""
    train = model.train
    if blocked:
        partition = model.partition or BlockPartition.singletons(train.dim)
        H_test = pairwise_blocked(model.spec, partition, Z, train.features)
        if model.partition is not None:
            return H_test, model._h_train
        return H_test, pairwise_blocked(model.spec, partition, train.features)
    H_test = pairwise_componentwise(model.spec, Z, train.features)
    if model.partition is None:
        return H_test, model._h_train
    return H_test, pairwise_componentwise(model.spec, train.features)


def predict_avg_family(model: FittedModel, Z, variant: AvgVariant) -> np.ndarray:
    """Classify each row of Z with one of the average-distance rules."""
    variant = AvgVariant(variant)
    Z = np.atleast_2d(np.asarray(Z, dtype=np.float64))
    train = model.train
    if variant in (AvgVariant.AVG, AvgVariant.SAVG):
        H_test = _kernels.scaled_sqdist(Z, train.features)
        H_train = model._sq_train
    else:
        H_test, H_train = _generalized_matrices(model, Z, blocked=variant is AvgVariant.GGSAVG)
    adjust = variant is not AvgVariant.AVG
    if adjust:
        _require_min_class_size(train, 2, "the scale-adjusted rule")
    scores = _kernels.avg_family_scores(H_test, H_train, train.labels, train.n_classes, adjust)
    return _kernels.argmin_classes(scores)


def predict_nn_family(model: FittedModel, Z, variant: NnVariant) -> np.ndarray:
    """Classify each row of Z with one of the nearest-neighbor rules."""
    variant = NnVariant(variant)
    Z = np.atleast_2d(np.asarray(Z, dtype=np.float64))
    train = model.train
    if variant is NnVariant.NN:
        values = np.sqrt(_kernels.scaled_sqdist(Z, train.features))
    else:
        if variant is NnVariant.NN_MADD:
            H_test = np.sqrt(_kernels.scaled_sqdist(Z, train.features))
            H_train = np.sqrt(model._sq_train)
        else:
            H_test, H_train = _generalized_matrices(
                model, Z, blocked=variant is NnVariant.NN_GGMADD
            )
        values = _kernels.madd_from_rows(H_test, H_train)
    return _kernels.nn_family_predict(values, train.labels, train.n_classes, model.k)


def classify_avg_family(model: FittedModel, z, variant: AvgVariant) -> int:
    return int(predict_avg_family(model, np.atleast_2d(z), variant)[0])


def classify_nn_family(model: FittedModel, z, variant: NnVariant) -> int:
    return int(predict_nn_family(model, np.atleast_2d(z), variant)[0])
