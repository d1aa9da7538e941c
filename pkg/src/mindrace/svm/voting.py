"""Voting SVM: one multiclass SVM per frequency-bin column, plurality vote."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from ..features import normalize_features
from ..io.container import read_blob, write_blob
from .binary import BinarySvmModel
from .kernels import KernelSpec
from .multiclass import MulticlassSvmModel, predict_multiclass_batch, resolve_votes, train_multiclass

log = logging.getLogger(__name__)


class TiePossibleWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class VotingSvmModel:
    units: tuple[MulticlassSvmModel, ...]
    band_edges: tuple[tuple[float, float], ...]
    classes: tuple[int, ...]
    normalization: str = "per_bin"
    tie_rule: str = "summed-margin-then-lowest-id"

    @property
    def n_units(self) -> int:
        return len(self.units)


def train_voting_svm(
    features,
    labels,
    C: float = 1.0,
    kernel: KernelSpec | str | None = "rbf",
    band_edges=None,
    normalization: str = "per_bin",
    tol: float = 1e-3,
    backend=None,
) -> VotingSvmModel:
    """Train one unit per column of ``features`` (n_windows, channels, B).

    Features are normalized with ``normalization`` before training; the same
    mode is stored on the model and reapplied at prediction time.
    """
    F = np.asarray(features, dtype=float)
    if F.ndim != 3:
        raise ValueError("features must be (n_windows, channels, bins)")
    y = np.asarray(labels)
    if len(y) != F.shape[0]:
        raise ValueError("one label per window is required")
    classes = tuple(int(c) for c in np.unique(y))
    B = F.shape[2]
    if len(classes) == 2 and B % 2 == 0:
        warnings.warn(f"tie possible: {B} units voting on 2 classes", TiePossibleWarning, stacklevel=2)
    F = normalize_features(F, normalization)
    units = tuple(train_multiclass(F[:, :, j], y, C, kernel, tol, backend) for j in range(B))
    if band_edges is None:
        band_edges = tuple((float(j), float(j + 1)) for j in range(B))
    return VotingSvmModel(units, tuple(tuple(map(float, e)) for e in band_edges), classes, normalization)


def unit_predictions(model: VotingSvmModel, features) -> tuple[np.ndarray, np.ndarray]:
    """Per-unit predicted class ids and margins, each (n_windows, B)."""
    F = np.asarray(features, dtype=float)
    if F.ndim == 2:
        F = F[None]
    if F.shape[2] != model.n_units:
        raise ValueError(f"model has {model.n_units} units, features have {F.shape[2]} bins")
    F = normalize_features(F, model.normalization)
    preds = np.empty((F.shape[0], model.n_units), dtype=int)
    margins = np.empty((F.shape[0], model.n_units))
    for j, unit in enumerate(model.units):
        preds[:, j], margins[:, j] = predict_multiclass_batch(unit, F[:, :, j])
    return preds, margins


def combine_votes(classes, preds: np.ndarray, margins: np.ndarray) -> np.ndarray:
    """Plurality over units; ties go to the larger summed margin, then the lower id."""
    classes = np.asarray(classes)
    n = preds.shape[0]
    votes = np.zeros((n, len(classes)))
    conf = np.zeros((n, len(classes)))
    for k, c in enumerate(classes):
        hit = preds == c
        votes[:, k] = hit.sum(axis=1)
        conf[:, k] = np.where(hit, np.abs(margins), 0.0).sum(axis=1)
    return classes[resolve_votes(votes, conf)]


def predict_voting_batch(model: VotingSvmModel, features) -> np.ndarray:
    preds, margins = unit_predictions(model, features)
    return combine_votes(model.classes, preds, margins)


def predict_voting(model: VotingSvmModel, features) -> int:
    """Class id for one channels x B feature matrix."""
    F = np.asarray(features, dtype=float)
    if F.ndim != 2:
        raise ValueError("expected a single channels x bins feature matrix")
    return int(predict_voting_batch(model, F[None])[0])


# --- model files -----------------------------------------------------------


def save_voting_svm(model: VotingSvmModel, path, dtype: str = "float32", extra: dict | None = None) -> None:
    """JSON header (kernel, classes, band edges, biases) + little-endian payload
    of support vectors and dual coefficients."""
    arrays = {}
    units = []
    for j, unit in enumerate(model.units):
        pairs = []
        for p, m in enumerate(unit.pairs):
            arrays[f"u{j}p{p}_sv"] = m.support_vectors.astype(dtype)
            arrays[f"u{j}p{p}_coef"] = m.dual_coef.astype(dtype)
            pairs.append({
                "bias": m.bias, "kernel": m.kernel.to_dict(),
                "positive_class": m.positive_class, "negative_class": m.negative_class,
                "n_features": int(m.support_vectors.shape[1]),
            })
        units.append({"classes": list(unit.classes), "pairs": pairs})
    header = {
        "classes": list(model.classes),
        "band_edges": [list(e) for e in model.band_edges],
        "normalization": model.normalization,
        "tie_rule": model.tie_rule,
        "units": units,
    }
    if extra:
        header["extra"] = extra
    write_blob(path, "voting_svm", header, arrays)


def load_voting_svm(path) -> VotingSvmModel:
    header, arrays = read_blob(path, kind="voting_svm")
    units = []
    for j, u in enumerate(header["units"]):
        pairs = []
        for p, spec in enumerate(u["pairs"]):
            sv = arrays[f"u{j}p{p}_sv"].astype(float).reshape(-1, spec["n_features"])
            coef = arrays[f"u{j}p{p}_coef"].astype(float)
            pairs.append(BinarySvmModel(sv, coef, float(spec["bias"]), KernelSpec(**spec["kernel"]),
                                        int(spec["positive_class"]), int(spec["negative_class"])))
        units.append(MulticlassSvmModel(tuple(u["classes"]), tuple(pairs)))
    return VotingSvmModel(
        tuple(units),
        tuple(tuple(e) for e in header["band_edges"]),
        tuple(header["classes"]),
        header["normalization"],
        header["tie_rule"],
    )


def model_metadata(path) -> dict:
    header, _ = read_blob(path, kind="voting_svm")
    return header.get("extra", {})
