"""Accuracy and confusion-matrix bookkeeping for the 24-letter task.

Confusion matrices are plain (24, 24) integer arrays: rows index the true
letter, columns the predicted letter, both in alphabetical order.
"""

import io
import json

import numpy as np

from .data import LETTERS, N_CLASSES, Dataset


def confusion_matrix(y_true, y_pred) -> np.ndarray:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    cm = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


def accuracy_from_confusion(cm: np.ndarray) -> float:
    total = cm.sum()
    if total == 0:
        raise ValueError("confusion matrix is empty")
    return float(np.trace(cm) / total)


def evaluate(predict_fn, test: Dataset):
    """Run a batch predictor over a test set.

    predict_fn maps an (m, 63) feature matrix to m label indices. Returns
    (accuracy, confusion matrix).
    """
    if len(test) == 0:
        raise ValueError("test set must be non-empty")
    preds = np.asarray(predict_fn(test.features()), dtype=np.int64)
    cm = confusion_matrix(test.labels, preds)
    return accuracy_from_confusion(cm), cm


def per_class_accuracy(cm: np.ndarray) -> np.ndarray:
    """Diagonal fraction per row; rows with no samples come back as NaN."""
    cm = np.asarray(cm)
    totals = cm.sum(axis=1)
    out = np.full(N_CLASSES, np.nan)
    seen = totals > 0
    out[seen] = np.diag(cm)[seen] / totals[seen]
    return out


def export_confusion(cm: np.ndarray, format: str = "csv") -> str:
    """Labeled 24x24 grid as CSV (header row/column) or JSON."""
    cm = np.asarray(cm)
    if cm.shape != (N_CLASSES, N_CLASSES):
        raise ValueError(f"expected a {N_CLASSES}x{N_CLASSES} matrix, got {cm.shape}")
    letters = list(LETTERS)
    if format == "csv":
        buf = io.StringIO()
        buf.write("true\\pred," + ",".join(letters) + "\n")
        for i, letter in enumerate(letters):
            buf.write(letter + "," + ",".join(str(int(v)) for v in cm[i]) + "\n")
        return buf.getvalue()
    if format == "json":
        payload = {
            "labels": letters,
            "counts": [[int(v) for v in row] for row in cm],
        }
        return json.dumps(payload, indent=2) + "\n"
    raise ValueError(f"unknown confusion export format {format!r}")


def import_confusion(text: str, format: str = "csv") -> np.ndarray:
    """Inverse of export_confusion."""
    if format == "csv":
        lines = [ln for ln in text.split("\n") if ln.strip()]
        if len(lines) != N_CLASSES + 1:
            raise ValueError(f"expected {N_CLASSES + 1} CSV lines, got {len(lines)}")
        header = lines[0].split(",")
        if header[1:] != list(LETTERS):
            raise ValueError("column headers do not match the letter set")
        cm = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
        for i, line in enumerate(lines[1:]):
            fields = line.split(",")
            if fields[0] != LETTERS[i] or len(fields) != N_CLASSES + 1:
                raise ValueError(f"bad confusion row {i + 2}")
            cm[i] = [int(v) for v in fields[1:]]
        return cm
    if format == "json":
        payload = json.loads(text)
        if payload.get("labels") != list(LETTERS):
            raise ValueError("labels do not match the letter set")
        cm = np.array(payload["counts"], dtype=np.int64)
        if cm.shape != (N_CLASSES, N_CLASSES):
            raise ValueError("counts grid has the wrong shape")
        return cm
    raise ValueError(f"unknown confusion export format {format!r}")
