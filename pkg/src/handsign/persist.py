"""Versioned model persistence and the shared inference path.

A saved model is an npz container: a JSON header (format version,
algorithm, pipeline string, label set, dimensions) plus the numeric
parameter arrays stored losslessly as float64/int64. The preprocessing
pipeline travels inside the artifact so a served model can never be fed
mis-normalized coordinates.
"""

import datetime
import hashlib
import json
import zipfile
from dataclasses import dataclass

import numpy as np

from .data import LETTERS, as_frame, frame_to_features
from .forest import ForestModel, Tree, rf_predict_batch, rf_votes
from .grid import AlgorithmKind
from .knn import KnnModel, knn_predict, knn_predict_batch
from .mlp import MlpModel, mlp_forward, mlp_predict_batch
from .normalize import PipelineSpec, apply_pipeline, apply_pipeline_batch

FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """Raised for unreadable, corrupt or unsupported model files."""


@dataclass(frozen=True, eq=False)
class ModelArtifact:
    algorithm: AlgorithmKind
    pipeline: PipelineSpec
    payload: object  # KnnModel | ForestModel | MlpModel
    created_at: str
    format_version: int = FORMAT_VERSION
    label_set: str = LETTERS


@dataclass(frozen=True)
class PredictionResponse:
    label: str
    probabilities: object  # dict letter -> fraction, or None for kNN
    model_id: str


def make_artifact(algorithm: AlgorithmKind, pipeline: PipelineSpec, payload) -> ModelArtifact:
    created = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    return ModelArtifact(algorithm=algorithm, pipeline=pipeline, payload=payload, created_at=created)


def _header(artifact: ModelArtifact) -> dict:
    header = {
        "format_version": artifact.format_version,
        "algorithm": artifact.algorithm.value,
        "pipeline": artifact.pipeline.canonical(),
        "label_set": artifact.label_set,
        "created_at": artifact.created_at,
    }
    p = artifact.payload
    if artifact.algorithm is AlgorithmKind.KNN:
        header["k"] = p.k
        header["train_size"] = int(p.features.shape[0])
    elif artifact.algorithm is AlgorithmKind.RANDOM_FOREST:
        header["n_trees"] = p.n
        header["seed"] = p.seed
        header["max_features"] = p.max_features
    else:
        header["widths"] = list(p.widths)
    return header


def _arrays(artifact: ModelArtifact) -> dict:
    p = artifact.payload
    if artifact.algorithm is AlgorithmKind.KNN:
        return {"features": p.features, "labels": p.labels}
    if artifact.algorithm is AlgorithmKind.RANDOM_FOREST:
        offsets = np.cumsum([0] + [t.feature.size for t in p.trees])
        return {
            "tree_offsets": offsets.astype(np.int64),
            "node_feature": np.concatenate([t.feature for t in p.trees]),
            "node_threshold": np.concatenate([t.threshold for t in p.trees]),
            "node_left": np.concatenate([t.left for t in p.trees]),
            "node_right": np.concatenate([t.right for t in p.trees]),
            "node_hist": np.concatenate([t.hist for t in p.trees]),
        }
    arrays = {}
    for i, (w, b) in enumerate(zip(p.weights, p.biases)):
        arrays[f"w{i}"] = w
        arrays[f"b{i}"] = b
    return arrays


def fingerprint(artifact: ModelArtifact) -> str:
    """Deterministic content hash of header and parameters."""
    cached = getattr(artifact, "_fingerprint", None)
    if cached is not None:
        return cached
    digest = hashlib.sha256()
    digest.update(json.dumps(_header(artifact), sort_keys=True).encode())
    for name, arr in sorted(_arrays(artifact).items()):
        arr = np.ascontiguousarray(arr)
        digest.update(name.encode())
        digest.update(str(arr.dtype).encode())
        digest.update(str(arr.shape).encode())
        digest.update(arr.tobytes())
    value = digest.hexdigest()
    object.__setattr__(artifact, "_fingerprint", value)
    return value


def save_model(artifact: ModelArtifact, destination) -> None:
    header_json = json.dumps(_header(artifact), sort_keys=True)
    try:
        with open(destination, "wb") as fh:
            np.savez_compressed(fh, header=np.array(header_json), **_arrays(artifact))
    except OSError as exc:
        raise OSError(f"cannot write model file {destination}: {exc}") from exc


def load_model(source) -> ModelArtifact:
    try:
        data = np.load(source, allow_pickle=False)
    except (OSError, ValueError, zipfile.BadZipFile, EOFError) as exc:
        raise ModelFormatError(f"not a readable model file: {exc}") from exc
    with data:
        try:
            header = json.loads(str(data["header"]))
        except (KeyError, json.JSONDecodeError) as exc:
            raise ModelFormatError(f"model file has no valid header: {exc}") from exc
        version = header.get("format_version")
        if version != FORMAT_VERSION:
            raise ModelFormatError(
                f"unsupported model format version {version}; this reader supports version {FORMAT_VERSION}"
            )
        if header.get("label_set") != LETTERS:
            raise ModelFormatError("model label set does not match the 24-letter alphabet")
        try:
            algorithm = AlgorithmKind(header["algorithm"])
            pipeline = PipelineSpec.parse(header["pipeline"])
            if algorithm is AlgorithmKind.KNN:
                payload = KnnModel(k=int(header["k"]), features=data["features"], labels=data["labels"])
            elif algorithm is AlgorithmKind.RANDOM_FOREST:
                offsets = data["tree_offsets"]
                trees = []
                for t in range(len(offsets) - 1):
                    lo, hi = offsets[t], offsets[t + 1]
                    trees.append(Tree(
                        feature=data["node_feature"][lo:hi],
                        threshold=data["node_threshold"][lo:hi],
                        left=data["node_left"][lo:hi],
                        right=data["node_right"][lo:hi],
                        hist=data["node_hist"][lo:hi],
                    ))
                payload = ForestModel(
                    trees=tuple(trees),
                    n=int(header["n_trees"]),
                    seed=int(header["seed"]),
                    max_features=int(header["max_features"]),
                )
            else:
                widths = header["widths"]
                weights = tuple(data[f"w{i}"] for i in range(len(widths) - 1))
                biases = tuple(data[f"b{i}"] for i in range(len(widths) - 1))
                payload = MlpModel(weights, biases)
        except (KeyError, ValueError) as exc:
            raise ModelFormatError(f"model file has missing or corrupted fields: {exc}") from exc
    return ModelArtifact(
        algorithm=algorithm,
        pipeline=pipeline,
        payload=payload,
        created_at=header["created_at"],
        format_version=version,
        label_set=header["label_set"],
    )


def predict_frame(artifact: ModelArtifact, frame) -> PredictionResponse:
    """Apply the artifact's pipeline to one frame, then its classifier."""
    normalized = apply_pipeline(as_frame(frame), artifact.pipeline)
    features = frame_to_features(normalized)
    model_id = fingerprint(artifact)
    if artifact.algorithm is AlgorithmKind.KNN:
        label = knn_predict(artifact.payload, features)
        return PredictionResponse(LETTERS[label], None, model_id)
    if artifact.algorithm is AlgorithmKind.RANDOM_FOREST:
        votes = rf_votes(artifact.payload, features[None])[0]
        shares = votes / votes.sum()
        label = int(votes.argmax())
        probs = {letter: float(shares[i]) for i, letter in enumerate(LETTERS)}
        return PredictionResponse(LETTERS[label], probs, model_id)
    probs_vec = mlp_forward(artifact.payload, features)
    probs = {letter: float(probs_vec[i]) for i, letter in enumerate(LETTERS)}
    return PredictionResponse(LETTERS[int(probs_vec.argmax())], probs, model_id)


def predict_batch(artifact: ModelArtifact, frames) -> np.ndarray:
    """Label indices for a stack of frames through the artifact's pipeline."""
    normalized = apply_pipeline_batch(np.asarray(frames, dtype=float), artifact.pipeline)
    features = normalized.reshape(normalized.shape[0], -1)
    if artifact.algorithm is AlgorithmKind.KNN:
        return knn_predict_batch(artifact.payload, features)
    if artifact.algorithm is AlgorithmKind.RANDOM_FOREST:
        return rf_predict_batch(artifact.payload, features)
    return mlp_predict_batch(artifact.payload, features)
