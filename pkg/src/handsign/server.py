"""HTTP prediction and sample-ingestion service for one loaded model.

Endpoints (JSON in/out, CORS open so the browser capture UI can call in):

    GET  /health   -> {"status": "ok", "model": "<fingerprint>"}
    POST /predict  {"landmarks": [[x,y,z] x21]}
                   -> {"label": "a", "probabilities": {...}?, "model": "..."}
    POST /samples  {"landmarks": [[x,y,z] x21], "label": "a"}
                   -> {"stored": true, "count": N}

Errors come back as {"error": "<message>"} with status 400 (bad request),
413 (oversized body) or 500. The loaded artifact is immutable and shared
by all request threads; sample appends are serialized by a lock and
flushed to disk before the response is sent.
"""

import json
import os
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from .data import CSV_HEADER, N_POINTS, label_to_index
from .persist import ModelArtifact, fingerprint, predict_frame

MAX_BODY_BYTES = 1_000_000


def parse_landmarks(obj) -> np.ndarray:
    """Validate a JSON landmarks payload into a (21, 3) frame."""
    if not isinstance(obj, list):
        raise ValueError("landmarks must be a list of [x, y, z] points")
    if len(obj) != N_POINTS:
        raise ValueError(f"expected {N_POINTS} landmark points, got {len(obj)}")
    frame = np.empty((N_POINTS, 3))
    for i, point in enumerate(obj):
        if not isinstance(point, (list, tuple)) or len(point) != 3:
            raise ValueError(f"landmark {i + 1} must be an [x, y, z] triplet")
        for j, v in enumerate(point):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ValueError(f"landmark {i + 1} has a non-numeric coordinate")
            frame[i, j] = float(v)
    if not np.all(np.isfinite(frame)):
        raise ValueError("landmark coordinates must be finite")
    return frame


class SampleStore:
    """Appends labeled frames to a CSV file in the dataset schema."""

    def __init__(self, path):
        self.path = path
        self.lock = threading.Lock()
        self.count = self._existing_rows()

    def _existing_rows(self) -> int:
        if not os.path.exists(self.path):
            return 0
        with open(self.path, "r", encoding="utf-8") as fh:
            return max(0, sum(1 for line in fh if line.strip()) - 1)

    def append(self, frame: np.ndarray, label: str) -> int:
        row = ",".join(repr(float(v)) for v in frame.reshape(-1)) + "," + label
        with self.lock:
            new_file = not os.path.exists(self.path) or os.path.getsize(self.path) == 0
            with open(self.path, "a", encoding="utf-8", newline="\n") as fh:
                if new_file:
                    fh.write(CSV_HEADER + "\n")
                fh.write(row + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self.count += 1
            return self.count


class PredictionServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, artifact: ModelArtifact, sample_store_path,
                 max_body: int = MAX_BODY_BYTES):
        self.artifact = artifact
        self.model_id = fingerprint(artifact)
        self.samples = SampleStore(sample_store_path)
        self.max_body = max_body
        super().__init__(address, _Handler)


class _Handler(BaseHTTPRequestHandler):
    server: PredictionServer

    def log_message(self, *args):
        pass  # keep request handling quiet; errors travel in responses

    def _reply(self, status: int, payload: dict):
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self._cors()
        self.end_headers()
        self.wfile.write(body)

    def _cors(self):
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")

    def do_OPTIONS(self):
        self.send_response(204)
        self._cors()
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        if self.path == "/health":
            self._reply(200, {"status": "ok", "model": self.server.model_id})
        else:
            self._reply(404, {"error": f"unknown path {self.path}"})

    def _read_body(self):
        length = self.headers.get("Content-Length")
        if length is None:
            raise _HttpError(400, "missing Content-Length")
        try:
            length = int(length)
        except ValueError:
            raise _HttpError(400, "bad Content-Length") from None
        if length > self.server.max_body:
            raise _HttpError(413, f"request body of {length} bytes exceeds limit {self.server.max_body}")
        raw = self.rfile.read(length)
        try:
            return json.loads(raw)
        except json.JSONDecodeError as exc:
            raise _HttpError(400, f"invalid JSON body: {exc}") from None

    def do_POST(self):
        try:
            if self.path == "/predict":
                body = self._read_body()
                frame = parse_landmarks(body.get("landmarks"))
                response = predict_frame(self.server.artifact, frame)
                payload = {"label": response.label, "model": response.model_id}
                if response.probabilities is not None:
                    payload["probabilities"] = response.probabilities
                self._reply(200, payload)
            elif self.path == "/samples":
                body = self._read_body()
                frame = parse_landmarks(body.get("landmarks"))
                label = body.get("label")
                if not isinstance(label, str):
                    raise ValueError("label must be a string")
                label_to_index(label)  # rejects j, z and anything unknown
                count = self.server.samples.append(frame, label.lower())
                self._reply(200, {"stored": True, "count": count})
            else:
                self._reply(404, {"error": f"unknown path {self.path}"})
        except _HttpError as exc:
            self._reply(exc.status, {"error": exc.message})
        except ValueError as exc:
            self._reply(400, {"error": str(exc)})
        except Exception as exc:  # keep the server alive on surprises
            self._reply(500, {"error": f"{type(exc).__name__}: {exc}"})


class _HttpError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


def make_server(artifact: ModelArtifact, host: str = "127.0.0.1", port: int = 8765,
                sample_store="samples.csv", max_body: int = MAX_BODY_BYTES) -> PredictionServer:
    """Bind a prediction server; call .serve_forever() to run it."""
    return PredictionServer((host, port), artifact, sample_store, max_body)


def serve(artifact: ModelArtifact, host: str = "127.0.0.1", port: int = 8765,
          sample_store="samples.csv") -> None:
    server = make_server(artifact, host, port, sample_store)
    try:
        server.serve_forever()
    finally:
        server.server_close()
