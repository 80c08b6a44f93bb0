"""Hand trackpoint data model: frames, labels, CSV schema, splitting, synthetic data.

A hand frame is 21 trackpoints in 3D (wrist, finger joints, fingertips),
stored as a float array of shape (21, 3). A dataset pairs N frames with N
letter labels drawn from the 24 static fingerspelling letters (j and z are
excluded because they require motion).
"""

from dataclasses import dataclass

import numpy as np

# Static fingerspelling alphabet: a-y without j and z.
LETTERS = "abcdefghiklmnopqrstuvwxy"
N_CLASSES = len(LETTERS)
N_POINTS = 21
N_FEATURES = N_POINTS * 3

_LETTER_TO_INDEX = {c: i for i, c in enumerate(LETTERS)}

CSV_HEADER = ",".join(f"{n}_{axis}" for n in range(1, N_POINTS + 1) for axis in "xyz") + ",label"


class SchemaError(ValueError):
    """Raised when frames, feature vectors, labels or CSV rows violate the schema."""


def label_to_index(letter: str) -> int:
    try:
        return _LETTER_TO_INDEX[letter.lower()]
    except KeyError:
        raise SchemaError(f"unknown label {letter!r}: expected one of {LETTERS!r}") from None


def index_to_label(index: int) -> str:
    return LETTERS[index]


def as_frame(points) -> np.ndarray:
    """Coerce to a validated (21, 3) float frame."""
    frame = np.asarray(points, dtype=float)
    if frame.shape != (N_POINTS, 3):
        raise SchemaError(f"expected {N_POINTS} trackpoints of 3 coordinates, got shape {frame.shape}")
    if not np.all(np.isfinite(frame)):
        raise SchemaError("trackpoint coordinates must be finite")
    return frame


def frame_to_features(frame) -> np.ndarray:
    """Flatten a frame to the 63-value layout (p1.x, p1.y, p1.z, p2.x, ...)."""
    return as_frame(frame).reshape(N_FEATURES).copy()


def features_to_frame(values) -> np.ndarray:
    """Inverse of frame_to_features."""
    vec = np.asarray(values, dtype=float)
    if vec.shape != (N_FEATURES,):
        raise SchemaError(f"expected a flat vector of {N_FEATURES} values, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise SchemaError("feature values must be finite")
    return vec.reshape(N_POINTS, 3).copy()


@dataclass(frozen=True)
class Dataset:
    """Immutable collection of labeled hand frames.

    frames: float array (n, 21, 3); labels: int array (n,) of class indices
    into LETTERS.
    """

    frames: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=float)
        labels = np.asarray(self.labels, dtype=np.int64)
        if frames.ndim != 3 or frames.shape[1:] != (N_POINTS, 3):
            raise SchemaError(f"frames must have shape (n, {N_POINTS}, 3), got {frames.shape}")
        if labels.shape != (frames.shape[0],):
            raise SchemaError("labels must align one-to-one with frames")
        if not np.all(np.isfinite(frames)):
            raise SchemaError("coordinates must be finite")
        if labels.size and (labels.min() < 0 or labels.max() >= N_CLASSES):
            raise SchemaError("label indices out of range")
        frames = frames.copy()
        labels = labels.copy()
        frames.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.frames.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.frames, other.frames) and np.array_equal(self.labels, other.labels)

    def features(self) -> np.ndarray:
        """All frames flattened to an (n, 63) feature matrix."""
        return self.frames.reshape(len(self), N_FEATURES)

    def letters(self) -> list[str]:
        return [LETTERS[i] for i in self.labels]

    def with_frames(self, frames) -> "Dataset":
        """Same labels over replacement frames (e.g. after preprocessing)."""
        return Dataset(frames, self.labels)

    def subset(self, indices) -> "Dataset":
        return Dataset(self.frames[indices], self.labels[indices])


def _format_coord(value: float) -> str:
    # repr gives the shortest decimal that round-trips exactly
    return repr(float(value))


def write_csv(ds: Dataset) -> str:
    """Render a dataset in the 64-column CSV schema (63 coordinates + label)."""
    lines = [CSV_HEADER]
    flat = ds.features()
    for row, label in zip(flat, ds.labels):
        lines.append(",".join(_format_coord(v) for v in row) + "," + LETTERS[label])
    return "\n".join(lines) + "\n"


def parse_csv(text) -> Dataset:
    """Parse the 64-column CSV schema produced by write_csv or the capture UI.

    Accepts str or bytes. Raises SchemaError naming the offending row on any
    malformed coordinate, unknown label (including j/z) or wrong column count.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines:
        raise SchemaError("empty CSV: missing header row")
    header = lines[0].strip()
    if header != CSV_HEADER:
        raise SchemaError(f"unexpected header: {header[:60]!r}")
    frames = np.empty((len(lines) - 1, N_POINTS, 3))
    labels = np.empty(len(lines) - 1, dtype=np.int64)
    for i, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != N_FEATURES + 1:
            raise SchemaError(f"row {i}: expected {N_FEATURES + 1} columns, got {len(fields)}")
        try:
            values = [float(f) for f in fields[:-1]]
        except ValueError as exc:
            raise SchemaError(f"row {i}: non-numeric coordinate ({exc})") from None
        if not all(np.isfinite(values)):
            raise SchemaError(f"row {i}: coordinates must be finite")
        label = fields[-1].strip().lower()
        if label not in _LETTER_TO_INDEX:
            raise SchemaError(f"row {i}: unknown label {fields[-1]!r}")
        frames[i - 2] = np.array(values).reshape(N_POINTS, 3)
        labels[i - 2] = _LETTER_TO_INDEX[label]
    return Dataset(frames, labels)


def read_csv_file(path) -> Dataset:
    with open(path, "rb") as fh:
        return parse_csv(fh.read())


def write_csv_file(ds: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(write_csv(ds))


def split_train_test(ds: Dataset, ratio: float = 0.8, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Seeded shuffle split: train gets floor(ratio * n) samples, test the rest."""
    if len(ds) == 0:
        raise ValueError("cannot split an empty dataset")
    if not 0 < ratio < 1:
        raise ValueError(f"ratio must be strictly between 0 and 1, got {ratio}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(ds))
    n_train = int(np.floor(ratio * len(ds)))
    return ds.subset(order[:n_train]), ds.subset(order[n_train:])


# ---------------------------------------------------------------------------
# Synthetic data
#
# The stand-in classes mimic a webcam capture setup: coordinates live at
# pixel-like magnitudes (the template spans a few hundred units) and each
# sample lands anywhere in the frame at any distance. The 24 prototypes are
# built as 8 base poses x 3 hand sizes:
#
#   * a base pose fans five fingers out in the x-y plane, with per-finger
#     curl levels in {0, 1, 2} chosen by the base index (fingers bend within
#     the palm plane, so the hand stays nearly flat in z);
#   * the three members of a size family are the same pose at relative
#     sizes 1.0, 1.35 and 1.35^2, each raising a different subset of
#     fingertips out of the palm plane by a small fixed amount.
#
# Size-family members are therefore near-scaled copies of one another that
# differ in a low-amplitude z pattern: once placement rescales every sample
# by a random factor in [0.5, 2.0], absolute size carries no label
# information and the z pattern is the only reliable separator, which is
# exactly the regime where bounding-box scale normalization earns its keep.
# Prototypes depend only on the class index, never on the seed, and are
# pairwise distinct, so classes are separable at jitter 0.
# ---------------------------------------------------------------------------

# (base angle in the palm plane, segment length) per finger: thumb..pinky
_FINGERS = [
    (-0.9, 0.085),
    (-0.25, 0.105),
    (0.0, 0.115),
    (0.25, 0.105),
    (0.55, 0.085),
]
_CURL_STEP = 0.6  # radians of extra bend per curl level per segment
_TEMPLATE_SCALE = 300.0  # pixel-like units
_SIZE_RATIO = 1.35  # relative size step inside a size family
_Z_LIFT = 0.022  # fingertip lift distinguishing size-family members
DEFAULT_JITTER = 1.5  # coordinate noise, 0.5% of the template span
_Z_PATTERNS = (
    (0.0, 0.0, 0.0, 0.0, 0.0),
    (1.0, 0.0, 1.0, 0.0, 1.0),
    (0.0, 1.0, 0.0, 1.0, 1.0),
)


def class_prototype(class_index: int) -> np.ndarray:
    """Deterministic 21-point pose for one letter class; independent of any seed."""
    if not 0 <= class_index < N_CLASSES:
        raise ValueError(f"class index must be in [0, {N_CLASSES}), got {class_index}")
    base, member = divmod(class_index, 3)
    digits = [(base // 3**i) % 3 for i in range(2)]
    curls = [digits[0], digits[1], (digits[0] + digits[1]) % 3, digits[0], digits[1]]
    points = np.zeros((N_POINTS, 3))
    for f, (angle, seg) in enumerate(_FINGERS):
        pos = np.array([0.35 * np.sin(angle), 0.18 + 0.04 * np.cos(angle), 0.015 * np.sin(2.5 * f)])
        bend = 0.0
        for joint in range(4):
            bend += curls[f] * _CURL_STEP / 3.0
            direction = np.array([np.sin(angle), np.cos(angle) * np.cos(bend) - 0.35 * np.sin(bend), 0.0])
            pos = pos + seg * direction / np.linalg.norm(direction)
            if joint >= 2:
                pos = pos + np.array([0.0, 0.0, _Z_LIFT * _Z_PATTERNS[member][f]])
            points[1 + 4 * f + joint] = pos
    return points * _TEMPLATE_SCALE * _SIZE_RATIO**member


def generate_synthetic(per_class: int = 120, jitter: float = DEFAULT_JITTER,
                       placement: bool = True, seed: int = 0) -> Dataset:
    """Seeded stand-in dataset: per_class samples of each of the 24 letters.

    Every coordinate gets Gaussian jitter (in the template's pixel-like
    units; the default is 0.5% of the template span). With placement=True
    each sample is also uniformly scaled by a factor in [0.5, 2.0] and
    translated by a random offset in [-600, 600]^3, putting the hand
    anywhere in the frame. Bit-identical for identical arguments.
    """
    if per_class < 1:
        raise ValueError("per_class must be >= 1")
    if jitter < 0:
        raise ValueError("jitter must be >= 0")
    rng = np.random.default_rng(seed)
    n = per_class * N_CLASSES
    frames = np.empty((n, N_POINTS, 3))
    labels = np.empty(n, dtype=np.int64)
    offset_span = 2.0 * _TEMPLATE_SCALE
    row = 0
    for c in range(N_CLASSES):
        proto = class_prototype(c)
        for _ in range(per_class):
            frame = proto + rng.normal(0.0, jitter, size=(N_POINTS, 3)) if jitter > 0 else proto.copy()
            if placement:
                factor = rng.uniform(0.5, 2.0)
                offset = rng.uniform(-offset_span, offset_span, size=3)
                frame = frame * factor + offset
            frames[row] = frame
            labels[row] = c
            row += 1
    return Dataset(frames, labels)
