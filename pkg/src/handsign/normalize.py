"""Coordinate normalization: bounding boxes, shift/scale/round steps, pipelines.

A frame's bounding box is either the tightest axis-aligned cuboid around its
21 trackpoints or that cuboid symmetrically padded on its shorter axes into a
cube. Shifting moves the box's min vertex to the origin; scaling maps the box
onto a 255 x 255 x 255 target; rounding snaps coordinates to 3 decimal
places. A pipeline is an ordered sequence of those steps under one box kind,
and the study's grid covers 14 step sequences under both kinds (28 configs).
"""

import enum
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .data import as_frame

TARGET_EDGE = 255.0


class BoxKind(enum.Enum):
    CUBOIDAL = "cuboidal"
    CUBICAL = "cubical"


class Step(enum.Enum):
    SHIFT = "shift"
    SCALE = "scale"
    ROUND = "round"


@dataclass(frozen=True)
class BoundingBox:
    mins: np.ndarray  # (3,)
    maxs: np.ndarray  # (3,)
    kind: BoxKind

    @property
    def extents(self) -> np.ndarray:
        return self.maxs - self.mins


def _box_arrays(frames: np.ndarray, kind: BoxKind) -> tuple[np.ndarray, np.ndarray]:
    # frames: (n, 21, 3) -> per-sample mins/maxs (n, 3)
    mins = frames.min(axis=-2)
    maxs = frames.max(axis=-2)
    if kind is BoxKind.CUBICAL:
        extents = maxs - mins
        pad = (extents.max(axis=-1, keepdims=True) - extents) / 2.0
        mins = mins - pad
        maxs = maxs + pad
    return mins, maxs


def compute_bbox(frame, kind: BoxKind) -> BoundingBox:
    """Tightest cuboid around the frame, cube-padded on short axes for CUBICAL."""
    frame = as_frame(frame)
    mins, maxs = _box_arrays(frame[None], kind)
    return BoundingBox(mins[0], maxs[0], kind)


def shift(frame, box: BoundingBox) -> np.ndarray:
    """Translate so the box's min vertex lands at the origin."""
    return as_frame(frame) - box.mins


def scale_factors(box: BoundingBox) -> np.ndarray:
    """Per-axis multipliers mapping the box extents onto the 255-edge target.

    A zero extent (frame flat along an axis) gets factor 1 so the transform
    stays total; those coordinates are all equal anyway.
    """
    return _factors_from_extents(box.extents)


def _factors_from_extents(extents: np.ndarray) -> np.ndarray:
    # works elementwise on any shape; zero extents map to factor 1
    nonzero = extents > 0
    return np.where(nonzero, TARGET_EDGE / np.where(nonzero, extents, 1.0), 1.0)


def scale(frame, factors) -> np.ndarray:
    """Multiply each coordinate by its axis factor."""
    factors = np.asarray(factors, dtype=float)
    if factors.shape != (3,) or not np.all(np.isfinite(factors)) or np.any(factors <= 0):
        raise ValueError("scale factors must be three finite positive values")
    return as_frame(frame) * factors


_QUANTUM = Decimal("0.001")


def _round3_decimal(value: float) -> float:
    # Round the float's shortest decimal form, ties away from zero: the
    # rounding a reader applies to the printed value.
    return float(Decimal(repr(value)).quantize(_QUANTUM, rounding=ROUND_HALF_UP))


def round_coords(values) -> np.ndarray:
    """Elementwise round to 3 decimal places, ties away from zero."""
    x = np.asarray(values, dtype=float)
    scalar = x.ndim == 0
    if scalar:
        x = x[None]
    scaled = np.abs(x) * 1000.0
    out = np.copysign(np.floor(scaled + 0.5), x) / 1000.0
    # The float multiply can land near the .5 boundary on the wrong side;
    # entries that close to a tie are redone in decimal arithmetic.
    near_tie = np.abs(scaled - (np.floor(scaled) + 0.5)) <= scaled * 1e-12 + 1e-9
    redo = near_tie | (scaled >= 2.0**49)
    if np.any(redo):
        out[redo] = [_round3_decimal(v) for v in x[redo].tolist()]
    return out[0] if scalar else out


def round3(frame) -> np.ndarray:
    """Round every coordinate of a frame to 3 decimal places."""
    return round_coords(as_frame(frame))


@dataclass(frozen=True)
class PipelineSpec:
    """Ordered preprocessing steps plus the bounding-box kind they use."""

    steps: tuple
    box: BoxKind

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        for s in self.steps:
            if not isinstance(s, Step):
                raise ValueError(f"not a preprocessing step: {s!r}")
        if not isinstance(self.box, BoxKind):
            raise ValueError(f"not a box kind: {self.box!r}")

    def canonical(self) -> str:
        head = "+".join(s.value for s in self.steps) if self.steps else "none"
        return f"{head}@{self.box.value}"

    @classmethod
    def parse(cls, text: str) -> "PipelineSpec":
        token = text.strip().lower()
        head, sep, box_name = token.partition("@")
        if not sep:
            raise ValueError(f"pipeline spec {text!r} is missing the '@<box>' suffix")
        try:
            box = BoxKind(box_name)
        except ValueError:
            raise ValueError(f"unknown box kind {box_name!r} in {text!r}") from None
        if head in ("", "none"):
            return cls((), box)
        try:
            steps = tuple(Step(name) for name in head.split("+"))
        except ValueError:
            raise ValueError(f"unknown step in pipeline spec {text!r}") from None
        return cls(steps, box)

    def __str__(self) -> str:
        return self.canonical()


def apply_pipeline_batch(frames, spec: PipelineSpec) -> np.ndarray:
    """Apply a pipeline to a whole (n, 21, 3) stack of frames at once.

    Shift and Scale recompute each sample's bounding box from its current
    coordinates, so step order matters; Round is box-independent.
    """
    frames = np.asarray(frames, dtype=float)
    squeeze = frames.ndim == 2
    if squeeze:
        frames = frames[None]
    for step in spec.steps:
        if step is Step.SHIFT:
            mins, _ = _box_arrays(frames, spec.box)
            frames = frames - mins[:, None, :]
        elif step is Step.SCALE:
            mins, maxs = _box_arrays(frames, spec.box)
            factors = _factors_from_extents(maxs - mins)
            frames = frames * factors[:, None, :]
        else:
            frames = round_coords(frames)
    return frames[0] if squeeze else frames


def apply_pipeline(frame, spec: PipelineSpec) -> np.ndarray:
    """Apply a pipeline to one frame."""
    return apply_pipeline_batch(as_frame(frame), spec)


# Step sequences of the 28-configuration study, in report row order.
PAPER_STEP_SEQUENCES = (
    (),
    (Step.SHIFT,),
    (Step.SCALE,),
    (Step.ROUND,),
    (Step.SCALE, Step.SHIFT),
    (Step.SCALE, Step.ROUND),
    (Step.ROUND, Step.SCALE),
    (Step.SHIFT, Step.ROUND),
    (Step.ROUND, Step.SHIFT),
    (Step.ROUND, Step.SHIFT, Step.SCALE),
    (Step.SHIFT, Step.SCALE, Step.ROUND),
    (Step.ROUND, Step.SCALE, Step.ROUND),
    (Step.ROUND, Step.SHIFT, Step.ROUND),
    (Step.ROUND, Step.SHIFT, Step.SCALE, Step.ROUND),
)


def enumerate_paper_combinations() -> list[PipelineSpec]:
    """All 28 studied configurations: 14 step sequences x 2 box kinds."""
    return [
        PipelineSpec(steps, box)
        for steps in PAPER_STEP_SEQUENCES
        for box in (BoxKind.CUBOIDAL, BoxKind.CUBICAL)
    ]
