"""Pose-keypoint parsing, upper-body part selection, and per-frame feature
normalization.

A frame arrives as the JSON emitted by a 137-point pose estimator (25 body,
70 face, 21 per hand).  We keep 12 upper-body points plus both hands and the
face (124 points at the full mask), drop confidences, and standardize the
coordinates under one of four normalization modes.  The per-part, per-axis
mode (``OBJECT_2D``) removes any per-part affine placement of a signer in the
frame, which is the whole point: two signers performing the same sign at
different positions and scales map to (nearly) the same feature vector.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from .errors import EmptyVideo, MalformedKeypoints, MissingPerson

BODY_POINTS = 25
FACE_POINTS = 70
HAND_POINTS = 21

#: Body indices kept for signing: nose, neck, right/left shoulder-elbow-wrist,
#: eyes and ears.  Lower-body indices are dropped.
UPPER_BODY_INDICES = (0, 1, 2, 3, 4, 5, 6, 7, 15, 16, 17, 18)

_EPS = 1e-12  # zero-variance guard; exact-zero numerators still map to 0

# (attribute, JSON key, point count) in estimator-file order
_PART_SPECS = (
    ("body", "pose_keypoints_2d", BODY_POINTS),
    ("face", "face_keypoints_2d", FACE_POINTS),
    ("left_hand", "hand_left_keypoints_2d", HAND_POINTS),
    ("right_hand", "hand_right_keypoints_2d", HAND_POINTS),
)


class Keypoint2D(NamedTuple):
    x: float
    y: float
    confidence: float


class NormalizationMode(Enum):
    """How per-frame coordinates are standardized before model input."""

    FEATURE = "feature"      # one mean/std over every coordinate scalar
    TWO_D = "2d"             # one mean/std per axis, across all parts
    OBJECT = "object"        # one mean/std per part, axes pooled
    OBJECT_2D = "object_2d"  # per part, per axis


@dataclass(frozen=True)
class PartMask:
    """Which keypoint groups contribute features."""

    use_body: bool = True
    use_hands: bool = True
    use_face: bool = True

    def __post_init__(self) -> None:
        if not (self.use_body or self.use_hands or self.use_face):
            raise ValueError("at least one part must be selected")

    @property
    def n_points(self) -> int:
        return (
            12 * self.use_body
            + 2 * HAND_POINTS * self.use_hands
            + FACE_POINTS * self.use_face
        )

    @property
    def feature_dim(self) -> int:
        return 2 * self.n_points

    def label(self) -> str:
        parts = []
        if self.use_body:
            parts.append("body")
        if self.use_hands:
            parts.append("hands")
        if self.use_face:
            parts.append("face")
        return "+".join(parts)


@dataclass(frozen=True)
class FramePose:
    """One frame's raw keypoints; each part is an (n, 3) array of x, y, conf."""

    body: np.ndarray
    face: np.ndarray
    left_hand: np.ndarray
    right_hand: np.ndarray

    def part(self, name: str) -> np.ndarray:
        return getattr(self, name)

    def point(self, part: str, index: int) -> Keypoint2D:
        row = self.part(part)[index]
        return Keypoint2D(float(row[0]), float(row[1]), float(row[2]))


@dataclass
class FeatureSequence:
    """Normalized per-frame feature vectors for one video.

    ``frames`` has shape (T, 2m) with m selected keypoints; each row is laid
    out as all x-derived values (parts in order body, left hand, right hand,
    face) followed by all y-derived values in the same order.
    """

    frames: np.ndarray
    mask: PartMask
    mode: NormalizationMode

    def __post_init__(self) -> None:
        if self.frames.ndim != 2 or self.frames.shape[0] == 0:
            raise EmptyVideo("feature sequence must contain at least one frame")

    def __len__(self) -> int:
        return int(self.frames.shape[0])


def _decode_part(values, key: str, expected: int) -> np.ndarray:
    if not isinstance(values, (list, tuple)):
        raise MalformedKeypoints(f"{key}: expected a flat number array")
    if len(values) % 3 != 0:
        raise MalformedKeypoints(
            f"{key}: length {len(values)} is not divisible by 3"
        )
    if len(values) != 3 * expected:
        raise MalformedKeypoints(
            f"{key}: expected {expected} keypoints, got {len(values) // 3}"
        )
    arr = np.asarray(values, dtype=np.float64).reshape(expected, 3)
    if not np.all(np.isfinite(arr[:, :2])):
        raise MalformedKeypoints(f"{key}: non-finite coordinate")
    conf = arr[:, 2]
    if np.any(conf < 0.0) or np.any(conf > 1.0):
        raise MalformedKeypoints(f"{key}: confidence outside [0, 1]")
    return arr


def parse_frame_obj(obj: dict) -> FramePose:
    """Decode one already-parsed estimator JSON object into a FramePose."""
    people = obj.get("people")
    if not people:
        raise MissingPerson("frame contains no detected person")
    person = people[0]
    parts = {}
    for attr, key, expected in _PART_SPECS:
        if key not in person:
            raise MalformedKeypoints(f"missing key {key!r}")
        parts[attr] = _decode_part(person[key], key, expected)
    return FramePose(**parts)


def parse_frame_json(content: bytes | str) -> FramePose:
    """Parse one estimator keypoint file (raw bytes or text)."""
    try:
        obj = json.loads(content)
    except json.JSONDecodeError as exc:
        raise MalformedKeypoints(f"invalid JSON: {exc}") from exc
    return parse_frame_obj(obj)


def select_parts(pose: FramePose, mask: PartMask) -> list[np.ndarray]:
    """Reduce a FramePose to the selected (x, y) groups.

    Returns the part groups in fixed order body, left hand, right hand, face;
    the body group is reduced to the 12 upper-body indices.  Confidences are
    dropped.
    """
    groups = []
    if mask.use_body:
        groups.append(pose.body[list(UPPER_BODY_INDICES), :2].copy())
    if mask.use_hands:
        groups.append(pose.left_hand[:, :2].copy())
        groups.append(pose.right_hand[:, :2].copy())
    if mask.use_face:
        groups.append(pose.face[:, :2].copy())
    return groups


def _standardize(values: np.ndarray) -> np.ndarray:
    mean = values.mean()
    std = values.std()  # population std (divide by n)
    return (values - mean) / (std + _EPS)


def normalize_frame(
    groups: Sequence[np.ndarray], mode: NormalizationMode
) -> np.ndarray:
    """Standardize one frame's selected keypoints into a feature vector.

    The statistics pool depends on ``mode``; the output layout is always all
    x values (groups in order) followed by all y values.  A zero-variance
    pool maps to zeros rather than NaN.
    """
    for g in groups:
        if g.ndim != 2 or g.shape[0] == 0 or g.shape[1] != 2:
            raise MalformedKeypoints("each part group must be a nonempty (k, 2) array")
    xs = [np.asarray(g[:, 0], dtype=np.float64) for g in groups]
    ys = [np.asarray(g[:, 1], dtype=np.float64) for g in groups]

    if mode is NormalizationMode.FEATURE:
        flat = _standardize(np.concatenate(xs + ys))
        return flat
    if mode is NormalizationMode.TWO_D:
        return np.concatenate([_standardize(np.concatenate(xs)),
                               _standardize(np.concatenate(ys))])
    if mode is NormalizationMode.OBJECT:
        out_x, out_y = [], []
        for x, y in zip(xs, ys):
            k = x.shape[0]
            st = _standardize(np.concatenate([x, y]))
            out_x.append(st[:k])
            out_y.append(st[k:])
        return np.concatenate(out_x + out_y)
    if mode is NormalizationMode.OBJECT_2D:
        return np.concatenate([_standardize(x) for x in xs]
                              + [_standardize(y) for y in ys])
    raise ValueError(f"unknown normalization mode: {mode!r}")


def video_to_features(
    frames: Sequence[FramePose], mask: PartMask, mode: NormalizationMode
) -> FeatureSequence:
    """Featurize a whole video, one frame at a time."""
    if len(frames) == 0:
        raise EmptyVideo("cannot featurize a video with no frames")
    rows = [normalize_frame(select_parts(pose, mask), mode) for pose in frames]
    return FeatureSequence(np.stack(rows), mask, mode)
