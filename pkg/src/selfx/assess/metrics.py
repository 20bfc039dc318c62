"""Scalar quality metrics for the search behaviors.

Position inaccuracy is robot localization error plus the square root of
the target distance for visual detection, and half the room diagonal for
acoustic detection. Microphone quality is the expected voice level over
the background noise, in dB. Image quality is plain brightness/contrast.
The spoken-reply probability replaces an external language detector with
a self-contained common-word heuristic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .words import COMMON_WORDS

DEFAULT_VOICE_DB = 70.0
DEFAULT_ROBOT_POS_ACCURACY = 0.25


def visual_position_inaccuracy(delta: float, distance: float) -> float:
    """Localization error plus sqrt(distance to the detected target), meters."""
    if delta < 0:
        raise ValueError(f"robot position accuracy must be >= 0, got {delta}")
    if distance < 0:
        raise ValueError(f"target distance must be >= 0, got {distance}")
    return delta + math.sqrt(distance)


def acoustic_position_inaccuracy(room_width: float, room_length: float) -> float:
    """Half the diagonal of a rectangular room, meters."""
    if room_width < 0 or room_length < 0:
        raise ValueError("room dimensions must be >= 0, "
                         f"got {room_width} x {room_length}")
    return math.hypot(room_width, room_length) / 2.0


def acoustic_quality_margin(noise_db: float, voice_db: float = DEFAULT_VOICE_DB) -> float:
    """Voice level over background noise, dB. Negative when noise dominates."""
    return voice_db - noise_db


def human_reply_probability(transcript: str) -> float:
    """Fraction of whitespace tokens that are common English words.

    An empty transcript (nothing was recorded) scores 0. Matching is
    case-insensitive; tokens are not stripped of punctuation.
    """
    tokens = transcript.split()
    if not tokens:
        return 0.0
    hits = sum(1 for t in tokens if t.lower() in COMMON_WORDS)
    return min(1.0, max(0.0, hits / len(tokens)))


@dataclass
class ImageQuality:
    brightness: float
    contrast: float


def image_quality(grayscale) -> ImageQuality:
    """Mean and population standard deviation of a grayscale pixel matrix."""
    pixels = np.asarray(grayscale, dtype=float)
    if pixels.ndim != 2 or pixels.size == 0:
        raise ValueError("expected a non-empty H x W pixel matrix")
    return ImageQuality(brightness=float(pixels.mean()),
                        contrast=float(pixels.std()))
