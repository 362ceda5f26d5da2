"""Python bindings for the tangible pointer tracker."""

import json

from ._core import (
    TangibleError,
    build_calibration,
    cminmax_corners,
    correct_parallax,
    estimate_homography,
    extract_mask,
    harris_corners,
    otsu_threshold,
    track_frame,
)
from ._core import render_scene as _render_scene

__all__ = [
    "TangibleError",
    "build_calibration",
    "cminmax_corners",
    "correct_parallax",
    "estimate_homography",
    "extract_mask",
    "harris_corners",
    "otsu_threshold",
    "render_scene",
    "track_frame",
]


def render_scene(scene):
    """Render a scene given as a dict (or JSON text); returns (rgb, depth, truth)."""
    text = scene if isinstance(scene, str) else json.dumps(scene)
    rgb, depth, truth = _render_scene(text)
    return rgb, depth, json.loads(truth)["frames"][0]
