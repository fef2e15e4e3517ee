"""Gray page in, segmentation tree out."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np

from .errors import DegenerateHistogram
from .preprocess import (Ink, binarize, center_crop, denoise, estimate_skew, grayscale,
                         otsu_threshold, rotate)
from .raster import BinaryImage
from .segment import SegmentParams, SegmentTree, segment_page


@dataclass(frozen=True)
class PreprocessOptions:
    deskew: bool = True
    min_area: int = 4
    ink: Ink = Ink.DARK
    skew_range: Tuple[float, float] = (-10.0, 10.0)
    skew_step: float = 0.1


def preprocess_page(image: np.ndarray, opts: PreprocessOptions = PreprocessOptions()
                    ) -> Tuple[BinaryImage, Dict[str, Any]]:
    """Binarize, despeckle and optionally deskew a page.

    A page of a single intensity has nothing to separate and comes back
    blank.  Deskewing rotates about the center and crops back to the input
    size so page coordinates stay comparable.
    """
    gray = grayscale(image)
    h, w = gray.shape
    info: Dict[str, Any] = {"ink": opts.ink.value, "min_area": opts.min_area,
                            "deskew": opts.deskew}
    try:
        level = otsu_threshold(gray)
        binary = binarize(gray, level, opts.ink)
        info["threshold"] = level.level
    except DegenerateHistogram as exc:
        binary = np.zeros((h, w), dtype=np.uint8)
        info["threshold"] = exc.level
        info["degenerate"] = True
    binary = denoise(binary, opts.min_area)

    angle = 0.0
    if opts.deskew and binary.any():
        angle = estimate_skew(binary, opts.skew_range, opts.skew_step).angle
        if angle:
            binary = center_crop(rotate(binary, -angle), w, h)
    info["skew_angle"] = angle
    return binary, info


def run(image: np.ndarray, params: SegmentParams = SegmentParams(),
        opts: PreprocessOptions = PreprocessOptions()) -> Tuple[BinaryImage, SegmentTree]:
    binary, info = preprocess_page(image, opts)
    return binary, segment_page(binary, params, provenance=info)
