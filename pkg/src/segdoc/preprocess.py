"""Page preprocessing: gray conversion, Otsu binarization, speck removal,
skew estimation and correction, thinning and header-line removal."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import ndimage

from .errors import BlankImage, DegenerateHistogram, NoHeaderFound
from .raster import BinaryImage, GrayImage, as_binary, as_gray, bincount, row_profile

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class Ink(enum.Enum):
    DARK = "dark"
    LIGHT = "light"


@dataclass(frozen=True)
class ThresholdLevel:
    level: int


@dataclass(frozen=True)
class SkewEstimate:
    angle: float
    score: int
    search_range: Tuple[float, float]
    step: float


@dataclass(frozen=True)
class HeaderParams:
    """Knobs for locating a word's header line (shirorekha)."""

    search_fraction: float = 0.4
    band_ratio: float = 0.8
    min_width_fraction: float = 0.5


def grayscale(color) -> GrayImage:
    """Luminance of an (h, w, 3) RGB array; 2-D input is passed through."""
    arr = np.asarray(color)
    if arr.ndim == 2:
        return as_gray(arr)
    if arr.ndim != 3 or arr.shape[2] < 3:
        raise ValueError(f"expected an (h, w, 3) color array, got shape {arr.shape}")
    rgb = arr[..., :3].astype(np.float64)
    luma = rgb @ np.array(LUMA_WEIGHTS)
    # round half up; numpy's rint would round 0.5 to even
    return np.clip(np.floor(luma + 0.5), 0, 255).astype(np.uint8)


def otsu_threshold(img: GrayImage) -> ThresholdLevel:
    """Level t maximizing the between-class variance of {<= t} vs {> t}.

    The variance is compared exactly in integer arithmetic, so ties are
    real ties and resolve to the lowest level.
    """
    img = as_gray(img)
    hist = bincount(img, minlength=256)
    occupied = np.flatnonzero(hist)
    if occupied.size == 1:
        raise DegenerateHistogram(int(occupied[0]))

    total_n = int(hist.sum())
    total_s = int(np.dot(np.arange(256, dtype=np.int64), hist))
    # n0*n1*(mu0 - mu1)^2 == (s0*n1 - s1*n0)^2 / (n0*n1); the 1/N^2 factor is shared
    best_t, best_num, best_den = 0, 0, 1
    n0 = s0 = 0
    for t in range(255):
        n0 += int(hist[t])
        s0 += t * int(hist[t])
        n1 = total_n - n0
        if n0 == 0 or n1 == 0:
            continue
        s1 = total_s - s0
        num = (s0 * n1 - s1 * n0) ** 2
        den = n0 * n1
        if num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return ThresholdLevel(best_t)


def binarize(img: GrayImage, t: ThresholdLevel, ink: Ink = Ink.DARK) -> BinaryImage:
    """Threshold and invert in one step so that ink comes out as 1."""
    img = as_gray(img)
    level = t.level if isinstance(t, ThresholdLevel) else int(t)
    if ink is Ink.DARK:
        return (img <= level).astype(np.uint8)
    return (img > level).astype(np.uint8)


def denoise(img: BinaryImage, min_area: int = 4) -> BinaryImage:
    """Erase 8-connected components with fewer than ``min_area`` pixels."""
    if min_area < 0:
        raise ValueError("min_area must be >= 0")
    img = as_binary(img)
    if min_area <= 1:
        return img.copy()
    labels, n = ndimage.label(img, structure=np.ones((3, 3), dtype=bool))
    if n == 0:
        return img.copy()
    areas = bincount(labels, minlength=n + 1)
    keep = areas >= min_area
    keep[0] = False
    return keep[labels].astype(np.uint8)


def _angle_grid(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(math.floor((hi - lo) / step + 1e-9))
    return np.round(lo + step * np.arange(n + 1), 10)


def _projection_scores(img: BinaryImage, angles: np.ndarray) -> np.ndarray:
    ys, xs = np.nonzero(img)
    h, w = img.shape
    # shifted so every rotated row index is positive and truncation == floor
    reach = math.hypot(w, h) / 2.0 + 2.5
    dx = (xs - (w - 1) / 2.0).astype(np.float32)
    dy = (ys - (h - 1) / 2.0).astype(np.float32)
    rows = np.empty(xs.size, dtype=np.float32)
    tmp = np.empty_like(rows)
    scores = np.empty(len(angles), dtype=np.int64)
    for i, angle in enumerate(angles):
        theta = math.radians(angle)
        # row of each ink pixel after rotating the page by -angle
        np.multiply(dx, np.float32(math.sin(theta)), out=rows)
        np.multiply(dy, np.float32(math.cos(theta)), out=tmp)
        rows += tmp
        rows += np.float32(reach)
        counts = np.bincount(rows.astype(np.int32))
        scores[i] = int(np.dot(counts, counts))
    return scores


def estimate_skew(img: BinaryImage, search_range: Tuple[float, float] = (-10.0, 10.0),
                  step: float = 0.1) -> SkewEstimate:
    """Grid-search the page tilt that makes the row profile sharpest.

    Every candidate angle is scored by the sum of squared row counts of the
    ink after undoing that tilt.  Positive angles mean the page content is
    rotated counter-clockwise.
    """
    lo, hi = float(search_range[0]), float(search_range[1])
    if lo > hi:
        raise ValueError("search range must be ordered (min, max)")
    if step <= 0:
        raise ValueError("step must be positive")
    img = as_binary(img)
    if not img.any():
        raise BlankImage("cannot estimate skew of an image without ink")

    angles = _angle_grid(lo, hi, step)
    scores = _projection_scores(img, angles)
    best = max(range(len(angles)), key=lambda i: (scores[i], -abs(angles[i]), -angles[i]))
    return SkewEstimate(float(angles[best]), int(scores[best]), (lo, hi), step)


def _trig(angle: float) -> Tuple[float, float]:
    theta = math.radians(angle)
    # snap so multiples of 90 degrees map pixels exactly
    return round(math.sin(theta), 12), round(math.cos(theta), 12)


def rotated_shape(width: int, height: int, angle: float) -> Tuple[int, int]:
    """Canvas (width, height) holding a ``width`` x ``height`` image rotated by ``angle``.

    Each side keeps the parity of the source so both centers sit on the same
    sub-pixel lattice.
    """
    s, c = _trig(angle)
    out_w = math.ceil(abs(width * c) + abs(height * s) - 1e-9)
    out_h = math.ceil(abs(width * s) + abs(height * c) - 1e-9)
    out_w += (out_w - width) % 2
    out_h += (out_h - height) % 2
    return max(out_w, 1), max(out_h, 1)


def rotate(img: BinaryImage, angle: float) -> BinaryImage:
    """Rotate counter-clockwise by ``angle`` degrees about the image center.

    Nearest-neighbour inverse mapping onto an enlarged canvas; samples that
    fall outside the source are background.
    """
    img = as_binary(img)
    h, w = img.shape
    if angle % 360 == 0:
        return img.copy()
    s, c = _trig(angle)
    out_w, out_h = rotated_shape(w, h, angle)
    out = np.zeros((out_h, out_w), dtype=np.uint8)
    ys, xs = np.nonzero(img)
    if ys.size == 0:
        return out

    # only the window covering the rotated ink needs inverse mapping
    dx = xs - (w - 1) / 2.0
    dy = ys - (h - 1) / 2.0
    fx = dx * c + dy * s + (out_w - 1) / 2.0
    fy = -dx * s + dy * c + (out_h - 1) / 2.0
    x0 = max(int(math.floor(fx.min())) - 1, 0)
    x1 = min(int(math.ceil(fx.max())) + 2, out_w)
    y0 = max(int(math.floor(fy.min())) - 1, 0)
    y1 = min(int(math.ceil(fy.max())) + 2, out_h)

    oy, ox = np.mgrid[y0:y1, x0:x1]
    ox = ox - (out_w - 1) / 2.0
    oy = oy - (out_h - 1) / 2.0
    sx = np.floor(ox * c - oy * s + (w - 1) / 2.0 + 0.5).astype(np.intp)
    sy = np.floor(ox * s + oy * c + (h - 1) / 2.0 + 0.5).astype(np.intp)
    inside = (sx >= 0) & (sx < w) & (sy >= 0) & (sy < h)
    window = np.zeros(sx.shape, dtype=np.uint8)
    window[inside] = img[sy[inside], sx[inside]]
    out[y0:y1, x0:x1] = window
    return out


def center_crop(img: np.ndarray, width: int, height: int) -> np.ndarray:
    """Central ``width`` x ``height`` window of a canvas at least that large."""
    h, w = img.shape[:2]
    if w < width or h < height:
        raise ValueError(f"cannot crop {w}x{h} down to {width}x{height}")
    x0 = (w - width) // 2
    y0 = (h - height) // 2
    return img[y0:y0 + height, x0:x0 + width].copy()


# Neighbour bit order used by the thinning tables: E, NE, N, NW, W, SW, S, SE.
_OFFSETS = ((0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1))


def _neighbour_codes(padded: np.ndarray) -> np.ndarray:
    """8-bit neighbourhood code of every interior pixel of a 1-padded image."""
    h, w = padded.shape[0] - 2, padded.shape[1] - 2
    code = np.zeros((h, w), dtype=np.uint8)
    for bit, (dy, dx) in enumerate(_OFFSETS):
        code |= padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w] << bit
    return code


def _guo_hall_luts() -> Tuple[np.ndarray, np.ndarray]:
    first = np.zeros(256, dtype=bool)
    second = np.zeros(256, dtype=bool)
    for code in range(256):
        # x[1]..x[8] counter-clockwise from east; x[9] wraps to x[1]
        x = [None] + [(code >> k) & 1 for k in range(8)]
        x.append(x[1])
        crossings = sum(1 for i in range(1, 5)
                        if not x[2 * i - 1] and (x[2 * i] or x[2 * i + 1]))
        if crossings != 1:
            continue
        n1 = sum(1 for k in range(1, 5) if x[2 * k - 1] or x[2 * k])
        n2 = sum(1 for k in range(1, 5) if x[2 * k] or x[2 * k + 1])
        if not 2 <= min(n1, n2) <= 3:
            continue
        first[code] = not ((x[2] or x[3] or not x[8]) and x[1])
        second[code] = not ((x[6] or x[7] or not x[4]) and x[5])
    return first, second


def _zhang_suen_luts() -> Tuple[np.ndarray, np.ndarray]:
    first = np.zeros(256, dtype=bool)
    second = np.zeros(256, dtype=bool)
    for code in range(256):
        e, ne, n, nw, w, sw, s, se = ((code >> k) & 1 for k in range(8))
        ring = [n, ne, e, se, s, sw, w, nw]
        ones = sum(ring)
        transitions = sum(1 for i in range(8) if ring[i] == 0 and ring[(i + 1) % 8] == 1)
        if not (2 <= ones <= 6 and transitions == 1):
            continue
        first[code] = n * e * s == 0 and e * s * w == 0
        second[code] = n * e * w == 0 and n * s * w == 0
    return first, second


_THIN_LUTS = {"guo-hall": _guo_hall_luts(), "zhang-suen": _zhang_suen_luts()}


def thin(img: BinaryImage, method: str = "guo-hall") -> BinaryImage:
    """Iteratively peel strokes down to one-pixel-wide skeletons.

    ``guo-hall`` (default) is the two-subiteration parallel thinning that
    keeps every 8-connected component alive.  ``zhang-suen`` is available
    for comparison; it erases isolated 2x2 blocks.
    """
    try:
        luts = _THIN_LUTS[method]
    except KeyError:
        raise ValueError(f"unknown thinning method {method!r}") from None
    img = as_binary(img)
    padded = np.zeros((img.shape[0] + 2, img.shape[1] + 2), dtype=np.uint8)
    out = padded[1:-1, 1:-1]
    out[...] = img
    changed = True
    while changed:
        changed = False
        for lut in luts:
            doomed = lut[_neighbour_codes(padded)]
            doomed &= out.view(bool)
            if doomed.any():
                out[doomed] = 0
                changed = True
    return out.copy()


def edges(img: BinaryImage) -> BinaryImage:
    """Ink pixels with at least one 4-adjacent background pixel (debug view)."""
    img = as_binary(img)
    interior = ndimage.binary_erosion(img, structure=ndimage.generate_binary_structure(2, 1),
                                      border_value=0)
    return (img.astype(bool) & ~interior).astype(np.uint8)


def remove_shirorekha(word: BinaryImage, params: Optional[HeaderParams] = None
                      ) -> Tuple[BinaryImage, Tuple[int, int]]:
    """Clear the header line across the top of a word.

    Returns the cleaned image and the inclusive ``(first_row, last_row)``
    band that was erased.
    """
    p = params or HeaderParams()
    word = as_binary(word)
    counts = row_profile(word).counts
    rows = np.flatnonzero(counts)
    if rows.size == 0:
        raise BlankImage("word image has no ink")
    top, bottom = int(rows[0]), int(rows[-1])
    extent = bottom - top + 1
    search_end = top + max(1, math.ceil(p.search_fraction * extent))
    peak = top + int(np.argmax(counts[top:search_end]))
    width = word.shape[1]
    if counts[peak] < p.min_width_fraction * width:
        raise NoHeaderFound(f"peak row {peak} holds {counts[peak]} of {width} columns")

    floor = p.band_ratio * counts[peak]
    first = peak
    while first > 0 and counts[first - 1] >= floor:
        first -= 1
    last = peak
    while last + 1 < len(counts) and counts[last + 1] >= floor:
        last += 1
    out = word.copy()
    out[first:last + 1] = 0
    return out, (first, last)
