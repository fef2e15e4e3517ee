"""Image containers, projection profiles and connected-component labeling.

Images are plain 2-D numpy arrays of dtype uint8 indexed ``img[y, x]``:
origin top-left, x grows rightward, y grows downward.  A C-contiguous array
of shape ``(height, width)`` is exactly the row-major raster where
``pixel(x, y) = data[y * width + x]``.

* a *gray* image holds intensities 0..255;
* a *binary* image holds 0 (background) and 1 (ink / object).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np
from scipy import ndimage

from .errors import OutOfBounds

GrayImage = np.ndarray
BinaryImage = np.ndarray


def as_gray(img) -> GrayImage:
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"gray image must be a non-empty 2-D array, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if arr.min() < 0 or arr.max() > 255:
            raise ValueError("gray intensities must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return np.ascontiguousarray(arr)


def as_binary(img) -> BinaryImage:
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise ValueError(f"binary image must be 2-D, got shape {arr.shape}")
    if arr.dtype == bool:
        return np.ascontiguousarray(arr, dtype=np.uint8)
    if arr.dtype.kind in "ui":
        bad = arr.size and (arr.max() > 1 or arr.min() < 0)
    else:
        bad = not np.isin(arr, (0, 1)).all()
    if bad:
        raise ValueError("binary image values must be exactly 0 or 1")
    return np.ascontiguousarray(arr, dtype=np.uint8)


class Axis(enum.Enum):
    ROWS = "rows"
    COLUMNS = "columns"


@dataclass(frozen=True, eq=False)
class ProjectionProfile:
    """Ink count per row (``Axis.ROWS``) or per column (``Axis.COLUMNS``)."""

    axis: Axis
    counts: np.ndarray

    def __len__(self) -> int:
        return len(self.counts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProjectionProfile):
            return NotImplemented
        return self.axis is other.axis and np.array_equal(self.counts, other.counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True, order=True)
class BoundingBox:
    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValueError(f"empty bounding box {self.as_list()}")

    @property
    def x1(self) -> int:
        """Exclusive right edge."""
        return self.x + self.w

    @property
    def y1(self) -> int:
        """Exclusive bottom edge."""
        return self.y + self.h

    @property
    def area(self) -> int:
        return self.w * self.h

    def as_list(self) -> List[int]:
        return [self.x, self.y, self.w, self.h]

    @classmethod
    def from_list(cls, values) -> "BoundingBox":
        x, y, w, h = (int(v) for v in values)
        return cls(x, y, w, h)

    @classmethod
    def from_edges(cls, x0: int, y0: int, x1: int, y1: int) -> "BoundingBox":
        return cls(int(x0), int(y0), int(x1 - x0), int(y1 - y0))

    def contains(self, other: "BoundingBox") -> bool:
        return (self.x <= other.x and self.y <= other.y
                and other.x1 <= self.x1 and other.y1 <= self.y1)

    def fits(self, width: int, height: int) -> bool:
        return self.x >= 0 and self.y >= 0 and self.x1 <= width and self.y1 <= height

    def shift(self, dx: int, dy: int) -> "BoundingBox":
        return BoundingBox(self.x + dx, self.y + dy, self.w, self.h)

    def intersection_area(self, other: "BoundingBox") -> int:
        iw = min(self.x1, other.x1) - max(self.x, other.x)
        ih = min(self.y1, other.y1) - max(self.y, other.y)
        return max(0, iw) * max(0, ih)

    def iou(self, other: "BoundingBox") -> float:
        inter = self.intersection_area(other)
        return inter / (self.area + other.area - inter)


@dataclass(frozen=True)
class Component:
    label: int
    bbox: BoundingBox
    area: int


def invert(img: BinaryImage) -> BinaryImage:
    return (1 - as_binary(img)).astype(np.uint8)


def row_profile(img: BinaryImage) -> ProjectionProfile:
    img = as_binary(img)
    return ProjectionProfile(Axis.ROWS, img.sum(axis=1, dtype=np.int64))


def col_profile(img: BinaryImage) -> ProjectionProfile:
    img = as_binary(img)
    return ProjectionProfile(Axis.COLUMNS, img.sum(axis=0, dtype=np.int64))


def crop(img: np.ndarray, box: BoundingBox) -> np.ndarray:
    """Copy of the pixels inside ``box``; raises OutOfBounds if it leaves the image."""
    h, w = img.shape[:2]
    if not box.fits(w, h):
        raise OutOfBounds(f"box {box.as_list()} exceeds image {w}x{h}")
    return img[box.y:box.y1, box.x:box.x1].copy()


def ink_bbox(img: BinaryImage) -> Union[BoundingBox, None]:
    """Tight box around all 1-pixels, or None for a blank image."""
    rows = np.flatnonzero(img.any(axis=1))
    if rows.size == 0:
        return None
    cols = np.flatnonzero(img.any(axis=0))
    return BoundingBox.from_edges(cols[0], rows[0], cols[-1] + 1, rows[-1] + 1)


def bincount(values: np.ndarray, minlength: int = 0, chunk: int = 1 << 20) -> np.ndarray:
    """``np.bincount`` over a flattened array without an intp copy of all of it."""
    flat = values.ravel()
    out = np.zeros(minlength, dtype=np.int64)
    for start in range(0, flat.size, chunk):
        part = np.bincount(flat[start:start + chunk], minlength=minlength)
        if part.size > out.size:
            part[:out.size] += out
            out = part
        else:
            out[:part.size] += part
    return out


def _structure(connectivity: int) -> np.ndarray:
    if connectivity == 8:
        return np.ones((3, 3), dtype=bool)
    if connectivity == 4:
        return ndimage.generate_binary_structure(2, 1)
    raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")


def label_image(img: BinaryImage, connectivity: int = 8) -> Tuple[np.ndarray, List[Component]]:
    """Label map plus components, labels renumbered in (bbox.y, bbox.x) order."""
    img = as_binary(img)
    raw, n = ndimage.label(img, structure=_structure(connectivity))
    if n == 0:
        return raw, []
    slices = ndimage.find_objects(raw)
    areas = bincount(raw, minlength=n + 1)
    boxes = [BoundingBox.from_edges(sx.start, sy.start, sx.stop, sy.stop) for sy, sx in slices]
    order = sorted(range(n), key=lambda i: (boxes[i].y, boxes[i].x, i))
    remap = np.zeros(n + 1, dtype=raw.dtype)
    components = []
    for new, old in enumerate(order, start=1):
        remap[old + 1] = new
        components.append(Component(new, boxes[old], int(areas[old + 1])))
    return remap[raw], components


def label_components(img: BinaryImage, connectivity: int = 8) -> List[Component]:
    return label_image(img, connectivity)[1]
