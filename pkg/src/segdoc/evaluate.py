"""Segmentation accuracy and box-level comparison against ground truth."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatch
from .raster import BoundingBox


class Level(enum.Enum):
    LINES = "lines"
    WORDS = "words"
    CHARACTERS = "characters"


class Rounding(enum.Enum):
    TRUNCATE = "truncate"
    HALF_UP = "half-up"
    EXACT = "exact"


@dataclass(frozen=True)
class LevelReport:
    level: Level
    present: int
    recognized: int
    accuracy_percent: Fraction

    def display(self, rounding: Rounding = Rounding.HALF_UP) -> str:
        return format_percent(self.accuracy_percent, rounding)


@dataclass(frozen=True)
class BoxMatchReport:
    matched: int
    over_segmented: int
    under_segmented: int
    iou_threshold: float
    pairs: Tuple[Tuple[int, int], ...] = ()


def accuracy(present: int, recognized: int) -> Fraction:
    """100 * min / max of the two counts, exact; 100 when both are zero."""
    if present < 0 or recognized < 0:
        raise ValueError("counts must be non-negative")
    hi = max(present, recognized)
    if hi == 0:
        return Fraction(100)
    return Fraction(100 * min(present, recognized), hi)


def format_percent(value: Fraction, rounding: Rounding = Rounding.HALF_UP) -> str:
    """Render a percentage.  Table-style truncation and half-up rounding give
    integers; ``exact`` keeps two decimals."""
    rounding = Rounding(rounding)
    if rounding is Rounding.TRUNCATE:
        return str(math.floor(value))
    if rounding is Rounding.HALF_UP:
        return str(math.floor(value + Fraction(1, 2)))
    return f"{float(value):.2f}"


def _iou_matrix(predicted: Sequence[BoundingBox], truth: Sequence[BoundingBox]) -> np.ndarray:
    p = np.array([b.as_list() for b in predicted], dtype=np.int64).reshape(-1, 4)
    t = np.array([b.as_list() for b in truth], dtype=np.int64).reshape(-1, 4)
    ix = (np.minimum(p[:, None, 0] + p[:, None, 2], t[None, :, 0] + t[None, :, 2])
          - np.maximum(p[:, None, 0], t[None, :, 0]))
    iy = (np.minimum(p[:, None, 1] + p[:, None, 3], t[None, :, 1] + t[None, :, 3])
          - np.maximum(p[:, None, 1], t[None, :, 1]))
    inter = np.clip(ix, 0, None) * np.clip(iy, 0, None)
    union = (p[:, 2] * p[:, 3])[:, None] + (t[:, 2] * t[:, 3])[None, :] - inter
    return inter / union


def compare_boxes(predicted: Sequence[BoundingBox], truth: Sequence[BoundingBox],
                  iou_threshold: float = 0.5) -> BoxMatchReport:
    """Greedy one-to-one matching, highest IoU first."""
    if not 0 < iou_threshold <= 1:
        raise ValueError("iou_threshold must lie in (0, 1]")
    if not predicted or not truth:
        return BoxMatchReport(0, len(predicted), len(truth), iou_threshold)
    iou = _iou_matrix(predicted, truth)
    pi, ti = np.nonzero(iou >= iou_threshold)
    # descending IoU; ties fall back to predicted then truth order
    order = np.lexsort((ti, pi, -iou[pi, ti]))
    used_p, used_t = set(), set()
    pairs = []
    for k in order:
        a, b = int(pi[k]), int(ti[k])
        if a in used_p or b in used_t:
            continue
        used_p.add(a)
        used_t.add(b)
        pairs.append((a, b))
    return BoxMatchReport(len(pairs), len(predicted) - len(pairs), len(truth) - len(pairs),
                          iou_threshold, tuple(pairs))


def level_boxes(tree) -> Dict[Level, List[BoundingBox]]:
    """Boxes per level for anything shaped like lines -> words -> glyphs."""
    words = [w for line in tree.lines for w in line.words]
    return {
        Level.LINES: [line.bbox for line in tree.lines],
        Level.WORDS: [w.bbox for w in words],
        Level.CHARACTERS: [g.bbox for w in words for g in w.glyphs],
    }


def report_page(tree, manifest, iou_threshold: float = 0.5
                ) -> List[Tuple[LevelReport, BoxMatchReport]]:
    """Per-level counts and box matches of a segmentation against a manifest.

    Both arguments need ``width``, ``height`` and a lines -> words -> glyphs
    hierarchy with ``bbox`` attributes.
    """
    if (tree.width, tree.height) != (manifest.width, manifest.height):
        raise DimensionMismatch(f"segmentation is {tree.width}x{tree.height}, "
                                f"ground truth is {manifest.width}x{manifest.height}")
    got = level_boxes(tree)
    want = level_boxes(manifest)
    out = []
    for level in Level:
        present, recognized = len(want[level]), len(got[level])
        out.append((LevelReport(level, present, recognized, accuracy(present, recognized)),
                    compare_boxes(got[level], want[level], iou_threshold)))
    return out


def format_table(reports: Sequence[LevelReport], rounding: Rounding = Rounding.HALF_UP) -> str:
    header = f"{'level':<12}{'present':>9}{'recognized':>12}{'accuracy':>10}"
    rows = [header]
    for r in reports:
        rows.append(f"{r.level.value:<12}{r.present:>9}{r.recognized:>12}"
                    f"{r.display(rounding) + ' %':>10}")
    return "\n".join(rows)
