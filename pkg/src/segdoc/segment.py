"""Line, word and character segmentation from projection profiles."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np

from .preprocess import thin
from .raster import BinaryImage, BoundingBox, as_binary, col_profile, crop, row_profile


@dataclass(frozen=True)
class SegmentParams:
    row_noise_threshold: int = 0
    col_noise_threshold: int = 0
    min_gap_rows: int = 1
    min_word_gap_cols: int = 1
    char_separator_max_count: int = 1

    def __post_init__(self):
        for name, value in asdict(self).items():
            if value < 0:
                raise ValueError(f"{name} must be >= 0, got {value}")
        if self.char_separator_max_count < 1:
            raise ValueError("char_separator_max_count must be >= 1")

    def to_dict(self) -> Dict[str, int]:
        return asdict(self)


@dataclass
class GlyphSegment:
    bbox: BoundingBox
    image: Optional[BinaryImage] = field(default=None, repr=False, compare=False)
    word_index: int = 0
    index: int = 0


@dataclass
class WordSegment:
    bbox: BoundingBox
    image: Optional[BinaryImage] = field(default=None, repr=False, compare=False)
    line_index: int = 0
    index: int = 0
    glyphs: List[GlyphSegment] = field(default_factory=list)


@dataclass
class LineSegment:
    bbox: BoundingBox
    image: Optional[BinaryImage] = field(default=None, repr=False, compare=False)
    index: int = 0
    words: List[WordSegment] = field(default_factory=list)


@dataclass
class SegmentTree:
    width: int
    height: int
    lines: List[LineSegment] = field(default_factory=list)
    params: SegmentParams = field(default_factory=SegmentParams)
    provenance: Dict[str, Any] = field(default_factory=dict)

    @property
    def words(self) -> List[WordSegment]:
        return [w for line in self.lines for w in line.words]

    @property
    def glyphs(self) -> List[GlyphSegment]:
        return [g for w in self.words for g in w.glyphs]

    def counts(self) -> Tuple[int, int, int]:
        return len(self.lines), len(self.words), len(self.glyphs)


def runs(mask: np.ndarray) -> List[Tuple[int, int]]:
    """Half-open ``(start, stop)`` spans of consecutive True entries."""
    padded = np.concatenate(([False], np.asarray(mask, dtype=bool), [False]))
    edges = np.flatnonzero(padded[1:] != padded[:-1])
    return list(zip(edges[0::2].tolist(), edges[1::2].tolist()))


def _merge_close(spans: List[Tuple[int, int]], min_gap: int) -> List[Tuple[int, int]]:
    merged: List[Tuple[int, int]] = []
    for start, stop in spans:
        if merged and start - merged[-1][1] < min_gap:
            merged[-1] = (merged[-1][0], stop)
        else:
            merged.append((start, stop))
    return merged


def _tight_rows(img: np.ndarray) -> Tuple[int, int]:
    rows = np.flatnonzero(img.any(axis=1))
    return int(rows[0]), int(rows[-1]) + 1


def segment_lines(page: BinaryImage, p: SegmentParams = SegmentParams()) -> List[LineSegment]:
    page = as_binary(page)
    counts = row_profile(page).counts
    bands = _merge_close(runs(counts > p.row_noise_threshold), p.min_gap_rows)
    lines = []
    for y0, y1 in bands:
        band = page[y0:y1]
        cols = np.flatnonzero(band.any(axis=0))
        if cols.size == 0:
            continue
        ty0, ty1 = _tight_rows(band)
        box = BoundingBox.from_edges(cols[0], y0 + ty0, cols[-1] + 1, y0 + ty1)
        lines.append(LineSegment(box, crop(page, box), len(lines)))
    return lines


def segment_words(line: LineSegment, p: SegmentParams = SegmentParams()) -> List[WordSegment]:
    img = as_binary(line.image)
    counts = col_profile(img).counts
    spans = _merge_close(runs(counts > p.col_noise_threshold), p.min_word_gap_cols)
    words = []
    for x0, x1 in spans:
        strip = img[:, x0:x1]
        if not strip.any():
            continue
        y0, y1 = _tight_rows(strip)
        local = BoundingBox.from_edges(x0, y0, x1, y1)
        words.append(WordSegment(local.shift(line.bbox.x, line.bbox.y), crop(img, local),
                                 line.index, len(words)))
    return words


def segment_chars(word: WordSegment, p: SegmentParams = SegmentParams(),
                  word_index: Optional[int] = None) -> List[GlyphSegment]:
    """Split a word at columns where its skeleton has at most
    ``char_separator_max_count`` pixels.

    Columns crossed only by the thinned header line qualify, as do blank
    ones.  Boxes come from the unthinned strokes of the surviving column runs.
    """
    img = as_binary(word.image)
    skeleton_counts = col_profile(thin(img)).counts
    idx = word.index if word_index is None else word_index
    glyphs = []
    for x0, x1 in runs(skeleton_counts > p.char_separator_max_count):
        strip = img[:, x0:x1]
        if not strip.any():
            continue
        y0, y1 = _tight_rows(strip)
        local = BoundingBox.from_edges(x0, y0, x1, y1)
        glyphs.append(GlyphSegment(local.shift(word.bbox.x, word.bbox.y), crop(img, local),
                                   idx, len(glyphs)))
    return glyphs


def segment_page(page: BinaryImage, p: SegmentParams = SegmentParams(),
                 provenance: Optional[Dict[str, Any]] = None) -> SegmentTree:
    page = as_binary(page)
    h, w = page.shape
    lines = segment_lines(page, p)
    for line in lines:
        line.words = segment_words(line, p)
        for word in line.words:
            word.glyphs = segment_chars(word, p)
    return SegmentTree(w, h, lines, p, dict(provenance or {}))


def walk(tree: SegmentTree) -> Iterator[Tuple[str, Tuple[int, ...], Any]]:
    """Yield ``(level, index path, segment)`` in reading order."""
    for line in tree.lines:
        yield "line", (line.index,), line
        for word in line.words:
            yield "word", (line.index, word.index), word
            for glyph in word.glyphs:
                yield "glyph", (line.index, word.index, glyph.index), glyph
