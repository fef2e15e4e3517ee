"""Seeded synthetic pages with Devanagari-like structure and exact ground truth.

A word is a row of glyph bodies hanging from one shared header band, so the
whole word is a single connected component.  Digit words have no header and
their glyphs stand apart, which is what makes a column-gap word splitter
cut every digit into its own word.  Glyphs may carry a detached vertical
bar that a character splitter reports as an extra symbol.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .errors import SpecInfeasible
from .preprocess import center_crop, rotate
from .raster import BinaryImage, BoundingBox

Range = Tuple[int, int]


@dataclass(frozen=True)
class PageSpec:
    seed: int = 0
    width: int = 640
    height: int = 480
    margin: int = 24
    line_count: int = 5
    words_per_line: Range = (3, 5)
    glyphs_per_word: Range = (2, 5)
    glyph_width: Range = (7, 14)
    glyph_height: Range = (10, 18)
    header_thickness: int = 2
    line_gap: Range = (10, 20)
    word_gap: Range = (8, 16)
    glyph_gap: Range = (1, 3)
    digit_word_probability: float = 0.0
    detached_bar_probability: float = 0.0
    skew_angle: float = 0.0
    noise_speck_count: int = 0

    def __post_init__(self):
        for name in ("words_per_line", "glyphs_per_word", "glyph_width", "glyph_height",
                     "line_gap", "word_gap", "glyph_gap"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} range is reversed: {(lo, hi)}")
            if lo < 1:
                raise ValueError(f"{name} must be >= 1")
            object.__setattr__(self, name, (int(lo), int(hi)))
        if self.glyph_width[0] < 3 or self.glyph_height[0] < 3:
            raise ValueError("glyph sizes must be at least 3x3")
        if self.header_thickness < 1:
            raise ValueError("header_thickness must be >= 1")
        if self.width < 1 or self.height < 1 or self.margin < 0:
            raise ValueError("page size must be positive and margin non-negative")
        if self.line_count < 0 or self.noise_speck_count < 0:
            raise ValueError("counts must be non-negative")
        for name in ("digit_word_probability", "detached_bar_probability"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")

    def to_dict(self) -> Dict[str, Any]:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PageSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown page spec keys: {sorted(unknown)}")
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in data.items()})


@dataclass
class TruthGlyph:
    bbox: BoundingBox
    detached_bar: bool = False


@dataclass
class TruthWord:
    bbox: BoundingBox
    digit: bool = False
    glyphs: List[TruthGlyph] = field(default_factory=list)


@dataclass
class TruthLine:
    bbox: BoundingBox
    words: List[TruthWord] = field(default_factory=list)

    @property
    def rows(self) -> Tuple[int, int]:
        """Half-open row range."""
        return self.bbox.y, self.bbox.y1


@dataclass
class Manifest:
    """Ground truth in pre-rotation page coordinates."""

    width: int
    height: int
    lines: List[TruthLine] = field(default_factory=list)
    skew_angle: float = 0.0
    specks: List[Tuple[int, int]] = field(default_factory=list)
    seed: Optional[int] = None

    @property
    def words(self) -> List[TruthWord]:
        return [w for line in self.lines for w in line.words]

    @property
    def glyphs(self) -> List[TruthGlyph]:
        return [g for w in self.words for g in w.glyphs]

    def counts(self) -> Tuple[int, int, int]:
        return len(self.lines), len(self.words), len(self.glyphs)


@dataclass
class _Word:
    ink: np.ndarray
    digit: bool
    glyphs: List[Tuple[int, int, bool]]  # (x, width, detached bar) in word columns


def _between(rng: np.random.Generator, r: Range) -> int:
    return int(rng.integers(r[0], r[1] + 1))


def _glyph_body(rng: np.random.Generator, w: int, h: int) -> np.ndarray:
    """Random 8-connected stroke pattern filling a ``w`` x ``h`` box exactly.

    A full-height stem fixes the vertical extent and a full-width bar the
    horizontal one; every other stroke starts on one of those two.
    """
    body = np.zeros((h, w), dtype=np.uint8)
    stem_w = 1 if w < 6 else _between(rng, (1, 2))
    stem_x = _between(rng, (0, w - stem_w))
    body[:, stem_x:stem_x + stem_w] = 1
    bar_y = _between(rng, (min(2, h - 1), h - 1))
    bar_t = 1 if bar_y >= h - 1 else _between(rng, (1, 2))
    body[bar_y:bar_y + bar_t, :] = 1
    for _ in range(_between(rng, (0, 2))):
        if rng.random() < 0.5:
            # vertical hook hanging off the bar
            x = _between(rng, (0, w - 1))
            y0, y1 = sorted((bar_y, _between(rng, (bar_y, h - 1))))
            body[y0:y1 + 1, x] = 1
        else:
            # diagonal running from the stem
            y = _between(rng, (0, h - 1))
            step = 1 if rng.random() < 0.5 else -1
            x = stem_x if step < 0 else stem_x + stem_w - 1
            for _ in range(_between(rng, (1, w))):
                if not (0 <= x < w and 0 <= y < h):
                    break
                body[y, x] = 1
                x += step
                y += 1
    return body


def _make_word(rng: np.random.Generator, spec: PageSpec, digit: bool) -> _Word:
    header = spec.header_thickness
    n = _between(rng, spec.glyphs_per_word)
    pieces = []
    for _ in range(n):
        gw = _between(rng, spec.glyph_width)
        gh = _between(rng, spec.glyph_height)
        body = _glyph_body(rng, gw, gh if not digit else gh + header)
        bar = not digit and gh >= 4 and rng.random() < spec.detached_bar_probability
        if bar:
            gap = _between(rng, (1, 2))
            bar_w = _between(rng, (1, 2))
            # starts one blank row below the header so it touches nothing
            with_bar = np.zeros((gh, gw + gap + bar_w), dtype=np.uint8)
            with_bar[:, :gw] = body
            with_bar[1:, gw + gap:] = 1
            body = with_bar
        pieces.append((body, bar))

    gaps = [_between(rng, spec.glyph_gap) for _ in range(n - 1)]
    width = sum(p.shape[1] for p, _ in pieces) + sum(gaps)
    top = 0 if digit else header
    height = top + max(p.shape[0] for p, _ in pieces)
    ink = np.zeros((height, width), dtype=np.uint8)
    if not digit:
        ink[:header, :] = 1
    glyphs = []
    x = 0
    for i, (body, bar) in enumerate(pieces):
        bh, bw = body.shape
        ink[top:top + bh, x:x + bw] |= body
        glyphs.append((x, bw, bar))
        x += bw + (gaps[i] if i < n - 1 else 0)
    return _Word(ink, digit, glyphs)


def _place_specks(rng: np.random.Generator, page: np.ndarray, count: int,
                  margin: int) -> List[Tuple[int, int]]:
    h, w = page.shape
    lo_x, hi_x = min(margin, w - 1), max(min(margin, w - 1), w - 1 - margin)
    lo_y, hi_y = min(margin, h - 1), max(min(margin, h - 1), h - 1 - margin)
    specks = []
    attempts = 0
    while len(specks) < count:
        attempts += 1
        if attempts > 200 * count + 1000:
            raise SpecInfeasible(f"could only place {len(specks)} of {count} specks")
        x = _between(rng, (lo_x, hi_x))
        y = _between(rng, (lo_y, hi_y))
        if page[max(y - 2, 0):y + 3, max(x - 2, 0):x + 3].any():
            continue
        page[y, x] = 1
        specks.append((x, y))
    return specks


def generate(spec: PageSpec) -> Tuple[BinaryImage, Manifest]:
    """Render a page and its manifest; the same spec always gives the same page."""
    rng = np.random.default_rng(spec.seed)
    page = np.zeros((spec.height, spec.width), dtype=np.uint8)
    manifest = Manifest(spec.width, spec.height, skew_angle=float(spec.skew_angle),
                        seed=spec.seed)
    right = spec.width - spec.margin
    bottom = spec.height - spec.margin
    y = spec.margin

    for li in range(spec.line_count):
        want = _between(rng, spec.words_per_line)
        words: List[Tuple[int, _Word]] = []
        x = spec.margin
        for _ in range(want):
            word = _make_word(rng, spec, rng.random() < spec.digit_word_probability)
            start = x if not words else x + _between(rng, spec.word_gap)
            if start + word.ink.shape[1] > right:
                break
            words.append((start, word))
            x = start + word.ink.shape[1]
        if len(words) < spec.words_per_line[0] or not words:
            raise SpecInfeasible(f"line {li}: only {len(words)} words fit in width {spec.width}")
        if li > 0:
            y += _between(rng, spec.line_gap)
        line_h = max(word.ink.shape[0] for _, word in words)
        if y + line_h > bottom:
            raise SpecInfeasible(f"line {li} of {spec.line_count} does not fit in height "
                                 f"{spec.height}")

        truth_words = []
        for wx, word in words:
            wh, ww = word.ink.shape
            page[y:y + wh, wx:wx + ww] |= word.ink
            glyphs = []
            for gx, gw, bar in word.glyphs:
                cols = word.ink[:, gx:gx + gw]
                rows = np.flatnonzero(cols.any(axis=1))
                glyphs.append(TruthGlyph(
                    BoundingBox.from_edges(wx + gx, y + rows[0], wx + gx + gw, y + rows[-1] + 1),
                    bar))
            truth_words.append(TruthWord(BoundingBox(wx, y, ww, wh), word.digit, glyphs))
        first_x = words[0][0]
        last_x = words[-1][0] + words[-1][1].ink.shape[1]
        manifest.lines.append(TruthLine(BoundingBox.from_edges(first_x, y, last_x, y + line_h),
                                        truth_words))
        y += line_h

    manifest.specks = _place_specks(rng, page, spec.noise_speck_count, spec.margin)
    if spec.skew_angle:
        page = center_crop(rotate(page, spec.skew_angle), spec.width, spec.height)
    return page, manifest
