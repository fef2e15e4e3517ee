from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import manifest_with_counts, tree_with_counts
from oracles import iou_by_pixels
from segdoc.errors import DimensionMismatch
from segdoc.evaluate import (Level, Rounding, accuracy, compare_boxes, format_percent,
                             format_table, report_page)
from segdoc.raster import BoundingBox
from segdoc.segment import SegmentTree, segment_page
from segdoc.synth import Manifest, PageSpec, generate


@pytest.mark.parametrize("present,recognized,expected", [
    (3, 5, Fraction(60)),
    (41, 45, Fraction(4100, 45)),
    (133, 242, Fraction(13300, 242)),
    (8, 8, Fraction(100)),
    (0, 0, Fraction(100)),
    (0, 4, Fraction(0)),
])
def test_accuracy_values(present, recognized, expected):
    assert accuracy(present, recognized) == expected


def test_accuracy_rounded_figures():
    assert round(float(accuracy(41, 45)), 2) == 91.11
    assert round(float(accuracy(133, 242)), 2) == 54.96


def test_accuracy_rejects_negative():
    with pytest.raises(ValueError):
        accuracy(-1, 3)


@given(st.integers(0, 500), st.integers(0, 500), st.integers(1, 20))
def test_accuracy_properties(a, b, k):
    assert accuracy(a, b) == accuracy(b, a)
    assert (accuracy(a, b) == 100) == (a == b)
    assert accuracy(k * a, k * b) == accuracy(a, b)
    assert 0 <= accuracy(a, b) <= 100


@pytest.mark.parametrize("value,mode,text", [
    (Fraction(300, 7), Rounding.TRUNCATE, "42"),
    (Fraction(300, 7), Rounding.HALF_UP, "43"),
    (Fraction(300, 7), Rounding.EXACT, "42.86"),
    (Fraction(13300, 242), Rounding.TRUNCATE, "54"),
    (Fraction(13300, 242), Rounding.HALF_UP, "55"),
    (Fraction(121, 2), Rounding.HALF_UP, "61"),
    (Fraction(100), Rounding.TRUNCATE, "100"),
])
def test_format_percent(value, mode, text):
    assert format_percent(value, mode) == text


def _boxes(rng, n, lo=10, hi=30):
    out = []
    for i in range(n):
        w, h = rng.integers(lo, hi, 2)
        out.append(BoundingBox(int(i * 40), int(rng.integers(0, 50)), int(w), int(h)))
    return out


def test_compare_identical(rng):
    boxes = _boxes(rng, 12)
    for t in (0.1, 0.5, 1.0):
        r = compare_boxes(boxes, boxes, t)
        assert (r.matched, r.over_segmented, r.under_segmented) == (12, 0, 0)


def test_compare_halves():
    truth = [BoundingBox(i * 30, 0, 20, 10) for i in range(5)]
    halves = []
    for b in truth:
        halves += [BoundingBox(b.x, b.y, 10, 10), BoundingBox(b.x + 10, b.y, 10, 10)]
    r = compare_boxes(halves, truth, 0.8)
    assert (r.matched, r.over_segmented, r.under_segmented) == (0, 10, 5)


def _jitter(rng, boxes):
    """Move every edge of every box by at most one pixel."""
    out = []
    for b in boxes:
        dl, dr, dt, db = (int(v) for v in rng.integers(-1, 2, 4))
        out.append(BoundingBox.from_edges(b.x + dl, b.y + dt, b.x1 + dr, b.y1 + db))
    return out


@pytest.mark.parametrize("seed", range(5))
def test_compare_jitter_matches(seed):
    rng = np.random.default_rng(seed)
    # from 20x20 up, one pixel per edge keeps IoU above (19*19)/(2*400-361) > 0.8
    truth = _boxes(rng, 20, lo=20, hi=36)
    jittered = _jitter(rng, truth)
    for p, t in zip(jittered, truth):
        assert abs(p.iou(t) - iou_by_pixels(p.as_list(), t.as_list())) < 1e-12
    r = compare_boxes(jittered, truth, 0.7)
    assert r.matched == 20
    assert sorted(r.pairs) == [(i, i) for i in range(20)]


@pytest.mark.parametrize("seed", range(5))
def test_compare_jitter_small_boxes_against_oracle(seed):
    rng = np.random.default_rng(seed)
    truth = _boxes(rng, 20, lo=10, hi=14)
    jittered = _jitter(rng, truth)
    expected = sum(iou_by_pixels(p.as_list(), t.as_list()) >= 0.7
                   for p, t in zip(jittered, truth))
    assert compare_boxes(jittered, truth, 0.7).matched == expected


def test_diagonal_shift_of_10x10_box_falls_below_07():
    a, b = BoundingBox(0, 0, 10, 10), BoundingBox(1, 1, 10, 10)
    assert iou_by_pixels(a.as_list(), b.as_list()) == pytest.approx(81 / 119)
    assert compare_boxes([b], [a], 0.7).matched == 0


def test_compare_greedy_prefers_best_iou():
    truth = [BoundingBox(0, 0, 10, 10)]
    predicted = [BoundingBox(1, 0, 10, 10), BoundingBox(0, 0, 10, 10)]
    r = compare_boxes(predicted, truth, 0.5)
    assert r.pairs == ((1, 0),)
    assert r.over_segmented == 1


def test_compare_empty_and_threshold():
    assert compare_boxes([], [BoundingBox(0, 0, 1, 1)], 0.5).under_segmented == 1
    with pytest.raises(ValueError):
        compare_boxes([], [], 0)
    with pytest.raises(ValueError):
        compare_boxes([], [], 1.5)


def test_report_overall_counts():
    tree = tree_with_counts(8, 45, 242)
    manifest = manifest_with_counts(8, 41, 133)
    rows = report_page(tree, manifest)
    levels = [r for r, _ in rows]
    assert [r.level for r in levels] == [Level.LINES, Level.WORDS, Level.CHARACTERS]
    assert [(r.present, r.recognized) for r in levels] == [(8, 8), (41, 45), (133, 242)]
    assert [r.display(Rounding.HALF_UP) for r in levels] == ["100", "91", "55"]
    assert round(float(levels[1].accuracy_percent), 1) == 91.1
    assert round(float(levels[2].accuracy_percent), 1) == 55.0
    table = format_table(levels)
    assert "characters" in table and "55 %" in table


def test_report_empty():
    rows = report_page(SegmentTree(10, 10), Manifest(10, 10))
    assert all(r.accuracy_percent == 100 for r, _ in rows)


def test_report_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        report_page(SegmentTree(10, 10), Manifest(10, 11))


def test_report_synth_lines_exact():
    page, manifest = generate(PageSpec(seed=31, digit_word_probability=0.3,
                                       detached_bar_probability=0.3))
    rows = report_page(segment_page(page), manifest)
    line_report, line_boxes = rows[0]
    assert line_report.accuracy_percent == 100
    assert line_boxes.matched == len(manifest.lines)
    char_report, _ = rows[2]
    assert char_report.recognized > char_report.present
