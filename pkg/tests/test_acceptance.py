"""End-to-end acceptance checks, one test per criterion.

Each test records a pass/fail line that the terminal summary prints at the
end of the run, and asserts its own runtime budget.
"""
import json
import os
import subprocess
import sys
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest
from scipy import ndimage

from conftest import random_binary, record
from oracles import flood_fill_partition, line_boxes, otsu_exhaustive
from segdoc import serialize
from segdoc.evaluate import Rounding, accuracy, format_percent
from segdoc.pnm import binary_to_gray, decode_pgm, encode_pgm, write_pgm
from segdoc.preprocess import estimate_skew, otsu_threshold, rotate, thin
from segdoc.raster import crop, label_image
from segdoc.segment import WordSegment, segment_chars, segment_lines, segment_page, segment_words
from segdoc.synth import PageSpec, generate

pytestmark = pytest.mark.acceptance

EIGHT = np.ones((3, 3), bool)


@contextmanager
def criterion(number, title, budget):
    """Run a block, record its outcome and fail it if it overruns ``budget`` seconds."""
    start = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        record(number, title, False, f"{type(exc).__name__}: {exc}"[:160])
        raise
    elapsed = time.perf_counter() - start
    ok = elapsed < budget
    record(number, title, ok, f"({elapsed:.2f} s, budget {budget} s)")
    assert ok, f"took {elapsed:.2f} s, budget {budget} s"


# Per-word character counts and the figures printed alongside them: the
# character table truncates, the overall table rounds half up.
TABLE_ROWS = [
    (3, 5, Fraction(60), "60", Rounding.TRUNCATE),
    (3, 5, Fraction(60), "60", Rounding.TRUNCATE),
    (6, 12, Fraction(50), "50", Rounding.TRUNCATE),
    (3, 7, Fraction(300, 7), "42", Rounding.TRUNCATE),
    (2, 6, Fraction(100, 3), "33", Rounding.TRUNCATE),
    (2, 6, Fraction(100, 3), "33", Rounding.TRUNCATE),
    (8, 8, Fraction(100), "100", Rounding.HALF_UP),
    (41, 45, Fraction(820, 9), "91", Rounding.HALF_UP),
    (133, 242, Fraction(6650, 121), "55", Rounding.HALF_UP),
]


def test_01_accuracy_arithmetic():
    with criterion(1, "accuracy arithmetic reproduces the result tables", 1.0):
        for present, recognized, exact, printed, mode in TABLE_ROWS:
            value = accuracy(present, recognized)
            assert value == exact
            assert format_percent(value, mode) == printed
        decimals = {(3, 7): "42.86", (2, 6): "33.33", (41, 45): "91.11", (133, 242): "54.96"}
        for (p, r), text in decimals.items():
            assert format_percent(accuracy(p, r), Rounding.EXACT) == text
        assert round(float(accuracy(2, 6)), 1) == 33.3
        assert round(float(accuracy(41, 45)), 1) == 91.1


def test_02_line_segmentation_on_100_pages():
    with criterion(2, "lines recovered exactly on 100 synth pages", 30.0):
        for seed in range(100):
            page, manifest = generate(PageSpec(seed=seed))
            lines = segment_lines(page)
            assert len(lines) == len(manifest.lines), seed
            assert [(l.bbox.y, l.bbox.y1) for l in lines] == [t.rows for t in manifest.lines]


def test_03_digit_words_split_per_glyph():
    with criterion(3, "digit words split into one word per digit", 10.0):
        for k in (2, 3, 4, 5):
            for seed in range(5):
                spec = PageSpec(seed=100 * k + seed, digit_word_probability=1.0,
                                glyphs_per_word=(k, k))
                page, manifest = generate(spec)
                emitted = 0
                for line, truth in zip(segment_lines(page), manifest.lines):
                    words = segment_words(line)
                    assert len(words) == k * len(truth.words)
                    emitted += len(words)
                present = len(manifest.words)
                acc = accuracy(present, emitted)
                assert acc < 100
                assert acc == Fraction(100, k)


def test_04_detached_bars_over_segment():
    with criterion(4, "detached vertical bars over-segment characters", 10.0):
        words_checked = 0
        for seed in range(20):
            page, manifest = generate(PageSpec(seed=seed, detached_bar_probability=0.5))
            for word in manifest.words:
                if not any(g.detached_bar for g in word.glyphs):
                    continue
                glyphs = segment_chars(WordSegment(word.bbox, crop(page, word.bbox)))
                assert len(glyphs) > len(word.glyphs)
                spans = [(g.bbox.x, g.bbox.x1) for g in glyphs]
                for t in word.glyphs:
                    assert any(t.bbox.x < x1 and x0 < t.bbox.x1 for x0, x1 in spans)
                words_checked += 1
        assert words_checked > 50


def test_05_otsu_matches_exhaustive_oracle():
    rng = np.random.default_rng(2024)
    with criterion(5, "Otsu equals the exhaustive oracle on 50 images", 5.0):
        for i in range(50):
            h, w = (int(v) for v in rng.integers(8, 48, 2))
            if i % 2:
                img = rng.integers(0, 256, (h, w), dtype=np.uint8)
            else:
                centers = rng.integers(0, 256, 2)
                img = np.clip(rng.normal(centers[rng.integers(0, 2, (h, w))], 20), 0, 255)
                img = img.astype(np.uint8)
            if img.min() == img.max():
                img[0, 0] ^= 1
            assert otsu_threshold(img).level == otsu_exhaustive(img.tolist())


def test_06_thinning_properties():
    rng = np.random.default_rng(7)
    with criterion(6, "thinning idempotent, subset, keeps components", 10.0):
        for _ in range(50):
            img = random_binary(rng, max_side=64)
            out = thin(img)
            assert not (out > img).any()
            assert np.array_equal(thin(out), out)
            assert ndimage.label(out, EIGHT)[1] == ndimage.label(img, EIGHT)[1]


def test_07_skew_round_trip():
    with criterion(7, "skew estimated within 0.5 deg and lines recovered", 60.0):
        for angle in (-8, -4, -1, 0, 1, 4, 8):
            page, manifest = generate(PageSpec(seed=40 + angle, skew_angle=float(angle)))
            est = estimate_skew(page, (-10, 10), 0.1)
            assert abs(est.angle - angle) <= 0.5, (angle, est.angle)
            corrected = rotate(page, -est.angle)
            assert len(segment_lines(corrected)) == len(manifest.lines), angle


def test_08_oracle_equivalence():
    rng = np.random.default_rng(99)
    with criterion(8, "lines and components match brute-force oracles", 30.0):
        for i in range(200):
            img = random_binary(rng, max_side=64)
            if i % 2:
                img[rng.random(img.shape[0]) < 0.3] = 0
            got = [tuple(l.bbox.as_list()) for l in segment_lines(img)]
            assert got == line_boxes(img.tolist())
            labels, comps = label_image(img)
            partition = set()
            for c in comps:
                ys, xs = np.nonzero(labels == c.label)
                partition.add(frozenset(zip(xs.tolist(), ys.tolist())))
            assert partition == flood_fill_partition(img.tolist(), 8)


A4_SPEC = PageSpec(seed=5, width=2480, height=3508, margin=250, line_count=40,
                   words_per_line=(8, 14), glyphs_per_word=(2, 6), glyph_width=(18, 34),
                   glyph_height=(28, 44), header_thickness=5, line_gap=(14, 24),
                   word_gap=(24, 44), glyph_gap=(2, 5))


def test_09_a4_page_performance(tmp_path):
    page, manifest = generate(A4_SPEC)
    path = tmp_path / "a4.pgm"
    write_pgm(path, binary_to_gray(page))
    out = tmp_path / "out"
    cmd = [sys.executable, "-m", "segdoc", "segment", "-i", str(path), "-o", str(out)]
    with criterion(9, "A4 page segmented end to end in < 2 s and < 200 MB", 2.0):
        start = time.perf_counter()
        proc = subprocess.Popen(cmd, stderr=subprocess.PIPE)
        _, status, usage = os.wait4(proc.pid, 0)
        elapsed = time.perf_counter() - start
        stderr = proc.stderr.read().decode()
        proc.stderr.close()
        assert os.waitstatus_to_exitcode(status) == 0, stderr
        peak_mb = usage.ru_maxrss / 1024
        print(f"A4 segment: {elapsed:.2f} s wall, {peak_mb:.0f} MB peak RSS")
        assert peak_mb < 200, f"peak RSS {peak_mb:.0f} MB"
        assert elapsed < 2.0
    tree = serialize.tree_from_dict(json.loads((out / "segments.json").read_text()))
    lines, words, glyphs = tree.counts()
    assert (lines, words) == (len(manifest.lines), len(manifest.words))
    assert glyphs >= len(manifest.glyphs)


def test_10_serialization_round_trips():
    rng = np.random.default_rng(10)
    with criterion(10, "segments/manifest JSON and PGM round-trip exactly", 10.0):
        page, manifest = generate(PageSpec(seed=3, digit_word_probability=0.3,
                                           detached_bar_probability=0.3, noise_speck_count=4,
                                           skew_angle=1.5))
        tree = segment_page(page, provenance={"threshold": 127, "skew_angle": 0.0})
        text = serialize.dumps(serialize.tree_to_dict(tree))
        back = serialize.tree_from_dict(json.loads(text), page)
        assert serialize.dumps(serialize.tree_to_dict(back)) == text
        assert back.counts() == tree.counts()
        mtext = serialize.dumps(serialize.manifest_to_dict(manifest))
        mback = serialize.manifest_from_dict(json.loads(mtext))
        assert mback == manifest
        assert serialize.dumps(serialize.manifest_to_dict(mback)) == mtext
        for _ in range(20):
            h, w = (int(v) for v in rng.integers(1, 80, 2))
            img = rng.integers(0, 256, (h, w), dtype=np.uint8)
            for binary in (True, False):
                assert np.array_equal(decode_pgm(encode_pgm(img, binary)), img)
