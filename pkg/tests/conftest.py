import numpy as np
import pytest

from segdoc.raster import BoundingBox
from segdoc.segment import GlyphSegment, LineSegment, SegmentTree, WordSegment
from segdoc.synth import Manifest, TruthGlyph, TruthLine, TruthWord

ACCEPTANCE_RESULTS = []


def record(number, title, passed, detail=""):
    ACCEPTANCE_RESULTS.append((number, title, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:>2}. {title}  {detail}".rstrip())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_binary(rng, max_side=64, min_side=1):
    h, w = rng.integers(min_side, max_side + 1, size=2)
    density = rng.uniform(0.05, 0.7)
    return (rng.random((h, w)) < density).astype(np.uint8)


def check_tree_invariants(tree):
    """Containment, sibling disjointness and reading order of a SegmentTree."""
    page_box = (0, 0, tree.width, tree.height)
    prev_line = None
    for li, line in enumerate(tree.lines):
        assert line.index == li
        assert line.bbox.fits(tree.width, tree.height), page_box
        if prev_line is not None:
            assert prev_line.bbox.y1 <= line.bbox.y
        prev_line = line
        prev_word = None
        for wi, word in enumerate(line.words):
            assert word.index == wi and word.line_index == li
            assert line.bbox.contains(word.bbox)
            if prev_word is not None:
                assert prev_word.bbox.x1 <= word.bbox.x
            prev_word = word
            prev_glyph = None
            for gi, glyph in enumerate(word.glyphs):
                assert glyph.index == gi and glyph.word_index == wi
                assert word.bbox.contains(glyph.bbox)
                if prev_glyph is not None:
                    assert prev_glyph.bbox.x1 <= glyph.bbox.x
                prev_glyph = glyph


def tree_with_counts(lines, words, glyphs, width=1000, height=1000):
    """A flat tree: words spread round-robin over lines, glyphs over words."""
    tree = SegmentTree(width, height)
    for li in range(lines):
        tree.lines.append(LineSegment(BoundingBox(0, li * 100, 900, 90), index=li))
    all_words = []
    for wi in range(words):
        line = tree.lines[wi % lines]
        word = WordSegment(BoundingBox(wi * 15 % 890, line.bbox.y, 10, 90),
                           line_index=line.index, index=len(line.words))
        line.words.append(word)
        all_words.append(word)
    for gi in range(glyphs):
        word = all_words[gi % words]
        word.glyphs.append(GlyphSegment(BoundingBox(word.bbox.x, word.bbox.y, 1, 1),
                                        word_index=word.index, index=len(word.glyphs)))
    return tree


def manifest_with_counts(lines, words, glyphs, width=1000, height=1000):
    tree = tree_with_counts(lines, words, glyphs, width, height)
    m = Manifest(width, height)
    for line in tree.lines:
        m.lines.append(TruthLine(line.bbox, [
            TruthWord(w.bbox, False, [TruthGlyph(g.bbox) for g in w.glyphs])
            for w in line.words]))
    return m
