"""JSON forms of segmentation trees, manifests and reports.

Trees and manifests share one layout::

    {"page": {"w": int, "h": int}, "params": {...},
     "lines": [{"bbox": [x, y, w, h],
                "words": [{"bbox": [...], "glyphs": [{"bbox": [...]}]}]}]}

Keys are emitted in a fixed order and bboxes are always page coordinates,
so serializing the same object twice yields identical bytes.
"""
from __future__ import annotations

import json
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from .evaluate import BoxMatchReport, LevelReport, Rounding
from .raster import BoundingBox, crop
from .segment import GlyphSegment, LineSegment, SegmentParams, SegmentTree, WordSegment
from .synth import Manifest, TruthGlyph, TruthLine, TruthWord


class SchemaError(ValueError):
    pass


def dumps(obj: Dict[str, Any]) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n"


def _box(values: Any, where: str) -> BoundingBox:
    if not isinstance(values, list) or len(values) != 4 or not all(
            isinstance(v, int) and not isinstance(v, bool) for v in values):
        raise SchemaError(f"{where}: bbox must be a list of four integers")
    try:
        return BoundingBox.from_list(values)
    except ValueError as exc:
        raise SchemaError(f"{where}: {exc}") from None


def _list(node: Dict[str, Any], key: str, where: str) -> list:
    value = node.get(key)
    if not isinstance(value, list):
        raise SchemaError(f"{where}: '{key}' must be a list")
    if not all(isinstance(v, dict) for v in value):
        raise SchemaError(f"{where}: '{key}' entries must be objects")
    return value


def _page(data: Any) -> Tuple[int, int]:
    if not isinstance(data, dict) or not isinstance(data.get("page"), dict):
        raise SchemaError("missing 'page' object")
    w, h = data["page"].get("w"), data["page"].get("h")
    if not (isinstance(w, int) and isinstance(h, int)) or w < 1 or h < 1:
        raise SchemaError("'page' needs positive integer 'w' and 'h'")
    return w, h


def tree_to_dict(tree: SegmentTree) -> Dict[str, Any]:
    params: Dict[str, Any] = tree.params.to_dict()
    if tree.provenance:
        params["preprocess"] = tree.provenance
    return {
        "page": {"w": tree.width, "h": tree.height},
        "params": params,
        "lines": [
            {"bbox": line.bbox.as_list(),
             "words": [{"bbox": word.bbox.as_list(),
                        "glyphs": [{"bbox": g.bbox.as_list()} for g in word.glyphs]}
                       for word in line.words]}
            for line in tree.lines
        ],
    }


def tree_from_dict(data: Any, page: Optional[np.ndarray] = None) -> SegmentTree:
    """Rebuild a tree; with ``page`` given the crops are cut again from it."""
    width, height = _page(data)
    raw = dict(data.get("params") or {})
    provenance = raw.pop("preprocess", {})
    try:
        params = SegmentParams(**raw)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"bad params: {exc}") from None

    def cut(box: BoundingBox):
        return None if page is None else crop(page, box)

    lines = []
    for li, ln in enumerate(_list(data, "lines", "root")):
        where = f"lines[{li}]"
        line = LineSegment(_box(ln.get("bbox"), where), None, li)
        line.image = cut(line.bbox)
        for wi, wd in enumerate(_list(ln, "words", where)):
            wwhere = f"{where}.words[{wi}]"
            word = WordSegment(_box(wd.get("bbox"), wwhere), cut(_box(wd.get("bbox"), wwhere)),
                               li, wi)
            for gi, gd in enumerate(_list(wd, "glyphs", wwhere)):
                gbox = _box(gd.get("bbox"), f"{wwhere}.glyphs[{gi}]")
                word.glyphs.append(GlyphSegment(gbox, cut(gbox), wi, gi))
            line.words.append(word)
        lines.append(line)
    return SegmentTree(width, height, lines, params, provenance)


def manifest_to_dict(m: Manifest) -> Dict[str, Any]:
    return {
        "page": {"w": m.width, "h": m.height},
        "params": {"seed": m.seed},
        "skew_angle": m.skew_angle,
        "specks": [list(p) for p in m.specks],
        "lines": [
            {"bbox": line.bbox.as_list(),
             "words": [{"bbox": w.bbox.as_list(), "digit": w.digit,
                        "glyphs": [{"bbox": g.bbox.as_list(), "detached_bar": g.detached_bar}
                                   for g in w.glyphs]}
                       for w in line.words]}
            for line in m.lines
        ],
    }


def manifest_from_dict(data: Any) -> Manifest:
    width, height = _page(data)
    skew = data.get("skew_angle", 0.0)
    if not isinstance(skew, (int, float)) or isinstance(skew, bool):
        raise SchemaError("'skew_angle' must be a number")
    lines = []
    for li, ln in enumerate(_list(data, "lines", "root")):
        where = f"lines[{li}]"
        words = []
        for wi, wd in enumerate(_list(ln, "words", where)):
            wwhere = f"{where}.words[{wi}]"
            glyphs = [TruthGlyph(_box(g.get("bbox"), f"{wwhere}.glyphs[{gi}]"),
                                 bool(g.get("detached_bar", False)))
                      for gi, g in enumerate(_list(wd, "glyphs", wwhere))]
            words.append(TruthWord(_box(wd.get("bbox"), wwhere), bool(wd.get("digit", False)),
                                   glyphs))
        lines.append(TruthLine(_box(ln.get("bbox"), where), words))
    specks = [tuple(p) for p in data.get("specks", [])]
    seed = (data.get("params") or {}).get("seed")
    return Manifest(width, height, lines, skew, specks, seed)


def report_to_dict(rows: Sequence[Tuple[LevelReport, BoxMatchReport]],
                   rounding: Rounding = Rounding.HALF_UP) -> Dict[str, Any]:
    out = []
    for level, boxes in rows:
        acc = level.accuracy_percent
        out.append({
            "level": level.level.value,
            "present": level.present,
            "recognized": level.recognized,
            "accuracy": float(acc),
            "accuracy_exact": [acc.numerator, acc.denominator],
            "accuracy_display": level.display(rounding),
            "boxes": {"matched": boxes.matched,
                      "over_segmented": boxes.over_segmented,
                      "under_segmented": boxes.under_segmented,
                      "iou_threshold": boxes.iou_threshold},
        })
    return {"rounding": Rounding(rounding).value, "levels": out}
