"""segdoc command line: segment, synth, eval and preprocess subcommands.

Exit codes: 0 ok, 2 unreadable input, 3 malformed image, 4 unwritable
output, 5 infeasible synth spec, 6 schema mismatch.  Failures print one
JSON object per line on stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import serialize
from .errors import DimensionMismatch, MalformedImage, SpecInfeasible
from .evaluate import Rounding, format_table, report_page
from .pipeline import PreprocessOptions, preprocess_page
from .pnm import binary_to_gray, read_image, write_pgm
from .preprocess import Ink, edges, grayscale, thin
from .segment import SegmentParams, SegmentTree, segment_page, walk
from .synth import PageSpec, generate

EXIT_OK = 0
EXIT_UNREADABLE = 2
EXIT_MALFORMED = 3
EXIT_UNWRITABLE = 4
EXIT_INFEASIBLE = 5
EXIT_SCHEMA = 6

EMIT_CHOICES = ("json", "crops", "overlay", "debug")
OUTLINE_VALUE = 128


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str, path: Optional[str] = None):
        super().__init__(message)
        self.code = code
        self.kind = kind
        self.path = path

    def to_json(self) -> str:
        payload = {"error": self.kind, "exit": self.code, "message": str(self)}
        if self.path is not None:
            payload["path"] = self.path
        return json.dumps(payload)


@dataclass
class RunConfig:
    input: Path
    out_dir: Path
    params: SegmentParams = field(default_factory=SegmentParams)
    preprocess: PreprocessOptions = field(default_factory=PreprocessOptions)
    emit: Tuple[str, ...] = ("json",)

    def resolve(self) -> None:
        if not self.input.is_file() or not os.access(self.input, os.R_OK):
            raise CliError(EXIT_UNREADABLE, "unreadable_input", "cannot read input file",
                           str(self.input))
        _ensure_dir(self.out_dir)


def _ensure_dir(path: Path) -> None:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(EXIT_UNWRITABLE, "unwritable_output", exc.strerror or str(exc),
                       str(path)) from None
    if not os.access(path, os.W_OK):
        raise CliError(EXIT_UNWRITABLE, "unwritable_output", "output directory not writable",
                       str(path))


def _write(path: Path, data: bytes | str) -> None:
    try:
        if isinstance(data, str):
            path.write_text(data, encoding="utf-8")
        else:
            path.write_bytes(data)
    except OSError as exc:
        raise CliError(EXIT_UNWRITABLE, "unwritable_output", exc.strerror or str(exc),
                       str(path)) from None


def _write_pgm(path: Path, img: np.ndarray) -> None:
    try:
        write_pgm(path, img)
    except OSError as exc:
        raise CliError(EXIT_UNWRITABLE, "unwritable_output", exc.strerror or str(exc),
                       str(path)) from None


def load_page(path: Path) -> np.ndarray:
    try:
        return read_image(path)
    except MalformedImage as exc:
        raise CliError(EXIT_MALFORMED, "malformed_image", str(exc), str(path)) from None
    except OSError as exc:
        raise CliError(EXIT_UNREADABLE, "unreadable_input", exc.strerror or str(exc),
                       str(path)) from None


def crop_name(path: Tuple[int, ...]) -> str:
    parts = ["line{}", "word{}", "char{}"]
    return "_".join(p.format(i) for p, i in zip(parts, path)) + ".pgm"


def draw_overlay(base: np.ndarray, tree: SegmentTree, value: int = OUTLINE_VALUE) -> np.ndarray:
    """Copy of ``base`` with every segment box outlined along its border pixels."""
    out = base.copy()
    for _, _, seg in walk(tree):
        b = seg.bbox
        out[b.y, b.x:b.x1] = value
        out[b.y1 - 1, b.x:b.x1] = value
        out[b.y:b.y1, b.x] = value
        out[b.y:b.y1, b.x1 - 1] = value
    return out


def cmd_segment(config: RunConfig) -> int:
    config.resolve()
    image = load_page(config.input)
    binary, info = preprocess_page(image, config.preprocess)
    tree = segment_page(binary, config.params, provenance=info)
    out = config.out_dir

    if "json" in config.emit:
        _write(out / "segments.json", serialize.dumps(serialize.tree_to_dict(tree)))
    if "crops" in config.emit:
        for _, path, seg in walk(tree):
            _write_pgm(out / crop_name(path), binary_to_gray(seg.image))
    if "overlay" in config.emit:
        base = grayscale(image) if not info["skew_angle"] else binary_to_gray(binary)
        _write_pgm(out / "overlay.pgm", draw_overlay(base, tree))
    if "debug" in config.emit:
        _write_debug(out, binary)
    return EXIT_OK


def _write_debug(out: Path, binary: np.ndarray) -> None:
    _write_pgm(out / "binary.pgm", binary_to_gray(binary))
    _write_pgm(out / "thinned.pgm", binary_to_gray(thin(binary)))
    _write_pgm(out / "edges.pgm", binary_to_gray(edges(binary)))


def cmd_preprocess(config: RunConfig) -> int:
    config.resolve()
    image = load_page(config.input)
    binary, info = preprocess_page(image, config.preprocess)
    _write_debug(config.out_dir, binary)
    _write(config.out_dir / "preprocess.json", json.dumps(info) + "\n")
    return EXIT_OK


def cmd_synth(spec: PageSpec, out_dir: Path) -> int:
    try:
        page, manifest = generate(spec)
    except SpecInfeasible as exc:
        raise CliError(EXIT_INFEASIBLE, "infeasible_spec", str(exc)) from None
    _ensure_dir(out_dir)
    _write_pgm(out_dir / "page.pgm", binary_to_gray(page))
    _write(out_dir / "manifest.json", serialize.dumps(serialize.manifest_to_dict(manifest)))
    return EXIT_OK


def _load_json(path: Path):
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_UNREADABLE, "unreadable_input", exc.strerror or str(exc),
                       str(path)) from None
    try:
        return json.loads(text)
    except ValueError as exc:
        raise CliError(EXIT_SCHEMA, "schema_mismatch", f"invalid JSON: {exc}",
                       str(path)) from None


def cmd_eval(segments: Path, manifest: Path, out_dir: Optional[Path] = None,
             rounding: Rounding = Rounding.HALF_UP, iou_threshold: float = 0.5,
             stream=None) -> int:
    stream = stream or sys.stdout
    seg_data, man_data = _load_json(segments), _load_json(manifest)
    try:
        tree = serialize.tree_from_dict(seg_data)
        truth = serialize.manifest_from_dict(man_data)
        rows = report_page(tree, truth, iou_threshold)
    except (serialize.SchemaError, DimensionMismatch) as exc:
        raise CliError(EXIT_SCHEMA, "schema_mismatch", str(exc)) from None
    print(format_table([level for level, _ in rows], rounding), file=stream)
    out_dir = out_dir if out_dir is not None else segments.parent
    _ensure_dir(out_dir)
    _write(out_dir / "report.json", serialize.dumps(serialize.report_to_dict(rows, rounding)))
    return EXIT_OK


def _emit_list(text: str) -> Tuple[str, ...]:
    items = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [s for s in items if s not in EMIT_CHOICES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown emit target(s) {bad}; "
                                         f"choose from {', '.join(EMIT_CHOICES)}")
    return items


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="segdoc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def page_options(p: argparse.ArgumentParser) -> None:
        p.add_argument("--input", "-i", type=Path, nargs="+", required=True)
        p.add_argument("--out-dir", "-o", type=Path, default=Path("."))
        p.add_argument("--no-deskew", action="store_true")
        p.add_argument("--min-area", type=_non_negative, default=4,
                       help="drop ink components smaller than this many pixels")
        p.add_argument("--ink", choices=[i.value for i in Ink], default=Ink.DARK.value)
        p.add_argument("--jobs", "-j", type=int, default=1)

    seg = sub.add_parser("segment", help="segment pages into lines, words and characters")
    page_options(seg)
    seg.add_argument("--row-noise", type=_non_negative, default=0)
    seg.add_argument("--col-noise", type=_non_negative, default=0)
    seg.add_argument("--min-gap-rows", type=_non_negative, default=1)
    seg.add_argument("--min-word-gap", type=_non_negative, default=1)
    seg.add_argument("--char-max", type=int, default=1,
                     help="max skeleton pixels in a character separator column")
    seg.add_argument("--emit", type=_emit_list, default=("json",),
                     help="comma list of json,crops,overlay,debug")

    pre = sub.add_parser("preprocess", help="write binarized, thinned and edge images")
    page_options(pre)

    syn = sub.add_parser("synth", help="generate a synthetic page with ground truth")
    syn.add_argument("--out-dir", "-o", type=Path, default=Path("."))
    syn.add_argument("--spec", type=Path, help="JSON file with page spec fields")
    syn.add_argument("--seed", type=int)
    syn.add_argument("--width", type=int)
    syn.add_argument("--height", type=int)
    syn.add_argument("--lines", type=int, dest="line_count")
    syn.add_argument("--skew", type=float, dest="skew_angle")
    syn.add_argument("--specks", type=int, dest="noise_speck_count")
    syn.add_argument("--digit-prob", type=float, dest="digit_word_probability")
    syn.add_argument("--bar-prob", type=float, dest="detached_bar_probability")

    ev = sub.add_parser("eval", help="score segments.json against manifest.json")
    ev.add_argument("segments", type=Path)
    ev.add_argument("manifest", type=Path)
    ev.add_argument("--out-dir", "-o", type=Path)
    ev.add_argument("--rounding", choices=[r.value for r in Rounding],
                    default=Rounding.HALF_UP.value)
    ev.add_argument("--iou", type=float, default=0.5)
    return parser


def _run_one(args: Tuple[str, RunConfig]) -> Tuple[int, Optional[str]]:
    command, config = args
    try:
        handler = cmd_segment if command == "segment" else cmd_preprocess
        return handler(config), None
    except CliError as exc:
        return exc.code, exc.to_json()


def _page_configs(ns: argparse.Namespace, params: SegmentParams) -> List[RunConfig]:
    opts = PreprocessOptions(deskew=not ns.no_deskew, min_area=ns.min_area, ink=Ink(ns.ink))
    emit = getattr(ns, "emit", ("json",))
    many = len(ns.input) > 1
    return [RunConfig(path, ns.out_dir / path.stem if many else ns.out_dir, params, opts, emit)
            for path in ns.input]


def _synth_spec(ns: argparse.Namespace) -> PageSpec:
    data = {}
    if ns.spec is not None:
        loaded = _load_json(ns.spec)
        if not isinstance(loaded, dict):
            raise CliError(EXIT_INFEASIBLE, "infeasible_spec", "spec file must hold an object")
        data.update(loaded)
    for key in ("seed", "width", "height", "line_count", "skew_angle", "noise_speck_count",
                "digit_word_probability", "detached_bar_probability"):
        value = getattr(ns, key)
        if value is not None:
            data[key] = value
    try:
        return PageSpec.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise CliError(EXIT_INFEASIBLE, "infeasible_spec", str(exc)) from None


def main(argv: Optional[Sequence[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        if ns.command in ("segment", "preprocess"):
            params = SegmentParams()
            if ns.command == "segment":
                try:
                    params = SegmentParams(ns.row_noise, ns.col_noise, ns.min_gap_rows,
                                           ns.min_word_gap, ns.char_max)
                except ValueError as exc:
                    build_parser().error(str(exc))
            jobs = [(ns.command, c) for c in _page_configs(ns, params)]
            if ns.jobs > 1 and len(jobs) > 1:
                with ProcessPoolExecutor(max_workers=ns.jobs) as pool:
                    results = list(pool.map(_run_one, jobs))
            else:
                results = [_run_one(j) for j in jobs]
            for _, err in results:
                if err:
                    print(err, file=sys.stderr)
            return max(code for code, _ in results)
        if ns.command == "synth":
            return cmd_synth(_synth_spec(ns), ns.out_dir)
        return cmd_eval(ns.segments, ns.manifest, ns.out_dir, Rounding(ns.rounding), ns.iou)
    except CliError as exc:
        print(exc.to_json(), file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
