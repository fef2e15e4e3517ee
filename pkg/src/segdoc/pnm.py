"""PGM (P2/P5) reading and writing, plus PNG input through Pillow."""
from __future__ import annotations

import io
import os
import re
from typing import Tuple, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import MalformedImage
from .raster import as_gray

PathLike = Union[str, os.PathLike]

_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _header(buf: bytes) -> Tuple[bytes, int, int, int, int]:
    """Parse magic, width, height and maxval; returns them plus the data offset."""
    values = []
    pos = 0
    for _ in range(4):
        m = _TOKEN.match(buf, pos)
        if m is None:
            raise MalformedImage("truncated PGM header")
        values.append(m.group(1))
        pos = m.end()
    magic = values[0]
    try:
        width, height, maxval = (int(v) for v in values[1:])
    except ValueError:
        raise MalformedImage("non-numeric PGM header field") from None
    if width < 1 or height < 1:
        raise MalformedImage(f"bad PGM size {width}x{height}")
    if not 1 <= maxval <= 255:
        raise MalformedImage(f"unsupported PGM maxval {maxval}")
    return magic, width, height, maxval, pos


def decode_pgm(buf: bytes) -> np.ndarray:
    if buf[:2] not in (b"P2", b"P5"):
        raise MalformedImage("not a PGM file")
    magic, width, height, maxval, pos = _header(buf)
    n = width * height
    if magic == b"P5":
        # exactly one whitespace byte separates the header from the raster
        data = np.frombuffer(buf, dtype=np.uint8, count=-1, offset=pos + 1)
        if data.size < n:
            raise MalformedImage(f"P5 raster has {data.size} of {n} bytes")
        pixels = data[:n]
    else:
        body = re.sub(rb"#[^\n]*", b" ", buf[pos:])
        try:
            pixels = np.array(body.split(), dtype=np.int64)
        except ValueError:
            raise MalformedImage("non-numeric P2 sample") from None
        if pixels.size != n:
            raise MalformedImage(f"P2 raster has {pixels.size} of {n} samples")
    if pixels.size and (int(pixels.min()) < 0 or int(pixels.max()) > maxval):
        raise MalformedImage("sample exceeds maxval")
    if maxval != 255:
        pixels = (pixels.astype(np.int64) * 255 + maxval // 2) // maxval
    return pixels.astype(np.uint8).reshape(height, width)


def encode_pgm(img: np.ndarray, binary: bool = True) -> bytes:
    img = as_gray(img)
    h, w = img.shape
    header = f"{'P5' if binary else 'P2'}\n{w} {h}\n255\n".encode("ascii")
    if binary:
        return header + img.tobytes()
    lines = []
    for row in img:
        text = " ".join(str(v) for v in row.tolist())
        # plain PGM caps lines at 70 characters
        while len(text) > 70:
            cut = text.rfind(" ", 0, 71)
            lines.append(text[:cut])
            text = text[cut + 1:]
        lines.append(text)
    return header + ("\n".join(lines) + "\n").encode("ascii")


def write_pgm(path: PathLike, img: np.ndarray, binary: bool = True) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_pgm(img, binary))


def read_image(path: PathLike) -> np.ndarray:
    """Load a PGM or PNG file as an (h, w) uint8 gray array, or an (h, w, 3)
    RGB array for color PNGs.

    Missing or unreadable files raise OSError; undecodable content raises
    MalformedImage.
    """
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:2] in (b"P2", b"P5"):
        return decode_pgm(buf)
    try:
        with Image.open(io.BytesIO(buf)) as im:
            im.load()
            if im.mode in ("L", "1", "I;16", "I"):
                return np.asarray(im.convert("L"), dtype=np.uint8)
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise MalformedImage(f"cannot decode {os.fspath(path)}: {exc}") from None


def binary_to_gray(img: np.ndarray) -> np.ndarray:
    """Render ink (1) black on a white page."""
    return np.where(np.asarray(img) > 0, 0, 255).astype(np.uint8)
