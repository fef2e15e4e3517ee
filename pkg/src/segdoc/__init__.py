"""Histogram-based line, word and character segmentation of document images."""
from .errors import (BlankImage, DegenerateHistogram, DimensionMismatch, MalformedImage,
                     NoHeaderFound, OutOfBounds, SegdocError, SpecInfeasible)
from .evaluate import accuracy, compare_boxes, report_page
from .raster import BoundingBox, Component, col_profile, crop, invert, label_components, row_profile
from .segment import SegmentParams, SegmentTree, segment_chars, segment_lines, segment_page, segment_words
from .synth import Manifest, PageSpec, generate

__version__ = "0.1.0"
