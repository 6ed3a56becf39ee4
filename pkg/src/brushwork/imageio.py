"""Image decoding, grayscale conversion, and dataset manifests.

Images are carried as 8-bit numpy arrays: ColorImage wraps an (H, W, 3)
RGB array, GrayImage an (H, W) luma array.  Only PNG and JPEG are accepted;
grayscale sources are expanded to RGB by channel replication so the rest of
the pipeline sees one pixel layout.
"""

import csv
import io
import os
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, UnidentifiedImageError

from ._util import atomic_write_bytes, round_half_up
from .errors import (
    CorruptImageError,
    DuplicatePathError,
    MalformedRowError,
    UnknownLabelError,
    UnsupportedFormatError,
)

SUPPORTED_FORMATS = ("PNG", "JPEG")

POSITIVE = "positive"
NEGATIVE = "negative"

# BT.601 luma weights, applied with round-half-up.
_LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114], dtype=np.float64)


@dataclass
class ColorImage:
    """Decoded RGB raster; pixels is (height, width, 3) uint8, row-major."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.dtype != np.uint8 or px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"ColorImage needs (H, W, 3) uint8, got "
                             f"{px.shape} {px.dtype}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image dimensions must be >= 1")
        self.pixels = px

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass
class GrayImage:
    """Single-channel 8-bit raster; pixels is (height, width) uint8."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.dtype != np.uint8 or px.ndim != 2:
            raise ValueError(f"GrayImage needs (H, W) uint8, got "
                             f"{px.shape} {px.dtype}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image dimensions must be >= 1")
        self.pixels = px

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass
class ManifestEntry:
    path: str          # as written in the manifest file
    label: str         # POSITIVE or NEGATIVE


@dataclass
class DatasetManifest:
    """Ordered (path, label) entries plus the directory they resolve against."""

    entries: list[ManifestEntry]
    root: str = "."

    def resolve(self, entry: ManifestEntry) -> str:
        """Absolute-ish path for an entry: relative paths hang off the
        manifest's own directory so a corpus directory is relocatable."""
        if os.path.isabs(entry.path):
            return entry.path
        return os.path.join(self.root, entry.path)

    def by_label(self, label: str) -> list[ManifestEntry]:
        return [e for e in self.entries if e.label == label]


def load_image(path) -> ColorImage:
    """Decode a PNG or JPEG file into a ColorImage.

    Grayscale sources are replicated across R, G, B.  Raises
    FileNotFoundError, UnsupportedFormatError, or CorruptImageError,
    each naming the offending path.
    """
    path = os.fspath(path)
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such image file: {path}")
    try:
        with Image.open(path) as img:
            fmt = img.format
            if fmt not in SUPPORTED_FORMATS:
                raise UnsupportedFormatError(path, detail=str(fmt))
            if img.mode == "RGB":
                arr = np.asarray(img, dtype=np.uint8)
            elif img.mode == "L":
                luma = np.asarray(img, dtype=np.uint8)
                arr = np.repeat(luma[:, :, np.newaxis], 3, axis=2)
            else:
                # palettes, RGBA, 16-bit grays: normalize through Pillow
                arr = np.asarray(img.convert("RGB"), dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise UnsupportedFormatError(path, detail=str(exc)) from exc
    except (OSError, SyntaxError, ValueError) as exc:
        raise CorruptImageError(path, detail=str(exc)) from exc
    return ColorImage(pixels=arr)


def save_png(img, path) -> None:
    """Write a ColorImage or GrayImage as PNG (atomic rename on success)."""
    arr = img.pixels
    mode = "RGB" if arr.ndim == 3 else "L"
    pil = Image.fromarray(arr, mode=mode)
    buf = io.BytesIO()
    pil.save(buf, format="PNG")
    atomic_write_bytes(path, buf.getvalue())


def to_grayscale(img: ColorImage) -> GrayImage:
    """BT.601 luma: round-half-up(0.299 R + 0.587 G + 0.114 B), clamped."""
    luma = img.pixels.astype(np.float64) @ _LUMA_WEIGHTS
    luma = np.clip(round_half_up(luma), 0, 255)
    return GrayImage(pixels=luma.astype(np.uint8))


def load_manifest(path) -> DatasetManifest:
    """Parse a `path,label` CSV into a DatasetManifest, preserving row order.

    Labels are case-insensitive positive/negative.  Duplicate paths and
    unknown labels are rejected with the offending value.
    """
    path = os.fspath(path)
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such manifest file: {path}")
    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            if line_no == 1:
                if [c.strip().lower() for c in row] != ["path", "label"]:
                    raise MalformedRowError(line_no, ",".join(row))
                continue
            if not row or (len(row) == 1 and not row[0].strip()):
                continue  # blank line
            if len(row) != 2:
                raise MalformedRowError(line_no, ",".join(row))
            img_path, raw_label = row[0].strip(), row[1].strip()
            if not img_path:
                raise MalformedRowError(line_no, ",".join(row))
            label = raw_label.lower()
            if label not in (POSITIVE, NEGATIVE):
                raise UnknownLabelError(raw_label, line_no)
            if img_path in seen:
                raise DuplicatePathError(img_path)
            seen.add(img_path)
            entries.append(ManifestEntry(path=img_path, label=label))
    return DatasetManifest(entries=entries, root=os.path.dirname(path) or ".")


def save_manifest(manifest: DatasetManifest, path) -> None:
    """Write a manifest back out in the `path,label` CSV format."""
    lines = ["path,label"]
    lines += [f"{e.path},{e.label}" for e in manifest.entries]
    atomic_write_bytes(path, ("\n".join(lines) + "\n").encode("utf-8"))
