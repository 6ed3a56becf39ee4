"""Synthetic two-class painting corpus with a scale-controlled signature.

Each image is a field of oriented stroke marks on a lightly textured
ground.  Stroke layouts, grounds, and paint orders are drawn from the same
distribution for both classes, so composition, counts, coverage, and luma
histograms carry no class information; the only class difference is the
grain of the paint inside the strokes:

    positive: fine grain  (tone blocks of g pixels)
    negative: coarse grain (tone blocks of 2g pixels)

with g derived from the requested signal scale.  Tiles at or near the
stroke scale resolve the grain easily once resampled to the classifier's
input resolution.  Tiles several times larger get downsampled past the
grain's Nyquist limit, and the strong class-free ink jitter plus the
ground texture drown the faint statistical residue that survives, so a
model trained on them cannot beat a coin flip.

Generation is fully seeded: the same spec reproduces bit-identical PNGs.
"""

import os
from dataclasses import dataclass

import numpy as np

from .errors import BrushworkError
from .imageio import (
    NEGATIVE,
    POSITIVE,
    DatasetManifest,
    GrayImage,
    ManifestEntry,
    save_manifest,
    save_png,
)

# Palette: two close ground tones and two ink tones mixed 50/50 inside
# strokes, plus per-pixel ink jitter drawn from the same law for both
# classes.  Calibration matters here: a classifier at the signal scale
# averages the jitter away inside each grain block, while one looking at
# much larger (hence downsampled) tiles must find the grain's faint
# sub-Nyquist residue under the class-free jitter and ground variance,
# which keeps it at chance within its training budget.
GROUND_TONES = np.array([203, 213], dtype=np.uint8)
INK_TONES = np.array([80, 136], dtype=np.uint8)
INK_JITTER = 48

# One stroke per layout cell; the factor sets cell side relative to
# signal_scale and thereby the ink coverage (bigger factor -> sparser).
_CELL_FACTOR = 1.8


@dataclass
class SynthSpec:
    canvas: int = 512
    count_per_class: int = 8
    signal_scale: int = 64
    seed: int = 0

    def validate(self) -> None:
        if self.signal_scale < 8:
            raise ValueError(
                f"signal_scale must be >= 8, got {self.signal_scale}")
        if self.canvas < 4 * self.signal_scale:
            raise ValueError(
                f"canvas {self.canvas} must be at least 4x signal_scale "
                f"({4 * self.signal_scale})")
        if self.count_per_class < 2:
            raise ValueError(
                f"count_per_class must be >= 2, got {self.count_per_class}")

    @property
    def stroke_width(self) -> int:
        return max(2, self.signal_scale // 4)

    @property
    def fine_grain(self) -> int:
        return max(1, self.signal_scale // 32)


@dataclass
class _Stroke:
    x0: float
    y0: float
    x1: float
    y1: float
    width: float


def _layout_strokes(spec: SynthSpec, rng: np.random.Generator) -> list[_Stroke]:
    """Jittered one-stroke-per-cell layout with uniform random orientation."""
    cell = max(1, int(round(spec.signal_scale * _CELL_FACTOR)))
    n_cells = spec.canvas // cell
    strokes = []
    for cy in range(n_cells):
        for cx in range(n_cells):
            centre_x = (cx + rng.uniform(0.2, 0.8)) * cell
            centre_y = (cy + rng.uniform(0.2, 0.8)) * cell
            theta = rng.uniform(0.0, np.pi)
            length = spec.signal_scale * rng.uniform(0.75, 1.25)
            dx = 0.5 * length * np.cos(theta)
            dy = 0.5 * length * np.sin(theta)
            strokes.append(_Stroke(centre_x - dx, centre_y - dy,
                                   centre_x + dx, centre_y + dy,
                                   spec.stroke_width))
    return strokes


def _stroke_mask(stroke: _Stroke, canvas: int):
    """Capsule rasterization: pixels within width/2 of the segment.

    Returns (x_lo, y_lo, mask) where mask covers the stroke's clipped
    bounding box.
    """
    half = stroke.width / 2.0
    x_lo = max(0, int(np.floor(min(stroke.x0, stroke.x1) - half - 1)))
    x_hi = min(canvas, int(np.ceil(max(stroke.x0, stroke.x1) + half + 2)))
    y_lo = max(0, int(np.floor(min(stroke.y0, stroke.y1) - half - 1)))
    y_hi = min(canvas, int(np.ceil(max(stroke.y0, stroke.y1) + half + 2)))
    if x_lo >= x_hi or y_lo >= y_hi:
        return x_lo, y_lo, np.zeros((0, 0), dtype=bool)
    xs = np.arange(x_lo, x_hi, dtype=np.float64) + 0.5
    ys = np.arange(y_lo, y_hi, dtype=np.float64) + 0.5
    px = np.broadcast_to(xs[np.newaxis, :], (ys.size, xs.size))
    py = np.broadcast_to(ys[:, np.newaxis], (ys.size, xs.size))
    vx, vy = stroke.x1 - stroke.x0, stroke.y1 - stroke.y0
    seg_len2 = vx * vx + vy * vy
    if seg_len2 == 0:
        t = np.zeros_like(px)
    else:
        t = np.clip(((px - stroke.x0) * vx + (py - stroke.y0) * vy) / seg_len2,
                    0.0, 1.0)
    dist2 = (px - (stroke.x0 + t * vx)) ** 2 + (py - (stroke.y0 + t * vy)) ** 2
    return x_lo, y_lo, dist2 <= half * half


def _paint(spec: SynthSpec, strokes: list[_Stroke], grain: int,
           ground: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Render strokes onto the textured ground with block-grain ink.

    Grain is sampled per stroke on a block lattice with a random phase, so
    block boundaries never align image-wide.  Later strokes paint over
    earlier ones; the paint order is the layout order.
    """
    img = ground.copy()
    for stroke in strokes:
        x_lo, y_lo, mask = _stroke_mask(stroke, spec.canvas)
        phase_x = int(rng.integers(0, grain))
        phase_y = int(rng.integers(0, grain))
        h, w = mask.shape
        if h == 0 or w == 0:
            continue
        # Block index of each bbox pixel, shifted to start at zero.
        col_idx = (np.arange(x_lo, x_lo + w) + phase_x) // grain
        row_idx = (np.arange(y_lo, y_lo + h) + phase_y) // grain
        col_idx -= col_idx[0]
        row_idx -= row_idx[0]
        bits = rng.integers(0, 2, size=(row_idx[-1] + 1, col_idx[-1] + 1))
        values = INK_TONES[bits][np.ix_(row_idx, col_idx)].astype(np.int16)
        values += rng.integers(-INK_JITTER, INK_JITTER + 1, size=values.shape,
                               dtype=np.int16)
        region = img[y_lo:y_lo + h, x_lo:x_lo + w]
        region[mask] = np.clip(values, 0, 255).astype(np.uint8)[mask]
    return img


def _render_image(spec: SynthSpec, index: int, class_tag: int,
                  grain: int) -> np.ndarray:
    """One image: its own layout, ground, paint order, and grain values,
    all drawn from streams keyed by (corpus seed, image index, class).
    Both classes use the same layout distribution, so composition carries
    zero class information; only the grain block size differs."""
    layout_rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence([spec.seed, index, class_tag, 0])))
    strokes = _layout_strokes(spec, layout_rng)
    order = layout_rng.permutation(len(strokes))  # overlap winners random
    ground = GROUND_TONES[layout_rng.integers(
        0, 2, size=(spec.canvas, spec.canvas))]
    ink_rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence([spec.seed, index, class_tag, 1])))
    return _paint(spec, [strokes[i] for i in order], grain, ground, ink_rng)


def render_pair(spec: SynthSpec, index: int) -> tuple[np.ndarray, np.ndarray]:
    """The index-th (positive, negative) image pair: fine ink grain for the
    positive class, doubled grain for the negative."""
    fine = _render_image(spec, index, 0, spec.fine_grain)
    coarse = _render_image(spec, index, 1, 2 * spec.fine_grain)
    return fine, coarse


def gen_synth(spec: SynthSpec, out_dir) -> DatasetManifest:
    """Write the corpus (PNGs + manifest.csv) under out_dir.

    Deterministic per spec + seed; rerunning produces bit-identical files.
    Returns the manifest (paths relative to out_dir).
    """
    spec.validate()
    out_dir = os.fspath(out_dir)
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise BrushworkError(f"cannot create corpus directory {out_dir}: {exc}")
    entries: list[ManifestEntry] = []
    for i in range(spec.count_per_class):
        fine, coarse = render_pair(spec, i)
        for arr, tag, label in ((fine, "a", POSITIVE), (coarse, "b", NEGATIVE)):
            name = f"{tag}_{i:03d}.png"
            save_png(GrayImage(pixels=arr), os.path.join(out_dir, name))
            entries.append(ManifestEntry(path=name, label=label))
    manifest = DatasetManifest(entries=entries, root=out_dir)
    save_manifest(manifest, os.path.join(out_dir, "manifest.csv"))
    return manifest


def class_luma_histograms(spec: SynthSpec) -> tuple[np.ndarray, np.ndarray]:
    """Aggregated 256-bin luma distributions (positive, negative) for a
    corpus rendered in memory; used to verify the histogram-match property."""
    pos = np.zeros(256, dtype=np.int64)
    neg = np.zeros(256, dtype=np.int64)
    for i in range(spec.count_per_class):
        fine, coarse = render_pair(spec, i)
        pos += np.bincount(fine.ravel(), minlength=256)
        neg += np.bincount(coarse.ravel(), minlength=256)
    return pos / pos.sum(), neg / neg.sum()
