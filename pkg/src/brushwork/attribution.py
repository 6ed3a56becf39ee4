"""Whole-image attribution from per-tile probabilities.

The salient tiles of a candidate image are scored individually; the
arithmetic mean of the scores is the system's judgment, thresholded at 0.5
into a POSITIVE/NEGATIVE verdict.  Scores back-project onto image
coordinates as a contribution map showing where the classifier is looking.
"""

import json
from dataclasses import dataclass

import numpy as np

from ._util import atomic_write_text, round_half_up
from .errors import EmptyScoresError, TileSizeMismatchError
from .imageio import ColorImage, GrayImage, save_png, to_grayscale
from .nnet import Model, forward_batch, normalize_batch
from .tiling import SalientTileSet, extract_tiles, image_entropy, select_salient

POSITIVE = "POSITIVE"
NEGATIVE = "NEGATIVE"

# Tiles are scored in fixed-size slices to bound peak memory; slicing does
# not affect results (scores are placed by grid index).
_SCORE_BATCH = 256


@dataclass
class TileScore:
    grid_col: int
    grid_row: int
    origin_x: int
    origin_y: int
    entropy: float
    score: float


@dataclass
class AttributionReport:
    image_path: str
    tile_size: int
    stride: int
    tau: float
    n_tiles_total: int
    n_tiles_salient: int
    aggregate: float
    verdict: str                     # POSITIVE iff aggregate >= 0.5
    tile_scores: list[TileScore]


@dataclass
class ContributionMap:
    width: int
    height: int
    values: np.ndarray    # (H, W) float64; mean covering score where defined
    coverage: np.ndarray  # (H, W) int64 count of covering salient tiles


def score_tiles(model: Model, tiles: SalientTileSet) -> list[TileScore]:
    """One probability per salient tile, in grid order.

    The model must have been trained at the tiles' size; a mismatch raises
    rather than resampling to a scale the model never saw.
    """
    if model.meta.tile_size != tiles.tile_size:
        raise TileSizeMismatchError(model.meta.tile_size, tiles.tile_size)
    if not tiles.tiles:
        raise EmptyScoresError("no salient tiles to score")
    resolution = model.arch.input_resolution
    scores: list[TileScore] = []
    for start in range(0, len(tiles.tiles), _SCORE_BATCH):
        chunk = tiles.tiles[start:start + _SCORE_BATCH]
        batch = np.stack([t.color_pixels for t in chunk])
        probs = forward_batch(model, normalize_batch(batch, resolution))
        for tile, p in zip(chunk, probs):
            scores.append(TileScore(
                grid_col=tile.grid_col, grid_row=tile.grid_row,
                origin_x=tile.origin_x, origin_y=tile.origin_y,
                entropy=tile.entropy, score=float(p)))
    return scores


def aggregate(scores: list[TileScore]) -> float:
    """Arithmetic mean of tile scores, summed in grid order."""
    if not scores:
        raise EmptyScoresError("cannot aggregate zero scores")
    total = 0.0
    for s in scores:
        total += s.score
    return total / len(scores)


def attribute(model: Model, img: ColorImage, image_path: str = "",
              tile_size: int | None = None, stride: int | None = None,
              tau: float = 1.0, fallback_top1: bool = False) -> AttributionReport:
    """Full pipeline: tile, gate by entropy, score, average, threshold.

    tile_size defaults to (and must match) the model's training size;
    stride defaults to half of it.  Raises TileLargerThanImageError for
    undersized images and NoSalientTilesError when tau excludes everything
    and the top-1 fallback is off.
    """
    if tile_size is not None and tile_size != model.meta.tile_size:
        raise TileSizeMismatchError(model.meta.tile_size, tile_size)
    tile_size = model.meta.tile_size
    if stride is None:
        stride = max(1, tile_size // 2)
    grid = extract_tiles(img, tile_size, stride)
    whole = image_entropy(to_grayscale(img))
    salient = select_salient(grid, whole, tau, fallback_top1=fallback_top1)
    scores = score_tiles(model, salient)
    agg = aggregate(scores)
    return AttributionReport(
        image_path=image_path,
        tile_size=tile_size,
        stride=stride,
        tau=tau,
        n_tiles_total=len(grid.tiles),
        n_tiles_salient=len(scores),
        aggregate=agg,
        verdict=POSITIVE if agg >= 0.5 else NEGATIVE,
        tile_scores=scores,
    )


def contribution_map(scores: list[TileScore], tile_size: int,
                     width: int, height: int) -> ContributionMap:
    """Per-pixel mean of the scores of all salient tiles covering the pixel.

    Pixels no salient tile covers have coverage 0 and an undefined value
    (stored as 0.0, flagged by the coverage array).
    """
    if not scores:
        raise EmptyScoresError("cannot build a map from zero scores")
    sums = np.zeros((height, width), dtype=np.float64)
    counts = np.zeros((height, width), dtype=np.int64)
    for s in scores:
        sums[s.origin_y:s.origin_y + tile_size,
             s.origin_x:s.origin_x + tile_size] += s.score
        counts[s.origin_y:s.origin_y + tile_size,
               s.origin_x:s.origin_x + tile_size] += 1
    values = np.zeros_like(sums)
    covered = counts > 0
    values[covered] = sums[covered] / counts[covered]
    return ContributionMap(width=width, height=height,
                           values=values, coverage=counts)


def render_heatmap(cmap: ContributionMap) -> GrayImage:
    """8-bit rendering: defined pixels map score -> round(score * 255)
    (half up); uncovered pixels render as 0."""
    out = round_half_up(cmap.values * 255.0)
    out[cmap.coverage == 0] = 0.0
    return GrayImage(pixels=np.clip(out, 0, 255).astype(np.uint8))


def save_heatmap(cmap: ContributionMap, path, uncovered_csv=None) -> None:
    """Write the heatmap PNG; optionally list uncovered pixels as x,y CSV."""
    save_png(render_heatmap(cmap), path)
    if uncovered_csv is not None:
        ys, xs = np.nonzero(cmap.coverage == 0)
        lines = ["x,y"] + [f"{x},{y}" for x, y in zip(xs, ys)]
        atomic_write_text(uncovered_csv, "\n".join(lines) + "\n")


def report_to_json(report: AttributionReport) -> str:
    """Serialize a report with full float precision and stable key order."""
    doc = {
        "image": report.image_path,
        "tile_size": report.tile_size,
        "stride": report.stride,
        "tau": report.tau,
        "n_tiles_total": report.n_tiles_total,
        "n_tiles_salient": report.n_tiles_salient,
        "aggregate": report.aggregate,
        "verdict": report.verdict,
        "tiles": [
            {"col": s.grid_col, "row": s.grid_row, "x": s.origin_x,
             "y": s.origin_y, "entropy": s.entropy, "score": s.score}
            for s in report.tile_scores
        ],
    }
    return json.dumps(doc, indent=2)


def save_report(report: AttributionReport, path) -> None:
    atomic_write_text(path, report_to_json(report) + "\n")
