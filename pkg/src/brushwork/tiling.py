"""Square tiling on a regular stride with per-tile Shannon entropy gating.

A large image is cut into equally sized square tiles; each tile carries a
256-bin luma-histogram entropy.  Tiles whose entropy reaches a fraction tau
of the whole image's entropy are "salient": busy enough to stand in for the
full work.  Trailing margins narrower than the tile are dropped, never padded,
so no synthetic content enters entropy or scores.
"""

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInputError, NoSalientTilesError, TileLargerThanImageError
from .imageio import ColorImage, GrayImage, to_grayscale


@dataclass
class Tile:
    origin_x: int
    origin_y: int
    size: int
    color_pixels: np.ndarray   # (size, size, 3) uint8 view of the source
    luma_pixels: np.ndarray    # (size, size) uint8
    entropy: float             # bits, in [0, 8]
    grid_col: int
    grid_row: int


@dataclass
class TileGrid:
    tiles: list[Tile]          # row-major grid order
    tile_size: int
    stride: int
    grid_cols: int
    grid_rows: int

    def __len__(self) -> int:
        return len(self.tiles)


@dataclass
class SalientTileSet:
    tiles: list[Tile]          # subset of a grid, grid order preserved
    tile_size: int
    threshold_ratio: float     # tau
    image_entropy: float       # bits

    def __len__(self) -> int:
        return len(self.tiles)


def shannon_entropy(luma_values) -> float:
    """Entropy in bits of the 256-bin histogram of 8-bit values.

    H = -sum(p_i * log2(p_i)) over occupied bins; 0 for a constant input,
    at most 8 for a uniform spread over all 256 levels.
    """
    values = np.asarray(luma_values, dtype=np.uint8).ravel()
    if values.size == 0:
        raise EmptyInputError("entropy of an empty collection is undefined")
    counts = np.bincount(values, minlength=256)
    p = counts[counts > 0] / values.size
    # Summing in sorted order makes the result depend only on the histogram
    # multiset, so gray-level permutations leave it bit-identical.
    p.sort()
    return float(-(p * np.log2(p)).sum() + 0.0)  # +0.0 normalizes -0.0


def image_entropy(img: GrayImage) -> float:
    """Whole-image entropy: shannon_entropy over the full luma buffer."""
    return shannon_entropy(img.pixels)


def extract_tiles(img: ColorImage, tile_size: int, stride: int) -> TileGrid:
    """Cut img into square tiles at origins (col*stride, row*stride).

    Grid extents follow floor((dim - tile_size) / stride) + 1 per axis;
    any right/bottom margin narrower than tile_size is dropped.  Each tile
    gets a luma copy and its entropy.
    """
    if tile_size < 1:
        raise ValueError(f"tile_size must be >= 1, got {tile_size}")
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    if tile_size > img.width or tile_size > img.height:
        raise TileLargerThanImageError(tile_size, img.width, img.height)

    gray = to_grayscale(img)
    grid_cols = (img.width - tile_size) // stride + 1
    grid_rows = (img.height - tile_size) // stride + 1

    tiles: list[Tile] = []
    for row in range(grid_rows):
        y = row * stride
        for col in range(grid_cols):
            x = col * stride
            luma = gray.pixels[y:y + tile_size, x:x + tile_size]
            tiles.append(Tile(
                origin_x=x,
                origin_y=y,
                size=tile_size,
                color_pixels=img.pixels[y:y + tile_size, x:x + tile_size],
                luma_pixels=luma,
                entropy=shannon_entropy(luma),
                grid_col=col,
                grid_row=row,
            ))
    return TileGrid(tiles=tiles, tile_size=tile_size, stride=stride,
                    grid_cols=grid_cols, grid_rows=grid_rows)


def select_salient(grid: TileGrid, img_entropy: float, tau: float,
                   fallback_top1: bool = False) -> SalientTileSet:
    """Keep tiles with entropy >= tau * img_entropy, in grid order.

    The comparison is >= on purpose: a zero-entropy image keeps its
    zero-entropy tiles.  If nothing qualifies, either return the single
    highest-entropy tile (fallback_top1, ties to the lowest grid index)
    or raise NoSalientTilesError.
    """
    if not grid.tiles:
        raise EmptyInputError("cannot select from an empty tile grid")
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")

    threshold = tau * img_entropy
    kept = [t for t in grid.tiles if t.entropy >= threshold]
    if not kept:
        if fallback_top1:
            best = max(grid.tiles, key=lambda t: t.entropy)  # first max wins
            kept = [best]
        else:
            max_entropy = max(t.entropy for t in grid.tiles)
            raise NoSalientTilesError(tau, max_entropy)
    return SalientTileSet(tiles=kept, tile_size=grid.tile_size,
                          threshold_ratio=tau, image_entropy=img_entropy)
