import itertools
import json

import numpy as np
import pytest

import brushwork.attribution as attr
from brushwork.attribution import (
    TileScore,
    aggregate,
    attribute,
    contribution_map,
    render_heatmap,
    report_to_json,
    score_tiles,
)
from brushwork.errors import (
    EmptyScoresError,
    TileLargerThanImageError,
    TileSizeMismatchError,
)
from brushwork.imageio import ColorImage, to_grayscale
from brushwork.nnet import Architecture, init_model
from brushwork.tiling import extract_tiles, image_entropy, select_salient
from conftest import random_color_image


def make_salient(rng, width=48, height=48, size=16, stride=8, tau=0.0):
    img = random_color_image(rng, width, height)
    grid = extract_tiles(img, size, stride)
    whole = image_entropy(to_grayscale(img))
    return img, select_salient(grid, whole, tau)


def scores_from(values):
    return [TileScore(grid_col=i, grid_row=0, origin_x=8 * i, origin_y=0,
                      entropy=1.0, score=v) for i, v in enumerate(values)]


class TestScoreTiles:
    def test_fresh_model_scores_half(self, rng):
        _, salient = make_salient(rng)
        model = init_model(Architecture(), seed=0, tile_size=16)
        out = score_tiles(model, salient)
        assert len(out) == len(salient.tiles)
        assert all(s.score == 0.5 for s in out)

    def test_tile_size_mismatch(self, rng):
        _, salient = make_salient(rng, size=16)
        model = init_model(Architecture(), seed=0, tile_size=32)
        with pytest.raises(TileSizeMismatchError):
            score_tiles(model, salient)

    def test_grid_order_preserved(self, rng):
        _, salient = make_salient(rng)
        model = init_model(Architecture(), seed=0, tile_size=16)
        out = score_tiles(model, salient)
        assert [(s.grid_col, s.grid_row) for s in out] == \
               [(t.grid_col, t.grid_row) for t in salient.tiles]

    def test_schedule_independent(self, rng, monkeypatch):
        """Scoring in batches of 1 and of 256 must agree bit for bit."""
        _, salient = make_salient(rng)
        model = init_model(Architecture(), seed=1, tile_size=16)
        model.params["fc2_w"] = rng.uniform(-1, 1, size=(1, 64))
        big = score_tiles(model, salient)
        monkeypatch.setattr(attr, "_SCORE_BATCH", 1)
        tiny = score_tiles(model, salient)
        assert [s.score for s in big] == [s.score for s in tiny]


class TestAggregate:
    def test_two_scores(self):
        assert aggregate(scores_from([0.2, 0.8])) == 0.5

    def test_single_score(self):
        assert aggregate(scores_from([0.7])) == 0.7

    def test_permutation_invariance(self, rng):
        values = list(rng.uniform(0.01, 0.99, size=9))
        base = aggregate(scores_from(values))
        for perm in itertools.islice(itertools.permutations(values), 50):
            assert abs(aggregate(scores_from(list(perm))) - base) < 1e-15

    def test_bounded_by_min_max(self, rng):
        values = list(rng.uniform(0.01, 0.99, size=30))
        agg = aggregate(scores_from(values))
        assert min(values) <= agg <= max(values)

    def test_empty_scores(self):
        with pytest.raises(EmptyScoresError):
            aggregate([])


class TestAttribute:
    def test_image_smaller_than_tile(self, rng):
        img = random_color_image(rng, 20, 20)
        model = init_model(Architecture(), seed=0, tile_size=32)
        with pytest.raises(TileLargerThanImageError):
            attribute(model, img)

    def test_tau_zero_keeps_everything(self, rng):
        img = random_color_image(rng, 48, 48)
        model = init_model(Architecture(), seed=0, tile_size=16)
        report = attribute(model, img, tau=0.0)
        assert report.n_tiles_salient == report.n_tiles_total

    def test_report_self_consistent(self, rng):
        img = random_color_image(rng, 64, 48)
        model = init_model(Architecture(), seed=2, tile_size=16)
        model.params["fc2_w"] = rng.uniform(-1, 1, size=(1, 64))
        report = attribute(model, img, tau=0.5, image_path="x.png")
        scores = [s.score for s in report.tile_scores]
        assert report.n_tiles_salient == len(scores)
        assert abs(report.aggregate - np.mean(scores)) < 1e-15
        assert min(scores) <= report.aggregate <= max(scores)
        assert report.verdict == ("POSITIVE" if report.aggregate >= 0.5
                                  else "NEGATIVE")

    def test_verdict_threshold_exactly_half(self):
        assert aggregate(scores_from([0.5])) >= 0.5  # fresh model case
        # verdict logic itself:
        for values, expected in ([[0.5, 0.5], "POSITIVE"],
                                 [[0.49999, 0.5], "NEGATIVE"]):
            agg = aggregate(scores_from(values))
            verdict = "POSITIVE" if agg >= 0.5 else "NEGATIVE"
            assert verdict == expected

    def test_verdict_monotone_in_scores(self, rng):
        """Raising every tile score can never flip POSITIVE to NEGATIVE."""
        for _ in range(20):
            values = list(rng.uniform(0.01, 0.9, size=7))
            lifted = [min(v + rng.uniform(0, 0.09), 0.999) for v in values]
            agg0 = aggregate(scores_from(values))
            agg1 = aggregate(scores_from(lifted))
            if agg0 >= 0.5:
                assert agg1 >= 0.5


class TestContributionMap:
    def test_single_tile_exact_footprint(self):
        cmap = contribution_map(scores_from([0.9]), tile_size=8,
                                width=20, height=12)
        assert cmap.values[0, 0] == 0.9
        assert (cmap.values[:8, :8] == 0.9).all()
        assert (cmap.coverage[:8, :8] == 1).all()
        assert (cmap.coverage[8:, :] == 0).all()
        assert (cmap.coverage[:, 8:] == 0).all()

    def test_overlap_mean(self):
        scores = [TileScore(0, 0, 0, 0, 1.0, 0.2),
                  TileScore(1, 0, 4, 0, 1.0, 0.8)]
        cmap = contribution_map(scores, tile_size=8, width=16, height=8)
        assert (cmap.values[:, 4:8] == 0.5).all()   # overlap: mean of 0.2, 0.8
        assert (cmap.values[:, :4] == 0.2).all()
        assert (cmap.values[:, 8:12] == 0.8).all()

    def test_matches_brute_force_oracle(self, rng):
        """Random geometry vs a per-pixel accumulation loop."""
        size, w, h = 8, 30, 22
        scores = []
        for k in range(12):
            x = int(rng.integers(0, w - size + 1))
            y = int(rng.integers(0, h - size + 1))
            scores.append(TileScore(k, 0, x, y, 1.0, float(rng.uniform(0.01, 0.99))))
        cmap = contribution_map(scores, size, w, h)
        sums = np.zeros((h, w))
        counts = np.zeros((h, w), dtype=int)
        for s in scores:
            for yy in range(s.origin_y, s.origin_y + size):
                for xx in range(s.origin_x, s.origin_x + size):
                    sums[yy, xx] += s.score
                    counts[yy, xx] += 1
        np.testing.assert_array_equal(cmap.coverage, counts)
        defined = counts > 0
        assert np.abs(cmap.values[defined] - sums[defined] / counts[defined]).max() < 1e-12

    def test_non_overlapping_is_paint_by_score(self, rng):
        """Disjoint tiles give an exactly piecewise-constant map."""
        scores = [TileScore(c, r, 8 * c, 8 * r, 1.0,
                            float(rng.uniform(0.01, 0.99)))
                  for r in range(2) for c in range(3)]
        cmap = contribution_map(scores, 8, 24, 16)
        for s in scores:
            block = cmap.values[s.origin_y:s.origin_y + 8,
                                s.origin_x:s.origin_x + 8]
            assert (block == s.score).all()

    def test_empty_scores(self):
        with pytest.raises(EmptyScoresError):
            contribution_map([], 8, 10, 10)


class TestHeatmapAndReport:
    def test_heatmap_rendering_rule(self):
        cmap = contribution_map(scores_from([0.9]), 8, 12, 10)
        gray = render_heatmap(cmap)
        assert gray.pixels.shape == (10, 12)
        assert gray.pixels[0, 0] == round(0.9 * 255)  # 229.5 -> 230 half-up
        assert gray.pixels[9, 11] == 0               # uncovered renders as 0

    def test_half_up_rounding(self):
        cmap = contribution_map(scores_from([0.5]), 4, 4, 4)
        gray = render_heatmap(cmap)
        assert gray.pixels[0, 0] == 128  # 127.5 rounds up

    def test_report_json_schema_and_precision(self, rng):
        img = random_color_image(rng, 48, 48)
        model = init_model(Architecture(), seed=3, tile_size=16)
        model.params["fc2_w"] = rng.uniform(-1, 1, size=(1, 64))
        report = attribute(model, img, tau=0.0, image_path="p.png")
        doc = json.loads(report_to_json(report))
        assert set(doc) == {"image", "tile_size", "stride", "tau",
                            "n_tiles_total", "n_tiles_salient", "aggregate",
                            "verdict", "tiles"}
        assert doc["aggregate"] == report.aggregate  # full float precision
        assert len(doc["tiles"]) == report.n_tiles_salient
        first = doc["tiles"][0]
        assert set(first) == {"col", "row", "x", "y", "entropy", "score"}
        assert doc["verdict"] in ("POSITIVE", "NEGATIVE")
