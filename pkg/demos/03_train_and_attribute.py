#!/usr/bin/env python3
"""Train the tile classifier and attribute held-out images.

The pipeline: every training image is tiled, entropy-gated, and its
salient tiles (labeled by their source image) train a small convolutional
network.  To judge a new image, its salient tiles are scored and the mean
score is the verdict; a contribution heatmap shows which regions drove it.

This demo trains briefly on a small corpus, so expect a solid but not
perfect model; demo 04 runs the real experiment.

Run:  python demos/03_train_and_attribute.py   (about 2-4 minutes on CPU)
"""

import os

from brushwork import (
    Architecture,
    SynthSpec,
    TrainConfig,
    attribute,
    contribution_map,
    gen_synth,
    init_model,
    load_image,
    save_heatmap,
    save_model,
    split_manifest,
    train,
)
from brushwork.experiment import collect_training_tiles

BASE = os.path.join(os.path.dirname(__file__), "output")
CORPUS = os.path.join(BASE, "corpus_train")
TILE_SIZE = 32

manifest = gen_synth(
    SynthSpec(canvas=256, count_per_class=10, signal_scale=32, seed=21), CORPUS)
split = split_manifest(manifest, fraction=0.25, seed=21)
print(f"{len(split.train.entries)} training images, "
      f"{len(split.test.entries)} held out")

tiles, labels, _ = collect_training_tiles(
    split.train, TILE_SIZE, TILE_SIZE // 2, tau=1.0)
print(f"{len(labels)} salient training tiles at size {TILE_SIZE}")

model = init_model(Architecture(), seed=21, tile_size=TILE_SIZE)
trained, history = train(
    model, tiles, labels, TrainConfig(epochs=8, seed=21),
    on_epoch=lambda e, loss: print(f"  epoch {e:2d}: mean loss {loss:.4f}"))
save_model(trained, os.path.join(BASE, "demo_model.brush"))

print("\nheld-out verdicts (POSITIVE = fine-grain artist):")
for entry in split.test.entries:
    img = load_image(split.test.resolve(entry))
    report = attribute(trained, img, image_path=entry.path, tau=1.0)
    mark = "ok " if (report.verdict == "POSITIVE") == (entry.label == "positive") \
        else "MISS"
    print(f"  [{mark}] {entry.path}: aggregate {report.aggregate:.3f} "
          f"-> {report.verdict:8s} (truth: {entry.label}, "
          f"{report.n_tiles_salient} tiles)")

# Back-project the last image's tile scores into a heatmap.
cmap = contribution_map(report.tile_scores, report.tile_size,
                        img.width, img.height)
heat_path = os.path.join(BASE, f"heatmap_{os.path.basename(entry.path)}")
save_heatmap(cmap, heat_path)
print(f"\ncontribution heatmap for {entry.path} written to {heat_path}")
print("bright regions pushed the verdict toward POSITIVE; "
      "black regions were never scored (too plain).")
