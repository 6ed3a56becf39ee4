"""Scale-localization experiments: stratified splits, evaluation, sweeps.

A sweep trains one fresh classifier per tile size on the salient tiles of
the training images and evaluates whole-image verdicts on held-out test
images.  The split is by image (never by tile) so no painting leaks across
sides, and it is shared across all sizes so tile size is the only factor
that varies.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from ._util import atomic_write_text
from .attribution import attribute
from .errors import (
    DuplicateSizeError,
    EmptyClassError,
    EmptyEvaluationError,
    InsufficientDataError,
    NoSalientTilesError,
    TileLargerThanImageError,
    TileSizeMismatchError,
)
from .imageio import (
    NEGATIVE,
    POSITIVE,
    ColorImage,
    DatasetManifest,
    load_image,
    to_grayscale,
)
from .nnet import Architecture, Model, TrainConfig, init_model, train
from .tiling import extract_tiles, image_entropy, select_salient


@dataclass
class Split:
    train: DatasetManifest
    test: DatasetManifest
    seed: int
    fraction: float


@dataclass
class Metrics:
    per_image_accuracy: float
    per_tile_accuracy: float
    tp: int
    fp: int
    tn: int
    fn: int
    n_images: int
    n_tiles: int
    n_skipped: int

    def to_dict(self) -> dict:
        return {
            "per_image_accuracy": self.per_image_accuracy,
            "per_tile_accuracy": self.per_tile_accuracy,
            "confusion": {"tp": self.tp, "fp": self.fp,
                          "tn": self.tn, "fn": self.fn},
            "n_images": self.n_images,
            "n_tiles": self.n_tiles,
            "n_skipped": self.n_skipped,
        }


@dataclass
class SweepRow:
    tile_size: int
    per_image_accuracy: float
    per_tile_accuracy: float
    n_train_tiles: int
    n_test_tiles: int


@dataclass
class SweepResult:
    rows: list[SweepRow]
    tau: float
    seed: int
    fraction: float
    train_config: TrainConfig
    stride_rule: str = "tile_size // 2"
    loss_histories: dict[int, list[float]] = field(default_factory=dict)


def split_manifest(manifest: DatasetManifest, fraction: float = 0.25,
                   seed: int = 0) -> Split:
    """Seeded, stratified-by-label, image-level partition.

    With fraction in (0, 1) each label keeps at least one image on each
    side (so needs >= 2 images per label); fraction 0 yields an empty test
    set.  Manifest order is preserved within each side.
    """
    if not 0.0 <= fraction < 1.0:
        raise ValueError(f"fraction must be in [0, 1), got {fraction}")
    rng = np.random.Generator(np.random.PCG64(seed))
    test_flags = {}
    for label in (POSITIVE, NEGATIVE):
        idxs = [i for i, e in enumerate(manifest.entries) if e.label == label]
        n = len(idxs)
        if fraction == 0.0:
            n_test = 0
        else:
            if n < 2:
                raise InsufficientDataError(label, have=n, need=2)
            n_test = int(np.floor(n * fraction + 0.5))
            n_test = min(max(n_test, 1), n - 1)
        perm = rng.permutation(n)
        for j in perm[:n_test]:
            test_flags[idxs[j]] = True
    train_entries = [e for i, e in enumerate(manifest.entries)
                     if i not in test_flags]
    test_entries = [e for i, e in enumerate(manifest.entries)
                    if i in test_flags]
    return Split(
        train=DatasetManifest(entries=train_entries, root=manifest.root),
        test=DatasetManifest(entries=test_entries, root=manifest.root),
        seed=seed, fraction=fraction)


def shuffle_labels(manifest: DatasetManifest, seed: int) -> DatasetManifest:
    """Randomly reassign the existing label multiset across entries.

    Keeps paths, order, and the overall label balance; destroys any
    path-label association.  Used for coin-flip floor experiments.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    labels = [e.label for e in manifest.entries]
    shuffled = [labels[i] for i in rng.permutation(len(labels))]
    entries = [replace(e, label=lab)
               for e, lab in zip(manifest.entries, shuffled)]
    return DatasetManifest(entries=entries, root=manifest.root)


def evaluate(model: Model, manifest: DatasetManifest,
             tile_size: int | None = None, stride: int | None = None,
             tau: float = 1.0,
             image_cache: dict | None = None) -> Metrics:
    """Whole-image verdicts vs labels over a manifest.

    Images with no salient tile are skipped and counted, not failed.
    tile_size, when given, must match the model's training size (scoring
    refuses silent resampling).  Accuracies are computed from the confusion
    counts over the images actually evaluated.
    """
    if not manifest.entries:
        raise EmptyEvaluationError("no entries to evaluate")
    if tile_size is not None and tile_size != model.meta.tile_size:
        raise TileSizeMismatchError(model.meta.tile_size, tile_size)
    tp = fp = tn = fn = 0
    tile_hits = 0
    n_tiles = 0
    n_skipped = 0
    for entry in manifest.entries:
        img = _load_cached(manifest, entry, image_cache)
        try:
            report = attribute(model, img, image_path=entry.path,
                               stride=stride, tau=tau)
        except NoSalientTilesError:
            n_skipped += 1
            continue
        is_positive = entry.label == POSITIVE
        if report.verdict == "POSITIVE":
            tp, fp = tp + (1 if is_positive else 0), fp + (0 if is_positive else 1)
        else:
            fn, tn = fn + (1 if is_positive else 0), tn + (0 if is_positive else 1)
        for s in report.tile_scores:
            tile_hits += 1 if (s.score >= 0.5) == is_positive else 0
        n_tiles += len(report.tile_scores)
    n_images = tp + fp + tn + fn
    if n_images == 0:
        raise EmptyEvaluationError("every image was skipped (no salient tiles)")
    return Metrics(
        per_image_accuracy=(tp + tn) / n_images,
        per_tile_accuracy=tile_hits / n_tiles if n_tiles else 0.0,
        tp=tp, fp=fp, tn=tn, fn=fn,
        n_images=n_images, n_tiles=n_tiles, n_skipped=n_skipped)


def _load_cached(manifest: DatasetManifest, entry, cache) -> ColorImage:
    path = manifest.resolve(entry)
    if cache is None:
        return load_image(path)
    if path not in cache:
        cache[path] = load_image(path)
    return cache[path]


def collect_training_tiles(manifest: DatasetManifest, tile_size: int,
                           stride: int, tau: float,
                           image_cache: dict | None = None):
    """Salient tiles + labels from every manifest image, as one uint8 stack.

    Images with no salient tile contribute nothing (and are counted);
    raises TileLargerThanImageError naming the offending image.
    """
    arrays = []
    labels = []
    n_skipped = 0
    for entry in manifest.entries:
        img = _load_cached(manifest, entry, image_cache)
        if tile_size > img.width or tile_size > img.height:
            raise TileLargerThanImageError(tile_size, img.width, img.height,
                                           path=entry.path)
        grid = extract_tiles(img, tile_size, stride)
        whole = image_entropy(to_grayscale(img))
        try:
            salient = select_salient(grid, whole, tau)
        except NoSalientTilesError:
            n_skipped += 1
            continue
        y = 1 if entry.label == POSITIVE else 0
        for t in salient.tiles:
            arrays.append(t.color_pixels)
            labels.append(y)
    if not arrays:
        raise EmptyEvaluationError("no image produced a salient tile")
    return np.stack(arrays), np.asarray(labels, dtype=np.int64), n_skipped


def derive_size_seed(seed: int, tile_size: int) -> int:
    """Per-size seed so each sweep row trains a fresh, reproducible model."""
    return seed * 1_000_003 + tile_size


def run_sweep(manifest: DatasetManifest, sizes: list[int], cfg: TrainConfig,
              seed: int, tau: float = 1.0, fraction: float = 0.25,
              arch: Architecture | None = None,
              progress=None) -> SweepResult:
    """Train and evaluate one model per tile size over a shared split.

    Sizes must be distinct (>= 2 of them); rows come back in the requested
    order.  Stride is tile_size // 2 throughout; every per-size model seeds
    from (seed, tile_size), so results are schedule-independent.
    """
    if len(sizes) < 2:
        raise ValueError(f"a sweep needs at least 2 tile sizes, got {sizes}")
    seen = set()
    for s in sizes:
        if s in seen:
            raise DuplicateSizeError(s)
        if s < 1:
            raise ValueError(f"tile sizes must be >= 1, got {s}")
        seen.add(s)
    cfg.validate()
    arch = arch or Architecture()

    split = split_manifest(manifest, fraction=fraction, seed=seed)
    cache: dict = {}
    rows = []
    histories = {}
    for size in sizes:
        stride = max(1, size // 2)
        tiles, labels, _ = collect_training_tiles(
            split.train, size, stride, tau, image_cache=cache)
        if not (labels == 1).any():
            raise EmptyClassError("positive")
        if not (labels == 0).any():
            raise EmptyClassError("negative")
        size_seed = derive_size_seed(seed, size)
        model = init_model(arch, size_seed, tile_size=size)
        model.meta.tau = tau
        cfg_size = replace(cfg, seed=size_seed)
        if progress:
            progress(f"tile size {size}: training on {len(labels)} tiles")
        trained, history = train(model, tiles, labels, cfg_size)
        metrics = evaluate(trained, split.test, stride=stride, tau=tau,
                           image_cache=cache)
        rows.append(SweepRow(
            tile_size=size,
            per_image_accuracy=metrics.per_image_accuracy,
            per_tile_accuracy=metrics.per_tile_accuracy,
            n_train_tiles=int(labels.size),
            n_test_tiles=metrics.n_tiles))
        histories[size] = history
        if progress:
            progress(f"tile size {size}: per-image accuracy "
                     f"{metrics.per_image_accuracy:.3f}")
    return SweepResult(rows=rows, tau=tau, seed=seed, fraction=fraction,
                       train_config=cfg, loss_histories=histories)


def sweep_to_csv(result: SweepResult) -> str:
    lines = ["tile_size,per_image_accuracy,per_tile_accuracy,"
             "n_train_tiles,n_test_tiles"]
    for r in result.rows:
        lines.append(f"{r.tile_size},{r.per_image_accuracy!r},"
                     f"{r.per_tile_accuracy!r},{r.n_train_tiles},"
                     f"{r.n_test_tiles}")
    return "\n".join(lines) + "\n"


def save_sweep_csv(result: SweepResult, path) -> None:
    atomic_write_text(path, sweep_to_csv(result))


def save_sweep_plot(result: SweepResult, path) -> None:
    """Accuracy-vs-tile-size line chart; needs matplotlib (optional extra)."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    sizes = [r.tile_size for r in result.rows]
    acc = [r.per_image_accuracy for r in result.rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(sizes, acc, marker="o")
    ax.axhline(0.5, linestyle="--", linewidth=1, color="gray")
    ax.set_xscale("log", base=2)
    ax.set_xticks(sizes)
    ax.set_xticklabels([str(s) for s in sizes])
    ax.set_xlabel("tile size (px)")
    ax.set_ylabel("per-image accuracy")
    ax.set_ylim(0.0, 1.05)
    ax.set_title("classification accuracy vs tile size")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
