"""brushwork: tile-based attribution of paintings to an artist.

Pipeline: decode an image, cut it into equally sized square tiles, keep the
tiles whose luma entropy reaches the whole image's ("salient" tiles), score
each with a small trainable convolutional classifier, and average the
scores into a POSITIVE/NEGATIVE verdict.  A tile-size sweep trains one
model per size to locate the spatial scale where the artist's signature is
actually detectable.
"""

from .attribution import (
    AttributionReport,
    ContributionMap,
    TileScore,
    aggregate,
    attribute,
    contribution_map,
    render_heatmap,
    report_to_json,
    save_heatmap,
    save_report,
    score_tiles,
)
from .errors import (
    BadMagicError,
    BrushworkError,
    ChecksumMismatchError,
    CorruptImageError,
    DuplicatePathError,
    DuplicateSizeError,
    EmptyClassError,
    EmptyEvaluationError,
    EmptyInputError,
    EmptyScoresError,
    InsufficientDataError,
    InvalidArchitectureError,
    MalformedRowError,
    NoSalientTilesError,
    NonFiniteLossError,
    ShapeMismatchError,
    TileLargerThanImageError,
    TileSizeMismatchError,
    UnknownLabelError,
    UnsupportedFormatError,
    UnsupportedVersionError,
)
from .experiment import (
    Metrics,
    Split,
    SweepResult,
    SweepRow,
    collect_training_tiles,
    evaluate,
    run_sweep,
    save_sweep_csv,
    save_sweep_plot,
    shuffle_labels,
    split_manifest,
    sweep_to_csv,
)
from .imageio import (
    NEGATIVE,
    POSITIVE,
    ColorImage,
    DatasetManifest,
    GrayImage,
    ManifestEntry,
    load_image,
    load_manifest,
    save_manifest,
    save_png,
    to_grayscale,
)
from .nnet import (
    Architecture,
    Model,
    ModelMeta,
    TrainConfig,
    backward,
    bce_loss,
    forward,
    forward_batch,
    init_model,
    load_model,
    normalize_batch,
    normalize_tile,
    save_model,
    train,
)
from .synth import SynthSpec, gen_synth, render_pair
from .tiling import (
    SalientTileSet,
    Tile,
    TileGrid,
    extract_tiles,
    image_entropy,
    select_salient,
    shannon_entropy,
)

__version__ = "0.1.0"
