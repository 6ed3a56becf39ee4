"""Exception types raised across the brushwork pipeline.

Everything derives from BrushworkError so callers (and the CLI) can catch
pipeline failures in one place.  Numeric divergence gets its own branch
because it maps to a distinct process exit code.
"""


class BrushworkError(Exception):
    """Base class for all brushwork failures."""


# --- image ingestion ---------------------------------------------------------

class UnsupportedFormatError(BrushworkError):
    def __init__(self, path, detail=""):
        self.path = str(path)
        super().__init__(f"unsupported image format: {self.path}"
                         + (f" ({detail})" if detail else ""))


class CorruptImageError(BrushworkError):
    def __init__(self, path, detail=""):
        self.path = str(path)
        super().__init__(f"corrupt or undecodable image: {self.path}"
                         + (f" ({detail})" if detail else ""))


class MalformedRowError(BrushworkError):
    def __init__(self, line_no, content):
        self.line_no = line_no
        super().__init__(f"malformed manifest row at line {line_no}: {content!r}")


class UnknownLabelError(BrushworkError):
    def __init__(self, value, line_no=None):
        self.value = value
        at = f" at line {line_no}" if line_no is not None else ""
        super().__init__(f"unknown label {value!r}{at} (expected positive/negative)")


class DuplicatePathError(BrushworkError):
    def __init__(self, path):
        self.path = str(path)
        super().__init__(f"duplicate path in manifest: {self.path}")


# --- tiling ------------------------------------------------------------------

class EmptyInputError(BrushworkError):
    pass


class TileLargerThanImageError(BrushworkError):
    def __init__(self, tile_size, width, height, path=None):
        self.tile_size = tile_size
        self.width = width
        self.height = height
        where = f" ({path})" if path else ""
        super().__init__(
            f"tile size {tile_size} exceeds image dimensions {width}x{height}{where}")


class NoSalientTilesError(BrushworkError):
    def __init__(self, tau, max_tile_entropy):
        self.tau = tau
        self.max_tile_entropy = max_tile_entropy
        super().__init__(
            f"no tile met the entropy threshold (tau={tau}, "
            f"best tile entropy={max_tile_entropy:.6f} bits)")


# --- network -----------------------------------------------------------------

class InvalidArchitectureError(BrushworkError):
    pass


class ShapeMismatchError(BrushworkError):
    pass


class NonFiniteLossError(BrushworkError):
    """Loss or gradients went NaN/Inf; training aborted rather than continued."""


class EmptyClassError(BrushworkError):
    def __init__(self, label):
        self.label = label
        super().__init__(f"training data contains no tiles labeled {label!r}")


# --- model files -------------------------------------------------------------

class BadMagicError(BrushworkError):
    def __init__(self, path):
        self.path = str(path)
        super().__init__(f"not a brushwork model file (bad magic): {self.path}")


class UnsupportedVersionError(BrushworkError):
    def __init__(self, path, version):
        self.path = str(path)
        self.version = version
        super().__init__(f"unsupported model format version {version}: {self.path}")


class ChecksumMismatchError(BrushworkError):
    def __init__(self, path):
        self.path = str(path)
        super().__init__(f"model file checksum mismatch (corrupted?): {self.path}")


# --- attribution -------------------------------------------------------------

class EmptyScoresError(BrushworkError):
    pass


class TileSizeMismatchError(BrushworkError):
    def __init__(self, model_tile_size, tiles_tile_size):
        self.model_tile_size = model_tile_size
        self.tiles_tile_size = tiles_tile_size
        super().__init__(
            f"model was trained at tile size {model_tile_size} but got tiles "
            f"of size {tiles_tile_size}; refusing to resample silently")


# --- experiments -------------------------------------------------------------

class InsufficientDataError(BrushworkError):
    def __init__(self, label, have, need):
        self.label = label
        super().__init__(
            f"label {label!r} has {have} image(s), need at least {need} to split")


class DuplicateSizeError(BrushworkError):
    def __init__(self, size):
        self.size = size
        super().__init__(f"duplicate tile size in sweep: {size}")


class EmptyEvaluationError(BrushworkError):
    pass
