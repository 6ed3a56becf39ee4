"""Small shared helpers."""

import os

import numpy as np


def round_half_up(x):
    """Round to nearest integer with halves going up.

    numpy's round() is round-half-even; image byte math here is pinned to
    round-half-up so results are reproducible across code paths.
    Works on scalars and arrays; returns float values (caller casts).
    """
    return np.floor(np.asarray(x, dtype=np.float64) + 0.5)


def atomic_write_bytes(path, data: bytes) -> None:
    """Write a file via a temp name + rename so no partial output survives."""
    path = os.fspath(path)
    tmp = f"{path}.tmp.{os.getpid()}"
    try:
        with open(tmp, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))
