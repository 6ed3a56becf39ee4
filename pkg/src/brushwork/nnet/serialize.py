"""Portable binary model files.

Layout (all integers little-endian):

    magic  b"BRSH"
    u32    format version (currently 1)
    u32    metadata byte length
    bytes  UTF-8 JSON metadata: architecture descriptor, tile_size, tau,
           seed, epochs, normalization constants
    for each parameter tensor, in the architecture's declared order:
        u32    rank
        u32[]  extents
        f64[]  row-major payload
    u32    CRC32 of every preceding byte

Round-trips are bit-lossless; any flipped payload byte fails the checksum.
"""

import json
import struct
import zlib

import numpy as np

from .._util import atomic_write_bytes
from ..errors import (
    BadMagicError,
    BrushworkError,
    ChecksumMismatchError,
    UnsupportedVersionError,
)
from .network import Architecture, Model, ModelMeta

MAGIC = b"BRSH"
FORMAT_VERSION = 1


def _metadata_json(model: Model) -> bytes:
    meta = {
        "architecture": model.arch.to_dict(),
        "tile_size": model.meta.tile_size,
        "tau": model.meta.tau,
        "seed": model.meta.seed,
        "epochs": model.meta.epochs,
        "normalization": model.meta.normalization,
    }
    return json.dumps(meta, separators=(",", ":")).encode("utf-8")


def model_to_bytes(model: Model) -> bytes:
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<I", FORMAT_VERSION)
    meta = _metadata_json(model)
    blob += struct.pack("<I", len(meta))
    blob += meta
    for name, shape in model.arch.param_shapes():
        tensor = model.params[name]
        if tuple(tensor.shape) != shape:
            raise ValueError(f"parameter {name} has shape {tensor.shape}, "
                             f"architecture declares {shape}")
        blob += struct.pack("<I", tensor.ndim)
        blob += struct.pack(f"<{tensor.ndim}I", *tensor.shape)
        blob += np.ascontiguousarray(tensor, dtype="<f8").tobytes()
    blob += struct.pack("<I", zlib.crc32(bytes(blob)) & 0xFFFFFFFF)
    return bytes(blob)


def save_model(model: Model, path) -> None:
    """Write the model file atomically (temp name + rename)."""
    atomic_write_bytes(path, model_to_bytes(model))


def model_from_bytes(data: bytes, path="<bytes>") -> Model:
    if len(data) < 16 or data[:4] != MAGIC:
        raise BadMagicError(path)
    (version,) = struct.unpack_from("<I", data, 4)
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(path, version)
    stored_crc = struct.unpack_from("<I", data, len(data) - 4)[0]
    if zlib.crc32(data[:-4]) & 0xFFFFFFFF != stored_crc:
        raise ChecksumMismatchError(path)

    (meta_len,) = struct.unpack_from("<I", data, 8)
    offset = 12
    meta = json.loads(data[offset:offset + meta_len].decode("utf-8"))
    offset += meta_len

    arch = Architecture.from_dict(meta["architecture"])
    arch.validate()
    params: dict[str, np.ndarray] = {}
    for name, shape in arch.param_shapes():
        (rank,) = struct.unpack_from("<I", data, offset)
        offset += 4
        extents = struct.unpack_from(f"<{rank}I", data, offset)
        offset += 4 * rank
        if tuple(extents) != shape:
            raise BrushworkError(
                f"model file {path}: tensor {name} has extents {extents}, "
                f"architecture declares {shape}")
        count = int(np.prod(extents)) if rank else 1
        params[name] = (np.frombuffer(data, dtype="<f8", count=count,
                                      offset=offset)
                        .astype(np.float64).reshape(extents))
        offset += 8 * count

    model_meta = ModelMeta(
        tile_size=int(meta["tile_size"]),
        tau=float(meta["tau"]),
        seed=int(meta["seed"]),
        epochs=int(meta["epochs"]),
        normalization=dict(meta["normalization"]),
    )
    return Model(arch=arch, params=params, meta=model_meta)


def load_model(path) -> Model:
    with open(path, "rb") as fh:
        data = fh.read()
    return model_from_bytes(data, path=path)
