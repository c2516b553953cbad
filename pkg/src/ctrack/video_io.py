"""Lossless video I/O: PNG frame directories and a raw planar tensor file.

Raw format: 8-byte magic b"CTVRAW1\\n", then F, H, W as little-endian uint32,
one dtype code byte (0 = uint8, 1 = float32), then the three channel planes
(C, F, H, W) in C order. Lossy codecs are deliberately unsupported.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import InvalidArgumentError

__all__ = [
    "write_png_frames",
    "read_png_frames",
    "write_raw_video",
    "read_raw_video",
    "read_video",
]

MAGIC = b"CTVRAW1\n"
_DTYPES = {0: np.uint8, 1: np.float32}
_DTYPE_CODES = {np.dtype(np.uint8): 0, np.dtype(np.float32): 1}


def write_png_frames(directory, video: np.ndarray) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for k in range(video.shape[0]):
        Image.fromarray(video[k]).save(directory / f"frame_{k:05d}.png")


def read_png_frames(directory) -> np.ndarray:
    directory = Path(directory)
    paths = sorted(directory.glob("frame_*.png"))
    if not paths:
        raise InvalidArgumentError(f"no frame_*.png files in {directory}")
    frames = [np.asarray(Image.open(p).convert("RGB")) for p in paths]
    return np.stack(frames, axis=0)


def write_raw_video(path, video: np.ndarray) -> None:
    video = np.asarray(video)
    if video.ndim != 4 or video.shape[-1] != 3:
        raise InvalidArgumentError(
            f"expected (F, H, W, 3) video, got shape {video.shape}")
    code = _DTYPE_CODES.get(video.dtype)
    if code is None:
        raise InvalidArgumentError(f"unsupported dtype {video.dtype}")
    f, h, w = video.shape[:3]
    planar = np.ascontiguousarray(np.moveaxis(video, -1, 0))
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IIIB", f, h, w, code))
        fh.write(planar.tobytes())


def read_raw_video(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise InvalidArgumentError(f"{path}: bad magic {magic!r}")
        f, h, w, code = struct.unpack("<IIIB", fh.read(13))
        dtype = _DTYPES.get(code)
        if dtype is None:
            raise InvalidArgumentError(f"{path}: unknown dtype code {code}")
        data = np.frombuffer(fh.read(), dtype=dtype)
    expected = 3 * f * h * w
    if data.size != expected:
        raise InvalidArgumentError(
            f"{path}: expected {expected} values, got {data.size}")
    return np.moveaxis(data.reshape(3, f, h, w), 0, -1).copy()


def read_video(path) -> np.ndarray:
    """Read either a raw tensor file or a PNG frame directory."""
    path = Path(path)
    if path.is_dir():
        return read_png_frames(path)
    if not path.exists():
        raise InvalidArgumentError(f"video path {path} does not exist")
    return read_raw_video(path)
