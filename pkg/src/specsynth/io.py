"""File I/O: PNG images, PFM depth maps, and the raw tensor format.

Raw tensor format ("URTD"): a fixed 16-byte header — magic ``URTD``,
u8 rank, u8 dtype code (0 = float32), u16 reserved, 8 zero bytes of
padding — followed by ``rank`` little-endian u32 dimensions and the packed
little-endian float32 payload in C order.
"""

from __future__ import annotations

import struct
from pathlib import Path

import cv2
import numpy as np

__all__ = [
    "read_png",
    "write_png",
    "read_mask_png",
    "write_mask_png",
    "read_pfm",
    "write_pfm",
    "read_tensor",
    "write_tensor",
]

_TENSOR_MAGIC = b"URTD"
_TENSOR_HEADER = struct.Struct("<4sBBH8x")  # 16 bytes
_DTYPE_F32 = 0


def read_png(path: str | Path) -> np.ndarray:
    """Read a PNG as-is (uint8 or uint16), RGB channel order for color."""
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise IOError(f"cannot read image: {path}")
    if raw.ndim == 3:
        if raw.shape[2] == 4:
            raw = raw[:, :, :3]
        raw = raw[:, :, ::-1]  # BGR -> RGB
    return np.ascontiguousarray(raw)


def write_png(path: str | Path, arr: np.ndarray) -> None:
    """Write a uint8/uint16 array as PNG (RGB channel order for color)."""
    if arr.dtype not in (np.uint8, np.uint16):
        raise ValueError(f"PNG payload must be uint8/uint16, got {arr.dtype}")
    out = arr[:, :, ::-1] if arr.ndim == 3 else arr
    if not cv2.imwrite(str(path), out):
        raise IOError(f"cannot write image: {path}")


def read_mask_png(path: str | Path) -> np.ndarray:
    """Read an 8-bit mask PNG; any nonzero pixel counts as True."""
    raw = cv2.imread(str(path), cv2.IMREAD_GRAYSCALE)
    if raw is None:
        raise IOError(f"cannot read mask: {path}")
    return raw > 0


def write_mask_png(path: str | Path, mask: np.ndarray) -> None:
    """Write a boolean mask as an 8-bit 0/255 PNG."""
    if mask.dtype != np.bool_ or mask.ndim != 2:
        raise ValueError("mask must be a 2-D bool array")
    write_png(path, mask.astype(np.uint8) * 255)


def read_pfm(path: str | Path) -> np.ndarray:
    """Read a single-channel PFM depth map as float32 (top-down rows)."""
    with open(path, "rb") as f:
        header = f.readline().strip()
        if header != b"Pf":
            raise ValueError(f"not a single-channel PFM file: {path}")
        dims = f.readline().split()
        width, height = int(dims[0]), int(dims[1])
        scale = float(f.readline().strip())
        count = width * height
        data = np.frombuffer(f.read(count * 4),
                             dtype="<f4" if scale < 0 else ">f4",
                             count=count)
    # PFM scanlines run bottom-to-top
    return np.ascontiguousarray(data.reshape(height, width)[::-1].astype(np.float32))


def write_pfm(path: str | Path, depth: np.ndarray) -> None:
    """Write a 2-D float array as little-endian single-channel PFM."""
    if depth.ndim != 2:
        raise ValueError("PFM payload must be 2-D")
    h, w = depth.shape
    with open(path, "wb") as f:
        f.write(b"Pf\n")
        f.write(f"{w} {h}\n".encode("ascii"))
        f.write(b"-1.0\n")
        f.write(depth.astype("<f4")[::-1].tobytes())


def write_tensor(path: str | Path, arr: np.ndarray) -> None:
    """Write an array in the raw tensor format (float32 payload)."""
    data = np.ascontiguousarray(arr, dtype="<f4")
    if data.ndim < 1 or data.ndim > 255:
        raise ValueError(f"unsupported rank {data.ndim}")
    with open(path, "wb") as f:
        f.write(_TENSOR_HEADER.pack(_TENSOR_MAGIC, data.ndim, _DTYPE_F32, 0))
        f.write(struct.pack(f"<{data.ndim}I", *data.shape))
        f.write(data.tobytes())


def read_tensor(path: str | Path) -> np.ndarray:
    """Read an array written by :func:`write_tensor`."""
    with open(path, "rb") as f:
        magic, rank, dtype_code, _ = _TENSOR_HEADER.unpack(f.read(_TENSOR_HEADER.size))
        if magic != _TENSOR_MAGIC:
            raise ValueError(f"bad tensor magic in {path}")
        if dtype_code != _DTYPE_F32:
            raise ValueError(f"unsupported dtype code {dtype_code} in {path}")
        dims = struct.unpack(f"<{rank}I", f.read(4 * rank))
        count = int(np.prod(dims)) if rank else 1
        data = np.frombuffer(f.read(count * 4), dtype="<f4", count=count)
    return np.ascontiguousarray(data.reshape(dims).astype(np.float32))
