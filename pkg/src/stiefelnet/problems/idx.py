"""Reader for IDX3-ubyte image files (the classic handwritten-digit format).

Layout: big-endian u32 magic 0x00000803, three big-endian u32 dimensions
(image count, rows, cols), then one unsigned byte per pixel, images stored
consecutively in row-major order.
"""

import struct

import numpy as np

from ..errors import BadMagicError, TruncatedFileError

IDX3_MAGIC = 0x00000803


def load_idx_images(path: str) -> np.ndarray:
    """Parse an IDX3-ubyte file into a (samples, rows*cols) float64 matrix.

    Each image is flattened row-major into one feature row and divided by 255,
    so entries land in [0, 1]. Raises BadMagicError / TruncatedFileError on
    malformed files and OSError when the file cannot be read.
    """
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) < 16:
            raise TruncatedFileError(f"{path}: header needs 16 bytes, got {len(header)}")
        magic, count, rows, cols = struct.unpack(">IIII", header)
        if magic != IDX3_MAGIC:
            raise BadMagicError(f"{path}: magic 0x{magic:08x} != 0x{IDX3_MAGIC:08x}")
        payload = fh.read(count * rows * cols)
    if len(payload) < count * rows * cols:
        raise TruncatedFileError(
            f"{path}: payload needs {count * rows * cols} bytes, got {len(payload)}"
        )
    pixels = np.frombuffer(payload, dtype=np.uint8).astype(np.float64)
    return pixels.reshape(count, rows * cols) / 255.0
