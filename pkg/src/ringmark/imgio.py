"""Image file I/O: 8-bit PNG, PPM, and PGM.

In memory pixels are [0, 1] reals; quantization to 8 bits happens only at
write time. Gray images round-trip through PGM/PNG-L, color through PPM/PNG.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ShapeError
from .model import ImageBuffer

_FORMATS = {".png", ".ppm", ".pgm"}


def read_image(path: str | Path) -> ImageBuffer:
    """Load a PNG/PPM/PGM file as an ImageBuffer (gray stays 1-channel)."""
    with Image.open(path) as img:
        if img.mode in ("1", "L", "I", "I;16", "F"):
            arr = np.asarray(img.convert("L"), dtype=np.float64) / 255.0
        else:
            arr = np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0
    return ImageBuffer(arr)


def write_image(image: ImageBuffer, path: str | Path) -> None:
    """Write as 8-bit PNG/PPM/PGM chosen by file suffix.

    PGM takes single-channel images only and PPM three-channel only; PNG
    takes either. Re-writing the same image produces identical bytes.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix not in _FORMATS:
        raise ValueError(f"unsupported image suffix {suffix!r}; use .png, .ppm, or .pgm")
    if suffix == ".pgm" and image.channels != 1:
        raise ShapeError("PGM stores single-channel images; got 3 channels")
    if suffix == ".ppm" and image.channels != 3:
        raise ShapeError("PPM stores 3-channel images; got 1 channel")
    quantized = np.round(image.pixels * 255.0).astype(np.uint8)
    mode = "L" if image.channels == 1 else "RGB"
    Image.fromarray(quantized, mode=mode).save(path)
