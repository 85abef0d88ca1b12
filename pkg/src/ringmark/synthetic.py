"""Procedural test imagery: covers, portrait scenes, and disk scenes.

Everything here is deterministic given a seed and spectrally natural: the
textures carry a 1/f-style falloff, so the ring band sees realistic content
rather than silence. Threshold calibration and the benchmark corpus both draw
from these generators.
"""

from __future__ import annotations

import numpy as np

from .model import ImageBuffer


def cover_planes(
    count: int, width: int, height: int, seed: int = 0, *, alpha: float = 1.6
) -> np.ndarray:
    """(count, height, width) stack of textured planes, each spanning [0, 1].

    Planes are independent 1/f^alpha noise fields: Gaussian spectra shaped by
    a radial envelope, inverse-transformed, then min-max normalized. Batched
    so ten-thousand-trial calibration stays fast.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    cy, cx = height // 2, width // 2
    fy = (np.arange(height) - cy) / height
    fx = (np.arange(width) - cx) / width
    r = np.hypot(fy[:, None], fx[None, :])
    env = np.fft.ifftshift(1.0 / (r + 1.0 / max(width, height)) ** alpha)
    spec = rng.standard_normal((count, height, width)) + 1j * rng.standard_normal(
        (count, height, width)
    )
    planes = np.fft.ifft2(spec * env).real
    lo = planes.min(axis=(1, 2), keepdims=True)
    hi = planes.max(axis=(1, 2), keepdims=True)
    return (planes - lo) / np.maximum(hi - lo, 1e-12)


def procedural_cover(width: int, height: int, seed: int = 0) -> ImageBuffer:
    """Textured 3-channel cover photo with a natural 1/f-style spectrum."""
    planes = cover_planes(4, width, height, seed)
    luma = 0.15 + 0.70 * planes[0]
    rgb = np.stack(
        [np.clip(luma + 0.12 * (planes[c] - 0.5), 0.0, 1.0) for c in (1, 2, 3)],
        axis=-1,
    )
    return ImageBuffer(rgb)


def portrait_scene(width: int, height: int, seed: int = 0) -> tuple[ImageBuffer, np.ndarray]:
    """ID-photo-like reflectance scene plus its ground-truth subject mask.

    Returns a 3-channel albedo image (textured head-and-shoulders subject on
    a plain light background) and the boolean foreground mask.
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width]
    head_cx = width * (0.5 + 0.08 * (rng.random() - 0.5))
    head_cy = height * 0.38
    head = ((xx - head_cx) / (width * 0.17)) ** 2 + (
        (yy - head_cy) / (height * 0.23)
    ) ** 2 <= 1.0
    shoulders = ((xx - width * 0.5) / (width * 0.38)) ** 2 + (
        (yy - height * 0.98) / (height * 0.34)
    ) ** 2 <= 1.0
    mask = head | shoulders
    tex = cover_planes(3, width, height, int(rng.integers(1 << 32)))
    albedo = np.empty((height, width, 3))
    tones = [(0.76, 0.80, 0.26), (0.75, 0.62, 0.28), (0.72, 0.52, 0.44)]
    for c, (bg, skin, cloth) in enumerate(tones):
        chan = np.full((height, width), bg)
        chan[shoulders] = cloth
        chan[head] = skin
        chan += 0.16 * (tex[c] - 0.5)
        albedo[:, :, c] = np.clip(chan, 0.02, 0.98)
    return ImageBuffer(albedo), mask


def disk_scene(
    width: int, height: int, seed: int = 0, *, radius_frac: float = 0.35
) -> tuple[ImageBuffer, np.ndarray]:
    """Textured disk subject centered on a plain background, plus its mask.

    The background carries only faint texture so contour extraction locks on
    the disk edge; the subject is strongly textured.
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width]
    radius = radius_frac * min(width, height)
    mask = (xx - width / 2.0) ** 2 + (yy - height / 2.0) ** 2 <= radius**2
    tex = cover_planes(3, width, height, int(rng.integers(1 << 32)))
    albedo = np.empty((height, width, 3))
    tones = [(0.80, 0.46), (0.79, 0.55), (0.76, 0.60)]
    for c, (bg, fg) in enumerate(tones):
        chan = np.where(
            mask,
            fg + 0.22 * (tex[c] - 0.5),
            bg + 0.04 * (tex[c] - 0.5),
        )
        albedo[:, :, c] = np.clip(chan, 0.02, 0.98)
    return ImageBuffer(albedo), mask
