"""Domain types: images, spectra, ring layouts, payloads, and reports.

All types are immutable values after construction and validate their
invariants up front; arrays are stored read-only so instances can be shared
freely between threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import CapacityError, GeometryError

MIN_PAYLOAD_BITS = 16
MAX_PAYLOAD_BITS = 24

#: Minimum DFT bins a cell must contain for a layout to fit an image size.
MIN_BINS_PER_CELL = 4


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype)
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ImageBuffer:
    """Raster with real pixel values in [0, 1].

    Single-channel images are stored as ``(height, width)`` arrays and color
    images as ``(height, width, 3)`` (RGB, channel-interleaved). Values are
    float64; 8-bit quantization happens only at file I/O.
    """

    pixels: np.ndarray

    def __post_init__(self) -> None:
        arr = _frozen_array(self.pixels, np.float64)
        if arr.ndim == 3 and arr.shape[2] == 1:
            arr = _frozen_array(arr[:, :, 0], np.float64)
        if arr.ndim not in (2, 3) or (arr.ndim == 3 and arr.shape[2] != 3):
            raise ValueError(f"expected (H, W) or (H, W, 3) pixels, got shape {arr.shape}")
        if arr.size == 0:
            raise ValueError("image must be non-empty")
        lo, hi = float(arr.min()), float(arr.max())
        if not (np.isfinite(lo) and np.isfinite(hi)) or lo < 0.0 or hi > 1.0:
            raise ValueError(f"pixel values must lie in [0, 1], got range [{lo}, {hi}]")
        object.__setattr__(self, "pixels", arr)

    @classmethod
    def clipped(cls, values) -> "ImageBuffer":
        """Construct from an unclamped array, clamping into [0, 1]."""
        return cls(np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def channels(self) -> int:
        return 1 if self.pixels.ndim == 2 else 3

    @property
    def size(self) -> tuple[int, int]:
        """(width, height) pair."""
        return self.width, self.height

    def plane(self, channel: int = 0) -> np.ndarray:
        """One channel as a read-only (H, W) array."""
        if self.channels == 1:
            if channel != 0:
                raise IndexError("single-channel image has only channel 0")
            return self.pixels
        return self.pixels[:, :, channel]

    def blue_plane(self) -> np.ndarray:
        """The watermark-carrying plane: blue for color, the plane itself for gray."""
        return self.pixels if self.channels == 1 else self.pixels[:, :, 2]


@dataclass(frozen=True)
class Spectrum:
    """DC-centered complex 2-D DFT of one image plane.

    The zero-frequency coefficient sits at index ``(height // 2, width // 2)``.
    """

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        arr = _frozen_array(self.coeffs, np.complex128)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError(f"expected a non-empty (H, W) coefficient array, got {arr.shape}")
        object.__setattr__(self, "coeffs", arr)

    @property
    def width(self) -> int:
        return self.coeffs.shape[1]

    @property
    def height(self) -> int:
        return self.coeffs.shape[0]

    @property
    def dc_index(self) -> tuple[int, int]:
        """(row, col) of the zero-frequency coefficient."""
        return self.height // 2, self.width // 2

    def conjugate_symmetry_error(self) -> float:
        """Max |F(u,v) - conj(F(-u,-v))|, indices modulo dimensions about DC."""
        g = np.fft.ifftshift(self.coeffs)
        mirrored = np.conj(np.roll(np.flip(g, axis=(0, 1)), 1, axis=(0, 1)))
        return float(np.max(np.abs(g - mirrored)))

    def is_conjugate_symmetric(self, tol: float = 1e-9) -> bool:
        scale = float(np.max(np.abs(self.coeffs))) or 1.0
        return self.conjugate_symmetry_error() <= tol * max(scale, 1.0)


@dataclass(frozen=True)
class RingLayout:
    """Geometry of the ring/sector cell grid carrying the payload.

    Radii are normalized frequencies (cycles per pixel; Nyquist is 0.5), so a
    layout is independent of image size and of aspect ratio. Opposite sectors
    form conjugate pairs and carry the same bit, so the capacity is
    ``num_rings * num_sectors / 2`` bits.
    """

    r_min: float
    r_max: float
    num_rings: int
    num_sectors: int

    def __post_init__(self) -> None:
        if not (0.0 < self.r_min < self.r_max < 0.5):
            raise GeometryError(
                f"need 0 < r_min < r_max < 0.5, got r_min={self.r_min}, r_max={self.r_max}"
            )
        if self.num_rings < 1:
            raise GeometryError(f"num_rings must be >= 1, got {self.num_rings}")
        if self.num_sectors < 2 or self.num_sectors % 2 != 0:
            raise GeometryError(
                f"num_sectors must be an even count >= 2, got {self.num_sectors}"
            )

    @property
    def num_cells(self) -> int:
        return self.num_rings * self.num_sectors

    @property
    def capacity(self) -> int:
        """Payload bits this layout can carry (one bit per conjugate sector pair)."""
        return self.num_rings * (self.num_sectors // 2)

    def to_dict(self) -> dict[str, Any]:
        return {
            "r_min": self.r_min,
            "r_max": self.r_max,
            "num_rings": self.num_rings,
            "num_sectors": self.num_sectors,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RingLayout":
        return cls(
            r_min=float(data["r_min"]),
            r_max=float(data["r_max"]),
            num_rings=int(data["num_rings"]),
            num_sectors=int(data["num_sectors"]),
        )


#: Default carrier band. The top of the band stays below 0.5 * 0.5 = 0.25 so
#: the payload survives a 0.5x rescale (content above the downscaled Nyquist
#: is unrecoverable), while the bottom stays above the r < 0.1 region where
#: print-scan noise concentrates. Eight sectors put the grid's rotational
#: period at 45 degrees, so a +/-20 degree rotation search never sees the
#: aliased grid position one sector over, which would decode a cyclically
#: shifted payload with an identical score.
DEFAULT_LAYOUT = RingLayout(r_min=0.10, r_max=0.20, num_rings=6, num_sectors=8)


@dataclass(frozen=True)
class Payload:
    """Ordered ID bits carried by the watermark (16 to 24 of them)."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        bits = tuple(int(b) for b in self.bits)
        if not MIN_PAYLOAD_BITS <= len(bits) <= MAX_PAYLOAD_BITS:
            raise ValueError(
                f"payload must have {MIN_PAYLOAD_BITS}-{MAX_PAYLOAD_BITS} bits, got {len(bits)}"
            )
        if any(b not in (0, 1) for b in bits):
            raise ValueError("payload bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_string(cls, text: str) -> "Payload":
        text = text.strip()
        if any(c not in "01" for c in text):
            raise ValueError(f"payload string must contain only 0/1, got {text!r}")
        return cls(tuple(int(c) for c in text))

    def __len__(self) -> int:
        return len(self.bits)

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


def bit_error_rate(expected: Payload, actual: Payload) -> float:
    """Fraction of differing bits; payloads must have equal length."""
    if len(expected) != len(actual):
        raise ValueError(f"payload lengths differ: {len(expected)} vs {len(actual)}")
    errors = sum(a != b for a, b in zip(expected.bits, actual.bits))
    return errors / len(expected)


@dataclass(frozen=True)
class WatermarkSpec:
    """Everything needed to reproduce one watermark embedding.

    ``strength`` is the additive gain applied to DFT magnitudes. ``seed`` is
    carried for reproducibility of any randomized cell ordering; the default
    codec uses the canonical ring-major order, so embedding and blind decoding
    agree without sharing the seed.
    """

    layout: RingLayout
    payload: Payload
    strength: float
    seed: int = 0

    def __post_init__(self) -> None:
        if not math.isfinite(self.strength) or self.strength < 0:
            raise ValueError(f"strength must be a nonnegative real, got {self.strength}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "layout": self.layout.to_dict(),
            "payload": str(self.payload),
            "strength": self.strength,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "WatermarkSpec":
        return cls(
            layout=RingLayout.from_dict(data["layout"]),
            payload=Payload.from_string(str(data["payload"])),
            strength=float(data["strength"]),
            seed=int(data.get("seed", 0)),
        )

    def to_json(self, path: str | Path | None = None) -> str:
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            Path(path).write_text(text + "\n", encoding="utf-8")
        return text

    @classmethod
    def from_json(cls, path_or_text: str | Path) -> "WatermarkSpec":
        return cls.from_dict(_load_json(path_or_text))


@dataclass(frozen=True)
class DetectionReport:
    """Outcome of a detection run.

    ``similarity`` is None when only the blind path ran (no original image);
    whenever it is set, ``present`` equals ``similarity > threshold``.
    ``cell_energies`` is the extracted per-cell statistic, shape
    ``(num_rings, num_sectors)``.
    """

    threshold: float
    present: bool
    cell_energies: np.ndarray
    similarity: float | None = None
    decoded_bits: Payload | None = None
    estimated_rotation_deg: float | None = None
    snr_db: float | None = None
    decode_confidence: float | None = None

    def __post_init__(self) -> None:
        energies = _frozen_array(self.cell_energies, np.float64)
        if energies.ndim != 2:
            raise ValueError(f"cell_energies must be 2-D, got shape {energies.shape}")
        object.__setattr__(self, "cell_energies", energies)
        if self.similarity is not None and self.present != (self.similarity > self.threshold):
            raise ValueError("present must equal (similarity > threshold)")

    def to_dict(self) -> dict[str, Any]:
        snr = self.snr_db
        unbounded = snr is not None and math.isinf(snr)
        out: dict[str, Any] = {
            "similarity": self.similarity,
            "threshold": self.threshold,
            "present": self.present,
            "decoded_bits": None if self.decoded_bits is None else str(self.decoded_bits),
            "cell_energies": self.cell_energies.tolist(),
            "estimated_rotation_deg": self.estimated_rotation_deg,
            "snr_db": None if unbounded else snr,
        }
        if unbounded:
            out["snr_db_unbounded"] = True
        if self.decode_confidence is not None:
            out["decode_confidence"] = self.decode_confidence
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "DetectionReport":
        snr = data.get("snr_db")
        if data.get("snr_db_unbounded"):
            snr = math.inf
        bits = data.get("decoded_bits")
        return cls(
            threshold=float(data["threshold"]),
            present=bool(data["present"]),
            cell_energies=np.asarray(data["cell_energies"], dtype=np.float64),
            similarity=None if data.get("similarity") is None else float(data["similarity"]),
            decoded_bits=None if bits is None else Payload.from_string(str(bits)),
            estimated_rotation_deg=(
                None
                if data.get("estimated_rotation_deg") is None
                else float(data["estimated_rotation_deg"])
            ),
            snr_db=None if snr is None else float(snr),
            decode_confidence=(
                None
                if data.get("decode_confidence") is None
                else float(data["decode_confidence"])
            ),
        )

    def to_json(self, path: str | Path | None = None) -> str:
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            Path(path).write_text(text + "\n", encoding="utf-8")
        return text

    @classmethod
    def from_json(cls, path_or_text: str | Path) -> "DetectionReport":
        return cls.from_dict(_load_json(path_or_text))


def _load_json(path_or_text: str | Path) -> dict[str, Any]:
    if isinstance(path_or_text, Path):
        return json.loads(path_or_text.read_text(encoding="utf-8"))
    text = str(path_or_text)
    if text.lstrip().startswith("{"):
        return json.loads(text)
    return json.loads(Path(text).read_text(encoding="utf-8"))


def validate_spec(spec: WatermarkSpec, image_size: tuple[int, int]) -> None:
    """Check that ``spec`` fits an image of ``(width, height)`` pixels.

    Raises CapacityError when the payload exceeds the layout capacity and
    GeometryError when the ring band is too tight for the image (fewer than
    MIN_BINS_PER_CELL DFT bins in some cell).
    """
    layout = spec.layout
    if len(spec.payload) > layout.capacity:
        raise CapacityError(
            f"payload of {len(spec.payload)} bits exceeds layout capacity {layout.capacity}"
        )
    from .spectral import cell_geometry  # deferred: spectral imports this module

    width, height = image_size
    geo = cell_geometry(width, height, layout)
    smallest = int(geo.bin_counts.min())
    if smallest < MIN_BINS_PER_CELL:
        raise GeometryError(
            f"layout does not fit a {width}x{height} image: smallest cell has "
            f"{smallest} DFT bins (need >= {MIN_BINS_PER_CELL})"
        )
