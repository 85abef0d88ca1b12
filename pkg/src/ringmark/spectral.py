"""2-D DFT plumbing and ring/sector cell sampling.

All spectra are DC-centered: the zero-frequency coefficient of an ``H x W``
plane sits at ``(H // 2, W // 2)``. Ring geometry lives in normalized
frequency ``r = sqrt((u/W)^2 + (v/H)^2)`` (cycles per pixel, Nyquist at 0.5),
so one layout fits every image size and rescaling an image does not move bins
between cells. Non-square images get rings that are elliptical in bin indices
but circular in normalized frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import GeometryError, ShapeError, SymmetryError
from .model import ImageBuffer, RingLayout, Spectrum, _frozen_array

TWO_PI = 2.0 * math.pi


def _as_plane(plane) -> np.ndarray:
    if isinstance(plane, ImageBuffer):
        if plane.channels != 1:
            raise ShapeError(f"expected a single-channel plane, got {plane.channels} channels")
        return plane.pixels
    arr = np.asarray(plane, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ShapeError(f"expected a non-empty 2-D plane, got shape {arr.shape}")
    return arr


def forward_dft(plane: ImageBuffer | np.ndarray, *, window: bool = False) -> Spectrum:
    """DC-centered 2-D DFT of a single-channel plane.

    ``plane`` may be a 1-channel ImageBuffer or a raw (H, W) float array.
    ``window=True`` applies a raised-cosine window first; useful when crop
    edges would otherwise leak energy into the ring band.
    """
    arr = _as_plane(plane)
    if window:
        arr = arr * raised_cosine_window(arr.shape)
    return Spectrum(np.fft.fftshift(np.fft.fft2(arr)))


def inverse_dft(spec: Spectrum) -> np.ndarray:
    """Real plane whose DFT is ``spec``; NOT clamped to [0, 1].

    Raises SymmetryError when the imaginary residue of the reconstruction
    exceeds 1e-6 of the signal energy, i.e. the spectrum was not conjugate
    symmetric and no real plane matches it.
    """
    full = np.fft.ifft2(np.fft.ifftshift(spec.coeffs))
    signal = float(np.sum(np.abs(full) ** 2))
    residue = float(np.sum(full.imag**2))
    if residue > 1e-6 * max(signal, 1e-300):
        raise SymmetryError(
            f"spectrum is not conjugate-symmetric: imaginary residue {residue:.3e} "
            f"exceeds 1e-6 of signal energy {signal:.3e}"
        )
    return np.ascontiguousarray(full.real)


def magnitude_plane(spec: Spectrum) -> np.ndarray:
    """Entry-wise modulus of the spectrum: a nonnegative (H, W) plane."""
    return np.abs(spec.coeffs)


@lru_cache(maxsize=32)
def raised_cosine_window(
    shape: tuple[int, int], taper_fraction: float = 0.4
) -> np.ndarray:
    """Radial raised-cosine window for an (H, W) plane: 1 inside, cosine-
    tapered to 0 at the inscribed ellipse, 0 in the corners.

    Two shape choices matter for ring/sector sampling. The taper is a
    function of elliptical radius only, so the window's spectral kernel is
    isotropic; a separable (outer-product) taper would concentrate its
    kernel along the frequency axes and smear any strong step edge into
    horizontal and vertical spokes through the ring band, biasing whole
    sector columns at once. And only the outer ``taper_fraction`` of the
    radius is tapered, which keeps the kernel's mainlobe narrow; a
    full-radius taper bleeds strong cells across ring borders on small
    crops, where one ring is only a few DFT bins wide.
    """
    if not 0.0 < taper_fraction <= 1.0:
        raise ValueError(f"taper_fraction must lie in (0, 1], got {taper_fraction}")
    h, w = shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    ry, rx = max(cy, 0.5), max(cx, 0.5)
    yy = (np.arange(h) - cy) / ry
    xx = (np.arange(w) - cx) / rx
    rho = np.hypot(yy[:, None], xx[None, :])
    ramp = np.clip((rho - (1.0 - taper_fraction)) / taper_fraction, 0.0, None)
    win = np.where(rho < 1.0, np.cos(0.5 * math.pi * np.minimum(ramp, 1.0)) ** 2, 0.0)
    win.setflags(write=False)
    return win


@dataclass(frozen=True)
class CellGrid:
    """Sampled cell energies of one magnitude plane.

    ``energies[k, s]`` is the mean magnitude over the DFT bins of ring ``k``,
    sector ``s``. The bins form a partition of the annulus
    ``r_min <= r < r_max``; everything outside (including DC) is ignored.
    """

    layout: RingLayout
    energies: np.ndarray

    def __post_init__(self) -> None:
        arr = _frozen_array(self.energies, np.float64)
        expected = (self.layout.num_rings, self.layout.num_sectors)
        if arr.shape != expected:
            raise ValueError(f"energies must have shape {expected}, got {arr.shape}")
        if float(arr.min()) < 0.0:
            raise ValueError("cell energies must be nonnegative")
        object.__setattr__(self, "energies", arr)


@dataclass(frozen=True)
class CellGeometry:
    """Cached bin-to-cell assignment of the ring band for one plane size.

    The arrays index the band bins in a fixed order: ``rows``/``cols`` give
    their positions, ``ring_index``/``theta`` their polar coordinates, and
    ``cell_index`` their flat cell id ``ring * num_sectors + sector`` for the
    unrotated grid. ``partner`` maps each band bin to the index of its
    conjugate mirror bin (negated frequency), which always lies in the band.
    """

    width: int
    height: int
    layout: RingLayout
    rows: np.ndarray
    cols: np.ndarray
    ring_index: np.ndarray
    theta: np.ndarray
    cell_index: np.ndarray
    partner: np.ndarray
    bin_counts: np.ndarray

    @property
    def num_cells(self) -> int:
        return self.layout.num_cells

    def band_values(self, mag: np.ndarray) -> np.ndarray:
        """Magnitudes of the band bins, in geometry order."""
        return mag[self.rows, self.cols]

    def ring_values(self, mag: np.ndarray) -> list[np.ndarray]:
        """Band magnitudes grouped by ring; invariant under grid rotation."""
        values = self.band_values(mag)
        return [values[self.ring_index == k] for k in range(self.layout.num_rings)]

    def cell_ids(self, rotation_deg: float = 0.0) -> np.ndarray:
        """Flat cell id per band bin for a grid rotated CCW by ``rotation_deg``."""
        if rotation_deg == 0.0:
            return self.cell_index
        sectors = self.layout.num_sectors
        step = TWO_PI / sectors
        shifted = np.mod(self.theta - math.radians(rotation_deg), TWO_PI)
        sector = np.minimum((shifted / step).astype(np.int64), sectors - 1)
        return self.ring_index * sectors + sector

    def cell_counts(self, rotation_deg: float = 0.0) -> np.ndarray:
        """(num_rings, num_sectors) bin count per cell."""
        if rotation_deg == 0.0:
            return self.bin_counts
        return np.bincount(self.cell_ids(rotation_deg), minlength=self.num_cells).reshape(
            self.layout.num_rings, self.layout.num_sectors
        )

    def cell_means(self, mag: np.ndarray, rotation_deg: float = 0.0) -> np.ndarray:
        """(num_rings, num_sectors) mean band magnitude per cell.

        Cells that receive no bins at this rotation come out as 0; callers
        that must reject such grids check ``cell_counts`` first.
        """
        ids = self.cell_ids(rotation_deg)
        sums = np.bincount(ids, weights=self.band_values(mag), minlength=self.num_cells)
        counts = np.bincount(ids, minlength=self.num_cells)
        shape = (self.layout.num_rings, self.layout.num_sectors)
        return sums.reshape(shape) / np.maximum(counts.reshape(shape), 1)


@lru_cache(maxsize=64)
def cell_geometry(width: int, height: int, layout: RingLayout) -> CellGeometry:
    """Bin-to-cell assignment for ``layout`` on a ``width x height`` plane.

    Cached per (size, layout); the returned arrays are read-only.
    """
    if width < 2 or height < 2:
        raise GeometryError(f"plane must be at least 2x2, got {width}x{height}")
    cy, cx = height // 2, width // 2
    fy = (np.arange(height) - cy) / height
    fx = (np.arange(width) - cx) / width
    r = np.hypot(fy[:, None], fx[None, :])
    mask = (r >= layout.r_min) & (r < layout.r_max)
    rows, cols = np.nonzero(mask)
    if rows.size == 0:
        raise GeometryError(
            f"no DFT bins fall in the ring band for a {width}x{height} plane"
        )
    rr = r[rows, cols]
    span = layout.r_max - layout.r_min
    ring = np.minimum(
        ((rr - layout.r_min) / span * layout.num_rings).astype(np.int64),
        layout.num_rings - 1,
    )
    theta = np.mod(np.arctan2(fy[rows], fx[cols]), TWO_PI)
    step = TWO_PI / layout.num_sectors
    sector = np.minimum((theta / step).astype(np.int64), layout.num_sectors - 1)
    cell = ring * layout.num_sectors + sector
    counts = np.bincount(cell, minlength=layout.num_cells).reshape(
        layout.num_rings, layout.num_sectors
    )
    index_map = np.full((height, width), -1, dtype=np.int64)
    index_map[rows, cols] = np.arange(rows.size)
    partner = index_map[2 * cy - rows, 2 * cx - cols]
    if partner.min() < 0:
        raise GeometryError("ring band is not closed under conjugate mirroring")
    geo = CellGeometry(
        width=width,
        height=height,
        layout=layout,
        rows=_frozen_array(rows, np.int64),
        cols=_frozen_array(cols, np.int64),
        ring_index=_frozen_array(ring, np.int64),
        theta=_frozen_array(theta, np.float64),
        cell_index=_frozen_array(cell, np.int64),
        partner=_frozen_array(partner, np.int64),
        bin_counts=_frozen_array(counts, np.int64),
    )
    return geo


@lru_cache(maxsize=128)
def annulus_bins(
    width: int, height: int, r_lo: float, r_hi: float
) -> tuple[np.ndarray, np.ndarray]:
    """Read-only (rows, cols) of the DFT bins with ``r_lo <= r < r_hi``.

    Radii are normalized frequencies on a DC-centered plane, as everywhere
    else; DC itself is part of no annulus with ``r_lo > 0``.
    """
    cy, cx = height // 2, width // 2
    fy = (np.arange(height) - cy) / height
    fx = (np.arange(width) - cx) / width
    r = np.hypot(fy[:, None], fx[None, :])
    rows, cols = np.nonzero((r >= r_lo) & (r < r_hi))
    return _frozen_array(rows, np.int64), _frozen_array(cols, np.int64)


@lru_cache(maxsize=16)
def cell_mean_matrix(width: int, height: int, layout: RingLayout) -> np.ndarray:
    """(num_band_bins, num_cells) matrix turning band values into cell means.

    ``band_values @ cell_mean_matrix`` equals ``cell_means`` flattened; used
    for batched sampling of many planes at once.
    """
    geo = cell_geometry(width, height, layout)
    mat = np.zeros((geo.rows.size, geo.num_cells))
    counts = np.maximum(geo.bin_counts.reshape(-1)[geo.cell_index], 1)
    mat[np.arange(geo.rows.size), geo.cell_index] = 1.0 / counts
    mat.setflags(write=False)
    return mat


def sample_cells(
    mag: np.ndarray | Spectrum, layout: RingLayout, *, rotation_deg: float = 0.0
) -> CellGrid:
    """Mean band magnitude per ring/sector cell of a DC-centered plane.

    ``mag`` is a magnitude plane (or a Spectrum, whose magnitude is taken).
    Bins with ``r_min <= r < r_max`` are partitioned into cells; DC and bins
    outside the annulus are ignored. Raises GeometryError when some cell
    receives zero bins on this plane size.
    """
    if isinstance(mag, Spectrum):
        arr = magnitude_plane(mag)
    else:
        arr = np.asarray(mag, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"expected a 2-D magnitude plane, got shape {arr.shape}")
    geo = cell_geometry(arr.shape[1], arr.shape[0], layout)
    counts = geo.cell_counts(rotation_deg)
    if int(counts.min()) == 0:
        empty = int((counts == 0).sum())
        raise GeometryError(
            f"{empty} cell(s) receive no DFT bins on a {arr.shape[1]}x{arr.shape[0]} "
            f"plane; use a wider band or fewer cells"
        )
    return CellGrid(layout=layout, energies=geo.cell_means(arr, rotation_deg))
