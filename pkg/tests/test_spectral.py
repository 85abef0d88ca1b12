"""DFT plumbing against a naive reference, plus ring/sector geometry."""

import math

import numpy as np
import pytest

from ringmark.errors import GeometryError, ShapeError, SymmetryError
from ringmark.model import DEFAULT_LAYOUT, ImageBuffer, RingLayout, Spectrum
from ringmark.spectral import (
    annulus_bins,
    cell_geometry,
    cell_mean_matrix,
    forward_dft,
    inverse_dft,
    magnitude_plane,
    raised_cosine_window,
    sample_cells,
)


def naive_dft(plane: np.ndarray) -> np.ndarray:
    """Direct O(N^4) DFT summation, DC-centered; the oracle for forward_dft."""
    h, w = plane.shape
    out = np.zeros((h, w), dtype=np.complex128)
    ys, xs = np.arange(h), np.arange(w)
    for v in range(h):
        for u in range(w):
            phase = np.exp(
                -2j * math.pi * (np.add.outer(v * ys / h, u * xs / w))
            )
            out[v, u] = np.sum(plane * phase)
    return np.fft.fftshift(out)


class TestForwardDft:
    @pytest.mark.parametrize("size", [(8, 8), (16, 16)])
    def test_matches_naive_summation(self, size):
        rng = np.random.default_rng(42)
        plane = rng.random(size)
        fast = forward_dft(plane).coeffs
        slow = naive_dft(plane)
        assert np.max(np.abs(fast - slow)) < 1e-9

    def test_matches_naive_on_non_square(self):
        rng = np.random.default_rng(7)
        plane = rng.random((6, 10))
        assert np.max(np.abs(forward_dft(plane).coeffs - naive_dft(plane))) < 1e-9

    def test_parseval(self):
        rng = np.random.default_rng(3)
        plane = rng.random((24, 17))
        spec = forward_dft(plane)
        spatial = float(np.sum(plane**2))
        spectral = float(np.sum(np.abs(spec.coeffs) ** 2)) / plane.size
        assert abs(spatial - spectral) <= 1e-6 * spatial

    def test_impulse_has_flat_magnitude(self):
        plane = np.zeros((8, 8))
        plane[0, 0] = 1.0
        assert np.allclose(magnitude_plane(forward_dft(plane)), 1.0)

    def test_constant_concentrates_at_dc(self):
        spec = forward_dft(np.full((6, 8), 0.25))
        mag = magnitude_plane(spec)
        assert mag[spec.dc_index] == pytest.approx(0.25 * 48)
        off_dc = mag.copy()
        off_dc[spec.dc_index] = 0.0
        assert np.max(off_dc) < 1e-9

    def test_pure_cosine_peaks_at_its_frequency(self):
        h = w = 16
        k = 3
        x = np.arange(w)
        plane = np.tile(0.5 + 0.5 * np.cos(2 * math.pi * k * x / w), (h, 1))
        spec = forward_dft(plane)
        mag = magnitude_plane(spec)
        cy, cx = spec.dc_index
        assert mag[cy, cx + k] == pytest.approx(0.25 * h * w)
        assert mag[cy, cx - k] == pytest.approx(0.25 * h * w)
        mag_rest = mag.copy()
        mag_rest[cy, [cx - k, cx, cx + k]] = 0.0
        assert np.max(mag_rest) < 1e-9

    def test_accepts_single_channel_buffer_only(self):
        buf = ImageBuffer(np.zeros((4, 4, 3)))
        with pytest.raises(ShapeError):
            forward_dft(buf)
        forward_dft(ImageBuffer(np.zeros((4, 4))))

    def test_rejects_non_planes(self):
        with pytest.raises(ShapeError):
            forward_dft(np.zeros(5))
        with pytest.raises(ShapeError):
            forward_dft(np.zeros((0, 4)))

    def test_rot90_magnitude_covariance_odd_size(self):
        rng = np.random.default_rng(5)
        plane = rng.random((9, 9))
        m0 = magnitude_plane(forward_dft(plane))
        m90 = magnitude_plane(forward_dft(np.rot90(plane)))
        assert np.max(np.abs(np.rot90(m0) - m90)) < 1e-9


class TestInverseDft:
    def test_round_trip(self):
        rng = np.random.default_rng(11)
        plane = rng.random((12, 18))
        again = inverse_dft(forward_dft(plane))
        assert np.max(np.abs(again - plane)) < 1e-9

    def test_rejects_asymmetric_spectrum(self):
        coeffs = np.zeros((8, 8), dtype=complex)
        coeffs[2, 3] = 5.0j
        with pytest.raises(SymmetryError):
            inverse_dft(Spectrum(coeffs))

    def test_result_is_not_clamped(self):
        plane = np.full((4, 4), 0.5)
        scaled = inverse_dft(Spectrum(forward_dft(plane).coeffs * 4.0))
        assert np.allclose(scaled, 2.0)


class TestWindow:
    def test_shape_and_range(self):
        win = raised_cosine_window((33, 45))
        assert win.shape == (33, 45)
        assert win.min() >= 0.0 and win.max() <= 1.0

    def test_center_is_one_corners_are_zero(self):
        win = raised_cosine_window((41, 41))
        assert win[20, 20] == pytest.approx(1.0)
        assert win[0, 0] == 0.0
        assert win[-1, -1] == 0.0

    def test_inner_plateau_is_exactly_one(self):
        taper = 0.4
        win = raised_cosine_window((81, 81), taper)
        cy = cx = 40
        yy = (np.arange(81) - cy) / cx
        rho = np.hypot(yy[:, None], yy[None, :])
        plateau = rho <= (1.0 - taper) - 0.05
        assert np.all(win[plateau] == 1.0)

    def test_taper_is_radial(self):
        win = raised_cosine_window((61, 61))
        center = 30
        # Same elliptical radius on both axes sees the same window value.
        assert win[center, center + 25] == pytest.approx(win[center + 25, center])

    def test_rejects_bad_taper(self):
        for bad in (0.0, -0.1, 1.5):
            with pytest.raises(ValueError):
                raised_cosine_window((8, 8), bad)

    def test_cached_and_read_only(self):
        a = raised_cosine_window((16, 16))
        assert raised_cosine_window((16, 16)) is a
        with pytest.raises(ValueError):
            a[0, 0] = 1.0

    def test_windowed_transform_matches_manual(self):
        rng = np.random.default_rng(2)
        plane = rng.random((20, 30))
        manual = forward_dft(plane * raised_cosine_window((20, 30))).coeffs
        assert np.array_equal(forward_dft(plane, window=True).coeffs, manual)


class TestCellGeometry:
    def test_band_partition_is_exact(self):
        geo = cell_geometry(129, 129, DEFAULT_LAYOUT)
        assert geo.rows.shape == geo.cell_index.shape
        assert int(geo.bin_counts.sum()) == geo.rows.size
        # Every band bin lands in exactly one cell of the declared grid.
        assert geo.cell_index.min() >= 0
        assert geo.cell_index.max() < DEFAULT_LAYOUT.num_cells

    def test_band_radii_in_declared_range(self):
        geo = cell_geometry(100, 60, DEFAULT_LAYOUT)
        fy = (geo.rows - 30) / 60
        fx = (geo.cols - 50) / 100
        r = np.hypot(fy, fx)
        assert np.all(r >= DEFAULT_LAYOUT.r_min)
        assert np.all(r < DEFAULT_LAYOUT.r_max)

    def test_partner_is_a_conjugate_involution(self):
        geo = cell_geometry(96, 64, DEFAULT_LAYOUT)
        p = geo.partner
        assert np.array_equal(p[p], np.arange(p.size))
        # The partner bin is the mirrored frequency.
        cy, cx = 32, 48
        assert np.array_equal(geo.rows[p], 2 * cy - geo.rows)
        assert np.array_equal(geo.cols[p], 2 * cx - geo.cols)

    def test_partner_sits_in_opposite_sector(self):
        layout = DEFAULT_LAYOUT
        geo = cell_geometry(129, 129, layout)
        sector = geo.cell_index % layout.num_sectors
        partner_sector = sector[geo.partner]
        half = layout.num_sectors // 2
        assert np.all((sector + half) % layout.num_sectors == partner_sector)

    def test_rotation_by_one_sector_step_shifts_sectors(self):
        layout = DEFAULT_LAYOUT
        geo = cell_geometry(129, 129, layout)
        step = 360.0 / layout.num_sectors
        sec0 = geo.cell_ids(0.0) % layout.num_sectors
        sec1 = geo.cell_ids(step) % layout.num_sectors
        assert np.array_equal(sec1, (sec0 - 1) % layout.num_sectors)

    def test_zero_rotation_reuses_cached_index(self):
        geo = cell_geometry(64, 64, DEFAULT_LAYOUT)
        assert geo.cell_ids(0.0) is geo.cell_index

    def test_cell_means_match_direct_loop(self):
        rng = np.random.default_rng(9)
        mag = rng.random((80, 120))
        geo = cell_geometry(120, 80, DEFAULT_LAYOUT)
        means = geo.cell_means(mag).reshape(-1)
        band = mag[geo.rows, geo.cols]
        for cell in range(geo.num_cells):
            sel = geo.cell_index == cell
            assert means[cell] == pytest.approx(band[sel].mean())

    def test_cell_mean_matrix_agrees(self):
        rng = np.random.default_rng(10)
        mag = rng.random((66, 90))
        geo = cell_geometry(90, 66, DEFAULT_LAYOUT)
        via_matrix = geo.band_values(mag) @ cell_mean_matrix(90, 66, DEFAULT_LAYOUT)
        assert np.allclose(via_matrix, geo.cell_means(mag).reshape(-1))

    def test_ring_values_group_by_ring(self):
        rng = np.random.default_rng(12)
        mag = rng.random((70, 70))
        geo = cell_geometry(70, 70, DEFAULT_LAYOUT)
        grouped = geo.ring_values(mag)
        assert len(grouped) == DEFAULT_LAYOUT.num_rings
        assert sum(g.size for g in grouped) == geo.rows.size

    def test_cached_per_size(self):
        assert cell_geometry(64, 48, DEFAULT_LAYOUT) is cell_geometry(64, 48, DEFAULT_LAYOUT)

    def test_rejects_degenerate_planes(self):
        with pytest.raises(GeometryError):
            cell_geometry(1, 50, DEFAULT_LAYOUT)
        narrow = RingLayout(r_min=0.2, r_max=0.201, num_rings=1, num_sectors=2)
        with pytest.raises(GeometryError):
            cell_geometry(4, 4, narrow)


class TestAnnulusBins:
    def test_bins_lie_in_range(self):
        rows, cols = annulus_bins(100, 80, 0.05, 0.08)
        r = np.hypot((rows - 40) / 80, (cols - 50) / 100)
        assert np.all((r >= 0.05) & (r < 0.08))

    def test_disjoint_from_band(self):
        geo = cell_geometry(100, 80, DEFAULT_LAYOUT)
        rows, cols = annulus_bins(100, 80, 0.05, DEFAULT_LAYOUT.r_min)
        band = set(zip(geo.rows.tolist(), geo.cols.tolist()))
        assert band.isdisjoint(zip(rows.tolist(), cols.tolist()))


class TestSampleCells:
    def test_matches_geometry_means(self):
        rng = np.random.default_rng(14)
        mag = rng.random((60, 100))
        grid = sample_cells(mag, DEFAULT_LAYOUT)
        geo = cell_geometry(100, 60, DEFAULT_LAYOUT)
        assert np.allclose(grid.energies, geo.cell_means(mag))

    def test_accepts_spectrum(self):
        rng = np.random.default_rng(15)
        plane = rng.random((60, 60))
        spec = forward_dft(plane)
        a = sample_cells(spec, DEFAULT_LAYOUT)
        b = sample_cells(magnitude_plane(spec), DEFAULT_LAYOUT)
        assert np.allclose(a.energies, b.energies)

    def test_rejects_empty_cells(self):
        mag = np.ones((24, 24))
        with pytest.raises(GeometryError):
            sample_cells(mag, RingLayout(r_min=0.1, r_max=0.2, num_rings=6, num_sectors=16))

    def test_rejects_non_plane(self):
        with pytest.raises(ShapeError):
            sample_cells(np.ones(12), DEFAULT_LAYOUT)
