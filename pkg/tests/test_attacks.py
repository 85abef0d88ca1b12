"""Attack grammar, geometric and occlusion attacks, and the benchmark harness."""

import json

import numpy as np
import pytest
import scipy.ndimage as ndi

from ringmark.attacks import (
    AttackChain,
    AttackStep,
    BenchRow,
    apply_attack,
    correct_geometry,
    printscan_image,
    resize_to,
    rotate_image,
    run_benchmark,
    scale_image,
    scratch_image,
    smear_image,
    spectrum_snr,
    trapezoid_image,
    untrapezoid_image,
)
from ringmark.codec import decode_payload, embed_digital
from ringmark.errors import DegenerateError, ParamError
from ringmark.model import DEFAULT_LAYOUT, ImageBuffer, Payload, WatermarkSpec
from ringmark.spectral import annulus_bins, cell_geometry, forward_dft, magnitude_plane
from ringmark.synthetic import procedural_cover

SMEAR_COLOR = (0.06, 0.05, 0.10)


def resize_spline(image: ImageBuffer, size: tuple[int, int]) -> ImageBuffer:
    """Cubic-spline resize, corner-aligned like resize_to.

    Measurement instrument only: restoring a scaled image with a higher-order
    kernel isolates the scaling attack's effect on cell energies from the
    tent-kernel aliasing a bilinear restore would add on top.
    """
    width, height = size
    h, w = image.height, image.width
    rows = np.linspace(0.0, h - 1.0, height)
    cols = np.linspace(0.0, w - 1.0, width)
    rows_in, cols_in = np.meshgrid(rows, cols, indexing="ij")
    planes = [
        ndi.map_coordinates(
            image.pixels[:, :, c], [rows_in, cols_in], order=3, mode="nearest"
        )
        for c in range(3)
    ]
    return ImageBuffer.clipped(np.stack(planes, axis=-1))


class TestChainGrammar:
    def test_parse_single_step(self):
        chain = AttackChain.parse("rotate:10")
        assert chain.steps == (AttackStep("rotate", (10.0,)),)

    def test_parse_multi_step_order(self):
        chain = AttackChain.parse("rotate:10;scale:0.5;printscan:1,0.01,1.1")
        assert [s.name for s in chain.steps] == ["rotate", "scale", "printscan"]
        assert chain.steps[2].args == (1.0, 0.01, 1.1)

    def test_parse_empty_and_whitespace(self):
        assert AttackChain.parse("").steps == ()
        assert AttackChain.parse("  ").steps == ()
        assert AttackChain.parse("").format() == ""

    def test_format_canonicalizes_numbers(self):
        assert AttackChain.parse("printscan:1.0,0.01,1.1").format() == "printscan:1,0.01,1.1"
        assert AttackChain.parse("scratch:18,9").format() == "scratch:18,9"

    def test_parse_format_round_trip(self):
        for text in ("rotate:10", "scale:0.5;smear:14,36", "trapezoid:0.2;scratch:18,9"):
            chain = AttackChain.parse(text)
            assert AttackChain.parse(chain.format()) == chain

    def test_unknown_step_rejected(self):
        with pytest.raises(ParamError):
            AttackChain.parse("sharpen:2")

    def test_wrong_arity_rejected(self):
        with pytest.raises(ParamError):
            AttackChain.parse("rotate:10,20")
        with pytest.raises(ParamError):
            AttackChain.parse("scratch:18")

    def test_bad_number_rejected(self):
        with pytest.raises(ParamError):
            AttackChain.parse("rotate:fast")

    @pytest.mark.parametrize(
        "text",
        [
            "rotate:50",
            "rotate:-46",
            "scale:0.2",
            "scale:4.5",
            "trapezoid:-0.1",
            "trapezoid:0.6",
            "scratch:-1,5",
            "scratch:2.5,5",
            "scratch:5,0.5",
            "smear:-1,5",
            "smear:1.5,5",
            "smear:5,0.5",
            "printscan:-1,0.01,1.1",
            "printscan:1,-0.01,1.1",
            "printscan:1,0.01,0",
        ],
    )
    def test_range_validation(self, text):
        with pytest.raises(ParamError):
            AttackChain.parse(text)


class TestGeometry:
    def test_empty_chain_is_identity(self, marked567):
        out = apply_attack(marked567, AttackChain(()), seed=7)
        assert np.array_equal(out.pixels, marked567.pixels)

    def test_quarter_turn_is_exact(self, cover567):
        square = ImageBuffer(cover567.pixels[:256, :256].copy())
        turned = rotate_image(square, 90.0)
        ref = np.stack(
            [np.rot90(square.pixels[:, :, c]) for c in range(3)], axis=-1
        )
        assert np.abs(turned.pixels - ref).max() == 0.0

    def test_resize_to_same_size_is_noop(self, cover567):
        assert resize_to(cover567, cover567.size) is cover567
        assert scale_image(cover567, 1.0) is cover567

    def test_resize_to_rejects_empty_target(self, cover567):
        with pytest.raises(ParamError):
            resize_to(cover567, (0, 50))

    def test_scale_rounds_output_dims(self, cover567):
        assert scale_image(cover567, 0.5).size == (284, 195)
        assert scale_image(cover567, 2.0).size == (1134, 780)

    def test_trapezoid_zero_strength_is_identity(self, cover567):
        out = trapezoid_image(cover567, 0.0)
        assert np.array_equal(out.pixels, cover567.pixels)

    def test_trapezoid_round_trip_interior(self, cover567):
        again = untrapezoid_image(trapezoid_image(cover567, 0.2), 0.2)
        margin = int(0.12 * cover567.width)
        diff = np.abs(
            again.pixels[10:-10, margin:-margin]
            - cover567.pixels[10:-10, margin:-margin]
        )
        assert diff.mean() < 0.01
        assert np.percentile(diff, 99) < 0.03

    def test_chain_composes_left_to_right(self, marked567):
        chain = AttackChain.parse("rotate:10;scale:0.5")
        composed = apply_attack(marked567, chain, seed=99)
        manual = scale_image(rotate_image(marked567, 10.0), 0.5)
        assert np.array_equal(composed.pixels, manual.pixels)


class TestOcclusion:
    def test_scratch_paints_black_lines(self, cover567):
        out = scratch_image(cover567, 6, 3.0, np.random.default_rng(5))
        changed = np.any(out.pixels != cover567.pixels, axis=-1)
        assert changed.any()
        assert changed.mean() < 0.25
        assert np.all(out.pixels[changed] == 0.0)

    def test_scratch_is_seed_deterministic(self, cover567):
        a = scratch_image(cover567, 6, 3.0, np.random.default_rng(5))
        b = scratch_image(cover567, 6, 3.0, np.random.default_rng(5))
        c = scratch_image(cover567, 6, 3.0, np.random.default_rng(6))
        assert np.array_equal(a.pixels, b.pixels)
        assert not np.array_equal(a.pixels, c.pixels)

    def test_scratch_zero_count_is_identity(self, cover567):
        out = scratch_image(cover567, 0, 3.0, np.random.default_rng(5))
        assert np.array_equal(out.pixels, cover567.pixels)

    def test_smear_paints_ink_color(self, cover567):
        out = smear_image(cover567, 5, 12.0, np.random.default_rng(5))
        changed = np.any(out.pixels != cover567.pixels, axis=-1)
        assert changed.any()
        assert np.all(out.pixels[changed] == np.asarray(SMEAR_COLOR))

    def test_smear_is_seed_deterministic(self, cover567):
        a = smear_image(cover567, 5, 12.0, np.random.default_rng(5))
        b = smear_image(cover567, 5, 12.0, np.random.default_rng(5))
        assert np.array_equal(a.pixels, b.pixels)

    def test_excessive_coverage_rejected(self):
        tiny = procedural_cover(120, 90, seed=7)
        with pytest.raises(ParamError):
            apply_attack(tiny, AttackChain.parse("scratch:400,30"), seed=5)
        with pytest.raises(ParamError):
            smear_image(tiny, 200, 40.0, np.random.default_rng(5))

    def test_apply_attack_is_seed_deterministic(self, marked567):
        chain = AttackChain.parse("scratch:6,3")
        a = apply_attack(marked567, chain, seed=9)
        b = apply_attack(marked567, chain, seed=9)
        c = apply_attack(marked567, chain, seed=10)
        assert np.array_equal(a.pixels, b.pixels)
        assert not np.array_equal(a.pixels, c.pixels)


class TestPrintScan:
    def test_output_quantized_to_8_bits(self, cover567):
        out = printscan_image(cover567, 1.0, 0.01, 1.1, np.random.default_rng(3))
        levels = out.pixels * 255.0
        assert np.allclose(levels, np.round(levels), atol=1e-7)

    def test_noiseless_blurless_is_pure_quantization(self, cover567):
        out = printscan_image(cover567, 0.0, 0.0, 1.0, np.random.default_rng(3))
        assert np.array_equal(out.pixels, np.round(cover567.pixels * 255.0) / 255.0)

    def test_seed_determinism(self, cover567):
        a = printscan_image(cover567, 1.0, 0.01, 1.1, np.random.default_rng(3))
        b = printscan_image(cover567, 1.0, 0.01, 1.1, np.random.default_rng(3))
        assert np.array_equal(a.pixels, b.pixels)

    def test_channel_noise_concentrates_below_band(self, cover567):
        # Measured on an unwatermarked cover so blur attenuation of an
        # embedded pattern cannot inflate the in-band difference.
        attacked = apply_attack(
            cover567, AttackChain.parse("printscan:1.0,0.01,1.1"), seed=3
        )
        before = magnitude_plane(forward_dft(cover567.blue_plane()))
        after = magnitude_plane(forward_dft(attacked.blue_plane()))
        low = annulus_bins(cover567.width, cover567.height, 0.0, 0.05)
        band = annulus_bins(
            cover567.width, cover567.height,
            DEFAULT_LAYOUT.r_min, DEFAULT_LAYOUT.r_max,
        )
        low_change = np.abs(after[low] - before[low]).mean()
        band_change = np.abs(after[band] - before[band]).mean()
        assert low_change > 1.5 * band_change


class TestCorrectGeometry:
    def test_zero_correction_is_exact(self, marked567):
        out = correct_geometry(marked567, rotation_deg=0.0, trapezoid_strength=0.0)
        assert np.abs(out.pixels - marked567.pixels).max() == 0.0

    def test_parameter_validation(self, marked567):
        with pytest.raises(ParamError):
            correct_geometry(marked567, rotation_deg=50.0)
        with pytest.raises(ParamError):
            correct_geometry(marked567, trapezoid_strength=0.6)

    def test_recovers_rotated_payload(self, marked567, payload24, detector):
        tilted = rotate_image(marked567, 10.0)
        fixed = correct_geometry(tilted, rotation_deg=10.0)
        decoded, confidence, rotation = decode_payload(
            fixed, DEFAULT_LAYOUT, detector, num_bits=24
        )
        assert decoded == payload24
        assert confidence > 5.0
        assert rotation == 0.0

    def test_recovers_keystoned_payload(self, marked567, payload24, detector):
        keyed = trapezoid_image(marked567, 0.2)
        fixed = correct_geometry(keyed, trapezoid_strength=0.2)
        decoded, confidence, rotation = decode_payload(
            fixed, DEFAULT_LAYOUT, detector, num_bits=24
        )
        assert decoded == payload24
        assert confidence > 6.0
        assert rotation == 0.0


class TestScaleInvariance:
    @pytest.mark.parametrize("factor", [0.5, 0.75, 1.5, 2.0])
    def test_cell_energies_survive_scaling(self, marked567, factor):
        geo = cell_geometry(marked567.width, marked567.height, DEFAULT_LAYOUT)
        base = geo.cell_means(
            magnitude_plane(forward_dft(marked567.blue_plane()))
        ).reshape(-1)
        restored = resize_spline(scale_image(marked567, factor), marked567.size)
        cells = geo.cell_means(
            magnitude_plane(forward_dft(restored.blue_plane()))
        ).reshape(-1)
        rel_change = np.abs(cells - base) / base
        assert rel_change.max() < 0.20
        assert rel_change.mean() < 0.10

    @pytest.mark.parametrize("factor", [0.5, 0.75, 1.5, 2.0])
    def test_payload_survives_bilinear_round_trip(
        self, marked567, payload24, detector, factor
    ):
        back = resize_to(scale_image(marked567, factor), marked567.size)
        decoded, confidence, _ = decode_payload(
            back, DEFAULT_LAYOUT, detector, num_bits=24
        )
        assert decoded == payload24
        assert confidence > 5.0


class TestSpectrumSnr:
    def test_attack_lowers_snr_but_not_below_zero(self, marked567, spec64):
        clean = spectrum_snr(marked567, spec64)
        attacked = apply_attack(
            marked567, AttackChain.parse("printscan:1.0,0.01,1.1"), seed=3
        )
        degraded = spectrum_snr(attacked, spec64)
        assert clean > degraded > 0.0

    def test_all_ones_payload_has_no_noise_floor(self, cover567):
        spec = WatermarkSpec(
            layout=DEFAULT_LAYOUT, payload=Payload.from_string("1" * 24), strength=64.0
        )
        with pytest.raises(DegenerateError):
            spectrum_snr(embed_digital(cover567, spec), spec)


@pytest.fixture(scope="module")
def small_corpus():
    return [procedural_cover(192, 132, seed=s) for s in (3, 4)]


@pytest.fixture(scope="module")
def bench_table(small_corpus, spec64, detector):
    chains = [AttackChain(()), AttackChain.parse("rotate:5")]
    return run_benchmark(small_corpus, spec64, chains, detector, seed=5)


class TestBenchmark:
    def test_row_per_image_and_chain(self, bench_table):
        assert len(bench_table.rows) == 4
        assert sorted({r.chain for r in bench_table.rows}) == ["clean", "rotate:5"]
        assert sorted({r.image for r in bench_table.rows}) == ["img000", "img001"]

    def test_clean_rows_decode_perfectly(self, bench_table):
        for row in bench_table.rows:
            assert row.present is True
            assert row.error == ""
            if row.chain == "clean":
                assert row.ber == 0.0
                assert row.snr_db > 0.0

    def test_aggregates_summarize_by_chain(self, bench_table):
        agg = {a["chain"]: a for a in bench_table.aggregates}
        assert set(agg) == {"clean", "rotate:5"}
        clean = agg["clean"]
        assert clean["rows"] == 2
        assert clean["detect_rate"] == 1.0
        assert clean["mean_ber"] == 0.0
        assert clean["errors"] == 0

    def test_run_is_seed_deterministic(self, small_corpus, spec64, detector):
        chains = [AttackChain.parse("scratch:6,3")]
        first = run_benchmark(small_corpus[:1], spec64, chains, detector, seed=5)
        second = run_benchmark(small_corpus[:1], spec64, chains, detector, seed=5)
        assert first.to_json() == second.to_json()

    def test_unmarked_image_yields_decode_error_row(
        self, small_corpus, payload24, detector
    ):
        spec = WatermarkSpec(layout=DEFAULT_LAYOUT, payload=payload24, strength=0.0)
        table = run_benchmark(small_corpus[:1], spec, [], detector, seed=5)
        row = table.rows[0]
        assert row.chain == "clean"
        assert row.present is False
        assert row.ber is None
        assert row.error == "DecodeError"
        assert row.similarity is not None

    def test_failing_attack_yields_error_row(self, spec64, detector):
        tiny = procedural_cover(120, 90, seed=7)
        chains = [AttackChain.parse("scratch:400,30")]
        table = run_benchmark([tiny], spec64, chains, detector, seed=5)
        row = table.rows[0]
        assert row.error == "ParamError"
        assert row.present is None
        assert row.ber is None
        assert row.similarity is None
        assert row.snr_db is None
        agg = table.aggregates[0]
        assert agg["errors"] == 1
        assert agg["detect_rate"] is None

    def test_unbounded_snr_serialization(self, small_corpus, detector, tmp_path):
        spec = WatermarkSpec(
            layout=DEFAULT_LAYOUT, payload=Payload.from_string("1" * 24), strength=64.0
        )
        table = run_benchmark(small_corpus[:1], spec, [], detector, seed=5)
        row = table.rows[0]
        assert row.snr_db == float("inf")
        record = row.to_dict()
        assert record["snr_db"] is None
        assert record["snr_db_unbounded"] is True
        csv_path = tmp_path / "bench.csv"
        table.to_csv(csv_path)
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0] == "image,chain,present,ber,similarity,snr_db,error"
        assert lines[1].split(",")[5] == "inf"

    def test_json_round_trip(self, bench_table, tmp_path):
        path = tmp_path / "bench.json"
        text = bench_table.to_json(path)
        on_disk = json.loads(path.read_text())
        assert on_disk == json.loads(text)
        assert len(on_disk["rows"]) == 4
        assert {r["chain"] for r in on_disk["rows"]} == {"clean", "rotate:5"}

    def test_row_dict_shape(self):
        row = BenchRow(
            image="img000",
            chain="clean",
            present=True,
            ber=0.0,
            similarity=5.1,
            snr_db=8.5,
            error="",
        )
        assert row.to_dict() == {
            "image": "img000",
            "chain": "clean",
            "present": True,
            "ber": 0.0,
            "similarity": 5.1,
            "snr_db": 8.5,
            "snr_db_unbounded": False,
            "error": "",
        }
