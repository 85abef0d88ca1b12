"""Command-line front end for the watermarking pipeline.

Subcommands cover the full flow: pattern synthesis, digital embedding,
capture simulation, contour masking, background cleanup, detection,
threshold calibration, attacks, and benchmarking. Exit codes: 0 on success,
1 on usage errors (bad arguments, missing input files), 2 on processing
errors (a typed toolkit error while computing). ``detect`` exits 0 with
``present: false`` when no watermark is found; absence is a result, not an
error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .errors import DecodeError, DegenerateError, RingmarkError
from .model import DetectionReport, Payload, RingLayout, WatermarkSpec, bit_error_rate
from .codec import (
    DetectorConfig,
    calibrate_threshold,
    decode_payload,
    detect_nonblind,
    embed_digital,
    extract_sequence,
    find_working_strength,
    indicator_sequence,
    similarity,
    synthesize_pattern,
)
from .capture import CaptureParams, SubjectMask, clear_background, simulate_capture, subject_mask
from .attacks import AttackChain, apply_attack, run_benchmark, spectrum_snr
from .imgio import read_image, write_image
from .model import ImageBuffer


class _Parser(argparse.ArgumentParser):
    """Argparse parser whose usage errors exit with code 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _usage_fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def _load_json_file(path: str) -> dict[str, Any]:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _detector_from(args) -> DetectorConfig:
    """Detector settings from --config (whole-run or detector-only JSON)."""
    if getattr(args, "config", None):
        data = _load_json_file(args.config)
        if "detector" in data:
            data = data["detector"]
        return DetectorConfig.from_dict(data)
    return DetectorConfig()


def _capture_from(args) -> CaptureParams:
    if getattr(args, "params", None):
        data = _load_json_file(args.params)
        if "capture" in data:
            data = data["capture"]
        return CaptureParams.from_dict(data)
    return CaptureParams()


def _parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError as exc:
        raise ValueError(f"size must look like 640x480, got {text!r}") from exc


def _require_inputs(*paths: str) -> str | None:
    for p in paths:
        if p and not Path(p).exists():
            return f"input path does not exist: {p}"
    return None


def _cmd_gen_pattern(args) -> int:
    missing = _require_inputs(args.spec)
    if missing:
        return _usage_fail(missing)
    spec = WatermarkSpec.from_json(Path(args.spec))
    pattern = synthesize_pattern(spec, _parse_size(args.size))
    write_image(pattern, args.out)
    return 0


def _cmd_embed(args) -> int:
    missing = _require_inputs(args.cover, args.spec)
    if missing:
        return _usage_fail(missing)
    spec = WatermarkSpec.from_json(Path(args.spec))
    cover = read_image(args.cover)
    write_image(embed_digital(cover, spec), args.out)
    return 0


def _cmd_capture(args) -> int:
    missing = _require_inputs(args.scene, args.pattern, getattr(args, "params", None))
    if missing:
        return _usage_fail(missing)
    scene = read_image(args.scene)
    pattern = read_image(args.pattern)
    photo = simulate_capture(scene, pattern, _capture_from(args), seed=args.seed)
    write_image(photo, args.out)
    return 0


def _cmd_mask(args) -> int:
    missing = _require_inputs(args.photo)
    if missing:
        return _usage_fail(missing)
    photo = read_image(args.photo)
    mask = subject_mask(photo, sigma=args.sigma)
    write_image(ImageBuffer(mask.mask.astype(np.float64)), args.out)
    return 0


def _cmd_clear_bg(args) -> int:
    missing = _require_inputs(args.photo, args.mask)
    if missing:
        return _usage_fail(missing)
    photo = read_image(args.photo)
    mask_img = read_image(args.mask)
    if mask_img.channels != 1:
        return _usage_fail("mask image must be single-channel (PGM or gray PNG)")
    mask = SubjectMask.from_array(mask_img.pixels > 0.5)
    try:
        color = tuple(float(c) for c in args.color.split(","))
        if len(color) != 3:
            raise ValueError
    except ValueError:
        return _usage_fail(f"background color must be R,G,B in [0,1], got {args.color!r}")
    write_image(clear_background(photo, mask, color), args.out)
    return 0


def _cmd_detect(args) -> int:
    missing = _require_inputs(
        args.photo, args.spec, getattr(args, "original", None), getattr(args, "config", None)
    )
    if missing:
        return _usage_fail(missing)
    spec = WatermarkSpec.from_json(Path(args.spec))
    cfg = _detector_from(args)
    photo = read_image(args.photo)

    decoded = confidence = rotation = None
    try:
        decoded, confidence, rotation = decode_payload(
            photo, spec.layout, cfg, num_bits=len(spec.payload)
        )
    except DecodeError:
        pass

    try:
        snr: float | None = spectrum_snr(photo, spec)
    except DegenerateError:
        snr = math.inf

    if args.original:
        original = read_image(args.original)
        base = detect_nonblind(photo, original, spec, cfg)
        report = DetectionReport(
            threshold=base.threshold,
            present=base.present,
            cell_energies=base.cell_energies,
            similarity=base.similarity,
            decoded_bits=decoded,
            estimated_rotation_deg=rotation,
            snr_db=snr,
            decode_confidence=confidence,
        )
    else:
        from .spectral import cell_geometry, forward_dft, magnitude_plane

        mag = magnitude_plane(forward_dft(photo.blue_plane(), window=cfg.window))
        geo = cell_geometry(photo.width, photo.height, spec.layout)
        report = DetectionReport(
            threshold=cfg.threshold,
            present=decoded is not None,
            cell_energies=geo.cell_means(mag),
            similarity=None,
            decoded_bits=decoded,
            estimated_rotation_deg=rotation,
            snr_db=snr,
            decode_confidence=confidence,
        )
    text = report.to_json(args.out)
    print(text)
    return 0


def _cmd_calibrate(args) -> int:
    missing = _require_inputs(args.layout)
    if missing:
        return _usage_fail(missing)
    layout = RingLayout.from_dict(_load_json_file(args.layout))
    threshold = calibrate_threshold(
        layout, target_far=args.far, trials=args.trials, rng_seed=args.seed
    )
    result: dict[str, Any] = {
        "threshold": threshold,
        "target_far": args.far,
        "trials": args.trials,
        "seed": args.seed,
        "layout": layout.to_dict(),
    }
    if args.working_point:
        result["working_strength"] = find_working_strength(layout, threshold)
    text = json.dumps(result, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def _cmd_attack(args) -> int:
    missing = _require_inputs(args.photo)
    if missing:
        return _usage_fail(missing)
    chain = AttackChain.parse(args.chain)
    photo = read_image(args.photo)
    write_image(apply_attack(photo, chain, seed=args.seed), args.out)
    return 0


def _cmd_bench(args) -> int:
    corpus_dir = Path(args.corpus)
    if not corpus_dir.exists():
        return _usage_fail(f"corpus path does not exist: {args.corpus}")
    missing = _require_inputs(args.spec, getattr(args, "config", None))
    if missing:
        return _usage_fail(missing)
    if corpus_dir.is_dir():
        paths = sorted(
            p for p in corpus_dir.iterdir() if p.suffix.lower() in (".png", ".ppm", ".pgm")
        )
    else:
        paths = [corpus_dir]
    if not paths:
        return _usage_fail(f"no images found under {args.corpus}")
    spec = WatermarkSpec.from_json(Path(args.spec))
    chains = [AttackChain.parse(c) for c in args.chains]
    table = run_benchmark(
        [read_image(p) for p in paths],
        spec,
        chains,
        _detector_from(args),
        seed=args.seed,
        names=[p.stem for p in paths],
    )
    if args.out_csv:
        table.to_csv(args.out_csv)
    if args.out_json:
        table.to_json(args.out_json)
    if not args.out_csv and not args.out_json:
        print(table.to_json())
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="ringmark",
        description="Ring-structured DFT-magnitude watermarking toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-pattern", help="synthesize the payload's sinusoid pattern")
    p.add_argument("--spec", required=True, help="watermark spec JSON")
    p.add_argument("--size", required=True, help="output size as WxH, e.g. 567x390")
    p.add_argument("--out", required=True, help="output image (.png/.ppm/.pgm)")
    p.set_defaults(func=_cmd_gen_pattern)

    p = sub.add_parser("embed", help="embed the payload into a cover photo")
    p.add_argument("--cover", required=True, help="3-channel cover image")
    p.add_argument("--spec", required=True, help="watermark spec JSON")
    p.add_argument("--out", required=True, help="output image")
    p.set_defaults(func=_cmd_embed)

    p = sub.add_parser("capture", help="simulate a projector-camera capture")
    p.add_argument("--scene", required=True, help="3-channel scene reflectance image")
    p.add_argument("--pattern", required=True, help="projected pattern (1-channel)")
    p.add_argument("--params", help="capture params JSON")
    p.add_argument("--seed", type=int, default=0, help="camera noise seed")
    p.add_argument("--out", required=True, help="output image")
    p.set_defaults(func=_cmd_capture)

    p = sub.add_parser("mask", help="extract the subject mask via edge contours")
    p.add_argument("--photo", required=True)
    p.add_argument("--sigma", type=float, default=1.4, help="edge-detector smoothing sigma")
    p.add_argument("--out", required=True, help="output mask image (gray)")
    p.set_defaults(func=_cmd_mask)

    p = sub.add_parser("clear-bg", help="flatten everything outside the subject")
    p.add_argument("--photo", required=True)
    p.add_argument("--mask", required=True, help="gray mask image (255 = subject)")
    p.add_argument("--color", default="0.92,0.92,0.92", help="background fill R,G,B in [0,1]")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_clear_bg)

    p = sub.add_parser("detect", help="detect and decode the watermark")
    p.add_argument("--photo", required=True, help="image under test")
    p.add_argument("--original", help="unwatermarked original for correlation detection")
    p.add_argument("--spec", required=True, help="watermark spec JSON")
    p.add_argument("--config", help="detector config JSON")
    p.add_argument("--out", help="write the JSON report here as well")
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("calibrate", help="calibrate the detection threshold")
    p.add_argument("--layout", required=True, help="ring layout JSON")
    p.add_argument("--far", type=float, default=1e-3, help="target false-alarm rate")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--working-point", action="store_true", help="also sweep for the working-point strength")
    p.add_argument("--out", help="write the threshold JSON here as well")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("attack", help="apply an attack chain to a photo")
    p.add_argument("--photo", required=True)
    p.add_argument("--chain", required=True, help="e.g. 'rotate:10;printscan:1.0,0.01,1.1'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_attack)

    p = sub.add_parser("bench", help="attack/detect benchmark over a corpus")
    p.add_argument("--corpus", required=True, help="directory of cover images (or one image)")
    p.add_argument("--spec", required=True, help="watermark spec JSON")
    p.add_argument("--chains", nargs="*", default=[], help="attack chain strings; empty = clean run")
    p.add_argument("--config", help="detector config JSON")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-csv", help="CSV table path")
    p.add_argument("--out-json", help="JSON table path")
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return int(code) if code is not None else 0
    try:
        return args.func(args)
    except RingmarkError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
