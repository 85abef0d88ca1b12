"""Attack harness: geometric warps, occlusions, print-scan, SNR, benchmark.

Attacks are described by a compact text grammar, e.g.
``rotate:10;printscan:1.0,0.01,1.1``: semicolon-separated steps, each a name
with comma-separated numeric arguments. Positive rotation angles turn the
image counter-clockwise as displayed. Warps interpolate bilinearly and fill
uncovered pixels with the border median color.

Detection after an attack happens at the original reference size: whatever
an attack does to the canvas, the harness resizes the result back before
decoding, the way a rescanned document lands on a fixed scanner raster.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from scipy import ndimage as ndi

from .errors import DecodeError, DegenerateError, ParamError, RingmarkError
from .model import DetectionReport, ImageBuffer, Payload, WatermarkSpec, bit_error_rate
from .spectral import cell_geometry, forward_dft, magnitude_plane
from .codec import (
    DetectorConfig,
    decode_payload,
    detect_nonblind,
    embed_digital,
    pair_cell_indices,
)

_STEP_ARITY = {
    "rotate": 1,
    "scale": 1,
    "trapezoid": 1,
    "scratch": 2,
    "smear": 2,
    "printscan": 3,
}


@dataclass(frozen=True)
class AttackStep:
    """One named attack with numeric arguments, validated on construction."""

    name: str
    args: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "args", tuple(float(a) for a in self.args))
        arity = _STEP_ARITY.get(self.name)
        if arity is None:
            known = ", ".join(sorted(_STEP_ARITY))
            raise ParamError(f"unknown attack {self.name!r}; known: {known}")
        if len(self.args) != arity:
            raise ParamError(
                f"{self.name} takes {arity} argument(s), got {len(self.args)}"
            )
        self._check_ranges()

    def _check_ranges(self) -> None:
        name, args = self.name, self.args
        if name == "rotate" and not -45.0 <= args[0] <= 45.0:
            raise ParamError(f"rotation angle must lie in [-45, 45], got {args[0]}")
        if name == "scale" and not 0.25 <= args[0] <= 4.0:
            raise ParamError(f"scale factor must lie in [0.25, 4], got {args[0]}")
        if name == "trapezoid" and not 0.0 <= args[0] <= 0.5:
            raise ParamError(f"trapezoid strength must lie in [0, 0.5], got {args[0]}")
        if name == "scratch":
            if args[0] < 0 or args[0] != int(args[0]):
                raise ParamError(f"scratch count must be a whole number >= 0, got {args[0]}")
            if args[1] < 1:
                raise ParamError(f"scratch width must be >= 1 px, got {args[1]}")
        if name == "smear":
            if args[0] < 0 or args[0] != int(args[0]):
                raise ParamError(f"smear blob count must be a whole number >= 0, got {args[0]}")
            if args[1] < 1:
                raise ParamError(f"smear radius must be >= 1 px, got {args[1]}")
        if name == "printscan":
            blur, noise, gamma = args
            if blur < 0:
                raise ParamError(f"blur sigma must be >= 0, got {blur}")
            if noise < 0:
                raise ParamError(f"noise sigma must be >= 0, got {noise}")
            if gamma <= 0:
                raise ParamError(f"gamma must be > 0, got {gamma}")

    def format(self) -> str:
        return f"{self.name}:{','.join(_fmt_num(a) for a in self.args)}" if self.args else self.name


def _fmt_num(x: float) -> str:
    return str(int(x)) if x == int(x) else repr(x)


@dataclass(frozen=True)
class AttackChain:
    """Ordered attack steps applied left to right."""

    steps: tuple[AttackStep, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))

    @classmethod
    def parse(cls, text: str) -> "AttackChain":
        """Parse the ``name:a,b;name:c`` grammar; blank text is the empty chain."""
        text = text.strip()
        if not text:
            return cls(())
        steps = []
        for part in text.split(";"):
            part = part.strip()
            if not part:
                continue
            name, _, argtext = part.partition(":")
            name = name.strip()
            try:
                args = tuple(float(a) for a in argtext.split(",")) if argtext.strip() else ()
            except ValueError as exc:
                raise ParamError(f"bad arguments in attack step {part!r}") from exc
            steps.append(AttackStep(name=name, args=args))
        return cls(tuple(steps))

    def format(self) -> str:
        """Inverse of parse; the empty chain formats as ''. """
        return ";".join(step.format() for step in self.steps)


def _border_fill(pixels: np.ndarray) -> np.ndarray:
    """Median color of the 1-px border, the fill for uncovered warp output."""
    edges = np.concatenate(
        [pixels[0], pixels[-1], pixels[:, 0], pixels[:, -1]], axis=0
    )
    return np.median(edges, axis=0)


def _warp_plane(plane: np.ndarray, rows_in: np.ndarray, cols_in: np.ndarray, cval: float) -> np.ndarray:
    # Snap coordinates a rounding error away from the lattice onto it, so
    # lattice-preserving warps (a 90-degree turn) stay exact instead of
    # sampling the fill value at coordinate -1e-16.
    rows_r = np.round(rows_in)
    cols_r = np.round(cols_in)
    rows_in = np.where(np.abs(rows_in - rows_r) < 1e-9, rows_r, rows_in)
    cols_in = np.where(np.abs(cols_in - cols_r) < 1e-9, cols_r, cols_in)
    return ndi.map_coordinates(
        plane, [rows_in, cols_in], order=1, mode="constant", cval=cval
    )


def _per_channel(
    image: ImageBuffer, fn: Callable[[np.ndarray, float], np.ndarray]
) -> ImageBuffer:
    fill = np.atleast_1d(_border_fill(image.pixels))
    if image.channels == 1:
        return ImageBuffer.clipped(fn(image.pixels, float(fill[0])))
    out = np.stack(
        [fn(image.pixels[:, :, c], float(fill[c])) for c in range(3)], axis=-1
    )
    return ImageBuffer.clipped(out)


def rotate_image(image: ImageBuffer, angle_deg: float) -> ImageBuffer:
    """Rotate counter-clockwise about the exact image center, same canvas.

    Bilinear interpolation; uncovered corners take the border median color.
    A 90-degree rotation of a square image is an exact index permutation.
    """
    h, w = image.height, image.width
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    rad = math.radians(angle_deg)
    cos_t, sin_t = math.cos(rad), math.sin(rad)
    rows_out, cols_out = np.mgrid[0:h, 0:w].astype(np.float64)
    dy, dx = rows_out - cy, cols_out - cx
    rows_in = cy + cos_t * dy + sin_t * dx
    cols_in = cx - sin_t * dy + cos_t * dx
    return _per_channel(image, lambda p, f: _warp_plane(p, rows_in, cols_in, f))


def resize_to(image: ImageBuffer, size: tuple[int, int]) -> ImageBuffer:
    """Bilinear resize to an exact (width, height), corner-aligned."""
    width, height = size
    if width < 1 or height < 1:
        raise ParamError(f"target size must be positive, got {size}")
    if (width, height) == image.size:
        return image
    h, w = image.height, image.width
    rows = np.linspace(0.0, h - 1.0, height)
    cols = np.linspace(0.0, w - 1.0, width)
    rows_in, cols_in = np.meshgrid(rows, cols, indexing="ij")
    return _per_channel(image, lambda p, f: _warp_plane(p, rows_in, cols_in, f))


def scale_image(image: ImageBuffer, factor: float) -> ImageBuffer:
    """Resize by a uniform factor; output dims round to nearest pixel."""
    return resize_to(
        image, (max(1, round(image.width * factor)), max(1, round(image.height * factor)))
    )


def _trapezoid_scales(height: int, strength: float) -> np.ndarray:
    """Per-row horizontal shrink: 1 - strength at the top row, 1 at the bottom."""
    y = np.arange(height) / max(height - 1, 1)
    return 1.0 - strength * (1.0 - y)


def trapezoid_image(image: ImageBuffer, strength: float) -> ImageBuffer:
    """Keystone distortion: each row shrinks toward its center, top row most."""
    h, w = image.height, image.width
    cx = (w - 1) / 2.0
    scales = _trapezoid_scales(h, strength)
    rows_in, cols_out = np.mgrid[0:h, 0:w].astype(np.float64)
    cols_in = cx + (cols_out - cx) / scales[:, None]
    inside = np.abs(cols_out - cx) <= scales[:, None] * cx

    def warp(plane: np.ndarray, fill: float) -> np.ndarray:
        out = _warp_plane(plane, rows_in, cols_in, fill)
        return np.where(inside, out, fill)

    return _per_channel(image, warp)


def untrapezoid_image(image: ImageBuffer, strength: float) -> ImageBuffer:
    """Inverse keystone: stretch each row back to full width."""
    h, w = image.height, image.width
    cx = (w - 1) / 2.0
    scales = _trapezoid_scales(h, strength)
    rows_in, cols_out = np.mgrid[0:h, 0:w].astype(np.float64)
    cols_in = cx + (cols_out - cx) * scales[:, None]
    return _per_channel(image, lambda p, f: _warp_plane(p, rows_in, cols_in, f))


def _paint_mask(pixels: np.ndarray, mask: np.ndarray, color) -> np.ndarray:
    out = pixels.copy()
    if out.ndim == 2:
        out[mask] = float(np.mean(color))
    else:
        out[mask] = color
    return out


def scratch_image(
    image: ImageBuffer, count: int, width_px: float, rng: np.random.Generator
) -> ImageBuffer:
    """Black line segments with random endpoints; the classic scratched photo."""
    h, w = image.height, image.width
    mask = np.zeros((h, w), dtype=bool)
    half = max(int(round(width_px / 2)), 0)
    for _ in range(int(count)):
        y0, y1 = rng.uniform(0, h - 1, 2)
        x0, x1 = rng.uniform(0, w - 1, 2)
        length = math.hypot(y1 - y0, x1 - x0)
        n = max(int(length * 2), 2)
        ys = np.linspace(y0, y1, n).round().astype(int)
        xs = np.linspace(x0, x1, n).round().astype(int)
        for y, x in zip(ys, xs):
            mask[max(y - half, 0) : y + half + 1, max(x - half, 0) : x + half + 1] = True
    _check_coverage(mask, "scratch")
    return ImageBuffer(_paint_mask(image.pixels, mask, (0.0, 0.0, 0.0)))


def smear_image(
    image: ImageBuffer, blobs: int, radius_px: float, rng: np.random.Generator
) -> ImageBuffer:
    """Filled ink blobs at random positions."""
    h, w = image.height, image.width
    mask = np.zeros((h, w), dtype=bool)
    r = float(radius_px)
    span = int(math.ceil(r))
    for _ in range(int(blobs)):
        cy = rng.uniform(0, h - 1)
        cx = rng.uniform(0, w - 1)
        y_lo, y_hi = max(int(cy) - span, 0), min(int(cy) + span + 2, h)
        x_lo, x_hi = max(int(cx) - span, 0), min(int(cx) + span + 2, w)
        yy, xx = np.mgrid[y_lo:y_hi, x_lo:x_hi]
        mask[y_lo:y_hi, x_lo:x_hi] |= (yy - cy) ** 2 + (xx - cx) ** 2 <= r**2
    _check_coverage(mask, "smear")
    return ImageBuffer(_paint_mask(image.pixels, mask, (0.06, 0.05, 0.10)))


def _check_coverage(mask: np.ndarray, name: str) -> None:
    coverage = float(mask.mean())
    if coverage > 0.5:
        raise ParamError(
            f"{name} occludes {coverage:.0%} of the image; at most 50% is allowed"
        )


def printscan_image(
    image: ImageBuffer,
    blur_sigma: float,
    noise_sigma: float,
    gamma: float,
    rng: np.random.Generator,
) -> ImageBuffer:
    """Print-scan channel: Gaussian blur, gamma, Gaussian noise, 8-bit quantize.

    The blur and gamma steps bend the image's own low-frequency content, so
    the channel's added noise concentrates below the watermark band.
    """
    px = image.pixels
    if px.ndim == 2:
        out = ndi.gaussian_filter(px, blur_sigma) if blur_sigma > 0 else px.copy()
    else:
        out = np.stack(
            [
                ndi.gaussian_filter(px[:, :, c], blur_sigma) if blur_sigma > 0 else px[:, :, c]
                for c in range(3)
            ],
            axis=-1,
        )
    out = np.power(np.clip(out, 0.0, None), gamma)
    if noise_sigma > 0:
        out = out + rng.normal(0.0, noise_sigma, out.shape)
    out = np.clip(out, 0.0, 1.0)
    return ImageBuffer(np.round(out * 255.0) / 255.0)


def apply_attack(photo: ImageBuffer, chain: AttackChain, seed: int = 0) -> ImageBuffer:
    """Run the chain's steps in order; randomness comes from the seed only."""
    rng = np.random.default_rng(seed)
    out = photo
    for step in chain.steps:
        if step.name == "rotate":
            out = rotate_image(out, step.args[0])
        elif step.name == "scale":
            out = scale_image(out, step.args[0])
        elif step.name == "trapezoid":
            out = trapezoid_image(out, step.args[0])
        elif step.name == "scratch":
            out = scratch_image(out, int(step.args[0]), step.args[1], rng)
        elif step.name == "smear":
            out = smear_image(out, int(step.args[0]), step.args[1], rng)
        elif step.name == "printscan":
            out = printscan_image(out, step.args[0], step.args[1], step.args[2], rng)
    return out


def correct_geometry(
    photo: ImageBuffer,
    *,
    rotation_deg: float | None = None,
    trapezoid_strength: float | None = None,
) -> ImageBuffer:
    """Undo known geometric distortions (the parameters must be the applied
    ones). Inverts a rotate-then-trapezoid composition: the keystone is
    stretched back first, then the image is rotated back.
    """
    out = photo
    if trapezoid_strength is not None:
        if not 0.0 <= trapezoid_strength <= 0.5:
            raise ParamError(
                f"trapezoid strength must lie in [0, 0.5], got {trapezoid_strength}"
            )
        out = untrapezoid_image(out, trapezoid_strength)
    if rotation_deg is not None:
        if not -45.0 <= rotation_deg <= 45.0:
            raise ParamError(f"rotation angle must lie in [-45, 45], got {rotation_deg}")
        out = rotate_image(out, -rotation_deg)
    return out


def spectrum_snr(photo: ImageBuffer, spec: WatermarkSpec) -> float:
    """Watermark SNR in dB: mean 1-bit cell energy over mean 0-bit cell energy.

    Cells not carrying a payload bit are ignored. Raises DegenerateError when
    there is no noise floor (no 0-bit cells, or their mean energy is zero);
    callers that tabulate results record that as unbounded SNR.
    """
    mag = magnitude_plane(forward_dft(photo.blue_plane()))
    geo = cell_geometry(photo.width, photo.height, spec.layout)
    means = geo.cell_means(mag).reshape(-1)
    pairs = pair_cell_indices(spec.layout)
    bits = np.asarray(spec.payload.bits)
    one_cells = pairs[: bits.size][bits == 1].reshape(-1)
    zero_cells = pairs[: bits.size][bits == 0].reshape(-1)
    if zero_cells.size == 0:
        raise DegenerateError("payload has no 0-bits; no noise floor to compare against")
    noise = float(means[zero_cells].mean())
    signal = float(means[one_cells].mean()) if one_cells.size else 0.0
    if noise == 0.0:
        raise DegenerateError("0-bit cell energy is zero; SNR is unbounded")
    return 10.0 * math.log10(max(signal, 1e-300) / noise)


@dataclass(frozen=True)
class BenchRow:
    """One (image, chain) outcome; error holds a typed failure name if any."""

    image: str
    chain: str
    present: bool | None
    ber: float | None
    similarity: float | None
    snr_db: float | None
    error: str = ""

    def to_dict(self) -> dict[str, Any]:
        snr = self.snr_db
        return {
            "image": self.image,
            "chain": self.chain,
            "present": self.present,
            "ber": self.ber,
            "similarity": self.similarity,
            "snr_db": None if snr is not None and math.isinf(snr) else snr,
            "snr_db_unbounded": bool(snr is not None and math.isinf(snr)),
            "error": self.error,
        }


@dataclass(frozen=True)
class BenchmarkTable:
    """All rows of a benchmark run plus per-chain aggregate means."""

    rows: tuple[BenchRow, ...]
    aggregates: tuple[dict[str, Any], ...]

    def to_json(self, path: str | Path | None = None) -> str:
        payload = {
            "rows": [r.to_dict() for r in self.rows],
            "aggregates": list(self.aggregates),
        }
        text = json.dumps(payload, indent=2)
        if path is not None:
            Path(path).write_text(text + "\n", encoding="utf-8")
        return text

    def to_csv(self, path: str | Path) -> None:
        fields = ["image", "chain", "present", "ber", "similarity", "snr_db", "error"]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields)
            writer.writeheader()
            for row in self.rows:
                rec = row.to_dict()
                rec.pop("snr_db_unbounded", None)
                if row.snr_db is not None and math.isinf(row.snr_db):
                    rec["snr_db"] = "inf"
                writer.writerow(rec)


def run_benchmark(
    corpus: Sequence[ImageBuffer],
    spec: WatermarkSpec,
    chains: Sequence[AttackChain],
    cfg: DetectorConfig | None = None,
    *,
    seed: int = 0,
    names: Sequence[str] | None = None,
) -> BenchmarkTable:
    """Embed, attack, and detect over a corpus; one row per (image, chain).

    Detection happens at each cover's original size (attacked output is
    resized back first). An empty chain list benchmarks the clean condition.
    Per-row failures are recorded in the error column; the run never aborts.
    Deterministic given the seed.
    """
    cfg = cfg or DetectorConfig()
    chain_list = list(chains) if chains else [AttackChain(())]
    if names is None:
        names = [f"img{i:03d}" for i in range(len(corpus))]
    rows: list[BenchRow] = []
    for i, cover in enumerate(corpus):
        marked = embed_digital(cover, spec)
        for j, chain in enumerate(chain_list):
            label = chain.format() or "clean"
            try:
                attacked = apply_attack(marked, chain, seed=int(np.random.default_rng([seed, i, j]).integers(1 << 31)))
                if attacked.size != cover.size:
                    attacked = resize_to(attacked, cover.size)
                rows.append(_bench_row(names[i], label, attacked, cover, spec, cfg))
            except RingmarkError as exc:
                rows.append(
                    BenchRow(
                        image=names[i],
                        chain=label,
                        present=None,
                        ber=None,
                        similarity=None,
                        snr_db=None,
                        error=type(exc).__name__,
                    )
                )
    return BenchmarkTable(rows=tuple(rows), aggregates=tuple(_aggregate(rows)))


def _bench_row(
    name: str,
    label: str,
    attacked: ImageBuffer,
    cover: ImageBuffer,
    spec: WatermarkSpec,
    cfg: DetectorConfig,
) -> BenchRow:
    report: DetectionReport = detect_nonblind(attacked, cover, spec, cfg)
    try:
        decoded, _, _ = decode_payload(
            attacked, spec.layout, cfg, num_bits=len(spec.payload)
        )
        ber = bit_error_rate(spec.payload, decoded)
        error = ""
    except DecodeError as exc:
        ber = None
        error = type(exc).__name__
    try:
        snr = spectrum_snr(attacked, spec)
    except DegenerateError:
        snr = math.inf
    return BenchRow(
        image=name,
        chain=label,
        present=report.present,
        ber=ber,
        similarity=report.similarity,
        snr_db=snr,
        error=error,
    )


def _aggregate(rows: Sequence[BenchRow]) -> list[dict[str, Any]]:
    by_chain: dict[str, list[BenchRow]] = {}
    for row in rows:
        by_chain.setdefault(row.chain, []).append(row)

    def mean_of(values: list[float | None]) -> float | None:
        vals = [v for v in values if v is not None and math.isfinite(v)]
        return float(np.mean(vals)) if vals else None

    out = []
    for chain, group in by_chain.items():
        present = [r.present for r in group if r.present is not None]
        out.append(
            {
                "chain": chain,
                "rows": len(group),
                "detect_rate": float(np.mean(present)) if present else None,
                "mean_ber": mean_of([r.ber for r in group]),
                "mean_similarity": mean_of([r.similarity for r in group]),
                "mean_snr_db": mean_of([r.snr_db for r in group]),
                "errors": sum(1 for r in group if r.error),
            }
        )
    return out
