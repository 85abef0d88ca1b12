"""Ring-structured DFT-magnitude image watermarking toolkit.

Payload bits live in conjugate sector pairs of mid-frequency rings of the
blue channel's DFT magnitude. The package covers digital embedding, a
projector-camera capture simulator for analogue embedding, blind and
non-blind detection, contour-based background cleanup, and an attack
harness (geometry, occlusion, print-scan) with a benchmark runner.
"""

from .errors import (
    CapacityError,
    DecodeError,
    DegenerateError,
    GeometryError,
    IlluminationError,
    NoContourError,
    ParamError,
    RingmarkError,
    ShapeError,
    SymmetryError,
)
from .model import (
    DEFAULT_LAYOUT,
    DetectionReport,
    ImageBuffer,
    Payload,
    RingLayout,
    Spectrum,
    WatermarkSpec,
    bit_error_rate,
    validate_spec,
)
from .spectral import (
    CellGeometry,
    CellGrid,
    cell_geometry,
    forward_dft,
    inverse_dft,
    magnitude_plane,
    raised_cosine_window,
    sample_cells,
)
from .codec import (
    DEFAULT_THRESHOLD,
    DetectorConfig,
    RotationSearch,
    WatermarkSequence,
    calibrate_threshold,
    decode_payload,
    detect_nonblind,
    embed_digital,
    embed_plane,
    extract_sequence,
    find_working_strength,
    indicator_sequence,
    pair_cell_indices,
    similarity,
    synthesize_pattern,
)
from .capture import (
    CaptureParams,
    SubjectMask,
    blue_illumination,
    canny_edges,
    clear_background,
    find_working_gain,
    simulate_capture,
    subject_mask,
)
from .attacks import (
    AttackChain,
    AttackStep,
    BenchmarkTable,
    BenchRow,
    apply_attack,
    correct_geometry,
    printscan_image,
    resize_to,
    rotate_image,
    run_benchmark,
    scale_image,
    spectrum_snr,
    trapezoid_image,
)
from .imgio import read_image, write_image
from . import synthetic

__version__ = "0.1.0"

__all__ = [
    "AttackChain",
    "AttackStep",
    "BenchRow",
    "BenchmarkTable",
    "CaptureParams",
    "CapacityError",
    "CellGeometry",
    "CellGrid",
    "DEFAULT_LAYOUT",
    "DEFAULT_THRESHOLD",
    "DecodeError",
    "DegenerateError",
    "DetectionReport",
    "DetectorConfig",
    "GeometryError",
    "IlluminationError",
    "ImageBuffer",
    "NoContourError",
    "ParamError",
    "Payload",
    "RingLayout",
    "RingmarkError",
    "RotationSearch",
    "ShapeError",
    "Spectrum",
    "SubjectMask",
    "SymmetryError",
    "WatermarkSequence",
    "WatermarkSpec",
    "apply_attack",
    "bit_error_rate",
    "blue_illumination",
    "calibrate_threshold",
    "canny_edges",
    "cell_geometry",
    "clear_background",
    "correct_geometry",
    "decode_payload",
    "detect_nonblind",
    "embed_digital",
    "embed_plane",
    "extract_sequence",
    "find_working_gain",
    "find_working_strength",
    "forward_dft",
    "indicator_sequence",
    "inverse_dft",
    "magnitude_plane",
    "pair_cell_indices",
    "printscan_image",
    "raised_cosine_window",
    "read_image",
    "resize_to",
    "rotate_image",
    "run_benchmark",
    "sample_cells",
    "scale_image",
    "similarity",
    "simulate_capture",
    "spectrum_snr",
    "subject_mask",
    "synthesize_pattern",
    "synthetic",
    "trapezoid_image",
    "validate_spec",
    "write_image",
]
