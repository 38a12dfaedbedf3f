"""Continuous homodyne detection of a single two-level atom.

Samples measurement records, applies the conditional Bloch-vector
back-action rotation, supports feedback (none / compensation / inversion),
and validates the record statistics against an exact truncated-Fock-space
homodyne oracle.
"""

from .analysis import (
    DiffusionEstimate,
    DriftField,
    Histogram,
    drift_field,
    ensemble_stats,
    estimate_diffusion,
    histogram,
)
from .bloch import (
    BlochState,
    SimParams,
    apply_rotation,
    linearized_update,
    normalize_angle,
    rotation_angle,
)
from .engine import (
    EnsembleResult,
    RunConfig,
    StepRecord,
    derive_stream,
    run_ensemble,
    run_trajectory,
    run_trajectory_arrays,
    step,
)
from .feedback import (
    COMPENSATION,
    INVERSION,
    NO_FEEDBACK,
    FeedbackPolicy,
    feedback_rotation,
    gain,
)
from .fock import (
    CutoffError,
    FockField,
    Pmf,
    SourceSpec,
    beamsplitter_output,
    delta_n_pmf,
    gaussian_distance,
    skellam_pmf,
)
from .measurement import (
    MeasurementRecord,
    SamplingMode,
    bayes_dipole_update,
    conditional_pdf,
    pdf_vacuum,
    sample_record,
    sample_records,
)
from .streams import CounterStream, stream_key

__version__ = "0.1.0"

__all__ = [
    "BlochState",
    "SimParams",
    "apply_rotation",
    "rotation_angle",
    "linearized_update",
    "normalize_angle",
    "MeasurementRecord",
    "SamplingMode",
    "pdf_vacuum",
    "conditional_pdf",
    "sample_record",
    "sample_records",
    "bayes_dipole_update",
    "FeedbackPolicy",
    "NO_FEEDBACK",
    "COMPENSATION",
    "INVERSION",
    "gain",
    "feedback_rotation",
    "RunConfig",
    "StepRecord",
    "EnsembleResult",
    "step",
    "run_trajectory",
    "run_trajectory_arrays",
    "run_ensemble",
    "derive_stream",
    "CounterStream",
    "stream_key",
    "SourceSpec",
    "FockField",
    "Pmf",
    "CutoffError",
    "beamsplitter_output",
    "delta_n_pmf",
    "skellam_pmf",
    "gaussian_distance",
    "DriftField",
    "DiffusionEstimate",
    "Histogram",
    "drift_field",
    "estimate_diffusion",
    "ensemble_stats",
    "histogram",
]
