"""Fractional-order (Grünwald-Letnikov) conditioning of multi-sensor data."""

from importlib import resources

from .calibration import CalibrationTrace, FusionResult, calibrate_step, fuse
from .data import (
    DegreeSelection,
    PolynomialModel,
    SensorDataset,
    SensorStats,
    polyfit,
    select_degree,
    sensor_stats,
)
from .operator import GlPlan, SpectralPoint, gl_apply_model, gl_apply_sequence, gl_weights, spectral_response
from .pipeline import PipelineConfig, PipelineReport, run_pipeline, verify_report
from .transmission import GainTarget, TransmissionPlan, iterate_fod, iterations_needed, required_gain

__version__ = "0.1.0"


def case_study_path(name: str = "case_study.csv"):
    """Path to a bundled case-study file (``case_study.csv`` or ``case_study.conf``)."""
    return resources.files(__name__) / "data" / name


def load_case_study() -> SensorDataset:
    from .reports import parse_dataset

    return parse_dataset(case_study_path())
