"""Simulation of spatially entangled qudits: SPDC source, lens channels, coincidence detection."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DimensionMismatch,
    DomainError,
    GridMismatch,
    GridTooNarrow,
    NumericalError,
    ParseError,
    QuditSimError,
    SamplingError,
    ValidationError,
    WindowError,
    WindowTooNarrow,
)
from .optics import (
    ApertureSpec,
    ArmGeometry,
    ChannelGeometry,
    PumpProfile,
    SampledField1D,
    aperture_transmission,
    fresnel_propagate,
    inner_product,
    lens_phase,
    pump_profile_eval,
)
from .source import (
    BiphotonAmplitude,
    MixedSlitState,
    QuditState,
    analytic_biphoton,
    analytic_multislit_F,
    classical_correlated_state,
    ideal_qudit_state,
    mirror_state,
    numeric_biphoton_F,
    project_to_slit_basis,
)
from .channel import (
    CoincidenceAmplitudeGrid,
    channel_transform,
    channel_transform_direct,
    image_state,
    propagate_to_detectors,
)
from .detection import (
    DetectorSpec,
    ScanResult,
    classical_prediction,
    coincidence_scan,
    conditional_shift,
    fidelity,
    fringe_contrast,
    fringe_period,
    measured_ququart_state,
    probability_histogram,
    singles_scan,
    visibility,
)
from .config import ExperimentConfig, parse_config, serialize
