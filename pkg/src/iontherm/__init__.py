"""Trapped-ion sideband thermometry and transport-heating toolkit."""

__version__ = "0.1.0"

from .oscillator import (
    DEFAULT_TRUNCATION,
    MotionalState,
    OscillatorConfig,
    TruncationConfig,
    displaced_thermal_populations,
    displacement_overlap_oracle,
    lamb_dicke,
    sideband_rabi_frequency,
    sideband_rabi_ladder,
    thermal_populations,
)
from .spectrum import (
    ProbePulse,
    RabiCurve,
    SidebandSpectrum,
    carrier_flop_curve,
    mixed_state_excitation,
    pure_state_excitation,
    sideband_envelope,
    synthesize_measurement,
)
from .thermometry import (
    FitResult,
    HeatingDifference,
    HeatingRateFit,
    HeatingSeries,
    dynamic_heating_difference,
    fit_envelope,
    fit_heating_rate,
    fit_rabi_decoherence,
    fit_sideband_ratio,
)
from .transport import (
    ScanPoint,
    TransportResult,
    TransportScenario,
    build_filtered_trajectory,
    response_integral_quanta,
    scan_update_frequency,
    simulate_transport,
)
