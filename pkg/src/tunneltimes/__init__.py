"""Tunneling-time scales for 1D rectangular barriers and wells."""

from .model import (
    HBAR,
    HBAR2_OVER_2ME,
    DEFAULT_MASS_RATIO,
    BarrierSpec,
    NumericInvariantError,
    ParticleSpec,
    PiecewisePotential,
    energy,
    group_velocity,
    local_wavenumbers,
    wavenumber,
)
from .timescales import (
    LongWaveLimits,
    ResonanceRecord,
    ResonanceTable,
    ScalingLimit,
    TimescaleRecord,
    dwell_width,
    effective_width,
    evaluate_widths,
    longwave_limits,
    lorentz_width,
    phase_width,
    resonance_table,
    scaling_limit,
    starting_point,
    transmission_reflection,
)
from .decomposition import (
    ChannelAmplitudes,
    channel_amplitudes,
    channel_angle,
    channel_sweep,
    interface_mismatch,
    stationary_channels,
    x_start_from_gamma,
)
from .packets import (
    ChannelMeans,
    PacketSpec,
    PacketState,
    SampledSpectrum,
    TrajectoryPoint,
    channel_mean_k,
    cm_trajectory,
    default_grid,
    dispersion_time,
    evolve,
    gaussian_spectrum,
    second_central_moment,
    slow_tail_allowance,
    starting_point_packet,
)
from .larmor import (
    FieldLayout,
    SpinReadout,
    StartExtrapolation,
    extrapolate_start,
    invert_precession,
    richardson_ladder,
    run_clock,
    spin_potentials,
    synthetic_precession,
)

__all__ = [
    "HBAR",
    "HBAR2_OVER_2ME",
    "DEFAULT_MASS_RATIO",
    "BarrierSpec",
    "ChannelAmplitudes",
    "ChannelMeans",
    "FieldLayout",
    "LongWaveLimits",
    "NumericInvariantError",
    "PacketSpec",
    "PacketState",
    "ParticleSpec",
    "PiecewisePotential",
    "ResonanceRecord",
    "ResonanceTable",
    "SampledSpectrum",
    "ScalingLimit",
    "SpinReadout",
    "StartExtrapolation",
    "TimescaleRecord",
    "TrajectoryPoint",
    "channel_amplitudes",
    "channel_angle",
    "channel_mean_k",
    "channel_sweep",
    "cm_trajectory",
    "default_grid",
    "dispersion_time",
    "dwell_width",
    "effective_width",
    "energy",
    "evaluate_widths",
    "evolve",
    "extrapolate_start",
    "gaussian_spectrum",
    "group_velocity",
    "interface_mismatch",
    "invert_precession",
    "local_wavenumbers",
    "longwave_limits",
    "lorentz_width",
    "phase_width",
    "resonance_table",
    "richardson_ladder",
    "run_clock",
    "scaling_limit",
    "second_central_moment",
    "slow_tail_allowance",
    "spin_potentials",
    "starting_point",
    "starting_point_packet",
    "stationary_channels",
    "synthetic_precession",
    "transmission_reflection",
    "wavenumber",
    "x_start_from_gamma",
]

__version__ = "0.1.0"
