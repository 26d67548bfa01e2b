"""Simulation and analysis of the induced-photorefraction attack on GMCS CVQKD."""
from .attack import (
    AttackMode,
    AttackScenario,
    ExperimentReport,
    MonitorResult,
    alarm_rate,
    detection_operating_point,
    monitor_modulation_variance,
    practical_key_rate,
    run_attack_experiment,
    sample_monitor_quadratures,
    scenario_impact_trajectory,
)
from .channel import (
    ChannelParams,
    QuadratureBatch,
    SystemParams,
    apply_attack_scaling,
    generate_quadratures,
    stream_moments,
    theoretical_variance,
    transmissivity,
)
from .errors import (
    BoundCollapseError,
    ConfigError,
    DegenerateRegressorError,
    DomainError,
    NonphysicalParameterError,
    SingularOperatingPointError,
    ZeroTransmissivityError,
)
from .estimation import (
    ChannelEstimate,
    MleFit,
    estimate_channel,
    expected_fit,
    fira_excess_noise,
    mle_fit,
    mle_fit_from_moments,
    predicted_bias,
    sample_pairs,
    standard_errors,
    asymptotic_bounds,
    worst_case_bounds,
    z_quantile,
)
from .keyrate import (
    CovarianceSummary,
    KeyRateReport,
    NoiseDecomposition,
    finite_size_penalty,
    g_function,
    holevo_bound,
    mutual_information,
    noise_decomposition,
    secret_key_rate,
    symplectic_spectrum,
)
from .modulator import (
    DeviceSetting,
    ImpactFactors,
    ModulatorConfig,
    cascade_impact,
    gain_factor,
    impact_from_devices,
    transfer_intensity,
)
from .sweep import (
    SweepConfig,
    SweepRow,
    emit_bias_traces,
    emit_report,
    load_config,
    parse_config,
    read_report,
    run_sweep,
)

__version__ = "0.1.0"
