"""End-to-end induced-photorefraction attack experiments and the variance monitor.

An experiment compares two key rates:

* ``k_est`` -- what Alice and Bob compute from nominal ``V_A`` and the
  biased estimates ``(T_est, eps_est)``;
* ``k_pra`` -- the rate the link actually supports, from ``M * V_A`` and the
  true channel ``(T, eps)`` (plus 2 SNU if Eve intercepts and resends).

Their difference is the key information leaked to Eve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.stats import chi2

from ._validate import positive
from .channel import (
    ChannelParams,
    SystemParams,
    effective_excess_noise,
    stream_moments,
)
from .errors import DomainError
from .estimation import (
    ChannelEstimate,
    asymptotic_bounds,
    expected_fit,
    mle_fit_from_moments,
    predicted_bias,
    worst_case_bounds,
)
from .keyrate import KeyRateReport, secret_key_rate
from .modulator import DeviceSetting, ImpactFactors, cascade_impact, impact_from_devices


class AttackMode(str, Enum):
    NONE = "none"
    PRETREATMENT = "pretreatment"
    PULSE_INJECTION = "pulse_injection"
    SAGNAC_BASELINE = "sagnac_baseline"


@dataclass(frozen=True)
class AttackScenario:
    """Eve's configuration.

    The impact factor is given either directly (``m_total``) or through
    ``devices``, whose gain factors are multiplied. ``mode="none"`` forces
    ``M = 1`` and no intercept-resend; ``"sagnac_baseline"`` forces ``M = 1``
    because perturbations hit both interferometer paths equally.
    ``ramp_steps`` shapes the pulse-injection trajectory.
    """

    mode: AttackMode = AttackMode.NONE
    m_total: float | None = None
    devices: tuple[DeviceSetting, ...] = ()
    intercept_resend: bool = False
    ramp_steps: int = 0
    label: str = ""

    def __post_init__(self):
        mode = AttackMode(self.mode)
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "devices", tuple(self.devices))
        if self.m_total is not None and self.devices:
            raise DomainError("give either m_total or devices, not both")
        if mode in (AttackMode.NONE, AttackMode.SAGNAC_BASELINE):
            object.__setattr__(self, "m_total", 1.0)
            object.__setattr__(self, "devices", ())
            if mode is AttackMode.NONE:
                object.__setattr__(self, "intercept_resend", False)
        elif self.m_total is not None:
            object.__setattr__(self, "m_total", positive("m_total", self.m_total))
        elif not self.devices:
            raise DomainError(f"mode {mode.value!r} needs m_total or devices")
        if int(self.ramp_steps) != self.ramp_steps or self.ramp_steps < 0:
            raise DomainError(f"ramp_steps must be a non-negative integer, got {self.ramp_steps!r}")
        object.__setattr__(self, "ramp_steps", int(self.ramp_steps))
        # evaluate eagerly so an invalid device stack fails at construction
        self.impact

    @property
    def impact(self) -> ImpactFactors:
        if self.devices:
            return impact_from_devices(self.devices)
        return cascade_impact([self.m_total])

    @property
    def stabilized_m(self) -> float:
        return self.impact.m_total

    @property
    def name(self) -> str:
        return self.label or self.mode.value


@dataclass(frozen=True)
class ExperimentReport:
    k_est: KeyRateReport
    k_pra: KeyRateReport
    gap: float
    estimates: ChannelEstimate
    scenario: AttackScenario
    m_total: float
    t_pra: float
    eps_pra: float


@dataclass(frozen=True)
class MonitorResult:
    m_hat: float
    samples_used: int
    alarm: bool
    threshold: float


def scenario_impact_trajectory(scenario: AttackScenario, step: int) -> float:
    """Impact factor at time ``step`` of the attack.

    Pretreatment presets the modulator, so the full ``M`` is present from
    step 0. Pulse injection ramps linearly from 1 to ``M`` over
    ``ramp_steps`` and then holds.
    """
    if step < 0:
        raise DomainError(f"step must be >= 0, got {step!r}")
    m = scenario.stabilized_m
    if scenario.mode is AttackMode.PULSE_INJECTION and step < scenario.ramp_steps:
        return 1.0 + (m - 1.0) * step / scenario.ramp_steps
    return m


def _bounds(fit, params, v_xa, finite_size):
    if finite_size:
        return worst_case_bounds(fit, params, v_xa=v_xa)
    return asymptotic_bounds(fit, params)


def practical_key_rate(
    params: SystemParams,
    chan: ChannelParams,
    m_total: float,
    intercept_resend: bool = False,
    *,
    finite_size: bool = True,
) -> KeyRateReport:
    """Rate supported by the real link: scaled modulation, true channel."""
    eps_pra = effective_excess_noise(chan.eps, intercept_resend)
    actual = replace(params, v_a=m_total * params.v_a)
    fit = expected_fit(params, chan, 1.0, intercept_resend)
    bounds = _bounds(fit, actual, actual.v_a * actual.n0, finite_size)
    return secret_key_rate(actual, chan.t_chan, eps_pra, bounds.t_min, bounds.eps_max)


def run_attack_experiment(
    params: SystemParams,
    chan: ChannelParams,
    scenario: AttackScenario,
    seed: int = 0,
    mode: str = "analytic",
    *,
    mc_samples: int | None = None,
    finite_size: bool = True,
    workers: int = 1,
) -> ExperimentReport:
    """Compare estimated and practical key rates for one scenario.

    Parameters
    ----------
    mode : {"analytic", "monte_carlo"}
        ``"analytic"`` uses the closed-form bias laws; ``"monte_carlo"`` (alias
        ``"mc"``) simulates ``mc_samples`` estimation pairs (default
        ``params.m_est``) and fits them.
    finite_size : bool
        Use the worst-case confidence bounds in the Holevo term. When False
        the bounds equal the point estimates.
    """
    m_total = scenario.stabilized_m
    ir = scenario.intercept_resend
    eps_pra = effective_excess_noise(chan.eps, ir)

    if mode == "analytic":
        fit = expected_fit(params, chan, m_total, ir)
        bounds = _bounds(fit, params, params.v_a * params.n0, finite_size)
        # with intercept-resend eps_pra already carries the extra 2 SNU
        t_est, eps_est = predicted_bias(chan.t_chan, eps_pra, m_total)
        estimates = replace(bounds, t_est=t_est, eps_est=eps_est)
        if not finite_size:
            estimates = replace(estimates, t_min=t_est, eps_max=eps_est)
    elif mode in ("monte_carlo", "mc"):
        count = params.m_est if mc_samples is None else mc_samples
        moments = stream_moments(params, chan, m_total, ir, count, seed, workers=workers)
        fit = mle_fit_from_moments(moments)
        estimates = _bounds(fit, params, params.v_a * params.n0, finite_size)
    else:
        raise DomainError(f"unknown mode {mode!r}; expected 'analytic' or 'monte_carlo'")

    k_est = secret_key_rate(
        params, estimates.t_est, estimates.eps_est, estimates.t_min, estimates.eps_max
    )
    k_pra = practical_key_rate(params, chan, m_total, ir, finite_size=finite_size)
    return ExperimentReport(
        k_est=k_est,
        k_pra=k_pra,
        gap=k_est.k - k_pra.k,
        estimates=estimates,
        scenario=scenario,
        m_total=m_total,
        t_pra=chan.t_chan,
        eps_pra=eps_pra,
    )


def sample_monitor_quadratures(
    v_a_nominal: float,
    m_total: float,
    count: int,
    seed: int = 0,
    n0: float = 1.0,
) -> np.ndarray:
    """Quadratures of Alice's attacked output as seen by her monitoring homodyne."""
    sd = math.sqrt(positive("v_a_nominal", v_a_nominal) * positive("m_total", m_total) * n0)
    return np.random.default_rng(seed).normal(0.0, sd, int(count))


def monitor_modulation_variance(
    monitor_samples: Sequence[float],
    v_a_nominal: float,
    threshold: float,
    n0: float = 1.0,
) -> MonitorResult:
    """Estimate ``M`` as the ratio of observed to nominal modulation variance."""
    v_a_nominal = positive("v_a_nominal", v_a_nominal)
    threshold = float(threshold)
    if not threshold > 1:
        raise DomainError(f"threshold must be > 1, got {threshold!r}")
    x = np.asarray(monitor_samples, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise DomainError("at least 2 monitor samples are required")
    var = float(np.var(x, ddof=1))
    if not var > 0 or not math.isfinite(var):
        raise DomainError("monitor samples are degenerate (zero or non-finite variance)")
    m_hat = var / (v_a_nominal * n0)
    return MonitorResult(m_hat=m_hat, samples_used=x.size, alarm=m_hat > threshold, threshold=threshold)


def detection_operating_point(v_a_nominal: float, sample_count: int, false_alarm_target: float) -> float:
    """Alarm threshold on ``m_hat`` with the requested false-alarm rate when ``M = 1``.

    Under no attack ``(n - 1) m_hat`` is chi-square with ``n - 1`` degrees of
    freedom, so the threshold is its upper ``false_alarm_target`` quantile
    divided by ``n - 1``. The result does not depend on ``v_a_nominal``.
    """
    positive("v_a_nominal", v_a_nominal)
    if int(sample_count) != sample_count or sample_count < 2:
        raise DomainError(f"sample_count must be an integer >= 2, got {sample_count!r}")
    if not 0 < false_alarm_target < 1:
        raise DomainError(f"false_alarm_target must be in (0, 1), got {false_alarm_target!r}")
    dof = int(sample_count) - 1
    return float(chi2.isf(false_alarm_target, dof)) / dof


def alarm_rate(
    v_a_nominal: float,
    m_total: float,
    sample_count: int,
    threshold: float,
    trials: int,
    seed: int = 0,
    n0: float = 1.0,
) -> float:
    """Fraction of seeded monitoring rounds that raise the alarm."""
    seeds = np.random.SeedSequence(seed).spawn(trials)
    hits = 0
    for ss in seeds:
        x = sample_monitor_quadratures(v_a_nominal, m_total, sample_count, ss, n0)
        hits += monitor_modulation_variance(x, v_a_nominal, threshold, n0).alarm
    return hits / trials
