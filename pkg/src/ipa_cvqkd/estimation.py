"""Channel parameter estimation from shared quadrature data.

Alice and Bob fit the linear model ``x_B = t x_A + z`` by maximum
likelihood, convert ``(t_hat, sigma2_hat)`` into transmissivity and excess
noise, and widen them into worst-case bounds for the finite-size key rate.
When Alice's output has been amplified by an impact factor ``M`` she does
not know about, the same algebra yields ``T_est = M T`` and
``eps_est = eps / M``; :func:`predicted_bias` gives those closed forms.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import erfcinv

from ._validate import non_negative, positive
from .channel import (
    ChannelParams,
    Moments,
    QuadratureBatch,
    SystemParams,
    effective_excess_noise,
)
from .errors import (
    BoundCollapseError,
    DegenerateRegressorError,
    DomainError,
    ZeroTransmissivityError,
)

# Below this many estimation pairs the Gaussian confidence intervals are not trusted.
LARGE_SAMPLE = 10**6


@dataclass(frozen=True)
class MleFit:
    t_hat: float
    sigma2_hat: float
    m_used: int

    def __post_init__(self):
        if self.m_used < 2:
            raise DomainError(f"a fit needs at least 2 samples, got {self.m_used}")
        if not self.sigma2_hat >= 0:
            raise DomainError(f"sigma2_hat must be >= 0, got {self.sigma2_hat!r}")


@dataclass(frozen=True)
class ChannelEstimate:
    """Point estimates and worst-case bounds of transmissivity and excess noise.

    ``eps_est`` is reported raw and can be negative for finite samples.
    """

    t_est: float
    eps_est: float
    t_min: float
    eps_max: float
    z_quant: float

    @property
    def eps_negative(self) -> bool:
        return self.eps_est < 0


def mle_fit(batch: QuadratureBatch) -> MleFit:
    """Least-squares slope and mean squared residual of ``xb`` on ``xa``."""
    xa, xb = batch.xa, batch.xb
    m = xa.size
    if m < 2:
        raise DomainError(f"a fit needs at least 2 samples, got {m}")
    sxx = float(xa @ xa)
    if sxx <= 0:
        raise DegenerateRegressorError("all of Alice's quadratures are zero")
    t_hat = float(xa @ xb) / sxx
    resid = xb - t_hat * xa
    return MleFit(t_hat=t_hat, sigma2_hat=float(resid @ resid) / m, m_used=m)


def mle_fit_from_moments(moments: Moments) -> MleFit:
    """Same estimators as :func:`mle_fit`, from streamed sufficient statistics."""
    if moments.count < 2:
        raise DomainError(f"a fit needs at least 2 samples, got {moments.count}")
    if moments.sxx <= 0:
        raise DegenerateRegressorError("all of Alice's quadratures are zero")
    t_hat = moments.sxy / moments.sxx
    rss = max(moments.syy - t_hat * moments.sxy, 0.0)
    return MleFit(t_hat=t_hat, sigma2_hat=rss / moments.count, m_used=moments.count)


def expected_fit(
    params: SystemParams,
    chan: ChannelParams,
    m_total: float = 1.0,
    intercept_resend: bool = False,
    m_used: int | None = None,
) -> MleFit:
    """Large-sample limit of the fit Alice obtains from her unscaled records."""
    m_total = positive("m_total", m_total)
    eps_eff = effective_excess_noise(chan.eps, intercept_resend)
    et = params.eta * chan.t_chan
    sigma2 = params.n0 * (et * eps_eff + 1.0 + params.v_el)
    return MleFit(
        t_hat=math.sqrt(et * m_total),
        sigma2_hat=sigma2,
        m_used=params.m_est if m_used is None else m_used,
    )


def estimate_channel(fit: MleFit, params: SystemParams) -> tuple[float, float]:
    """Turn a fit into ``(T_est, eps_est)`` using the calibrated eta, v_el and N0."""
    if fit.t_hat == 0:
        raise ZeroTransmissivityError("fitted slope is zero")
    t_est = fit.t_hat**2 / params.eta
    eps_est = (fit.sigma2_hat - params.n0 - params.v_el * params.n0) / (
        params.eta * t_est * params.n0
    )
    return t_est, eps_est


def predicted_bias(t_pra: float, eps_pra: float, m_total: float) -> tuple[float, float]:
    """What Alice estimates when her output is secretly scaled by ``M``."""
    m_total = positive("m_total", m_total)
    return m_total * t_pra, eps_pra / m_total


def fira_excess_noise(eps_pra: float, m_total: float) -> tuple[float, float]:
    """Actual and estimated excess noise under a full intercept-resend attack.

    Returns ``(eps_pra + 2, (eps_pra + 2) / M)``.
    """
    eps_pra = non_negative("eps_pra", eps_pra)
    m_total = positive("m_total", m_total)
    actual = effective_excess_noise(eps_pra, True)
    return actual, actual / m_total


def z_quantile(eps_pe: float) -> float:
    """Two-sided Gaussian confidence coefficient: the ``1 - eps_pe/2`` quantile."""
    eps_pe = float(eps_pe)
    if not 0 < eps_pe < 1:
        raise DomainError(f"eps_pe must be in (0, 1), got {eps_pe!r}")
    # erfc form keeps full precision in the far tail
    return math.sqrt(2.0) * float(erfcinv(eps_pe))


def confidence_widths(fit: MleFit, eps_pe: float, v_xa: float) -> tuple[float, float, float]:
    """Return ``(z, delta_t, delta_sigma2)`` for a fit."""
    v_xa = positive("v_xa", v_xa)
    z = z_quantile(eps_pe)
    m = fit.m_used
    delta_t = z * math.sqrt(fit.sigma2_hat / (m * v_xa))
    delta_s2 = z * fit.sigma2_hat * math.sqrt(2.0) / math.sqrt(m)
    return z, delta_t, delta_s2


def worst_case_bounds(
    fit: MleFit,
    params: SystemParams,
    v_xa: float | None = None,
) -> ChannelEstimate:
    """Point estimates plus the lower transmissivity / upper noise bounds.

    Parameters
    ----------
    fit : MleFit
        Result of :func:`mle_fit` (or :func:`expected_fit` in analytic work).
    params : SystemParams
        Supplies eta, v_el, N0 and the failure probability ``eps_pe``.
    v_xa : float, optional
        Variance of Alice's regressor. Defaults to her nominal ``V_A * N0``,
        which is what she computes from her own records.

    Raises
    ------
    BoundCollapseError
        If ``t_hat - delta_t <= 0``.
    """
    if v_xa is None:
        v_xa = params.v_a * params.n0
    if fit.m_used < LARGE_SAMPLE:
        warnings.warn(
            f"worst-case bounds assume a large estimation block; m={fit.m_used} < {LARGE_SAMPLE}",
            stacklevel=2,
        )
    t_est, eps_est = estimate_channel(fit, params)
    z, delta_t, delta_s2 = confidence_widths(fit, params.eps_pe, v_xa)
    slope = abs(fit.t_hat)
    if slope - delta_t <= 0:
        raise BoundCollapseError(
            f"t_hat={fit.t_hat:.6g} does not exceed its confidence width {delta_t:.6g}"
        )
    t_min = (slope - delta_t) ** 2 / params.eta
    eps_max = (fit.sigma2_hat + delta_s2 - params.n0 - params.v_el * params.n0) / (
        fit.t_hat**2 * params.n0
    )
    return ChannelEstimate(
        t_est=t_est, eps_est=eps_est, t_min=t_min, eps_max=eps_max, z_quant=z
    )


def asymptotic_bounds(fit: MleFit, params: SystemParams) -> ChannelEstimate:
    """Bounds collapsed onto the point estimates (infinite estimation block)."""
    t_est, eps_est = estimate_channel(fit, params)
    return ChannelEstimate(
        t_est=t_est, eps_est=eps_est, t_min=t_est, eps_max=eps_est, z_quant=0.0
    )


def standard_errors(
    params: SystemParams,
    chan: ChannelParams,
    m_total: float,
    m: int,
    intercept_resend: bool = False,
) -> tuple[float, float]:
    """Large-sample standard errors of ``(T_est, eps_est)`` (delta method).

    ``Var(t_hat) = sigma^2 / (m V_xa)`` and ``Var(sigma2_hat) = 2 sigma^4 / m``.
    """
    fit = expected_fit(params, chan, m_total, intercept_resend, m_used=m)
    t_est, eps_est = estimate_channel(fit, params)
    se_t_hat = math.sqrt(fit.sigma2_hat / (m * params.v_a * params.n0))
    se_t = 2.0 * fit.t_hat * se_t_hat / params.eta
    se_s2 = fit.sigma2_hat * math.sqrt(2.0 / m)
    # eps_est = (s2 - c) / (t_hat^2 N0): both factors fluctuate independently
    denom = fit.t_hat**2 * params.n0
    se_eps = math.hypot(se_s2 / denom, eps_est * 2.0 * se_t_hat / fit.t_hat)
    return se_t, se_eps


def sample_pairs(batch: QuadratureBatch, m: int, seed: int = 0) -> QuadratureBatch:
    """Pick ``m`` pairs uniformly without replacement for parameter estimation."""
    if int(m) != m or not 2 <= m <= len(batch):
        raise DomainError(f"m must be an integer in [2, {len(batch)}], got {m!r}")
    idx = np.sort(np.random.default_rng(seed).choice(len(batch), size=int(m), replace=False))
    return QuadratureBatch(
        xa=batch.xa[idx], xb=batch.xb[idx], seed=batch.seed,
        scenario_digest=batch.scenario_digest,
    )
