"""Intensity response of LN-based Mach-Zehnder devices under a photorefractive bias.

Each device obeys

    I_out = I_in / 2 * (1 + cos(phi0 + k * V + dtheta_pe)),

with ``phi0 = 2 pi V_bias / V_pi`` and ``k = 2 pi / V_pi``. A nonzero
``dtheta_pe`` shifts the response curve, so at a fixed drive voltage the
output intensity is multiplied by a per-device gain factor. The gain
factors of cascaded devices multiply into the impact factor ``M``.

Only intensities are handled here; the square-root scaling of the
quadratures lives in :mod:`ipa_cvqkd.channel`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ._validate import finite, positive
from .errors import DomainError, SingularOperatingPointError

# Baselines below this fraction of the input intensity are treated as singular.
SINGULAR_BASELINE = 1e-9


@dataclass(frozen=True)
class ModulatorConfig:
    """Transfer-curve parameters of one electro-optic device.

    Attributes
    ----------
    v_pi : float
        Half-wave voltage in volts.
    v_bias : float
        DC bias voltage in volts.
    delta_theta_pe : float
        Photorefractive phase bias in radians.
    label : str
        Device identifier such as ``"IM_1"`` or ``"VOA"``.
    """

    v_pi: float
    v_bias: float = 0.0
    delta_theta_pe: float = 0.0
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "v_pi", positive("v_pi", self.v_pi))
        object.__setattr__(self, "v_bias", finite("v_bias", self.v_bias))
        object.__setattr__(
            self, "delta_theta_pe", finite("delta_theta_pe", self.delta_theta_pe)
        )
        if not (math.isfinite(self.phi0) and math.isfinite(self.k)):
            raise DomainError(f"derived phase constants overflow for v_pi={self.v_pi!r}")

    @property
    def phi0(self) -> float:
        """Initial inherent phase set by the bias voltage."""
        return 2.0 * math.pi * self.v_bias / self.v_pi

    @property
    def k(self) -> float:
        """Phase per volt of drive signal."""
        return 2.0 * math.pi / self.v_pi

    def unbiased(self) -> "ModulatorConfig":
        """The same device with the photorefractive bias removed."""
        return replace(self, delta_theta_pe=0.0)


@dataclass(frozen=True)
class ImpactFactors:
    """Per-device gain factors and their product, the impact factor ``M``."""

    m_per_device: tuple[float, ...]
    m_total: float


@dataclass(frozen=True)
class DeviceSetting:
    """A device together with the drive voltage it is operated at."""

    config: ModulatorConfig
    v_mod: float = 0.0
    i_in: float = 1.0


def transfer_intensity(config: ModulatorConfig, i_in, v_mod):
    """Output intensity of the device for input intensity ``i_in`` and drive ``v_mod``.

    Works elementwise on array inputs. The result always lies in ``[0, i_in]``.
    """
    i_in_arr = np.asarray(i_in, dtype=float)
    v_arr = np.asarray(v_mod, dtype=float)
    if not (np.all(np.isfinite(i_in_arr)) and np.all(np.isfinite(v_arr))):
        raise DomainError("i_in and v_mod must be finite")
    if np.any(i_in_arr < 0):
        raise DomainError("i_in must be >= 0")
    phase = config.phi0 + config.k * v_arr + config.delta_theta_pe
    out = 0.5 * i_in_arr * (1.0 + np.cos(phase))
    # cos can overshoot 1 or -1 by an ulp
    out = np.clip(out, 0.0, i_in_arr)
    return float(out) if out.ndim == 0 else out


def gain_factor(config: ModulatorConfig, i_in: float = 1.0, v_mod: float = 0.0) -> float:
    """Ratio of biased to unbiased output at one operating point.

    Raises
    ------
    SingularOperatingPointError
        If the unbiased output is below ``1e-9 * i_in``.
    """
    i_in = positive("i_in", i_in)
    baseline = transfer_intensity(config.unbiased(), i_in, v_mod)
    if baseline < SINGULAR_BASELINE * i_in:
        raise SingularOperatingPointError(
            f"{config.label or 'device'}: baseline intensity {baseline:.3g} is at a "
            "transmission null; gain factor undefined"
        )
    return transfer_intensity(config, i_in, v_mod) / baseline


def cascade_impact(factors: Sequence[float]) -> ImpactFactors:
    """Combine per-device gain factors into the total impact factor."""
    factors = tuple(float(m) for m in factors)
    if not factors:
        raise DomainError("at least one gain factor is required")
    for i, m in enumerate(factors):
        if not math.isfinite(m) or m <= 0:
            raise DomainError(f"gain factor #{i} must be finite and > 0, got {m!r}")
    return ImpactFactors(m_per_device=factors, m_total=math.prod(factors))


def impact_from_devices(settings: Sequence[DeviceSetting]) -> ImpactFactors:
    return cascade_impact(
        [gain_factor(s.config, s.i_in, s.v_mod) for s in settings]
    )
