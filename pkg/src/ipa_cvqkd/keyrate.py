"""Finite-size secret key rate of GMCS CVQKD with homodyne detection.

Reverse reconciliation against collective attacks:

    K = n/N * (beta * I_AB - S_BE - Delta(n))

``I_AB`` uses the point estimates of the channel; the Holevo bound
``S_BE`` uses the worst-case ``T_min`` and ``eps_max``. Passing the point
values as bounds gives the asymptotic-estimation rate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._validate import finite, non_negative, positive, unit_interval
from .channel import SystemParams
from .errors import DomainError, NonphysicalParameterError

# Discriminants and eigenvalue offsets this close to zero are roundoff.
ROUNDOFF = 1e-9
# Below this, G(x) switches to its series expansion.
SERIES_CUTOFF = 5e-7
_LN2 = math.log(2.0)


@dataclass(frozen=True)
class NoiseDecomposition:
    chi_line: float
    chi_hom: float
    chi_tot: float


@dataclass(frozen=True)
class CovarianceSummary:
    """A, B, C, D invariants of the covariance matrices and the five symplectic eigenvalues."""

    v: float
    a_term: float
    b_term: float
    c_term: float
    d_term: float
    lambdas: tuple[float, float, float, float, float]


@dataclass(frozen=True)
class KeyRateReport:
    i_ab: float
    s_be: float
    delta_n: float
    k_raw: float
    k: float
    inputs_digest: dict = field(default_factory=dict, compare=False)


def noise_decomposition(t_chan: float, eps: float, eta: float, v_el: float) -> NoiseDecomposition:
    t_chan = positive("t_chan", t_chan)
    eta = positive("eta", eta)
    eps = finite("eps", eps)
    v_el = finite("v_el", v_el)
    chi_line = 1.0 / t_chan - 1.0 + eps
    chi_hom = ((1.0 - eta) + v_el) / eta
    return NoiseDecomposition(chi_line, chi_hom, chi_line + chi_hom / t_chan)


def mutual_information(v_a: float, t_chan: float, eps: float, eta: float, v_el: float) -> float:
    """Shannon information between Alice and Bob in bits per pulse."""
    v_a = non_negative("v_a", v_a)
    noise = noise_decomposition(t_chan, eps, eta, v_el)
    v = v_a + 1.0
    return math.log2((v + noise.chi_tot) / (1.0 + noise.chi_tot))


def _g_scalar(x: float) -> float:
    if x < SERIES_CUTOFF:
        # (x+1)ln(1+x) = x + x^2/2 - x^3/6 + ...
        return (x - x * math.log(x) + x * x / 2.0 - x**3 / 6.0) / _LN2 if x > 0 else 0.0
    return ((x + 1.0) * math.log1p(x) - x * math.log(x)) / _LN2


def g_function(x):
    """Entropy of a thermal state with mean photon number ``x``, in bits.

    ``G(x) = (x+1) log2(x+1) - x log2(x)`` with ``G(0) = 0``.
    Accepts scalars or arrays.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError("g_function requires finite x >= 0")
    if arr.ndim == 0:
        return _g_scalar(float(arr))
    return np.vectorize(_g_scalar, otypes=[float])(arr)


def _eigen_pair(s: Fraction, p: Fraction, name: str) -> tuple[float, float]:
    """Roots of ``lambda^4 - s lambda^2 + p = 0`` as ``(lambda_plus, lambda_minus)``."""
    disc = float(s * s - 4 * p)
    s, p = float(s), float(p)
    if disc < 0:
        if disc < -ROUNDOFF * max(1.0, s * s):
            raise NonphysicalParameterError(
                f"{name}: negative discriminant {disc:.3g}; no real symplectic eigenvalues"
            )
        disc = 0.0
    big = 0.5 * (s + math.sqrt(disc))
    if big <= 0 or p < 0:
        raise NonphysicalParameterError(f"{name}: non-positive invariants")
    # product form avoids cancellation in the smaller root
    return math.sqrt(big), math.sqrt(p / big)


def symplectic_spectrum(v: float, t_min: float, chi_line_max: float, chi_hom: float) -> CovarianceSummary:
    """Symplectic eigenvalues of Alice-Bob's state and of Alice's state conditioned on Bob.

    Parameters
    ----------
    v : float
        EPR variance ``V_A + 1``.
    t_min : float
        Worst-case transmissivity, in (0, 1].
    chi_line_max : float
        Worst-case channel noise ``1/T_min - 1 + eps_max``.
    chi_hom : float
        Detection-added noise.
    """
    v = finite("v", v)
    if v < 1:
        raise DomainError(f"v must be >= 1, got {v!r}")
    t = finite("t_min", t_min)
    if not 0 < t <= 1:
        raise NonphysicalParameterError(f"t_min must be in (0, 1], got {t!r}")
    cl = finite("chi_line_max", chi_line_max)
    ch = non_negative("chi_hom", chi_hom)

    # All invariants are rational in the float inputs (sqrt(B) = T (V chi + 1)),
    # so they are evaluated exactly and rounded once. Near the degenerate
    # point T = 1, eps = 0 the eigenvalue pairs meet at 1 and ordinary float
    # rounding would be amplified to ~1e-8 by the square root.
    fv, ft, fcl, fch = (Fraction(x) for x in (v, t, cl, ch))
    var_b = ft * (fv + fcl)
    if var_b <= 0:
        raise NonphysicalParameterError("Bob's variance must be positive")
    sqrt_b = abs(ft * (fv * fcl + 1))
    a_ex = (fv - var_b) ** 2 + 2 * sqrt_b
    den = var_b + fch
    c_ex = (a_ex * fch + fv * sqrt_b + var_b) / den
    d_ex = sqrt_b * (fv + sqrt_b * fch) / den
    a, b, c, d = float(a_ex), float(sqrt_b * sqrt_b), float(c_ex), float(d_ex)

    l1, l2 = _eigen_pair(a_ex, sqrt_b * sqrt_b, "A/B")
    l3, l4 = _eigen_pair(c_ex, d_ex, "C/D")
    lambdas = (l1, l2, l3, l4, 1.0)
    low = min(lambdas)
    if low < 1.0 - ROUNDOFF:
        raise NonphysicalParameterError(
            f"symplectic eigenvalue {low:.12g} < 1 violates the uncertainty principle"
        )
    return CovarianceSummary(v=v, a_term=a, b_term=b, c_term=c, d_term=d, lambdas=lambdas)


def covariance_matrix(v: float, t_min: float, chi_line_max: float) -> np.ndarray:
    """The 4x4 Alice-Bob covariance matrix in (x_A, p_A, x_B, p_B) order."""
    i2 = np.eye(2)
    sz = np.diag([1.0, -1.0])
    off = math.sqrt(t_min * (v * v - 1.0)) * sz
    return np.block([[v * i2, off], [off, t_min * (v + chi_line_max) * i2]])


def _entropy_term(lam: float) -> float:
    return _g_scalar(max((lam - 1.0) / 2.0, 0.0))


def holevo_bound(v_a: float, t_min: float, eps_max: float, eta: float, v_el: float) -> float:
    """Eve's Holevo information on Bob's data, bits per pulse."""
    v_a = non_negative("v_a", v_a)
    noise = noise_decomposition(t_min, eps_max, eta, v_el)
    sym = symplectic_spectrum(v_a + 1.0, t_min, noise.chi_line, noise.chi_hom)
    l = sym.lambdas
    return (_entropy_term(l[0]) + _entropy_term(l[1])) - (
        _entropy_term(l[2]) + _entropy_term(l[3]) + _entropy_term(l[4])
    )


def finite_size_penalty(n: int, eps_bar: float, eps_pa: float) -> float:
    """Privacy-amplification penalty for ``n`` key pulses."""
    n = positive("n", n)
    eps_bar = unit_interval("eps_bar", eps_bar, closed_top=False)
    eps_pa = unit_interval("eps_pa", eps_pa, closed_top=False)
    return 7.0 * math.sqrt(math.log2(1.0 / eps_bar) / n) + 2.0 / n * math.log2(1.0 / eps_pa)


def secret_key_rate(
    params: SystemParams,
    t_point: float,
    eps_point: float,
    t_min: float | None = None,
    eps_max: float | None = None,
) -> KeyRateReport:
    """Finite-size key rate in bits per pulse.

    ``t_min``/``eps_max`` default to the point values (asymptotic estimation).
    """
    if t_min is None:
        t_min = t_point
    if eps_max is None:
        eps_max = eps_point
    i_ab = mutual_information(params.v_a, t_point, eps_point, params.eta, params.v_el)
    s_be = holevo_bound(params.v_a, t_min, eps_max, params.eta, params.v_el)
    delta_n = finite_size_penalty(params.n_key, params.eps_bar, params.eps_pa)
    k_raw = params.n_key / params.n_total * (params.beta * i_ab - s_be - delta_n)
    return KeyRateReport(
        i_ab=i_ab,
        s_be=s_be,
        delta_n=delta_n,
        k_raw=k_raw,
        k=max(k_raw, 0.0),
        inputs_digest={
            "v_a": params.v_a, "eta": params.eta, "v_el": params.v_el,
            "beta": params.beta, "n_total": params.n_total, "n_key": params.n_key,
            "t_point": t_point, "eps_point": eps_point,
            "t_min": t_min, "eps_max": eps_max,
        },
    )
