"""Linear Gaussian channel: parameters, sample generation and variance predictions.

Only the X quadrature is simulated; P is statistically identical. Bob
receives

    x_B = sqrt(eta * T) * sqrt(M) * x_A + z,
    z ~ N(0, eta * T * eps_eff * N0 + N0 + v_el * N0),

where ``eps_eff`` is the channel excess noise plus 2 SNU when Eve runs a
full intercept-resend attack. The batch keeps Alice's unscaled ``x_A``
because that is what she recorded.

Samples are produced in fixed-size blocks, each with its own Philox stream
keyed by ``(seed, block_index)``. The output is therefore identical
however many workers fill the blocks.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._validate import non_negative, positive, unit_interval
from .errors import DomainError

BLOCK_SIZE = 1 << 16
INTERCEPT_RESEND_NOISE = 2.0


@dataclass(frozen=True)
class SystemParams:
    """Alice and Bob's calibration constants and post-processing budget.

    Defaults are the fixed simulation parameters used for the key-rate
    curves: V_A = 4, eta = 0.5, v_el = 0.01, beta = 0.95, N = 1e9 with half
    the pulses kept for the key, all epsilons 1e-10.
    """

    v_a: float = 4.0
    eta: float = 0.5
    v_el: float = 0.01
    n0: float = 1.0
    beta: float = 0.95
    n_total: int = 10**9
    m_est: int = 5 * 10**8
    eps_pe: float = 1e-10
    eps_bar: float = 1e-10
    eps_pa: float = 1e-10

    def __post_init__(self):
        positive("v_a", self.v_a)
        unit_interval("eta", self.eta)
        non_negative("v_el", self.v_el)
        positive("n0", self.n0)
        unit_interval("beta", self.beta)
        for name in ("eps_pe", "eps_bar", "eps_pa"):
            unit_interval(name, getattr(self, name), closed_top=False)
        for name in ("n_total", "m_est"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise DomainError(f"{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.m_est >= self.n_total:
            raise DomainError(
                f"m_est must be < n_total, got m_est={self.m_est}, n_total={self.n_total}"
            )

    @property
    def n_key(self) -> int:
        """Pulses left for key generation after parameter estimation."""
        return self.n_total - self.m_est


@dataclass(frozen=True)
class ChannelParams:
    """Transmissivity ``t_chan`` in (0, 1] and excess noise ``eps`` in SNU."""

    t_chan: float
    eps: float = 0.0

    def __post_init__(self):
        unit_interval("t_chan", self.t_chan)
        non_negative("eps", self.eps)

    def xi(self, n0: float = 1.0) -> float:
        """Excess noise in absolute variance units."""
        return self.eps * n0


def transmissivity(distance_km, alpha_db_per_km: float = 0.2):
    """Fiber transmissivity ``10 ** (-alpha * L / 10)``."""
    positive("alpha_db_per_km", alpha_db_per_km)
    d = np.asarray(distance_km, dtype=float)
    if np.any(d < 0) or not np.all(np.isfinite(d)):
        raise DomainError("distance must be finite and >= 0")
    t = 10.0 ** (-alpha_db_per_km * d / 10.0)
    return float(t) if t.ndim == 0 else t


def effective_excess_noise(eps: float, intercept_resend: bool) -> float:
    return eps + INTERCEPT_RESEND_NOISE if intercept_resend else eps


@dataclass(frozen=True, eq=False)
class QuadratureBatch:
    """Paired Alice/Bob X-quadrature samples.

    ``xa`` holds what Alice believes she sent (before any attack scaling).
    """

    xa: np.ndarray
    xb: np.ndarray
    seed: int | None = None
    scenario_digest: str = ""

    def __post_init__(self):
        xa = np.ascontiguousarray(self.xa, dtype=float)
        xb = np.ascontiguousarray(self.xb, dtype=float)
        if xa.ndim != 1 or xa.shape != xb.shape or xa.size < 1:
            raise DomainError("xa and xb must be 1-D arrays of equal, nonzero length")
        if not (np.all(np.isfinite(xa)) and np.all(np.isfinite(xb))):
            raise DomainError("quadrature samples must be finite")
        xa.flags.writeable = False
        xb.flags.writeable = False
        object.__setattr__(self, "xa", xa)
        object.__setattr__(self, "xb", xb)

    def __len__(self):
        return self.xa.size

    def save(self, path) -> None:
        """Write as two whitespace-separated columns with a ``#`` header line."""
        header = f"seed={self.seed if self.seed is not None else ''} scenario={self.scenario_digest}"
        np.savetxt(
            path, np.column_stack([self.xa, self.xb]), fmt="%.17g", header=header
        )

    @classmethod
    def load(cls, path) -> "QuadratureBatch":
        path = Path(path)
        with path.open() as fh:
            first = fh.readline()
        if not first.startswith("#"):
            raise DomainError(f"{path}: missing header line")
        meta = first[1:].strip()
        seed_part, _, scenario = meta.partition(" scenario=")
        seed_text = seed_part.removeprefix("seed=")
        data = np.loadtxt(path, ndmin=2)
        if data.shape[1] != 2:
            raise DomainError(f"{path}: expected 2 columns, found {data.shape[1]}")
        return cls(
            xa=data[:, 0],
            xb=data[:, 1],
            seed=int(seed_text) if seed_text else None,
            scenario_digest=scenario,
        )


def apply_attack_scaling(xa, m_total: float) -> np.ndarray:
    """Scale amplitudes by ``sqrt(M)``: the intensity gain seen in phase space."""
    m_total = positive("m_total", m_total)
    return np.asarray(xa, dtype=float) * math.sqrt(m_total)


def theoretical_variance(
    params: SystemParams,
    chan: ChannelParams,
    m_total: float = 1.0,
    intercept_resend: bool = False,
) -> tuple[float, float]:
    """Expected ``(Var(x_B), Cov(x_A, x_B))`` with ``x_A`` Alice's unscaled record.

    Both are absolute variances, i.e. they carry one factor of ``N0``.
    """
    m_total = positive("m_total", m_total)
    eps_eff = effective_excess_noise(chan.eps, intercept_resend)
    et = params.eta * chan.t_chan
    v_b = params.n0 * (et * m_total * params.v_a + et * eps_eff + 1.0 + params.v_el)
    cov = math.sqrt(et * m_total) * params.v_a * params.n0
    return v_b, cov


def _noise_variance(params, chan, intercept_resend):
    eps_eff = effective_excess_noise(chan.eps, intercept_resend)
    return params.eta * chan.t_chan * eps_eff * params.n0 + params.n0 + params.v_el * params.n0


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, block])))


def _check_request(count, seed):
    if int(count) != count or count < 1:
        raise DomainError(f"count must be a positive integer, got {count!r}")
    if int(seed) != seed or seed < 0:
        raise DomainError(f"seed must be a non-negative integer, got {seed!r}")
    return int(count), int(seed)


def _draw_block(block, count, seed, sd_a, gain, sd_z):
    start = block * BLOCK_SIZE
    size = min(BLOCK_SIZE, count - start)
    rng = _block_rng(seed, block)
    xa = rng.normal(0.0, sd_a, size)
    z = rng.normal(0.0, sd_z, size)
    return xa, gain * xa + z


def _map_blocks(fn, n_blocks, workers):
    if workers <= 1 or n_blocks == 1:
        return [fn(b) for b in range(n_blocks)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n_blocks)))


def _generation_constants(params, chan, m_total, intercept_resend):
    m_total = positive("m_total", m_total)
    sd_a = math.sqrt(params.v_a * params.n0)
    gain = math.sqrt(params.eta * chan.t_chan) * math.sqrt(m_total)
    sd_z = math.sqrt(_noise_variance(params, chan, intercept_resend))
    return sd_a, gain, sd_z


def scenario_digest(m_total: float, intercept_resend: bool, label: str = "") -> str:
    text = f"M={m_total!r};IR={int(bool(intercept_resend))}"
    return f"{label};{text}" if label else text


def generate_quadratures(
    params: SystemParams,
    chan: ChannelParams,
    m_total: float = 1.0,
    intercept_resend: bool = False,
    count: int = 10**6,
    seed: int = 0,
    *,
    workers: int = 1,
    label: str = "",
) -> QuadratureBatch:
    """Draw ``count`` correlated (x_A, x_B) pairs through the attacked channel."""
    count, seed = _check_request(count, seed)
    sd_a, gain, sd_z = _generation_constants(params, chan, m_total, intercept_resend)
    n_blocks = -(-count // BLOCK_SIZE)
    parts = _map_blocks(
        lambda b: _draw_block(b, count, seed, sd_a, gain, sd_z), n_blocks, workers
    )
    xa = np.concatenate([p[0] for p in parts])
    xb = np.concatenate([p[1] for p in parts])
    return QuadratureBatch(
        xa=xa, xb=xb, seed=seed,
        scenario_digest=scenario_digest(m_total, intercept_resend, label),
    )


@dataclass(frozen=True)
class Moments:
    """Sufficient statistics of a batch for the linear-model fit."""

    sxx: float
    sxy: float
    syy: float
    count: int


def stream_moments(
    params: SystemParams,
    chan: ChannelParams,
    m_total: float = 1.0,
    intercept_resend: bool = False,
    count: int = 10**6,
    seed: int = 0,
    *,
    workers: int = 1,
) -> Moments:
    """Sums of x_A^2, x_A x_B and x_B^2 over the same samples ``generate_quadratures`` draws.

    Memory stays at one block, so counts in the 1e8-1e9 range are feasible.
    """
    count, seed = _check_request(count, seed)
    sd_a, gain, sd_z = _generation_constants(params, chan, m_total, intercept_resend)
    n_blocks = -(-count // BLOCK_SIZE)

    def one(b):
        xa, xb = _draw_block(b, count, seed, sd_a, gain, sd_z)
        return float(xa @ xa), float(xa @ xb), float(xb @ xb)

    sums = _map_blocks(one, n_blocks, workers)
    return Moments(
        sxx=math.fsum(s[0] for s in sums),
        sxy=math.fsum(s[1] for s in sums),
        syy=math.fsum(s[2] for s in sums),
        count=count,
    )
