"""Parameter sweeps over distance, attack scenario and excess noise, with CSV output.

Configuration is a TOML document::

    mode = "analytic"            # or "monte_carlo" / "mc"
    seed = 0
    output = "sweep.csv"
    eps_grid = [0.05]
    finite_size = true
    mc_samples = 1000000         # monte_carlo only; default system.m_est

    [system]                     # any SystemParams field
    v_a = 4.0
    eta = 0.5

    [channel_law]
    alpha_db_per_km = 0.2
    distances_km = [0, 10, 20]   # or distance_min_km / distance_max_km / distance_points

    [[scenarios]]
    mode = "pretreatment"
    m_total = 1.5

    [[scenarios]]
    mode = "pulse_injection"
    ramp_steps = 10
    [[scenarios.devices]]
    label = "IM_1"
    v_pi = 4.0
    v_bias = 1.0
    delta_theta_pe = -0.5
    v_mod = 0.0

Omitted values fall back to the standard simulation parameters
(:class:`~ipa_cvqkd.channel.SystemParams` defaults, alpha = 0.2 dB/km,
0-160 km in 1 km steps, eps = 0.05, a single no-attack scenario).
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from enum import Enum
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .attack import AttackScenario, run_attack_experiment
from .channel import ChannelParams, SystemParams, effective_excess_noise, transmissivity
from .errors import ConfigError, DomainError
from .estimation import predicted_bias
from .modulator import DeviceSetting, ModulatorConfig

MODES = ("analytic", "monte_carlo")
_SYSTEM_KEYS = {f.name for f in fields(SystemParams)}
_TOP_KEYS = {"mode", "seed", "output", "eps_grid", "finite_size", "mc_samples",
             "system", "channel_law", "scenarios"}
_LAW_KEYS = {"alpha_db_per_km", "distances_km", "distance_min_km",
             "distance_max_km", "distance_points"}
_SCENARIO_KEYS = {"mode", "m_total", "devices", "intercept_resend", "ramp_steps", "label"}
_DEVICE_KEYS = {"label", "v_pi", "v_bias", "delta_theta_pe", "v_mod", "i_in"}

DEFAULT_DISTANCES = tuple(float(d) for d in range(0, 161))


@dataclass(frozen=True)
class SweepConfig:
    system: SystemParams = field(default_factory=SystemParams)
    alpha_db_per_km: float = 0.2
    distances_km: tuple[float, ...] = DEFAULT_DISTANCES
    scenarios: tuple[AttackScenario, ...] = (AttackScenario(),)
    eps_grid: tuple[float, ...] = (0.05,)
    mode: str = "analytic"
    seed: int = 0
    output_path: str | None = None
    finite_size: bool = True
    mc_samples: int | None = None

    def __post_init__(self):
        if not self.distances_km or not self.scenarios or not self.eps_grid:
            raise ConfigError("distance grid, scenarios and eps_grid must be non-empty")
        if not self.alpha_db_per_km > 0:
            raise ConfigError(f"channel_law.alpha_db_per_km must be > 0, got {self.alpha_db_per_km!r}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if any(not math.isfinite(d) or d < 0 for d in self.distances_km):
            raise ConfigError("channel_law distances must be finite and >= 0")
        if any(not math.isfinite(e) or e < 0 for e in self.eps_grid):
            raise ConfigError("eps_grid entries must be finite and >= 0")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")

    def digest(self) -> str:
        """SHA-256 over every setting except the output path."""
        payload = plain_data(asdict(self))
        payload.pop("output_path", None)
        text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


@dataclass(frozen=True)
class SweepRow:
    scenario: str
    distance_km: float
    m_total: float
    eps_pra: float
    eps_est: float
    t_pra: float
    t_est: float
    i_ab: float
    s_be: float
    delta_n: float
    k_est_raw: float
    k_est: float
    k_pra_raw: float
    k_pra: float
    gap: float
    error: str = ""


CSV_HEADER = tuple(f.name for f in fields(SweepRow))


def plain_data(obj):
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {k: plain_data(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain_data(v) for v in obj]
    return obj


def _check_keys(table, allowed, where):
    if not isinstance(table, dict):
        raise ConfigError(f"{where} must be a table")
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key {where + '.' if where else ''}{key!r}")


def _wrap(where, build):
    try:
        return build()
    except ConfigError:
        raise
    except (DomainError, TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _parse_device(table, where):
    _check_keys(table, _DEVICE_KEYS, where)
    if "v_pi" not in table:
        raise ConfigError(f"{where}.v_pi is required")

    def build():
        config = ModulatorConfig(
            v_pi=table["v_pi"],
            v_bias=table.get("v_bias", 0.0),
            delta_theta_pe=table.get("delta_theta_pe", 0.0),
            label=table.get("label", ""),
        )
        return DeviceSetting(config, v_mod=float(table.get("v_mod", 0.0)),
                             i_in=float(table.get("i_in", 1.0)))

    return _wrap(where, build)


def _parse_scenario(table, where):
    _check_keys(table, _SCENARIO_KEYS, where)
    devices = tuple(
        _parse_device(d, f"{where}.devices[{i}]") for i, d in enumerate(table.get("devices", []))
    )
    return _wrap(where, lambda: AttackScenario(
        mode=table.get("mode", "none"),
        m_total=table.get("m_total"),
        devices=devices,
        intercept_resend=bool(table.get("intercept_resend", False)),
        ramp_steps=table.get("ramp_steps", 0),
        label=table.get("label", ""),
    ))


def _parse_distances(law):
    if "distances_km" in law:
        if any(k in law for k in ("distance_min_km", "distance_max_km", "distance_points")):
            raise ConfigError("channel_law: give distances_km or a min/max/points range, not both")
        return tuple(float(d) for d in law["distances_km"])
    if not any(k in law for k in ("distance_min_km", "distance_max_km", "distance_points")):
        return DEFAULT_DISTANCES
    lo = float(law.get("distance_min_km", 0.0))
    hi = float(law.get("distance_max_km", 160.0))
    points = law.get("distance_points", 161)
    if int(points) != points or points < 1:
        raise ConfigError(f"channel_law.distance_points must be a positive integer, got {points!r}")
    return tuple(float(d) for d in np.linspace(lo, hi, int(points)))


def parse_config(text: str) -> SweepConfig:
    """Parse and validate a TOML sweep configuration."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed configuration: {exc}") from exc
    _check_keys(doc, _TOP_KEYS, "")

    system_table = doc.get("system", {})
    _check_keys(system_table, _SYSTEM_KEYS, "system")
    if "n_total" in system_table and "m_est" not in system_table:
        system_table = {**system_table, "m_est": system_table["n_total"] // 2}
    system = _wrap("system", lambda: SystemParams(**system_table))

    law = doc.get("channel_law", {})
    _check_keys(law, _LAW_KEYS, "channel_law")
    distances = _wrap("channel_law", lambda: _parse_distances(law))

    scenarios = tuple(
        _parse_scenario(s, f"scenarios[{i}]") for i, s in enumerate(doc.get("scenarios", []))
    ) or (AttackScenario(),)

    mode = doc.get("mode", "analytic")
    if mode == "mc":
        mode = "monte_carlo"
    mc_samples = doc.get("mc_samples")
    if mc_samples is not None and (int(mc_samples) != mc_samples or mc_samples < 2):
        raise ConfigError(f"mc_samples must be an integer >= 2, got {mc_samples!r}")

    return _wrap("config", lambda: SweepConfig(
        system=system,
        alpha_db_per_km=float(law.get("alpha_db_per_km", 0.2)),
        distances_km=distances,
        scenarios=scenarios,
        eps_grid=tuple(float(e) for e in doc.get("eps_grid", [0.05])),
        mode=mode,
        seed=doc.get("seed", 0),
        output_path=doc.get("output"),
        finite_size=bool(doc.get("finite_size", True)),
        mc_samples=mc_samples,
    ))


def load_config(path) -> SweepConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def point_seed(seed: int, *indices: int) -> int:
    """Deterministic per-grid-point seed."""
    return int(np.random.SeedSequence([seed, *indices]).generate_state(1, np.uint32)[0])


def _evaluate(config: SweepConfig, si: int, ei: int, li: int) -> SweepRow:
    scenario = config.scenarios[si]
    eps = config.eps_grid[ei]
    dist = config.distances_km[li]
    t = transmissivity(dist, config.alpha_db_per_km)
    m = scenario.stabilized_m
    eps_pra = effective_excess_noise(eps, scenario.intercept_resend)
    t_est, eps_est = predicted_bias(t, eps_pra, m)
    nan = math.nan
    base = dict(scenario=scenario.name, distance_km=dist, m_total=m, eps_pra=eps_pra,
                t_pra=t, t_est=t_est, eps_est=eps_est)
    try:
        report = run_attack_experiment(
            config.system,
            ChannelParams(t_chan=t, eps=eps),
            scenario,
            seed=point_seed(config.seed, si, ei, li),
            mode=config.mode,
            mc_samples=config.mc_samples,
            finite_size=config.finite_size,
        )
    except DomainError as exc:
        return SweepRow(**base, i_ab=nan, s_be=nan, delta_n=nan, k_est_raw=nan, k_est=nan,
                        k_pra_raw=nan, k_pra=nan, gap=nan,
                        error=f"{type(exc).__name__}: {exc}")
    base.update(t_est=report.estimates.t_est, eps_est=report.estimates.eps_est)
    return SweepRow(
        **base,
        i_ab=report.k_est.i_ab,
        s_be=report.k_est.s_be,
        delta_n=report.k_est.delta_n,
        k_est_raw=report.k_est.k_raw,
        k_est=report.k_est.k,
        k_pra_raw=report.k_pra.k_raw,
        k_pra=report.k_pra.k,
        gap=report.gap,
    )


def run_sweep(config: SweepConfig, workers: int = 1) -> list[SweepRow]:
    """Evaluate every (scenario, eps, distance) point, in that nesting order.

    Failing points produce a row with NaN rates and the error text instead
    of aborting the sweep.
    """
    grid = [
        (si, ei, li)
        for si in range(len(config.scenarios))
        for ei in range(len(config.eps_grid))
        for li in range(len(config.distances_km))
    ]
    if workers <= 1:
        return [_evaluate(config, *g) for g in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda g: _evaluate(config, *g), grid))


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    return format(float(value), ".10g")


def emit_report(rows, output_path, *, config_digest: str = "", seed: int | None = None) -> Path:
    """Write rows as CSV, preceded by a ``#`` metadata line."""
    rows = list(rows)
    if not rows:
        raise DomainError("no rows to write")
    path = Path(output_path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(f"# config_digest={config_digest} seed={'' if seed is None else seed}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow([_fmt(getattr(row, name)) for name in CSV_HEADER])
    return path


def read_report(path) -> tuple[dict, list[SweepRow]]:
    """Parse a file written by :func:`emit_report` back into rows."""
    with Path(path).open(encoding="utf-8", newline="") as fh:
        meta_line = fh.readline()
        meta = dict(part.split("=", 1) for part in meta_line.lstrip("#").split())
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise DomainError(f"unexpected CSV header {reader.fieldnames}")
        rows = []
        for rec in reader:
            rows.append(SweepRow(**{
                k: (v if k in ("scenario", "error") else float(v)) for k, v in rec.items()
            }))
    return meta, rows


def bias_traces(eps_values, m_values) -> list[tuple[float, float, float]]:
    """``(eps_pra, m_total, eps_est)`` for every pair, grouped by ``eps_pra``."""
    return [
        (float(eps), float(m), predicted_bias(1.0, float(eps), float(m))[1])
        for eps in eps_values
        for m in m_values
    ]


def emit_bias_traces(path, eps_values, m_values) -> Path:
    """Write the estimated excess noise against ``M`` as long-format CSV."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("eps_pra", "m_total", "eps_est"))
        for rec in bias_traces(eps_values, m_values):
            writer.writerow([_fmt(v) for v in rec])
    return path
