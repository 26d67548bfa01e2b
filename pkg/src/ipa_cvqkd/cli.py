"""Command-line entry point: ``ipa-cvqkd {keyrate,sweep,simulate,monitor}``."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, replace

from .attack import (
    AttackMode,
    AttackScenario,
    alarm_rate,
    detection_operating_point,
    run_attack_experiment,
)
from .channel import ChannelParams, generate_quadratures, theoretical_variance, transmissivity
from .errors import DomainError
from .estimation import estimate_channel, mle_fit, predicted_bias
from .sweep import SweepConfig, emit_report, load_config, run_sweep, plain_data


def _mode(text):
    return {"mc": "monte_carlo"}.get(text, text)


def _config(args) -> SweepConfig:
    return load_config(args.config) if args.config else SweepConfig()


def _channel(args, config):
    if args.t is not None:
        t = args.t
    else:
        t = transmissivity(args.distance, config.alpha_db_per_km)
    return ChannelParams(t_chan=t, eps=args.eps)


def _scenario(args):
    if args.m == 1.0 and not args.intercept_resend:
        return AttackScenario()
    return AttackScenario(
        mode=AttackMode.PRETREATMENT, m_total=args.m, intercept_resend=args.intercept_resend
    )


def _dump(obj):
    print(json.dumps(plain_data(obj), indent=2, sort_keys=True))


def cmd_keyrate(args):
    config = _config(args)
    chan = _channel(args, config)
    report = run_attack_experiment(
        config.system, chan, _scenario(args),
        seed=config.seed if args.seed is None else args.seed,
        mode=_mode(args.mode or config.mode),
        mc_samples=args.samples,
        finite_size=not args.asymptotic,
    )
    _dump({
        "t_pra": report.t_pra,
        "eps_pra": report.eps_pra,
        "m_total": report.m_total,
        "estimates": asdict(report.estimates),
        "k_est": asdict(report.k_est),
        "k_pra": asdict(report.k_pra),
        "gap": report.gap,
    })


def cmd_sweep(args):
    config = _config(args)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.mode:
        config = replace(config, mode=_mode(args.mode))
    out = args.out or config.output_path
    if not out:
        raise DomainError("no output path: pass --out or set 'output' in the config")
    rows = run_sweep(config, workers=args.workers)
    emit_report(rows, out, config_digest=config.digest(), seed=config.seed)
    failed = sum(1 for r in rows if r.error)
    print(f"wrote {len(rows)} rows to {out}" + (f" ({failed} with errors)" if failed else ""),
          file=sys.stderr)


def cmd_simulate(args):
    config = _config(args)
    chan = _channel(args, config)
    seed = config.seed if args.seed is None else args.seed
    count = args.samples or 10**6
    batch = generate_quadratures(
        config.system, chan, args.m, args.intercept_resend, count, seed, workers=args.workers
    )
    if args.out:
        batch.save(args.out)
    fit = mle_fit(batch)
    t_est, eps_est = estimate_channel(fit, config.system)
    v_b, cov = theoretical_variance(config.system, chan, args.m, args.intercept_resend)
    eps_eff = chan.eps + (2.0 if args.intercept_resend else 0.0)
    t_pred, eps_pred = predicted_bias(chan.t_chan, eps_eff, args.m)
    _dump({
        "samples": len(batch),
        "seed": seed,
        "fit": asdict(fit),
        "t_est": t_est,
        "eps_est": eps_est,
        "predicted": {"t_est": t_pred, "eps_est": eps_pred, "var_xb": v_b, "cov_ab": cov},
        "observed": {"var_xb": float(batch.xb.var()), "cov_ab": float((batch.xa * batch.xb).mean())},
    })


def cmd_monitor(args):
    config = _config(args)
    seed = config.seed if args.seed is None else args.seed
    v_a = config.system.v_a
    threshold = args.threshold or detection_operating_point(v_a, args.samples, args.false_alarm)
    rate = alarm_rate(v_a, args.m, args.samples, threshold, args.trials, seed, config.system.n0)
    null = alarm_rate(v_a, 1.0, args.samples, threshold, args.trials, seed + 1, config.system.n0)
    _dump({
        "m_total": args.m,
        "samples": args.samples,
        "trials": args.trials,
        "threshold": threshold,
        "detection_rate": rate,
        "false_alarm_rate": null,
    })


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ipa-cvqkd",
        description="Induced-photorefraction attack analysis for GMCS CVQKD.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML configuration file")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--mode", choices=["analytic", "mc", "monte_carlo"], default=None)
    common.add_argument("--workers", type=int, default=1)

    point = argparse.ArgumentParser(add_help=False)
    where = point.add_mutually_exclusive_group()
    where.add_argument("--distance", type=float, default=0.0, help="fiber length in km")
    where.add_argument("--t", type=float, default=None, help="channel transmissivity")
    point.add_argument("--eps", type=float, default=0.05, help="excess noise in SNU")
    point.add_argument("--m", type=float, default=1.0, help="impact factor M")
    point.add_argument("--intercept-resend", action="store_true")
    point.add_argument("--samples", type=int, default=None)

    p = sub.add_parser("keyrate", parents=[common, point], help="evaluate one operating point")
    p.add_argument("--asymptotic", action="store_true", help="ignore finite-size bounds")
    p.set_defaults(func=cmd_keyrate)

    p = sub.add_parser("sweep", parents=[common], help="run a configured sweep to CSV")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", parents=[common, point], help="generate a batch and fit it")
    p.add_argument("--out", metavar="PATH", help="write the batch as two-column text")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("monitor", parents=[common], help="modulation-variance detection experiment")
    p.add_argument("--m", type=float, default=1.5)
    p.add_argument("--samples", type=int, default=10**4)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--false-alarm", type=float, default=0.01)
    p.add_argument("--threshold", type=float, default=None)
    p.set_defaults(func=cmd_monitor)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
