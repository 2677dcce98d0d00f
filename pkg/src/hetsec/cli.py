"""Command-line entry point.

Subcommands:
  run     -- execute a sweep experiment described by a key=value config
             file and/or flags, writing the long-format CSV.
  verify  -- run the invariant battery on a fresh random batch; exit
             nonzero on any violation.
  figure  -- emit the CSV behind one named figure preset.

Exit codes: 0 success, 1 configuration error, 2 runtime/solver failure
budget exceeded.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import metrics
from .channel import NetworkConfig, sample_rayleigh_channels
from .errors import HetsecError
from .harness import (
    FIGURE_NAMES,
    SCHEMES,
    ExperimentSpec,
    figure_table,
    run_experiment,
    write_csv,
)
from .stb_jmf import solve_stb_jmf
from .stb_om import solve_stb_om
from .stb_smf import fbs_local_problem, null_space_basis, solve_fbs_closed_form, solve_stb_smf

FAILURE_BUDGET = 0.10  # fraction of failed rows tolerated by `run`


class ConfigError(Exception):
    pass


def parse_config_file(path: str) -> dict:
    """key = value lines; '#' starts a comment; values keep their text."""
    out = {}
    try:
        with open(path, encoding="utf-8") as f:
            for lineno, raw in enumerate(f, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                key, value = line.split("=", 1)
                out[key.strip()] = value.strip()
    except OSError as e:
        raise ConfigError(f"cannot read config file: {e}") from e
    return out


def parse_sweep(text: str) -> tuple[str, tuple[float, ...]]:
    """"p_m_db=30:45:3" (start:stop:step, inclusive) or "p_m_db=30,33,36"."""
    if "=" not in text:
        raise ConfigError(f"bad sweep {text!r}; expected param=values")
    param, values = text.split("=", 1)
    param = param.strip()
    values = values.strip()
    if ":" in values:
        parts = values.split(":")
        if len(parts) != 3:
            raise ConfigError(f"bad sweep range {values!r}; expected start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ConfigError("sweep step must be positive")
        grid = []
        v = start
        while v <= stop + 1e-9:
            grid.append(round(v, 9))
            v += step
        return param, tuple(grid)
    return param, tuple(float(v) for v in values.split(","))


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(","))


def build_config(kv: dict) -> NetworkConfig:
    kwargs = {}
    for key in ("n_m", "n_f", "m_users", "k_users", "n_coop"):
        if key in kv:
            kwargs[key] = int(kv[key])
    for key in ("cell_radius_m", "fbs_intensity"):
        if key in kv:
            kwargs[key] = float(kv[key])
    n_coop = kwargs.get("n_coop", 2)
    k_users = kwargs.get("k_users", 1)
    m_users = kwargs.get("m_users", 2)
    if "gamma_mu" in kv:
        kwargs["gamma_mu"] = _floats(kv["gamma_mu"])
    elif m_users != 2:
        kwargs["gamma_mu"] = tuple(1.0 for _ in range(m_users - 1))
    if "gamma_fu" in kv:
        vals = _floats(kv["gamma_fu"])
        if len(vals) == 1:
            vals = vals * (n_coop * k_users)
        if len(vals) != n_coop * k_users:
            raise ConfigError("gamma_fu needs 1 or N*K values")
        kwargs["gamma_fu"] = tuple(
            tuple(vals[n * k_users + k] for k in range(k_users)) for n in range(n_coop)
        )
    elif (n_coop, k_users) != (2, 1):
        kwargs["gamma_fu"] = tuple(
            tuple(0.60 for _ in range(k_users)) for _ in range(n_coop)
        )
    try:
        cfg = NetworkConfig(**kwargs)
        return cfg.with_power_db(
            p_m_db=float(kv.get("p_m_db", 40.0)), p_f_db=float(kv.get("p_f_db", 40.0))
        )
    except (ValueError, TypeError) as e:
        raise ConfigError(str(e)) from e


def build_spec(args) -> ExperimentSpec:
    kv = parse_config_file(args.config) if args.config else {}
    config = build_config(kv)
    sweep_text = args.sweep or kv.get("sweep", "p_m_db=30:45:3")
    param, values = parse_sweep(sweep_text)
    schemes_text = args.schemes or kv.get("schemes", "stb_om,stb_smf,stb_jmf,benchmark")
    schemes = tuple(s.strip() for s in schemes_text.split(",") if s.strip())
    trials = args.trials if args.trials is not None else int(kv.get("trials", 100))
    seed = args.seed if args.seed is not None else int(kv.get("seed", 0))
    out = args.out or kv.get("out", "results.csv")
    try:
        return ExperimentSpec(
            config=config,
            sweep_param=param,
            sweep_values_db=values,
            schemes=schemes,
            trials=trials,
            seed=seed,
            output_path=out,
        )
    except ValueError as e:
        raise ConfigError(str(e)) from e


def cmd_run(args) -> int:
    spec = build_spec(args)
    table = run_experiment(spec)
    failed = table.failure_count()
    print(f"wrote {len(table)} rows to {spec.output_path} ({failed} failed)")
    if failed > FAILURE_BUDGET * len(table):
        print("solver failure budget exceeded", file=sys.stderr)
        return 2
    return 0


def cmd_figure(args) -> int:
    table = figure_table(args.name, trials=args.trials, seed=args.seed)
    out = args.out or f"{args.name}.csv"
    write_csv(table, out)
    print(f"wrote {len(table)} rows to {out}")
    return 0


def cmd_verify(args) -> int:
    """Fresh-batch invariant battery; prints one line per check."""
    rng_seeds = range(args.seed, args.seed + args.batch)
    cfg = NetworkConfig()
    failures = []

    def check(name, ok):
        print(f"[{'PASS' if ok else 'FAIL'}] {name}")
        if not ok:
            failures.append(name)

    for seed in rng_seeds:
        ch = sample_rayleigh_channels(cfg, seed)

        om = solve_stb_om(ch, cfg)
        trace = om.diagnostics.objective_trace
        check(
            f"seed {seed}: macro-tier objective trace nondecreasing",
            all(b >= a - 1e-6 for a, b in zip(trace, trace[1:])),
        )
        check(
            f"seed {seed}: macro-tier QoS met",
            all(
                metrics.sinr_mu(ch, om, m) >= cfg.gamma_mu[m - 2] - 1e-6
                for m in range(2, cfg.m_users + 1)
            ),
        )

        smf = solve_stb_smf(ch, cfg)
        zf = max(
            abs(ch.h_fbs_mu[n, m] @ smf.w_fu[n, k])
            for n in range(cfg.n_coop)
            for m in range(cfg.m_users)
            for k in range(cfg.k_users)
        )
        check(
            f"seed {seed}: femto null-space exactness",
            zf <= 1e-8 * np.sqrt(cfg.p_f),
        )
        prob = fbs_local_problem(ch, cfg, 1)
        v = null_space_basis(prob.g_n)
        w_cf = solve_fbs_closed_form(prob, v)
        check(
            f"seed {seed}: femto closed-form at full power",
            abs(np.linalg.norm(w_cf) ** 2 - cfg.p_f) <= 1e-8 * cfg.p_f,
        )

        jmf = solve_stb_jmf(ch, cfg)
        ratios = jmf.diagnostics.notes["rank_ratios"]
        check(
            f"seed {seed}: joint-design Gram blocks rank-one",
            max(ratios.values()) <= 1e-6,
        )
        cc = jmf.diagnostics.notes["cc"]
        check(
            f"seed {seed}: fractional-program consistency",
            cc["g_residual"] <= 1e-7 and cc["constraint_violation"] <= 1e-6,
        )
    print(f"{len(failures)} failures")
    return 1 if failures else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hetsec",
        description="Secrecy beamforming schemes for two-tier downlink networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a sweep experiment to CSV")
    p_run.add_argument("--config", help="key = value experiment file")
    p_run.add_argument("--sweep", help="e.g. p_m_db=30:45:3 or p_f_db=20,30,40")
    p_run.add_argument("--schemes", help=f"comma list from {','.join(SCHEMES)}")
    p_run.add_argument("--trials", type=int)
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--out")
    p_run.set_defaults(func=cmd_run)

    p_fig = sub.add_parser("figure", help="emit the CSV for a named figure")
    p_fig.add_argument("name", choices=FIGURE_NAMES)
    p_fig.add_argument("--trials", type=int, default=100)
    p_fig.add_argument("--seed", type=int, default=0)
    p_fig.add_argument("--out")
    p_fig.set_defaults(func=cmd_figure)

    p_ver = sub.add_parser("verify", help="invariant battery on a fresh batch")
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--batch", type=int, default=3)
    p_ver.set_defaults(func=cmd_verify)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except HetsecError as e:
        print(f"solver error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
