"""Monte-Carlo experiment runner: seeded sweeps over power budgets.

One experiment fixes a scenario, sweeps one power parameter (in dB over
noise), and runs every requested scheme on the same channel realization
per (value, trial) pair -- and, because the channel seed depends only on
the trial index, the same realization is also shared across sweep values,
so curves are paired end to end.  Results go to a long-format CSV with the
fixed header

    scheme,sweep_param,sweep_value_db,trial,secrecy_rate_bits,sinr_mu1,
    sinr_mu2,sinr_eve,sinr_fu_mean,iterations,solve_ms,status

Failures become status rows, never aborts.  Convergence-trace tables
(see :func:`convergence_trace_table`) reuse the same schema with the trial
column carrying the iteration index and status "trace".
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
import math
import time

import numpy as np

from . import metrics
from .benchmark import solve_benchmark
from .channel import NetworkConfig, sample_rayleigh_channels
from .errors import DegenerateChannelError, NumericalFailureError, QosInfeasibleError
from .stb_jmf import solve_stb_jmf
from .stb_om import solve_random_an, solve_stb_om, solve_stb_om_with_an
from .stb_smf import solve_stb_smf

SCHEMES = ("stb_om", "stb_smf", "stb_jmf", "benchmark", "stb_om_an", "random_an")

CSV_HEADER = (
    "scheme,sweep_param,sweep_value_db,trial,secrecy_rate_bits,sinr_mu1,"
    "sinr_mu2,sinr_eve,sinr_fu_mean,iterations,solve_ms,status"
)


@dataclass(frozen=True)
class ExperimentSpec:
    config: NetworkConfig = field(default_factory=NetworkConfig)
    sweep_param: str = "p_m_db"
    sweep_values_db: tuple[float, ...] = (30.0, 33.0, 36.0, 39.0, 42.0, 45.0)
    schemes: tuple[str, ...] = ("stb_om", "stb_smf", "stb_jmf", "benchmark")
    trials: int = 100
    seed: int = 0
    output_path: str | None = None
    record_timing: bool = True
    gamma_fu_fallback: float = 0.5  # retried FU target when the joint scheme
    #                                 is infeasible at a sweep point

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.sweep_param not in ("p_m_db", "p_f_db"):
            raise ValueError(f"unknown sweep parameter {self.sweep_param!r}")
        unknown = [s for s in self.schemes if s not in SCHEMES]
        if unknown:
            raise ValueError(f"unknown schemes {unknown}; choose from {SCHEMES}")
        if not all(math.isfinite(v) for v in self.sweep_values_db):
            raise ValueError("sweep values must be finite")


@dataclass
class ResultRow:
    scheme: str
    sweep_param: str
    sweep_value_db: float
    trial: int
    secrecy_rate_bits: float = math.nan
    sinr_mu1: float = math.nan
    sinr_mu2: float = math.nan
    sinr_eve: float = math.nan
    sinr_fu_mean: float = math.nan
    iterations: int = 0
    solve_ms: float = 0.0
    status: str = "ok"


@dataclass
class ResultTable:
    rows: list[ResultRow] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def mean_over_trials(self, column: str) -> dict[tuple[str, float], float]:
        """{(scheme, sweep value) -> mean of column over ok rows}."""
        acc: dict[tuple[str, float], list[float]] = {}
        for r in self.rows:
            if not r.status.startswith("ok"):
                continue
            acc.setdefault((r.scheme, r.sweep_value_db), []).append(getattr(r, column))
        return {k: float(np.mean(v)) for k, v in acc.items()}

    def failure_count(self) -> int:
        return sum(
            not (r.status.startswith("ok") or r.status == "trace") for r in self.rows
        )


def trial_seed(seed: int, trial: int) -> int:
    """Stable per-trial channel seed, independent of the sweep value."""
    return int(np.random.SeedSequence([seed, trial]).generate_state(1)[0])


def _solve_scheme(scheme: str, ch, config: NetworkConfig, chan_seed: int):
    if scheme == "stb_om":
        return solve_stb_om(ch, config)
    if scheme == "stb_smf":
        return solve_stb_smf(ch, config)
    if scheme == "stb_jmf":
        return solve_stb_jmf(ch, config)
    if scheme == "benchmark":
        return solve_benchmark(ch, config)
    if scheme == "stb_om_an":
        return solve_stb_om_with_an(ch, config, seed=chan_seed)
    if scheme == "random_an":
        return solve_random_an(ch, config, seed=chan_seed)
    raise ValueError(f"unknown scheme {scheme!r}")


def _score(row: ResultRow, ch, sol) -> None:
    row.secrecy_rate_bits = metrics.secrecy_rate(ch, sol)
    row.sinr_mu1 = metrics.sinr_mu(ch, sol, 1)
    row.sinr_mu2 = metrics.sinr_mu(ch, sol, 2) if ch.m_users >= 2 else math.nan
    row.sinr_eve = metrics.sinr_eve(ch, sol)
    if scheme_uses_fbs_tier(row.scheme) and ch.n_coop > 0:
        row.sinr_fu_mean = metrics.sinr_fu_mean(ch, sol)
    row.iterations = sol.diagnostics.iterations


def scheme_uses_fbs_tier(scheme: str) -> bool:
    """Macro-only schemes run under orthogonal spectrum: their FUs live on
    other resources, so a co-channel FU SINR would be meaningless."""
    return scheme in ("stb_smf", "stb_jmf", "benchmark")


def run_experiment(spec: ExperimentSpec) -> ResultTable:
    """Execute the sweep; one row per (scheme, value, trial)."""
    table = ResultTable()
    for value in spec.sweep_values_db:
        kwargs = {"p_m_db": value} if spec.sweep_param == "p_m_db" else {"p_f_db": value}
        cfg = spec.config.with_power_db(**kwargs)
        for trial in range(spec.trials):
            chan_seed = trial_seed(spec.seed, trial)
            ch = sample_rayleigh_channels(cfg, chan_seed)
            for scheme in spec.schemes:
                row = ResultRow(scheme, spec.sweep_param, value, trial)
                t0 = time.perf_counter()
                try:
                    sol = _solve_scheme(scheme, ch, cfg, chan_seed)
                    _score(row, ch, sol)
                except QosInfeasibleError:
                    if scheme == "stb_jmf":
                        row = _retry_relaxed(row, ch, cfg, chan_seed, spec, t0)
                    else:
                        row.status = "qos_infeasible"
                except NumericalFailureError:
                    row.status = "solver_failure"
                except DegenerateChannelError:
                    row.status = "degenerate_channel"
                if spec.record_timing:
                    row.solve_ms = (time.perf_counter() - t0) * 1e3
                table.rows.append(row)
    if spec.output_path:
        write_csv(table, spec.output_path)
    return table


def _retry_relaxed(row, ch, cfg, chan_seed, spec, t0):
    """Low femto power can defeat the joint scheme's FU targets; retry once
    with the relaxed target and mark the row."""
    relaxed = cfg.with_gamma_fu(spec.gamma_fu_fallback)
    try:
        sol = _solve_scheme(row.scheme, ch, relaxed, chan_seed)
        _score(row, ch, sol)
        row.status = f"ok_gamma_fu_{spec.gamma_fu_fallback:g}"
    except (QosInfeasibleError, NumericalFailureError, DegenerateChannelError):
        row.status = "qos_infeasible"
    return row


def convergence_trace_table(
    p_m_db_values=(30.0, 40.0, 45.0), seed: int = 0, config: NetworkConfig | None = None
) -> ResultTable:
    """Per-iteration objective of the macro-tier scheme, in the CSV schema.

    The trial column carries the iteration index; secrecy_rate_bits holds
    the iterate's secrecy bound 2*log2(t0) in bits; status is "trace".
    """
    base = config or NetworkConfig()
    table = ResultTable()
    chan_seed = trial_seed(seed, 0)
    for value in p_m_db_values:
        cfg = base.with_power_db(p_m_db=value)
        ch = sample_rayleigh_channels(cfg, chan_seed)
        sol = solve_stb_om(ch, cfg)
        for i, t0 in enumerate(sol.diagnostics.objective_trace):
            table.rows.append(
                ResultRow(
                    scheme="stb_om",
                    sweep_param="p_m_db",
                    sweep_value_db=value,
                    trial=i,
                    secrecy_rate_bits=2.0 * math.log2(max(t0, 1e-300)),
                    iterations=i,
                    status="trace",
                )
            )
    return table


def _fmt(x: float) -> str:
    return format(x, ".17e")


def write_csv(table: ResultTable, path: str) -> None:
    """Header plus one line per row; LF endings, UTF-8, full-precision
    scientific notation for the real columns."""
    lines = [CSV_HEADER]
    for r in table.rows:
        lines.append(
            ",".join(
                [
                    r.scheme,
                    r.sweep_param,
                    _fmt(r.sweep_value_db),
                    str(r.trial),
                    _fmt(r.secrecy_rate_bits),
                    _fmt(r.sinr_mu1),
                    _fmt(r.sinr_mu2),
                    _fmt(r.sinr_eve),
                    _fmt(r.sinr_fu_mean),
                    str(r.iterations),
                    _fmt(r.solve_ms),
                    r.status,
                ]
            )
        )
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def read_csv(path: str) -> ResultTable:
    """Parse a file produced by :func:`write_csv` back into a table."""
    table = ResultTable()
    with open(path, encoding="utf-8") as f:
        header = f.readline().strip()
        if header != CSV_HEADER:
            raise ValueError("unrecognized CSV header")
        for line in f:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            table.rows.append(
                ResultRow(
                    scheme=parts[0],
                    sweep_param=parts[1],
                    sweep_value_db=float(parts[2]),
                    trial=int(parts[3]),
                    secrecy_rate_bits=float(parts[4]),
                    sinr_mu1=float(parts[5]),
                    sinr_mu2=float(parts[6]),
                    sinr_eve=float(parts[7]),
                    sinr_fu_mean=float(parts[8]),
                    iterations=int(parts[9]),
                    solve_ms=float(parts[10]),
                    status=parts[11],
                )
            )
    return table


# -- named paper-figure presets ---------------------------------------------

FIGURE_NAMES = ("fig3", "fig6", "fig7", "fig8", "fig9", "fig10")

_PM_GRID = (30.0, 33.0, 36.0, 39.0, 42.0, 45.0)
_PF_GRID = (20.0, 24.0, 28.0, 32.0, 36.0, 40.0)


def figure_table(name: str, trials: int = 100, seed: int = 0) -> ResultTable:
    """Data behind one named figure, in the standard schema.

    fig3 is the convergence trace; fig6/fig9 sweep the MBS power at 40 dB
    femto power; fig7/fig10 sweep the femto power at 40 dB MBS power; fig8
    runs the MBS sweep at several femto powers, tagging sweep_param as
    "p_m_db@p_f_db=<value>" so the surface can be pivoted from one file.
    """
    base = NetworkConfig()
    if name == "fig3":
        return convergence_trace_table(seed=seed)
    if name == "fig6":
        spec = ExperimentSpec(
            config=base, sweep_param="p_m_db", sweep_values_db=_PM_GRID,
            schemes=("stb_om", "stb_smf", "stb_jmf", "benchmark"),
            trials=trials, seed=seed,
        )
        return run_experiment(spec)
    if name == "fig7":
        spec = ExperimentSpec(
            config=base, sweep_param="p_f_db", sweep_values_db=_PF_GRID,
            schemes=("stb_om", "stb_smf", "stb_jmf", "benchmark"),
            trials=trials, seed=seed,
        )
        return run_experiment(spec)
    if name == "fig8":
        table = ResultTable()
        for pf in (20.0, 30.0, 40.0):
            spec = ExperimentSpec(
                config=base.with_power_db(p_f_db=pf),
                sweep_param="p_m_db", sweep_values_db=(30.0, 35.0, 40.0, 45.0),
                schemes=("stb_smf", "stb_jmf"), trials=trials, seed=seed,
            )
            part = run_experiment(spec)
            for r in part.rows:
                r.sweep_param = f"p_m_db@p_f_db={pf:g}"
            table.rows.extend(part.rows)
        return table
    if name == "fig9":
        spec = ExperimentSpec(
            config=base, sweep_param="p_m_db", sweep_values_db=_PM_GRID,
            schemes=("stb_smf", "stb_jmf"), trials=trials, seed=seed,
        )
        return run_experiment(spec)
    if name == "fig10":
        spec = ExperimentSpec(
            config=base, sweep_param="p_f_db", sweep_values_db=_PF_GRID,
            schemes=("stb_smf", "stb_jmf"), trials=trials, seed=seed,
        )
        return run_experiment(spec)
    raise ValueError(f"unknown figure {name!r}; choose from {FIGURE_NAMES}")
