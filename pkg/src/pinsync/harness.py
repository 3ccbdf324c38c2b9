"""Experiment orchestration: configs, seeding, CSV outputs and timing.

Configs are INI files.  One ``[network]`` section, or several named
``[network:NAME]`` sections, describe the graphs; the remaining sections hold
the experiment matrix::

    [network:ba]
    model = BA
    n = 1000
    ba_m = 3

    [network:celegans]
    path = data/celegans.txt

    [selection]
    strategies = degree, betweenness, bfg, pbo
    k = 0.3
    k_points = 30

    [robustness]
    ratios = 0.1, 0.2, 0.3
    trials = 30

    [dynamics]
    c = 5
    gain = 30
    trials = 10
    # calibrate = 1.5   (pick c per network, see dynamics.calibrate_coupling)

    [run]
    seed = 0
    output = results
"""

from __future__ import annotations

import configparser
import csv
import logging
import os
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .dynamics import DynamicsConfig, FailureMask, calibrate_coupling, simulate
from .generators import GenSpec, generate, gen_ba
from .graph import Graph, PinSet, load_edge_list
from .robustness import apply_failures, effective_lambda1, robustness_curve
from .spectral import DEFAULT_TOL
from .strategies import STRATEGIES, SelectionTrace, check_trace, select
from .validation import check_budget

log = logging.getLogger(__name__)

WORKERS_ENV = "PINSYNC_WORKERS"
TRACE_HEADER = ("strategy", "step", "node_label", "lambda1", "score", "elapsed_ms")
TIMING_HEADER = ("network", "strategy", "N", "M", "k", "wall_time_s", "time_per_pin_s")
SIM_HEADER = ("strategy", "k", "seed", "failure_ratio", "sync_time", "final_error", "lambda1")
ROBUST_HEADER = ("strategy", "k", "failure_ratio", "lambda1_mean", "lambda1_std", "trials")


class ConfigError(ValueError):
    pass


def substream_seed(root: int, name: str, *index: int) -> int:
    """Deterministic 32-bit seed for the named sub-stream of ``root``."""
    ss = np.random.SeedSequence([int(root), zlib.crc32(name.encode()), *map(int, index)])
    return int(ss.generate_state(1)[0])


@dataclass(frozen=True)
class NetworkSource:
    name: str
    spec: GenSpec | None = None
    path: str | None = None
    require_connected: bool = False

    def load(self) -> Graph:
        if self.path is not None:
            if not os.path.exists(self.path):
                raise FileNotFoundError(f"dataset {self.name!r}: file not found: {self.path}")
            return load_edge_list(self.path)
        return generate(self.spec, require_connected=self.require_connected)


@dataclass(frozen=True)
class ExperimentConfig:
    networks: tuple[NetworkSource, ...]
    strategies: tuple[str, ...] = STRATEGIES
    k: float = 0.3
    k_points: int = 30
    k_list: tuple[float, ...] = ()
    ratios: tuple[float, ...] = (0.1, 0.2, 0.3)
    trials: int = 30
    dynamics: DynamicsConfig = field(default_factory=DynamicsConfig)
    sim_trials: int = 10
    calibrate: float | None = None
    seed: int = 0
    output: str = "results"

    def budgets(self, n: int) -> list[int]:
        """Absolute k grid for an ``n``-node network, ascending, all ``< n``."""
        if self.k_list:
            ks = [check_budget(k, n) for k in self.k_list]
        else:
            kmax = check_budget(self.k, n)
            pts = max(1, min(self.k_points, kmax))
            ks = np.unique(np.round(np.linspace(kmax / pts, kmax, pts)).astype(int)).tolist()
        return sorted(set(max(1, int(k)) for k in ks))


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.replace(",", " ").split())


def _budget(text: str):
    val = float(text)
    return int(val) if val >= 1 and val == int(val) else val


def _bool(text: str) -> bool:
    return text.strip().lower() in ("1", "true", "yes", "on")


def load_config(path_or_text, overrides: dict | None = None) -> ExperimentConfig:
    """Parse an INI experiment config (file path or literal text)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    as_path = isinstance(path_or_text, os.PathLike) or (
        isinstance(path_or_text, str) and path_or_text.strip() and "\n" not in path_or_text
        and not path_or_text.lstrip().startswith("["))
    try:
        if as_path:
            with open(path_or_text) as fh:
                parser.read_file(fh)
            base = Path(path_or_text).parent
        else:
            parser.read_string(str(path_or_text))
            base = Path(".")
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    overrides = dict(overrides or {})
    run = parser["run"] if parser.has_section("run") else {}
    seed = overrides.pop("seed", None)
    seed = int(run.get("seed", 0)) if seed is None else int(seed)
    nets = []
    for sec in parser.sections():
        if sec != "network" and not sec.startswith("network:"):
            continue
        s = parser[sec]
        name = sec.split(":", 1)[1] if ":" in sec else s.get("name", "network")
        if "path" in s:
            p = Path(s["path"])
            nets.append(NetworkSource(name, path=str(p if p.is_absolute() else base / p)))
            continue
        if "model" not in s:
            raise ConfigError(f"[{sec}] needs either 'model' or 'path'")
        spec = GenSpec(
            model=s["model"], n=int(s["n"]),
            ba_m=int(s.get("ba_m", 3)), er_p=float(s.get("er_p", 0.1)),
            ws_k=int(s.get("ws_k", 10)), ws_p=float(s.get("ws_p", 0.1)),
            seed=int(s["seed"]) if "seed" in s else substream_seed(seed, "generator", len(nets)),
        )
        nets.append(NetworkSource(name, spec=spec,
                                  require_connected=_bool(s.get("require_connected", "false"))))
    kwargs: dict = {"networks": tuple(nets), "seed": seed,
                    "output": run.get("output", "results")}
    if parser.has_section("selection"):
        s = parser["selection"]
        if "strategies" in s:
            kwargs["strategies"] = tuple(t.strip().lower() for t in s["strategies"].split(",") if t.strip())
        if "k" in s:
            kwargs["k"] = _budget(s["k"])
        if "k_points" in s:
            kwargs["k_points"] = int(s["k_points"])
        if "k_list" in s:
            kwargs["k_list"] = tuple(_budget(t) for t in s["k_list"].replace(",", " ").split())
    if parser.has_section("robustness"):
        s = parser["robustness"]
        if "ratios" in s:
            kwargs["ratios"] = _floats(s["ratios"])
        if "trials" in s:
            kwargs["trials"] = int(s["trials"])
    dyn = {}
    if parser.has_section("dynamics"):
        s = dict(parser["dynamics"])
        if "trials" in s:
            kwargs["sim_trials"] = int(s.pop("trials"))
        if "calibrate" in s:
            kwargs["calibrate"] = float(s.pop("calibrate"))
        for f in fields(DynamicsConfig):
            if f.name not in s:
                continue
            raw = s.pop(f.name)
            if f.name == "chen":
                dyn["chen"] = _floats(raw)
            elif f.name == "chen_variant":
                dyn["chen_variant"] = raw.strip()
            elif f.name in ("seed", "sample_every"):
                dyn[f.name] = int(raw)
            else:
                dyn[f.name] = float(raw)
        if s:
            raise ConfigError(f"unknown [dynamics] keys: {sorted(s)}")
        kwargs["dynamics"] = DynamicsConfig(**dyn)
    if "seed" not in dyn:
        kwargs["dynamics"] = replace(kwargs.get("dynamics", DynamicsConfig()),
                                     seed=substream_seed(seed, "initial_conditions"))
    cfg = ExperimentConfig(**kwargs)
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if overrides:
        cfg = replace(cfg, **overrides)
    for s in cfg.strategies:
        if s not in STRATEGIES:
            raise ConfigError(f"unknown strategy {s!r}")
    return cfg


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def pmap(fn: Callable, items: Sequence) -> list:
    """Map over ``items``, in a process pool when ``PINSYNC_WORKERS > 1``."""
    workers = worker_count()
    if workers == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return path


@dataclass
class CurveResult:
    network: str
    graph: Graph
    traces: dict[str, SelectionTrace]
    paths: list[Path] = field(default_factory=list)

    def lambda_at(self, strategy: str, k: int) -> float:
        return float(self.traces[strategy].lambdas[k - 1])


def run_selection(g: Graph, strategies: Sequence[str], k: int, tol: float = DEFAULT_TOL):
    """Run each strategy once; returns ``{strategy: (PinSet, trace)}``."""
    out = {}
    for s in strategies:
        t0 = time.perf_counter()
        out[s] = select(g, s, k, tol=tol)
        log.info("%s: k=%d done in %.2fs", s, k, time.perf_counter() - t0)
        bad = check_trace(g, out[s][1])
        if bad:
            raise RuntimeError(f"{s}: interlacing audit failed: {bad[:3]}")
    return out


def run_curve_experiment(cfg: ExperimentConfig) -> list[CurveResult]:
    """Lambda1-vs-k traces and selection timings per network and strategy.

    Writes ``curve_<net>.csv`` (trace rows), ``timing_<net>.csv`` and, when
    both greedy strategies ran, ``gap_<net>.csv`` with the PBO-BFG gap.
    """
    out_dir = Path(cfg.output)
    results = []
    for src in cfg.networks:
        g = src.load()
        ks = cfg.budgets(g.n)
        picks = run_selection(g, cfg.strategies, ks[-1])
        traces = {s: tr for s, (_, tr) in picks.items()}
        res = CurveResult(src.name, g, traces)
        res.paths.append(write_csv(
            out_dir / f"curve_{src.name}.csv", TRACE_HEADER,
            (row for s in cfg.strategies for row in traces[s].rows(g.labels))))
        res.paths.append(write_csv(
            out_dir / f"timing_{src.name}.csv", TIMING_HEADER,
            ((src.name, s, g.n, g.m, ks[-1], traces[s].total_time, traces[s].total_time / ks[-1])
             for s in cfg.strategies)))
        if "pbo" in traces and "bfg" in traces:
            res.paths.append(write_csv(
                out_dir / f"gap_{src.name}.csv", ("k", "lambda1_pbo", "lambda1_bfg", "gap"),
                ((k, res.lambda_at("pbo", k), res.lambda_at("bfg", k),
                  res.lambda_at("pbo", k) - res.lambda_at("bfg", k)) for k in ks)))
        results.append(res)
    return results


def run_robustness_experiment(cfg: ExperimentConfig, selections: dict | None = None):
    """Failure sweeps; writes ``robustness_<net>.csv``.

    ``selections`` may map network name to ``{strategy: PinSet}`` so curves
    computed earlier are reused.  Returns ``{network: {strategy: curve}}``.
    """
    out_dir = Path(cfg.output)
    ratios = (0.0,) + tuple(r for r in cfg.ratios if r != 0.0)
    result = {}
    for src in cfg.networks:
        g = src.load()
        ks = cfg.budgets(g.n)
        seed = substream_seed(cfg.seed, "failures", zlib.crc32(src.name.encode()))
        have = (selections or {}).get(src.name, {})

        def cell(strategy, g=g, ks=ks, seed=seed, have=have):
            return robustness_curve(g, strategy, ks, ratios, trials=cfg.trials,
                                    seed=seed, pins=have.get(strategy))

        curves = dict(zip(cfg.strategies, pmap(cell, list(cfg.strategies))))
        write_csv(out_dir / f"robustness_{src.name}.csv", ROBUST_HEADER,
                  (row for s in cfg.strategies for row in curves[s].csv_rows()))
        result[src.name] = curves
    return result


def _sim_cell(args):
    g, pins, k, ratio, dyn, trial, fail_seed, strategy = args
    mask = apply_failures(pins, ratio, fail_seed) if ratio > 0 else FailureMask.none(pins)
    trial_cfg = replace(dyn, seed=dyn.seed + trial)
    summary = simulate(g, pins, trial_cfg, mask)
    lam = effective_lambda1(g, pins, mask)
    return (strategy, k, trial_cfg.seed, ratio, summary.sync_time, summary.final_error, lam)


def run_simulation_experiment(cfg: ExperimentConfig, k: int | None = None,
                              ratios: Sequence[float] = (0.0,), selections: dict | None = None):
    """Sync-time trials; writes ``simulate_<net>.csv`` and returns the rows.

    Trial ``t`` draws initial states from ``dynamics.seed + t``; every
    strategy sees the same initial states.  With ``cfg.calibrate`` set, the
    coupling strength is chosen per network from the selected pin sets.
    """
    out_dir = Path(cfg.output)
    all_rows = {}
    for src in cfg.networks:
        g = src.load()
        kk = k if k is not None else cfg.budgets(g.n)[-1]
        have = (selections or {}).get(src.name)
        pins = have if have is not None else {s: p for s, (p, _) in run_selection(g, cfg.strategies, kk).items()}
        dyn = cfg.dynamics
        if cfg.calibrate is not None:
            dyn = calibrate_coupling(g, [pins[s].prefix(kk) for s in cfg.strategies], dyn, cfg.calibrate)
            log.info("%s: calibrated c=%.6g dt=%.3g", src.name, dyn.c, dyn.dt)
        jobs = []
        for s in cfg.strategies:
            for ratio in ratios:
                for t in range(cfg.sim_trials):
                    fseed = substream_seed(cfg.seed, "failures", zlib.crc32(src.name.encode()), t)
                    jobs.append((g, pins[s].prefix(kk), kk, float(ratio), dyn, t, fseed, s))
        rows = pmap(_sim_cell, jobs)
        write_csv(out_dir / f"simulate_{src.name}.csv", SIM_HEADER, rows)
        all_rows[src.name] = rows
    return all_rows


def _loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


@dataclass
class TimingReport:
    records: list[tuple]
    pbo_exponent: float | None  # total selection time vs M
    pbo_pin_exponent: float | None  # time per pinned node vs M
    speedups: dict[str, float]


def run_timing_benchmark(cfg: ExperimentConfig, warmup: bool = True) -> TimingReport:
    """Selection wall-time per strategy and network size.

    Fits the log-log slope of PBO selection time against ``M`` (with ``k`` a
    fixed fraction of ``N`` this folds in the growth of ``k``), the same slope
    per pinned node, and reports BFG/PBO speedups.
    Writes ``timing.csv`` and ``timing_summary.csv``.
    """
    if len(cfg.networks) < 3:
        raise ConfigError("timing benchmark needs at least 3 network sizes")
    out_dir = Path(cfg.output)
    if warmup:
        small = gen_ba(60, 2, 0)
        for s in cfg.strategies:
            select(small, s, 5, trace=False)
    records = []
    for src in cfg.networks:
        g = src.load()
        k = cfg.budgets(g.n)[-1]
        for s in cfg.strategies:
            t0 = time.perf_counter()
            _, tr = select(g, s, k, trace=False)
            wall = time.perf_counter() - t0
            records.append((src.name, s, g.n, g.m, k, wall, wall / k))
    write_csv(out_dir / "timing.csv", TIMING_HEADER, records)
    pbo = [r for r in records if r[1] == "pbo"]
    exp_pin = _loglog_slope([r[3] for r in pbo], [r[6] for r in pbo]) if len(pbo) >= 2 else None
    exp_tot = _loglog_slope([r[3] for r in pbo], [r[5] for r in pbo]) if len(pbo) >= 2 else None
    speedups = {}
    for name in {r[0] for r in records}:
        by = {r[1]: r[5] for r in records if r[0] == name}
        if "pbo" in by and "bfg" in by:
            speedups[name] = by["bfg"] / by["pbo"]
    summary = [("pbo_exponent_total_vs_M", exp_tot), ("pbo_exponent_per_pin_vs_M", exp_pin)]
    summary += [(f"bfg_over_pbo[{n}]", v) for n, v in sorted(speedups.items())]
    write_csv(out_dir / "timing_summary.csv", ("quantity", "value"), summary)
    return TimingReport(records, exp_tot, exp_pin, speedups)


def run_real_network_suite(paths: Sequence[str], cfg: ExperimentConfig):
    """Curves and failure sweeps on user-supplied edge lists.

    Also records each strategy's plateau (final ``lambda1``) and checks it
    against the smallest degree left unpinned.  Writes ``plateau.csv``.
    """
    missing = [p for p in paths if not os.path.exists(p)]
    if missing:
        raise FileNotFoundError("missing dataset file(s): " + ", ".join(missing))
    sources = tuple(NetworkSource(Path(p).stem, path=str(p)) for p in paths)
    sub = replace(cfg, networks=sources)
    curves = run_curve_experiment(sub)
    selections = {}
    plateau = []
    for res in curves:
        g = res.graph
        selections[res.network] = {}
        for s, tr in res.traces.items():
            pinned = np.zeros(g.n, dtype=bool)
            pinned[tr.nodes] = True
            bound = int(g.degrees[~pinned].min())
            plateau.append((res.network, s, g.n, g.m, int(g.degrees.max()), int(g.degrees.min()),
                            tr.k, float(tr.lambdas[-1]), bound))
            selections[res.network][s] = PinSet(tuple(tr.nodes), s)
    write_csv(Path(cfg.output) / "plateau.csv",
              ("network", "strategy", "N", "M", "max_degree", "min_degree", "k",
               "lambda1_final", "min_unpinned_degree"), plateau)
    robust = run_robustness_experiment(sub, selections)
    return curves, robust, plateau
