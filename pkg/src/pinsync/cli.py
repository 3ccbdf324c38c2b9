"""Command-line entry point: ``pinsync <command> [options]``.

Every command accepts ``--config`` (an INI experiment file, see
:mod:`pinsync.harness`) and flags that override it.  Without a config the
flags alone describe a single network.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .generators import GenSpec, generate
from .graph import EdgeListError, write_edge_list
from .harness import (
    TRACE_HEADER,
    ConfigError,
    ExperimentConfig,
    NetworkSource,
    load_config,
    run_curve_experiment,
    run_real_network_suite,
    run_robustness_experiment,
    run_selection,
    run_simulation_experiment,
    run_timing_benchmark,
    substream_seed,
    write_csv,
)
from .strategies import STRATEGIES

log = logging.getLogger("pinsync")


def _csv_list(text, conv=str):
    return tuple(conv(t.strip()) for t in text.split(",") if t.strip())


def _budget(text):
    v = float(text)
    return int(v) if v >= 1 and v == int(v) else v


def _common(p: argparse.ArgumentParser, network=True):
    p.add_argument("--config", help="INI experiment config")
    p.add_argument("--seed", type=int, help="root seed (default 0)")
    p.add_argument("--output", "-o", help="output directory")
    if network:
        g = p.add_argument_group("network (replaces the config's networks)")
        g.add_argument("--graph", action="append", metavar="PATH", help="edge-list file; repeatable")
        g.add_argument("--model", choices=("BA", "ER", "WS", "ba", "er", "ws"))
        g.add_argument("--n", type=int, default=1000)
        g.add_argument("--ba-m", type=int, default=3)
        g.add_argument("--er-p", type=float, default=0.1)
        g.add_argument("--ws-k", type=int, default=10)
        g.add_argument("--ws-p", type=float, default=0.1)
        g.add_argument("--connected", action="store_true", help="resample until connected")


def _selection_flags(p):
    p.add_argument("--strategies", type=_csv_list, help=f"comma list from {','.join(STRATEGIES)}")
    p.add_argument("--k", type=_budget, help="pin budget: count, or fraction of N")
    p.add_argument("--k-points", type=int)
    p.add_argument("--k-list", type=lambda t: _csv_list(t, _budget))


def _dynamics_flags(p):
    p.add_argument("--c", type=float)
    p.add_argument("--gain", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--t-max", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--chen-variant", choices=("standard", "paper_literal"))
    p.add_argument("--sim-trials", type=int)
    p.add_argument("--calibrate", type=float, metavar="MARGIN",
                   help="choose c per network so the weakest pin set has this stability margin")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pinsync", description="Pinning-control workbench.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write synthetic networks as edge lists")
    _common(p)

    p = sub.add_parser("select", help="run selection strategies, write trace CSV")
    _common(p)
    _selection_flags(p)

    p = sub.add_parser("curve", help="lambda1-vs-k curves and selection timings")
    _common(p)
    _selection_flags(p)

    p = sub.add_parser("simulate", help="pinned Chen-network sync-time trials")
    _common(p)
    _selection_flags(p)
    _dynamics_flags(p)
    p.add_argument("--ratios", type=lambda t: _csv_list(t, float), default=(0.0,),
                   help="pin failure ratios (default 0)")

    p = sub.add_parser("robustness", help="effective lambda1 under random pin failures")
    _common(p)
    _selection_flags(p)
    p.add_argument("--ratios", type=lambda t: _csv_list(t, float))
    p.add_argument("--trials", type=int)

    p = sub.add_parser("bench", help="selection wall-time scaling")
    _common(p)
    _selection_flags(p)
    p.add_argument("--sizes", type=lambda t: _csv_list(t, int),
                   help="node counts for --model (default 500,1000,1500,2000)")
    p.add_argument("--no-warmup", action="store_true")

    p = sub.add_parser("real", help="curves, failures and plateau on edge-list files")
    _common(p, network=False)
    _selection_flags(p)
    p.add_argument("--ratios", type=lambda t: _csv_list(t, float))
    p.add_argument("--trials", type=int)
    p.add_argument("paths", nargs="+")
    return ap


def _networks(args, seed):
    if getattr(args, "graph", None):
        return tuple(NetworkSource(Path(p).stem, path=p) for p in args.graph)
    if getattr(args, "model", None):
        sizes = getattr(args, "sizes", None) or (args.n,)
        nets = []
        for i, n in enumerate(sizes):
            spec = GenSpec(args.model, n, args.ba_m, args.er_p, args.ws_k, args.ws_p,
                           seed=substream_seed(seed, "generator", i))
            name = f"{spec.model.lower()}{n}" if len(sizes) > 1 else spec.model.lower()
            nets.append(NetworkSource(name, spec=spec, require_connected=args.connected))
        return tuple(nets)
    return None


def build_config(args) -> ExperimentConfig:
    overrides = {"seed": args.seed, "output": args.output}
    for key in ("strategies", "k", "k_points", "k_list", "ratios", "trials", "sim_trials", "calibrate"):
        overrides[key] = getattr(args, key, None)
    if args.config:
        cfg = load_config(args.config, overrides)
    else:
        cfg = load_config("", overrides)
    nets = _networks(args, cfg.seed)
    if nets is not None:
        cfg = replace(cfg, networks=nets)
    dyn = {f: getattr(args, f, None) for f in ("c", "gain", "dt", "t_max", "eps", "chen_variant")}
    dyn = {k: v for k, v in dyn.items() if v is not None}
    if dyn:
        cfg = replace(cfg, dynamics=replace(cfg.dynamics, **dyn))
    return cfg


def _need_networks(cfg, command):
    if not cfg.networks and command != "real":
        raise ConfigError("no network given: use --config, --graph or --model")


def cmd_generate(cfg, args):
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    for src in cfg.networks:
        if src.spec is None:
            raise ConfigError(f"network {src.name!r} is a file, nothing to generate")
        g = generate(src.spec, require_connected=src.require_connected)
        path = out / f"{src.name}.txt"
        write_edge_list(g, path)
        print(f"{path}\tN={g.n}\tM={g.m}")


def cmd_select(cfg, args):
    out = Path(cfg.output)
    for src in cfg.networks:
        g = src.load()
        k = cfg.budgets(g.n)[-1]
        picks = run_selection(g, cfg.strategies, k)
        path = write_csv(out / f"trace_{src.name}.csv", TRACE_HEADER,
                         (row for s in cfg.strategies for row in picks[s][1].rows(g.labels)))
        for s in cfg.strategies:
            tr = picks[s][1]
            print(f"{src.name}\t{s}\tk={k}\tlambda1={tr.lambdas[-1]:.10g}\ttime={tr.total_time:.4g}s")
        print(path)


def cmd_curve(cfg, args):
    for res in run_curve_experiment(cfg):
        for p in res.paths:
            print(p)


def cmd_simulate(cfg, args):
    rows = run_simulation_experiment(cfg, ratios=args.ratios)
    for net, rs in rows.items():
        for s in cfg.strategies:
            times = [r[4] for r in rs if r[0] == s]
            mean = sum(times) / len(times)
            print(f"{net}\t{s}\tmean_sync_time={mean:.6g}\ttrials={len(times)}")


def cmd_robustness(cfg, args):
    res = run_robustness_experiment(cfg)
    for net in res:
        print(Path(cfg.output) / f"robustness_{net}.csv")


def cmd_bench(cfg, args):
    if len(cfg.networks) < 3:
        nets = []
        for i, n in enumerate((500, 1000, 1500, 2000)):
            spec = GenSpec("ER", n, er_p=0.2, seed=substream_seed(cfg.seed, "generator", i))
            nets.append(NetworkSource(f"er{n}", spec=spec))
        cfg = replace(cfg, networks=tuple(nets))
    rep = run_timing_benchmark(cfg, warmup=not args.no_warmup)
    for r in rep.records:
        print("\t".join(str(v) for v in r))
    print(f"pbo exponent (total vs M): {rep.pbo_exponent}")
    print(f"pbo exponent (per pin vs M): {rep.pbo_pin_exponent}")
    for net, v in sorted(rep.speedups.items()):
        print(f"bfg/pbo speedup [{net}]: {v:.3g}")


def cmd_real(cfg, args):
    _, _, plateau = run_real_network_suite(args.paths, cfg)
    for row in plateau:
        print("\t".join(str(v) for v in row))


COMMANDS = {
    "generate": cmd_generate,
    "select": cmd_select,
    "curve": cmd_curve,
    "simulate": cmd_simulate,
    "robustness": cmd_robustness,
    "bench": cmd_bench,
    "real": cmd_real,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(args)
        if args.command != "bench":
            _need_networks(cfg, args.command)
        COMMANDS[args.command](cfg, args)
    except (ConfigError, EdgeListError, FileNotFoundError, ValueError, RuntimeError) as exc:
        print(f"pinsync {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
