"""Batch command-line front end.

Subcommands: simulate, renewal-table, cluster-stats, pgfl, validate.
Every output file embeds the config hash and master seed; replicate r uses
the substream derived from (seed, r), so identical invocations produce
byte-identical outputs regardless of scheduling.

Exit codes: 0 success, 1 validation/run failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .cluster import cluster_size_pmf, generation_counts, simulate_cluster
from .config import RunConfig, build_kernel, build_model, config_hash, parse_config
from .distributions import kernel_mass
from .errors import ConfigError, RhpError
from .pgfl import (
    TestFunction,
    mc_pgfl_cluster,
    solve_cluster_pgfl,
    stationary_pgfl_expansion,
)
from .renewal import renewal_table
from .seeding import substream
from .simulate import (
    simulate_rhp_cluster,
    simulate_rhp_stationary,
    simulate_rhp_thinning,
)
from .validate import (
    cross_simulator_test,
    existence_preconditions,
    stationarity_and_convergence,
    time_rescaling_test,
)

EVENT_COLUMNS = ("t", "kind", "gen", "parent", "cluster", "rep")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rhp",
        description="Renewal Hawkes process: simulation, renewal numerics, p.g.fl., validation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="path to JSON config")
        p.add_argument("--out", required=True, help="output file path")
        p.add_argument("--seed", type=int, default=None, help="override sim.seed")

    p = sub.add_parser("simulate", help="simulate event streams")
    common(p)
    p.add_argument("--method", choices=("cluster", "thinning", "stationary"), default=None)
    p.add_argument("--reps", type=int, default=None, help="override sim.reps")

    p = sub.add_parser("renewal-table", help="tabulate the renewal function and density")
    common(p)
    p.add_argument("--step", type=float, default=None, help="override numeric.renewal_step")
    p.add_argument("--horizon", type=float, default=None, help="override sim.horizon")

    p = sub.add_parser("cluster-stats", help="cluster size and generation statistics")
    common(p)
    p.add_argument("--reps", type=int, default=10000, help="number of simulated clusters")
    p.add_argument("--n-max", type=int, default=15, help="pmf head length")

    p = sub.add_parser("pgfl", help="probability generating functional evaluation")
    common(p)
    p.add_argument("--z", required=True, help="test function: const:z0 or step:z0:a:b")
    p.add_argument("--mode", choices=("solver", "mc", "stationary"), required=True)
    p.add_argument("--reps", type=int, default=10000, help="MC replicates (mode=mc)")
    p.add_argument("--t0", type=float, default=0.0, help="cluster root time (mode=mc)")
    p.add_argument("--k-max", type=int, default=3, help="expansion order (mode=stationary)")

    p = sub.add_parser("validate", help="statistical validation suites")
    common(p)
    p.add_argument("--suite", choices=("rescaling", "cross", "stationarity", "existence"), required=True)
    p.add_argument("--reps", type=int, default=None, help="override sim.reps")

    return parser


def _load_config(path: str) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([f"cannot read config {path}: {exc}"]) from exc
    return parse_config(text)


def _write_text(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise RhpError(f"cannot write {path}: {exc}") from exc


def _write_json(path: str, obj: dict) -> None:
    _write_text(path, json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _meta(cfg: RunConfig, seed: int, **extra) -> dict:
    meta = {"config_sha256": config_hash(cfg), "seed": seed}
    meta.update(extra)
    return meta


def _provenance_comment(meta: dict) -> str:
    parts = " ".join(f"{k}={meta[k]}" for k in sorted(meta))
    return f"# {parts}\n"


def _format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_events(path: str, rows: list, meta: dict) -> None:
    if path.endswith(".csv"):
        lines = [_provenance_comment(meta), ",".join(EVENT_COLUMNS) + "\n"]
        for row in rows:
            lines.append(",".join(_format_cell(row[c]) for c in EVENT_COLUMNS) + "\n")
        _write_text(path, "".join(lines))
    else:
        lines = [json.dumps({"meta": meta}, sort_keys=True) + "\n"]
        for row in rows:
            lines.append(json.dumps({c: row[c] for c in EVENT_COLUMNS}) + "\n")
        _write_text(path, "".join(lines))


def _resolve(args_value, config_value):
    return config_value if args_value is None else args_value


def _cmd_simulate(args, cfg: RunConfig) -> int:
    model, kernel = build_model(cfg), build_kernel(cfg)
    method = _resolve(args.method, cfg.sim["method"])
    reps = _resolve(args.reps, cfg.sim["reps"])
    seed = _resolve(args.seed, cfg.sim["seed"])
    horizon = cfg.sim["horizon"]
    count_origin = cfg.sim["count_origin"]
    window = cfg.numeric["thinning_window"]
    rows = []
    for r in range(reps):
        rng = substream(seed, r)
        if method == "cluster":
            stream = simulate_rhp_cluster(model, kernel, horizon, rng, count_origin=count_origin, replicate=r)
        elif method == "thinning":
            stream = simulate_rhp_thinning(
                model, kernel, horizon, rng, count_origin=count_origin, window=window, replicate=r
            )
        else:
            stream = simulate_rhp_stationary(model, kernel, horizon, rng, replicate=r)
        rows.extend(stream.to_rows())
    meta = _meta(cfg, seed, method=method, reps=reps, horizon=horizon, count_origin=count_origin)
    _write_events(args.out, rows, meta)
    return 0


def _cmd_renewal_table(args, cfg: RunConfig) -> int:
    model = build_model(cfg)
    step = _resolve(args.step, cfg.numeric["renewal_step"])
    horizon = _resolve(args.horizon, cfg.sim["horizon"])
    seed = _resolve(args.seed, cfg.sim["seed"])
    table = renewal_table(model, horizon, step)
    meta = _meta(cfg, seed, step=step, horizon=horizon)
    lines = [_provenance_comment(meta), "t,phi_fn,phi_density\n"]
    for t, fn, dens in zip(table.grid, table.phi_fn, table.phi_density):
        lines.append(f"{float(t)!r},{float(fn)!r},{float(dens)!r}\n")
    _write_text(args.out, "".join(lines))
    return 0


def _cmd_cluster_stats(args, cfg: RunConfig) -> int:
    kernel = build_kernel(cfg)
    alpha = kernel_mass(kernel)
    seed = _resolve(args.seed, cfg.sim["seed"])
    reps, n_max = args.reps, args.n_max
    trees = []
    sizes = np.empty(reps)
    for r in range(reps):
        rng = substream(seed, r)
        tree = simulate_cluster(kernel, 0.0, rng)
        trees.append(tree)
        sizes[r] = tree.size
    mean_est = float(np.mean(sizes))
    se = float(np.std(sizes, ddof=1) / np.sqrt(reps))
    pmf = cluster_size_pmf(alpha, n_max)
    empirical = [float(np.mean(sizes == n)) for n in range(n_max + 1)]
    gen_stats = []
    for n in range(1, 5):
        counts = generation_counts(trees, n)
        gen_stats.append(
            {
                "generation": n,
                "mean": float(np.mean(counts)),
                "se": float(np.std(counts, ddof=1) / np.sqrt(reps)),
                "theory": alpha**n,
            }
        )
    out = {
        "meta": _meta(cfg, seed, reps=reps),
        "alpha": alpha,
        "mean_size": mean_est,
        "mean_size_se": se,
        "mean_size_theory": 1.0 / (1.0 - alpha),
        "pmf_head": [float(p) for p in pmf],
        "empirical_pmf_head": empirical,
        "generations": gen_stats,
    }
    _write_json(args.out, out)
    return 0


def _parse_test_function(text: str) -> TestFunction:
    parts = text.split(":")
    try:
        if parts[0] == "const" and len(parts) == 2:
            return TestFunction.constant(float(parts[1]))
        if parts[0] == "step" and len(parts) == 4:
            return TestFunction.step(float(parts[1]), float(parts[2]), float(parts[3]))
    except ValueError as exc:
        raise ConfigError([f"--z: {exc}"]) from exc
    raise ConfigError([f"--z: expected const:z0 or step:z0:a:b, got {text!r}"])


def _cmd_pgfl(args, cfg: RunConfig) -> int:
    model, kernel = build_model(cfg), build_kernel(cfg)
    z = _parse_test_function(args.z)
    seed = _resolve(args.seed, cfg.sim["seed"])
    tol = cfg.numeric["pgfl_tol"]
    grid_step = cfg.numeric["pgfl_grid_step"]
    if args.mode == "solver":
        sol = solve_cluster_pgfl(kernel, z, tol=tol, grid_step=grid_step)
        body = {
            "mode": "solver",
            "value": sol.value_at_zero,
            "residual": sol.residual,
            "iterations": sol.iterations,
        }
    elif args.mode == "mc":
        est = mc_pgfl_cluster(kernel, z, substream(seed), t0=args.t0, reps=args.reps)
        body = {"mode": "mc", "value": est.value, "se": est.se, "reps": est.reps}
    else:
        res = stationary_pgfl_expansion(
            model, kernel, z, k_max=args.k_max, grid_step=grid_step, pgfl_tol=tol
        )
        body = {
            "mode": "stationary",
            "value": res.value,
            "terms": res.terms,
            "residual": res.residual,
            "converged": res.converged,
        }
    body["z"] = args.z
    body["meta"] = _meta(cfg, seed)
    _write_json(args.out, body)
    return 0


def _cmd_validate(args, cfg: RunConfig) -> int:
    model, kernel = build_model(cfg), build_kernel(cfg)
    seed = _resolve(args.seed, cfg.sim["seed"])
    reps = _resolve(args.reps, cfg.sim["reps"])
    horizon = cfg.sim["horizon"]
    count_origin = cfg.sim["count_origin"]

    if args.suite == "rescaling":
        method = cfg.sim["method"]
        if method == "stationary":
            raise ConfigError(["sim.method: rescaling suite needs method cluster or thinning"])
        streams = []
        for r in range(reps):
            rng = substream(seed, r)
            if method == "cluster":
                streams.append(
                    simulate_rhp_cluster(model, kernel, horizon, rng, count_origin=count_origin, replicate=r)
                )
            else:
                streams.append(
                    simulate_rhp_thinning(
                        model,
                        kernel,
                        horizon,
                        rng,
                        count_origin=count_origin,
                        window=cfg.numeric["thinning_window"],
                        replicate=r,
                    )
                )
        report = time_rescaling_test(streams, model, kernel)
    elif args.suite == "cross":
        report = cross_simulator_test(
            model, kernel, horizon, reps, seed=seed, window=horizon / 10.0, count_origin=count_origin
        )
    elif args.suite == "stationarity":
        report = stationarity_and_convergence(model, kernel, reps=reps, seed=seed, count_origin=count_origin)
    else:
        report = existence_preconditions(model, kernel)

    out = report.to_dict()
    out["meta"] = _meta(cfg, seed, suite=args.suite)
    _write_json(args.out, out)
    return 0 if report.passed else 1


_COMMANDS = {
    "simulate": _cmd_simulate,
    "renewal-table": _cmd_renewal_table,
    "cluster-stats": _cmd_cluster_stats,
    "pgfl": _cmd_pgfl,
    "validate": _cmd_validate,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        return _COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RhpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
