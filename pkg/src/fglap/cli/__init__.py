"""Command line: ``fglap {solve,sweep,minimax2,verify,oracle,report}``.

Exit codes: 0 success, 1 verification failure, 2 config error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .. import kernels
from ..domain import BC
from ..solver import (InfeasibleError, maximize_I_on_J, minimax_k2, minimize_J_on_I,
                      oracle_spectrum_p2, sweep_alpha)
from ..young import StructureError
from .config import ConfigError, RunConfig, emit_config, load_config, parse_config
from .output import render_report, version_string, write_csv, write_json
from .verify import run_verify

__all__ = ["main", "run", "parse_config", "emit_config", "load_config", "ConfigError", "RunConfig",
           "EXIT_OK", "EXIT_VERIFY", "EXIT_CONFIG", "EXIT_IO"]

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

# subcommand -> modes it accepts; the first is used when the config names none
_COMMAND_MODES = {
    "solve": ("solve-minJ", "solve-maxI"),
    "sweep": ("sweep",),
    "minimax2": ("minimax-k2",),
    "verify": ("verify",),
    "oracle": ("oracle",),
}


class _IOFailure(Exception):
    pass


def _history_rows(ep):
    return [(int(r[0]), r[1], r[2], r[3], r[4]) for r in ep.history]


def _eigenfunction_rows(grid, u):
    return zip(np.asarray(grid.x).tolist(), np.asarray(u).tolist())


def _run_solve(cfg: RunConfig, F, grid, log):
    solve = minimize_J_on_I if cfg.mode == "solve-minJ" else maximize_I_on_J
    ep = solve(F, grid, cfg.solver_config())
    log(f"lambda = {ep.lam:.12g}  J = {ep.value_J:.12g}  I = {ep.value_I:.12g}  "
        f"residual = {ep.residual:.3g}  iterations = {ep.iterations}  converged = {ep.converged}")
    tables = {
        "history.csv": (["iteration", "J", "I", "lambda", "residual"], _history_rows(ep)),
        "eigenfunction.csv": (["x", "u"], _eigenfunction_rows(grid, ep.u.values)),
    }
    return ep.as_dict(), tables, EXIT_OK


def _run_sweep(cfg: RunConfig, F, grid, log):
    if cfg.alphas is None:
        raise ConfigError("sweep mode needs solver.alphas (a list or { start, stop, step })",
                          "solver.alphas")
    res = sweep_alpha(F, grid, cfg.solver_config(cfg.alphas[0]), cfg.alphas,
                      mode=cfg.sweep_objective, warm_start=cfg.warm_start)
    for r in res.rows():
        log(f"alpha = {r['alpha']:<8g} lambda = {r['lambda']:.12g}  converged = {r['converged']}")
    log(f"inf_lambda = {res.inf_lambda:.12g}")
    rows = res.rows()
    result = {"rows": rows, "inf_lambda": res.inf_lambda, "objective": res.mode,
              "all_converged": bool(np.all(res.converged))}
    history = [(a, int(h[0]), h[1], h[2], h[3], h[4])
               for a, ep in zip(res.alphas, res.pairs) for h in ep.history]
    tables = {
        "sweep.csv": (["alpha", "lambda", "value", "converged", "iterations"],
                      [(r["alpha"], r["lambda"], r["value"], r["converged"], r["iterations"])
                       for r in rows]),
        "history.csv": (["alpha", "iteration", "J", "I", "lambda", "residual"], history),
    }
    return result, tables, EXIT_OK


def _run_minimax(cfg: RunConfig, F, grid, log):
    ep = minimax_k2(F, grid, cfg.solver_config(), basis_pairs=cfg.basis_pairs,
                    theta_samples=cfg.theta_samples, n_modes=cfg.n_modes)
    log(f"loop level (upper bound) = {ep.value_J:.12g}  lambda at the loop maximum = {ep.lam:.12g}")
    loop = ep.loop
    tables = {
        "history.csv": (["iteration", "J", "I", "lambda", "residual"], _history_rows(ep)),
        "eigenfunction.csv": (["x", "u"], _eigenfunction_rows(grid, ep.u.values)),
        "loop.csv": (["theta", "J", "scale"], zip(loop["theta"].tolist(), loop["J"].tolist(),
                                                   loop["scale"].tolist())),
    }
    return ep.as_dict(), tables, EXIT_OK


def _run_verify(cfg: RunConfig, F, grid, log):
    rep = run_verify(F, grid, cfg.s, samples=cfg.samples, seed=cfg.seed,
                     tilde_factor=cfg.tilde_factor)
    for r in rep.suites:
        tag = "PASS" if r.passed else ("FAIL" if r.hard else "info")
        log(f"[{tag}] {r.name:<26} violations = {r.violations:<6d} worst margin = {r.worst_margin:.3g}")
    log("all hard suites passed" if rep.ok else "hard suite failure")
    return rep.as_dict(), {}, EXIT_OK if rep.ok else EXIT_VERIFY


def _run_oracle(cfg: RunConfig, F, grid, log):
    beta = cfg.beta if cfg.bc == "robin" else None
    orc = oracle_spectrum_p2(grid, cfg.s, BC.parse(cfg.bc), beta)
    k = min(cfg.oracle_modes, orc.eigenvalues.size)
    ev = orc.eigenvalues[:k]
    log("eigenvalues (G = t^2): " + ", ".join(f"{v:.12g}" for v in ev))
    x = np.asarray(grid.x)
    rows = [(x[i], *orc.vectors[i, :k].tolist()) for i in range(grid.n_nodes)]
    tables = {"modes.csv": (["x"] + [f"u{j + 1}" for j in range(k)], rows)}
    return {"eigenvalues": ev, "count": int(orc.eigenvalues.size)}, tables, EXIT_OK


_RUNNERS = {"solve": _run_solve, "sweep": _run_sweep, "minimax2": _run_minimax,
            "verify": _run_verify, "oracle": _run_oracle}


def run(command: str, cfg: RunConfig, out_dir: Path | None = None, quiet: bool = True) -> int:
    """Execute one subcommand and write its files; returns the exit code."""
    allowed = _COMMAND_MODES[command]
    if cfg.mode is None:
        cfg = cfg.with_(mode=allowed[0])
    elif cfg.mode not in allowed:
        raise ConfigError(f"mode {cfg.mode!r} does not match subcommand {command!r} "
                          f"(expected {' or '.join(allowed)})", "mode")
    log = (lambda msg: None) if quiet else (lambda msg: print(msg, flush=True))
    out_dir = Path(cfg.out if out_dir is None else out_dir)
    F = cfg.young_function()
    grid = cfg.grid()
    t0 = time.perf_counter()
    try:
        result, tables, code = _RUNNERS[command](cfg, F, grid, log)
    except (StructureError, InfeasibleError) as exc:
        raise ConfigError(str(exc)) from None
    wall = time.perf_counter() - t0
    payload = {
        "mode": cfg.mode,
        "config": cfg.to_dict(),
        "version": version_string(),
        "backend": kernels.BACKEND,
        "grid": {"h": grid.h, "n_nodes": grid.n_nodes, "n_exterior": grid.n_exterior},
        "result": result,
        "wall_time": wall,
    }
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        write_json(out_dir / "results.json", payload)
        for name, (header, rows) in tables.items():
            write_csv(out_dir / name, header, rows)
    except OSError as exc:
        raise _IOFailure(f"cannot write results to {exc.filename or out_dir}: {exc.strerror or exc}") from None
    log(f"wrote {out_dir}")
    return code


def _report(path: Path) -> int:
    target = path / "results.json" if path.is_dir() else path
    try:
        data = json.loads(target.read_text(encoding="utf-8"))
    except OSError as exc:
        print(f"error: cannot read {target}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"error: {target} is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_IO
    sys.stdout.write(render_report(data))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fglap", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, help="output directory (overrides the config)")
    common.add_argument("--seed", type=int, help="random seed (overrides the config)")
    common.add_argument("--quiet", action="store_true", help="no progress output")
    helps = {"solve": "constrained eigenpair (mode solve-minJ or solve-maxI)",
             "sweep": "one solve per alpha with warm starts",
             "minimax2": "odd-loop upper bound for the second minimax level",
             "verify": "randomised inequality suites",
             "oracle": "quadratic (G = t^2) reference spectrum"}
    for name, text in helps.items():
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--config", type=Path, required=True, help="TOML run configuration")
    p = sub.add_parser("report", parents=[common], help="summarise a results directory")
    p.add_argument("path", type=Path, nargs="?", help="results directory or results.json")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "report":
        path = args.path or args.out
        if path is None:
            print("error: report needs a results directory", file=sys.stderr)
            return EXIT_CONFIG
        return _report(path)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("must be >= 0", "--seed")
            cfg = cfg.with_(seed=args.seed)
        return run(args.command, cfg, args.out, quiet=args.quiet)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _IOFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: cannot read {exc.filename or args.config}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
