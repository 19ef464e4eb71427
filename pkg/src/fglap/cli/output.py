"""Result files: results.json, CSV tables and the plain-text report."""
from __future__ import annotations

import csv
import json
import math
import os
import subprocess
from pathlib import Path

import numpy as np

from .. import __version__

__all__ = ["version_string", "to_jsonable", "write_json", "write_csv", "render_report"]


def _git(*args) -> str | None:
    try:
        r = subprocess.run(["git", "describe", *args], cwd=Path(__file__).resolve().parent,
                           capture_output=True, text=True, timeout=10)
    except (OSError, subprocess.SubprocessError):
        return None
    out = r.stdout.strip()
    return out if r.returncode == 0 and out else None


def version_string() -> str:
    """``git describe``-style version of the source tree, or the package version."""
    tagged = _git("--tags", "--dirty", "--abbrev=7")
    if tagged:
        return tagged
    commit = _git("--always", "--dirty", "--abbrev=7")
    return f"v{__version__}-g{commit}" if commit else f"v{__version__}"


def to_jsonable(obj):
    """Plain Python types only; non-finite floats become ``None``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def write_json(path: Path, payload: dict):
    text = json.dumps(to_jsonable(payload), sort_keys=True, indent=2, ensure_ascii=False,
                      allow_nan=False)
    _write_text(path, text + "\n")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def write_csv(path: Path, header, rows):
    """RFC-4180 CSV (CRLF line ends) with 17 significant digits for floats."""
    tmp = Path(str(path) + ".tmp")
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    os.replace(tmp, path)


def _write_text(path: Path, text: str):
    tmp = Path(str(path) + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


# -- report ---------------------------------------------------------------------


def _num(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def _table(header, rows) -> list[str]:
    cells = [[str(h) for h in header]] + [[_num(v) for v in r] for r in rows]
    widths = [max(len(r[k]) for r in cells) for k in range(len(header))]
    line = lambda r: "  ".join(c.rjust(w) for c, w in zip(r, widths))  # noqa: E731
    out = [line(cells[0]), "  ".join("-" * w for w in widths)]
    out += [line(r) for r in cells[1:]]
    return out


def render_report(data: dict) -> str:
    """Plain-text summary of a parsed results.json."""
    cfg = data.get("config", {})
    mode = data.get("mode", "?")
    lines = [f"mode      {mode}",
             f"version   {data.get('version', '?')}",
             f"young     {cfg.get('young')}",
             f"domain    {cfg.get('domain')}",
             f"bc        {cfg.get('bc')}",
             f"s         {cfg.get('s')}",
             f"wall time {_num(data.get('wall_time'))} s", ""]
    res = data.get("result", {})
    if mode in ("solve-minJ", "solve-maxI", "minimax-k2"):
        keys = ["lambda", "value_I", "value_J", "residual_norm", "iterations", "converged"]
        lines += _table(["quantity", "value"], [[k, res.get(k)] for k in keys])
        if mode == "minimax-k2":
            lines += ["", "value_J is a loop level: an upper bound for the k = 2 minimax value"]
    elif mode == "sweep":
        rows = res.get("rows", [])
        lines += _table(["alpha", "lambda", "value", "converged", "iterations"],
                        [[r["alpha"], r["lambda"], r["value"], r["converged"], r["iterations"]]
                         for r in rows])
        lines += ["", f"inf_lambda = {_num(res.get('inf_lambda'))}"]
    elif mode == "verify":
        lines += _table(["suite", "hard", "samples", "violations", "worst margin", "passed"],
                        [[s["name"], s["hard"], s["samples"], s["violations"], s["worst_margin"],
                          s["passed"]] for s in res.get("suites", [])])
        lines += ["", "all hard suites passed" if res.get("ok") else "HARD SUITE FAILURE"]
    elif mode == "oracle":
        ev = res.get("eigenvalues", [])
        lines += _table(["k", "eigenvalue"], [[k + 1, v] for k, v in enumerate(ev)])
    else:
        lines.append(json.dumps(res, sort_keys=True, indent=2))
    return "\n".join(lines) + "\n"
