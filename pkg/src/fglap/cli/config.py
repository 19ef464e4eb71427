"""Run configuration: a TOML file with a fixed schema.

Every key is optional except ``young``. Unknown keys are rejected, and
validation errors carry the dotted field name plus the line it sits on.
"""
from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass, replace

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib
import tomli_w

from ..domain import BC, build_grid
from ..solver import SolverConfig
from ..solver.config import INITIAL_GUESSES
from ..young import StructureError, YoungFunction, from_descriptor

__all__ = ["ConfigError", "RunConfig", "MODES", "parse_config", "load_config", "emit_config"]

MODES = ("solve-minJ", "solve-maxI", "minimax-k2", "sweep", "verify", "oracle")


class ConfigError(ValueError):
    """Invalid configuration; ``field`` is dotted, ``line`` is 1-based when known."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None,
                 source: str | None = None):
        self.message, self.field, self.line, self.source = message, field, line, source
        super().__init__(str(self))

    def __str__(self) -> str:
        where = self.source or "<config>"
        if self.line is not None:
            where += f":{self.line}"
        return f"{where}: {self.field}: {self.message}" if self.field else f"{where}: {self.message}"


@dataclass(frozen=True)
class RunConfig:
    young: dict
    mode: str | None = None
    s: float = 0.5
    seed: int = 42
    out: str = "results"
    lo: float = -1.0
    hi: float = 1.0
    n_interior: int = 64
    collar: float = 4.0
    bc: str = "dirichlet"
    beta: float | tuple | None = None
    alpha: float = 1.0
    alphas: tuple | None = None
    tol_residual: float = 1e-8
    tol_constraint: float = 1e-10
    max_iter: int = 5000
    step_init: float = 1.0
    initial_guess: str = "firstLinearMode"
    initial_values: tuple | None = None
    sweep_objective: str = "minJ"
    warm_start: bool = True
    basis_pairs: int = 4
    theta_samples: int = 64
    n_modes: int = 8
    samples: int = 10_000
    tilde_factor: float = 1.0
    oracle_modes: int = 8

    # -- derived objects ------------------------------------------------------

    def young_function(self) -> YoungFunction:
        return from_descriptor(self.young)

    def grid(self):
        return build_grid(self.lo, self.hi, self.n_interior, self.collar)

    def solver_config(self, alpha: float | None = None) -> SolverConfig:
        init = None if self.initial_values is None else np.asarray(self.initial_values, dtype=float)
        return SolverConfig(
            alpha=self.alpha if alpha is None else alpha, s=self.s, bc=BC.parse(self.bc),
            beta=self.beta if self.bc == "robin" else None, tol_residual=self.tol_residual,
            tol_constraint=self.tol_constraint, max_iter=self.max_iter, step_init=self.step_init,
            seed=self.seed, initial_guess=self.initial_guess, initial_values=init)

    def with_(self, **kw) -> "RunConfig":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        """Nested, TOML-ready form with every default written out."""
        bc = {"kind": self.bc}
        if self.beta is not None:
            bc["beta"] = list(self.beta) if isinstance(self.beta, tuple) else self.beta
        solver = {"alpha": self.alpha, "tol_residual": self.tol_residual,
                  "tol_constraint": self.tol_constraint, "max_iter": self.max_iter,
                  "step_init": self.step_init, "initial_guess": self.initial_guess}
        if self.alphas is not None:
            solver["alphas"] = list(self.alphas)
        if self.initial_values is not None:
            solver["initial_values"] = list(self.initial_values)
        d = {
            "s": self.s, "seed": self.seed, "out": self.out,
            "young": dict(self.young),
            "domain": {"lo": self.lo, "hi": self.hi, "n_interior": self.n_interior,
                       "collar": self.collar},
            "bc": bc,
            "solver": solver,
            "sweep": {"objective": self.sweep_objective, "warm_start": self.warm_start},
            "minimax": {"basis_pairs": self.basis_pairs, "theta_samples": self.theta_samples,
                        "n_modes": self.n_modes},
            "verify": {"samples": self.samples, "tilde_factor": self.tilde_factor},
            "oracle": {"modes": self.oracle_modes},
        }
        if self.mode is not None:
            d["mode"] = self.mode
        return d


# -- schema --------------------------------------------------------------------

# section -> {key: RunConfig field}; None marks keys handled specially
_SECTIONS = {
    "": {"mode": "mode", "s": "s", "seed": "seed", "out": "out"},
    "young": {"family": None, "p": None, "coef": None, "terms": None},
    "domain": {"lo": "lo", "hi": "hi", "n_interior": "n_interior", "collar": "collar"},
    "bc": {"kind": "bc", "beta": "beta"},
    "solver": {"alpha": "alpha", "alphas": "alphas", "tol_residual": "tol_residual",
               "tol_constraint": "tol_constraint", "max_iter": "max_iter",
               "step_init": "step_init", "initial_guess": "initial_guess",
               "initial_values": "initial_values"},
    "sweep": {"objective": "sweep_objective", "warm_start": "warm_start"},
    "minimax": {"basis_pairs": "basis_pairs", "theta_samples": "theta_samples",
                "n_modes": "n_modes"},
    "verify": {"samples": "samples", "tilde_factor": "tilde_factor"},
    "oracle": {"modes": "oracle_modes"},
}


def _locate(text: str, path: str) -> int | None:
    """Best-effort line number of a dotted key (section header, inline table or plain key)."""
    parts = path.split(".")
    key = parts[-1]
    section = parts[0] if len(parts) > 1 else ""
    current = ""
    key_re = re.compile(rf"(^|[{{,\s]){re.escape(key)}\s*=")
    for n, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        m = re.match(r"^\[\s*([A-Za-z0-9_.]+)\s*\]$", stripped)
        if m:
            current = m.group(1)
            if len(parts) == 1 and current == key:
                return n
            continue
        if section and current == "" and re.match(rf"^{re.escape(section)}\s*=", stripped):
            if key_re.search(stripped.split("=", 1)[1]):
                return n
        if current == section and re.match(rf"^{re.escape(key)}\s*=", stripped):
            return n
    if section:
        return _locate(text, section)
    return None


class _Checker:
    def __init__(self, text: str, source: str | None):
        self.text, self.source = text, source

    def fail(self, path: str, msg: str):
        raise ConfigError(msg, path, _locate(self.text, path), self.source)

    def real(self, path, v, *, positive=False, nonneg=False, open01=False) -> float:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(path, f"expected a number, got {v!r}")
        v = float(v)
        if not math.isfinite(v):
            self.fail(path, "must be finite")
        if positive and not v > 0:
            self.fail(path, f"must be > 0, got {v:g}")
        if nonneg and v < 0:
            self.fail(path, f"must be >= 0, got {v:g}")
        if open01 and not 0.0 < v < 1.0:
            self.fail(path, f"must lie in (0, 1), got {v:g}")
        return v

    def integer(self, path, v, lo=None) -> int:
        if isinstance(v, bool) or not isinstance(v, int):
            self.fail(path, f"expected an integer, got {v!r}")
        if lo is not None and v < lo:
            self.fail(path, f"must be >= {lo}, got {v}")
        return int(v)

    def choice(self, path, v, options) -> str:
        if not isinstance(v, str) or v not in options:
            self.fail(path, f"must be one of {', '.join(options)}; got {v!r}")
        return v

    def real_list(self, path, v, **kw) -> tuple:
        if not isinstance(v, list) or not v:
            self.fail(path, "expected a non-empty list of numbers")
        return tuple(self.real(path, x, **kw) for x in v)


def _alpha_range(chk: _Checker, v: dict) -> tuple:
    path = "solver.alphas"
    extra = set(v) - {"start", "stop", "step"}
    if extra:
        chk.fail(f"{path}.{sorted(extra)[0]}", "unknown key")
    for k in ("start", "stop", "step"):
        if k not in v:
            chk.fail(f"{path}.{k}", "missing")
    start = chk.real(f"{path}.start", v["start"], positive=True)
    stop = chk.real(f"{path}.stop", v["stop"], positive=True)
    step = chk.real(f"{path}.step", v["step"], positive=True)
    if stop < start:
        chk.fail(f"{path}.stop", "must be >= start")
    n = int(math.floor((stop - start) / step + 1e-9))
    # rounding keeps 0.1 + 19 * 0.05 from drifting off the decimal grid
    return tuple(round(start + k * step, 12) for k in range(n + 1))


def parse_config(text: str, source: str | None = None) -> RunConfig:
    """Parse and validate TOML text. Raises :class:`ConfigError`."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"TOML syntax error: {exc}", None, int(m.group(1)) if m else None,
                          source) from None
    chk = _Checker(text, source)
    vals: dict = {}
    for key, value in raw.items():
        if key in _SECTIONS[""]:
            vals[_SECTIONS[""][key]] = (key, value)
            continue
        if key not in _SECTIONS:
            chk.fail(key, "unknown key")
        if not isinstance(value, dict):
            chk.fail(key, "expected a table")
        if key == "young":
            continue
        for sub, v in value.items():
            if sub not in _SECTIONS[key]:
                chk.fail(f"{key}.{sub}", "unknown key")
            vals[_SECTIONS[key][sub]] = (f"{key}.{sub}", v)

    if "young" not in raw:
        chk.fail("young", "missing (e.g. young = { family = \"power\", p = 2.0 })")
    young = _check_young(chk, raw["young"])

    def get(name, default):
        return vals.get(name, (None, default))

    out: dict = {"young": young}
    p, v = get("mode", None)
    if v is not None:
        out["mode"] = chk.choice(p, v, MODES)
    p, v = get("s", None)
    if v is not None:
        out["s"] = chk.real(p, v, open01=True)
    p, v = get("seed", None)
    if v is not None:
        out["seed"] = chk.integer(p, v, lo=0)
    p, v = get("out", None)
    if v is not None:
        if not isinstance(v, str) or not v:
            chk.fail(p, "expected a non-empty path string")
        out["out"] = v

    for name in ("lo", "hi"):
        p, v = get(name, None)
        if v is not None:
            out[name] = chk.real(p, v)
    p, v = get("n_interior", None)
    if v is not None:
        out["n_interior"] = chk.integer(p, v, lo=4)
    p, v = get("collar", None)
    if v is not None:
        out["collar"] = chk.real(p, v, positive=True)
    if out.get("hi", 1.0) <= out.get("lo", -1.0):
        chk.fail("domain.hi", "must exceed domain.lo")

    p, v = get("bc", None)
    if v is not None:
        out["bc"] = chk.choice(p, v, tuple(b.value for b in BC))
    p, v = get("beta", None)
    if v is not None:
        if out.get("bc") != "robin":
            chk.fail(p, "beta is only used with kind = \"robin\"")
        if isinstance(v, list):
            out["beta"] = chk.real_list(p, v, nonneg=True)
        else:
            out["beta"] = chk.real(p, v, nonneg=True)
    elif out.get("bc") == "robin":
        chk.fail("bc.beta", "required for Robin conditions")

    p, v = get("alpha", None)
    if v is not None:
        out["alpha"] = chk.real(p, v, positive=True)
    p, v = get("alphas", None)
    if v is not None:
        alphas = _alpha_range(chk, v) if isinstance(v, dict) else chk.real_list(p, v, positive=True)
        if any(b <= a for a, b in zip(alphas, alphas[1:])):
            chk.fail(p, "must be strictly increasing")
        out["alphas"] = alphas
    for name in ("tol_residual", "tol_constraint", "step_init"):
        p, v = get(name, None)
        if v is not None:
            out[name] = chk.real(p, v, positive=True)
    p, v = get("max_iter", None)
    if v is not None:
        out["max_iter"] = chk.integer(p, v, lo=1)
    p, v = get("initial_guess", None)
    if v is not None:
        out["initial_guess"] = chk.choice(p, v, INITIAL_GUESSES)
    p, v = get("initial_values", None)
    if v is not None:
        out["initial_values"] = chk.real_list(p, v)
    if out.get("initial_guess") == "supplied" and "initial_values" not in out:
        chk.fail("solver.initial_values", "required when initial_guess = \"supplied\"")

    p, v = get("sweep_objective", None)
    if v is not None:
        out["sweep_objective"] = chk.choice(p, v, ("minJ", "maxI"))
    p, v = get("warm_start", None)
    if v is not None:
        if not isinstance(v, bool):
            chk.fail(p, "expected true or false")
        out["warm_start"] = v
    for name, lo in (("basis_pairs", 1), ("theta_samples", 16), ("n_modes", 2),
                     ("samples", 1), ("oracle_modes", 1)):
        p, v = get(name, None)
        if v is not None:
            out[name] = chk.integer(p, v, lo=lo)
    p, v = get("tilde_factor", None)
    if v is not None:
        out["tilde_factor"] = chk.real(p, v, positive=True)

    cfg = RunConfig(**out)
    _check_sizes(chk, cfg)
    return cfg


def _check_young(chk: _Checker, y) -> dict:
    if not isinstance(y, dict):
        chk.fail("young", "expected a table")
    fam = y.get("family")
    allowed = {"power": {"family", "p", "coef"}, "powersum": {"family", "terms"}}
    if fam not in allowed:
        chk.fail("young.family", f"must be \"power\" or \"powersum\", got {fam!r}")
    for k in y:
        if k not in allowed[fam]:
            chk.fail(f"young.{k}", f"unknown key for family {fam!r}")
    if fam == "power":
        if "p" not in y:
            chk.fail("young.p", "missing")
        desc = {"family": "power", "p": chk.real("young.p", y["p"])}
        if "coef" in y:
            c = chk.real("young.coef", y["coef"], positive=True)
            if c != 1.0:
                desc["coef"] = c
    else:
        terms = y.get("terms")
        if not isinstance(terms, list) or not terms:
            chk.fail("young.terms", "expected a non-empty list of [coef, exponent] pairs")
        clean = []
        for t in terms:
            if not isinstance(t, list) or len(t) != 2:
                chk.fail("young.terms", f"each term must be [coef, exponent], got {t!r}")
            clean.append([chk.real("young.terms", t[0]), chk.real("young.terms", t[1])])
        desc = {"family": "powersum", "terms": clean}
    try:
        from_descriptor(desc)
    except (StructureError, ValueError) as exc:
        path = "young.p" if fam == "power" else "young.terms"
        chk.fail(path, str(exc))
    return desc


def _check_sizes(chk: _Checker, cfg: RunConfig):
    """Checks that need the grid: per-node beta and supplied initial values."""
    if not isinstance(cfg.beta, tuple) and cfg.initial_values is None:
        return
    g = cfg.grid()
    if isinstance(cfg.beta, tuple) and len(cfg.beta) not in (g.n_exterior, g.n_nodes):
        chk.fail("bc.beta", f"per-node beta needs {g.n_exterior} exterior values "
                            f"(or {g.n_nodes} node values), got {len(cfg.beta)}")
    if cfg.initial_values is not None and len(cfg.initial_values) not in (g.n_interior, g.n_nodes):
        chk.fail("solver.initial_values", f"needs {g.n_interior} interior values "
                                          f"(or {g.n_nodes} node values), got {len(cfg.initial_values)}")


def load_config(path) -> RunConfig:
    """Read and parse a config file; OSError propagates for the caller to report."""
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ConfigError(f"not valid UTF-8 ({exc.reason} at byte {exc.start})", source=str(path)) from None
    return parse_config(text, source=str(path))


def emit_config(cfg: RunConfig) -> str:
    """Canonical TOML for a config; parsing it gives back an equal RunConfig."""
    return tomli_w.dumps(cfg.to_dict())
