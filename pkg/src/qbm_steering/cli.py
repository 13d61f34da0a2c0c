"""Command-line front end.

    qbm-steering coefficients [options]
    qbm-steering steerability [options]
    qbm-steering nonmarkov    [options]

Options come from defaults, then an optional flat ``key=value`` file
(``--config``), then command-line flags, later sources winning.  Every CSV
starts with ``#`` comment lines echoing the effective configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import __version__
from .channel import CouplingScenario
from .environment import EnvironmentSpec, Ohmicity, coefficient_trace, default_grid
from .gaussian import ProbeSpec
from .measure import DEFAULT_EPS, alpha_sweep, steerability_trace
from .quadrature import QuadratureConfig

PROG = "qbm-steering"
COMMANDS = ("coefficients", "steerability", "nonmarkov")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass(frozen=True)
class RunConfig:
    s: str = "ohmic"
    omega_c: float = 1.0
    omega0: float = 7.0
    temperature: float = 1.5
    alpha: float = 0.2
    alpha_min: float = 0.05
    alpha_max: float = 0.3
    alpha_count: int = 6
    r: float = 2.0
    scenario: str = "all"
    t_max: float | None = None  # 5 for ohmic, 8 for sub-ohmic
    dt: float = 1e-3
    delta_gamma: str = "weak"
    appendix_verbatim: bool = False
    eps: float = DEFAULT_EPS
    abs_tol: float = QuadratureConfig.abs_tol
    rel_tol: float = QuadratureConfig.rel_tol
    workers: int = 1
    split: bool = False
    out: str | None = None
    intervals_out: str | None = None

    @property
    def effective_t_max(self) -> float:
        if self.t_max is not None:
            return self.t_max
        return 5.0 if self.s == "ohmic" else 8.0

    @property
    def scenarios(self) -> tuple[CouplingScenario, ...]:
        if self.scenario == "all":
            return tuple(CouplingScenario)
        return (CouplingScenario(self.scenario),)

    def env(self, alpha: float | None = None) -> EnvironmentSpec:
        return EnvironmentSpec(
            Ohmicity.from_label(self.s), self.omega_c, self.temperature,
            self.alpha if alpha is None else alpha,
        )

    def probe(self) -> ProbeSpec:
        return ProbeSpec(self.omega0, self.r)

    def quadrature(self) -> QuadratureConfig:
        return QuadratureConfig(abs_tol=self.abs_tol, rel_tol=self.rel_tol)

    def grid(self):
        return default_grid(self.effective_t_max, self.dt)

    def alphas(self) -> list[float]:
        n = self.alpha_count
        if n == 1:
            return [self.alpha_min]
        lo, hi = self.alpha_min, self.alpha_max
        # 12 significant digits drop the interpolation round-off (0.15, not 0.15000000000000002)
        return [float(f"{lo + (hi - lo) * k / (n - 1):.12g}") for k in range(n)]


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_CHOICES = {
    "s": ("ohmic", "subohmic"),
    "scenario": ("right", "left", "both", "all"),
    "delta_gamma": ("weak", "exact"),
}
_NOT_ECHOED = ("out", "intervals_out")
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _coerce(key: str, raw):
    kind = _FIELD_TYPES[key]
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if kind == "bool":
            low = text.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(f"expected a boolean, got {text!r}")
        if kind == "int":
            return int(text)
        if kind.startswith("float"):
            if kind.endswith("None") and text.lower() in ("", "none", "auto"):
                return None
            return float(text)
        if kind.startswith("str") and kind.endswith("None") and text == "":
            return None
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None
    return text


def read_config_file(path) -> dict:
    """Flat ``key=value`` lines; ``#`` starts a comment; dashes in keys allowed."""
    out = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config: line {lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELD_TYPES:
            raise ConfigError(f"config: line {lineno}: unknown key {key!r}")
        out[key] = value
    return out


def validate(cfg: RunConfig) -> RunConfig:
    for key, allowed in _CHOICES.items():
        if getattr(cfg, key) not in allowed:
            raise ConfigError(f"{key}: must be one of {', '.join(allowed)}")
    positive = ("omega_c", "omega0", "temperature", "dt", "abs_tol", "rel_tol")
    for key in positive:
        v = getattr(cfg, key)
        if not (math.isfinite(v) and v > 0):
            raise ConfigError(f"{key}: must be > 0, got {v!r}")
    for key in ("alpha", "alpha_min", "alpha_max", "r", "eps"):
        v = getattr(cfg, key)
        if not (math.isfinite(v) and v >= 0):
            raise ConfigError(f"{key}: must be >= 0, got {v!r}")
    if cfg.t_max is not None and not (math.isfinite(cfg.t_max) and cfg.t_max > 0):
        raise ConfigError(f"t_max: must be > 0, got {cfg.t_max!r}")
    if cfg.alpha_count < 1:
        raise ConfigError("alpha_count: must be >= 1")
    if cfg.alpha_count == 1:
        if cfg.alpha_max != cfg.alpha_min:
            raise ConfigError("alpha_count: a single point needs alpha_min == alpha_max")
    elif not cfg.alpha_min < cfg.alpha_max:
        raise ConfigError("alpha_max: must exceed alpha_min when alpha_count >= 2")
    if cfg.workers < 1:
        raise ConfigError("workers: must be >= 1")
    try:
        cfg.grid()
    except ValueError:
        raise ConfigError(f"t_max: must be a multiple of dt ({cfg.dt!r})") from None
    if cfg.split and cfg.out is None:
        raise ConfigError("split: requires --out")
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROG, description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"{PROG} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    add = common.add_argument
    # defaults are None so that only explicit flags override the file
    add("--config", metavar="FILE", help="flat key=value file")
    add("--s", choices=_CHOICES["s"], help="spectral density (default ohmic)")
    add("--omega-c", type=float, help="cutoff frequency (default 1)")
    add("--omega0", type=float, help="mode frequency (default 7)")
    add("--temperature", type=float, help="bath temperature (default 1.5)")
    add("--alpha", type=float, help="coupling constant (default 0.2)")
    add("--alpha-min", type=float, help="sweep start (default 0.05)")
    add("--alpha-max", type=float, help="sweep end (default 0.3)")
    add("--alpha-count", type=int, help="sweep points (default 6)")
    add("--r", type=float, help="twin-beam squeezing (default 2)")
    add("--scenario", choices=_CHOICES["scenario"], help="coupled mode(s) (default all)")
    add("--t-max", type=float, help="grid end (default 5 ohmic, 8 subohmic)")
    add("--dt", type=float, help="grid step (default 1e-3)")
    add("--delta-gamma", choices=_CHOICES["delta_gamma"], help="noise accumulation (default weak)")
    add("--appendix-verbatim", action="store_const", const=True,
        help="literal forms: cosh 2r correlation, unscaled Delta_Gamma")
    add("--eps", type=float, help="noise floor for rise detection (default 1e-9)")
    add("--abs-tol", type=float, help="quadrature absolute tolerance")
    add("--rel-tol", type=float, help="quadrature relative tolerance")
    add("--workers", type=int, help="parallel workers (default 1)")
    add("--split", action="store_const", const=True,
        help="steerability: one file per scenario")
    add("--out", help="output CSV (default stdout)")
    add("--intervals-out", help="nonmarkov: intervals sidecar CSV")
    helps = {
        "coefficients": "damping/diffusion coefficients on the time grid",
        "steerability": "steerability time trace for a single coupling",
        "nonmarkov": "non-Markovianity versus coupling constant",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def parse_config(argv=None) -> tuple[str, RunConfig]:
    """Parse flags and the optional config file into a validated RunConfig."""
    ns = build_parser().parse_args(argv)
    values = {}
    if ns.config is not None:
        values.update(read_config_file(ns.config))
    for key in _FIELD_TYPES:
        flag = getattr(ns, key, None)
        if flag is not None:
            values[key] = flag
    coerced = {k: _coerce(k, v) for k, v in values.items()}
    return ns.command, validate(RunConfig(**coerced))


# --------------------------------------------------------------------------
# output


def fmt(x) -> str:
    """Shortest round-trip float text; locale independent."""
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if x is None:
        return ""
    return repr(float(x))


def header(command: str, cfg: RunConfig) -> str:
    lines = [f"# {PROG} {__version__} {command}"]
    echo = asdict(cfg)
    echo["t_max"] = cfg.effective_t_max
    # output locations are not part of the computation; leaving them out
    # keeps files byte-identical wherever they are written
    for key in _NOT_ECHOED:
        echo.pop(key)
    for key in sorted(echo):
        lines.append(f"# {key}={fmt(echo[key])}")
    return "\n".join(lines) + "\n"


def _csv_text(command, cfg, columns, rows) -> str:
    buf = io.StringIO()
    buf.write(header(command, cfg))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _emit(text: str, path) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _scenario_path(out: str, scenario: CouplingScenario) -> Path:
    p = Path(out)
    return p.with_name(f"{p.stem}_{scenario.value}{p.suffix or '.csv'}")


def _intervals_path(cfg: RunConfig):
    if cfg.intervals_out is not None:
        return cfg.intervals_out
    if cfg.out is None:
        return None
    p = Path(cfg.out)
    return p.with_name(f"{p.stem}.intervals{p.suffix or '.csv'}")


# --------------------------------------------------------------------------
# commands


COEFFICIENT_COLUMNS = ("t", "gamma", "delta", "big_gamma", "delta_gamma", "method_gamma", "method_delta")
STEERABILITY_COLUMNS = ("t", "a", "b", "c", "S", "scenario")
NONMARKOV_COLUMNS = ("alpha", "N_right", "N_left", "N_both", "error")
INTERVAL_COLUMNS = ("alpha", "scenario", "t_start", "t_end", "rise")


def cmd_coefficients(cfg: RunConfig) -> int:
    tr = coefficient_trace(cfg.env(), cfg.omega0, cfg.grid(), cfg.quadrature(), workers=cfg.workers)
    dg = tr.delta_gamma(cfg.delta_gamma)
    rows = (
        (t, g, d, bg, x, mg, md)
        for t, g, d, bg, x, mg, md in zip(
            tr.times, tr.gamma, tr.delta, tr.big_gamma, dg, tr.method_gamma, tr.method_delta
        )
    )
    _emit(_csv_text("coefficients", cfg, COEFFICIENT_COLUMNS, rows), cfg.out)
    return EXIT_OK


def cmd_steerability(cfg: RunConfig) -> int:
    probe, env = cfg.probe(), cfg.env()
    coef = coefficient_trace(env, cfg.omega0, cfg.grid(), cfg.quadrature(), workers=cfg.workers)
    blocks = []
    for sc in cfg.scenarios:
        tr = steerability_trace(probe, env, sc, coef.times, cfg.quadrature(), cfg.delta_gamma,
                                verbatim=cfg.appendix_verbatim, coefficients=coef)
        rows = [(t, a, b, c, s, sc.value) for t, a, b, c, s in zip(tr.times, tr.a, tr.b, tr.c, tr.s_values)]
        blocks.append((sc, rows))
    if cfg.split:
        for sc, rows in blocks:
            _emit(_csv_text("steerability", cfg, STEERABILITY_COLUMNS, rows), _scenario_path(cfg.out, sc))
    else:
        rows = [row for _, block in blocks for row in block]
        _emit(_csv_text("steerability", cfg, STEERABILITY_COLUMNS, rows), cfg.out)
    return EXIT_OK


def cmd_nonmarkov(cfg: RunConfig) -> int:
    sweep = alpha_sweep(
        cfg.probe(), cfg.env(0.0), cfg.alphas(), cfg.grid(), cfg.quadrature(),
        scenarios=cfg.scenarios, mode=cfg.delta_gamma, eps=cfg.eps,
        verbatim=cfg.appendix_verbatim, workers=cfg.workers,
    )
    rows, interval_rows = [], []
    for row in sweep:
        cells = []
        for sc in CouplingScenario:
            res = row.results.get(sc)
            cells.append(None if res is None else res.measure)
            if res is not None:
                interval_rows.extend((row.alpha, sc.value, *iv) for iv in res.intervals)
        rows.append((row.alpha, *cells, row.error or ""))
    _emit(_csv_text("nonmarkov", cfg, NONMARKOV_COLUMNS, rows), cfg.out)
    side = _intervals_path(cfg)
    if side is not None:
        _emit(_csv_text("nonmarkov", cfg, INTERVAL_COLUMNS, interval_rows), side)

    report = sys.stdout if cfg.out is not None else sys.stderr
    for sc in cfg.scenarios:
        pts = [(r.results[sc].measure, r.alpha) for r in sweep if sc in r.results]
        if pts:
            best, at = max(pts, key=lambda p: (p[0], -p[1]))
            print(f"N_{sc.value}: max {best:.6g} at alpha={at:.6g}", file=report)
    failed = [r for r in sweep if r.errors]
    for r in failed:
        print(f"alpha={r.alpha:.6g}: {r.error}", file=sys.stderr)
    return EXIT_FAILED if failed else EXIT_OK


_COMMANDS = {
    "coefficients": cmd_coefficients,
    "steerability": cmd_steerability,
    "nonmarkov": cmd_nonmarkov,
}


def main(argv=None) -> int:
    try:
        command, cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[command](cfg)
    except (ArithmeticError, ValueError, RuntimeError, OSError) as exc:
        print(f"{PROG}: {command} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
