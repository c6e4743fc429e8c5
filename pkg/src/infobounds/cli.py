"""Command line: fig1 sweeps, bound reports and oracle audits.

Configuration comes from a flat ``key = value`` file (``--config``) with
every key also available as a flag; flags win over the file, the file wins
over defaults. Outputs are CSV with ``#`` comment lines echoing the config.

Exit status: 0 success, 2 config or spec-file error, 3 numeric precondition
failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import ast
import csv
import hashlib
import io
import math
import operator
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from . import nonlocal_model as nl
from .bounds import BOUND_NAMES, bound_report, expectation_inputs
from .opspec import SpecParseError, build, parse_spec

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SweepConfig:
    alpha_list: tuple[float, ...] = (0.0, 0.5, 1.0, 2.0)
    eta: float = 0.01
    t_min: float = 0.0
    t_max: float = 2 * math.pi
    t_steps: int = 512
    dim: int = 64
    a2: float = 1.0
    hbar: float = 1.0
    tail_tol: float = 1e-10
    output_path: str = ""
    spec: str = ""
    nu: int = 1

    def validate(self) -> "SweepConfig":
        if self.t_steps < 2:
            raise ConfigError(f"t_steps must be >= 2, got {self.t_steps}")
        if not self.t_min < self.t_max:
            raise ConfigError(f"t_min ({self.t_min}) must be below t_max ({self.t_max})")
        if not self.tail_tol > 0:
            raise ConfigError("tail_tol must be positive")
        if not self.hbar > 0:
            raise ConfigError("hbar must be positive")
        if self.dim < 8:
            raise ConfigError(f"dim must be >= 8, got {self.dim}")
        if self.nu < 1:
            raise ConfigError(f"nu must be >= 1, got {self.nu}")
        if not self.alpha_list:
            raise ConfigError("alpha_list is empty")
        if any(a < 0 for a in self.alpha_list):
            raise ConfigError("coherent amplitudes must be >= 0")
        values = [self.eta, self.t_min, self.t_max, self.a2, self.hbar, self.tail_tol, *self.alpha_list]
        if not all(math.isfinite(v) for v in values):
            raise ConfigError("config values must be finite")
        return self

    def times(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.t_steps)

    def echo(self) -> str:
        """Content-derived config line; output_path is left out."""
        parts = []
        for f in fields(self):
            if f.name == "output_path":
                continue
            parts.append(f"{f.name}={_fmt_value(getattr(self, f.name))}")
        return "# config: " + "; ".join(parts)


CONFIG_KEYS = {f.name: f for f in fields(SweepConfig)}

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def _eval_number(text: str) -> float:
    """Float literal or simple arithmetic with `pi`, e.g. '2*pi' or 'pi/4'."""

    def ev(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        raise ValueError(text)

    try:
        return ev(ast.parse(text.strip(), mode="eval").body)
    except (SyntaxError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse number {text!r}") from exc


def _convert(key: str, value: str):
    if key == "alpha_list":
        return tuple(_eval_number(v) for v in value.split(",") if v.strip())
    if key in ("t_steps", "dim", "nu"):
        v = _eval_number(value)
        if v != int(v):
            raise ConfigError(f"{key} must be an integer, got {value!r}")
        return int(v)
    if key in ("output_path", "spec"):
        return value.strip()
    return _eval_number(value)


def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        try:
            out[key] = _convert(key, value)
        except ConfigError as exc:
            raise ConfigError(f"config line {lineno}: {exc}") from None
    return out


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _fmt_value(v) -> str:
    if isinstance(v, tuple):
        return ",".join(_fmt(a) for a in v)
    if isinstance(v, float):
        return _fmt(v)
    return str(v)


# fig1


SWEEP_COLUMNS = (
    "t", "alpha", "eta", "E0", "E1", "E2", "n_t", "B_t", "Bt_over_E0", "B",
    "tmin_standard", "tmin_modified", "dt_heisenberg",
)


def sweep_rows(alpha: float, eta: float, ts: np.ndarray, hbar: float = 1.0) -> list[tuple[float, ...]]:
    """SweepRow tuples (in SWEEP_COLUMNS order) for one amplitude over a time grid."""
    e0 = float(nl.energy_e0(alpha))
    e1 = nl.energy_e1(ts, alpha)
    e2 = nl.energy_e2(ts, alpha)
    n = nl.norm_correction(ts, alpha)
    bt = nl.energy_correction(ts, alpha)
    tmin_std = math.pi * hbar / (2 * e0)
    tmin_mod = nl.tmin_bound(ts, alpha, eta, hbar)
    dt = nl.heisenberg_dt(ts, alpha, eta, hbar)
    rows = []
    for k, t in enumerate(ts):
        rows.append((
            float(t), alpha, eta, e0, float(e1[k]), float(e2[k]), float(n[k]), float(bt[k]),
            float(bt[k]) / e0, e0 + eta * float(bt[k]), tmin_std, float(tmin_mod[k]), float(dt[k]),
        ))
    return rows


def _sweep_task(args):
    alpha, eta, ts, hbar = args
    return sweep_rows(alpha, eta, ts, hbar)


def _audit_task(args):
    t, alpha, eta, a2, dim, tail_tol = args
    return nl.oracle_energy_audit(t, alpha, eta, a2, dim, tail_tol)


def _map(fn, tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def render_fig1(cfg: SweepConfig, jobs: int = 1) -> str:
    ts = cfg.times()
    chunks = _map(_sweep_task, [(a, cfg.eta, ts, cfg.hbar) for a in cfg.alpha_list], jobs)
    buf = io.StringIO()
    buf.write(cfg.echo() + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for rows in chunks:
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def render_audit(cfg: SweepConfig, jobs: int = 1) -> str:
    tasks = [(float(t), a, cfg.eta, cfg.a2, cfg.dim, cfg.tail_tol) for a in cfg.alpha_list for t in cfg.times()]
    records = _map(_audit_task, tasks, jobs)
    buf = io.StringIO()
    buf.write(cfg.echo() + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(nl.AUDIT_COLUMNS)
    for rec in records:
        row = rec.row()
        w.writerow([v if isinstance(v, str) else _fmt(v) for v in (row[c] for c in nl.AUDIT_COLUMNS)])
    good = [r for r in records if not r.flag]
    buf.write(f"# flagged_rows = {len(records) - len(good)}\n")
    if good:
        ratios = np.array([r.ratio_ReH1_E1 for r in good])
        buf.write(f"# ratio_ReH1_E1: min = {_fmt(ratios.min())}; max = {_fmt(ratios.max())}\n")
        for target in ("norm", "cross"):
            fit = nl.fit_a2(good, target)
            buf.write(
                f"# best_fit_a2[{target}] = {_fmt(fit.a2)}; rms = {_fmt(fit.rms)}; "
                f"rms_at_a2_1 = {_fmt(fit.rms_at_unit_a2)}\n"
            )
    return buf.getvalue()


def render_bounds(cfg: SweepConfig, spec_text: str) -> str:
    spec = parse_spec(spec_text)
    built = build(spec, cfg.eta, cfg.dim, cfg.a2, cfg.tail_tol)
    report = bound_report(built.dden, built.dop, hbar=cfg.hbar, nu=cfg.nu, means=built.means)
    buf = io.StringIO()
    buf.write(cfg.echo() + "\n")
    buf.write(f"# spec_sha256 = {hashlib.sha256(spec_text.encode()).hexdigest()}\n")
    buf.write(f"# model = {spec.model}; state = {spec.state}; t = {_fmt(spec.t)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("quantity", "baseline", "modified", "baseline_status", "modified_status"))
    base, mod = report.baselines, report.modified
    for name in BOUND_NAMES:
        w.writerow((
            name, _fmt(getattr(base, name)), _fmt(getattr(mod, name)),
            base.errors.get(name, "ok"), mod.errors.get(name, "ok"),
        ))
    if built.means is not None:
        # Margolus-Levitin time from Fock-space expectations instead of closed forms
        oracle = bound_report(built.dden, built.dop, hbar=cfg.hbar, nu=cfg.nu,
                              means=expectation_inputs(built.dop, built.dden))
        ob, om = oracle.baselines, oracle.modified
        w.writerow((
            "ml_theta_fock_oracle", _fmt(ob.ml_theta), _fmt(om.ml_theta),
            ob.errors.get("ml_theta", "ok"), om.errors.get("ml_theta", "ok"),
        ))
    return buf.getvalue()


# argument handling


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="flat key = value config file")
    p.add_argument("--out", metavar="PATH", help="output file (same as --output-path)")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes")
    for name in CONFIG_KEYS:
        p.add_argument("--" + name.replace("_", "-"), dest="key_" + name, metavar="VALUE")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="infobounds", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("fig1", "B_t/E0 and time-dependent bounds over an (alpha, t) grid"),
        ("bounds", "bound report for an operator spec file (--spec)"),
        ("audit", "Fock-space audit of the closed-form energies"),
    ):
        _add_common(sub.add_parser(name, help=help_))
    return parser


def resolve_config(args: argparse.Namespace) -> SweepConfig:
    values: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            values.update(parse_config_text(fh.read()))
    for name in CONFIG_KEYS:
        flag = getattr(args, "key_" + name)
        if flag is not None:
            values[name] = _convert(name, flag)
    if args.out:
        values["output_path"] = args.out
    return replace(SweepConfig(), **values).validate()


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO

    out = cfg.output_path or f"{args.command}.csv"
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            if args.command == "fig1":
                text = render_fig1(cfg, args.jobs)
            elif args.command == "audit":
                text = render_audit(cfg, args.jobs)
            else:
                if not cfg.spec:
                    raise ConfigError("bounds needs --spec PATH")
                with open(cfg.spec, encoding="utf-8") as fh:
                    spec_text = fh.read()
                text = render_bounds(cfg, spec_text)
        for wmsg in sorted({str(w.message) for w in caught}):
            print(f"warning: {wmsg}", file=sys.stderr)
        _write(out, text)
    except (ConfigError, SpecParseError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"numeric precondition failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
