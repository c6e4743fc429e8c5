"""Operator spec files for the `bounds` subcommand.

Layout::

    # comment
    model = oscillator            # oscillator | nonlocal | explicit
    state = coherent:1.0          # vacuum | coherent:<alpha> | probs:<p0>,<p1>,...
    t = 0                         # nonlocal only: time of the coherent state
    prob_corrections = -0.1,0.1   # optional, must sum to 0

    [K]                           # explicit model only; one matrix row per line,
    1 0                           # whitespace-separated entries in Python complex
    0 2                           # syntax (2, -0.5, 1+2j, 3j)
    [K1]                          # optional, default 0
    [basis]                       # optional, default identity (columns = basis vectors)
    [basis_corrections]           # optional, default 0

For the builtin models the dimension is taken from the run config.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hilbert import FockOperator, StateVector, coherent_state, oscillator_hamiltonian
from .nonlocal_model import energy_correction, energy_e0, evolved_coherent_state, hamiltonians, psi1_state
from .perturbation import DeformedDensity, DeformedOperator, assemble_deformed_density, pure_deformed_density

MODELS = ("oscillator", "nonlocal", "explicit")
SECTIONS = ("K", "K1", "basis", "basis_corrections")


class SpecParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass
class OperatorSpec:
    model: str = "oscillator"
    state: str = "vacuum"
    t: float = 0.0
    prob_corrections: list[float] | None = None
    matrices: dict[str, np.ndarray] = field(default_factory=dict)


def _floats(text: str, lineno: int) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise SpecParseError(lineno, f"bad number list {text!r}") from exc


def parse_spec(text: str) -> OperatorSpec:
    spec = OperatorSpec()
    section = None
    rows: dict[str, list[tuple[int, list[complex]]]] = {}
    headers: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or line[1:-1].strip() not in SECTIONS:
                raise SpecParseError(lineno, f"unknown section {line!r}; expected one of {SECTIONS}")
            section = line[1:-1].strip()
            if section in rows:
                raise SpecParseError(lineno, f"section [{section}] given twice")
            rows[section] = []
            headers[section] = lineno
            continue
        if section is not None and "=" not in line:
            try:
                rows[section].append((lineno, [complex(v) for v in line.split()]))
            except ValueError as exc:
                raise SpecParseError(lineno, f"bad matrix entry in {line!r}") from exc
            continue
        if "=" not in line:
            raise SpecParseError(lineno, f"expected 'key = value', got {line!r}")
        section = None
        key, value = (s.strip() for s in line.split("=", 1))
        if key == "model":
            if value not in MODELS:
                raise SpecParseError(lineno, f"unknown model {value!r}; expected one of {MODELS}")
            spec.model = value
        elif key == "state":
            _check_state(value, lineno)
            spec.state = value
        elif key == "t":
            try:
                spec.t = float(value)
            except ValueError as exc:
                raise SpecParseError(lineno, f"bad time {value!r}") from exc
        elif key == "prob_corrections":
            spec.prob_corrections = _floats(value, lineno)
        else:
            raise SpecParseError(lineno, f"unknown key {key!r}")

    for name, lines in rows.items():
        if not lines:
            raise SpecParseError(headers[name], f"section [{name}] is empty")
        width = len(lines[0][1])
        for lineno, r in lines:
            if len(r) != width:
                raise SpecParseError(lineno, f"row has {len(r)} entries, expected {width}")
        if len(lines) != width:
            raise SpecParseError(lines[-1][0], f"[{name}] is {len(lines)}x{width}, must be square")
        spec.matrices[name] = np.array([r for _, r in lines], dtype=complex)

    if spec.model != "explicit" and spec.matrices:
        raise SpecParseError(min(headers.values()), "matrix sections are only allowed with model = explicit")
    if spec.model == "explicit":
        if "K" not in spec.matrices:
            raise SpecParseError(0, "model = explicit needs a [K] section")
        if not spec.state.startswith("probs:"):
            raise SpecParseError(0, "model = explicit needs state = probs:...")
    if spec.model == "nonlocal" and spec.state.startswith("probs:"):
        raise SpecParseError(0, "model = nonlocal needs a coherent or vacuum state")
    return spec


def _check_state(value: str, lineno: int) -> None:
    if value == "vacuum":
        return
    if value.startswith("coherent:"):
        try:
            a = float(value.split(":", 1)[1])
        except ValueError as exc:
            raise SpecParseError(lineno, f"bad coherent amplitude in {value!r}") from exc
        if a < 0 or not math.isfinite(a):
            raise SpecParseError(lineno, "coherent amplitude must be finite and >= 0")
        return
    if value.startswith("probs:"):
        _floats(value.split(":", 1)[1], lineno)
        return
    raise SpecParseError(lineno, f"unknown state {value!r}")


@dataclass
class BuiltSpec:
    dden: DeformedDensity
    dop: DeformedOperator
    means: tuple[float, float, float] | None = None  # closed-form (<K>, <K1>, <K>_1) override


def build(spec: OperatorSpec, eta: float, dim: int, a2: float = 1.0, tail_tol: float = 1e-10) -> BuiltSpec:
    """Turn a parsed spec into the deformed density/operator pair.

    Numeric precondition failures (probabilities not normalized, truncation
    too small) raise ValueError subclasses.
    """
    if spec.model == "explicit":
        K = FockOperator(spec.matrices["K"])
        d = K.dim
        K1 = FockOperator(spec.matrices.get("K1", np.zeros((d, d))))
        basis = spec.matrices.get("basis", np.eye(d))
        corr = spec.matrices.get("basis_corrections", np.zeros((d, d)))
        p = _floats(spec.state.split(":", 1)[1], 0)
        p1 = spec.prob_corrections or [0.0] * len(p)
        dden = assemble_deformed_density(p, p1, basis, corr)
        return BuiltSpec(dden, DeformedOperator(K, K1, eta))

    alpha = 0.0 if spec.state == "vacuum" else None
    if spec.state.startswith("coherent:"):
        alpha = float(spec.state.split(":", 1)[1])

    if spec.model == "oscillator":
        H = oscillator_hamiltonian(dim)
        dop = DeformedOperator(H, FockOperator.zeros(dim), eta)
        if alpha is None:
            p = _floats(spec.state.split(":", 1)[1], 0)
            if len(p) > dim:
                raise ValueError(f"{len(p)} probabilities for dim={dim}")
            p = p + [0.0] * (dim - len(p))
            p1 = spec.prob_corrections or []
            p1 = list(p1) + [0.0] * (dim - len(p1))
            dden = assemble_deformed_density(p, p1, np.eye(dim), np.zeros((dim, dim)))
        else:
            psi = coherent_state(alpha, dim, tail_tol)
            dden = pure_deformed_density(psi, StateVector(np.zeros(dim)))
        return BuiltSpec(dden, dop)

    # nonlocal: time-t coherent state dressed with psi_1
    H, H1 = hamiltonians(dim)
    psi0 = evolved_coherent_state(spec.t, alpha, dim, tail_tol)
    psi1 = psi1_state(spec.t, alpha, a2, dim, tail_tol)
    dden = pure_deformed_density(psi0, psi1)
    means = (float(energy_e0(alpha)), float(energy_correction(spec.t, alpha)), 0.0)
    return BuiltSpec(dden, DeformedOperator(H, H1, eta), means)
