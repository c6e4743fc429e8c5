"""Nonlocal harmonic oscillator to first order in eta.

H_g = (x^2 + p^2)/2 + eta (x^4/2 + 2i x p + 1) acting on a coherent state of
real amplitude alpha. The closed-form energies E0, E1(t), E2(t), the norm
correction n(t) and B_t = -E0 n + E1 + E2 drive the time-dependent bounds.

The Fock-space oracle evaluates the same averages from matrices and reports
residuals against the closed forms without asserting they agree. A separate
Gauss-Hermite path evaluates overlaps directly from the position-space
wavefunction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .hilbert import (
    DEFAULT_TAIL_TOL,
    FockOperator,
    InvalidDimensionError,
    StateVector,
    TruncationError,
    coherent_state,
    expectation,
    momentum_op,
    oscillator_hamiltonian,
    position_op,
)
from .perturbation import FirstOrderWarning

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class NonlocalModel:
    eta: float = 0.01
    a2: float = 1.0
    dim: int = 64

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")
        if self.eta >= 0.1:
            warnings.warn(f"eta={self.eta} is outside the first-order regime", FirstOrderWarning, stacklevel=3)
        if self.dim < 8:
            raise InvalidDimensionError(f"dim must be >= 8, got {self.dim}")

    def quantities(self, t: float, alpha: float) -> "AppendixQuantities":
        return appendix_quantities(t, alpha, self.eta)

    def audit(self, t: float, alpha: float, tail_tol: float = DEFAULT_TAIL_TOL) -> "AuditRecord":
        return oracle_energy_audit(t, alpha, self.eta, self.a2, self.dim, tail_tol)


def hamiltonians(dim: int) -> tuple[FockOperator, FockOperator]:
    """(H, H1) with H = (x^2+p^2)/2 and H1 = x^4/2 + 2i x p + 1."""
    if dim < 8:
        raise InvalidDimensionError(f"dim must be >= 8, got {dim}")
    x, p = position_op(dim), momentum_op(dim)
    H = oscillator_hamiltonian(dim)
    H1 = (x @ x @ x @ x) * 0.5 + (x @ p) * 2j + FockOperator.identity(dim)
    return H, H1


# closed forms; all accept numpy arrays for t


def energy_e0(alpha):
    return 0.5 + np.square(alpha)


def energy_e1(t, alpha):
    a2 = np.square(alpha)
    return (3 + 6 * a2 * (2 + a2) + 2 * a2 * ((6 + 4 * a2) * np.cos(2 * t) + a2 * np.cos(4 * t))) / 16


def energy_e2(t, alpha):
    a2 = np.square(alpha)
    return (
        7 + 18 * a2 + 44 * a2**2
        - 2 * (1 - 3 * a2 + 6 * a2**2) * np.cos(2 * t)
        + (5 + 10 * a2 + 4 * a2**2) * np.cos(4 * t)
    ) / 16


def norm_correction(t, alpha):
    """n(t) in N = 1 + eta n(t)."""
    a2 = np.square(alpha)
    return (7 + 12 * a2 + 2 * (a2 - 1) * np.cos(2 * t) - 5 * np.cos(4 * t)) / 8


def energy_correction(t, alpha):
    """B_t = -E0 n(t) + E1(t) + E2(t)."""
    return -energy_e0(alpha) * norm_correction(t, alpha) + energy_e1(t, alpha) + energy_e2(t, alpha)


@dataclass(frozen=True)
class AppendixQuantities:
    t: float
    alpha: float
    eta: float
    E0: float
    E1: float
    E2: float
    n_t: float
    B_t: float
    B: float

    @property
    def N(self) -> float:
        return 1.0 + self.eta * self.n_t

    @property
    def B_ratio(self) -> float:
        """(E0 + eta (E1 + E2)) / N before expanding in eta."""
        return (self.E0 + self.eta * (self.E1 + self.E2)) / self.N


def appendix_quantities(t: float, alpha: float, eta: float) -> AppendixQuantities:
    e0 = float(energy_e0(alpha))
    bt = float(energy_correction(t, alpha))
    return AppendixQuantities(
        t=t,
        alpha=alpha,
        eta=eta,
        E0=e0,
        E1=float(energy_e1(t, alpha)),
        E2=float(energy_e2(t, alpha)),
        n_t=float(norm_correction(t, alpha)),
        B_t=bt,
        B=e0 + eta * bt,
    )


def tmin_bound(t, alpha, eta, hbar: float = 1.0):
    """(pi hbar / 2 E0)(1 - eta B_t / E0)."""
    e0 = energy_e0(alpha)
    return math.pi * hbar / (2 * e0) * (1 - eta * energy_correction(t, alpha) / e0)


def tmin_bound_unexpanded(t, alpha, eta, hbar: float = 1.0):
    """pi hbar / (2 B(t)) with B(t) = (E0 + eta (E1 + E2)) / N."""
    b = (energy_e0(alpha) + eta * (energy_e1(t, alpha) + energy_e2(t, alpha))) / (
        1 + eta * norm_correction(t, alpha)
    )
    return math.pi * hbar / (2 * b)


def heisenberg_dt(t, alpha, eta, hbar: float = 1.0):
    """(hbar / E0)(1 - eta B_t / E0)."""
    e0 = energy_e0(alpha)
    return hbar / e0 * (1 - eta * energy_correction(t, alpha) / e0)


def coherent_wavefunction_coeffs(t: float, alpha: float, a2: float = 1.0) -> tuple[complex, ...]:
    """Time-dependent coefficients c0..c4 of the polynomial dressing of psi_1."""
    e = lambda k: np.exp(1j * k * t)  # noqa: E731
    al2, al4 = alpha**2, alpha**4
    c0 = a2 / 32 * e(-8) * (
        al4 - 8 * al4 * e(2) + 8 * al4 * e(6) - al4 * e(8)
        - 6 * al2 * e(2) + 20 * al2 * e(4) - 14 * al2 * e(6) + 28 * al2 * e(8)
        - 3 * e(4) - 4 * e(6) + 7 * e(8)
    )
    c1 = -alpha * a2 / (4 * SQRT2) * e(-7) * (
        al2 - 6 * al2 * e(2) + 3 * al2 * e(4) + 2 * al2 * e(6) - 3 * e(2) + 4 * e(4) - e(6)
    )
    c2 = a2 / 8 * e(-6) * (3 * al2 - 12 * al2 * e(2) + 9 * al2 * e(4) - 3 * e(2) - 2 * e(4) + 5 * e(6))
    c3 = -alpha * a2 / (2 * SQRT2) * e(-5) * (1 - e(2)) ** 2
    c4 = a2 / 8 * e(-4) * (1 - e(4))
    return tuple(complex(c) for c in (c0, c1, c2, c3, c4))


def evolved_coherent_state(t: float, alpha: float, dim: int, tail_tol: float = DEFAULT_TAIL_TOL) -> StateVector:
    """Fock vector of the time-t coherent state, including the e^{-it/2} phase."""
    psi = coherent_state(alpha * np.exp(-1j * t), dim, tail_tol)
    return StateVector(psi.amplitudes * np.exp(-0.5j * t), norm_deficit=psi.norm_deficit)


def _dress(coeffs, x: np.ndarray, psi0: np.ndarray) -> np.ndarray:
    out = np.zeros_like(psi0)
    term = psi0
    for k, c in enumerate(coeffs):
        if k:
            term = x @ term
        out = out + c * term
    return out


def psi1_state(t: float, alpha: float, a2: float, dim: int,
               tail_tol: float = DEFAULT_TAIL_TOL) -> StateVector:
    """psi_1 = psi_0 (c0 + c1 x + ... + c4 x^4) in the Fock basis.

    Rebuilt at 2*dim as a truncation check: the dressing pushes weight up by
    up to four levels, so the doubled-dimension vector must agree.
    """
    coeffs = coherent_wavefunction_coeffs(t, alpha, a2)

    def build(d):
        psi0 = evolved_coherent_state(t, alpha, d, tail_tol).amplitudes
        return _dress(coeffs, position_op(d).entries, psi0)

    lo, hi = build(dim), build(2 * dim)
    diff = np.concatenate([lo, np.zeros(dim)]) - hi
    mass = float(np.vdot(diff, diff).real)
    scale = max(1.0, float(np.vdot(hi, hi).real))
    if mass > 10 * tail_tol * scale:
        raise TruncationError(
            f"psi_1 at t={t:g}, alpha={alpha:g} changes by mass {mass:.3e} when dim doubles from {dim}",
            tail_mass=mass,
        )
    return StateVector(lo)


# position-space path


def psi0_position(x, t: float, alpha: float):
    """Coherent-state wavefunction psi_0(t, x), written out directly."""
    return np.exp(_log_psi0(x, t, alpha)) / math.pi**0.25


def _log_psi0(x, t, alpha):
    return (
        SQRT2 * alpha * np.exp(-1j * t) * x
        - 0.5 * alpha**2 * np.exp(-2j * t)
        - 0.5 * alpha**2
        - 0.5j * t
        - 0.5 * np.square(x)
    )


def _psi0_center(t: float, alpha: float) -> float:
    return SQRT2 * alpha * math.cos(t)


def _poly(coeffs, x):
    return sum(c * x**k for k, c in enumerate(coeffs))


def quadrature_overlaps(t: float, alpha: float, a2: float = 1.0, nodes: int = 64) -> dict[str, complex]:
    """<psi0|psi1>, <psi1|H|psi0> and <psi0|H1|psi0> by Gauss-Hermite quadrature.

    Nodes are shifted to the centre of |psi0|^2, so the integrand divided by
    the Hermite weight is a polynomial and the rule is exact up to degree
    2*nodes - 1. H psi0 and the derivative in p use the analytic derivatives
    of the exponent of psi0.
    """
    u, w = np.polynomial.hermite.hermgauss(nodes)
    s = _psi0_center(t, alpha)
    x = u + s
    logp = _log_psi0(x, t, alpha)
    # |psi0|^2 e^{u^2} and the weights combined in log space
    dens = np.exp(2 * logp.real + u**2 + np.log(w)) / math.sqrt(math.pi)
    beta = alpha * np.exp(-1j * t)
    dphi = SQRT2 * beta - x  # d/dx log psi0
    h_psi0 = 0.5 * (x**2 - (dphi**2 - 1.0))  # (H psi0) / psi0
    p_psi0 = -1j * dphi  # (p psi0) / psi0
    poly = _poly(coherent_wavefunction_coeffs(t, alpha, a2), x)
    h1 = 0.5 * x**4 + 2j * x * p_psi0 + 1.0
    return {
        "psi0_psi1": complex(np.sum(dens * poly)),
        "psi1_H_psi0": complex(np.sum(dens * np.conj(poly) * h_psi0)),
        "psi0_H1_psi0": complex(np.sum(dens * h1)),
        "psi0_H_psi0": complex(np.sum(dens * h_psi0)),
    }


def fock_overlaps(t: float, alpha: float, a2: float, dim: int,
                  tail_tol: float = DEFAULT_TAIL_TOL) -> dict[str, complex]:
    H, H1 = hamiltonians(dim)
    psi0 = evolved_coherent_state(t, alpha, dim, tail_tol)
    psi1 = psi1_state(t, alpha, a2, dim, tail_tol)
    return {
        "psi0_psi1": psi0.inner(psi1),
        "psi1_H_psi0": complex(np.vdot(psi1.amplitudes, H.entries @ psi0.amplitudes)),
        "psi0_H1_psi0": expectation(H1, psi0),
        "psi0_H_psi0": expectation(H, psi0),
    }


@dataclass(frozen=True)
class AuditRecord:
    """One grid point of the Fock-space audit.

    Residuals of first-order terms are weighted by eta, so they are the
    discrepancy each term contributes to <H_g>_g. The *_per_a2 values are the
    a2-linear pieces at a2 = 1, used for the a2 scan.
    """

    t: float
    alpha: float
    eta: float
    a2: float
    dim: int
    E0_numeric: float = math.nan
    E0_closed: float = math.nan
    E0_residual: float = math.nan
    ReH1_numeric: float = math.nan
    E1_closed: float = math.nan
    ratio_ReH1_E1: float = math.nan
    E1_residual: float = math.nan
    cross_numeric: float = math.nan
    E2_closed: float = math.nan
    E2_residual: float = math.nan
    norm_numeric: float = math.nan
    n_closed: float = math.nan
    n_residual: float = math.nan
    energy_numeric: float = math.nan
    B_closed: float = math.nan
    B_residual: float = math.nan
    norm_per_a2: float = math.nan
    cross_per_a2: float = math.nan
    flag: str = ""

    def row(self) -> dict:
        return asdict(self)


AUDIT_COLUMNS = tuple(AuditRecord.__dataclass_fields__)


def oracle_energy_audit(t: float, alpha: float, eta: float, a2: float = 1.0, dim: int = 64,
                        tail_tol: float = DEFAULT_TAIL_TOL) -> AuditRecord:
    """Evaluate each term of <H_g>_g from Fock matrices and compare to the closed forms."""
    q = appendix_quantities(t, alpha, eta)
    try:
        # a2 = 1 once; every a2-dependent quantity is linear in a2
        ov = fock_overlaps(t, alpha, 1.0, dim, tail_tol)
    except TruncationError as exc:
        return AuditRecord(t, alpha, eta, a2, dim, flag=f"truncation: {exc}")
    e0 = ov["psi0_H_psi0"].real
    reh1 = ov["psi0_H1_psi0"].real
    norm1 = 2 * ov["psi0_psi1"].real
    cross1 = 2 * ov["psi1_H_psi0"].real
    norm_num, cross_num = a2 * norm1, a2 * cross1
    energy = (e0 + eta * (reh1 + cross_num)) / (1 + eta * norm_num)
    return AuditRecord(
        t=t, alpha=alpha, eta=eta, a2=a2, dim=dim,
        E0_numeric=e0, E0_closed=q.E0, E0_residual=e0 - q.E0,
        ReH1_numeric=reh1, E1_closed=q.E1, ratio_ReH1_E1=reh1 / q.E1,
        E1_residual=eta * (reh1 - q.E1),
        cross_numeric=cross_num, E2_closed=q.E2, E2_residual=eta * (cross_num - q.E2),
        norm_numeric=norm_num, n_closed=q.n_t, n_residual=eta * (norm_num - q.n_t),
        energy_numeric=energy, B_closed=q.B, B_residual=energy - q.B,
        norm_per_a2=norm1, cross_per_a2=cross1,
    )


@dataclass(frozen=True)
class A2Fit:
    target: str
    a2: float
    rms: float
    rms_at_unit_a2: float
    grid: tuple[float, ...] = field(repr=False, default=())


def fit_a2(records, target: str = "norm", lo: float = -2.0, hi: float = 2.0, points: int = 4001) -> A2Fit:
    """Scan a2 over [lo, hi] for the best least-squares match of the numeric
    term to its closed form ('norm': 2Re<psi0|psi1> vs n(t); 'cross':
    2Re<psi1|H|psi0> vs E2(t))."""
    recs = [r for r in records if not r.flag]
    if not recs:
        raise ValueError("no usable audit records")
    if target == "norm":
        g = np.array([r.norm_per_a2 for r in recs])
        y = np.array([r.n_closed for r in recs])
    elif target == "cross":
        g = np.array([r.cross_per_a2 for r in recs])
        y = np.array([r.E2_closed for r in recs])
    else:
        raise ValueError(f"unknown target {target!r}")
    grid = np.linspace(lo, hi, points)
    rms = np.sqrt(np.mean((grid[:, None] * g[None, :] - y[None, :]) ** 2, axis=1))
    k = int(np.argmin(rms))
    unit = float(np.sqrt(np.mean((g - y) ** 2)))
    return A2Fit(target, float(grid[k]), float(rms[k]), unit, tuple(grid))
