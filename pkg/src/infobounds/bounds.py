"""Quantum Fisher information and speed-limit style bounds, with first-order
deformation corrections.

All bounds take hbar explicitly (default 1). Baselines are the same formulas
at eta = 0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, fields

import numpy as np
from scipy.linalg import expm

from .hilbert import FockOperator, StateVector
from .perturbation import (
    ETA_WARN_THRESHOLD,
    DeformedDensity,
    DeformedOperator,
    DeformedState,
    FirstOrderWarning,
    VarianceParts,
    check_eta,
    modified_variation,
    variance_parts,
)

PROB_FLOOR = 1e-12


class UndefinedBoundError(ValueError):
    pass


class InvalidEtaError(ValueError):
    pass


class EnergyConventionError(ValueError):
    pass


class NoInformationError(ValueError):
    pass


class UnnormalizedStateError(ValueError):
    pass


def statistical_distance(psi: StateVector, phi: StateVector, tol: float = 1e-10) -> float:
    """Angle arccos|<psi|phi>|, evaluated as atan2 for accuracy near 0."""
    for name, s in (("psi", psi), ("phi", phi)):
        if abs(s.norm_sq() - 1.0) > tol:
            raise UnnormalizedStateError(f"{name} has squared norm {s.norm_sq():.12g}")
    u, v = psi.amplitudes, phi.amplitudes
    ov = np.vdot(u, v)
    perp = np.linalg.norm(v - ov * u)
    return float(math.atan2(perp, abs(ov)))


def _pair_weights(p: np.ndarray, floor: float) -> np.ndarray:
    s = p[:, None] + p[None, :]
    d = p[:, None] - p[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(s > floor, d**2 / s, 0.0)


def _deformed_probs(dden: DeformedDensity, eta: float) -> np.ndarray:
    pg = dden.deformed_probs(eta)
    if np.any(pg < -1e-14):
        i = int(np.argmin(pg))
        raise InvalidEtaError(f"eta={eta:g} makes probability {i} negative ({pg[i]:.3e})")
    return np.clip(pg, 0.0, None)


def generalized_qfi_direct(dden: DeformedDensity, dop: DeformedOperator,
                           hbar: float = 1.0, prob_floor: float = PROB_FLOOR) -> float:
    """(2/hbar^2) sum_jk (pg_j - pg_k)^2/(pg_j + pg_k) |<j_g|Delta_g K_g|k_g>|^2.

    Probabilities and basis are the assembled p + eta p_1 and |i> + eta |i_1>,
    and Delta_g K_g = Delta K + eta Delta_1 K_1; nothing is truncated in eta.
    """
    eta = dop.eta
    pg = _deformed_probs(dden, eta)
    vg = dden.deformed_basis(eta)
    dK, d1K1 = modified_variation(dop, dden)
    m = vg.conj().T @ (dK.entries + eta * d1K1.entries) @ vg
    return float(2.0 / hbar**2 * np.sum(_pair_weights(pg, prob_floor) * np.abs(m) ** 2))


@dataclass(frozen=True)
class QFITerms:
    """Zeroth-order QFI and the two first-order corrections (without eta)."""

    base: float
    element_correction: float
    prob_correction: float
    eta: float

    @property
    def total(self) -> float:
        return self.base + self.eta * (self.element_correction + self.prob_correction)


def qfi_expansion_terms(dden: DeformedDensity, dop: DeformedOperator,
                        hbar: float = 1.0, prob_floor: float = PROB_FLOOR) -> QFITerms:
    p, p1 = dden.probs, dden.prob_corrections
    v, v1 = dden.basis, dden.basis_corrections
    dK, d1K1 = modified_variation(dop, dden)
    d = v.conj().T @ dK.entries @ v
    # first-order change of <j_g| Delta_g K_g |k_g>, including the basis rotation
    d1 = v.conj().T @ d1K1.entries @ v + v1.conj().T @ dK.entries @ v + v.conj().T @ dK.entries @ v1

    s = p[:, None] + p[None, :]
    dp = p[:, None] - p[None, :]
    s1 = p1[:, None] + p1[None, :]
    dp1 = p1[:, None] - p1[None, :]
    live = s > prob_floor
    w0 = _pair_weights(p, prob_floor)
    with np.errstate(divide="ignore", invalid="ignore"):
        w1 = np.where(live, (2 * dp * dp1 * s - dp**2 * s1) / s**2, 0.0)
        # pairs empty at zeroth order: (eta dp1)^2 / (eta s1) is already linear in eta
        born = ~live & (s1 > 0)
        w1 = np.where(born, dp1**2 / s1, w1)
    scale = 2.0 / hbar**2
    return QFITerms(
        base=float(scale * np.sum(w0 * np.abs(d) ** 2)),
        element_correction=float(scale * np.sum(w0 * 2 * np.real(d.conj() * d1))),
        prob_correction=float(scale * np.sum(w1 * np.abs(d) ** 2)),
        eta=dop.eta,
    )


def generalized_qfi_expanded(dden: DeformedDensity, dop: DeformedOperator,
                             hbar: float = 1.0, prob_floor: float = PROB_FLOOR) -> float:
    """First-order-in-eta expansion of generalized_qfi_direct."""
    _deformed_probs(dden, dop.eta)
    return qfi_expansion_terms(dden, dop, hbar, prob_floor).total


def _eta_guard(eta: float, baseline: float, correction: float, threshold: float) -> None:
    if baseline != 0 and abs(eta * correction) > threshold * abs(baseline):
        warnings.warn(
            f"first-order correction {eta * correction:.3g} is not small against {baseline:.3g}",
            FirstOrderWarning,
            stacklevel=3,
        )


def mandelstam_tamm_modified(variance_parts: VarianceParts | tuple[float, float, float],
                             eta: float, hbar: float = 1.0,
                             threshold: float = ETA_WARN_THRESHOLD) -> float:
    if isinstance(variance_parts, VarianceParts):
        base, corr = variance_parts.base, variance_parts.correction
    else:
        base, cross, r1 = variance_parts
        corr = cross + r1
    if not base > 0:
        raise UndefinedBoundError(f"Mandelstam-Tamm bound undefined for variance {base!r}")
    lead = base**-0.5
    term = corr / (2 * base**1.5)
    _eta_guard(eta, lead, term, threshold)
    return math.pi * hbar / 2 * (lead - eta * term)


def _ml_bracket(mean_K: float, mean_K1: float, mean_K_1: float, eta: float, threshold: float) -> float:
    if not mean_K > 0:
        raise EnergyConventionError(
            f"<K> = {mean_K!r} must be positive; shift K so its spectrum starts at 0"
        )
    lead = 1.0 / mean_K
    term = (mean_K1 + mean_K_1) / mean_K**2
    _eta_guard(eta, lead, term, threshold)
    return abs(lead - eta * term)


def margolus_levitin_modified(mean_K: float, mean_K1: float, mean_K_1: float, eta: float,
                              hbar: float = 1.0, threshold: float = ETA_WARN_THRESHOLD) -> float:
    return hbar * math.pi / 2 * _ml_bracket(mean_K, mean_K1, mean_K_1, eta, threshold)


def heisenberg_limit_modified(mean_K: float, mean_K1: float, mean_K_1: float, eta: float,
                              hbar: float = 1.0, threshold: float = ETA_WARN_THRESHOLD) -> float:
    return hbar * _ml_bracket(mean_K, mean_K1, mean_K_1, eta, threshold)


def lloyd_rate_modified(mean_K: float, mean_K1: float, mean_K_1: float, eta: float,
                        hbar: float = 1.0, threshold: float = ETA_WARN_THRESHOLD) -> float:
    """Operations per unit time: the reciprocal of the Margolus-Levitin time."""
    theta = margolus_levitin_modified(mean_K, mean_K1, mean_K_1, eta, hbar, threshold)
    if theta == 0:
        raise UndefinedBoundError("Margolus-Levitin time is zero at this eta")
    return 1.0 / theta


def cramer_rao_modified(qfi_g: float, nu: int = 1) -> float:
    if not qfi_g > 0:
        raise NoInformationError(f"Fisher information {qfi_g!r} carries no information")
    if int(nu) != nu or nu < 1:
        raise ValueError(f"nu must be a positive integer, got {nu!r}")
    return 1.0 / math.sqrt(nu * qfi_g)


def expectation_inputs(dop: DeformedOperator, dden: DeformedDensity) -> tuple[float, float, float]:
    """(<K>, Re<K_1>, <K>_1) as used by the Margolus-Levitin family."""
    rho, rho1 = dden.rho.entries, dden.rho1
    return (
        float(np.trace(rho @ dop.K.entries).real),
        float(np.trace(rho @ dop.K1.entries).real),
        float(np.trace(rho1 @ dop.K.entries).real),
    )


BOUND_NAMES = (
    "qfi_g",
    "variance_bound",
    "mt_time",
    "ml_theta",
    "heisenberg_delta",
    "cramer_rao_delta",
    "lloyd_rate",
)


@dataclass(frozen=True)
class BoundValues:
    qfi_g: float = math.nan
    variance_bound: float = math.nan
    mt_time: float = math.nan
    ml_theta: float = math.nan
    heisenberg_delta: float = math.nan
    cramer_rao_delta: float = math.nan
    lloyd_rate: float = math.nan
    errors: dict = field(default_factory=dict)

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "errors"}


@dataclass(frozen=True)
class BoundReport:
    modified: BoundValues
    baselines: BoundValues
    eta: float
    hbar: float = 1.0
    nu: int = 1

    def __getattr__(self, name):
        # report.ml_theta etc. read the modified values
        if name in BOUND_NAMES:
            return getattr(self.modified, name)
        raise AttributeError(name)

    def ratios(self, other: "BoundReport") -> dict[str, float]:
        if other.hbar != self.hbar:
            raise ValueError(f"cannot compare reports with hbar={self.hbar} and hbar={other.hbar}")
        a, b = self.modified.as_dict(), other.modified.as_dict()
        return {k: a[k] / b[k] for k in a}


def _evaluate(dden: DeformedDensity, dop: DeformedOperator, hbar: float, nu: int,
              means: tuple[float, float, float] | None, prob_floor: float) -> BoundValues:
    out: dict = {}
    errors: dict[str, str] = {}
    eta = dop.eta

    def attempt(name, fn):
        try:
            out[name] = fn()
        except ValueError as exc:
            errors[name] = f"{type(exc).__name__}: {exc}"

    mk, mk1, mk_1 = means if means is not None else expectation_inputs(dop, dden)
    parts = variance_parts(dop, dden)
    attempt("qfi_g", lambda: generalized_qfi_direct(dden, dop, hbar, prob_floor))
    out["variance_bound"] = 4 * parts.total / hbar**2
    attempt("mt_time", lambda: mandelstam_tamm_modified(parts, eta, hbar))
    attempt("ml_theta", lambda: margolus_levitin_modified(mk, mk1, mk_1, eta, hbar))
    attempt("heisenberg_delta", lambda: heisenberg_limit_modified(mk, mk1, mk_1, eta, hbar))
    if "qfi_g" in out:
        attempt("cramer_rao_delta", lambda: cramer_rao_modified(out["qfi_g"], nu))
    else:
        errors["cramer_rao_delta"] = errors["qfi_g"]
    attempt("lloyd_rate", lambda: lloyd_rate_modified(mk, mk1, mk_1, eta, hbar))
    return BoundValues(**out, errors=errors)


def bound_report(dden: DeformedDensity, dop: DeformedOperator, hbar: float = 1.0, nu: int = 1,
                 means: tuple[float, float, float] | None = None,
                 prob_floor: float = PROB_FLOOR) -> BoundReport:
    """Every bound at the operator's eta, next to the eta = 0 baseline.

    `means` overrides (<K>, <K_1>, <K>_1) for the Margolus-Levitin family,
    e.g. with closed-form values.
    """
    if not hbar > 0:
        raise ValueError(f"hbar must be positive, got {hbar!r}")
    check_eta(dop, dden)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FirstOrderWarning)
        modified = _evaluate(dden, dop, hbar, nu, means, prob_floor)
        baselines = _evaluate(dden, dop.with_eta(0.0), hbar, nu, means, prob_floor)
    return BoundReport(modified=modified, baselines=baselines, eta=dop.eta, hbar=hbar, nu=nu)


def evolve(psi: StateVector, K: FockOperator, theta: float, hbar: float = 1.0) -> StateVector:
    """exp(-i K theta / hbar) |psi> for Hermitian K."""
    if not K.is_hermitian(1e-10):
        raise ValueError("unitary evolution needs a Hermitian generator")
    return StateVector(expm(-1j * theta / hbar * K.hermitian_part) @ psi.amplitudes)


def distance_rate(psi: StateVector, K: FockOperator, theta: float = 0.0,
                  step: float = 1e-4, hbar: float = 1.0) -> float:
    """ds/dtheta along exp(-i K theta/hbar)|psi>, as s(theta-h, theta+h) / 2h."""
    lo = evolve(psi, K, theta - step, hbar).normalized()
    hi = evolve(psi, K, theta + step, hbar).normalized()
    return statistical_distance(lo, hi) / (2 * step)


@dataclass(frozen=True)
class ChainCheck:
    max_rate: float
    bound: float
    holds: bool
    skipped: str = ""


def schwarz_chain_check(dstate: DeformedState, dop: DeformedOperator, thetas,
                        step: float = 1e-4, hbar: float = 1.0, slack: float = 1e-6) -> ChainCheck:
    """Compare finite-difference ds_g/dtheta with |<K_g>_g|/hbar along a trajectory.

    Skipped (not evaluated) when K_1 is not Hermitian, since the evolution is
    then not unitary.
    """
    if not dop.K1.is_hermitian(1e-10):
        return ChainCheck(math.nan, math.nan, True, skipped="K1 is not Hermitian; evolution is not unitary")
    psi_g = dstate.assembled().normalized()
    kg = dop.assembled()
    bound = abs(np.vdot(psi_g.amplitudes, kg.entries @ psi_g.amplitudes)) / hbar
    rate = max(distance_rate(psi_g, kg, th, step, hbar) for th in thetas)
    return ChainCheck(float(rate), float(bound), bool(rate <= bound + slack))
