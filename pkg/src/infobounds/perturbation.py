"""First-order deformations of states, densities and generators.

A deformed quantity is written X_g = X + eta * X_1 and everything here is
kept to first order in eta. The eigenvector corrections |i_1> are stored
in the gauge <i|i_1> = 0: the real part would change the norm of |i_g>,
the imaginary part is a first-order phase. With it Tr(rho_1) = sum(p_1) = 0.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .hilbert import (
    DensityMatrix,
    DimensionMismatchError,
    FockOperator,
    StateVector,
    check_orthonormal,
    complete_basis,
    density_from_probs,
    hermitian_eigendecompose,
)

ETA_WARN_THRESHOLD = 0.1


class FirstOrderWarning(UserWarning):
    """eta is large enough that first-order truncation is doubtful."""


class DegeneracyError(ValueError):
    def __init__(self, i: int, j: int, gap: float):
        super().__init__(f"levels {i} and {j} are coupled but nearly degenerate (gap {gap:.3e})")
        self.levels = (i, j)
        self.gap = gap


@dataclass(frozen=True, eq=False)
class DeformedOperator:
    K: FockOperator
    K1: FockOperator
    eta: float

    def __post_init__(self):
        if self.K.dim != self.K1.dim:
            raise DimensionMismatchError(f"K is {self.K.dim}-dim but K1 is {self.K1.dim}-dim")
        if not self.K.is_hermitian(1e-10):
            raise ValueError(f"K must be Hermitian (max asymmetry {self.K.max_asymmetry():.3e})")

    @property
    def dim(self) -> int:
        return self.K.dim

    def with_eta(self, eta: float) -> "DeformedOperator":
        return DeformedOperator(self.K, self.K1, eta)

    def assembled(self) -> FockOperator:
        return self.K + self.K1 * self.eta


@dataclass(frozen=True, eq=False)
class DeformedDensity:
    probs: np.ndarray
    prob_corrections: np.ndarray
    basis: np.ndarray
    basis_corrections: np.ndarray
    rho: DensityMatrix
    rho1: np.ndarray

    @property
    def dim(self) -> int:
        return self.rho.dim

    def deformed_probs(self, eta: float) -> np.ndarray:
        return self.probs + eta * self.prob_corrections

    def deformed_basis(self, eta: float) -> np.ndarray:
        return self.basis + eta * self.basis_corrections

    def assembled(self, eta: float) -> np.ndarray:
        return self.rho.entries + eta * self.rho1


def _rho1_from_parts(p, p1, basis, corrections) -> np.ndarray:
    cross = (corrections * p) @ basis.conj().T
    return cross + cross.conj().T + (basis * p1) @ basis.conj().T


def assemble_deformed_density(p, p1, basis, basis_corrections) -> DeformedDensity:
    p = np.array(p, dtype=float)
    p1 = np.array(p1, dtype=float)
    basis = np.array(basis, dtype=complex)
    corr = np.array(basis_corrections, dtype=complex)
    if basis.shape != corr.shape or p.size != basis.shape[1] or p1.size != p.size:
        raise DimensionMismatchError(
            f"inconsistent shapes: p {p.shape}, p1 {p1.shape}, basis {basis.shape}, corrections {corr.shape}"
        )
    if abs(p1.sum()) > 1e-10:
        raise ValueError(f"probability corrections must sum to 0, got {p1.sum():.3e}")
    check_orthonormal(basis)
    overlaps = np.einsum("ij,ij->j", basis.conj(), corr)
    corr = corr - basis * overlaps
    rho = density_from_probs(p, basis)
    rho1 = _rho1_from_parts(p, p1, basis, corr)
    rho1 = 0.5 * (rho1 + rho1.conj().T)
    for arr in (p, p1, basis, corr, rho1):
        arr.setflags(write=False)
    return DeformedDensity(p, p1, basis, corr, rho, rho1)


def pure_deformed_density(psi: StateVector, psi1: StateVector) -> DeformedDensity:
    """DeformedDensity for |psi> + eta |psi1> with psi normalized.

    The complement basis vectors get the corrections that keep the deformed
    basis orthonormal at first order; they carry zero probability.
    """
    v = psi.normalized().amplitudes
    basis = complete_basis(v)
    c = basis.conj().T @ psi1.amplitudes  # components of psi1 in the basis
    coeffs = np.zeros((basis.shape[1],) * 2, dtype=complex)
    coeffs[:, 0] = c
    coeffs[0, 1:] = -c[1:].conj()
    corr = basis @ coeffs
    p = np.zeros(basis.shape[1])
    p[0] = 1.0
    return assemble_deformed_density(p, np.zeros_like(p), basis, corr)


@dataclass(frozen=True, eq=False)
class DeformedState:
    psi: StateVector
    psi1: StateVector
    eta: float

    def __post_init__(self):
        if self.psi.dim != self.psi1.dim:
            raise DimensionMismatchError(f"psi is {self.psi.dim}-dim, psi1 is {self.psi1.dim}-dim")
        if self.assembled().norm_sq() <= 0:
            raise ValueError("assembled deformed state has zero norm")

    def assembled(self) -> StateVector:
        return StateVector(self.psi.amplitudes + self.eta * self.psi1.amplitudes)

    def density(self) -> DeformedDensity:
        return pure_deformed_density(self.psi, self.psi1)


def check_eta(dop: DeformedOperator, dden: DeformedDensity | None = None,
              threshold: float = ETA_WARN_THRESHOLD) -> float:
    """Warn if eta * max(|rho_1|, |K_1|/|K|) exceeds threshold; returns the measure."""
    knorm = np.linalg.norm(dop.K.entries, 2)
    scale = np.linalg.norm(dop.K1.entries, 2) / knorm if knorm > 0 else 0.0
    if dden is not None:
        scale = max(scale, np.linalg.norm(dden.rho1, 2))
    measure = abs(dop.eta) * scale
    if measure > threshold:
        warnings.warn(
            f"eta={dop.eta:g} gives first-order size {measure:.3g} > {threshold:g}",
            FirstOrderWarning,
            stacklevel=2,
        )
    return float(measure)


def modified_variation(dop: DeformedOperator, dden: DeformedDensity) -> tuple[FockOperator, FockOperator]:
    """Return (Delta K, Delta_1 K_1) with Delta_g K_g = Delta K + eta Delta_1 K_1."""
    if dop.dim != dden.dim:
        raise DimensionMismatchError(f"operator dim {dop.dim} vs density dim {dden.dim}")
    rho, rho1 = dden.rho.entries, dden.rho1
    K, K1 = dop.K.entries, dop.K1.entries
    ident = np.eye(dop.dim)
    dK = K - np.trace(rho @ K) * ident
    d1K1 = K1 - (np.trace(rho @ K1) + np.trace(rho1 @ K)) * ident
    return FockOperator(dK), FockOperator(d1K1)


@dataclass(frozen=True)
class VarianceParts:
    """<(dK)^2> + eta*cross + eta*rho1_term, each a real number."""

    base: float
    cross: float
    rho1_term: float
    eta: float

    @property
    def correction(self) -> float:
        return self.cross + self.rho1_term

    @property
    def total(self) -> float:
        return self.base + self.eta * self.correction


def variance_parts(dop: DeformedOperator, dden: DeformedDensity) -> VarianceParts:
    dK, d1K1 = modified_variation(dop, dden)
    rho, rho1 = dden.rho.entries, dden.rho1
    dK2 = dK.entries @ dK.entries
    anti = d1K1.entries @ dK.entries + dK.entries @ d1K1.entries
    return VarianceParts(
        base=float(np.trace(rho @ dK2).real),
        cross=float(np.trace(rho @ anti).real),
        rho1_term=float(np.trace(rho1 @ dK2).real),
        eta=dop.eta,
    )


def deformed_variance(dop: DeformedOperator, dden: DeformedDensity) -> float:
    return variance_parts(dop, dden).total


def rayleigh_first_order(H: FockOperator, H1_herm: FockOperator,
                         gap_tol: float = 1e-8, coupling_tol: float = 1e-12) -> np.ndarray:
    """First-order eigenvector corrections of H under H + eta*H1_herm.

    Column i is |i_1> = sum_{j != i} <j|H1|i> / (E_i - E_j) |j>, expressed in
    the original (Fock) basis; columns follow the ascending eigenvalue order
    of hermitian_eigendecompose(H). Nearly degenerate pairs are only an error
    when H1 actually couples them.
    """
    if not H1_herm.is_hermitian(1e-10):
        raise ValueError("H1_herm must be Hermitian")
    spec = hermitian_eigendecompose(H)
    E, V = spec.eigenvalues, spec.eigenvectors
    h1 = V.conj().T @ H1_herm.entries @ V
    gaps = E[:, None] - E[None, :]  # gaps[j, i] = E_j - E_i
    coupled = np.abs(h1) > coupling_tol
    np.fill_diagonal(coupled, False)
    bad = coupled & (np.abs(gaps) < gap_tol)
    if bad.any():
        j, i = np.argwhere(bad)[0]
        raise DegeneracyError(int(i), int(j), float(abs(gaps[j, i])))
    with np.errstate(divide="ignore", invalid="ignore"):
        coeffs = np.where(coupled, h1 / -gaps, 0.0)
    return V @ coeffs
