"""Truncated Fock-space linear algebra.

Units are hbar = m = omega = 1 throughout. Operators are dense complex
matrices on the levels 0 .. dim-1; products such as x**4 are formed as
products of truncated matrices, so the top few levels carry truncation
artifacts. `check_convergence` is the guard against those.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

DEFAULT_TAIL_TOL = 1e-10


class InvalidDimensionError(ValueError):
    pass


class TruncationError(ValueError):
    """Raised when the Fock truncation cannot hold the requested state."""

    def __init__(self, message: str, tail_mass: float = float("nan")):
        super().__init__(message)
        self.tail_mass = tail_mass


class NotHermitianError(ValueError):
    def __init__(self, max_asymmetry: float):
        super().__init__(f"operator is not Hermitian: max |A - A^H| = {max_asymmetry:.3e}")
        self.max_asymmetry = max_asymmetry


class DimensionMismatchError(ValueError):
    pass


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FockOperator:
    entries: np.ndarray

    def __post_init__(self):
        m = _freeze(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise InvalidDimensionError(f"operator must be square, got shape {m.shape}")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def hermitian_part(self) -> np.ndarray:
        return 0.5 * (self.entries + self.entries.conj().T)

    @property
    def anti_hermitian_part(self) -> np.ndarray:
        return 0.5 * (self.entries - self.entries.conj().T)

    def max_asymmetry(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return self.max_asymmetry() <= tol

    @property
    def dag(self) -> "FockOperator":
        return FockOperator(self.entries.conj().T)

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            _match(self.dim, other.dim)
            return FockOperator(self.entries @ other.entries)
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, FockOperator):
            _match(self.dim, other.dim)
            return FockOperator(self.entries + other.entries)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, FockOperator):
            _match(self.dim, other.dim)
            return FockOperator(self.entries - other.entries)
        return NotImplemented

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return FockOperator(self.entries * scalar)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return FockOperator(self.entries / scalar)

    def __pow__(self, k: int) -> "FockOperator":
        return FockOperator(np.linalg.matrix_power(self.entries, k))

    @classmethod
    def identity(cls, dim: int) -> "FockOperator":
        return cls(np.eye(dim))

    @classmethod
    def zeros(cls, dim: int) -> "FockOperator":
        return cls(np.zeros((dim, dim)))


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    norm_deficit: float = 0.0

    def __post_init__(self):
        v = _freeze(self.amplitudes)
        if v.ndim != 1 or v.size < 1:
            raise InvalidDimensionError(f"state must be a 1-d vector, got shape {v.shape}")
        object.__setattr__(self, "amplitudes", v)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def normalized(self) -> "StateVector":
        n2 = self.norm_sq()
        if n2 <= 0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.amplitudes / np.sqrt(n2), norm_deficit=max(0.0, 1.0 - n2))

    def inner(self, other: "StateVector") -> complex:
        """<self|other>."""
        _match(self.dim, other.dim)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    @classmethod
    def basis(cls, n: int, dim: int) -> "StateVector":
        v = np.zeros(dim, dtype=complex)
        v[n] = 1.0
        return cls(v)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    entries: np.ndarray

    def __post_init__(self):
        m = _freeze(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidDimensionError(f"density matrix must be square, got {m.shape}")
        asym = float(np.max(np.abs(m - m.conj().T)))
        if asym > 1e-12:
            raise NotHermitianError(asym)
        tr = np.trace(m).real
        if abs(tr - 1.0) > 1e-12:
            raise ValueError(f"density matrix trace {tr!r} differs from 1")
        lo = np.linalg.eigvalsh(m).min()
        if lo < -1e-10:
            raise ValueError(f"density matrix has negative eigenvalue {lo:.3e}")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def pure(cls, state: StateVector) -> "DensityMatrix":
        v = state.normalized().amplitudes
        return cls(np.outer(v, v.conj()))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _match(d1: int, d2: int) -> None:
    if d1 != d2:
        raise DimensionMismatchError(f"dimension mismatch: {d1} vs {d2}")


def _check_dim(dim: int) -> None:
    if int(dim) != dim or dim < 2:
        raise InvalidDimensionError(f"dim must be an integer >= 2, got {dim!r}")


def ladder_ops(dim: int) -> tuple[FockOperator, FockOperator]:
    _check_dim(dim)
    a = np.diag(np.sqrt(np.arange(1, dim)), k=1)
    return FockOperator(a), FockOperator(a.T)


def position_op(dim: int) -> FockOperator:
    a, ad = ladder_ops(dim)
    return (a + ad) / np.sqrt(2)


def momentum_op(dim: int) -> FockOperator:
    a, ad = ladder_ops(dim)
    return (ad - a) * (1j / np.sqrt(2))


def number_op(dim: int) -> FockOperator:
    _check_dim(dim)
    return FockOperator(np.diag(np.arange(dim, dtype=float)))


def oscillator_hamiltonian(dim: int) -> FockOperator:
    """(x^2 + p^2)/2 from truncated products.

    Equals diag(n + 1/2) except the last diagonal entry, which is (dim-1)/2.
    """
    x, p = position_op(dim), momentum_op(dim)
    return (x @ x + p @ p) * 0.5


def poisson_tail(mean: float, n: int) -> float:
    """P[N >= n] for N ~ Poisson(mean)."""
    if mean == 0:
        return 0.0 if n > 0 else 1.0
    # regularized lower incomplete gamma: P[N >= n] = P(n, mean)
    return float(special.gammainc(n, mean)) if n > 0 else 1.0


def coherent_state(alpha: complex, dim: int, tail_tol: float = DEFAULT_TAIL_TOL) -> StateVector:
    """Fock amplitudes exp(-|alpha|^2/2) alpha^n / sqrt(n!), renormalized.

    Complex alpha is accepted; the time-t slice of the oscillator coherent
    state is coherent_state(alpha * exp(-1j*t)) up to a global phase.
    """
    _check_dim(dim)
    mean = abs(alpha) ** 2
    tail = poisson_tail(mean, dim)
    if tail > tail_tol:
        raise TruncationError(
            f"coherent state |alpha|={abs(alpha):g} needs more than dim={dim} levels: "
            f"tail mass {tail:.3e} > {tail_tol:.1e}",
            tail_mass=tail,
        )
    n = np.arange(dim)
    # log-space avoids overflow in alpha**n / sqrt(n!) for large n
    if alpha == 0:
        amps = np.zeros(dim, dtype=complex)
        amps[0] = 1.0
    else:
        logmag = -mean / 2 + n * np.log(abs(alpha)) - 0.5 * special.gammaln(n + 1)
        amps = np.exp(logmag) * np.exp(1j * n * np.angle(alpha))
    return StateVector(amps).normalized()


def expectation(op: FockOperator, state: StateVector) -> complex:
    _match(op.dim, state.dim)
    v = state.amplitudes
    return complex(np.vdot(v, op.entries @ v))


def hermitian_eigendecompose(op: FockOperator, tol: float = 1e-10) -> SpectralDecomposition:
    asym = op.max_asymmetry()
    if asym > tol:
        raise NotHermitianError(asym)
    w, v = np.linalg.eigh(op.hermitian_part)
    return SpectralDecomposition(eigenvalues=w, eigenvectors=v)


def check_orthonormal(basis: np.ndarray, tol: float = 1e-10) -> None:
    basis = np.asarray(basis)
    gram = basis.conj().T @ basis
    err = float(np.max(np.abs(gram - np.eye(basis.shape[1]))))
    if err > tol:
        raise ValueError(f"basis is not orthonormal: max |V^H V - I| = {err:.3e}")


def density_from_probs(probs, basis) -> DensityMatrix:
    probs = np.asarray(probs, dtype=float)
    basis = np.asarray(basis, dtype=complex)
    if np.any(probs < 0):
        raise ValueError(f"negative probability {probs.min():.3e}")
    if abs(probs.sum() - 1.0) > 1e-12:
        raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
    if basis.shape[1] != probs.size:
        raise DimensionMismatchError(f"{probs.size} probabilities for {basis.shape[1]} basis vectors")
    check_orthonormal(basis)
    rho = (basis * probs) @ basis.conj().T
    # remove rounding asymmetry before validation
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho)


def complete_basis(v: np.ndarray) -> np.ndarray:
    """Orthonormal basis whose first column is the normalized vector v."""
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    dim = v.size
    q, _ = np.linalg.qr(np.column_stack([v, np.eye(dim, dtype=complex)]))
    q = q[:, :dim]
    # qr fixes the first column only up to a phase
    q[:, 0] = v
    return q


def check_convergence(
    fn: Callable[[int], complex], dim: int, tail_tol: float = DEFAULT_TAIL_TOL, factor: float = 10.0
) -> complex:
    """Evaluate fn at dim and 2*dim; raise TruncationError if they disagree.

    Returns the value at dim. The allowed discrepancy is factor * tail_tol.
    """
    lo, hi = fn(dim), fn(2 * dim)
    diff = abs(complex(lo) - complex(hi))
    if diff > factor * tail_tol:
        raise TruncationError(
            f"value changed by {diff:.3e} between dim={dim} and dim={2 * dim} "
            f"(allowed {factor * tail_tol:.1e})",
            tail_mass=diff,
        )
    return lo
