"""Truncated two-mode Fock space containers and linear-algebra primitives.

Two-mode index convention: ``|a, b>`` lives at flat position ``a * (n_max + 1) + b``
with mode A first. Partial transposes always act on mode B.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import EmptyInput, InvalidParameter, NonHermitian, ZeroTrace

TOL_HERM = 1e-10
TOL_TRACE = 1e-10
TOL_NORM = 1e-10
DEP_TOL = 1e-12

MIN_CUTOFF = 2


@dataclass(frozen=True)
class FockCutoff:
    """Maximum photon number kept per mode."""

    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < MIN_CUTOFF:
            raise InvalidParameter(f"n_max must be an integer >= {MIN_CUTOFF}, got {self.n_max!r}")
        object.__setattr__(self, "n_max", int(self.n_max))

    @property
    def dim(self) -> int:
        """Single-mode dimension."""
        return self.n_max + 1

    @property
    def dim2(self) -> int:
        """Two-mode dimension."""
        return self.dim**2

    def index(self, a: int, b: int) -> int:
        return a * self.dim + b

    def labels(self) -> list[tuple[int, int]]:
        return [(a, b) for a in range(self.dim) for b in range(self.dim)]


def as_cutoff(cutoff: FockCutoff | int) -> FockCutoff:
    return cutoff if isinstance(cutoff, FockCutoff) else FockCutoff(cutoff)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SingleModeVector:
    coeffs: np.ndarray
    cutoff: FockCutoff

    def __post_init__(self):
        c = _frozen(np.asarray(self.coeffs, dtype=complex))
        if c.shape != (self.cutoff.dim,):
            raise InvalidParameter(f"expected {self.cutoff.dim} coefficients, got shape {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.coeffs, self.coeffs).real)

    def is_normalized(self, tol: float = TOL_NORM) -> bool:
        return abs(self.norm2 - 1.0) <= tol


@dataclass(frozen=True)
class TwoModeVector:
    coeffs: np.ndarray
    cutoff: FockCutoff

    def __post_init__(self):
        c = _frozen(np.asarray(self.coeffs, dtype=complex))
        if c.shape != (self.cutoff.dim2,):
            raise InvalidParameter(f"expected {self.cutoff.dim2} coefficients, got shape {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def basis(cls, a: int, b: int, cutoff: FockCutoff | int) -> "TwoModeVector":
        cutoff = as_cutoff(cutoff)
        c = np.zeros(cutoff.dim2, dtype=complex)
        c[cutoff.index(a, b)] = 1.0
        return cls(c, cutoff)

    @classmethod
    def product(cls, v1: SingleModeVector, v2: SingleModeVector) -> "TwoModeVector":
        return cls(np.kron(v1.coeffs, v2.coeffs), v1.cutoff)

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.coeffs, self.coeffs).real)

    def is_normalized(self, tol: float = TOL_NORM) -> bool:
        return abs(self.norm2 - 1.0) <= tol

    def amplitude(self, a: int, b: int) -> complex:
        return complex(self.coeffs[self.cutoff.index(a, b)])

    def as_grid(self) -> np.ndarray:
        """Coefficients reshaped to ``[a, b]``."""
        return self.coeffs.reshape(self.cutoff.dim, self.cutoff.dim)

    def projector(self) -> np.ndarray:
        return np.outer(self.coeffs, self.coeffs.conj())


@dataclass(frozen=True)
class TwoModeState:
    """Hermitian operator on the truncated two-mode space.

    ``tail_mass`` is the probability that was cut away by the truncation
    before the matrix was renormalized.
    """

    matrix: np.ndarray
    cutoff: FockCutoff
    tail_mass: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if not np.iscomplexobj(m):
            m = m.astype(complex)
        if m.shape != (self.cutoff.dim2, self.cutoff.dim2):
            raise InvalidParameter(f"matrix shape {m.shape} does not match cutoff {self.cutoff.n_max}")
        object.__setattr__(self, "matrix", _frozen(m))
        object.__setattr__(self, "tail_mass", float(self.tail_mass))

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def hermiticity_residual(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def is_hermitian(self, tol: float = TOL_HERM) -> bool:
        return self.hermiticity_residual() <= tol

    def as_tensor(self) -> np.ndarray:
        """View as ``[a, b, c, d]`` for ``<a,b| M |c,d>``."""
        d = self.cutoff.dim
        return self.matrix.reshape(d, d, d, d)

    def element(self, a: int, b: int, c: int, d: int) -> complex:
        return complex(self.matrix[self.cutoff.index(a, b), self.cutoff.index(c, d)])

    def with_matrix(self, matrix: np.ndarray) -> "TwoModeState":
        return TwoModeState(matrix, self.cutoff, self.tail_mass, dict(self.meta))


def check_hermitian(m: np.ndarray, tol: float = TOL_HERM) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonHermitian(f"expected a square matrix, got shape {m.shape}")
    resid = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if resid > tol:
        raise NonHermitian(f"hermiticity residual {resid:.3e} exceeds {tol:.1e}")
    return m


def hermitian_eigenvalues(m, tol: float = TOL_HERM) -> np.ndarray:
    """Full spectrum of a hermitian matrix in ascending order.

    Purely real input is solved in real arithmetic, which is both faster and
    bitwise reproducible for identical input.
    """
    m = check_hermitian(m, tol)
    if m.size == 0:
        return np.zeros(0)
    if np.iscomplexobj(m) and not np.any(m.imag):
        m = m.real
    # symmetrize so that the eigensolver sees exact hermitian data
    m = 0.5 * (m + m.conj().T)
    return np.linalg.eigvalsh(m)


def orthonormalize(
    vs: Sequence[TwoModeVector], dep_tol: float = DEP_TOL
) -> tuple[list[TwoModeVector], int]:
    """Modified Gram-Schmidt with one reorthogonalization pass.

    A vector is dropped as dependent when its norm after projection, relative
    to its norm before, falls below ``dep_tol``.
    """
    vs = list(vs)
    if not vs:
        raise EmptyInput("orthonormalize needs at least one vector")
    cutoff = vs[0].cutoff
    if any(v.cutoff != cutoff for v in vs):
        raise InvalidParameter("all vectors must share one cutoff")

    basis: list[np.ndarray] = []
    for v in vs:
        w = np.array(v.coeffs, dtype=complex)
        n0 = np.linalg.norm(w)
        if n0 == 0.0:
            continue
        for _ in range(2):
            for q in basis:
                w -= np.vdot(q, w) * q
        n1 = np.linalg.norm(w)
        if n1 / n0 < dep_tol:
            continue
        basis.append(w / n1)
    return [TwoModeVector(q, cutoff) for q in basis], len(basis)


def trace_and_renormalize(state: TwoModeState) -> TwoModeState:
    tr = np.trace(state.matrix).real
    if not tr > 0.0:
        raise ZeroTrace(f"cannot renormalize a state with trace {tr!r}")
    return state.with_matrix(state.matrix / tr)
