"""Hankel matrices of photocount probabilities and their Hadamard partners.

Each partial-transpose block of a beam-split diagonal state factors as
``M_i = A_i o B_i`` (entrywise product) with ``A_i[r, c] = p_{i+r+c}`` and
``B_i[r, c] = c^{(i+r+c)}_{i+r, r}``, where

    c^{(n)}_{k,k'} = 2^{-n} sqrt(C(n, k) C(n, k')).

``B_j`` further splits into six factors built from factorials and powers of
two; the factorial Hankel matrix ``C_j`` is checked exactly in integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import CutoffExceeded, FactorOverflow, InvalidParameter
from .fock import hermitian_eigenvalues
from .states import PhotonDistribution

PSD_REL_TOL = 1e-10
MINOR_ABS_TOL = 1e-12
EXACT_FACTORIAL_LIMIT = 20
FLOAT_FACTORIAL_LIMIT = 170
MAX_DEFAULT_ORDER = 20


def default_order(n_max: int) -> int:
    return max(1, min(n_max // 2, MAX_DEFAULT_ORDER))


def hankel_a(d: PhotonDistribution, i: int, order: int) -> np.ndarray:
    """``A_i[r, c] = p_{|i|+r+c}``; probabilities beyond the cutoff read as zero."""
    i = abs(int(i))
    if order < 1:
        raise InvalidParameter("order must be >= 1")
    if i + order - 1 > d.n_max:
        raise CutoffExceeded(f"A_{i} of order {order} needs photon numbers up to {i + order - 1} > {d.n_max}")
    p = np.array([d.p(i + s) for s in range(2 * order - 1)])
    r = np.arange(order)
    return p[r[:, None] + r[None, :]]


def coupling_coefficient(n: int, k: int, kp: int) -> float:
    """``c^{(n)}_{k,k'} = 2^{-n} sqrt(C(n,k) C(n,k'))`` in log space."""
    if not (0 <= k <= n and 0 <= kp <= n):
        return 0.0
    lg = (
        2 * math.lgamma(n + 1)
        - math.lgamma(k + 1)
        - math.lgamma(n - k + 1)
        - math.lgamma(kp + 1)
        - math.lgamma(n - kp + 1)
    )
    return math.exp(0.5 * lg - n * math.log(2.0))


def hankel_b_direct(j: int, order: int) -> np.ndarray:
    """``B_j[r, c] = c^{(j+r+c)}_{j+r, r}`` straight from the binomial formula."""
    j = abs(int(j))
    out = np.empty((order, order))
    for r in range(order):
        for c in range(order):
            out[r, c] = coupling_coefficient(j + r + c, j + r, r)
    return out


# ----------------------------------------------------------------------------
# Sylvester / PSD test


@dataclass(frozen=True)
class SylvesterResult:
    psd: bool
    min_eigenvalue: float
    tolerance: float
    leading_minors: tuple
    first_failing_order: int | None

    @property
    def verdict(self) -> str:
        return "PSD" if self.psd else "NotPSD"


def leading_minors(m: np.ndarray) -> list[float]:
    return [float(np.linalg.det(m[:k, :k])) for k in range(1, m.shape[0] + 1)]


def sylvester_psd_test(m: np.ndarray, rel_tol: float = PSD_REL_TOL) -> SylvesterResult:
    """Eigenvalue verdict plus leading-minor diagnostics.

    The eigenvalue test is authoritative. ``first_failing_order`` is the first
    leading minor that is negative beyond rounding, which is enough to rule out
    positive semidefiniteness; zero minors are not flagged.
    """
    m = np.asarray(m, dtype=float)
    ev = hermitian_eigenvalues(m)
    scale = float(np.max(np.abs(np.diag(m)))) if m.size else 0.0
    tol = rel_tol * max(scale, float(np.max(np.abs(m))) if m.size else 0.0)
    minors = leading_minors(m)
    failing = None
    for k, det in enumerate(minors, start=1):
        # rounding in a k x k minor scales like tol * s^(k-1)
        if det < -max(MINOR_ABS_TOL, tol) * max(scale, 1e-300) ** (k - 1):
            failing = k
            break
    return SylvesterResult(bool(ev[0] >= -tol), float(ev[0]), tol, tuple(minors), failing)


@dataclass(frozen=True)
class HankelPPTResult:
    """Outcome of the Hankel sufficient test for the beam-split output."""

    order: int
    hankel: SylvesterResult

    @property
    def ppt(self) -> bool:
        """True when ``A_0`` is PSD, which suffices for PPT; False says nothing."""
        return self.hankel.psd

    @property
    def verdict(self) -> str:
        return "PPT" if self.hankel.psd else "NotPSD"


def hankel_ppt_test(d: PhotonDistribution, order: int | None = None) -> HankelPPTResult:
    order = default_order(d.n_max) if order is None else order
    if 2 * (order - 1) > d.n_max:
        raise CutoffExceeded(f"order {order} needs p up to {2 * order - 2} > n_max={d.n_max}")
    return HankelPPTResult(order, sylvester_psd_test(hankel_a(d, 0, order)))


proposition1_ppt_test = hankel_ppt_test


# ----------------------------------------------------------------------------
# Hadamard factors of B_j


@dataclass(frozen=True)
class HadamardFactors:
    j: int
    order: int
    c: np.ndarray
    d: np.ndarray
    e: np.ndarray
    f: np.ndarray
    c_exact: list
    c_float_exact: bool

    def product(self) -> np.ndarray:
        return self.c * self.d * self.e * self.e.T * self.f * self.f.T


def factorial_hankel(j: int, order: int) -> list[list[int]]:
    """``C_j[r][c] = (j+r+c)!`` as Python integers."""
    facts = [math.factorial(j + s) for s in range(2 * order - 1)]
    return [[facts[r + c] for c in range(order)] for r in range(order)]


def hadamard_factors(j: int, order: int) -> HadamardFactors:
    """``C_j, D_j, E_j, F_j`` with ``B_j = C o D o E o E^T o F o F^T``.

    ``C`` is also kept exactly; the float copy is exact only while every
    factorial is at most ``20!`` and is flagged otherwise.
    """
    j = abs(int(j))
    top = j + 2 * order - 2
    if top > FLOAT_FACTORIAL_LIMIT:
        raise FactorOverflow(f"({top})! does not fit in double precision")
    c_exact = factorial_hankel(j, order)
    c = np.array([[float(x) for x in row] for row in c_exact])
    r = np.arange(order)
    s = j + r[:, None] + r[None, :]
    d = np.power(0.5, s.astype(float))
    lg = np.vectorize(math.lgamma)
    e = np.repeat(np.exp(-0.5 * lg(r + 1.0))[:, None], order, axis=1)
    f = np.repeat(np.exp(-0.5 * lg(j + r + 1.0))[:, None], order, axis=1)
    return HadamardFactors(j, order, c, d, e, f, c_exact, top <= EXACT_FACTORIAL_LIMIT)


def reconstruct_b(j: int, order: int) -> np.ndarray:
    return hadamard_factors(j, order).product()


def reconstruct_block_from_hankel(d: PhotonDistribution, i: int, order: int) -> np.ndarray:
    """``A_i o B_i``, the leading ``order x order`` corner of block ``M_i``."""
    return hankel_a(d, i, order) * hankel_b_direct(i, order)


# ----------------------------------------------------------------------------
# exact integer minors


def bareiss_determinant(m: list[list[int]]) -> int:
    """Fraction-free Gaussian elimination on integers."""
    a = [list(map(int, row)) for row in m]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if a[r][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for jj in range(k + 1, n):
                a[i][jj] = (a[i][jj] * a[k][k] - a[i][k] * a[k][jj]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def exact_leading_minors(m: list[list[int]]) -> list[int]:
    return [bareiss_determinant([row[:k] for row in m[:k]]) for k in range(1, len(m) + 1)]


def factorial_square_product(k: int) -> int:
    """``prod_{i=0}^{k} (i!)^2``."""
    out = 1
    for i in range(k + 1):
        out *= math.factorial(i) ** 2
    return out


def rational_min_pivot(m: list[list[int]]) -> Fraction:
    """Smallest LDL^T pivot in exact arithmetic; positive iff the matrix is PD."""
    minors = exact_leading_minors(m)
    pivots = [Fraction(minors[0])] + [Fraction(minors[k], minors[k - 1]) for k in range(1, len(minors)) if minors[k - 1]]
    return min(pivots)


def b_min_eigenvalue(j: int, order: int, dps: int = 60) -> float:
    """Smallest eigenvalue of ``B_j`` in extended precision.

    ``B_j`` is a positive diagonal congruence of the factorial Hankel matrix,
    so its conditioning grows like that of ``C_j``; beyond order ~12 the
    smallest eigenvalue drops under double-precision rounding of the largest.
    """
    import mpmath

    j = abs(int(j))
    with mpmath.workdps(dps):
        m = mpmath.matrix(order, order)
        for r in range(order):
            for c in range(order):
                n = j + r + c
                m[r, c] = (
                    mpmath.factorial(n)
                    / mpmath.mpf(2) ** n
                    / mpmath.sqrt(
                        mpmath.factorial(r) * mpmath.factorial(c) * mpmath.factorial(j + r) * mpmath.factorial(j + c)
                    )
                )
        ev = mpmath.eigsy(m, eigvals_only=True)
        return float(min(ev))
