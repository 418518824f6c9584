"""Product vectors in the range of the mixture.

A separable state has a range spanned by product vectors. The search below
maximizes ``<v1 v2| P |v1 v2>`` over product vectors, with ``P`` the range
projector, by alternating exact maximizations. A best overlap visibly below
one is evidence (never proof) that no product vector lies in the range.

``symbolic_contradiction_check`` evaluates the low-order coefficient equations
that rule a product vector out analytically.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateAngle, InvalidParameter
from .fock import FockCutoff, SingleModeVector, TwoModeVector, orthonormalize
from .states import BS1_THETA, MixtureSpec, beam_split_number_state, build_omega_state

RANK_TOL = 1e-14
CONV_TOL = 1e-12
MAX_ITER = 500
DEFAULT_RESTARTS = 200
DEFAULT_SEED = 20110404

_THREE_EIGHTHS = 0.375


@dataclass(frozen=True)
class RangeSubspace:
    basis: list
    cutoff: FockCutoff
    projector: np.ndarray = field(repr=False)

    @property
    def rank(self) -> int:
        return len(self.basis)

    @classmethod
    def from_vectors(cls, vectors, dep_tol: float | None = None) -> "RangeSubspace":
        kwargs = {} if dep_tol is None else {"dep_tol": dep_tol}
        basis, _ = orthonormalize(vectors, **kwargs)
        q = np.stack([v.coeffs for v in basis], axis=1)
        return cls(basis, basis[0].cutoff, q @ q.conj().T)

    def basis_matrix(self) -> np.ndarray:
        """Columns are the orthonormal basis vectors."""
        return np.stack([v.coeffs for v in self.basis], axis=1)

    def idempotency_residual(self) -> float:
        p = self.projector
        return float(np.max(np.abs(p @ p - p)))


def build_range_subspace(spec: MixtureSpec, rank_tol: float = RANK_TOL) -> RangeSubspace:
    """Span of ``U(pi/4)|n,0>`` for every kept ``p_n`` plus ``|Omega>`` (when ``lam < 1``)."""
    cutoff = spec.cutoff
    vecs = []
    if spec.lam > 0:
        vecs += [
            beam_split_number_state(n, BS1_THETA, cutoff)
            for n in range(cutoff.dim)
            if spec.distribution.p(n) > rank_tol
        ]
    if spec.lam < 1:
        vecs.append(build_omega_state(spec.omega, spec.theta2, cutoff))
    return RangeSubspace.from_vectors(vecs)


@dataclass(frozen=True)
class RangeSearchResult:
    best_overlap: float
    best_v1: SingleModeVector
    best_v2: SingleModeVector
    restarts: int
    iterations_per_restart: list
    converged: bool
    overlaps_per_restart: list = field(default_factory=list, repr=False)
    traces: list = field(default_factory=list, repr=False)

    def summary(self) -> dict:
        return {
            "best_overlap": self.best_overlap,
            "gap": 1.0 - self.best_overlap,
            "restarts": self.restarts,
            "max_iterations": max(self.iterations_per_restart),
            "total_iterations": int(sum(self.iterations_per_restart)),
            "converged": self.converged,
        }


def _top_eigvec(h: np.ndarray) -> tuple[float, np.ndarray]:
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return float(w[-1]), v[:, -1]


def _random_unit(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def _ascend(qt: np.ndarray, v1: np.ndarray, v2: np.ndarray, max_iter: int, conv_tol: float):
    """Alternate exact maximizations; ``qt[k, a, b]`` is ``conj(q_k[a, b])``."""
    rank, dim, _ = qt.shape
    over_a = qt.transpose(1, 0, 2).reshape(dim, rank * dim)
    over_b = qt.transpose(2, 0, 1).reshape(dim, rank * dim)
    f = float(np.sum(np.abs((v1 @ over_a).reshape(rank, dim) @ v2) ** 2))
    trace = [f]
    converged = False
    for _ in range(max_iter):
        w = (v1 @ over_a).reshape(rank, dim)
        _, v2 = _top_eigvec(w.conj().T @ w)
        w = (v2 @ over_b).reshape(rank, dim)
        f_new, v1 = _top_eigvec(w.conj().T @ w)
        trace.append(f_new)
        done = abs(f_new - f) < conv_tol
        f = f_new
        if done:
            converged = True
            break
    return f, v1, v2, trace, converged


def max_workers() -> int:
    """Worker cap from ``CVBOUND_MAX_WORKERS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("CVBOUND_MAX_WORKERS", "1")))
    except ValueError:
        return 1


def product_vector_search(
    sub: RangeSubspace,
    restarts: int = DEFAULT_RESTARTS,
    max_iter: int = MAX_ITER,
    seed: int = DEFAULT_SEED,
    conv_tol: float = CONV_TOL,
    keep_traces: bool = False,
    workers: int | None = None,
) -> RangeSearchResult:
    """Multi-start alternating maximization of the product-vector overlap with the range."""
    if restarts < 1:
        raise InvalidParameter("restarts must be >= 1")
    dim = sub.cutoff.dim
    qt = sub.basis_matrix().T.conj().reshape(sub.rank, dim, dim)
    # per-restart generators fixed up front, so scheduling cannot change results
    seeds = np.random.SeedSequence(seed).spawn(restarts)

    def run(ss):
        rng = np.random.default_rng(ss)
        return _ascend(qt, _random_unit(rng, dim), _random_unit(rng, dim), max_iter, conv_tol)

    workers = max_workers() if workers is None else workers
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            runs = list(pool.map(run, seeds))
    else:
        runs = [run(ss) for ss in seeds]

    best = max(range(restarts), key=lambda i: runs[i][0])
    f, v1, v2, _, _ = runs[best]
    cutoff = sub.cutoff
    return RangeSearchResult(
        best_overlap=float(f),
        best_v1=SingleModeVector(v1, cutoff),
        best_v2=SingleModeVector(v2, cutoff),
        restarts=restarts,
        iterations_per_restart=[len(r[3]) - 1 for r in runs],
        converged=all(r[4] for r in runs),
        overlaps_per_restart=[float(r[0]) for r in runs],
        traces=[r[3] for r in runs] if keep_traces else [],
    )


# ----------------------------------------------------------------------------
# analytic check


@dataclass(frozen=True)
class ContradictionReport:
    """Two competing expressions for the same product ``alpha_1 beta_3``.

    ``alpha_1_beta_3`` and ``alpha_3_beta_1`` follow the written low-order
    expansion (coefficient ``3/8`` and ``2 m_4``); ``difference`` is their gap.
    ``exact_difference`` is the same gap computed from the actual amplitudes of
    ``|Omega>`` on ``|1,3>`` and ``|3,1>``, normalized so that ``m_0 = 1``.
    """

    theta: float
    omega: complex
    m0: complex
    m1: complex
    m3: complex
    m4: complex
    alpha_1_beta_3: complex
    alpha_3_beta_1: complex
    difference: complex
    exact_difference: complex

    @property
    def magnitude(self) -> float:
        return abs(self.difference)

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "omega": [self.omega.real, self.omega.imag],
            "difference": abs(self.difference),
            "exact_difference": abs(self.exact_difference),
            "nonzero": self.magnitude > 0.0,
        }


def contradiction_magnitude(theta: float, omega: complex, m0: complex = 1.0) -> complex:
    """Closed form ``m0 w^2 (3/8) cos sin (sin^2 - cos^2)``."""
    c, s = math.cos(theta), math.sin(theta)
    return m0 * omega**2 * _THREE_EIGHTHS * c * s * (s * s - c * c)


def symbolic_contradiction_check(spec: MixtureSpec, order: int = 4) -> ContradictionReport:
    """Solve the low-order coefficient equations of ``sum m_k |.> = |v1>|v2>``.

    With ``alpha_0 = beta_0 = 1`` the vacuum term fixes ``m_0 = 1``; the odd
    photon-number terms only receive contributions from swap-symmetric
    ``U(pi/4)|k,0>`` and give ``m_1 = alpha_1 = beta_1``, ``m_3 = alpha_3 =
    beta_3``. Then ``alpha_1 beta_3 = alpha_3 beta_1`` must hold, while the
    ``|1,3>`` and ``|3,1>`` coefficients force them to differ unless
    ``theta = pi/4``.
    """
    if order < 4:
        raise InvalidParameter("order must be >= 4 to reach the |1,3> and |3,1> terms")
    theta, omega = spec.theta2, spec.omega
    if math.isclose(theta, BS1_THETA, rel_tol=0.0, abs_tol=1e-15):
        raise DegenerateAngle("theta = pi/4 makes both expressions coincide")
    if spec.n_max < order:
        raise InvalidParameter(f"n_max={spec.n_max} is below the requested order {order}")

    m0 = 1.0 + 0j
    # alpha_1 = beta_1 and alpha_3 = beta_3 are free; the value of m4 cancels in
    # the difference, so any choice exhibits the contradiction.
    m1, m3, m4 = 1.0 + 0j, 1.0 + 0j, 0.0 + 0j
    c, s = math.cos(theta), math.sin(theta)
    a1b3 = m0 * omega**2 * _THREE_EIGHTHS * c * s**3 + 2.0 * m4
    a3b1 = m0 * omega**2 * _THREE_EIGHTHS * c**3 * s + 2.0 * m4

    cutoff = FockCutoff(spec.n_max)
    om = build_omega_state(omega, theta, cutoff)
    vac = om.amplitude(0, 0)
    exact = (om.amplitude(1, 3) - om.amplitude(3, 1)) / vac
    return ContradictionReport(theta, omega, m0, m1, m3, m4, a1b3, a3b1, a1b3 - a3b1, exact)
