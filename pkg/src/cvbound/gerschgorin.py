"""Gerschgorin discs, diagonally scaled discs, and the small-squeezing audit.

For a diagonal scaling ``D = diag(d)`` every eigenvalue of ``M`` lies in the
union of the discs centred at ``m_ii`` with radius
``(1/d_i) * sum_{j != i} d_j |m_ij|``. If some positive ``d`` pushes every
disc into ``[0, inf)`` the matrix is positive semidefinite; that is the
certificate searched for below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter, InvalidScaling
from .fock import FockCutoff, TwoModeState, check_hermitian
from .states import (
    BS1_THETA,
    MixtureSpec,
    PhotonDistribution,
    beam_split_diagonal_state,
    beam_split_number_state,
    build_mixture,
)
from .transpose import block_basis, block_decompose, partial_transpose_B

CERT_ROUNDS = 100
CERT_EPS = 1e-12
SAFETY_EXPONENT = 1


@dataclass(frozen=True)
class GerschgorinReport:
    discs: list
    scaled: list | None = None

    @property
    def min_disc_edge(self) -> float:
        return min(c - r for c, r in self.discs)

    @property
    def scaled_min_edge(self) -> float | None:
        if self.scaled is None:
            return None
        return min(c - r for c, r in self.scaled)

    def contains(self, z: complex, scaled: bool = False, slack: float = 0.0) -> bool:
        discs = self.scaled if scaled else self.discs
        return any(abs(z - c) <= r + slack for c, r in discs)


def _radii(absm: np.ndarray, d: np.ndarray) -> np.ndarray:
    off = absm @ d - np.diag(absm) * d
    return off / d


def gerschgorin_discs(m, scaling=None) -> GerschgorinReport:
    """Row discs of ``m``; with ``scaling``, also the discs of ``D^-1 M D``."""
    m = np.asarray(m)
    absm = np.abs(m)
    centers = np.real(np.diag(m)) if np.allclose(np.imag(np.diag(m)), 0) else np.diag(m)
    ones = np.ones(m.shape[0])
    discs = list(zip(centers.tolist(), _radii(absm, ones).tolist()))
    scaled = None
    if scaling is not None:
        d = np.asarray(scaling, dtype=float)
        if d.shape != ones.shape or np.any(~(d > 0)) or not np.all(np.isfinite(d)):
            raise InvalidScaling("scaling entries must be finite and strictly positive")
        scaled = list(zip(centers.tolist(), _radii(absm, d).tolist()))
    return GerschgorinReport(discs, scaled)


def _scaled_edges(absm: np.ndarray, diag: np.ndarray, d: np.ndarray) -> np.ndarray:
    return diag - _radii(absm, d)


def scaled_positivity_search(m, rounds: int = CERT_ROUNDS, eps: float = CERT_EPS) -> np.ndarray | None:
    """Look for a positive scaling with every scaled disc inside ``[0, inf)``.

    First ``rounds`` steps of ``d <- J d`` with ``J = diag(m)^-1 |offdiag(m)|``
    starting from ``d = diag(m) + eps`` (the Perron vector of ``J`` works
    whenever any scaling does); then one solve of the comparison system
    ``H d = 1``. Returns ``None`` on failure, which says nothing about
    negativity.
    """
    m = check_hermitian(np.asarray(m))
    absm = np.abs(m)
    diag = np.real(np.diag(m)).copy()
    n = diag.size
    if n == 0:
        return np.ones(0)
    if np.any(diag < 0):
        return None
    off = absm - np.diag(np.diag(absm))

    def ok(d):
        return bool(np.all(np.isfinite(d)) and np.all(d > 0) and np.all(_scaled_edges(absm, diag, d) >= 0))

    d = diag + eps
    if ok(d):
        return d
    safe = np.where(diag > 0, diag, 1.0)
    for _ in range(rounds):
        nd = (off @ d) / safe
        nd = np.where(diag > 0, nd, d)
        nd = nd + eps * nd.max() if nd.max() > 0 else nd + eps
        nd /= nd.max()
        d = nd
        if ok(d):
            return d
    # comparison matrix: diag(m) - |offdiag(m)|
    h = np.diag(diag) - off
    try:
        d = np.linalg.solve(h, np.ones(n))
    except np.linalg.LinAlgError:
        return None
    return d if ok(d) else None


# ----------------------------------------------------------------------------
# squeezing bound


@dataclass(frozen=True)
class OmegaBound:
    """Order-of-magnitude bound on ``|omega|``.

    The rule takes the smallest of the comparison values, drops to the decade
    below it and then ``safety_exponent`` further decades. It is a heuristic:
    the eigenvalue check remains the verdict.
    """

    bound: float
    floor_terms: dict
    safety_exponent: int = SAFETY_EXPONENT
    heuristic: bool = True

    def to_dict(self) -> dict:
        return {
            "bound": self.bound,
            "floor_terms": dict(self.floor_terms),
            "safety_exponent": self.safety_exponent,
            "heuristic": self.heuristic,
        }


def omega_upper_bound(d: PhotonDistribution, lam: float = 0.5, safety_exponent: int = SAFETY_EXPONENT) -> OmegaBound:
    """Bound from ``|omega| << p_2/4 < p_1/2 < sqrt(1 - |omega|^2)``.

    For unequal mixing the diagonal entries scale with ``lam`` and the
    perturbation with ``1 - lam``, so the comparison values are multiplied by
    ``lam / (1 - lam)`` (a no-op for the balanced mixture).
    """
    lam = float(lam)
    if not 0.0 < lam < 1.0:
        raise InvalidParameter(f"lambda must lie in (0, 1), got {lam!r}")
    p1, p2 = d.p(1), d.p(2)
    if not (p1 > 0 and p2 > 0):
        raise InvalidParameter("the bound needs p_1 > 0 and p_2 > 0")
    ratio = lam / (1.0 - lam)
    terms = {"p2_over_4": ratio * p2 / 4.0, "p1_over_2": ratio * p1 / 2.0}
    floor = min(terms.values())
    bound = 10.0 ** (math.floor(math.log10(floor)) - safety_exponent)
    terms["vacuum_weight"] = math.sqrt(1.0 - bound**2)
    return OmegaBound(bound, terms, safety_exponent)


# ----------------------------------------------------------------------------
# first-order perturbation audit


def _pt(m: np.ndarray, cutoff: FockCutoff) -> np.ndarray:
    return partial_transpose_B(TwoModeState(m, cutoff)).matrix


def first_row_label(delta: int) -> tuple[int, int]:
    return (delta, 0) if delta >= 0 else (0, -delta)


@dataclass(frozen=True)
class FirstOrderModel:
    """``rho'^T_B ~ (direct sum of M'_i) + P`` to first order in ``omega``.

    ``unperturbed`` is ``lam * rho^T_B + (1-lam) sqrt(1-|w|^2) |00><00|`` and
    ``perturbation`` is ``(1-lam) sqrt(1-|w|^2) (w/sqrt2) (|phi_2><00|)^T_B + h.c.``.
    """

    cutoff: FockCutoff
    lam: float
    omega: complex
    theta: float
    unperturbed: np.ndarray = field(repr=False)
    perturbation: np.ndarray = field(repr=False)

    @property
    def model(self) -> np.ndarray:
        return self.unperturbed + self.perturbation

    def perturbed_row_labels(self, tol: float = 0.0) -> list[tuple[int, int]]:
        rows = np.nonzero(np.any(np.abs(self.perturbation) > tol, axis=1))[0]
        return [divmod(int(r), self.cutoff.dim) for r in rows]


def first_order_model(
    lam: float, d: PhotonDistribution, omega: complex, theta: float, n_max: int
) -> FirstOrderModel:
    """Accepts ``omega = 0``, where the perturbation vanishes identically."""
    cutoff = FockCutoff(n_max)
    omega = complex(omega)
    rho = beam_split_diagonal_state(d, BS1_THETA, cutoff)
    vac = np.zeros(cutoff.dim2, dtype=complex)
    vac[0] = 1.0
    vacuum_weight = math.sqrt(1.0 - abs(omega) ** 2)
    unperturbed = lam * _pt(rho.matrix, cutoff) + (1.0 - lam) * vacuum_weight * np.outer(vac, vac)
    phi2 = beam_split_number_state(2, theta, cutoff).coeffs
    half = _pt(np.outer(phi2, vac), cutoff) * (omega / math.sqrt(2.0))
    pert = (1.0 - lam) * vacuum_weight * (half + half.conj().T)
    return FirstOrderModel(cutoff, lam, omega, theta, unperturbed, pert)


@dataclass(frozen=True)
class DiscSlack:
    """First-row disc of block ``delta`` before and after the perturbation."""

    delta: int
    center: float
    unperturbed_radius: float
    perturbation_exact: float
    perturbation_overestimate: float

    @property
    def edge_exact(self) -> float:
        return self.center - self.unperturbed_radius - self.perturbation_exact

    @property
    def edge_overestimate(self) -> float:
        return self.center - self.unperturbed_radius - self.perturbation_overestimate

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "center": self.center,
            "R": self.unperturbed_radius,
            "perturbation_exact": self.perturbation_exact,
            "perturbation_overestimate": self.perturbation_overestimate,
            "edge_exact": self.edge_exact,
            "edge_overestimate": self.edge_overestimate,
        }


@dataclass(frozen=True)
class PerturbationAudit:
    model: FirstOrderModel = field(repr=False)
    perturbed_rows: dict
    remainder_norm: float
    slacks: list
    sector_certificates: dict

    @property
    def certificate_found(self) -> bool:
        return all(v is not None for v in self.sector_certificates.values())

    def to_dict(self) -> dict:
        return {
            "perturbed_rows": {
                str(k): {f"{a},{b}": [v.real, v.imag] for (a, b), v in row.items()}
                for k, row in self.perturbed_rows.items()
            },
            "remainder_norm": self.remainder_norm,
            "slacks": [s.to_dict() for s in self.slacks],
            "certificate_found": self.certificate_found,
            "sector_certificates": {str(k): v is not None for k, v in self.sector_certificates.items()},
        }


def _slack(fom: FirstOrderModel, delta: int) -> DiscSlack:
    cutoff = fom.cutoff
    row = cutoff.index(*first_row_label(delta))
    block = [cutoff.index(a, b) for a, b in block_basis(delta, cutoff)]
    u = fom.unperturbed
    center = float(u[row, row].real)
    radius = float(sum(abs(u[row, j]) for j in block if j != row))
    pert = float(np.sum(np.abs(fom.perturbation[row])))
    over = (1.0 - fom.lam) * abs(fom.omega) * (2.0 if delta == 0 else 1.0)
    return DiscSlack(delta, center, radius, pert, over)


def perturbation_audit(
    spec: MixtureSpec, pt_matrix: np.ndarray | None = None, certify: bool = True
) -> PerturbationAudit:
    """Split ``rho'^T_B`` into first-order model plus remainder and tabulate disc slacks.

    ``pt_matrix`` may pass in an already computed ``rho'^T_B``. With
    ``certify`` the scaled-disc certificate is also sought on both parity
    sectors of the exact partial transpose.
    """
    fom = first_order_model(spec.lam, spec.distribution, spec.omega, spec.theta2, spec.n_max)
    cutoff = fom.cutoff
    if pt_matrix is None:
        pt_matrix = partial_transpose_B(build_mixture(spec)).matrix
    remainder = float(np.max(np.abs(pt_matrix - fom.model)))

    rows = {}
    for delta in (0, 1, -1, 2, -2):
        r = cutoff.index(*first_row_label(delta))
        nz = np.nonzero(fom.perturbation[r])[0]
        rows[delta] = {divmod(int(j), cutoff.dim): complex(fom.perturbation[r, j]) for j in nz}
    slacks = [_slack(fom, delta) for delta in (0, 1, -1, 2, -2)]

    certs = {}
    if certify:
        dec = block_decompose(TwoModeState(pt_matrix, cutoff), grouping="parity")
        certs = {k: scaled_positivity_search(b) for k, b in dec.blocks.items()}
    return PerturbationAudit(fom, rows, remainder, slacks, certs)
