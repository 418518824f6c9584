"""Photon-number distributions and the two-mode states built from them.

Everything here is of the form (diagonal single-mode state) x vacuum sent
through a beam splitter, so the beam-splitter action is evaluated through the
closed-form binomial expansion of ``U(theta)|n, 0>`` and never as a matrix
exponential on the truncated space.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CutoffExceeded, FilterOverflow, InvalidParameter
from .fock import (
    FockCutoff,
    SingleModeVector,
    TwoModeState,
    TwoModeVector,
    as_cutoff,
    trace_and_renormalize,
)

BS1_THETA = math.pi / 4
DEFAULT_THETA2 = math.pi / 8


class Variant(str, enum.Enum):
    PLAIN_THERMAL = "plain_thermal"
    PHOTON_ADDED = "photon_added"
    SHIFTED_THERMAL = "shifted_thermal"
    CUSTOM = "custom"


@dataclass(frozen=True)
class PhotonDistribution:
    """Renormalized photon-number probabilities ``p_0 .. p_{n_max}``.

    ``tail_mass`` is the weight beyond ``n_max`` that was discarded before
    renormalization; ``raw`` keeps the un-renormalized truncated weights.
    """

    probs: np.ndarray
    variant: Variant = Variant.CUSTOM
    nbar: float | None = None
    tail_mass: float = 0.0

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise InvalidParameter("probs must be a nonempty 1-D sequence")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise InvalidParameter("probabilities must be finite and nonnegative")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "variant", Variant(self.variant))

    @property
    def n_max(self) -> int:
        return self.probs.size - 1

    def p(self, n: int) -> float:
        """``p_n``, zero beyond the stored range."""
        return float(self.probs[n]) if 0 <= n <= self.n_max else 0.0

    @classmethod
    def from_probs(cls, probs: Sequence[float]) -> "PhotonDistribution":
        p = np.asarray(probs, dtype=float)
        total = p.sum()
        if not total > 0:
            raise InvalidParameter("distribution has no weight")
        return cls(p / total, Variant.CUSTOM, None, 0.0)


def _check_nbar(nbar: float) -> float:
    nbar = float(nbar)
    if not (nbar > 0 and math.isfinite(nbar)):
        raise InvalidParameter(f"nbar must be finite and > 0, got {nbar!r}")
    return nbar


def _finish(raw: np.ndarray, variant: Variant, nbar: float, tail: float) -> PhotonDistribution:
    return PhotonDistribution(raw / raw.sum(), variant, nbar, tail)


def thermal_distribution(nbar: float, cutoff: FockCutoff | int) -> PhotonDistribution:
    nbar = _check_nbar(nbar)
    cutoff = as_cutoff(cutoff)
    x = nbar / (nbar + 1.0)
    n = np.arange(cutoff.dim)
    raw = x**n / (nbar + 1.0)
    return _finish(raw, Variant.PLAIN_THERMAL, nbar, x ** (cutoff.n_max + 1))


def shifted_thermal_distribution(nbar: float, cutoff: FockCutoff | int) -> PhotonDistribution:
    """Thermal weights moved up by one photon, so ``p_0 = 0``."""
    nbar = _check_nbar(nbar)
    cutoff = as_cutoff(cutoff)
    x = nbar / (nbar + 1.0)
    raw = np.zeros(cutoff.dim)
    raw[1:] = x ** np.arange(cutoff.n_max) / (nbar + 1.0)
    return _finish(raw, Variant.SHIFTED_THERMAL, nbar, x**cutoff.n_max)


def photon_added_thermal_distribution(nbar: float, cutoff: FockCutoff | int) -> PhotonDistribution:
    """First-order heralded photon addition: ``p'_{n+1} = (n+1) p_n / (nbar+1)``."""
    nbar = _check_nbar(nbar)
    cutoff = as_cutoff(cutoff)
    x = nbar / (nbar + 1.0)
    n = np.arange(cutoff.n_max)
    thermal = x**n / (nbar + 1.0)
    raw = np.zeros(cutoff.dim)
    raw[1:] = (n + 1) * thermal / (nbar + 1.0)
    N = cutoff.n_max
    # sum_{m>N} m x^{m-1} (1-x)^2
    tail = (N + 1) * x**N - N * x ** (N + 1)
    return _finish(raw, Variant.PHOTON_ADDED, nbar, tail)


def distribution_for(variant: str | Variant, nbar: float, cutoff: FockCutoff | int) -> PhotonDistribution:
    variant = Variant(variant)
    builders = {
        Variant.PLAIN_THERMAL: thermal_distribution,
        Variant.SHIFTED_THERMAL: shifted_thermal_distribution,
        Variant.PHOTON_ADDED: photon_added_thermal_distribution,
    }
    if variant not in builders:
        raise InvalidParameter(f"no builder for variant {variant.value!r}")
    return builders[variant](nbar, cutoff)


# ----------------------------------------------------------------------------
# beam splitter


def binomial_sqrt(n: int, k: np.ndarray | int) -> np.ndarray:
    """``sqrt(C(n, k))`` evaluated through log-gamma differences."""
    k = np.asarray(k)
    lg = math.lgamma(n + 1) - np.vectorize(math.lgamma)(k + 1.0) - np.vectorize(math.lgamma)(n - k + 1.0)
    return np.exp(0.5 * lg)


def beam_split_number_state(n: int, theta: float, cutoff: FockCutoff | int) -> TwoModeVector:
    """``U(theta)|n, 0> = sum_l sqrt(C(n,l)) cos^l sin^(n-l) |l, n-l>``."""
    cutoff = as_cutoff(cutoff)
    if int(n) != n or n < 0:
        raise InvalidParameter(f"photon number must be a nonnegative integer, got {n!r}")
    n = int(n)
    if n > cutoff.n_max:
        raise CutoffExceeded(f"n={n} exceeds n_max={cutoff.n_max}")
    c, s = math.cos(theta), math.sin(theta)
    l = np.arange(n + 1)
    amps = binomial_sqrt(n, l) * np.power(c, l) * np.power(s, n - l)
    out = np.zeros(cutoff.dim2, dtype=complex)
    out[l * cutoff.dim + (n - l)] = amps
    return TwoModeVector(out, cutoff)


def beam_split_modes(theta: float, cutoff: FockCutoff | int) -> np.ndarray:
    """Columns are ``U(theta)|n,0>`` for ``n = 0..n_max``."""
    cutoff = as_cutoff(cutoff)
    return np.stack(
        [beam_split_number_state(n, theta, cutoff).coeffs for n in range(cutoff.dim)], axis=1
    )


def beam_split_diagonal_state(
    d: PhotonDistribution, theta: float = BS1_THETA, cutoff: FockCutoff | int | None = None
) -> TwoModeState:
    """``U (sum_n p_n |n><n| x |0><0|) U^dag`` on the truncated space."""
    cutoff = as_cutoff(d.n_max if cutoff is None else cutoff)
    if d.n_max > cutoff.n_max and np.any(d.probs[cutoff.dim :] > 0):
        raise CutoffExceeded(f"distribution carries weight above n_max={cutoff.n_max}")
    p = np.zeros(cutoff.dim)
    m = min(cutoff.dim, d.probs.size)
    p[:m] = d.probs[:m]
    modes = beam_split_modes(theta, cutoff)
    rho = (modes * p) @ modes.conj().T
    state = TwoModeState(rho, cutoff, d.tail_mass, {"theta": theta, "variant": d.variant.value})
    return trace_and_renormalize(state)


# ----------------------------------------------------------------------------
# squeezed vacuum and the BS-2 output


def check_omega(omega: complex) -> complex:
    omega = complex(omega)
    if not 0.0 < abs(omega) < 1.0:
        raise InvalidParameter(f"squeezing parameter must satisfy 0 < |omega| < 1, got {omega!r}")
    return omega


def check_bs2_angle(theta: float) -> float:
    theta = float(theta)
    if not 0.0 < theta < BS1_THETA:
        raise InvalidParameter(f"BS-2 angle must lie strictly inside (0, pi/4), got {theta!r}")
    return theta


def squeezed_vacuum_coefficients(omega: complex, cutoff: FockCutoff | int) -> SingleModeVector:
    """Amplitudes of the single-mode squeezed vacuum on ``|2k>``.

    ``c_0 = (1-|w|^2)^(1/4)`` and ``c_{k+1}/c_k = w sqrt((2k+1)(2k+2)) / (2(k+1))``.
    The truncated vector is returned as-is (not renormalized).
    """
    omega = check_omega(omega)
    cutoff = as_cutoff(cutoff)
    coeffs = np.zeros(cutoff.dim, dtype=complex)
    c = (1.0 - abs(omega) ** 2) ** 0.25 + 0j
    for k in range(cutoff.n_max // 2 + 1):
        coeffs[2 * k] = c
        c = c * omega * math.sqrt((2 * k + 1) * (2 * k + 2)) / (2 * (k + 1))
    return SingleModeVector(coeffs, cutoff)


def build_omega_state(
    omega: complex, theta2: float = DEFAULT_THETA2, cutoff: FockCutoff | int = 40
) -> TwoModeVector:
    """Squeezed vacuum sent through the unbalanced splitter BS-2."""
    theta2 = check_bs2_angle(theta2)
    cutoff = as_cutoff(cutoff)
    sq = squeezed_vacuum_coefficients(omega, cutoff).coeffs
    out = np.zeros(cutoff.dim2, dtype=complex)
    for k in range(cutoff.n_max // 2 + 1):
        out += sq[2 * k] * beam_split_number_state(2 * k, theta2, cutoff).coeffs
    return TwoModeVector(out, cutoff)


# ----------------------------------------------------------------------------
# the mixture


@dataclass(frozen=True)
class MixtureSpec:
    """Parameters of ``lam * rho + (1 - lam) |Omega><Omega|``."""

    lam: float
    distribution: PhotonDistribution
    omega: complex
    theta2: float = DEFAULT_THETA2
    n_max: int = 40

    def __post_init__(self):
        lam = float(self.lam)
        if not 0.0 <= lam <= 1.0:
            raise InvalidParameter(f"lambda must lie in [0, 1], got {lam!r}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "omega", check_omega(self.omega))
        object.__setattr__(self, "theta2", check_bs2_angle(self.theta2))
        object.__setattr__(self, "n_max", FockCutoff(self.n_max).n_max)
        if self.distribution.n_max != self.n_max:
            raise InvalidParameter(
                f"distribution cutoff {self.distribution.n_max} differs from n_max={self.n_max}"
            )

    @property
    def cutoff(self) -> FockCutoff:
        return FockCutoff(self.n_max)

    @classmethod
    def build(
        cls,
        lam: float = 0.5,
        nbar: float = 1.0,
        omega: complex = 1e-3,
        theta2: float = DEFAULT_THETA2,
        n_max: int = 40,
        variant: str | Variant = Variant.SHIFTED_THERMAL,
    ) -> "MixtureSpec":
        """Convenience constructor; defaults are the balanced worked example."""
        return cls(lam, distribution_for(variant, nbar, n_max), omega, theta2, n_max)

    def replace(self, **changes) -> "MixtureSpec":
        """Copy with new scalar parameters; ``nbar``/``variant``/``n_max`` rebuild the distribution."""
        d = self.distribution
        nbar = changes.pop("nbar", d.nbar)
        variant = changes.pop("variant", d.variant)
        n_max = changes.pop("n_max", self.n_max)
        if nbar != d.nbar or Variant(variant) != d.variant or n_max != self.n_max:
            d = distribution_for(variant, nbar, n_max)
        params = dict(lam=self.lam, omega=self.omega, theta2=self.theta2)
        params.update(changes)
        return MixtureSpec(params["lam"], d, params["omega"], params["theta2"], n_max)


def build_mixture(spec: MixtureSpec) -> TwoModeState:
    cutoff = spec.cutoff
    rho = beam_split_diagonal_state(spec.distribution, BS1_THETA, cutoff)
    omega_vec = build_omega_state(spec.omega, spec.theta2, cutoff)
    mixed = spec.lam * rho.matrix + (1.0 - spec.lam) * omega_vec.projector()
    tail = spec.lam * spec.distribution.tail_mass + (1.0 - spec.lam) * max(0.0, 1.0 - omega_vec.norm2)
    state = TwoModeState(mixed, cutoff, tail, {"lam": spec.lam, "theta2": spec.theta2})
    return trace_and_renormalize(state)


# ----------------------------------------------------------------------------
# local filter

_LOG_FLOAT_MAX = math.log(np.finfo(float).max)


def local_filter_weights(nbar: float, cutoff: FockCutoff | int) -> np.ndarray:
    """Diagonal of ``T``: ``sqrt(nbar+1) * ((nbar+1)/(2 nbar))^(n/2)``.

    Raises FilterOverflow when a matrix element of ``(T x T) rho (T x T)^dag``
    could leave the floating-point range.
    """
    nbar = _check_nbar(nbar)
    cutoff = as_cutoff(cutoff)
    log_base = 0.5 * math.log(nbar + 1.0)
    log_step = 0.5 * math.log((nbar + 1.0) / (2.0 * nbar))
    # four weights multiply into each matrix element
    budget = _LOG_FLOAT_MAX / 4.0 - log_base
    if log_step > 0:
        max_n = int(math.floor(budget / log_step))
        if cutoff.n_max > max_n:
            raise FilterOverflow(
                f"filter weights overflow beyond n={max_n} for nbar={nbar}", max_admissible_n=max_n
            )
    n = np.arange(cutoff.dim)
    return np.exp(log_base + log_step * n)


def apply_local_filter(state: TwoModeState, nbar: float) -> TwoModeState:
    w = local_filter_weights(nbar, state.cutoff)
    ww = np.kron(w, w)
    out = (ww[:, None] * state.matrix) * ww[None, :]
    return trace_and_renormalize(state.with_matrix(out))
