"""Certification pipeline: config in, report out."""

from __future__ import annotations

import copy
import csv
import enum
import io
import itertools
import json
import math
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .dump import write_matrix
from .errors import CertificationError, ConfigError
from .gerschgorin import omega_upper_bound, perturbation_audit
from .hankel import default_order, hankel_ppt_test
from .range_search import (
    CONV_TOL,
    DEFAULT_RESTARTS,
    DEFAULT_SEED,
    MAX_ITER,
    build_range_subspace,
    max_workers,
    product_vector_search,
    symbolic_contradiction_check,
)
from .states import BS1_THETA, DEFAULT_THETA2, MixtureSpec, Variant, beam_split_diagonal_state, build_mixture
from .transpose import LEAK_TOL, PSD_REL_TOL, block_decompose, decompose_unchecked, partial_transpose_B, ppt_verdict

OVERLAP_MARGIN = 1e-4
CONTRADICTION_FLOOR = 1e-12

DEFAULT_CONFIG = {
    "state": {
        "variant": "shifted_thermal",
        "nbar": 1.0,
        "lambda": 0.5,
        "omega": {"magnitude": 1e-3, "phase": 0.0},
        "theta2": DEFAULT_THETA2,
    },
    "numerics": {
        "n_max": 40,
        "psd_rel_tol": PSD_REL_TOL,
        "leak_tol": LEAK_TOL,
        "hankel_order": None,
    },
    "range_search": {
        "n_max": 10,
        "restarts": DEFAULT_RESTARTS,
        "max_iter": MAX_ITER,
        "conv_tol": CONV_TOL,
        "seed": DEFAULT_SEED,
        "overlap_margin": OVERLAP_MARGIN,
        "enabled": True,
    },
    "outputs": {"report_path": None, "dump_matrices": False, "dump_dir": None},
}

GRID_KEYS = ("omega", "lambda", "nbar", "theta2", "n_max")


class Verdict(str, enum.Enum):
    PPT_AND_ENTANGLED_EVIDENCE = "PPT_AND_ENTANGLED_EVIDENCE"
    NPT = "NPT"
    PPT_NO_ENTANGLEMENT_EVIDENCE = "PPT_NO_ENTANGLEMENT_EVIDENCE"
    INCONCLUSIVE = "INCONCLUSIVE"


def decide(ppt: bool, overlap_evidence: bool | None, contradiction: bool) -> Verdict:
    """Decision table.

    ============  =================  =============  ==============================
    ppt           overlap evidence   contradiction  verdict
    ============  =================  =============  ==============================
    False         any                any            NPT
    True          True               True           PPT_AND_ENTANGLED_EVIDENCE
    True          False or None      False          PPT_NO_ENTANGLEMENT_EVIDENCE
    True          otherwise (disagreement)          INCONCLUSIVE
    ============  =================  =============  ==============================

    ``overlap_evidence`` is None when the range search was disabled.
    """
    if not ppt:
        return Verdict.NPT
    if overlap_evidence and contradiction:
        return Verdict.PPT_AND_ENTANGLED_EVIDENCE
    if not overlap_evidence and not contradiction:
        return Verdict.PPT_NO_ENTANGLEMENT_EVIDENCE
    return Verdict.INCONCLUSIVE


# ----------------------------------------------------------------------------
# config


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if key not in base:
            raise ConfigError(f"unknown config key {path + key!r}")
        if isinstance(base[key], dict) and path + key == "state.omega" and not isinstance(value, dict):
            out[key] = value  # a bare number is accepted as the complex omega
        elif isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{path + key!r} must be a mapping")
            out[key] = _merge(base[key], value, path + key + ".")
        else:
            out[key] = value
    return out


def _number(cfg: dict, key: str, path: str, cast=float):
    try:
        return cast(cfg[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}{key} must be numeric, got {cfg[key]!r}") from exc


@dataclass(frozen=True)
class Config:
    raw: dict

    @classmethod
    def from_dict(cls, data: dict | None) -> "Config":
        if data is not None and not isinstance(data, dict):
            raise ConfigError("config document must be a mapping")
        raw = _merge(DEFAULT_CONFIG, data or {})
        cfg = cls(raw)
        cfg.mixture_spec()  # validate eagerly
        cfg.range_params()
        return cfg

    @classmethod
    def load(cls, path) -> "Config":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            return cls.from_dict(yaml.safe_load(text))
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from exc

    def omega(self) -> complex:
        om = self.raw["state"]["omega"]
        if isinstance(om, dict):
            mag = _number(om, "magnitude", "state.omega.")
            phase = _number(om, "phase", "state.omega.")
            return complex(mag * math.cos(phase), mag * math.sin(phase)) if phase else complex(mag)
        try:
            return complex(om)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"state.omega must be numeric or {{magnitude, phase}}, got {om!r}") from exc

    def mixture_spec(self, n_max: int | None = None) -> MixtureSpec:
        st = self.raw["state"]
        try:
            variant = Variant(st["variant"])
        except ValueError as exc:
            raise ConfigError(f"unknown state.variant {st['variant']!r}") from exc
        n = _number(self.raw["numerics"], "n_max", "numerics.", int) if n_max is None else n_max
        return MixtureSpec.build(
            lam=_number(st, "lambda", "state."),
            nbar=_number(st, "nbar", "state."),
            omega=self.omega(),
            theta2=_number(st, "theta2", "state."),
            n_max=n,
            variant=variant,
        )

    def range_params(self) -> dict:
        rs = self.raw["range_search"]
        params = {
            "n_max": _number(rs, "n_max", "range_search.", int),
            "restarts": _number(rs, "restarts", "range_search.", int),
            "max_iter": _number(rs, "max_iter", "range_search.", int),
            "conv_tol": _number(rs, "conv_tol", "range_search."),
            "seed": _number(rs, "seed", "range_search.", int),
            "overlap_margin": _number(rs, "overlap_margin", "range_search."),
            "enabled": bool(rs["enabled"]),
        }
        if params["restarts"] < 1:
            raise ConfigError("range_search.restarts must be >= 1")
        return params

    def with_state(self, **changes) -> "Config":
        """Copy with top-level state/numerics overrides (grid keys)."""
        raw = copy.deepcopy(self.raw)
        for key, value in changes.items():
            if key == "omega":
                raw["state"]["omega"] = {"magnitude": float(abs(value)), "phase": 0.0}
                if isinstance(value, complex) and value.imag:
                    raw["state"]["omega"]["phase"] = math.atan2(value.imag, value.real)
            elif key == "n_max":
                raw["numerics"]["n_max"] = int(value)
            elif key in ("lambda", "nbar", "theta2"):
                raw["state"][key] = value
            else:
                raise ConfigError(f"cannot vary {key!r}")
        return Config.from_dict(raw)


# ----------------------------------------------------------------------------
# certify


def _swap_residual(m: np.ndarray, dim: int) -> float:
    t = m.reshape(dim, dim, dim, dim)
    swapped = t.transpose(1, 0, 3, 2).reshape(m.shape)
    return float(np.max(np.abs(swapped - m)))


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, enum.Enum):
        return x.value
    return x


def ppt_check(spec: MixtureSpec, psd_rel_tol: float = PSD_REL_TOL, leak_tol: float = LEAK_TOL):
    """Build ``rho'``, partially transpose, and return the authoritative PPT data.

    The verdict comes from the two parity sectors, which are exact invariant
    subspaces of ``rho'^T_B`` for every member of the family; per-``delta``
    minima are the compressions onto the ``delta`` blocks.
    """
    state = build_mixture(spec)
    pt = partial_transpose_B(state)
    sectors = block_decompose(pt, leak_tol=leak_tol, grouping="parity")
    ppt, sector_min, tol = ppt_verdict(sectors, psd_rel_tol)
    deltas = decompose_unchecked(pt, "delta")
    _, delta_min, _ = ppt_verdict(deltas, psd_rel_tol)
    return state, pt, {
        "ppt": ppt,
        "psd_tol": tol,
        "min_eigenvalue": min(sector_min.values()),
        "sector_min_eigenvalues": {("even" if k == 0 else "odd"): v for k, v in sector_min.items()},
        "delta_block_min_eigenvalues": {str(k): delta_min[k] for k in sorted(delta_min)},
        "delta_blocks_exact": deltas.off_block_residual <= leak_tol,
        "delta_off_block_residual": deltas.off_block_residual,
    }


def run_certify(config: Config | dict, dump_dir=None) -> dict:
    """Execute the whole pipeline and return the report as a JSON-ready tree."""
    if not isinstance(config, Config):
        config = Config.from_dict(config)
    started = time.perf_counter()
    stamp = datetime.now(timezone.utc).isoformat()
    spec = config.mixture_spec()
    num = config.raw["numerics"]
    rp = config.range_params()

    state, pt, ppt = ppt_check(spec, float(num["psd_rel_tol"]), float(num["leak_tol"]))
    dim = spec.cutoff.dim
    rho_only = beam_split_diagonal_state(spec.distribution, BS1_THETA, spec.cutoff)
    stats = {
        "trace": state.trace,
        "tail_mass": state.tail_mass,
        "hermiticity_residual": state.hermiticity_residual(),
        "swap_residual_rho": _swap_residual(rho_only.matrix, dim),
        "swap_residual_mixture": _swap_residual(state.matrix, dim),
    }

    order = num["hankel_order"] or default_order(spec.n_max)
    hank = hankel_ppt_test(spec.distribution, int(order))
    ppt["hankel"] = {
        "order": hank.order,
        "verdict": hank.verdict,
        "min_eigenvalue": hank.hankel.min_eigenvalue,
        "first_failing_minor": hank.hankel.first_failing_order,
    }

    audit = perturbation_audit(spec, pt_matrix=pt.matrix)
    try:
        bound = omega_upper_bound(spec.distribution, spec.lam).to_dict()
    except CertificationError as exc:
        bound = {"bound": None, "reason": str(exc)}
    gersch = {"omega_bound": bound, "audit": audit.to_dict(), "omega_within_bound": (
        bound["bound"] is not None and abs(spec.omega) <= bound["bound"]
    )}

    contra = symbolic_contradiction_check(spec.replace(n_max=max(rp["n_max"], 4)))
    rng = {"contradiction": contra.to_dict(), "n_max": rp["n_max"], "seed": rp["seed"]}
    overlap_evidence = None
    if rp["enabled"]:
        sub = build_range_subspace(spec.replace(n_max=rp["n_max"]))
        res = product_vector_search(sub, rp["restarts"], rp["max_iter"], rp["seed"], rp["conv_tol"])
        rng.update(res.summary())
        rng["rank"] = sub.rank
        overlap_evidence = res.best_overlap < 1.0 - rp["overlap_margin"]
    rng["overlap_evidence"] = overlap_evidence
    contradiction = contra.magnitude > CONTRADICTION_FLOOR
    verdict = decide(ppt["ppt"], overlap_evidence, contradiction)

    if dump_dir is None and config.raw["outputs"]["dump_matrices"]:
        dump_dir = config.raw["outputs"]["dump_dir"] or "."
    dumps = []
    if dump_dir is not None:
        out = Path(dump_dir)
        out.mkdir(parents=True, exist_ok=True)
        dumps = [
            write_matrix(out / "rho_prime.bent", state.matrix).name,
            write_matrix(out / "rho_prime_pt.bent", pt.matrix).name,
        ]

    report = {
        "input": {
            "config": config.raw,
            "mixture": {
                "lambda": spec.lam,
                "variant": spec.distribution.variant.value,
                "nbar": spec.distribution.nbar,
                "omega": spec.omega,
                "theta2": spec.theta2,
                "n_max": spec.n_max,
            },
        },
        "state_stats": stats,
        "ppt": ppt,
        "gerschgorin": gersch,
        "range": rng,
        "verdict": verdict.value,
        "evidence_note": (
            "range search can only supply evidence: no product vector found is consistent with, "
            "not a proof of, entanglement"
        ),
        "dumps": dumps,
        "versions": {"cvbound": __version__, "numpy": np.__version__, "python": platform.python_version()},
        "timing": {"started_utc": stamp, "elapsed_s": time.perf_counter() - started},
    }
    return _jsonable(report)


def report_bytes(report: dict, drop_timing: bool = False) -> bytes:
    if drop_timing:
        report = {k: v for k, v in report.items() if k != "timing"}
    return (json.dumps(report, sort_keys=True, indent=2, allow_nan=True) + "\n").encode()


# ----------------------------------------------------------------------------
# sweep


def load_grid(path) -> dict:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read grid {path}: {exc}") from exc
    return data or {}


def expand_grid(grid: dict) -> list[dict]:
    axes = {k: v for k, v in (grid or {}).items() if k in GRID_KEYS}
    unknown = set(grid or {}) - set(GRID_KEYS) - {"bisect"}
    if unknown:
        raise ConfigError(f"unknown grid keys: {sorted(unknown)}")
    if not axes or any(not isinstance(v, list) or not v for v in axes.values()):
        raise ConfigError("grid must give at least one nonempty list over " + ", ".join(GRID_KEYS))
    keys = [k for k in GRID_KEYS if k in axes]
    return [dict(zip(keys, combo)) for combo in itertools.product(*(axes[k] for k in keys))]


def run_sweep(config: Config | dict, grid: dict) -> tuple[list[dict], str]:
    """One report per grid point (grid order) plus a CSV summary."""
    if not isinstance(config, Config):
        config = Config.from_dict(config)
    points = expand_grid(grid)
    configs = [config.with_state(**p) for p in points]
    workers = max_workers()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            reports = list(pool.map(run_certify, configs))
    else:
        reports = [run_certify(c) for c in configs]
    return reports, summary_csv(points, reports)


def summary_csv(points: list[dict], reports: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["omega", "lambda", "nbar", "theta2", "n_max", "min_pt_eigenvalue", "verdict"])
    for rep in reports:
        m = rep["input"]["mixture"]
        w.writerow([
            repr(abs(complex(*m["omega"]))), repr(m["lambda"]), repr(m["nbar"]), repr(m["theta2"]),
            m["n_max"], repr(rep["ppt"]["min_eigenvalue"]), rep["verdict"],
        ])
    return buf.getvalue()


@dataclass(frozen=True)
class BisectionResult:
    boundary: float
    lo: float
    hi: float
    evaluations: int
    history: list

    def to_dict(self) -> dict:
        return {
            "boundary": self.boundary,
            "ppt_side": self.lo,
            "npt_side": self.hi,
            "evaluations": self.evaluations,
            "history": self.history,
        }


def _round_down_sig(x: float, digits: int = 3) -> float:
    if x <= 0:
        return x
    e = math.floor(math.log10(x)) - digits + 1
    return math.floor(x / 10**e) * 10**e


def bisect_omega(config: Config | dict, lo: float = 1e-6, hi: float = 0.99, rel_tol: float = 1e-4) -> BisectionResult:
    """Largest PPT ``|omega|`` on a geometric bisection, rounded down to 3 significant figures."""
    if not isinstance(config, Config):
        config = Config.from_dict(config)
    base = config.mixture_spec()
    num = config.raw["numerics"]

    def is_ppt(w: float) -> bool:
        spec = base.replace(omega=w)
        _, _, ppt = ppt_check(spec, float(num["psd_rel_tol"]), float(num["leak_tol"]))
        history.append([w, ppt["min_eigenvalue"], ppt["ppt"]])
        return ppt["ppt"]

    history: list = []
    if not is_ppt(lo):
        raise ConfigError(f"bisection lower end omega={lo} is not PPT")
    if is_ppt(hi):
        return BisectionResult(hi, hi, hi, len(history), history)
    while hi / lo - 1.0 > rel_tol:
        mid = math.sqrt(lo * hi)
        if is_ppt(mid):
            lo = mid
        else:
            hi = mid
    return BisectionResult(_round_down_sig(lo), lo, hi, len(history), history)
