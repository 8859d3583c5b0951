"""One verification pipeline for every model: closed forms against independent numerics."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Iterable, Optional

import numpy as np

from .doubling import check_constraints
from .errors import DomainError
from .models import SSHModel, build_model, normwise_rel
from .recurrence import check_orthogonality
from .tridiag import eig_oracle, residual

# --tol may replace the defaults with anything up to this, never looser
LOOSEST_TOL = 1e-6
CHRISTOFFEL_SEED = 20240607
CHRISTOFFEL_SAMPLES = 50


@dataclass(frozen=True)
class Thresholds:
    """Acceptance thresholds, keyed by the names checks refer to."""

    constraint: float = 1e-12
    spectrum: float = 1e-10
    spectrum_relative: float = 1e-8
    eigen_residual: float = 1e-11
    eigvec: float = 1e-10
    orthogonality: float = 1e-9
    norm: float = 1e-8
    christoffel: float = 1e-10
    family: float = 1e-10
    contiguity: float = 1e-10
    duality: float = 1e-10
    self_duality: float = 1e-12
    hypergeometric: float = 1e-10
    exact: float = 0.0

    def with_tol(self, tol: float) -> "Thresholds":
        """Every non-exact threshold set to ``tol``; ``0 < tol <= 1e-6``."""
        if not (tol > 0 and tol <= LOOSEST_TOL):
            raise DomainError(f"tol must satisfy 0 < tol <= {LOOSEST_TOL:g}, got {tol!r}")
        return replace(self, **{f.name: tol for f in fields(self) if f.name != "exact"})


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    threshold: float
    passed: bool

    @classmethod
    def of(cls, name: str, residual: float, threshold: float) -> "CheckResult":
        residual = float(residual)
        return cls(name, residual, threshold, bool(residual <= threshold))


@dataclass
class VerificationReport:
    label: str
    parameters: dict
    checks: list = field(default_factory=list)
    skipped: Optional[str] = None

    @property
    def overall(self) -> bool:
        """All checks pass. A skipped point carries no checks and is not a failure."""
        return all(c.passed for c in self.checks)

    def failing(self) -> list:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "model": self.label,
            "parameters": dict(self.parameters),
            "checks": [asdict(c) for c in self.checks],
            "overall": self.overall,
            "skipped": self.skipped,
        }


def christoffel_samples(xmax: float, count: int = CHRISTOFFEL_SAMPLES, seed: int = CHRISTOFFEL_SEED) -> np.ndarray:
    """Fixed pseudo-random points ``+-[0.2, 1.2] xmax``."""
    rng = np.random.default_rng(seed)
    mags = rng.uniform(0.2, 1.2, count) * max(xmax, 1.0)
    return mags * rng.choice([-1.0, 1.0], count)


def _safe(fn):
    """Residual of ``fn()``; arithmetic failures count as an infinite residual."""
    try:
        return float(fn())
    except (ArithmeticError, DomainError, ValueError, IndexError):
        return math.inf


def _spectrum_dev(model: SSHModel, oracle) -> float:
    closed = np.sort(model.closed_form_spectrum())
    if closed.shape != oracle.shape:
        return math.inf
    dev = float(np.max(np.abs(closed - oracle)))
    if model.relative_spectrum:
        dev /= max(1.0, float(np.max(np.abs(oracle))))
    return dev


def _pairwise_orthogonality(vectors: list) -> float:
    M = np.column_stack(vectors)
    norms = np.linalg.norm(M, axis=0)
    G = np.abs(M.T @ M) / np.outer(norms, norms)
    np.fill_diagonal(G, 0.0)
    return float(G.max()) if G.size else 0.0


def _christoffel(model: SSHModel, xmax: float, tol: float) -> float:
    xs = christoffel_samples(xmax)
    sol = model.solution
    # drop samples that land on pi_x = tau0, where the quotient is undefined
    pi = sol.tau2 * (xs - sol.mu_plus) * (xs - sol.mu_minus)
    xs = xs[np.abs(pi) > 1e-8 * max(1.0, abs(sol.tau0))]
    return model.christoffel(xs, tol).max_residual


def run_all(model: SSHModel, thresholds: Optional[Thresholds] = None) -> VerificationReport:
    """Run the checks in their fixed order and collect the results.

    Failed checks are recorded, never raised.
    """
    th = thresholds or Thresholds()
    rep = VerificationReport(model.label, dict(model.params))
    add = rep.checks.append

    add(CheckResult.of("constraints", _safe(lambda: check_constraints(model.family, model.solution).max_residual),
                       th.constraint))

    H = model.hamiltonian()
    oracle = eig_oracle(H)
    add(CheckResult.of("spectrum_vs_oracle", _safe(lambda: _spectrum_dev(model, oracle.eigenvalues)),
                       th.spectrum_relative if model.relative_spectrum else th.spectrum))

    labels = model.eigen_labels()
    vectors = [model.eigenvector(lab) for lab in labels]
    add(CheckResult.of("eigen_residual",
                       _safe(lambda: max(residual(H, lab.value, v) for lab, v in zip(labels, vectors))),
                       th.eigen_residual))
    add(CheckResult.of("closed_form_vectors",
                       _safe(lambda: max(normwise_rel(model.closed_form_vector(lab), v)
                                         for lab, v in zip(labels, vectors))),
                       th.eigvec))
    add(CheckResult.of("orthogonality", _safe(lambda: _pairwise_orthogonality(vectors)), th.orthogonality))

    def norm_dev():
        worst = 0.0
        for lab, v in zip(labels, vectors):
            direct = float(v @ v)
            closed = model.eigvec_norm(lab.k, lab.sign or 1)
            worst = max(worst, abs(closed - direct) / abs(direct))
        return worst

    add(CheckResult.of("norms", _safe(norm_dev), th.norm))

    xmax = float(np.max(np.abs(oracle.eigenvalues)))
    add(CheckResult.of("christoffel", _safe(lambda: _christoffel(model, xmax, th.christoffel)), th.christoffel))
    add(CheckResult.of("family_orthogonality", _safe(lambda: check_orthogonality(model.family.base).max_deviation),
                       th.family))

    try:
        extra = model.model_checks()
    except (ArithmeticError, DomainError, ValueError) as exc:
        extra = [(f"model_checks ({exc})", math.inf, "exact")]
    for name, res, key in extra:
        add(CheckResult.of(name, res, getattr(th, key)))
    return rep


def _one(name: str, kw: dict, thresholds: Optional[Thresholds]) -> VerificationReport:
    try:
        model = build_model(name, **kw)
    except DomainError as exc:
        return VerificationReport(name, dict(kw), skipped=str(exc))
    return run_all(model, thresholds)


def sweep(name: str, grid: Iterable[dict], thresholds: Optional[Thresholds] = None,
          workers: int = 1) -> list:
    """``run_all`` at each parameter point; unbuildable points are skipped with a reason.

    Reports come back in grid order regardless of ``workers``. Points run in
    separate processes because the extended-precision checks share global
    :mod:`mpmath` state.
    """
    grid = [dict(kw) for kw in grid]
    if workers <= 1:
        return [_one(name, kw, thresholds) for kw in grid]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_one, [name] * len(grid), grid, [thresholds] * len(grid)))


def qracah_scan_grid(case: str, lattice: Optional[dict] = None) -> list:
    """The q-Racah lattice for one case as ``build_model`` keyword dicts."""
    import itertools

    from .models import DEFAULT_LATTICE

    lat = DEFAULT_LATTICE if lattice is None else lattice
    keys = ("q", "N", "alpha", "beta", "delta")
    return [dict(zip(keys, combo)) for combo in itertools.product(*(lat[k] for k in keys))]
