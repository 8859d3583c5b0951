"""Single-particle Hamiltonians and an independent tridiagonal eigensolver.

The oracle finds every eigenvalue by bisection on the Sturm count (number of
negative pivots of ``T - sigma I``), vectorized over all eigenvalue indices,
then recovers eigenvectors by inverse iteration. It shares no code with the
closed-form route.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from .doubling import DoublingSolution
from .errors import ConvergenceError, DomainError

_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class TridiagonalHamiltonian:
    """Real symmetric tridiagonal matrix (only one off-diagonal is stored)."""

    diagonal: np.ndarray
    offdiagonal: np.ndarray

    def __post_init__(self):
        d = np.array(self.diagonal, dtype=float)
        e = np.array(self.offdiagonal, dtype=float)
        if d.ndim != 1 or len(d) < 1:
            raise DomainError("diagonal must be a non-empty 1-d array")
        if e.shape != (len(d) - 1,):
            raise DomainError(f"offdiagonal must have length {len(d) - 1}, got {e.shape}")
        d.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "diagonal", d)
        object.__setattr__(self, "offdiagonal", e)

    @property
    def size(self) -> int:
        return len(self.diagonal)

    def norm_inf(self) -> float:
        """Largest absolute row sum."""
        rows = np.abs(self.diagonal).copy()
        rows[:-1] += np.abs(self.offdiagonal)
        rows[1:] += np.abs(self.offdiagonal)
        return float(rows.max())

    def matvec(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        out = self.diagonal * v
        out[:-1] += self.offdiagonal * v[1:]
        out[1:] += self.offdiagonal * v[:-1]
        return out

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diagonal) + np.diag(self.offdiagonal, 1) + np.diag(self.offdiagonal, -1)


def assemble(source, truncated: Optional[bool] = None) -> TridiagonalHamiltonian:
    """Hamiltonian of a model or a :class:`DoublingSolution`.

    Off-diagonal entries interleave ``t+_n`` and ``t-_n``; truncation mode
    drops the last row and column.
    """
    sol = source if isinstance(source, DoublingSolution) else source.solution
    if truncated is not None and truncated != sol.truncated:
        sol = DoublingSolution(sol.epsilon, sol.tau0, sol.tau2, sol.t_plus, sol.t_minus,
                               truncated=truncated, mu_plus=sol.mu_plus, mu_minus=sol.mu_minus)
    off = sol.couplings()
    if not sol.truncated and np.any(off == 0):
        n = int(np.nonzero(off == 0)[0][0])
        raise DomainError(f"zero coupling at off-diagonal position {n}")
    return TridiagonalHamiltonian(sol.diagonal(), off)


@dataclass(frozen=True)
class EigenSystem:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual_bound: float
    source: str = "numeric-oracle"


def sturm_count(H: TridiagonalHamiltonian, shifts) -> np.ndarray:
    """Number of eigenvalues strictly below each shift."""
    shifts = np.asarray(shifts, dtype=float)
    d = H.diagonal
    e2 = H.offdiagonal**2
    pivmin = max(_TINY, _TINY * float(e2.max()) if len(e2) else _TINY)
    q = d[0] - shifts
    q = np.where(np.abs(q) < pivmin, -pivmin, q)
    count = (q < 0).astype(int)
    for i in range(1, len(d)):
        q = (d[i] - shifts) - e2[i - 1] / q
        q = np.where(np.abs(q) < pivmin, -pivmin, q)
        count += q < 0
    return count


def bisect_eigenvalues(H: TridiagonalHamiltonian, tol: Optional[float] = None, max_iter: int = 200) -> np.ndarray:
    """All eigenvalues, ascending, each bracketed to width ``tol``."""
    n = H.size
    norm = H.norm_inf()
    if tol is None:
        tol = 4 * _EPS * max(norm, _TINY)
    # Gershgorin interval
    r = np.zeros(n)
    r[:-1] += np.abs(H.offdiagonal)
    r[1:] += np.abs(H.offdiagonal)
    lo0 = float(np.min(H.diagonal - r))
    hi0 = float(np.max(H.diagonal + r))
    pad = 2 * _EPS * max(abs(lo0), abs(hi0)) + 2 * _TINY
    idx = np.arange(n)
    lo = np.full(n, lo0 - pad)
    hi = np.full(n, hi0 + pad)
    for _ in range(max_iter):
        width = hi - lo
        active = width > np.maximum(tol, 2 * _EPS * np.maximum(np.abs(lo), np.abs(hi)))
        if not active.any():
            break
        mid = 0.5 * (lo + hi)
        stuck = (mid <= lo) | (mid >= hi)
        active &= ~stuck
        if not active.any():
            break
        c = sturm_count(H, mid[active])
        a = np.nonzero(active)[0]
        below = c > idx[a]
        hi[a[below]] = mid[active][below]
        lo[a[~below]] = mid[active][~below]
    else:
        width = hi - lo
        bad = int(np.argmax(width))
        raise ConvergenceError(
            f"bisection did not converge for eigenvalue {bad} in {max_iter} steps",
            interval=(float(lo[bad]), float(hi[bad])))
    return 0.5 * (lo + hi)


def _inverse_iteration(H, sigma, start, cluster, iters=3):
    n = H.size
    ab = np.zeros((3, n))
    ab[0, 1:] = H.offdiagonal
    ab[2, :-1] = H.offdiagonal
    norm = max(H.norm_inf(), _TINY)
    shift = sigma
    v = start / np.linalg.norm(start)
    for _ in range(iters):
        ab[1] = H.diagonal - shift
        try:
            w = solve_banded((1, 1), ab, v, check_finite=False)
        except (LinAlgError, ValueError):
            shift = shift + 4 * _EPS * norm
            continue
        for u in cluster:
            w -= (u @ w) * u
        nw = np.linalg.norm(w)
        if not np.isfinite(nw) or nw == 0:
            shift = shift + 4 * _EPS * norm
            continue
        v = w / nw
    for u in cluster:
        v -= (u @ v) * u
    return v / np.linalg.norm(v)


def eig_oracle(H: TridiagonalHamiltonian, tol: Optional[float] = None, max_iter: int = 200) -> EigenSystem:
    """Full eigendecomposition by Sturm bisection and inverse iteration.

    Eigenvectors in clusters with relative gap below ``1e-8 ||H||`` are
    reorthogonalized against each other. Deterministic for given input.
    """
    lam = bisect_eigenvalues(H, tol=tol, max_iter=max_iter)
    n = H.size
    norm = max(H.norm_inf(), _TINY)
    rng = np.random.default_rng(20250101)
    vecs = np.empty((n, n))
    cluster = []
    for j in range(n):
        if j > 0 and lam[j] - lam[j - 1] >= 1e-8 * norm:
            cluster = []
        start = rng.standard_normal(n)
        v = _inverse_iteration(H, lam[j], start, cluster)
        i = int(np.argmax(np.abs(v)))
        if v[i] < 0:
            v = -v
        vecs[:, j] = v
        cluster.append(v)
    res = max(residual(H, lam[j], vecs[:, j]) for j in range(n))
    return EigenSystem(lam, vecs, float(res))


def residual(H: TridiagonalHamiltonian, x: float, v) -> float:
    """``||Hv - xv||_inf / (||H||_inf ||v||_inf)``."""
    v = np.asarray(v, dtype=float)
    if v.shape != (H.size,):
        raise DomainError(f"vector has shape {v.shape}, matrix has size {H.size}")
    vn = float(np.max(np.abs(v)))
    if vn == 0:
        raise DomainError("zero vector has no eigen-relation residual")
    return float(np.max(np.abs(H.matvec(v) - x * v)) / (max(H.norm_inf(), _TINY) * vn))
