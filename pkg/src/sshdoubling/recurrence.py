"""Finite orthogonal polynomial families given by a three-term recurrence.

A family of length ``N`` holds ``P_0 .. P_{N-1}`` defined by

    x P_n = A_n P_{n+1} - (A_n + C_n) P_n + C_n P_{n-1},   P_0 = 1, P_{-1} = 0,

together with its grid ``lambda(k)``, weights and norms. Two closures of the
finite sequence are supported:

``"coefficient"``
    ``C_0 = 0`` and ``A_{N-1} = 0`` exactly (Krawtchouk, q-Racah). The
    ``n = N-1`` relation then only holds on the grid.
``"grid"``
    The family is a truncation of an infinite sequence whose ``P_N``
    vanishes on the grid (Chebyshev). ``C`` then carries one extra entry
    ``C_N`` and the boundary values only enter through the diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import AdmissibilityError, DomainError
from .specialfn import ONE, LogReal


def _as_logreal(v) -> LogReal:
    return v if isinstance(v, LogReal) else LogReal.from_float(float(v))


class RecurrenceFamily:
    """Immutable description of a finite orthogonal polynomial family."""

    def __init__(
        self,
        A: Sequence[float],
        C: Sequence[float],
        grid: Sequence[float],
        weight: Sequence,
        norm: Sequence,
        label: str = "",
        closure: str = "coefficient",
        explicit: Optional[Callable[[int, float], float]] = None,
    ):
        A = np.array(A, dtype=float)
        C = np.array(C, dtype=float)
        grid = np.array(grid, dtype=float)
        N = len(A)
        if N < 1:
            raise DomainError("a family needs at least one polynomial")
        if closure not in ("coefficient", "grid"):
            raise DomainError(f"unknown closure {closure!r}")
        want_c = N if closure == "coefficient" else N + 1
        if len(C) != want_c:
            raise DomainError(f"closure {closure!r} needs {want_c} C coefficients, got {len(C)}")
        if len(grid) != N or len(weight) != N or len(norm) != N:
            raise DomainError("grid, weight and norm must all have length N")
        if closure == "coefficient" and (C[0] != 0.0 or A[N - 1] != 0.0):
            raise DomainError(f"coefficient closure needs C_0 = 0 and A_(N-1) = 0, got {C[0]!r}, {A[N - 1]!r}")
        for n in range(N - 1):
            if not A[n] * C[n + 1] > 0:
                raise AdmissibilityError(
                    f"Favard positivity fails at n={n}: A_n*C_(n+1) = {A[n] * C[n + 1]!r}")
        if len(np.unique(grid)) != N:
            raise DomainError("grid points must be pairwise distinct")
        for a in (A, C, grid):
            a.setflags(write=False)
        self.N = N
        self.A = A
        self.C = C
        self.grid = grid
        self.weight = tuple(_as_logreal(w) for w in weight)
        self.norm = tuple(_as_logreal(h) for h in norm)
        self.label = label
        self.closure = closure
        self.explicit = explicit

    def __repr__(self):
        return f"RecurrenceFamily({self.label!r}, N={self.N}, closure={self.closure!r})"

    @property
    def diagonal(self) -> np.ndarray:
        """``A_n + C_n`` for ``n = 0 .. N-1``."""
        return self.A + self.C[: self.N]

    def off_diagonal(self) -> np.ndarray:
        """``sqrt(A_n C_{n+1})`` for ``n = 0 .. N-2``."""
        return np.sqrt(self.A[:-1] * self.C[1 : self.N])


def p_table(family: RecurrenceFamily, x, upto: Optional[int] = None) -> np.ndarray:
    """All ``P_0(x) .. P_upto(x)`` by forward recurrence; rows index degree.

    ``upto`` defaults to ``N-1``. ``upto = N`` is allowed for grid-closed
    families only, where it is used to confirm that ``P_N`` vanishes on the
    grid.
    """
    N = family.N
    upto = N - 1 if upto is None else upto
    if upto > N - 1 and not (family.closure == "grid" and upto == N):
        raise IndexError(f"degree {upto} outside 0..{N - 1}")
    x = np.asarray(x, dtype=float)
    out = np.empty((upto + 1,) + x.shape)
    out[0] = 1.0
    prev = np.zeros_like(x)
    A, C = family.A, family.C
    for n in range(upto):
        out[n + 1] = ((x + A[n] + C[n]) * out[n] - C[n] * prev) / A[n]
        prev = out[n]
    return out


def eval_P(family: RecurrenceFamily, n: int, x):
    if not 0 <= n <= family.N - 1:
        raise IndexError(f"degree {n} outside 0..{family.N - 1}")
    return p_table(family, x, upto=n)[n]


class SymmetrizedFamily:
    """Family renormalized to ``R_n = eps^n prod_{k<n} A_k / sqrt(A_k C_{k+1}) P_n``.

    ``R_n`` satisfies the symmetric recurrence

        x R_n = eps s_n R_{n+1} - (A_n + C_n) R_n + eps s_{n-1} R_{n-1},

    with ``s_n = sqrt(A_n C_{n+1})``.
    """

    def __init__(self, base: RecurrenceFamily, epsilon: int):
        if epsilon not in (-1, 1):
            raise DomainError(f"epsilon must be +1 or -1, got {epsilon!r}")
        self.base = base
        self.epsilon = epsilon
        pref = [ONE]
        for k in range(base.N - 1):
            a, c = base.A[k], base.C[k + 1]
            step = LogReal(int(np.sign(a)) * epsilon, 0.5 * (math.log(abs(a)) - math.log(abs(c))))
            pref.append(pref[-1] * step)
        self.prefactor = tuple(pref)
        s = base.off_diagonal()
        # s_{N-1} is only meaningful under grid closure
        if base.closure == "grid":
            s = np.append(s, math.sqrt(base.A[-1] * base.C[base.N]))
        else:
            s = np.append(s, 0.0)
        self.coupling = s
        self.coupling.setflags(write=False)

    @property
    def N(self) -> int:
        return self.base.N

    def __repr__(self):
        return f"SymmetrizedFamily({self.base.label!r}, epsilon={self.epsilon})"


def r_table(sym: SymmetrizedFamily, x, upto: Optional[int] = None) -> np.ndarray:
    """All ``R_0(x) .. R_upto(x)`` from the symmetric recurrence."""
    base = sym.base
    N = base.N
    upto = N - 1 if upto is None else upto
    if upto > N - 1 and not (base.closure == "grid" and upto == N):
        raise IndexError(f"degree {upto} outside 0..{N - 1}")
    x = np.asarray(x, dtype=float)
    out = np.empty((upto + 1,) + x.shape)
    out[0] = 1.0
    prev = np.zeros_like(x)
    eps = sym.epsilon
    diag = base.A + base.C[:N]
    s = sym.coupling
    for n in range(upto):
        back = eps * s[n - 1] * prev if n > 0 else 0.0
        out[n + 1] = ((x + diag[n]) * out[n] - back) / (eps * s[n])
        prev = out[n]
    return out


def r_on_grid(sym: SymmetrizedFamily, k: int) -> np.ndarray:
    """``R_0 .. R_{N-1}`` at the grid point ``lambda(k)``, computed stably.

    The forward recurrence loses all accuracy once ``R_n(lambda(k))`` starts
    to decay, which happens for strongly localized eigenvectors. Here a
    forward and a backward sweep of ratios are joined at the index where
    the two disagree least (a twisted factorization of ``J - lambda(k)``),
    and the result is rescaled to ``R_0 = 1``.
    """
    base = sym.base
    N = base.N
    if not 0 <= k < N:
        raise IndexError(f"grid index {k} outside 0..{N - 1}")
    if N == 1:
        return np.ones(1)
    x = float(base.grid[k])
    a = -(base.A + base.C[:N]) - x
    b = sym.epsilon * sym.coupling[: N - 1]
    tiny = np.finfo(float).eps * max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    # forward pivots: D+_n = a_n - b_{n-1}^2 / D+_{n-1}
    dp = np.empty(N)
    dp[0] = a[0]
    for n in range(1, N):
        prev = dp[n - 1] if dp[n - 1] != 0 else tiny
        dp[n] = a[n] - b[n - 1] ** 2 / prev
    # backward pivots: D-_n = a_n - b_n^2 / D-_{n+1}
    dm = np.empty(N)
    dm[N - 1] = a[N - 1]
    for n in range(N - 2, -1, -1):
        nxt = dm[n + 1] if dm[n + 1] != 0 else tiny
        dm[n] = a[n] - b[n] ** 2 / nxt
    # gamma_m = D+_m + D-_m - a_m vanishes at an exact eigenvalue
    gamma = np.abs(dp + dm - a)
    m = int(np.argmin(gamma))
    R = np.empty(N)
    R[m] = 1.0
    for n in range(m - 1, -1, -1):
        piv = dp[n] if dp[n] != 0 else tiny
        R[n] = -b[n] * R[n + 1] / piv
    for n in range(m + 1, N):
        piv = dm[n] if dm[n] != 0 else tiny
        R[n] = -b[n - 1] * R[n - 1] / piv
    return R / R[0]


def r_grid_table(sym: SymmetrizedFamily) -> np.ndarray:
    """Stable ``R_n(lambda(k))`` for all ``n, k``; column ``k`` is the grid index."""
    return np.column_stack([r_on_grid(sym, k) for k in range(sym.N)])


def eval_R(sym: SymmetrizedFamily, n: int, x):
    if not 0 <= n <= sym.N - 1:
        raise IndexError(f"degree {n} outside 0..{sym.N - 1}")
    return r_table(sym, x, upto=n)[n]


def symmetric_residual(sym: SymmetrizedFamily, x) -> np.ndarray:
    """Residual of the symmetric recurrence at each ``n = 0 .. N-1``.

    Each row is scaled by its largest term. The ``n = N-1`` entry is only
    expected to vanish when ``x`` is a grid point.
    """
    N = sym.N
    eps = sym.epsilon
    base = sym.base
    x = float(x)
    R = r_table(sym, x, upto=N if base.closure == "grid" else None)
    diag = base.A + base.C[:N]
    s = sym.coupling
    res = np.empty(N)
    for n in range(N):
        up = eps * s[n] * R[n + 1] if (n + 1 < len(R)) else 0.0
        down = eps * s[n - 1] * R[n - 1] if n > 0 else 0.0
        lhs = x * R[n]
        mid = diag[n] * R[n]
        scale = max(abs(lhs), abs(up), abs(mid), abs(down))
        res[n] = abs(lhs - (up - mid + down)) / scale if scale > 0 else 0.0
    return res


@dataclass(frozen=True)
class OrthogonalityReport:
    max_deviation: float
    worst: tuple
    matrix: np.ndarray


def check_orthogonality(family: RecurrenceFamily) -> OrthogonalityReport:
    """Compare the discrete Gram matrix on the grid against the stored norms.

    Entry ``(n, m)`` is ``|sum_k w_k P_n P_m - delta_nm N_n| / sqrt(N_n N_m)``;
    terms are rescaled in log space before a compensated sum. ``P_n`` on the
    grid comes from :func:`r_on_grid`, so decaying columns stay accurate.
    """
    N = family.N
    # P_n = R_n / prefactor_n, with R_n from the stable grid evaluation
    sym = SymmetrizedFamily(family, 1)
    R = r_grid_table(sym)
    pref_log = np.array([p.log_magnitude for p in sym.prefactor])[:, None]
    pref_sign = np.array([p.sign for p in sym.prefactor], dtype=float)[:, None]
    logw = np.array([w.log_magnitude for w in family.weight])
    sw = np.array([w.sign for w in family.weight], dtype=float)
    logh = np.array([h.log_magnitude for h in family.norm])
    with np.errstate(divide="ignore"):
        logP = np.log(np.abs(R)) - pref_log
    sP = np.sign(R) * pref_sign
    dev = np.zeros((N, N))
    for n in range(N):
        for m in range(n, N):
            scale = 0.5 * (logh[n] + logh[m])
            terms = sw * sP[n] * sP[m] * np.exp(logw + logP[n] + logP[m] - scale)
            s = math.fsum(terms)
            target = float(family.norm[n].sign) if n == m else 0.0
            dev[n, m] = dev[m, n] = abs(s - target)
    idx = np.unravel_index(np.argmax(dev), dev.shape)
    return OrthogonalityReport(float(dev[idx]), (int(idx[0]), int(idx[1])), dev)
