"""Doubling of a symmetrized family into the eigenvectors of an SSH-like chain.

Given ``R_0 .. R_{N-1}`` and a solution ``(eps, tau0, tau2, t+, t-)`` of the
coupling constraints, the vector

    Q_{2n}(x)   = t+_n R_n(pi_x) + t-_{n-1} R_{n-1}(pi_x)     (n = 0..N)
    Q_{2n+1}(x) = (x - mu+) R_n(pi_x)                         (n = 0..N-1)
    pi_x        = tau2 (x - mu+)(x - mu-) + tau0

is an eigenvector of the tridiagonal matrix with off-diagonal
``t+_0, t-_0, t+_1, ...`` and diagonal alternating ``mu+, mu-``. With
``mu+ = mu- = 0`` this is the plain zero-diagonal chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from types import SimpleNamespace
from typing import Callable, Optional, Sequence

import mpmath
import numpy as np

from .errors import DomainError
from .recurrence import SymmetrizedFamily, r_on_grid, r_table

GRID_MATCH = 1e-9
SPECTRUM_MATCH = 1e-9


@dataclass(frozen=True)
class DoublingSolution:
    """Couplings and quadratic map of one doubled chain.

    ``t_plus[n]`` and ``t_minus[n]`` for ``n = 0..N-1``; by convention
    ``t+_N = 0`` and ``t-_{-1} = 0``. In truncation mode ``t-_{N-1} = 0``
    and the last site is dropped, leaving ``2N`` sites.
    """

    epsilon: int
    tau0: float
    tau2: float
    t_plus: np.ndarray
    t_minus: np.ndarray
    truncated: bool = False
    mu_plus: float = 0.0
    mu_minus: float = 0.0
    check_nonzero: bool = field(default=True, compare=False)

    def __post_init__(self):
        tp = np.array(self.t_plus, dtype=float)
        tm = np.array(self.t_minus, dtype=float)
        tp.setflags(write=False)
        tm.setflags(write=False)
        object.__setattr__(self, "t_plus", tp)
        object.__setattr__(self, "t_minus", tm)
        if self.epsilon not in (-1, 1):
            raise DomainError(f"epsilon must be +1 or -1, got {self.epsilon!r}")
        if self.tau2 == 0:
            raise DomainError("tau2 must be nonzero")
        if tp.shape != tm.shape or tp.ndim != 1 or len(tp) < 1:
            raise DomainError("t_plus and t_minus must be 1-d arrays of equal length N >= 1")
        if self.check_nonzero:
            check_nonzero_couplings(self)

    @property
    def N(self) -> int:
        return len(self.t_plus)

    @property
    def size(self) -> int:
        return 2 * self.N if self.truncated else 2 * self.N + 1

    def couplings(self) -> np.ndarray:
        """Off-diagonal of the chain, ``t+_0, t-_0, t+_1, ...``."""
        off = np.empty(2 * self.N)
        off[0::2] = self.t_plus
        off[1::2] = self.t_minus
        return off[: self.size - 1]

    def diagonal(self) -> np.ndarray:
        d = np.full(self.size, float(self.mu_minus))
        d[0::2] = self.mu_plus
        return d

    def perturbed(self, which: str, n: int, rel: float) -> "DoublingSolution":
        """Copy with one coupling scaled by ``1 + rel``."""
        if which not in ("t_plus", "t_minus"):
            raise DomainError(f"unknown coupling {which!r}")
        arr = np.array(getattr(self, which))
        if not 0 <= n < len(arr):
            raise IndexError(f"coupling index {n} outside 0..{len(arr) - 1}")
        arr[n] *= 1.0 + rel
        return replace(self, **{which: arr})


def check_nonzero_couplings(sol: DoublingSolution) -> None:
    for name, arr in (("t_plus", sol.t_plus), ("t_minus", sol.t_minus)):
        for n, t in enumerate(arr):
            if sol.truncated and name == "t_minus" and n == sol.N - 1:
                if t != 0:
                    raise DomainError(f"truncation mode needs t_minus[{n}] = 0, got {t!r}")
                continue
            if t == 0 or not math.isfinite(t):
                raise DomainError(f"coupling {name}[{n}] must be finite and nonzero, got {t!r}")


@dataclass(frozen=True)
class ConstraintReport:
    cons1: np.ndarray
    cons2: np.ndarray
    scale: np.ndarray
    tol: float

    @property
    def relative(self) -> np.ndarray:
        return np.maximum(self.cons1, self.cons2) / self.scale

    @property
    def max_residual(self) -> float:
        return float(self.relative.max())

    @property
    def worst_index(self) -> int:
        return int(np.argmax(self.relative))

    @property
    def passed(self) -> bool:
        return bool(np.all(self.relative <= self.tol))

    def failing(self) -> list:
        return [int(n) for n in np.nonzero(self.relative > self.tol)[0]]


def check_constraints(family: SymmetrizedFamily, sol: DoublingSolution, tol: float = 1e-12) -> ConstraintReport:
    """Residuals of ``eps s_n = tau2 t-_n t+_{n+1}`` and
    ``A_n + C_n + tau0 = -tau2 ((t+_n)^2 + (t-_n)^2)`` for ``n = 0..N-1``.

    Under grid closure the ``n = N-1`` coupling term multiplies ``R_N``, which
    vanishes on the grid; its residual is ``max_k |s_{N-1} R_N(lambda_k)|``
    with ``R_N`` normalized by the largest ``|R_n(lambda_k)|``.
    """
    N = family.N
    if sol.N != N:
        raise DomainError(f"solution has {sol.N} couplings per sublattice, family has N={N}")
    check_nonzero_couplings(sol)
    base = family.base
    eps = family.epsilon
    tp_next = np.append(sol.t_plus[1:], 0.0)
    s = family.coupling.copy()
    c1 = np.abs(eps * s - sol.tau2 * sol.t_minus * tp_next)
    if base.closure == "grid":
        R = r_table(family, base.grid, upto=N)
        c1[N - 1] = float(np.max(np.abs(s[N - 1] * R[N]) / np.max(np.abs(R[:N]), axis=0)))
    c2 = np.abs(base.A + base.C[:N] + sol.tau0 + sol.tau2 * (sol.t_plus**2 + sol.t_minus**2))
    scale = np.maximum(1.0, np.abs(base.A) + np.abs(base.C[:N]))
    return ConstraintReport(c1, c2, scale, tol)


@dataclass(frozen=True)
class Eigenvalue:
    """One closed-form eigenvalue: grid index ``k`` and branch ``sign``.

    The zero mode (``x = mu+``) has ``k = None`` and ``sign = 0``.
    """

    value: float
    k: Optional[int]
    sign: int


class QSequence:
    """The doubled sequence ``Q_0 .. Q_{2N}`` of a family and a solution."""

    def __init__(self, family: SymmetrizedFamily, solution: DoublingSolution):
        if family.N != solution.N:
            raise DomainError(f"family has N={family.N}, solution has N={solution.N}")
        self.family = family
        self.solution = solution
        self._labels = None

    @property
    def N(self) -> int:
        return self.family.N

    @property
    def size(self) -> int:
        return self.solution.size

    def pi(self, x):
        sol = self.solution
        x = np.asarray(x, dtype=float)
        return sol.tau2 * (x - sol.mu_plus) * (x - sol.mu_minus) + sol.tau0

    def _grid_index(self, y: float) -> Optional[int]:
        grid = self.family.base.grid
        d = np.abs(grid - y)
        k = int(np.argmin(d))
        if d[k] <= GRID_MATCH * max(1.0, abs(grid[k]), abs(self.solution.tau0)):
            return k
        return None

    def _components(self, x: float, k: Optional[int]) -> np.ndarray:
        """Full vector at grid index ``k``, or the zero mode when ``k`` is None.

        ``R_n`` on the grid comes from the twisted (two-sided) evaluation, so
        localized eigenvectors keep their small components. The zero mode
        uses ``t+_n Q_2n + t-_n Q_{2n+2} = 0``, a product with no cancellation.
        """
        sol = self.solution
        N = self.N
        Q = np.zeros(2 * N + 1)
        if k is None:
            even = np.empty(N + 1)
            even[0] = sol.t_plus[0]
            for n in range(N):
                even[n + 1] = -sol.t_plus[n] * even[n] / sol.t_minus[n] if sol.t_minus[n] != 0 else 0.0
            Q[0::2] = even
            return Q[: self.size]
        R = r_on_grid(self.family, k)
        Q[0::2][:N] = sol.t_plus * R
        Q[2:-1:2] += sol.t_minus[:-1] * R[:-1]
        Q[1::2] = (x - sol.mu_plus) * R
        Q[2 * N] = sol.t_minus[N - 1] * R[N - 1]
        return Q[: self.size]

    def eval_Q(self, n: int, x: float) -> float:
        sol = self.solution
        N = self.N
        if not 0 <= n <= self.size - 1:
            raise IndexError(f"index {n} outside 0..{self.size - 1}")
        x = float(x)
        y = float(self.pi(x))
        m, odd = divmod(n, 2)
        if n < 2 * N:
            R = r_table(self.family, y, upto=m)
            if odd:
                return float((x - sol.mu_plus) * R[m])
            val = sol.t_plus[m] * R[m]
            if m > 0:
                val += sol.t_minus[m - 1] * R[m - 1]
            return float(val)
        if x == sol.mu_plus:
            return float(self._components(x, None)[n])
        k = self._grid_index(y)
        if k is None:
            raise DomainError(f"Q_(2N) at x={x!r} needs pi_x on the grid or x = mu+ (zero mode)")
        return float(self._components(x, k)[n])

    def eigen_labels(self) -> list:
        """Closed-form eigenvalues sorted ascending, with their labels."""
        if self._labels is not None:
            return list(self._labels)
        sol = self.solution
        grid = self.family.base.grid
        mp, mm = sol.mu_plus, sol.mu_minus
        out = []
        if not sol.truncated:
            out.append(Eigenvalue(float(mp) + 0.0, None, 0))
        for k, lam in enumerate(grid):
            s = (lam - sol.tau0) / sol.tau2
            if s < 0:
                if s > -1e-14 * max(1.0, abs(lam), abs(sol.tau0)):
                    s = 0.0
                else:
                    raise DomainError(
                        f"(lambda(k) - tau0)/tau2 = {s!r} < 0 at k={k}; the chain is not real symmetric")
            root = math.sqrt((mp - mm) ** 2 + 4.0 * s)
            for sign in (1, -1):
                out.append(Eigenvalue(0.5 * (mp + mm + sign * root) + 0.0, k, sign))
        out.sort(key=lambda e: (e.value, e.sign))
        self._labels = tuple(out)
        return list(out)

    def eigenvalues(self) -> np.ndarray:
        return np.array([e.value for e in self.eigen_labels()])

    def label_of(self, x: float) -> Eigenvalue:
        labels = self.eigen_labels()
        d = [abs(e.value - x) for e in labels]
        i = int(np.argmin(d))
        if d[i] > SPECTRUM_MATCH * max(1.0, abs(x)):
            raise DomainError(f"x={x!r} is not in the closed-form spectrum")
        return labels[i]

    def eigenvector(self, x) -> np.ndarray:
        """``Q(x)`` for an eigenvalue ``x`` (or an :class:`Eigenvalue` label).

        The vector is unnormalized; ``pi_x`` is replaced by the exact grid
        value of the matching label.
        """
        lab = x if isinstance(x, Eigenvalue) else self.label_of(float(x))
        return self._components(lab.value, lab.k)

    def V(self, n: int, y) -> np.ndarray:
        """``V_n(y) = t+_n R_n(y) + t-_{n-1} R_{n-1}(y)`` for ``n = 0..N``."""
        sol = self.solution
        N = self.N
        if not 0 <= n <= N:
            raise IndexError(f"index {n} outside 0..{N}")
        R = r_table(self.family, y, upto=min(n, N - 1))
        val = sol.t_plus[n] * R[n] if n < N else 0.0
        if n > 0:
            val = val + sol.t_minus[n - 1] * R[n - 1]
        return np.asarray(val)


@dataclass(frozen=True)
class ChristoffelReport:
    v_form: float
    quotient: float
    ratio: float
    tol: float
    dps: Optional[int] = None

    @property
    def max_residual(self) -> float:
        return max(self.v_form, self.quotient, self.ratio)

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol


FLOAT_CONTEXT = SimpleNamespace(c=float, sqrt=math.sqrt, cos=math.cos, pi=math.pi, dps=None)


def mp_context(dps: int) -> SimpleNamespace:
    """Arithmetic namespace for :mod:`mpmath` at ``dps`` digits (set by the caller)."""
    return SimpleNamespace(c=mpmath.mpf, sqrt=mpmath.sqrt, cos=mpmath.cos, pi=mpmath.pi, dps=dps)


@dataclass
class ChainData:
    """Everything the Christoffel identities need, in one arithmetic type."""

    A: list
    C: list
    grid: list
    epsilon: int
    tau0: object
    tau2: object
    t_plus: list
    t_minus: list
    mu_plus: object = 0.0
    mu_minus: object = 0.0
    truncated: bool = False


def _chain_data_from(seq: "QSequence") -> ChainData:
    sol, base = seq.solution, seq.family.base
    return ChainData([float(a) for a in base.A], [float(c) for c in base.C], [float(g) for g in base.grid],
                     seq.family.epsilon, sol.tau0, sol.tau2, [float(t) for t in sol.t_plus],
                     [float(t) for t in sol.t_minus], sol.mu_plus, sol.mu_minus, sol.truncated)


def _christoffel_core(d: ChainData, xs, sqrt) -> tuple:
    N = len(d.t_plus)
    tp, tm, eps = d.t_plus, d.t_minus, d.epsilon
    s = [sqrt(d.A[n] * d.C[n + 1]) for n in range(N - 1)]

    def R_of(y, upto):
        R = [y * 0 + 1]
        for n in range(upto):
            back = eps * s[n - 1] * R[n - 1] if n > 0 else 0
            R.append(((y + d.A[n] + d.C[n]) * R[n] - back) / (eps * s[n]))
        return R

    def V_of(R):
        out = []
        for n in range(N + 1):
            v = tp[n] * R[n] if n < N else 0
            if n > 0:
                v = v + tm[n - 1] * R[n - 1]
            out.append(v)
        return out

    Vt = V_of(R_of(d.tau0, N - 1))
    ratio = 0.0
    for n in range(N - 1):
        lhs, rhs = tp[n] / tm[n], -Vt[n + 1] / Vt[n]
        ratio = max(ratio, float(abs(lhs - rhs) / max(abs(lhs), abs(rhs))))

    v_form = quot = 0.0
    for x in xs:
        y = d.tau2 * (x - d.mu_plus) * (x - d.mu_minus) + d.tau0
        R = R_of(y, N - 1)
        V = V_of(R)
        Qe = [tp[n] * R[n] + (tm[n - 1] * R[n - 1] if n > 0 else 0) for n in range(N)]
        scale = max(abs(q) for q in Qe)
        v_form = max(v_form, float(max(abs(Qe[n] - V[n]) for n in range(N)) / scale))
        if N >= 2:
            pref = d.tau2 * (x - d.mu_plus) / (y - d.tau0)
            lhs = [(x - d.mu_plus) * R[n] for n in range(N - 1)]
            rhs = [pref * tm[n] * (V[n + 1] - Vt[n + 1] / Vt[n] * V[n]) for n in range(N - 1)]
            scale = max(abs(v) for v in lhs)
            quot = max(quot, float(max(abs(a - b) for a, b in zip(lhs, rhs)) / scale))
    # n = N-1 at the grid preimages, in its V_N + (t+/t-) V_(N-1) form
    if not d.truncated:
        for lam in d.grid:
            if lam == d.tau0:
                continue
            root = sqrt((d.mu_plus - d.mu_minus) ** 2 + 4 * (lam - d.tau0) / d.tau2)
            for sign in (1, -1):
                x = (d.mu_plus + d.mu_minus + sign * root) / 2
                if x == d.mu_plus:
                    continue
                R = R_of(lam, N - 1)
                V = V_of(R)
                lhs = (x - d.mu_plus) * R[N - 1]
                rhs = d.tau2 * tm[N - 1] * (x - d.mu_plus) / (lam - d.tau0) * (V[N] + tp[N - 1] / tm[N - 1] * V[N - 1])
                scale = max(abs((x - d.mu_plus) * r) for r in R)
                quot = max(quot, float(abs(lhs - rhs) / scale))
    return float(v_form), float(quot), float(ratio)


def christoffel_identity_check(
    seq: "QSequence",
    sample_points: Sequence[float],
    tol: float = 1e-10,
    exact: Optional[Callable] = None,
    max_dps: int = 1600,
) -> ChristoffelReport:
    """Check the kernel-polynomial form of the doubled sequence.

    (a) ``Q_{2n}(x) = V_n(pi_x)`` for ``n = 0..N-1``;
    (b) ``Q_{2n+1}(x) = tau2 t-_n (x-mu+) / (pi_x - tau0)
    (V_{n+1}(pi_x) - V_{n+1}(tau0)/V_n(tau0) V_n(pi_x))``;
    (c) ``t+_n / t-_n = -V_{n+1}(tau0) / V_n(tau0)``.

    (b) and (c) use the ``n = N-1`` recurrence, so off the grid they are
    checked for ``n <= N-2``; at ``n = N-1`` the quotient is checked at the
    grid preimages in its ``V_N + (t+/t-) V_(N-1)`` form.

    ``V_n(tau0)`` is typically a decaying combination of growing ``R_n``, so
    in double precision (c) loses accuracy geometrically in ``n``. When
    ``exact(ctx)`` is given it must return :class:`ChainData` built in the
    arithmetic of ``ctx``; the identities are then evaluated with
    :mod:`mpmath`, doubling the precision until the residuals settle.
    The working precision is process-global in :mod:`mpmath`, so this path
    must not run concurrently in threads of one process.
    """
    xs = [float(x) for x in np.asarray(sample_points, dtype=float).ravel()]
    sol = seq.solution
    for x in xs:
        y = sol.tau2 * (x - sol.mu_plus) * (x - sol.mu_minus) + sol.tau0
        if abs(y - sol.tau0) <= 1e-12 * max(1.0, abs(sol.tau0)):
            raise ZeroDivisionError(f"sample point {x!r} hits pi_x = tau0")
    if exact is None:
        try:
            return ChristoffelReport(*_christoffel_core(_chain_data_from(seq), xs, math.sqrt), tol)
        except ZeroDivisionError:
            # V_n(tau0) underflowed or cancelled to zero in double precision
            return ChristoffelReport(math.inf, math.inf, math.inf, tol)
    prev = None
    dps = 50
    while True:
        try:
            with mpmath.workdps(dps):
                ctx = mp_context(dps)
                res = _christoffel_core(exact(ctx), [mpmath.mpf(x) for x in xs], mpmath.sqrt)
        except ZeroDivisionError:
            # V_n(tau0) cancelled to exactly zero: not enough digits yet
            if dps >= max_dps:
                return ChristoffelReport(math.inf, math.inf, math.inf, tol, dps)
            prev, dps = None, dps * 2
            continue
        if prev is not None and all(abs(a - b) <= 1e-3 * tol for a, b in zip(res, prev)):
            return ChristoffelReport(*res, tol, dps)
        if dps >= max_dps:
            return ChristoffelReport(*res, tol, dps)
        prev = res
        dps *= 2
