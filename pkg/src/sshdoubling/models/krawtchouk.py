"""Inhomogeneous SSH chain from doubled Krawtchouk polynomials."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from ..doubling import FLOAT_CONTEXT, ChainData, DoublingSolution
from ..errors import DomainError
from ..recurrence import RecurrenceFamily, SymmetrizedFamily
from ..specialfn import LogReal, terminating_series
from .base import SSHModel


@dataclass(frozen=True)
class KrawtchoukSSHParams:
    N: int
    p: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"N must be a positive integer, got {self.N!r}")
        if not 0 < self.p < 1:
            raise DomainError(f"p must lie in (0, 1), got {self.p!r}")


@lru_cache(maxsize=65536)
def krawtchouk(n: int, x: float, p: float, N: int) -> float:
    """``K_n(x; p, N) = 2F1(-n, -x; -N; 1/p)`` for ``0 <= n <= N``."""
    if n < 0:
        return 0.0
    if n > N:
        raise IndexError(f"degree {n} exceeds N={N}")
    if n == 0:
        return 1.0
    return terminating_series(n, lambda c: ((-c(x),), (-c(N),), 1 / c(p)))


def _log_binom(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def krawtchouk_family(N: int, p: float) -> RecurrenceFamily:
    """``P_n(y) = K_n(-y; p, N-1)`` on the grid ``y = -k``, ``k = 0..N-1``."""
    M = N - 1
    A = [p * (M - n) for n in range(N)]
    C = [n * (1 - p) for n in range(N)]
    grid = -np.arange(N, dtype=float)
    lp, lq = math.log(p), math.log1p(-p)
    weight = [LogReal(1, _log_binom(M, k) + k * lp + (M - k) * lq) for k in range(N)]
    # (-1)^n n!/(-M)_n ((1-p)/p)^n = ((1-p)/p)^n / binom(M, n)
    norm = [LogReal(1, n * (lq - lp) - _log_binom(M, n)) for n in range(N)]
    return RecurrenceFamily(A, C, grid, weight, norm, label=f"krawtchouk(p={p}, N={M})",
                            explicit=lambda n, y: krawtchouk(n, -y, p, M))


class KrawtchoukSSHModel(SSHModel):
    """Couplings ``t+_n = sqrt(p(N-n))``, ``t-_n = sqrt((1-p)(n+1))``; spectrum ``0, +-sqrt(k+1)``."""

    name = "krawtchouk"

    def __init__(self, params: KrawtchoukSSHParams):
        self.p = params
        N, p = params.N, params.p
        self.params = {"N": N, "p": p}
        self.family = SymmetrizedFamily(krawtchouk_family(N, p), -1)
        d = self.chain_data()
        self.solution = DoublingSolution(epsilon=-1, tau0=d.tau0, tau2=d.tau2, t_plus=d.t_plus, t_minus=d.t_minus)
        self._finish()

    def chain_data(self, ctx=FLOAT_CONTEXT) -> ChainData:
        c, sqrt = ctx.c, ctx.sqrt
        N, p = self.p.N, c(self.p.p)
        return ChainData(
            A=[p * (N - n - 1) for n in range(N)], C=[n * (1 - p) for n in range(N)],
            grid=[c(-k) for k in range(N)], epsilon=-1, tau0=c(1), tau2=c(-1),
            t_plus=[sqrt(p * (N - n)) for n in range(N)], t_minus=[sqrt((1 - p) * (n + 1)) for n in range(N)],
        )

    def display_couplings(self):
        """``(u_n sqrt(1+delta), u_{N-n-1} sqrt(1-delta))`` with ``delta = 2p-1``, ``u_i = sqrt((N-i)/2)``."""
        N, d = self.N, 2 * self.p.p - 1
        u = np.sqrt((N - np.arange(N)) / 2)
        return u * math.sqrt(1 + d), u[::-1] * math.sqrt(1 - d)

    def closed_form_spectrum(self) -> np.ndarray:
        x = np.sqrt(np.arange(1, self.N + 1, dtype=float))
        return np.sort(np.concatenate([[0.0], x, -x]))

    def _even_amp(self, n: int) -> float:
        N, p = self.N, self.p.p
        return math.exp(0.5 * (math.log(N) + (n + 1) * math.log(p) - n * math.log1p(-p) + _log_binom(N, n)))

    def closed_form_eigvec_even(self, n: int, k: Optional[int]) -> float:
        N, p = self.N, self.p.p
        if not 0 <= n <= N:
            raise IndexError(f"even index {n} outside 0..{N}")
        amp = (-1) ** n * self._even_amp(n)
        if k is None:
            return amp
        return amp * krawtchouk(n, k + 1, p, N)

    def closed_form_eigvec_odd(self, n: int, k: Optional[int], sign: int) -> float:
        N, p = self.N, self.p.p
        if not 0 <= n <= N - 1:
            raise IndexError(f"odd index {n} outside 0..{N - 1}")
        if k is None:
            return 0.0
        amp = math.exp(0.5 * (math.log(k + 1) + n * (math.log(p) - math.log1p(-p)) + _log_binom(N - 1, n)))
        return sign * (-1) ** n * amp * krawtchouk(n, k, p, N - 1)

    def eigvec_norm(self, k: Optional[int], sign: int = 1) -> float:
        N, p = self.N, self.p.p
        if k is None:
            return p * N / (1 - p) ** N
        if not 0 <= k <= N - 1:
            raise IndexError(f"k={k} outside 0..{N - 1}")
        return 2 * (k + 1) * math.exp((k - N + 1) * math.log1p(-p) - k * math.log(p) - _log_binom(N - 1, k))

    def dbs_residual(self) -> float:
        """Worst relative residual of the backward-shift dual relation.

        ``(1-p) n K_{n-1}(k;p,N) - p(N+1-n) K_n(k;p,N) + p(N+1) K_n(k+1;p,N+1) = 0``
        for ``0 <= n, k <= N``, scaled by the largest term.
        """
        N, p = self.N, self.p.p
        worst = 0.0
        for n in range(N + 1):
            for k in range(N + 1):
                terms = [(1 - p) * n * krawtchouk(n - 1, k, p, N),
                         -p * (N + 1 - n) * krawtchouk(n, k, p, N),
                         p * (N + 1) * krawtchouk(n, k + 1, p, N + 1)]
                scale = max(abs(t) for t in terms)
                worst = max(worst, abs(math.fsum(terms)) / scale)
        return worst

    def self_duality_residual(self) -> float:
        """``max |K_n(x) - K_x(n)| / max(1, |K_n(x)|)`` over ``0 <= n, x <= N``."""
        N, p = self.N, self.p.p
        worst = 0.0
        for n in range(N + 1):
            for x in range(n + 1, N + 1):
                a, b = krawtchouk(n, x, p, N), krawtchouk(x, n, p, N)
                worst = max(worst, abs(a - b) / max(1.0, abs(a)))
        return worst

    def model_checks(self) -> list:
        return [("contiguity_dbs", self.dbs_residual(), "contiguity"),
                ("self_duality", self.self_duality_residual(), "self_duality")]


def krawtchouk_model(params: KrawtchoukSSHParams) -> KrawtchoukSSHModel:
    return KrawtchoukSSHModel(params)
