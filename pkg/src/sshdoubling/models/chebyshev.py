"""Homogeneous SSH chain from doubled Chebyshev polynomials of the second kind."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..doubling import FLOAT_CONTEXT, ChainData, DoublingSolution
from ..errors import DomainError
from ..recurrence import RecurrenceFamily, SymmetrizedFamily
from ..specialfn import terminating_series
from .base import SSHModel


@dataclass(frozen=True)
class ChebyshevSSHParams:
    N: int
    delta: float
    mu_plus: float = 0.0
    mu_minus: float = 0.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"N must be a positive integer, got {self.N!r}")
        if not abs(self.delta) < 1:
            raise DomainError("delta must satisfy |delta| < 1")


def chebyshev_u(n: int, x: float) -> float:
    """``U_n(x) = (n+1) 2F1(-n, n+2; 3/2; (1-x)/2)``."""
    if n < 0:
        return 0.0
    return (n + 1) * terminating_series(n, lambda c: ((c(n) + 2,), (c(1.5),), (1 - c(x)) / 2))


def chebyshev_family(N: int) -> RecurrenceFamily:
    """``P_n(x) = U_n((x+2)/2)`` truncated at ``N``; ``A_n = C_n = 1``.

    The grid is the zero set of ``P_N``: ``2 cos((k+1) pi/(N+1)) - 2``.
    """
    theta = np.arange(1, N + 1) * math.pi / (N + 1)
    grid = 2 * np.cos(theta) - 2
    weight = 2 * np.sin(theta) ** 2 / (N + 1)
    return RecurrenceFamily(
        A=np.ones(N), C=np.ones(N + 1), grid=grid, weight=weight, norm=np.ones(N),
        label=f"chebyshev-U(N={N})", closure="grid",
        explicit=lambda n, x: chebyshev_u(n, (x + 2) / 2),
    )


class ChebyshevSSHModel(SSHModel):
    """Uniform couplings ``t+- = (1 +- delta)/2``, optional site energies ``mu+-``.

    With ``mu+ = mu- = 0`` this is the standard open SSH chain on ``2N+1``
    sites; otherwise even sites carry ``mu+`` and odd sites ``mu-``.
    """

    def __init__(self, params: ChebyshevSSHParams):
        self.p = params
        N, d = params.N, params.delta
        self.name = "ssh" if (params.mu_plus == 0 and params.mu_minus == 0) else "ssh-mu"
        self.params = {"N": N, "delta": d, "mu_plus": params.mu_plus, "mu_minus": params.mu_minus}
        self.family = SymmetrizedFamily(chebyshev_family(N), +1)
        d = self.chain_data()
        self.solution = DoublingSolution(
            epsilon=1, tau0=d.tau0, tau2=d.tau2, t_plus=d.t_plus, t_minus=d.t_minus,
            mu_plus=params.mu_plus, mu_minus=params.mu_minus,
        )
        self._finish()

    def chain_data(self, ctx=FLOAT_CONTEXT) -> ChainData:
        c = ctx.c
        N, d = self.p.N, c(self.p.delta)
        g = 1 - d * d
        return ChainData(
            A=[c(1)] * N, C=[c(1)] * (N + 1),
            grid=[2 * ctx.cos((k + 1) * ctx.pi / (N + 1)) - 2 for k in range(N)],
            epsilon=1, tau0=-2 - 2 * (1 + d * d) / g, tau2=4 / g,
            t_plus=[(1 + d) / 2] * N, t_minus=[(1 - d) / 2] * N,
            mu_plus=c(self.p.mu_plus), mu_minus=c(self.p.mu_minus),
        )

    def _theta(self, k: int) -> float:
        return (k + 1) * math.pi / (self.N + 1)

    def closed_form_spectrum(self) -> np.ndarray:
        N, d = self.N, self.p.delta
        mp, mm = self.p.mu_plus, self.p.mu_minus
        c = np.cos(np.arange(1, N + 1) * math.pi / (N + 1))
        if mp == 0 and mm == 0:
            x = np.sqrt((1 - d * d) * c / 2 + (1 + d * d) / 2)
            vals = np.concatenate([[0.0], x, -x])
        else:
            r = np.sqrt((mp - mm) ** 2 + 2 * (1 + d * d) + 2 * (1 - d * d) * c)
            # the unpaired level sits at mu+ (at 0 only when mu+ = 0)
            vals = np.concatenate([[mp], (mp + mm + r) / 2, (mp + mm - r) / 2])
        return np.sort(vals) + 0.0

    def _u(self, n: int, theta: float) -> float:
        if n < 0:
            return 0.0
        return math.sin((n + 1) * theta) / math.sin(theta)

    def closed_form_eigvec_even(self, n: int, k: Optional[int]) -> float:
        d = self.p.delta
        tp, tm = (1 + d) / 2, (1 - d) / 2
        if k is None:
            return tp * ((d + 1) / (d - 1)) ** n
        th = self._theta(k)
        return (tp * self._u(n, th) if n < self.N else 0.0) + tm * self._u(n - 1, th)

    def closed_form_eigvec_odd(self, n: int, k: Optional[int], sign: int) -> float:
        if k is None:
            return 0.0
        x = self._value(k, sign)
        return (x - self.p.mu_plus) * self._u(n, self._theta(k))

    def _value(self, k: int, sign: int) -> float:
        d = self.p.delta
        mp, mm = self.p.mu_plus, self.p.mu_minus
        r = math.sqrt((mp - mm) ** 2 + 2 * (1 + d * d) + 2 * (1 - d * d) * math.cos(self._theta(k)))
        return (mp + mm + sign * r) / 2

    def eigvec_norm(self, k: Optional[int], sign: int = 1) -> float:
        """Squared norm from the trigonometric form of ``U_n``.

        For ``x != mu+`` the sublattice norms are tied by
        ``(x - mu+) |Q_even|^2 = (x - mu-) |Q_odd|^2``, which gives
        ``(x - mu+)(2x - mu+ - mu-)(N+1) / (2 sin^2 theta_k)``. The unpaired
        mode is a geometric series with ratio ``(1+delta)/(delta-1)``.
        """
        d = self.p.delta
        N = self.N
        if k is None:
            r2 = ((1 + d) / (d - 1)) ** 2
            return ((1 + d) / 2) ** 2 * sum(r2**n for n in range(N + 1))
        x = self._value(k, sign)
        mp, mm = self.p.mu_plus, self.p.mu_minus
        return (x - mp) * (2 * x - mp - mm) * (N + 1) / (2 * math.sin(self._theta(k)) ** 2)

    def model_checks(self) -> list:
        # finite Chebyshev family against its hypergeometric form
        fam = self.family.base
        from ..recurrence import p_table

        P = p_table(fam, fam.grid)
        worst = 0.0
        for k, y in enumerate(fam.grid):
            col = [fam.explicit(n, y) for n in range(self.N)]
            worst = max(worst, float(np.max(np.abs(P[:, k] - col)) / max(1.0, np.max(np.abs(col)))))
        return [("hypergeometric_form", worst, "hypergeometric")]


def chebyshev_model(params: ChebyshevSSHParams) -> ChebyshevSSHModel:
    return ChebyshevSSHModel(params)
