"""q-Racah polynomials and the two chains built by doubling them.

Parameter tuples ``rho = (alpha, beta, gamma, delta)`` are stored as
monomials ``c q^m`` so that products such as ``gamma q^{n+1}`` with
``gamma = q^{-N}`` hit exactly one when they should, and so that the
hypergeometric sums can be rebuilt at higher precision from the raw inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from ..doubling import FLOAT_CONTEXT, ChainData, DoublingSolution
from ..errors import AdmissibilityError, DomainError, ZeroDenominatorError
from ..recurrence import RecurrenceFamily, SymmetrizedFamily
from ..specialfn import ONE, LogReal, q_pochhammer, q_pochhammer_inf_ratio, terminating_series
from .base import SSHModel


@dataclass(frozen=True)
class Mono:
    """The number ``coef * q**qpow``.

    Products and quotients keep their float factors apart (``num``/``den``)
    so that :meth:`at` multiplies them in the caller's arithmetic.
    """

    coef: float
    qpow: int = 0
    num: tuple = ()
    den: tuple = ()

    def _factors(self):
        return ((self.coef,), ()) if not (self.num or self.den) else (self.num, self.den)

    def value(self, cast=float):
        num, den = self._factors()
        out = cast(1)
        for f in num:
            out = out * cast(f)
        for f in den:
            out = out / cast(f)
        return out

    def at(self, q, shift: int = 0, cast=float):
        return self.value(cast) * cast(q) ** (self.qpow + shift)

    def __mul__(self, other: "Mono") -> "Mono":
        (a, b), (c, d) = self._factors(), other._factors()
        return Mono(self.coef * other.coef, self.qpow + other.qpow, a + c, b + d)

    def __truediv__(self, other: "Mono") -> "Mono":
        (a, b), (c, d) = self._factors(), other._factors()
        return Mono(self.coef / other.coef, self.qpow - other.qpow, a + d, b + c)


def _one_minus(m: Mono, q: float, shift: int = 0, c=float):
    """``1 - m q^shift``, exactly zero when ``m q^shift`` is the unit monomial."""
    if m.value() == 1.0 and m.qpow + shift == 0:
        return c(0)
    return c(1) - m.at(q, shift, c)


def dual(rho: tuple) -> tuple:
    """``(alpha, beta, gamma, delta) -> (gamma, delta, alpha, beta)``."""
    a, b, g, d = rho
    return (g, d, a, b)


def rho_values(rho: tuple, q: float) -> tuple:
    return tuple(m.at(q) for m in rho)


def qracah_A(n: int, rho: tuple, q: float, c=float):
    a, b, g, d = rho
    ab, bd = a * b, b * d
    num = (_one_minus(g, q, n + 1, c) * _one_minus(a, q, n + 1, c)
           * _one_minus(ab, q, n + 1, c) * _one_minus(bd, q, n + 1, c))
    den = _one_minus(ab, q, 2 * n + 1, c) * _one_minus(ab, q, 2 * n + 2, c)
    if den == 0:
        raise ZeroDenominatorError(f"A_{n}: 1 - alpha beta q^k vanishes")
    return num / den


def qracah_C(n: int, rho: tuple, q: float, c=float):
    a, b, g, d = rho
    ab = a * b
    cq = c(q)
    num = (cq * (1 - cq**n) * _one_minus(b, q, n, c) * (g.at(q, 0, c) - ab.at(q, n, c))
           * (d.at(q, 0, c) - a.at(q, n, c)))
    den = _one_minus(ab, q, 2 * n, c) * _one_minus(ab, q, 2 * n + 1, c)
    if den == 0:
        raise ZeroDenominatorError(f"C_{n}: 1 - alpha beta q^k vanishes")
    return num / den


def qracah_grid(x: int, rho: tuple, q: float, c=float):
    """``-(1 - q^{-x})(1 - gamma delta q^{x+1})``."""
    g, d = rho[2], rho[3]
    return -(1 - c(q) ** (-x)) * _one_minus(g * d, q, x + 1, c)


def _qp(m: Mono, q: float, k: int, shift: int = 0) -> LogReal:
    return q_pochhammer(m.at(q, shift), q, k)


def qracah_weight(x: int, rho: tuple, q: float) -> LogReal:
    """Orthogonality weight ``w(x; rho)``."""
    a, b, g, d = rho
    gd = g * d
    num = _qp(a, q, x, 1) * _qp(b * d, q, x, 1) * _qp(g, q, x, 1) * _qp(gd, q, x, 1)
    num = num * LogReal.from_float(_one_minus(gd, q, 2 * x + 1))
    den = (q_pochhammer(q, q, x) * _qp(gd / a, q, x, 1) * _qp(g / b, q, x, 1) * _qp(d, q, x, 1)
           * LogReal.from_float((a * b).at(q, 1)) ** x * LogReal.from_float(_one_minus(gd, q, 1)))
    return num / den


def qracah_norm(n: int, rho: tuple, q: float) -> LogReal:
    """``h_n = sum_x w(x) P_n(lambda_x)^2`` in closed form (infinite-product prefactor cached)."""
    a, b, g, d = rho
    ab, gd = a * b, g * d
    pref = q_pochhammer_inf_ratio(
        [(g / ab).at(q), (d / a).at(q), 1.0 / b.at(q), gd.at(q, 2)],
        [1.0 / ab.at(q, 1), (gd / a).at(q, 1), (g / b).at(q, 1), d.at(q, 1)],
        q,
    )
    out = pref * LogReal.from_float(_one_minus(ab, q, 1)) * LogReal.from_float(gd.at(q, 1)) ** n
    out = out / LogReal.from_float(_one_minus(ab, q, 2 * n + 1))
    out = out * q_pochhammer(q, q, n) * _qp(ab / g, q, n, 1) * _qp(a / d, q, n, 1) * _qp(b, q, n, 1)
    return out / (_qp(a, q, n, 1) * _qp(ab, q, n, 1) * _qp(b * d, q, n, 1) * _qp(g, q, n, 1))


@lru_cache(maxsize=1 << 16)
def qracah_poly(n: int, x: int, rho: tuple, q: float) -> float:
    """``P_n(lambda_x; rho) = 4phi3(q^-n, ab q^{n+1}, q^-x, gd q^{x+1}; aq, bdq, gq | q; q)``.

    The series is symmetric in ``n`` and ``x`` apart from the parameters, so
    it is cut at ``min(n, x)`` where one of the two factors terminates.
    """
    if n < 0:
        return 0.0
    if x < 0:
        raise DomainError(f"grid index must be non-negative, got {x}")
    a, b, g, d = rho
    ab, bd, gd = a * b, b * d, g * d
    m, other = (n, x) if n <= x else (x, n)
    extra = ab if n <= x else gd
    extra_shift = n + 1 if n <= x else x + 1
    # the other numerator pair: q^-other and the partner of the cut one
    partner = gd if n <= x else ab
    partner_shift = x + 1 if n <= x else n + 1

    def params(c):
        cq = c(q)
        nums = (extra.value(c) * cq ** (extra.qpow + extra_shift),
                cq ** (-other),
                partner.value(c) * cq ** (partner.qpow + partner_shift))
        dens = (a.value(c) * cq ** (a.qpow + 1), bd.value(c) * cq ** (bd.qpow + 1), g.value(c) * cq ** (g.qpow + 1))
        return nums, dens, cq

    return terminating_series(m, params, q=q)


def qracah_family(rho: tuple, q: float, size: int, label: str = "") -> RecurrenceFamily:
    """The first ``size`` q-Racah polynomials on grid points ``x = 0..size-1``."""
    A = [qracah_A(n, rho, q) for n in range(size)]
    if abs(A[-1]) > 1e-12 * max(1.0, max(abs(v) for v in A)):
        raise DomainError(f"A_(size-1) = {A[-1]!r} does not vanish; rho does not terminate at size {size}")
    A[-1] = 0.0
    C = [qracah_C(n, rho, q) for n in range(size)]
    grid = [qracah_grid(x, rho, q) for x in range(size)]
    weight = [qracah_weight(x, rho, q) for x in range(size)]
    norm = [qracah_norm(n, rho, q) for n in range(size)]
    return RecurrenceFamily(A, C, grid, weight, norm, label=label,
                            explicit=lambda n, y: _poly_at_value(n, y, rho, q, grid))


def _poly_at_value(n, y, rho, q, grid):
    k = int(np.argmin(np.abs(np.asarray(grid) - y)))
    if abs(grid[k] - y) > 1e-9 * max(1.0, abs(y)):
        raise DomainError("the 4phi3 form is only evaluated on grid points")
    return qracah_poly(n, k, rho, q)


def sign_product(values) -> int:
    s = 1
    for v in values:
        if v < 0:
            s = -s
        elif v == 0:
            return 0
    return s


@dataclass(frozen=True)
class QRacahSSHParams:
    N: int
    q: float
    alpha: float
    beta: float
    delta: float
    case: str = "I"

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"N must be a positive integer, got {self.N!r}")
        if not 0 < self.q < 1:
            raise DomainError(f"q must satisfy 0 < q < 1, got {self.q!r}")
        if self.case not in ("I", "II"):
            raise DomainError(f"case must be 'I' or 'II', got {self.case!r}")
        for name in ("alpha", "beta", "delta"):
            v = getattr(self, name)
            if v == 0 or not math.isfinite(v):
                raise DomainError(f"{name} must be finite and nonzero, got {v!r}")


def _positive(value: float, what: str) -> float:
    if not value > 0:
        raise AdmissibilityError(f"{what} = {value!r} is not positive")
    return value


class QRacahSSHModel(SSHModel):
    """Chain from doubled q-Racah polynomials (case I: odd length; case II: truncated, even length)."""

    relative_spectrum = True

    def __init__(self, params: QRacahSSHParams):
        self.p = params
        N, q = params.N, params.q
        al, be, de = params.alpha, params.beta, params.delta
        self.name = "qracah1" if params.case == "I" else "qracah2"
        self.params = {"N": N, "q": q, "alpha": al, "beta": be, "delta": de, "case": params.case}
        A, B, D = Mono(al), Mono(be), Mono(de)
        if params.case == "I":
            self.rho = (A, Mono(be, 1), Mono(1.0, -N), Mono(de, -1))
            self.rho_bar = (A, B, Mono(1.0, -N - 1), D)
        else:
            self.rho = (A, Mono(be, 1), Mono(1.0, -N), D)
            self.rho_bar = (A, B, Mono(1.0, -N), D)
        self.rho_d = dual(self.rho)
        self.rho_bar_d = dual(self.rho_bar)
        try:
            base = qracah_family(self.rho, q, N, label=f"q-racah {params.case}")
            self.family = SymmetrizedFamily(base, -1 if params.case == "I" else 1)
            self.solution = self._solution()
            self._finish()
            self._check_closed_form_radicands()
            self.eigen_labels()
        except (ZeroDenominatorError, DomainError) as exc:
            if isinstance(exc, AdmissibilityError):
                raise
            raise AdmissibilityError(f"inadmissible q-Racah parameters: {exc}") from exc

    # -- couplings -------------------------------------------------------
    def chain_data(self, ctx=FLOAT_CONTEXT) -> ChainData:
        """Recurrence coefficients, grid and couplings in the arithmetic of ``ctx``."""
        c, sqrt = ctx.c, ctx.sqrt
        N = self.p.N
        q, al, be, de = c(self.p.q), c(self.p.alpha), c(self.p.beta), c(self.p.delta)
        A = [qracah_A(n, self.rho, self.p.q, c) for n in range(N)]
        A[N - 1] = c(0)
        C = [qracah_C(n, self.rho, self.p.q, c) for n in range(N)]
        grid = [qracah_grid(x, self.rho, self.p.q, c) for x in range(N)]
        tp, tm = [], []
        if self.p.case == "I":
            for n in range(N):
                r = ((1 - q ** (n - N)) * (1 - al * be * q ** (n + 1)) * (1 - be * q ** (n + 1))
                     * (de - al * q ** (n + 1))
                     / ((1 - al * be * q ** (2 * n + 1)) * (1 - al * be * q ** (2 * n + 2))))
                tp.append(sqrt(_positive(r, f"t+_{n} radicand")))
                r = ((1 - be * de * q ** (n + 1)) * (1 - q ** (n + 1)) * (1 - al * be * q ** (n + N + 2))
                     * (1 - al * q ** (n + 1))
                     / (q**N * (1 - al * be * q ** (2 * n + 2)) * (1 - al * be * q ** (2 * n + 3))))
                tm.append(sqrt(_positive(r, f"t-_{n} radicand")))
            return ChainData(A, C, grid, -1, -(1 - de) * (1 - q ** (-N)), c(-1), tp, tm)
        for n in range(N):
            r = ((1 - be * q ** (n + 1)) * (1 - al * be * q ** (n + 1)) * (1 - al * be * q ** (n + N + 1))
                 * (1 - be * de * q ** (n + 1))
                 / ((1 - al * be * q ** (2 * n + 1)) * (1 - al * be * q ** (2 * n + 2))))
            tp.append(sqrt(_positive(r, f"t+_{n} radicand")))
            if n == N - 1:
                # (1 - q^{n-N+1}) vanishes: the last site is dropped
                tm.append(c(0))
                continue
            r = (q ** (N - 1) * (1 - q ** (n - N + 1)) * (1 - al * q ** (n + 1)) * (1 - q ** (n + 1))
                 * (de - al * q ** (n + 1))
                 / ((1 - al * be * q ** (2 * n + 2)) * (1 - al * be * q ** (2 * n + 3))))
            tm.append(-q * be * sqrt(_positive(r, f"t-_{n} radicand")))
        tau0 = -(1 - q ** (-N) / be) * (1 - q * be * de)
        return ChainData(A, C, grid, 1, tau0, -(q ** (-N)) / be, tp, tm, truncated=True)

    def _solution(self) -> DoublingSolution:
        d = self.chain_data()
        return DoublingSolution(d.epsilon, d.tau0, d.tau2, d.t_plus, d.t_minus, truncated=d.truncated)

    # -- closed forms ----------------------------------------------------
    def _spectrum_radicand(self, k: int) -> float:
        N, q = self.p.N, self.p.q
        be, de = self.p.beta, self.p.delta
        if self.p.case == "I":
            return (1 - q ** (k - N)) * (de - q ** (-k))
        return (1 - de * be * q ** (k + 1)) * (1 - be * q ** (N - k))

    def _kbar(self) -> float:
        N, q = self.p.N, self.p.q
        al, be, de = self.p.alpha, self.p.beta, self.p.delta
        if self.p.case == "I":
            return (1 - be * q) * (de - al * q) * (1 - q ** (-N)) / (1 - al * be * q * q)
        return (1 - be * q) * (1 - al * be * q ** (N + 1)) * (1 - be * de * q) / (1 - al * be * q * q)

    def _even_len(self) -> int:
        return self.p.N if self.p.case == "II" else self.p.N + 1

    def _check_closed_form_radicands(self):
        _positive(self._kbar(), "even-component prefactor")
        for n in range(self._even_len()):
            w = qracah_weight(n, self.rho_bar_d, self.p.q)
            if w.sign <= 0:
                raise AdmissibilityError(f"w({n}; dual of rho-bar) is not positive")
        for n in range(self.p.N):
            if qracah_weight(n, self.rho_d, self.p.q).sign <= 0:
                raise AdmissibilityError(f"w({n}; dual of rho) is not positive")
        for k in range(self.p.N):
            _positive(self._spectrum_radicand(k), f"spectrum radicand at k={k}")

    def closed_form_spectrum(self) -> np.ndarray:
        x = np.sqrt([self._spectrum_radicand(k) for k in range(self.p.N)])
        vals = np.concatenate([x, -x]) if self.p.case == "II" else np.concatenate([[0.0], x, -x])
        return np.sort(vals)

    def nu(self, n: int, bar: bool = False) -> int:
        """Number of negative ``A_k`` with ``k < n`` (of rho-bar when ``bar``)."""
        return int(self._negative_A(bar)[:n].sum())

    def _negative_A(self, bar: bool) -> np.ndarray:
        cache = self.__dict__.setdefault("_neg_cache", {})
        if bar not in cache:
            rho = self.rho_bar if bar else self.rho
            cache[bar] = np.array([qracah_A(k, rho, self.p.q) < 0 for k in range(self._even_len())], dtype=int)
        return cache[bar]

    def _sign(self, n: int, bar: bool) -> int:
        return self.family.epsilon ** n * (-1) ** self.nu(n, bar)

    def closed_form_eigvec_even(self, n: int, k: Optional[int]) -> float:
        if not 0 <= n < self._even_len():
            raise IndexError(f"even index {n} outside 0..{self._even_len() - 1}")
        if k is None:
            if self.p.case == "II":
                raise DomainError("the truncated chain has no zero mode")
            x = self.p.N
        else:
            x = k
        amp = (LogReal.from_float(self._kbar()) * qracah_weight(n, self.rho_bar_d, self.p.q)).sqrt()
        return self._sign(n, True) * float(amp) * qracah_poly(n, x, self.rho_bar, self.p.q)

    def closed_form_eigvec_odd(self, n: int, k: Optional[int], sign: int) -> float:
        if not 0 <= n < self.p.N:
            raise IndexError(f"odd index {n} outside 0..{self.p.N - 1}")
        if k is None:
            return 0.0
        amp = (LogReal.from_float(self._spectrum_radicand(k)) * qracah_weight(n, self.rho_d, self.p.q)).sqrt()
        return sign * self._sign(n, False) * float(amp) * qracah_poly(n, k, self.rho, self.p.q)

    def eigvec_norm(self, k: Optional[int], sign: int = 1) -> float:
        q = self.p.q
        if k is None:
            if self.p.case == "II":
                raise DomainError("the truncated chain has no zero mode")
            return float(LogReal.from_float(self._kbar()) * qracah_norm(self.p.N, self.rho_bar_d, q))
        if not 0 <= k < self.p.N:
            raise IndexError(f"k={k} outside 0..{self.p.N - 1}")
        return float(LogReal.from_float(2 * self._spectrum_radicand(k)) * qracah_norm(k, self.rho_d, q))

    # -- identities ------------------------------------------------------
    def duality_residuals(self) -> tuple:
        """``(duality, dual weight)`` worst relative deviations over ``0 <= n, x <= N-1``."""
        N, q = self.p.N, self.p.q
        worst = 0.0
        for n in range(N):
            for x in range(N):
                a = qracah_poly(n, x, self.rho, q)
                b = qracah_poly(x, n, self.rho_d, q)
                scale = max(abs(a), abs(b))
                if scale > 0:
                    worst = max(worst, abs(a - b) / scale)
        wworst = 0.0
        ratio = ONE
        for n in range(N):
            if n > 0:
                ratio = ratio * LogReal.from_float(qracah_A(n - 1, self.rho, q) / qracah_C(n, self.rho, q))
            w = qracah_weight(n, self.rho_d, q)
            if w.sign != ratio.sign:
                wworst = max(wworst, 2.0)
            else:
                wworst = max(wworst, abs(math.expm1(w.log_magnitude - ratio.log_magnitude)))
        return worst, wworst

    def nu_residual(self) -> float:
        """1 if any ``sign(prod_{k<n} A_k)`` disagrees with ``(-1)^nu_n``, else 0."""
        q = self.p.q
        for rho, size, bar in ((self.rho, self.p.N, False), (self.rho_bar, self._even_len(), True)):
            A = [qracah_A(k, rho, q) for k in range(size)]
            for n in range(size):
                if sign_product(A[:n]) != (-1) ** self.nu(n, bar):
                    return 1.0
        return 0.0

    def contiguity_residual(self) -> float:
        """Worst relative residual of the rho-bar / rho contiguity relation at every grid point."""
        N, q = self.p.N, self.p.q
        al, be, de = self.p.alpha, self.p.beta, self.p.delta
        worst = 0.0
        for n in range(self._even_len()):
            for x in range(N):
                lhs = qracah_poly(n, x, self.rho_bar, q)
                if self.p.case == "I":
                    c0 = (1 - q ** (n - N)) * (1 - al * be * q ** (n + 1)) / ((1 - q ** (-N)) * (1 - al * be * q ** (2 * n + 1)))
                    c1 = (1 - q**n) * (1 - al * be * q ** (N + n + 1)) / ((1 - q**N) * (1 - al * be * q ** (2 * n + 1)))
                else:
                    den = (1 - be * de * q) * (1 - al * be * q ** (2 * n + 1))
                    c0 = (1 - al * be * q ** (n + 1)) * (1 - be * de * q ** (n + 1)) / den
                    c1 = -q * be * (1 - q**n) * (de - al * q**n) / den
                t0 = c0 * qracah_poly(n, x, self.rho, q) if n < N else 0.0
                t1 = c1 * qracah_poly(n - 1, x, self.rho, q) if n > 0 else 0.0
                scale = max(abs(lhs), abs(t0), abs(t1))
                if scale > 0:
                    worst = max(worst, abs(lhs - t0 - t1) / scale)
        return worst

    def model_checks(self) -> list:
        dual_res, weight_res = self.duality_residuals()
        return [
            ("contiguity", self.contiguity_residual(), "contiguity"),
            ("duality", dual_res, "duality"),
            ("dual_weight", weight_res, "duality"),
            ("nu_sign", self.nu_residual(), "exact"),
        ]


def qracah_model(params: QRacahSSHParams) -> QRacahSSHModel:
    return QRacahSSHModel(params)
