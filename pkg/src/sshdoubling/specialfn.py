"""Pochhammer symbols and terminating (q-)hypergeometric sums.

Long products are carried as :class:`LogReal` values (sign plus natural log
of the magnitude) so that q-Racah weights and norms do not overflow a double
before they are combined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Optional, Sequence

import mpmath

from .errors import DivergenceError, DomainError, ZeroDenominatorError

_EPS = 2.220446049250313e-16
# |1 - b q^j| below this is treated as an exact zero factor
_ZERO_FACTOR = 64 * _EPS


@dataclass(frozen=True)
class LogReal:
    """Signed real number stored as ``sign * exp(log_magnitude)``."""

    sign: int
    log_magnitude: float = 0.0

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or +1, got {self.sign!r}")
        if self.sign == 0 and self.log_magnitude != -math.inf:
            object.__setattr__(self, "log_magnitude", -math.inf)

    @classmethod
    def from_float(cls, x: float) -> "LogReal":
        if x == 0:
            return ZERO
        if not math.isfinite(x):
            raise DomainError(f"cannot represent {x!r} as LogReal")
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_magnitude)

    def __mul__(self, other):
        if not isinstance(other, LogReal):
            other = LogReal.from_float(float(other))
        if self.sign == 0 or other.sign == 0:
            return ZERO
        return LogReal(self.sign * other.sign, self.log_magnitude + other.log_magnitude)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, LogReal):
            other = LogReal.from_float(float(other))
        if other.sign == 0:
            raise ZeroDenominatorError("division of LogReal by zero")
        if self.sign == 0:
            return ZERO
        return LogReal(self.sign * other.sign, self.log_magnitude - other.log_magnitude)

    def __neg__(self):
        return LogReal(-self.sign, self.log_magnitude)

    def __abs__(self):
        return LogReal(abs(self.sign), self.log_magnitude)

    def __pow__(self, power: float):
        if self.sign == 0:
            if power <= 0:
                raise ZeroDenominatorError("non-positive power of zero")
            return ZERO
        if self.sign < 0 and not float(power).is_integer():
            raise DomainError("fractional power of a negative LogReal")
        sign = -1 if (self.sign < 0 and int(power) % 2) else 1
        return LogReal(sign, self.log_magnitude * power)

    def sqrt(self) -> "LogReal":
        if self.sign < 0:
            raise DomainError("square root of a negative LogReal")
        return self ** 0.5

    def __repr__(self):
        return f"LogReal(sign={self.sign}, log_magnitude={self.log_magnitude!r})"


ONE = LogReal(1, 0.0)
ZERO = LogReal(0, -math.inf)


def log_product(factors: Iterable[float]) -> LogReal:
    """Product of real factors, accumulated in log space."""
    sign = 1
    logm = 0.0
    for f in factors:
        if f == 0:
            return ZERO
        if f < 0:
            sign = -sign
        logm += math.log(abs(f))
    return LogReal(sign, logm)


def pochhammer(b: float, k: int) -> float:
    """Rising factorial ``b (b+1) ... (b+k-1)``; equals 1 for ``k = 0``."""
    if k < 0:
        raise DomainError(f"pochhammer needs k >= 0, got {k}")
    out = 1.0
    for j in range(k):
        out *= b + j
    return out


def _check_q(q: float) -> None:
    if not 0.0 < q < 1.0:
        raise DomainError(f"q must satisfy 0 < q < 1, got {q!r}")


def q_pochhammer(b: float, q: float, k: int) -> LogReal:
    """``(b; q)_k = (1-b)(1-qb)...(1-q^{k-1} b)`` as a LogReal."""
    _check_q(q)
    if k < 0:
        raise DomainError(f"q_pochhammer needs k >= 0, got {k}")
    factors = []
    for j in range(k):
        f = 1.0 - b * q**j
        if abs(f) <= _ZERO_FACTOR:
            return ZERO
        factors.append(f)
    return log_product(factors)


def _q_inf_log(a: float, q: float, tol: float, max_terms: int) -> LogReal:
    sign = 1
    logm = 0.0
    prev = math.inf
    for m in range(max_terms):
        z = a * q**m
        f = 1.0 - z
        if abs(f) <= _ZERO_FACTOR:
            return ZERO
        if f < 0:
            sign = -sign
        logm += math.log(abs(f))
        if abs(z) < tol:
            return LogReal(sign, logm)
        if abs(z) > prev:
            break
        prev = abs(z)
    raise DivergenceError(f"(a; q)_inf with a={a!r}, q={q!r} did not converge in {max_terms} factors")


@lru_cache(maxsize=4096)
def _inf_ratio_cached(numerators: tuple, denominators: tuple, q: float, tol: float) -> LogReal:
    max_terms = 100000
    out = ONE
    for b in denominators:
        d = _q_inf_log(b, q, tol, max_terms)
        if d.sign == 0:
            raise ZeroDenominatorError(f"(b; q)_inf vanishes for b={b!r}")
        out = out / d
    for a in numerators:
        out = out * _q_inf_log(a, q, tol, max_terms)
    return out


def q_pochhammer_inf_ratio(
    numerators: Sequence[float],
    denominators: Sequence[float],
    q: float,
    tol: float = 1e-16,
) -> LogReal:
    """Ratio of infinite q-Pochhammer products.

    Each ``(a; q)_inf`` is truncated once the next factor differs from one
    by less than ``tol``. Results are cached per argument tuple.
    """
    if not 0.0 < q < 1.0:
        raise DivergenceError(f"infinite q-Pochhammer products need 0 < q < 1, got {q!r}")
    return _inf_ratio_cached(tuple(float(a) for a in numerators),
                             tuple(float(b) for b in denominators), float(q), float(tol))


@dataclass(frozen=True)
class HypergeometricSpec:
    """A terminating ``{r+1}F_r`` (``q is None``) or ``{r+1}phi_r`` series.

    The first numerator parameter is ``-n`` (ordinary case) or ``q^{-n}``
    (q case). ``n`` is read off that entry unless given explicitly, which
    is preferable in the q case since ``q**-n`` is rounded.
    """

    numerator_params: tuple
    denominator_params: tuple
    argument: float
    q: Optional[float] = None
    n: Optional[int] = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "numerator_params", tuple(float(a) for a in self.numerator_params))
        object.__setattr__(self, "denominator_params", tuple(float(b) for b in self.denominator_params))
        if not self.numerator_params:
            raise DomainError("a terminating series needs a numerator parameter")
        if self.q is not None:
            _check_q(self.q)
        if self.n is None:
            object.__setattr__(self, "n", self._read_degree())
        elif self.n < 0:
            raise DomainError(f"terminating degree must be non-negative, got {self.n}")

    @classmethod
    def q_terminating(cls, n, numerators, denominators, q, argument):
        """Build ``phi(q^{-n}, *numerators; *denominators | q; argument)``."""
        return cls((q ** (-n),) + tuple(numerators), tuple(denominators), argument, q=q, n=n)

    def _read_degree(self) -> int:
        a0 = self.numerator_params[0]
        if self.q is None:
            n = round(-a0)
            if n < 0 or abs(-a0 - n) > 1e-12 * max(1, n):
                raise DomainError(f"first numerator parameter {a0!r} is not -n for an integer n >= 0")
            return n
        if a0 <= 0:
            raise DomainError(f"first numerator parameter {a0!r} is not q^-n")
        nf = -math.log(a0) / math.log(self.q)
        n = round(nf)
        if n < 0 or abs(nf - n) > 1e-9 * max(1, n):
            raise DomainError(f"first numerator parameter {a0!r} is not q^-n for an integer n >= 0")
        return n


def hypergeometric_terms(spec: HypergeometricSpec) -> list:
    """Terms of the terminating series, built from successive term ratios."""
    n = spec.n
    nums = spec.numerator_params[1:]
    dens = spec.denominator_params
    z = spec.argument
    q = spec.q
    terms = [1.0]
    t = 1.0
    for k in range(n):
        if q is None:
            num = (-n + k)
            for a in nums:
                num *= a + k
            den = k + 1.0
            for b in dens:
                f = b + k
                if f == 0:
                    raise ZeroDenominatorError(f"denominator Pochhammer ({b})_k vanishes at k={k + 1}")
                den *= f
        else:
            qk = q**k
            num = 1.0 - q ** (k - n)
            for a in nums:
                num *= 1.0 - a * qk
            den = 1.0 - q ** (k + 1)
            for b in dens:
                f = 1.0 - b * qk
                if abs(f) <= _ZERO_FACTOR:
                    raise ZeroDenominatorError(f"denominator ({b}; q)_k vanishes at k={k + 1}")
                den *= f
        t = t * num * z / den
        terms.append(t)
    return terms


def hypergeometric(spec: HypergeometricSpec) -> float:
    """Value of the terminating series (compensated summation of the terms)."""
    return math.fsum(hypergeometric_terms(spec))


def _series_terms(n, nums, dens, z, q, one) -> list:
    terms = [one]
    t = one
    for k in range(n):
        if q is None:
            num = (-n + k) * one
            for a in nums:
                num *= a + k
            den = (k + 1) * one
            for b in dens:
                den *= b + k
        else:
            qk = q**k
            num = one - q ** (k - n)
            for a in nums:
                num *= one - a * qk
            den = one - q ** (k + 1)
            for b in dens:
                den *= one - b * qk
        if den == 0:
            raise ZeroDenominatorError(f"denominator vanishes at term {k + 1}")
        t = t * num * z / den
        terms.append(t)
    return terms


def terminating_series(
    n: int,
    params: Callable,
    q: Optional[float] = None,
    max_cond: float = 1e2,
    max_dps: int = 600,
) -> float:
    """Terminating series with the precision raised until cancellation is beaten.

    ``params(cast)`` returns ``(numerators, denominators, argument)`` without
    the terminating parameter, built from inputs passed through ``cast``.
    It is called with ``float`` first; when ``max|term| / |sum|`` exceeds
    ``max_cond`` it is called again with :class:`mpmath.mpf` at a working
    precision that leaves about 20 correct digits.
    """
    if n < 0:
        raise DomainError(f"terminating degree must be non-negative, got {n}")
    nums, dens, z = params(float)
    terms = _series_terms(n, nums, dens, z, None if q is None else float(q), 1.0)
    s = math.fsum(terms)
    big = max(abs(t) for t in terms)
    if not math.isfinite(s):
        raise DomainError("series overflowed a double")
    if s != 0 and big / abs(s) <= max_cond:
        return s
    # a garbage float sum still bounds the loss from below; start above it
    est = math.log10(big / max(abs(s), _EPS * big))
    dps = max(48, int(est) + 36)
    while True:
        with mpmath.workdps(dps):
            cast = mpmath.mpf
            nums, dens, z = params(cast)
            terms = _series_terms(n, nums, dens, z, None if q is None else cast(q), cast(1))
            s = mpmath.fsum(terms)
            if s == 0:
                return 0.0
            lost = float(mpmath.log10(max(abs(t) for t in terms) / abs(s)))
            if lost + 20 <= dps or dps >= max_dps:
                return float(s)
            dps = min(max_dps, max(2 * dps, int(lost) + 30))
