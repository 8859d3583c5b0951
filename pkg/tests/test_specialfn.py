import math

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sshdoubling.errors import DivergenceError, DomainError, ZeroDenominatorError
from sshdoubling.specialfn import (ONE, ZERO, HypergeometricSpec, LogReal, hypergeometric, log_product,
                                   pochhammer, q_pochhammer, q_pochhammer_inf_ratio, terminating_series)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False).filter(lambda x: abs(x) > 1e-6)


@given(finite, finite)
def test_logreal_product_matches_float(a, b):
    got = float(LogReal.from_float(a) * LogReal.from_float(b))
    assert got == pytest.approx(a * b, rel=1e-13)


@given(finite, finite)
def test_logreal_quotient_matches_float(a, b):
    assert float(LogReal.from_float(a) / b) == pytest.approx(a / b, rel=1e-13)


def test_logreal_edge_cases():
    assert float(ZERO) == 0.0
    assert LogReal.from_float(0.0) is ZERO
    assert float(ONE * -2.0) == -2.0
    assert float(LogReal.from_float(-3.0) ** 2) == pytest.approx(9.0)
    assert float(LogReal.from_float(16.0).sqrt()) == pytest.approx(4.0)
    with pytest.raises(ZeroDenominatorError):
        ONE / 0.0
    with pytest.raises(DomainError):
        LogReal.from_float(-4.0).sqrt()
    with pytest.raises(DomainError):
        LogReal.from_float(math.inf)
    with pytest.raises(ValueError):
        LogReal(2, 0.0)


def test_log_product_survives_overflow():
    p = log_product([1e200, 1e200, -1e-300])
    assert p.sign == -1
    assert p.log_magnitude == pytest.approx(100 * math.log(10))


def test_pochhammer():
    assert pochhammer(3.0, 0) == 1.0
    assert pochhammer(3.0, 4) == 3 * 4 * 5 * 6
    assert pochhammer(-2.0, 3) == 0.0
    with pytest.raises(DomainError):
        pochhammer(1.0, -1)


@given(st.floats(-3, 3), st.floats(0.05, 0.95), st.integers(0, 30))
def test_q_pochhammer_against_mpmath(b, q, k):
    ref = mpmath.qp(b, q, k)
    got = q_pochhammer(b, q, k)
    if ref == 0 or got.sign == 0:
        assert abs(float(ref)) < 1e-12 or got.sign != 0 and abs(float(got)) < 1e-12
    else:
        assert float(got) == pytest.approx(float(ref), rel=1e-11)


def test_q_pochhammer_exact_zero_factor():
    # b q^2 = 1
    assert q_pochhammer(4.0, 0.5, 5).sign == 0
    with pytest.raises(DomainError):
        q_pochhammer(0.5, 1.0, 3)


@pytest.mark.parametrize("q", [0.3, 0.5, 0.8, 0.95])
def test_infinite_ratio_against_mpmath(q):
    nums, dens = [0.2, -1.5], [0.7, 3.0]
    ref = mpmath.qp(nums[0], q) * mpmath.qp(nums[1], q) / (mpmath.qp(dens[0], q) * mpmath.qp(dens[1], q))
    assert float(q_pochhammer_inf_ratio(nums, dens, q)) == pytest.approx(float(ref), rel=1e-12)


def test_infinite_ratio_errors():
    with pytest.raises(ZeroDenominatorError):
        q_pochhammer_inf_ratio([0.1], [4.0], 0.5)
    with pytest.raises(DivergenceError):
        q_pochhammer_inf_ratio([0.1], [0.2], 1.0)


@given(st.integers(0, 12), st.floats(-2, 2), st.floats(0.5, 4), st.floats(-1, 1))
def test_2f1_against_mpmath(n, a, b, z):
    spec = HypergeometricSpec((-n, a), (b,), z)
    ref = float(mpmath.hyp2f1(-n, a, b, z))
    assert hypergeometric(spec) == pytest.approx(ref, rel=1e-9, abs=1e-9)


def test_spec_reads_degree_and_rejects_non_terminating():
    assert HypergeometricSpec((-4, 1.0), (2.0,), 0.5).n == 4
    assert HypergeometricSpec.q_terminating(3, (0.2,), (0.4,), 0.5, 0.5).n == 3
    with pytest.raises(DomainError):
        HypergeometricSpec((-2.5, 1.0), (2.0,), 0.5)


def test_zero_denominator_pochhammer():
    with pytest.raises(ZeroDenominatorError):
        hypergeometric(HypergeometricSpec((-3, 1.0), (-1.0,), 0.5))


@pytest.mark.parametrize("n,x,p,N", [(10, 12, 0.9, 40), (25, 30, 0.1, 50), (40, 3, 0.5, 50)])
def test_terminating_series_beats_cancellation(n, x, p, N):
    """Krawtchouk sums with huge alternating terms, against 80-digit mpmath."""
    got = terminating_series(n, lambda c: ((-c(x),), (-c(N),), 1 / c(p)))
    with mpmath.workdps(80):
        ref = mpmath.fsum(mpmath.rf(-n, k) * mpmath.rf(-x, k) / mpmath.rf(-N, k) / mpmath.factorial(k)
                          * (1 / mpmath.mpf(p)) ** k for k in range(n + 1))
    assert got == pytest.approx(float(ref), rel=1e-12, abs=1e-300)


def test_terminating_q_series_against_mpmath():
    q, n = 0.5, 6
    a, b, c = 0.3, 0.2, 0.7
    got = terminating_series(n, lambda cast: ((cast(a),), (cast(b), cast(c)), cast(q)), q=q)
    with mpmath.workdps(50):
        ref = mpmath.fsum(mpmath.qp(mpmath.mpf(q) ** -n, q, k) * mpmath.qp(a, q, k)
                          / (mpmath.qp(q, q, k) * mpmath.qp(b, q, k) * mpmath.qp(c, q, k)) * mpmath.mpf(q) ** k
                          for k in range(n + 1))
    assert got == pytest.approx(float(ref), rel=1e-12)


def test_terminating_series_rejects_negative_degree():
    with pytest.raises(DomainError):
        terminating_series(-1, lambda c: ((), (), c(1)))
