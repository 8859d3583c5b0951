import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sshdoubling.errors import ConvergenceError, DomainError
from sshdoubling.tridiag import (TridiagonalHamiltonian, bisect_eigenvalues, eig_oracle, residual,
                                 sturm_count)

entries = st.floats(-5, 5, allow_nan=False)


@st.composite
def hamiltonians(draw, max_size=30):
    n = draw(st.integers(1, max_size))
    d = draw(arrays(float, n, elements=entries))
    e = draw(arrays(float, n - 1, elements=entries))
    return TridiagonalHamiltonian(d, e)


@given(hamiltonians())
def test_bisection_against_lapack(H):
    ref = np.linalg.eigvalsh(H.to_dense())
    got = bisect_eigenvalues(H)
    assert np.max(np.abs(got - ref)) <= 1e-12 * max(1.0, H.norm_inf())


@given(hamiltonians(max_size=15))
def test_sturm_count_matches_dense(H):
    ref = np.linalg.eigvalsh(H.to_dense())
    shifts = np.array([-11.0, 0.123, 11.0])
    assert list(sturm_count(H, shifts)) == [int(np.sum(ref < s)) for s in shifts]


def test_wilkinson_cluster_gives_orthonormal_vectors():
    m = 10
    d = np.abs(np.arange(-m, m + 1, dtype=float))
    H = TridiagonalHamiltonian(d, np.ones(2 * m))
    sys = eig_oracle(H)
    V = sys.eigenvectors
    assert np.allclose(sys.eigenvalues, np.linalg.eigvalsh(H.to_dense()), atol=1e-12)
    assert np.max(np.abs(V.T @ V - np.eye(2 * m + 1))) < 1e-9
    assert sys.residual_bound < 1e-12


def test_oracle_is_deterministic():
    H = TridiagonalHamiltonian([0.0] * 7, [0.5, 0.7, 0.5, 0.7, 0.5, 0.7])
    a, b = eig_oracle(H), eig_oracle(H)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.eigenvectors, b.eigenvectors)


def test_three_site_chain():
    # N=1, delta=0: couplings 1/2, 1/2
    H = TridiagonalHamiltonian([0, 0, 0], [0.5, 0.5])
    assert np.allclose(bisect_eigenvalues(H), [-np.sqrt(0.5), 0.0, np.sqrt(0.5)], atol=1e-15)


def test_validation_and_errors():
    with pytest.raises(DomainError):
        TridiagonalHamiltonian([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(DomainError):
        TridiagonalHamiltonian([], [])
    H = TridiagonalHamiltonian([1.0, 2.0], [0.5])
    with pytest.raises(DomainError):
        residual(H, 1.0, np.zeros(2))
    with pytest.raises(DomainError):
        residual(H, 1.0, np.ones(3))
    with pytest.raises(ConvergenceError) as exc:
        bisect_eigenvalues(H, tol=0.0, max_iter=3)
    assert exc.value.interval is not None
