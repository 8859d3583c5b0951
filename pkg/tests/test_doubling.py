import math

import numpy as np
import pytest

from sshdoubling.doubling import (DoublingSolution, QSequence, check_constraints, christoffel_identity_check)
from sshdoubling.errors import DomainError
from sshdoubling.models import build_model
from sshdoubling.models.krawtchouk import krawtchouk_family
from sshdoubling.recurrence import SymmetrizedFamily


def _dense_eigs(model):
    return np.linalg.eigvalsh(model.hamiltonian().to_dense())


@pytest.fixture(scope="module")
def kraw():
    return build_model("krawtchouk", N=6, p=0.3)


def test_constraints_hold_for_each_model():
    for name, kw in [("ssh", dict(N=8, delta=-0.4)), ("ssh-mu", dict(N=8, delta=0.2, mu_plus=1.0, mu_minus=-0.5)),
                     ("krawtchouk", dict(N=8, p=0.7)),
                     ("qracah1", dict(N=8, q=0.5, alpha=0.1, beta=0.2, delta=-2.0)),
                     ("qracah2", dict(N=8, q=0.8, alpha=0.5, beta=0.6, delta=-0.5))]:
        m = build_model(name, **kw)
        rep = check_constraints(m.family, m.solution)
        assert rep.passed, (name, rep.max_residual)


def test_perturbed_coupling_breaks_constraints(kraw):
    sol = kraw.solution.perturbed("t_plus", 3, 1e-3)
    rep = check_constraints(kraw.family, sol)
    assert not rep.passed
    assert 2 in rep.failing() or 3 in rep.failing()
    with pytest.raises(DomainError):
        kraw.solution.perturbed("t_zero", 0, 1e-3)
    with pytest.raises(IndexError):
        kraw.solution.perturbed("t_plus", 6, 1e-3)


def test_solution_validation():
    ok = dict(epsilon=1, tau0=0.0, tau2=1.0, t_plus=[1.0, 1.0], t_minus=[1.0, 1.0])
    DoublingSolution(**ok)
    with pytest.raises(DomainError):
        DoublingSolution(**{**ok, "epsilon": 2})
    with pytest.raises(DomainError):
        DoublingSolution(**{**ok, "tau2": 0.0})
    with pytest.raises(DomainError):
        DoublingSolution(**{**ok, "t_minus": [1.0]})
    with pytest.raises(DomainError):
        DoublingSolution(**{**ok, "t_plus": [1.0, 0.0]})
    with pytest.raises(DomainError):
        DoublingSolution(**ok, truncated=True)  # needs t-_(N-1) = 0
    trunc = DoublingSolution(**{**ok, "t_minus": [1.0, 0.0]}, truncated=True)
    assert trunc.size == 4 and len(trunc.couplings()) == 3


def test_sequence_needs_matching_lengths(kraw):
    fam = SymmetrizedFamily(krawtchouk_family(5, 0.3), -1)
    with pytest.raises(DomainError):
        QSequence(fam, kraw.solution)


def test_spectrum_labels_cover_the_chain(kraw):
    labels = kraw.eigen_labels()
    assert len(labels) == 13
    assert sum(lab.k is None for lab in labels) == 1
    assert np.allclose(kraw.eigenvalues(), _dense_eigs(kraw), atol=1e-12)
    tr = build_model("qracah2", N=5, q=0.5, alpha=0.1, beta=0.2, delta=-2.0)
    assert len(tr.eigen_labels()) == 10
    assert all(lab.k is not None for lab in tr.eigen_labels())


def test_eval_q_matches_eigenvector(kraw):
    for lab in kraw.eigen_labels():
        v = kraw.eigenvector(lab)
        for n in range(2 * kraw.N):
            assert kraw.seq.eval_Q(n, lab.value) == pytest.approx(v[n], rel=1e-9, abs=1e-9 * np.max(np.abs(v)))
        assert kraw.seq.eval_Q(2 * kraw.N, lab.value) == pytest.approx(v[-1], rel=1e-12)


def test_eval_q_top_component_needs_an_eigenvalue(kraw):
    with pytest.raises(DomainError):
        kraw.seq.eval_Q(2 * kraw.N, 0.37)
    with pytest.raises(IndexError):
        kraw.seq.eval_Q(2 * kraw.N + 1, 0.0)
    with pytest.raises(DomainError):
        kraw.seq.label_of(0.37)


def test_eigenvectors_solve_the_dense_problem(kraw):
    H = kraw.hamiltonian().to_dense()
    for lab in kraw.eigen_labels():
        v = kraw.eigenvector(lab)
        assert np.max(np.abs(H @ v - lab.value * v)) < 1e-12 * np.max(np.abs(v))


def test_v_at_tau0_gives_coupling_ratio(kraw):
    sol = kraw.solution
    V = [float(kraw.seq.V(n, sol.tau0)) for n in range(kraw.N + 1)]
    for n in range(kraw.N - 1):
        assert sol.t_plus[n] / sol.t_minus[n] == pytest.approx(-V[n + 1] / V[n], rel=1e-10)


def test_float_christoffel_path_small_chain(kraw):
    xs = np.linspace(0.3, 2.5, 9)
    rep = christoffel_identity_check(kraw.seq, xs)
    assert rep.passed and rep.dps is None


def test_float_christoffel_path_reports_breakdown():
    m = build_model("ssh", N=20, delta=-0.9)
    xs = np.linspace(0.3, 1.5, 5)
    assert not christoffel_identity_check(m.seq, xs).passed
    exact = m.christoffel(xs)
    assert exact.passed and exact.dps >= 100


def test_christoffel_rejects_sample_at_tau0(kraw):
    with pytest.raises(ZeroDivisionError):
        christoffel_identity_check(kraw.seq, [0.0, 1.0])


def test_perturbation_is_visible_in_exact_christoffel(kraw):
    bad = kraw.with_perturbed_coupling("t_minus", 2, 1e-6)
    rep = bad.christoffel(np.linspace(0.3, 2.5, 9))
    assert not rep.passed
    assert math.isfinite(rep.max_residual)
