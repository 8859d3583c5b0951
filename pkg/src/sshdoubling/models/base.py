from __future__ import annotations

import copy
from typing import Optional

import numpy as np

from ..doubling import (FLOAT_CONTEXT, ChainData, ChristoffelReport, DoublingSolution, Eigenvalue, QSequence,
                        christoffel_identity_check)
from ..recurrence import SymmetrizedFamily
from ..tridiag import TridiagonalHamiltonian, assemble


def normwise_rel(a, b) -> float:
    """``||a - b||_inf / max(||a||_inf, ||b||_inf)`` (0 when both vanish)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(a - b))) / scale


class SSHModel:
    """An exactly solvable chain: family, doubling solution and closed forms.

    Subclasses set ``name``, ``params``, ``family`` and ``solution`` and
    provide the closed-form spectrum, eigenvector components and norms.
    """

    name = "model"
    # spectrum comparisons relative to max |x| instead of absolute
    relative_spectrum = False

    family: SymmetrizedFamily
    solution: DoublingSolution
    params: dict

    def _finish(self):
        self.seq = QSequence(self.family, self.solution)
        self.perturbation = None

    @property
    def N(self) -> int:
        return self.family.N

    @property
    def label(self) -> str:
        return self.name

    def hamiltonian(self) -> TridiagonalHamiltonian:
        return assemble(self.solution)

    def eigen_labels(self) -> list:
        return self.seq.eigen_labels()

    def eigenvalues(self) -> np.ndarray:
        return self.seq.eigenvalues()

    def eigenvector(self, x) -> np.ndarray:
        return self.seq.eigenvector(x)

    def closed_form_spectrum(self) -> np.ndarray:
        raise NotImplementedError

    def closed_form_eigvec_even(self, n: int, k: Optional[int]) -> float:
        """``Q_{2n}`` at the eigenvalue with grid index ``k`` (``None``: zero mode)."""
        raise NotImplementedError

    def closed_form_eigvec_odd(self, n: int, k: Optional[int], sign: int) -> float:
        raise NotImplementedError

    def eigvec_norm(self, k: Optional[int]) -> float:
        """Closed-form ``Q(x)^T Q(x)``; the same for both branches of ``k``."""
        raise NotImplementedError

    def closed_form_vector(self, lab: Eigenvalue) -> np.ndarray:
        size = self.seq.size
        v = np.empty(size)
        for i in range(size):
            n, odd = divmod(i, 2)
            if odd:
                v[i] = self.closed_form_eigvec_odd(n, lab.k, lab.sign) if lab.k is not None else 0.0
            else:
                v[i] = self.closed_form_eigvec_even(n, lab.k)
        return v

    def chain_data(self, ctx=FLOAT_CONTEXT) -> ChainData:
        """Coefficients, grid and couplings computed in the arithmetic of ``ctx``."""
        raise NotImplementedError

    def _exact_chain_data(self, ctx) -> ChainData:
        d = self.chain_data(ctx)
        if self.perturbation is not None:
            which, n, rel = self.perturbation
            seq = d.t_plus if which == "t_plus" else d.t_minus
            seq[n] = seq[n] * (1 + ctx.c(rel))
        return d

    def christoffel(self, sample_points, tol: float = 1e-10) -> ChristoffelReport:
        """Christoffel identities evaluated in extended precision."""
        return christoffel_identity_check(self.seq, sample_points, tol, exact=self._exact_chain_data)

    def model_checks(self) -> list:
        """Model-specific identities as ``(name, residual, threshold_key)``."""
        return []

    def with_perturbed_coupling(self, which: str, n: int, rel: float) -> "SSHModel":
        """Copy whose chain has one coupling scaled by ``1 + rel``.

        Closed forms still describe the unperturbed chain, so verification
        of the copy is expected to fail.
        """
        other = copy.copy(self)
        other.solution = self.solution.perturbed(which, n, rel)
        other.seq = QSequence(self.family, other.solution)
        other.perturbation = (which, n, rel)
        return other

    def couplings_table(self) -> list:
        """Rows ``(n, t+_n, t-_n, (diag_2n, diag_2n+1), flag)``."""
        sol = self.solution
        d = sol.diagonal()
        rows = []
        for n in range(self.N):
            odd = d[2 * n + 1] if 2 * n + 1 < len(d) else None
            flag = "truncated" if (sol.truncated and n == self.N - 1) else ""
            rows.append((n, float(sol.t_plus[n]), float(sol.t_minus[n]), (float(d[2 * n]), odd), flag))
        return rows

    def __repr__(self):
        return f"{type(self).__name__}({self.params})"
