"""Exactly solvable inhomogeneous SSH chains from doubled orthogonal polynomials.

Typical use::

    from sshdoubling import build_model, run_all
    model = build_model("krawtchouk", N=15, p=0.7)
    model.eigenvalues()           # closed form, ascending
    run_all(model).overall        # closed forms against the bisection oracle
"""

from .doubling import (ChristoffelReport, ConstraintReport, DoublingSolution, Eigenvalue, QSequence,
                       check_constraints, christoffel_identity_check)
from .errors import AdmissibilityError, ConvergenceError, DivergenceError, DomainError, ZeroDenominatorError
from .models import MODEL_NAMES, SSHModel, build_model
from .recurrence import RecurrenceFamily, SymmetrizedFamily, check_orthogonality
from .specialfn import LogReal, q_pochhammer, terminating_series
from .tridiag import EigenSystem, TridiagonalHamiltonian, assemble, eig_oracle
from .verify import CheckResult, Thresholds, VerificationReport, run_all, sweep

__version__ = "0.1.0"

__all__ = [
    "ChristoffelReport", "ConstraintReport", "DoublingSolution", "Eigenvalue", "QSequence",
    "check_constraints", "christoffel_identity_check",
    "AdmissibilityError", "ConvergenceError", "DivergenceError", "DomainError", "ZeroDenominatorError",
    "MODEL_NAMES", "SSHModel", "build_model",
    "RecurrenceFamily", "SymmetrizedFamily", "check_orthogonality",
    "LogReal", "q_pochhammer", "terminating_series",
    "EigenSystem", "TridiagonalHamiltonian", "assemble", "eig_oracle",
    "CheckResult", "Thresholds", "VerificationReport", "run_all", "sweep",
]
