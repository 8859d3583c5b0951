"""Admissibility scan for the q-Racah chains.

A parameter set is admissible when the model can be built: Favard
positivity of the family, positive coupling and closed-form radicands,
nonnegative spectrum radicands and nonvanishing denominators.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import AdmissibilityError, DomainError
from .qracah import QRacahSSHModel, QRacahSSHParams

# The lattice the acceptance suite sweeps.
DEFAULT_LATTICE = {
    "case": ("I", "II"),
    "q": (0.5, 0.8),
    "N": (3, 10, 30),
    "alpha": (0.1, 0.5),
    "beta": (0.2, 0.6),
    "delta": (-2.0, -0.5, 0.5, 2.0),
}


@dataclass(frozen=True)
class ScanPoint:
    params: QRacahSSHParams
    admissible: bool
    reason: str = ""
    seed: int | None = None


def admissibility(params: QRacahSSHParams) -> tuple:
    """``(True, "")`` or ``(False, reason)``."""
    try:
        QRacahSSHModel(params)
    except (AdmissibilityError, DomainError) as exc:
        return False, str(exc)
    return True, ""


def scan_lattice(lattice: dict | None = None) -> list:
    lattice = DEFAULT_LATTICE if lattice is None else lattice
    keys = ("case", "q", "N", "alpha", "beta", "delta")
    out = []
    for combo in itertools.product(*(lattice[k] for k in keys)):
        kw = dict(zip(keys, combo))
        params = QRacahSSHParams(N=kw["N"], q=kw["q"], alpha=kw["alpha"], beta=kw["beta"],
                                 delta=kw["delta"], case=kw["case"])
        ok, why = admissibility(params)
        out.append(ScanPoint(params, ok, why))
    return out


def random_scan(case: str, q: float, N: int, seed: int, count: int) -> list:
    """Draw ``alpha, beta`` in (0, 1) and ``delta`` in (-3, 3); keep admissible ones."""
    rng = np.random.default_rng(seed)
    found = []
    for _ in range(count):
        al, be = (float(v) for v in rng.uniform(0.0, 1.0, size=2))
        de = float(rng.uniform(-3.0, 3.0))
        params = QRacahSSHParams(N=N, q=q, alpha=round(al, 6), beta=round(be, 6), delta=round(de, 6), case=case)
        ok, why = admissibility(params)
        if ok:
            found.append(ScanPoint(params, True, "", seed))
    return found


# Found by random_scan(case, q, N=6, seed=7, count=40); regenerated in the tests.
KNOWN_GOOD = (
    ScanPoint(QRacahSSHParams(6, 0.5, 0.467935, 0.303032, -1.329446, "I"), True, "", 7),
    ScanPoint(QRacahSSHParams(6, 0.5, 0.622179, 0.98896, -1.708148, "I"), True, "", 7),
    ScanPoint(QRacahSSHParams(6, 0.8, 0.25487, 0.445076, 0.02729, "I"), True, "", 7),
    ScanPoint(QRacahSSHParams(6, 0.5, 0.467935, 0.303032, -1.329446, "II"), True, "", 7),
    ScanPoint(QRacahSSHParams(6, 0.8, 0.25487, 0.445076, 0.02729, "II"), True, "", 7),
)
