"""Exactly solvable chains and a name-based constructor."""

from .base import SSHModel, normwise_rel
from .chebyshev import ChebyshevSSHModel, ChebyshevSSHParams, chebyshev_model, chebyshev_u
from .krawtchouk import KrawtchoukSSHModel, KrawtchoukSSHParams, krawtchouk, krawtchouk_model
from .qracah import QRacahSSHModel, QRacahSSHParams, qracah_model, qracah_poly
from .scan import DEFAULT_LATTICE, KNOWN_GOOD, ScanPoint, admissibility, random_scan, scan_lattice

MODEL_NAMES = ("ssh", "ssh-mu", "krawtchouk", "qracah1", "qracah2")


def build_model(name: str, **kw) -> SSHModel:
    """Model by CLI name; keyword arguments are the parameter fields."""
    if name in ("ssh", "ssh-mu"):
        if name == "ssh" and (kw.get("mu_plus", 0) or kw.get("mu_minus", 0)):
            raise ValueError("model 'ssh' has no site energies; use 'ssh-mu'")
        return chebyshev_model(ChebyshevSSHParams(kw["N"], kw["delta"], kw.get("mu_plus", 0.0), kw.get("mu_minus", 0.0)))
    if name == "krawtchouk":
        return krawtchouk_model(KrawtchoukSSHParams(kw["N"], kw["p"]))
    if name in ("qracah1", "qracah2"):
        return qracah_model(QRacahSSHParams(kw["N"], kw["q"], kw["alpha"], kw["beta"], kw["delta"],
                                            "I" if name == "qracah1" else "II"))
    raise ValueError(f"unknown model {name!r}; choose from {', '.join(MODEL_NAMES)}")


__all__ = [
    "SSHModel", "normwise_rel", "ChebyshevSSHModel", "ChebyshevSSHParams", "chebyshev_model", "chebyshev_u",
    "KrawtchoukSSHModel", "KrawtchoukSSHParams", "krawtchouk", "krawtchouk_model",
    "QRacahSSHModel", "QRacahSSHParams", "qracah_model", "qracah_poly",
    "DEFAULT_LATTICE", "KNOWN_GOOD", "ScanPoint", "admissibility", "random_scan", "scan_lattice",
    "MODEL_NAMES", "build_model",
]
