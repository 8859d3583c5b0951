"""Command-line front end: spectra, eigenvectors, couplings and verification as JSON or CSV.

Exit codes: 0 success, 1 a verification check failed, 2 usage or parameter error.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
from typing import Optional

import numpy as np

from .errors import DomainError
from .models import MODEL_NAMES, build_model
from .schema import SCHEMA_VERSION
from .tridiag import eig_oracle, residual
from .verify import Thresholds, qracah_scan_grid, run_all, sweep

COMMANDS = ("spectrum", "eigvecs", "couplings", "verify")

# flag dest -> (type, default); the model picks the ones it uses
PARAM_FLAGS = {
    "N": (int, 10),
    "delta": (float, 0.5),
    "mu_plus": (float, 0.0),
    "mu_minus": (float, 0.0),
    "p": (float, 0.5),
    "q": (float, 0.5),
    "alpha": (float, 0.1),
    "beta": (float, 0.2),
    "qr_delta": (float, -2.0),
}

MODEL_PARAMS = {
    "ssh": ("N", "delta"),
    "ssh-mu": ("N", "delta", "mu_plus", "mu_minus"),
    "krawtchouk": ("N", "p"),
    "qracah1": ("N", "q", "alpha", "beta", "qr_delta"),
    "qracah2": ("N", "q", "alpha", "beta", "qr_delta"),
}

# what `verify --scan default` sweeps for each model
DEFAULT_SCANS = {
    "ssh": {"N": (2, 10, 50), "delta": (-0.9, -0.5, 0.0, 0.5, 0.9)},
    "ssh-mu": {"N": (2, 10, 30), "delta": (-0.9, 0.0, 0.9), "mu_plus": (0.3, 1.0, 2.0), "mu_minus": (-0.2, 1.0, 0.0)},
    "krawtchouk": {"N": (3, 10, 30), "p": (0.1, 0.3, 0.5, 0.7, 0.9)},
}


class UsageError(Exception):
    """Bad flags or parameters; reported on one line with exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sshdoubling", description="Exactly solvable SSH chains from doubled orthogonal polynomials.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--model", choices=MODEL_NAMES, default="ssh")
    for dest, (typ, _) in PARAM_FLAGS.items():
        p.add_argument("--" + dest.replace("_", "-"), dest=dest, type=typ, default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--oracle", action="store_true", help="spectrum: add the bisection eigenvalues")
    p.add_argument("--which", default="all", help="eigvecs: all, zero, or comma-separated indices into the sorted spectrum")
    p.add_argument("--tol", type=float, default=None, help="verify: one threshold for every check, at most 1e-6")
    p.add_argument("--scan", choices=("default",), default=None, help="verify: the shipped parameter sweep")
    p.add_argument("--sweep", default=None, help="verify: grid such as 'N=2,10;delta=-0.5,0.5'")
    p.add_argument("--perturb", default=None, metavar="KIND:INDEX:REL",
                   help="verify: scale one coupling, e.g. t_plus:3:1e-4 (fault injection)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--config", default=None, help="flat key=value file; explicit flags win")
    p.add_argument("--out", default=None, help="write here instead of stdout")
    return p


def read_config(path: str) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = val
    return out


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = read_config(args.config)
        known = {a.dest: a for a in parser._actions}
        defaults = {}
        for key, val in cfg.items():
            if key not in known or key in ("command", "config"):
                raise UsageError(f"unknown config key {key!r}")
            act = known[key]
            if act.type is not None:
                val = act.type(val)
            elif isinstance(act, argparse._StoreTrueAction):
                val = val.lower() in ("1", "true", "yes")
            defaults[key] = val
        parser.set_defaults(**defaults)
        args = parser.parse_args(argv)
    for dest, (_, default) in PARAM_FLAGS.items():
        if getattr(args, dest) is None:
            setattr(args, dest, default)
    return args


def model_kwargs(args, model: Optional[str] = None) -> dict:
    model = model or args.model
    kw = {k: getattr(args, k) for k in MODEL_PARAMS[model]}
    if "qr_delta" in kw:
        kw["delta"] = kw.pop("qr_delta")
    return kw


def parse_perturb(spec: str) -> tuple:
    parts = spec.split(":")
    if len(parts) != 3:
        raise UsageError("--perturb expects KIND:INDEX:REL")
    kind = {"t+": "t_plus", "t-": "t_minus", "t_plus": "t_plus", "t_minus": "t_minus"}.get(parts[0])
    if kind is None:
        raise UsageError(f"unknown coupling kind {parts[0]!r}; use t_plus or t_minus")
    try:
        return kind, int(parts[1]), float(parts[2])
    except ValueError as exc:
        raise UsageError(f"--perturb: {exc}") from None


def parse_sweep(spec: str, args) -> list:
    """``key=v1,v2;key2=...`` as a cartesian grid over the model's flags."""
    axes = {}
    for part in filter(None, (s.strip() for s in spec.split(";"))):
        if "=" not in part:
            raise UsageError(f"--sweep: expected key=values, got {part!r}")
        key, vals = part.split("=", 1)
        key = key.strip().replace("-", "_")
        if key not in MODEL_PARAMS[args.model]:
            raise UsageError(f"--sweep: model {args.model} has no parameter {key!r}")
        typ = PARAM_FLAGS[key][0]
        try:
            axes[key] = [typ(v) for v in vals.split(",")]
        except ValueError as exc:
            raise UsageError(f"--sweep: {exc}") from None
    base = model_kwargs(args)
    grid = []
    for combo in itertools.product(*axes.values()):
        kw = dict(base)
        for key, val in zip(axes, combo):
            kw["delta" if key == "qr_delta" else key] = val
        grid.append(kw)
    return grid


def default_scan(model: str) -> list:
    if model in ("qracah1", "qracah2"):
        return qracah_scan_grid("I" if model == "qracah1" else "II")
    lat = DEFAULT_SCANS[model]
    if model == "ssh-mu":
        # the (mu+, mu-) values are paired, not crossed
        return [{"N": N, "delta": d, "mu_plus": a, "mu_minus": b}
                for a, b in zip(lat["mu_plus"], lat["mu_minus"]) for d in lat["delta"] for N in lat["N"]]
    keys = list(lat)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(lat[k] for k in keys))]


# -- output --------------------------------------------------------------
def _clean(obj):
    """Plain JSON types; non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v + 0.0 if math.isfinite(v) else None
    return obj


def fmt(x) -> str:
    """Shortest round-trip repr (never more than 17 significant digits)."""
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x) + 0.0) if math.isfinite(x) else str(float(x))
    return str(x)


def document(command: str, parameters: dict, payload: dict) -> dict:
    return _clean({"schema_version": SCHEMA_VERSION, "command": command, "parameters": parameters,
                   "payload": payload})


def render_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def render_csv(doc: dict) -> str:
    cmd, pay = doc["command"], doc["payload"]
    if cmd == "spectrum":
        if "oracle_eigenvalues" in pay:
            return _csv(("index", "eigenvalue", "oracle"),
                        [(i, a, b) for i, (a, b) in enumerate(zip(pay["eigenvalues"], pay["oracle_eigenvalues"]))])
        return _csv(("index", "eigenvalue"), list(enumerate(pay["eigenvalues"])))
    if cmd == "eigvecs":
        vecs = pay["vectors"]
        header = ["site"] + [f"λ_{v['index']}" for v in vecs]
        size = len(vecs[0]["components"]) if vecs else 0
        return _csv(header, [[i] + [v["components"][i] for v in vecs] for i in range(size)])
    if cmd == "couplings":
        return _csv(("n", "t_plus", "t_minus", "mu_even", "mu_odd", "flag"),
                    [(r["n"], r["t_plus"], r["t_minus"], r["mu"][0], r["mu"][1], r["flag"]) for r in pay["rows"]])
    reports = pay["reports"] if "reports" in pay else [pay]
    keys = sorted({k for r in reports for k in r["parameters"]})
    rows = []
    for r in reports:
        pv = [r["parameters"].get(k) for k in keys]
        if r["skipped"]:
            rows.append([r["model"], *pv, "skipped", None, None, r["skipped"]])
        for c in r["checks"]:
            rows.append([r["model"], *pv, c["name"], c["residual"], c["threshold"], c["passed"]])
    return _csv(["model", *keys, "check", "residual", "threshold", "passed"], rows)


# -- commands ------------------------------------------------------------
def _parameters(args, model) -> dict:
    return {"model": args.model, **model.params}


def cmd_spectrum(args) -> tuple:
    model = build_model(args.model, **model_kwargs(args))
    vals = np.sort(model.closed_form_spectrum())
    payload = {"eigenvalues": vals}
    params = _parameters(args, model)
    if args.oracle:
        oracle = eig_oracle(model.hamiltonian()).eigenvalues
        payload["oracle_eigenvalues"] = oracle
        payload["max_abs_deviation"] = float(np.max(np.abs(vals - oracle)))
        params["oracle"] = True
    return document("spectrum", params, payload), 0


def _select(which: str, labels) -> list:
    if which == "all":
        return list(range(len(labels)))
    if which == "zero":
        idx = [i for i, lab in enumerate(labels) if lab.k is None]
        if not idx:
            raise UsageError("this chain has no zero mode")
        return idx
    try:
        idx = [int(s) for s in which.split(",")]
    except ValueError:
        raise UsageError(f"--which must be all, zero or integers, got {which!r}") from None
    for i in idx:
        if not 0 <= i < len(labels):
            raise UsageError(f"--which index {i} outside 0..{len(labels) - 1}")
    return idx


def cmd_eigvecs(args) -> tuple:
    model = build_model(args.model, **model_kwargs(args))
    labels = model.eigen_labels()
    H = model.hamiltonian()
    vectors = []
    for i in _select(args.which, labels):
        lab = labels[i]
        v = model.eigenvector(lab)
        vectors.append({"index": i, "eigenvalue": lab.value, "components": v,
                        "norm_sq": model.eigvec_norm(lab.k, lab.sign or 1), "residual": residual(H, lab.value, v)})
    return document("eigvecs", {**_parameters(args, model), "which": args.which}, {"vectors": vectors}), 0


def cmd_couplings(args) -> tuple:
    model = build_model(args.model, **model_kwargs(args))
    rows = [{"n": n, "t_plus": tp, "t_minus": tm, "mu": list(mu), "flag": flag}
            for n, tp, tm, mu, flag in model.couplings_table()]
    return document("couplings", _parameters(args, model), {"rows": rows}), 0


def cmd_verify(args) -> tuple:
    th = Thresholds()
    if args.tol is not None:
        try:
            th = th.with_tol(args.tol)
        except DomainError as exc:
            raise UsageError(str(exc)) from None
    if args.scan or args.sweep:
        if args.perturb:
            raise UsageError("--perturb applies to a single model, not a sweep")
        grid = default_scan(args.model) if args.scan else parse_sweep(args.sweep, args)
        reports = sweep(args.model, grid, th, workers=args.workers)
        params = {"model": args.model, "scan": args.scan, "sweep": args.sweep, "points": len(grid)}
        skipped = sum(1 for r in reports if r.skipped)
        failed = sum(1 for r in reports if not r.overall)
        payload = {"reports": [r.to_dict() for r in reports], "overall": failed == 0,
                   "passed": len(reports) - failed - skipped, "failed": failed, "skipped": skipped}
        ok = failed == 0
    else:
        model = build_model(args.model, **model_kwargs(args))
        params = _parameters(args, model)
        if args.perturb:
            kind, n, rel = parse_perturb(args.perturb)
            try:
                model = model.with_perturbed_coupling(kind, n, rel)
            except IndexError as exc:
                raise UsageError(str(exc)) from None
            params["perturb"] = args.perturb
        report = run_all(model, th)
        payload, ok = report.to_dict(), report.overall
    if args.tol is not None:
        params["tol"] = args.tol
    return document("verify", params, payload), 0 if ok else 1


DISPATCH = {"spectrum": cmd_spectrum, "eigvecs": cmd_eigvecs, "couplings": cmd_couplings, "verify": cmd_verify}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
        doc, code = DISPATCH[args.command](args)
    except (UsageError, DomainError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = render_csv(doc) if args.format == "csv" else render_json(doc)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if code == 1:
        reports = doc["payload"].get("reports", [doc["payload"]])
        for r in reports:
            failing = [c["name"] for c in r["checks"] if not c["passed"]]
            if failing:
                print(f"FAIL {r['model']} {r['parameters']}: {', '.join(failing)}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
