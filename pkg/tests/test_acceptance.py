"""Acceptance suite: one test per criterion, one printed PASS/FAIL line each."""
import itertools
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from sshdoubling.models import build_model
from sshdoubling.tridiag import eig_oracle, residual
from sshdoubling.verify import _christoffel, _pairwise_orthogonality, qracah_scan_grid, sweep

DELTAS = (-0.9, -0.5, 0.0, 0.5, 0.9)
QR = dict(q=0.5, alpha=0.1, beta=0.2, delta=-2.0)
QR_FLAGS = ["--q", "0.5", "--alpha", "0.1", "--beta", "0.2", "--qr-delta", "-2.0"]


def every_model(N):
    yield "ssh", dict(N=N, delta=0.4)
    yield "ssh-mu", dict(N=N, delta=-0.3, mu_plus=0.3, mu_minus=-0.2)
    yield "krawtchouk", dict(N=N, p=0.3)
    yield "qracah1", dict(N=N, **QR)
    yield "qracah2", dict(N=N, **QR)


def announce(capsys, number, title, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {number} {'PASS' if ok else 'FAIL'}: {title} ({detail})")
    assert ok, detail


def spectrum_dev(model):
    return float(np.max(np.abs(np.sort(model.closed_form_spectrum()) - eig_oracle(model.hamiltonian()).eigenvalues)))


def test_criterion_1_homogeneous_spectrum(capsys):
    t0 = time.perf_counter()
    worst = max(spectrum_dev(build_model("ssh", N=N, delta=d)) for N in (1, 10, 100, 200) for d in DELTAS)
    elapsed = time.perf_counter() - t0
    announce(capsys, 1, "homogeneous chain spectrum vs bisection", worst <= 1e-10 and elapsed < 5.0,
             f"max dev {worst:.1e} <= 1e-10, {elapsed:.2f} s < 5 s")


def test_criterion_2_chemical_potential_spectrum(capsys):
    worst = max(spectrum_dev(build_model("ssh-mu", N=N, delta=d, mu_plus=a, mu_minus=b))
                for a, b in ((0.3, -0.2), (1.0, 1.0), (2.0, 0.0)) for N in (1, 10, 100, 200) for d in DELTAS)
    announce(capsys, 2, "on-site variant spectrum vs bisection", worst <= 1e-10, f"max dev {worst:.1e} <= 1e-10")


def test_criterion_3_krawtchouk(capsys):
    spec = res = norm = dbs = 0.0
    for N, p in itertools.product(range(1, 51), (0.1, 0.3, 0.5, 0.7, 0.9)):
        m = build_model("krawtchouk", N=N, p=p)
        H = m.hamiltonian()
        roots = np.sqrt(np.arange(1, N + 1))
        exact = np.sort(np.concatenate([-roots, [0.0], roots]))
        spec = max(spec, float(np.max(np.abs(eig_oracle(H).eigenvalues - exact))))
        for lab in m.eigen_labels():
            v = m.closed_form_vector(lab)
            res = max(res, residual(H, lab.value, v))
            norm = max(norm, abs(m.eigvec_norm(lab.k, lab.sign or 1) - v @ v) / (v @ v))
        dbs = max(dbs, m.dbs_residual())
    ok = spec <= 1e-10 and res <= 1e-11 and norm <= 1e-8 and dbs <= 1e-10
    announce(capsys, 3, "Krawtchouk chain, N <= 50", ok,
             f"spectrum {spec:.1e}, residual {res:.1e}, norms {norm:.1e}, contiguity {dbs:.1e}")


@pytest.fixture(scope="module")
def qracah_scans():
    return {case: sweep(f"qracah{n}", qracah_scan_grid(case)) for n, case in ((1, "I"), (2, "II"))}


def test_criterion_4_qracah_scans(capsys, qracah_scans):
    ran = [r for reps in qracah_scans.values() for r in reps if not r.skipped]
    skipped = sum(1 for reps in qracah_scans.values() for r in reps if r.skipped)
    worst = {}
    for r in ran:
        for c in r.checks:
            worst[c.name] = max(worst.get(c.name, 0.0), c.residual)
    bad = sorted({f"{r.label} {r.parameters}: {', '.join(r.failing())}" for r in ran if not r.overall})
    detail = (f"{len(ran)} admissible points, {skipped} skipped; constraints {worst['constraints']:.1e}, "
              f"spectrum {worst['spectrum_vs_oracle']:.1e}, duality {worst['duality']:.1e}, "
              f"weight {worst['dual_weight']:.1e}, contiguity {worst['contiguity']:.1e}, norms {worst['norms']:.1e}")
    announce(capsys, 4, "q-Racah I and II over the shipped lattice", ran and not bad, detail if not bad else bad[0])


def test_criterion_5_christoffel(capsys):
    worst, count = 0.0, 0
    for N in (1, 2, 5, 10, 20):
        for name, kw in every_model(N):
            m = build_model(name, **kw)
            xmax = float(np.max(np.abs(m.closed_form_spectrum())))
            worst = max(worst, _christoffel(m, xmax, 1e-10))
            count += 1
    announce(capsys, 5, "Christoffel and ratio identities, 50 samples", worst <= 1e-10,
             f"{count} chains, max rel residual {worst:.1e} <= 1e-10")


def test_criterion_6_orthogonality(capsys):
    worst = 0.0
    for N in (1, 2, 5, 10, 20, 30):
        for name, kw in every_model(N):
            m = build_model(name, **kw)
            worst = max(worst, _pairwise_orthogonality([m.eigenvector(lab) for lab in m.eigen_labels()]))
    announce(capsys, 6, "pairwise orthogonality of eigenvectors", worst <= 1e-9, f"max {worst:.1e} <= 1e-9")


def model_flags(name, kw):
    flags = ["--model", name]
    for key, val in kw.items():
        flag = "--qr-delta" if name.startswith("qracah") and key == "delta" else "--" + key.replace("_", "-")
        flags += [flag, str(val)]
    return flags


def test_criterion_7_fault_sensitivity(capsys, run_cli):
    runs, missed = 0, []
    for N in (2, 6):
        for name, kw in every_model(N):
            sol = build_model(name, **kw).solution
            for which in ("t_plus", "t_minus"):
                for n, t in enumerate(getattr(sol, which)):
                    if t == 0.0:
                        continue  # the truncated coupling has no relative scale
                    r = run_cli("verify", *model_flags(name, kw), "--perturb", f"{which}:{n}:1e-4")
                    runs += 1
                    if r.code == 0:
                        missed.append(f"{name} N={N} {which}[{n}]")
    announce(capsys, 7, "single-coupling 1e-4 perturbations detected", not missed,
             f"{runs} perturbed runs, all exit nonzero" if not missed else "missed " + ", ".join(missed))


def test_criterion_8_determinism(capsys, run_cli):
    differ, runs = [], 0
    for name, kw in every_model(5):
        for cmd in ("spectrum", "eigvecs", "couplings", "verify"):
            for fmt in ("json", "csv"):
                argv = [cmd, *model_flags(name, kw), "--format", fmt]
                if cmd == "spectrum":
                    argv.append("--oracle")
                a, b = run_cli(*argv), run_cli(*argv)
                runs += 1
                if (a.code, a.out, a.err) != (b.code, b.out, b.err):
                    differ.append(" ".join(argv))
    argv = [sys.executable, "-m", "sshdoubling", "verify", "--model", "qracah1", *QR_FLAGS, "--N", "4"]
    procs = [subprocess.run(argv, capture_output=True, check=False) for _ in range(2)]
    runs += 1
    if procs[0].stdout != procs[1].stdout or procs[0].returncode != procs[1].returncode:
        differ.append("subprocess verify")
    announce(capsys, 8, "byte-identical output across repeated runs", not differ,
             f"{runs} command pairs identical" if not differ else "differs: " + "; ".join(differ))
