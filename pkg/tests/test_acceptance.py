"""Acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line (also collected into the pytest
terminal summary) with the measured worst case and the runtime against its
budget.  Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, ferro_chain_pressure
from quenchlab import cli, corpus
from quenchlab import inequalities as lab
from quenchlab.engine import log_partition
from quenchlab.lattice import box, instantiate
from quenchlab.limits import LN2, convergence_run
from quenchlab.quenched import annealed_pressure_gaussian, quenched_exact, quenched_mc


class Clock:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def verdict(number, title, ok, detail, clock, budget):
    in_time = clock.elapsed < budget
    status = "PASS" if ok and in_time else "FAIL"
    line = f"criterion {number:2d} {status}  {title}: {detail} [{clock.elapsed:.1f}s / {budget}s]"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line
    assert in_time, line


def test_01_ratio_identity():
    with Clock() as c:
        rep = corpus.run_ratio(1000)
    verdict(1, "ratio identity", rep.passed and rep.instances_run == 1000,
            f"max relative error {rep.max_violation:.2e} over {rep.instances_run} instances", c, 10)


def test_02_telescoping_bound():
    with Clock() as c:
        rep = corpus.run_telescoping(1000)
    verdict(2, "telescoping bound", rep.passed and rep.max_violation <= 1e-10,
            f"max violation {rep.max_violation:.2e} over {rep.instances_run} instances", c, 30)


def test_03_corollary_bounds():
    with Clock() as c:
        rep = corpus.run_corollary(100)
    verdict(3, "prefix bounds (nonrandom/dependent/independent)", rep.passed and rep.max_violation <= 1e-10,
            f"max violation {rep.max_violation:.2e} over {rep.instances_run} reports", c, 60)


def test_04_cl_monotonicity():
    with Clock() as c:
        reps = []
        for s in range(100):
            ens, t, beta = corpus.cl_instance(s)
            reps.append(lab.cl_monotonicity_check(ens, None, beta, t, corpus.LAMBDA_GRID, seed=s))
    mono = max(r.details["monotonicity_violation"] for r in reps)
    fd_min = min(r.details["fd_min"] for r in reps)
    gap = max(r.details["analytic_fd_gap"] for r in reps)
    ok = all(r.passed for r in reps) and mono <= 1e-10 and fd_min >= -1e-8 and gap <= 1e-6
    verdict(4, "CL monotonicity", ok and len(corpus.LAMBDA_GRID) == 21,
            f"worst decrease {mono:.2e}, min FD slope {fd_min:.2e}, analytic/FD gap {gap:.2e}", c, 60)


def test_05_griffiths():
    with Clock() as c:
        grid = np.linspace(0.0, 2.0, 11)
        reps = []
        for s in range(200):
            h, t, beta = corpus.griffiths_instance(s)
            reps.append(lab.griffiths_check(h, beta, t, grid, seed=s))
    fd_min = min(r.details["fd_min"] for r in reps)
    corr = min(r.details["min_correlation"] for r in reps)
    ok = all(r.passed for r in reps) and fd_min >= -1e-10 and corr >= -1e-12
    verdict(5, "Griffiths", ok, f"min FD slope {fd_min:.2e}, min correlation {corr:.2e}", c, 30)


def test_06_superadditivity():
    with Clock() as c:
        closed = 0.0
        for beta in (0.5, 1.0):
            for N in range(1, 21):
                h = instantiate(corpus.FERRO_CHAIN, box(N), 0)
                p = log_partition(h, beta).pressure_density
                closed = max(closed, abs(p - ferro_chain_pressure(N, beta)) / ferro_chain_pressure(N, beta))
        rep = corpus.run_superadditivity()
    ok = closed <= 1e-12 and rep.passed
    verdict(6, "super-additivity", ok,
            f"closed-form rel. error {closed:.2e}, {rep.instances_run} pairs, max violation {rep.max_violation:.2e}",
            c, 60)


def test_07_limit_bounds():
    with Clock() as c:
        worst = -math.inf
        flags = []
        for beta in (0.5, 1.0):
            cases = [
                (corpus.FERRO_CHAIN, "ferro_exact", [2, 4, 8, 16], LN2 + 2 * beta),
                (corpus.GAUSSIAN_CHAIN, "quenched_mc", [2, 4, 8], LN2 + 1.5 * beta**2),
                (corpus.PARETO_CHAIN, "quenched_mc", [2, 4, 8], LN2 + 6 * beta),
            ]
            for fam, kind, Ns, bound in cases:
                table = convergence_run(fam, kind, beta, Ns, samples=10_000, seed=7)
                flags += table.flags
                assert table.claimed_limit_bound == pytest.approx(bound, rel=1e-15)
                for r in table.rows:
                    worst = max(worst, r.pressure + 5 * r.std_error - bound)
    verdict(7, "limit bounds", worst <= 0 and not flags, f"largest p_N + 5 sigma - bound {worst:.3f}", c, 300)


def test_08_truncation():
    with Clock() as c:
        rep = corpus.run_truncation(10_000, 2024)
    rows = rep.details["rows"]
    N, beta = 6, 1.0
    closed = max(abs(r["bound"] - 2 * beta * (N - 1) / N * 3 * r["R"] ** -0.5) / r["bound"] for r in rows)
    slack = min(r["bound"] + 5 * r["std_error"] - r["difference"] for r in rows)
    ok = rep.passed and closed <= 1e-12 and [r["R"] for r in rows] == [1, 3, 10, 30, 100]
    verdict(8, "truncation", ok, f"min slack {slack:.3f}, bound closed-form rel. error {closed:.2e}", c, 300)


def test_09_oracle_equivalence():
    with Clock() as c:
        worst = -math.inf
        zmax = 0.0
        for seed in range(50):
            fam, region = corpus.random_family(seed, "rademacher", frustrated=True)
            beta = (0.5, 1.0, 2.0)[seed % 3]
            ex = quenched_exact(fam, region, beta).mean
            mc = quenched_mc(fam, region, beta, 10_000, seed)
            worst = max(worst, abs(mc.mean - ex) - 5 * mc.std_error)
            zmax = max(zmax, abs(mc.mean - ex) / mc.std_error)
    verdict(9, "MC vs exact", worst <= 0, f"largest |MC - exact| / sigma {zmax:.2f}", c, 120)


def test_10_jensen():
    with Clock() as c:
        worst = -math.inf
        for seed in range(20):
            fam, region = corpus.random_family(seed, "gaussian")
            mc = quenched_mc(fam, region, 1.0, 10_000, seed)
            ann = annealed_pressure_gaussian(fam, region, 1.0)
            worst = max(worst, mc.mean - ann - 5 * mc.std_error)
    verdict(10, "quenched below annealed", worst <= 0, f"largest quenched - annealed - 5 sigma {worst:.3f}", c, 120)


def _chain(dist, side, **run):
    return {
        "model": {"dimension": 1, "orbits": [{"sites": [[0], [1]], "distribution": dist, "lambda": 1.0}]},
        "region": {"box_side": side},
        "run": run,
    }


def test_11_cli_determinism(tmp_path):
    import json

    gauss = {"kind": "gaussian", "sd": 1.0}
    pareto = {"kind": "symmetric_pareto", "alpha": 1.5, "scale": 1.0}
    runs = [
        ("pressure", _chain(gauss, 8, seed=3), []),
        ("quenched", _chain(gauss, 6, samples=2000, seed=3), []),
        ("quenched", _chain({"kind": "rademacher"}, 6, seed=3), ["--exact"]),
        ("verify", _chain({"kind": "rademacher"}, 4, seed=3, checks=["ratio", "telescoping", "corollary"]), []),
        ("limit", _chain(gauss, 4, samples=1000, seed=3, N_list=[2, 3, 4]), []),
        ("truncation", _chain(pareto, 5, samples=1000, seed=3, R_grid=[1, 10]), []),
    ]
    with Clock() as c:
        mismatched = []
        for i, (cmd, cfg, extra) in enumerate(runs):
            path = tmp_path / f"cfg{i}.json"
            path.write_text(json.dumps(cfg))
            outputs = []
            for threads in ("1", "4", "1"):
                out = tmp_path / f"out{i}_{len(outputs)}"
                code = cli.main([cmd, "--config", str(path), "--threads", threads, "--out", str(out), *extra])
                assert code == 0
                sidecar = out.with_name(out.name + ".json")
                outputs.append(out.read_bytes() + (sidecar.read_bytes() if sidecar.exists() else b""))
            if len(set(outputs)) != 1:
                mismatched.append(cmd)
    verdict(11, "CLI determinism", not mismatched,
            f"{len(runs)} runs x threads 1/4/1, mismatches {mismatched or 'none'}", c, 120)
