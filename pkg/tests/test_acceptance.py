"""Acceptance criteria 1-10, one test per criterion."""
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from qmeter.joint import joint_uncertainty_report, jxy
from qmeter.metrics import diagonal_support_test, holevo_check, precision, robertson_check, spread
from qmeter.model import (
    DensityState,
    Observable,
    apply_operation,
    associated_pom,
    choi_distance,
    posterior_family,
    realize_instrument,
    scheme_to_instrument,
)
from qmeter.metrics import compatible_joint
from qmeter.models import SX, SY, SZ, bloch_xy_state, measure_prepare, rotation_z_to_x, unsharp
from qmeter.operators import norm
from qmeter.repeated import resolution, resolution_decomposition, sql_report
from qmeter.sampling import random_grid_measure, random_observable, random_state
from qmeter.suites import holevo_suite, naimark_suite, realize_pool, robertson_suite, sql_cases

ROOT = Path(__file__).resolve().parents[1]
ZERO = DensityState.pure([1, 0])
SEED = 0


def report(n, ok, detail):
    print(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def sql_pool():
    """Instruments drawn for criterion 4, kept for the posterior checks of criterion 8."""
    start = time.perf_counter()
    cases, filtered, violations = [], 0, 0
    for t, a, h, tau, rho in sql_cases(200, SEED):
        rep = sql_report(t, a, h, tau, rho, sql_slack=1e-9)
        cases.append((t, a, rho))
        if rep.condition_holds:
            filtered += 1
            violations += not rep.sql_holds
        if filtered >= 200:
            break
    return cases, filtered, violations, time.perf_counter() - start


@pytest.fixture(scope="module")
def realize_cases():
    return [(t, rng) for _, t, rng in realize_pool(100, SEED)]


def test_criterion_01_precision_identity():
    x = associated_pom(unsharp(SZ, 0.5))
    a = Observable.from_operator(SZ)
    mu = compatible_joint(x, a, ZERO)
    direct = sum(p * (xv - av) ** 2 for (xv, av), p in zip(mu.labels, mu.probs))
    via_variances = spread(x, ZERO)[1] - spread(a.as_pom(), ZERO)[1]
    ok = abs(direct - 3) <= 1e-10 and abs(via_variances - 3) <= 1e-10 and abs(direct - via_variances) <= 1e-10
    ok = ok and abs(precision(x, a, ZERO) ** 2 - 3) <= 1e-10
    report(1, ok, f"direct={direct!r} variances={via_variances!r}")


def test_criterion_02_joint_bounds():
    rep = joint_uncertainty_report(jxy(), SX, SY, ZERO)
    tol = 1e-9
    ok = (abs(rep.eps_a - 1) <= tol and abs(rep.eps_b - 1) <= tol
          and abs(rep.delta_x - np.sqrt(2)) <= tol and abs(rep.delta_y - np.sqrt(2)) <= tol
          and abs(rep.c - 2) <= tol
          and abs(rep.product_eps - 1) <= tol and abs(rep.c / 2 - 1) <= tol and rep.check1
          and abs(rep.product_delta - 2) <= tol and rep.check2)
    report(2, ok, f"eps=({rep.eps_a:.12f},{rep.eps_b:.12f}) delta=({rep.delta_x:.12f},{rep.delta_y:.12f}) c={rep.c:.12f}")


def test_criterion_03_sql_violation():
    t = measure_prepare(SZ, bloch_xy_state(np.pi / 6))
    rep = sql_report(t, SZ, rotation_z_to_x(), 1.0, ZERO)
    tol = 1e-9
    ok = (abs(rep.sigma - np.sqrt(2)) <= tol and abs(rep.epsilon_after) <= tol and not rep.condition_holds
          and abs(rep.delta_sq - 0.25) <= tol and abs(rep.rhs - 1.0) <= tol and rep.delta_sq < rep.rhs
          and not rep.sql_holds)
    report(3, ok, f"sigma={rep.sigma!r} eps_after={rep.epsilon_after!r} delta_sq={rep.delta_sq!r} rhs={rep.rhs!r}")


def test_criterion_04_sql_implication(sql_pool):
    cases, filtered, violations, elapsed = sql_pool
    dims_ok = all(t.dim <= 4 for t, _, _ in cases)
    ok = filtered >= 200 and violations == 0 and elapsed <= 60 and dims_ok
    report(4, ok, f"filtered={filtered} drawn={len(cases)} violations={violations} time={elapsed:.1f}s")


def test_criterion_05_realization_roundtrip(realize_cases):
    start = time.perf_counter()
    worst = max(choi_distance(scheme_to_instrument(realize_instrument(t, seed=SEED + i)), t)
                for i, (t, _) in enumerate(realize_cases))
    elapsed = time.perf_counter() - start
    shape_ok = all(t.dim <= 4 and len(t.outcomes) <= 3 and max(len(k) for k in t.kraus_sets) <= 2
                   for t, _ in realize_cases)
    ok = len(realize_cases) == 100 and worst <= 1e-9 and elapsed <= 60 and shape_ok
    report(5, ok, f"cases={len(realize_cases)} worst_choi={worst:.2e} time={elapsed:.1f}s")


def test_criterion_06_naimark():
    res = naimark_suite(200, SEED, tol=1e-10)
    report(6, res.passed and res.trials == 200, f"trials={res.trials} worst={res.max_defect:.2e}")


def test_criterion_07_robertson_holevo():
    rob = robertson_suite(1000, SEED, slack=1e-12)
    hol = holevo_suite(1000, SEED, slack=1e-12)
    r = robertson_check(SX, SY, ZERO)
    h = holevo_check(Observable.from_operator(SX).as_pom(), Observable.from_operator(SY).as_pom(), ZERO)
    saturated = all(abs(v - 1) <= 1e-12 for v in (r.lhs, r.rhs, h.lhs, h.rhs))
    ok = rob.passed and hol.passed and rob.trials == hol.trials == 1000 and saturated
    report(7, ok, f"robertson_violations={rob.violations} holevo_violations={hol.violations} "
                  f"saturation=({r.lhs:.12f},{r.rhs:.12f},{h.lhs:.12f},{h.rhs:.12f})")


def test_criterion_08_posterior_consistency(sql_pool, realize_cases):
    cases = list(sql_pool[0])
    for t, rng in realize_cases:
        cases.append((t, random_observable(rng, t.dim), random_state(rng, t.dim)))
    worst_mix = worst_dec = 0.0
    negative = 0
    for t, a, rho in cases:
        worst_mix = max(worst_mix, norm(posterior_family(t, rho).mixture() - apply_operation(t, None, rho)))
        var_part, bias_part = resolution_decomposition(t, a, rho)
        worst_dec = max(worst_dec, abs(var_part + bias_part - resolution(t, a, rho) ** 2))
        negative += var_part < -1e-12 or bias_part < -1e-12
    ok = worst_mix <= 1e-9 and worst_dec <= 1e-9 and negative == 0
    report(8, ok, f"cases={len(cases)} mixing={worst_mix:.2e} decomposition={worst_dec:.2e}")


def test_criterion_09_diagonal_support_equivalence():
    rng = np.random.default_rng(SEED)
    verdicts = [diagonal_support_test(random_grid_measure(rng, diagonal=i % 2 == 0)) for i in range(100)]
    agree = sum(v.agree for v in verdicts)
    diag = sum(bool(v) for v in verdicts)
    report(9, agree == 100 and diag == 50, f"agree={agree}/100 diagonal={diag}")


def test_criterion_10_cli_determinism(tmp_path):
    config = ROOT / "configs" / "sql_measure_prepare.json"
    outs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        proc = subprocess.run([sys.executable, "-m", "qmeter", "run", "--config", str(config), "--out", str(out)],
                              capture_output=True, check=False)
        assert proc.returncode == 0, proc.stderr
        outs.append(out.read_bytes())
    report(10, outs[0] == outs[1] and len(outs[0]) > 0, f"bytes={len(outs[0])} identical={outs[0] == outs[1]}")
