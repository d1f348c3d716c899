"""Seeded randomized checks of the measurement inequalities and identities.

Every suite returns a :class:`SuiteResult`; ``violations`` counts trials in
which an asserted property failed at its tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import sampling
from .joint import interacting_realization, joint_uncertainty_report, marginals, noise_commutator, noise_operators
from .metrics import (
    diagonal_support_test,
    holevo_check,
    precision,
    precision_decomposition,
    robertson_check,
    spread,
)
from .model import (
    Observable,
    Pom,
    apply_operation,
    choi_distance,
    naimark_dilate,
    posterior_family,
    realize_instrument,
    scheme_to_instrument,
)
from .operators import dag, norm
from .repeated import resolution, resolution_decomposition, sql_report


@dataclass
class SuiteResult:
    name: str
    trials: int
    violations: int
    max_defect: float
    tolerance: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.trials > 0


def robertson_suite(trials: int = 1000, seed: int = 0, slack: float = 1e-12) -> SuiteResult:
    rng = np.random.default_rng(seed)
    bad, worst = 0, 0.0
    for _ in range(trials):
        d = int(rng.integers(2, 9))
        a = Observable.from_operator(sampling.random_hermitian(rng, d))
        b = Observable.from_operator(sampling.random_hermitian(rng, d))
        chk = robertson_check(a, b, sampling.random_state(rng, d), slack)
        worst = max(worst, chk.rhs - chk.lhs)
        bad += not chk.holds
    return SuiteResult("robertson", trials, bad, worst, slack)


def holevo_suite(trials: int = 1000, seed: int = 0, slack: float = 1e-12) -> SuiteResult:
    rng = np.random.default_rng(seed)
    bad, worst = 0, 0.0
    for _ in range(trials):
        d = int(rng.integers(2, 5))
        x = sampling.random_pom(rng, d, int(rng.integers(2, 5)))
        y = sampling.random_pom(rng, d, int(rng.integers(2, 5)))
        chk = holevo_check(x, y, sampling.random_state(rng, d), slack)
        worst = max(worst, chk.rhs - chk.lhs)
        bad += not chk.holds
    return SuiteResult("holevo", trials, bad, worst, slack)


def naimark_defect(x: Pom) -> float:
    v, e = naimark_dilate(x)
    worst = norm(dag(v) @ v - np.eye(x.dim))
    for lab, eff in zip(x.outcomes, x.effects):
        p = e.projectors[e.outcomes.index(lab)]
        worst = max(worst, norm(dag(v) @ p @ v - eff))
    return worst


def naimark_suite(trials: int = 200, seed: int = 0, tol: float = 1e-10) -> SuiteResult:
    rng = np.random.default_rng(seed)
    bad, worst = 0, 0.0
    for _ in range(trials):
        x = sampling.random_pom(rng, int(rng.integers(2, 4)), int(rng.integers(2, 5)))
        defect = naimark_defect(x)
        worst = max(worst, defect)
        bad += defect > tol
    return SuiteResult("naimark", trials, bad, worst, tol)


def realize_pool(trials: int, seed: int):
    rng = np.random.default_rng(seed)
    for i in range(trials):
        d = int(rng.integers(2, 5))
        yield i, sampling.random_instrument(rng, d, int(rng.integers(1, 4)), max_kraus=2), rng


def realize_suite(trials: int = 100, seed: int = 0, tol: float = 1e-9) -> SuiteResult:
    bad, worst = 0, 0.0
    for i, t, _ in realize_pool(trials, seed):
        dist = choi_distance(scheme_to_instrument(realize_instrument(t, seed=seed + i)), t)
        worst = max(worst, dist)
        bad += dist > tol
    return SuiteResult("realize", trials, bad, worst, tol)


def sql_cases(target: int, seed: int, max_trials: int | None = None):
    """Random repeated-measurement setups with an unbiased compatible instrument."""
    rng = np.random.default_rng(seed)
    max_trials = max_trials or 50 * target
    for _ in range(max_trials):
        d = int(rng.integers(2, 5))
        a = sampling.random_observable(rng, d)
        t = sampling.random_unbiased_compatible_instrument(rng, a)
        h = sampling.random_hamiltonian(rng, d)
        tau = float(rng.uniform(0.1, 2.0))
        rho = sampling.random_state(rng, d)
        yield t, a, h, tau, rho


def sql_suite(target: int = 200, seed: int = 0, slack: float = 1e-9) -> SuiteResult:
    """Draw cases until ``target`` of them satisfy the resolution condition."""
    filtered = trials = bad = 0
    worst = 0.0
    beaten = 0
    for t, a, h, tau, rho in sql_cases(target, seed):
        trials += 1
        rep = sql_report(t, a, h, tau, rho, sql_slack=slack)
        if rep.condition_holds:
            filtered += 1
            worst = max(worst, rep.rhs - rep.delta_sq)
            bad += not rep.sql_holds
        elif not rep.sql_holds:
            beaten += 1
        if filtered >= target:
            break
    res = SuiteResult("sql", filtered, bad, worst, slack,
                      {"drawn": trials, "condition_holds": filtered, "beaten_without_condition": beaten})
    if filtered < target:
        res.violations += 1
        res.details["shortfall"] = target - filtered
    return res


def posterior_suite(trials: int = 100, seed: int = 0, tol: float = 1e-9) -> SuiteResult:
    """Posterior mixing identity and resolution decomposition over both instrument pools."""
    bad, worst = 0, 0.0
    cases = []
    for _, t, rng in realize_pool(trials, seed):
        cases.append((t, sampling.random_observable(rng, t.dim), sampling.random_state(rng, t.dim)))
    for t, a, _, _, rho in sql_cases(trials, seed + 1, max_trials=trials):
        cases.append((t, a, rho))
    for t, a, rho in cases:
        fam = posterior_family(t, rho)
        mix = norm(fam.mixture() - apply_operation(t, None, rho))
        var_part, bias_part = resolution_decomposition(t, a, rho)
        dec = abs(var_part + bias_part - resolution(t, a, rho) ** 2)
        neg = max(-var_part, -bias_part, 0.0)
        defect = max(mix, dec)
        worst = max(worst, defect)
        bad += defect > tol or neg > 1e-12
    return SuiteResult("posterior", len(cases), bad, worst, tol)


def lemma31_suite(trials: int = 100, seed: int = 0) -> SuiteResult:
    """Moment and marginal criteria for diagonal support agree on random grid measures."""
    rng = np.random.default_rng(seed)
    bad = 0
    diag_true = 0
    for i in range(trials):
        verdict = diagonal_support_test(sampling.random_grid_measure(rng, diagonal=i % 2 == 0))
        bad += not verdict.agree
        diag_true += bool(verdict)
    return SuiteResult("lemma31", trials, bad, 0.0, 1e-12, {"diagonal": diag_true})


def precision_suite(trials: int = 200, seed: int = 0, tol: float = 1e-9) -> SuiteResult:
    """Precision identity for unbiased POMs and the bias decomposition for biased ones."""
    rng = np.random.default_rng(seed)
    bad, worst = 0, 0.0
    for i in range(trials):
        d = int(rng.integers(2, 5))
        a = sampling.random_observable(rng, d)
        pom = sampling.random_unbiased_compatible_pom(rng, a)
        rho = sampling.random_state(rng, d)
        if i % 2:
            pom = Pom(sampling.random_labels(rng, len(pom.outcomes)), pom.effects)
        eps2 = precision(pom, a, rho) ** 2
        if i % 2 == 0:
            defect = abs(eps2 - (spread(pom, rho)[1] - spread(a.as_pom(), rho)[1]))
            lower_ok = True
        else:
            parts = precision_decomposition(pom, a, rho)
            defect = abs(eps2 - parts.total)
            lower_ok = eps2 >= parts.bias - 1e-12 and parts.pom_variance >= parts.operator_variance - 1e-12
        worst = max(worst, defect)
        bad += defect > tol or not lower_ok
    return SuiteResult("precision", trials, bad, worst, tol)


def joint_suite(trials: int = 200, seed: int = 0, slack: float = 1e-10) -> SuiteResult:
    """Both joint-measurement inequalities on random coexistent pairs.

    Pure states are the proven case and count as violations; mixed-state
    failures are recorded in ``details`` only.
    """
    rng = np.random.default_rng(seed)
    bad, mixed_fail, worst = 0, 0, 0.0
    ratio_defect = 0.0
    for i in range(trials):
        m, a, b = sampling.random_coexistent_pair(rng)
        pure = i % 2 == 0
        rho = sampling.random_state(rng, m.dim, pure=pure)
        rep = joint_uncertainty_report(m, a, b, rho, slack)
        ok = rep.check1 and rep.check2
        worst = max(worst, rep.c / 2 - rep.product_eps, rep.c - rep.product_delta)
        if pure:
            bad += not ok
        else:
            mixed_fail += not ok
        x, y = marginals(m)
        hol = holevo_check(x, y, rho)
        if rep.c > 1e-9:
            ratio_defect = max(ratio_defect, abs(rep.c / hol.rhs - 2))
    bad += ratio_defect > 1e-9
    return SuiteResult("joint", trials, bad, worst, slack,
                       {"mixed_failures": mixed_fail, "holevo_ratio_defect": ratio_defect})


def noise_suite(trials: int = 50, seed: int = 0, tol: float = 1e-9) -> SuiteResult:
    """Noise-operator identities for interacting realizations of coexistent pairs."""
    rng = np.random.default_rng(seed)
    bad, worst = 0, 0.0
    for i in range(trials):
        m, a, b = sampling.random_coexistent_pair(rng)
        psi = sampling.random_state(rng, m.dim, pure=True)
        s = interacting_realization(m, seed=seed + i)
        noise = noise_operators(s, [a, b], psi)
        x, y = marginals(m)
        eps = [precision(x, a, psi), precision(y, b, psi)]
        comm = noise_commutator(noise, s, psi)
        # the cross terms contribute -2<[A,B]>, so the net sign is negative
        target = -complex(np.trace((a @ b - b @ a) @ psi.op))
        defect = max(abs(noise[0].mean), abs(noise[1].mean),
                     abs(noise[0].variance - eps[0] ** 2), abs(noise[1].variance - eps[1] ** 2),
                     abs(comm - target))
        worst = max(worst, defect)
        bad += defect > tol
    return SuiteResult("noise", trials, bad, worst, tol)


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "robertson": robertson_suite,
    "holevo": holevo_suite,
    "naimark": naimark_suite,
    "realize": realize_suite,
    "sql": sql_suite,
    "posterior": posterior_suite,
    "lemma31": lemma31_suite,
    "precision": precision_suite,
    "joint": joint_suite,
    "noise": noise_suite,
}

DEFAULT_TRIALS = {
    "robertson": 1000, "holevo": 1000, "naimark": 200, "realize": 100, "sql": 200,
    "posterior": 100, "lemma31": 100, "precision": 200, "joint": 200, "noise": 50,
}


def run_suite(name: str, trials: int | None = None, seed: int = 0) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name](trials or DEFAULT_TRIALS[name], seed)
