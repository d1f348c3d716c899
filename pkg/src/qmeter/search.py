"""Randomized search for instruments that beat the standard quantum limit."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DensityState, Instrument, Pom, as_hamiltonian, as_observable
from .operators import commutator, dag, inv_sqrt_psd, norm, psd_sqrt
from .repeated import SqlReport, heisenberg, sql_report
from .sampling import ginibre, random_unbiased_compatible_pom

COMMUTING_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SearchResult:
    best: Instrument | None
    report: SqlReport | None
    evaluations: int
    status: str

    @property
    def ratio(self) -> float | None:
        return None if self.report is None else self.report.ratio

    @property
    def violation(self) -> bool:
        return self.report is not None and not self.report.sql_holds


def _project(blocks: list[np.ndarray], effect: np.ndarray) -> list[np.ndarray]:
    """Re-impose ``sum_j K_j^† K_j = E`` through the polar factor of the stacked block."""
    stacked = np.vstack(blocks)
    q = stacked @ inv_sqrt_psd(dag(stacked) @ stacked, cutoff=1e-14)
    stacked = q @ psd_sqrt(effect)
    d = effect.shape[0]
    return [stacked[j * d:(j + 1) * d] for j in range(len(blocks))]


def _measure_prepare_start(rng, a) -> tuple[Pom, list[list[np.ndarray]]]:
    sets = []
    for p in a.projectors:
        w, v = np.linalg.eigh(p)
        ks = []
        for i in np.flatnonzero(w > 0.5):
            psi = ginibre(rng, a.dim, 1)[:, 0]
            ks.append(np.outer(psi / np.linalg.norm(psi), v[:, i].conj()))
        sets.append(ks)
    return a.as_pom(), sets


def _kraus_start(rng, a) -> tuple[Pom, list[list[np.ndarray]]]:
    pom = a.as_pom() if rng.random() < 0.5 else random_unbiased_compatible_pom(rng, a)
    sets = []
    for e in pom.effects:
        blocks = [ginibre(rng, a.dim) for _ in range(int(rng.integers(1, 3)))]
        sets.append(_project(blocks, e))
    return pom, sets


def sql_violation_search(dim: int, a, h, tau: float, budget: int = 400, seed: int = 0,
                         rho=None, objective: str = "ratio", rhs_floor: float = 0.1,
                         local_steps: int = 24, step: float = 0.3) -> SearchResult:
    """Look for an unbiased, ``a``-compatible instrument violating the SQL bound.

    Candidates come from two families: measure-and-prepare instruments of
    ``a`` and random Kraus sets for an unbiased ``a``-compatible POM. Each
    restart is refined by perturbing one outcome's Kraus operators at a time
    and restoring the POM constraint through a polar factor.

    ``objective="ratio"`` minimizes ``Δ²/rhs`` among candidates with
    ``rhs >= rhs_floor``; ``objective="margin"`` maximizes ``rhs - Δ²``.
    Every candidate counts against ``budget``; the result is deterministic
    given ``seed`` and ties keep the earlier candidate.
    """
    if objective not in ("ratio", "margin"):
        raise ValueError(f"unknown objective {objective!r}")
    a = as_observable(a)
    h = as_hamiltonian(h)
    if a.dim != dim or h.dim != dim:
        raise ValueError("observable and Hamiltonian must act on the given dimension")
    rho = DensityState.maximally_mixed(dim) if rho is None else rho

    if norm(commutator(a.operator, heisenberg(a, h, tau))) <= COMMUTING_TOL:
        return SearchResult(None, None, 0, "no violation possible: A(0) and A(tau) commute, rhs = 0")

    rng = np.random.default_rng(seed)

    def score(report: SqlReport) -> float | None:
        if objective == "margin":
            return report.rhs - report.delta_sq
        if report.rhs < rhs_floor:
            return None
        return -report.delta_sq / report.rhs

    best = best_report = None
    best_score = -np.inf
    evals = 0
    restart = 0
    while evals < budget:
        start = _measure_prepare_start if restart % 2 == 0 else _kraus_start
        restart += 1
        pom, sets = start(rng, a)
        cur_score, cur_sets = -np.inf, sets
        for it in range(local_steps + 1):
            if evals >= budget:
                break
            if it == 0:
                trial = cur_sets
            else:
                k = int(rng.integers(len(cur_sets)))
                trial = list(cur_sets)
                scale = step * (1 - it / (local_steps + 1))
                moved = [kr + scale * ginibre(rng, dim) for kr in cur_sets[k]]
                trial[k] = _project(moved, pom.effects[k])
            evals += 1
            inst = Instrument(pom.outcomes, trial)
            rep = sql_report(inst, a, h, tau, rho)
            s = score(rep)
            if s is None:
                continue
            if s > cur_score:
                cur_score, cur_sets = s, trial
            if s > best_score:
                best_score, best, best_report = s, inst, rep

    if best is None:
        return SearchResult(None, None, evals, "budget exhausted without a valid candidate")
    status = "violation found" if not best_report.sql_holds else "no violation found"
    return SearchResult(best, best_report, evals, status)
