"""Repeated measurements: resolution, prediction and the standard quantum limit."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .metrics import (
    BiasError,
    CompatibilityError,
    _chop,
    is_compatible,
    is_unbiased,
    precision,
    spread,
)
from .model import (
    DensityState,
    Instrument,
    Observable,
    apply_operation,
    as_hamiltonian,
    as_observable,
    as_state,
    associated_pom,
    evolve,
    posterior_family,
)
from .operators import commutator_trace, dag

EXCLUDED_WEIGHT_TOL = 1e-9


def heisenberg(a, h, tau: float) -> np.ndarray:
    """``Â(τ) = U_τ^† Â U_τ``."""
    a = as_observable(a)
    u = as_hamiltonian(h).unitary(tau)
    out = dag(u) @ a.operator @ u
    return (out + dag(out)) / 2


def _sq_deviation(a: Observable, center: float, rho: DensityState) -> float:
    return float(sum((lab - center) ** 2 * np.trace(p @ rho.op).real
                     for lab, p in zip(a.outcomes, a.projectors)))


def resolution(t: Instrument, a, rho) -> float:
    """Root-mean-square scatter between the outcome and an ideal ``a`` on the posterior."""
    a = as_observable(a)
    fam = posterior_family(t, rho)
    sq = sum(e.probability * _sq_deviation(a, e.outcome, e.posterior)
             for e in fam if e.posterior is not None)
    return float(np.sqrt(max(_chop(sq), 0.0)))


def resolution_decomposition(t: Instrument, a, rho) -> tuple[float, float]:
    """Posterior-variance part and prediction-bias part of the squared resolution."""
    a = as_observable(a)
    aop = a.operator
    fam = posterior_family(t, rho)
    var_part = bias_part = 0.0
    for e in fam:
        if e.posterior is None:
            continue
        _, var, _ = spread(a.as_pom(), e.posterior)
        mean = np.trace(aop @ e.posterior.op).real
        var_part += e.probability * var
        bias_part += e.probability * (mean - e.outcome) ** 2
    return float(var_part), float(bias_part)


def predictor(t: Instrument, a, h, tau: float, rho) -> dict:
    """Mean-value prediction ``h(x) = Tr[rho_x Â(τ)]`` for each outcome with a posterior."""
    a_tau = heisenberg(a, h, tau)
    return {e.outcome: float(np.trace(e.posterior.op @ a_tau).real)
            for e in posterior_family(t, rho) if e.posterior is not None}


def _conditional(t: Instrument, a_tau: np.ndarray, h, tau: float, posterior: DensityState) -> float:
    hx = np.trace(posterior.op @ a_tau).real
    pom = associated_pom(t)
    later = evolve(posterior, h, tau)
    probs = [np.trace(e @ later.op).real for e in pom.effects]
    return _chop(float(sum(p * (lab - hx) ** 2 for lab, p in zip(pom.labels, probs))))


def conditional_uncertainty(t: Instrument, a, h, tau: float, rho, x) -> float:
    """Squared prediction error ``Δ[τ, ρ, x]²`` for the repeat of ``t`` after outcome ``x``.

    Raises ``ValueError`` when ``x`` has no posterior (zero probability).
    """
    entry = posterior_family(t, rho)[x]
    if entry.posterior is None:
        raise ValueError(f"outcome {x!r} has zero probability; no posterior state")
    return _conditional(t, heisenberg(a, h, tau), h, tau, entry.posterior)


def predictive_uncertainty(t: Instrument, a, h, tau: float, rho) -> float:
    """Squared predictive uncertainty ``Δ[τ, ρ]²`` averaged over first outcomes."""
    a_tau = heisenberg(a, h, tau)
    return float(sum(e.probability * _conditional(t, a_tau, h, tau, e.posterior)
                     for e in posterior_family(t, rho) if e.posterior is not None))


@dataclass(frozen=True)
class OutcomeRow:
    outcome: float
    probability: float
    prediction: float | None
    uncertainty: float | None


@dataclass(frozen=True)
class SqlReport:
    sigma: float
    epsilon_after: float
    delta_sq: float
    rhs: float
    condition_holds: bool
    sql_holds: bool
    rows: tuple = field(default_factory=tuple)
    excluded_weight: float = 0.0

    @property
    def implication_holds(self) -> bool:
        """The theorem's claim: the resolution condition forces the limit."""
        return self.sql_holds or not self.condition_holds

    @property
    def excluded_weight_flag(self) -> bool:
        return self.excluded_weight > EXCLUDED_WEIGHT_TOL

    @property
    def ratio(self) -> float:
        return self.delta_sq / self.rhs if self.rhs > 0 else float("inf")


def check_unbiased_compatible(t: Instrument, a) -> None:
    a = as_observable(a)
    pom = associated_pom(t)
    if not is_compatible(pom, a):
        raise CompatibilityError("associated POM is not compatible with the observable")
    if not is_unbiased(pom, a):
        raise BiasError("associated POM is biased for the observable")


def sql_report(t: Instrument, a, h, tau: float, rho,
               condition_slack: float = 1e-12, sql_slack: float = 1e-9) -> SqlReport:
    """Resolution condition and standard-quantum-limit bound for a repeated measurement.

    ``rhs`` is ``|Tr[[Â(0), Â(τ)] X(R)ρ]|`` where ``X(R)ρ`` is the state right
    after the first measurement with the outcome discarded.
    """
    a = as_observable(a)
    h = as_hamiltonian(h)
    rho = as_state(rho)
    check_unbiased_compatible(t, a)
    pom = associated_pom(t)

    after = DensityState(apply_operation(t, None, rho))
    sigma = resolution(t, a, rho)
    eps_after = precision(pom, a, evolve(after, h, tau))
    a_tau = heisenberg(a, h, tau)
    rhs = abs(commutator_trace(a.operator, a_tau, after))

    rows, delta_sq = [], 0.0
    fam = posterior_family(t, rho)
    for e in fam:
        if e.posterior is None:
            rows.append(OutcomeRow(e.outcome, e.probability, None, None))
            continue
        cond = _conditional(t, a_tau, h, tau, e.posterior)
        delta_sq += e.probability * cond
        hx = float(np.trace(e.posterior.op @ a_tau).real)
        rows.append(OutcomeRow(e.outcome, e.probability, hx, float(np.sqrt(max(cond, 0.0)))))

    rhs = _chop(rhs)
    delta_sq = max(_chop(delta_sq), 0.0)
    return SqlReport(
        sigma=sigma,
        epsilon_after=eps_after,
        delta_sq=float(delta_sq),
        rhs=float(rhs),
        condition_holds=sigma <= eps_after + condition_slack,
        sql_holds=delta_sq >= rhs - sql_slack,
        rows=tuple(rows),
        excluded_weight=fam.excluded_weight,
    )
