import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from qmeter.metrics import BiasError, CompatibilityError, operator_variance, precision
from qmeter.model import DensityState, Hamiltonian, Observable, associated_pom, evolve, posterior_family
from qmeter.models import SX, SZ, luders, rotation_z_to_x, unsharp
from qmeter.operators import norm
from qmeter.repeated import (
    conditional_uncertainty,
    heisenberg,
    predictive_uncertainty,
    predictor,
    resolution,
    resolution_decomposition,
    sql_report,
)
from qmeter.sampling import (
    random_hamiltonian,
    random_observable,
    random_state,
    random_unbiased_compatible_instrument,
)

seeds = st.integers(0, 2**32 - 1)


def test_heisenberg_examples(rng):
    a = random_observable(rng, 3)
    h = random_hamiltonian(rng, 3)
    assert norm(heisenberg(a, h, 0) - a.operator) < 1e-14
    commuting = Hamiltonian(a.operator @ a.operator + 2 * a.operator)
    assert norm(heisenberg(a, commuting, 1.7) - a.operator) < 1e-12
    assert norm(heisenberg(SZ, rotation_z_to_x(), 1) - SX) <= 1e-10


@given(seeds, st.floats(-3, 3))
@settings(max_examples=40, deadline=None)
def test_heisenberg_matches_expm_and_keeps_spectrum(seed, tau):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 5))
    a, h = random_observable(rng, d), random_hamiltonian(rng, d)
    u = scipy.linalg.expm(-1j * tau * h.op)
    at = heisenberg(a, h, tau)
    assert norm(at - u.conj().T @ a.operator @ u) < 1e-10
    assert np.allclose(np.linalg.eigvalsh(at), np.linalg.eigvalsh(a.operator), atol=1e-10)
    rho = random_state(rng, d)
    schrodinger = np.trace(evolve(rho, h, tau).op @ a.operator).real
    assert abs(schrodinger - np.trace(rho.op @ at).real) < 1e-10


def test_resolution_examples(luders_z, mp, rng, mixed):
    for _ in range(3):
        rho = random_state(rng, 2)
        assert resolution(luders_z, SZ, rho) == 0
        assert abs(resolution(mp, SZ, rho) ** 2 - 2) < 1e-12
    t = unsharp(SZ, 0.5)
    var_part, bias_part = resolution_decomposition(t, SZ, mixed)
    assert abs(resolution(t, SZ, mixed) ** 2 - (var_part + bias_part)) <= 1e-10


def test_resolution_decomposition_examples(luders_z, mp, zero):
    assert resolution_decomposition(luders_z, SZ, zero) == (0.0, 0.0)
    var_part, bias_part = resolution_decomposition(mp, SZ, zero)
    assert abs(var_part - 1) < 1e-12 and abs(bias_part - 1) < 1e-12


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_resolution_decomposition_random(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 5))
    a = random_observable(rng, d)
    t = random_unbiased_compatible_instrument(rng, a)
    rho = random_state(rng, d)
    var_part, bias_part = resolution_decomposition(t, a, rho)
    assert var_part >= -1e-12 and bias_part >= -1e-12
    assert abs(var_part + bias_part - resolution(t, a, rho) ** 2) <= 1e-9


def test_predictor_examples(luders_z, mp, rot, rng):
    rho = random_state(rng, 2)
    h = predictor(luders_z, SZ, rot, 0, rho)
    assert abs(h[1] - 1) < 1e-14 and abs(h[-1] + 1) < 1e-14
    for x, v in predictor(mp, SZ, rot, 1, rho).items():
        assert abs(v - np.cos(np.pi / 6)) < 1e-12
    h = predictor(luders_z, SZ, Hamiltonian(0.4 * SZ), 2.5, rho)
    assert abs(h[1] - 1) < 1e-12 and abs(h[-1] + 1) < 1e-12


def test_predictor_skips_null_outcomes(luders_z, rot, zero):
    assert set(predictor(luders_z, SZ, rot, 1, zero)) == {1.0}


def test_conditional_uncertainty_examples(luders_z, mp, rot, rng, zero):
    rho = random_state(rng, 2, pure=False)
    for x in (1, -1):
        assert conditional_uncertainty(luders_z, SZ, rot, 0, rho, x) == 0
        assert abs(conditional_uncertainty(mp, SZ, rot, 1, rho, x) - np.sin(np.pi / 6) ** 2) < 1e-12
    with pytest.raises(ValueError):
        conditional_uncertainty(luders_z, SZ, rot, 1, zero, -1)


def test_predictive_uncertainty_examples(luders_z, mp, rot, zero, rng):
    assert predictive_uncertainty(luders_z, SZ, rot, 0, random_state(rng, 2)) == 0
    for _ in range(3):
        assert abs(predictive_uncertainty(mp, SZ, rot, 1, random_state(rng, 2)) - 0.25) < 1e-12
    assert abs(predictive_uncertainty(luders_z, SZ, rot, 1, zero) - 1) < 1e-12


def test_sql_report_luders(luders_z, rot, zero):
    rep = sql_report(luders_z, SZ, rot, 1, zero)
    assert rep.sigma == 0 and rep.epsilon_after == 0 and rep.condition_holds
    assert abs(rep.rhs) < 1e-12 and abs(rep.delta_sq - 1) < 1e-12 and rep.sql_holds
    assert rep.implication_holds


def test_sql_report_measure_prepare(mp, rot, zero):
    rep = sql_report(mp, SZ, rot, 1, zero)
    assert abs(rep.sigma - np.sqrt(2)) < 1e-9
    assert abs(rep.epsilon_after) < 1e-9 and not rep.condition_holds
    assert abs(rep.delta_sq - 0.25) < 1e-9
    assert abs(rep.rhs - 1.0) < 1e-9
    assert rep.delta_sq < rep.rhs and not rep.sql_holds
    assert rep.implication_holds
    assert abs(rep.ratio - 0.25) < 1e-9


def test_sql_report_rejects_biased_or_incompatible(rot, zero):
    with pytest.raises(BiasError):
        sql_report(unsharp(SZ, 0.5, labels=[-1, 1]), SZ, rot, 1, zero)
    with pytest.raises(CompatibilityError):
        sql_report(luders(SX), SZ, rot, 1, zero)


def test_sql_report_flags_excluded_weight(luders_z, rot, zero):
    rep = sql_report(luders_z, SZ, rot, 1, zero)
    assert rep.excluded_weight == 0 and not rep.excluded_weight_flag
    assert [row.prediction is None for row in rep.rows] == [True, False]


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_sql_report_consistency(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 5))
    a = random_observable(rng, d)
    t = random_unbiased_compatible_instrument(rng, a)
    h = random_hamiltonian(rng, d)
    tau = float(rng.uniform(0.1, 2))
    rho = random_state(rng, d)
    rep = sql_report(t, a, h, tau, rho)
    assert rep.implication_holds
    weighted = sum(r.probability * r.uncertainty ** 2 for r in rep.rows if r.uncertainty is not None)
    assert abs(rep.delta_sq - weighted) <= 1e-10
    assert abs(rep.delta_sq - predictive_uncertainty(t, a, h, tau, rho)) <= 1e-10
    pom = associated_pom(t)
    at = heisenberg(a, h, tau)
    for e in posterior_family(t, rho):
        if e.posterior is None:
            continue
        eps = precision(pom, a, evolve(e.posterior, h, tau))
        direct = eps ** 2 + operator_variance(at, e.posterior)
        assert abs(conditional_uncertainty(t, a, h, tau, rho, e.outcome) - direct) <= 1e-9
