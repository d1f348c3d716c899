import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qmeter.joint import (
    JointPom,
    interacting_realization,
    joint_uncertainty_report,
    jxy,
    marginals,
    noise_commutator,
    noise_operators,
)
from qmeter.metrics import BiasError, CompatibilityError, holevo_check, precision
from qmeter.model import DensityState, Pom, associated_pom, born_distribution, scheme_to_instrument
from qmeter.models import SX, SY, SZ, von_neumann_scheme
from qmeter.operators import norm
from qmeter.sampling import random_coexistent_pair, random_pom, random_state

seeds = st.integers(0, 2**32 - 1)
S2 = np.sqrt(2)


def test_jointpom_validation():
    with pytest.raises(ValueError):
        JointPom([1, 2], [0], [[np.eye(2) / 2], [np.eye(2) / 4]])
    with pytest.raises(ValueError):
        JointPom([1, 1], [0], [[np.eye(2) / 2], [np.eye(2) / 2]])
    with pytest.raises(ValueError):
        jxy(1.0)


def test_marginals_of_product_pom(rng):
    e = random_pom(rng, 2, 3)
    p = [0.2, 0.8]
    m = JointPom(e.outcomes, [5, 7], [[eff * q for q in p] for eff in e.effects])
    x, y = marginals(m)
    for a, b in zip(x.effects, e.effects):
        assert norm(a - b) < 1e-14
    for a, q in zip(y.effects, p):
        assert norm(a - q * np.eye(2)) < 1e-14


def test_jxy_marginals():
    x, y = marginals(jxy())
    assert norm(x.effect(S2) - (np.eye(2) + SX / S2) / 2) < 1e-14
    assert norm(x.effect(-S2) - (np.eye(2) - SX / S2) / 2) < 1e-14
    assert norm(y.effect(S2) - (np.eye(2) + SY / S2) / 2) < 1e-14
    assert norm(y.effect(-S2) - (np.eye(2) - SY / S2) / 2) < 1e-14


def test_jxy_report_saturates_both(zero):
    rep = joint_uncertainty_report(jxy(), SX, SY, zero)
    assert abs(rep.eps_a - 1) < 1e-9 and abs(rep.eps_b - 1) < 1e-9
    assert abs(rep.delta_x - S2) < 1e-9 and abs(rep.delta_y - S2) < 1e-9
    assert abs(rep.c - 2) < 1e-9
    assert abs(rep.product_eps - rep.c / 2) < 1e-9 and rep.check1
    assert abs(rep.product_delta - rep.c) < 1e-9 and rep.check2


def test_commuting_case_vacuous(rng):
    # a = b = σz measured by one sharp joint POM on the diagonal
    p0, p1 = np.diag([1, 0]), np.diag([0, 1])
    z = np.zeros((2, 2))
    m = JointPom([1, -1], [1, -1], [[p0, z], [z, p1]])
    rep = joint_uncertainty_report(m, SZ, SZ, random_state(rng, 2))
    assert rep.c == 0 and rep.check1 and rep.check2


@pytest.mark.parametrize("scale", [S2, 1.5, 2.0, 3.0, 5.0])
def test_inflated_jxy_sweep(scale, zero, rng):
    for rho in (zero, random_state(rng, 2, pure=True), random_state(rng, 2, pure=False)):
        rep = joint_uncertainty_report(jxy(scale), SX, SY, rho)
        assert rep.check1 and rep.check2
        if scale > 1.5 and rep.c > 1e-3:
            assert rep.product_eps > rep.c / 2 and rep.product_delta > rep.c


def test_report_requires_unbiased_compatible(zero):
    with pytest.raises(CompatibilityError):
        joint_uncertainty_report(jxy(), SZ, SY, zero)
    x_outcomes = (1.0, -1.0)
    m = jxy()
    biased = JointPom(x_outcomes, m.y_outcomes, m.effects)
    with pytest.raises(BiasError):
        joint_uncertainty_report(biased, SX, SY, zero)


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_random_coexistent_pairs(seed):
    rng = np.random.default_rng(seed)
    m, a, b = random_coexistent_pair(rng)
    rho = random_state(rng, m.dim, pure=True)
    rep = joint_uncertainty_report(m, a, b, rho)
    assert rep.check1 and rep.check2
    hol = holevo_check(*marginals(m), rho)
    if rep.c > 1e-9:
        assert abs(rep.c / hol.rhs - 2) < 1e-9


def test_interacting_realization_reproduces_joint(rng):
    m = jxy()
    s = interacting_realization(m, seed=2)
    t = scheme_to_instrument(s)
    pom = associated_pom(t)
    rho = random_state(rng, 2)
    p = born_distribution(pom, rho)
    for _, _, x, y, e in m.cells():
        assert abs(p[(x, y)] - np.trace(e @ rho.op).real) < 1e-12


def test_noise_operators_faithful_projective():
    s = von_neumann_scheme(SZ)
    for psi in ([1, 0], [0, 1]):
        (n,) = noise_operators(s, [SZ], np.array(psi))
        assert abs(n.mean) < 1e-12 and abs(n.variance) < 1e-12


def test_noise_operators_jxy(zero):
    s = interacting_realization(jxy(), seed=0)
    n1, n2 = noise_operators(s, [SX, SY], zero)
    assert abs(n1.mean) < 1e-9 and abs(n2.mean) < 1e-9
    assert abs(n1.variance - 1) < 1e-9 and abs(n2.variance - 1) < 1e-9
    comm = noise_commutator([n1, n2], s, zero)
    # <[σx, σy]> on |0> is 2i; the noise commutator carries the opposite sign
    assert abs(comm - (-2j)) < 1e-9


@given(seeds)
@settings(max_examples=25, deadline=None)
def test_noise_identities_random(seed):
    rng = np.random.default_rng(seed)
    m, a, b = random_coexistent_pair(rng)
    psi = random_state(rng, m.dim, pure=True)
    s = interacting_realization(m, seed=seed % 1000)
    n1, n2 = noise_operators(s, [a, b], psi)
    x, y = marginals(m)
    assert abs(n1.mean) < 1e-9 and abs(n2.mean) < 1e-9
    assert abs(n1.variance - precision(x, a, psi) ** 2) < 1e-9
    assert abs(n2.variance - precision(y, b, psi) ** 2) < 1e-9
    target = np.trace((a @ b - b @ a) @ psi.op)
    comm = noise_commutator([n1, n2], s, psi)
    assert abs(comm + target) < 1e-9
    assert abs(abs(comm) - abs(target)) < 1e-9


def test_noise_operators_input_checks(zero):
    s = interacting_realization(jxy())
    with pytest.raises(ValueError):
        noise_operators(s, [SX], zero)
    with pytest.raises(ValueError):
        noise_operators(s, [SX, SY], DensityState.maximally_mixed(2))
