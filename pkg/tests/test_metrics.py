import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qmeter.metrics import (
    BiasError,
    CompatibilityError,
    compatible_joint,
    diagonal_support_test,
    equals_observable,
    holevo_check,
    is_compatible,
    is_unbiased,
    moment,
    operator_variance,
    precision,
    precision_decomposition,
    precision_vanishes,
    robertson_check,
    spread,
)
from qmeter.joint import jxy, marginals
from qmeter.model import DensityState, Observable, Pom, associated_pom
from qmeter.models import SX, SY, SZ, unsharp
from qmeter.sampling import (
    random_grid_measure,
    random_labels,
    random_observable,
    random_pom,
    random_state,
    random_unbiased_compatible_pom,
)

seeds = st.integers(0, 2**32 - 1)
Z = Observable.from_operator(SZ)


def unsharp_pom(eta=0.5, labels=None):
    return associated_pom(unsharp(SZ, eta, labels))


def test_moment_examples(zero, rng):
    x = unsharp_pom()
    for _ in range(3):
        rho = random_state(rng, 2)
        assert abs(moment(x, lambda v: 1.0, rho) - 1) < 1e-14
        assert abs(moment(x, lambda v: v ** 2, rho) - 4) < 1e-13
    assert abs(moment(Z.as_pom(), lambda v: v, zero) - 1) < 1e-15


def test_spread_examples(zero, mixed):
    assert spread(Z.as_pom(), zero) == (1.0, 0.0, 0.0)
    assert np.allclose(spread(Z.as_pom(), mixed), (0.0, 1.0, 1.0), atol=1e-15)
    mean, var, _ = spread(unsharp_pom(), zero)
    assert abs(mean - 1) < 1e-14 and abs(var - 3) < 1e-13


def test_compatible_joint_examples(plus, zero):
    mu = compatible_joint(Z.as_pom(), Z, plus).as_dict()
    assert abs(mu[(1.0, 1.0)] - 0.5) < 1e-15 and abs(mu[(-1.0, -1.0)] - 0.5) < 1e-15
    assert mu[(1.0, -1.0)] == 0 and mu[(-1.0, 1.0)] == 0
    mu = compatible_joint(unsharp_pom(), Z, zero).as_dict()
    assert abs(mu[(2.0, 1.0)] - 0.75) < 1e-15 and abs(mu[(-2.0, 1.0)] - 0.25) < 1e-15
    assert mu[(2.0, -1.0)] == 0 and mu[(-2.0, -1.0)] == 0
    with pytest.raises(CompatibilityError):
        compatible_joint(Observable.from_operator(SX).as_pom(), Z, zero)
    assert not is_compatible(Observable.from_operator(SX).as_pom(), Z)


def test_precision_examples(zero, rng):
    for _ in range(5):
        assert precision(Z.as_pom(), Z, random_state(rng, 2)) == 0
    assert abs(precision(unsharp_pom(), Z, zero) ** 2 - 3) < 1e-12
    # direct grid sum (x - a)^2 mu(x, a)
    assert abs((2 - 1) ** 2 * 0.75 + (-2 - 1) ** 2 * 0.25 - 3) == 0


def test_is_unbiased_examples():
    assert is_unbiased(unsharp_pom(0.5), Z)
    assert is_unbiased(unsharp_pom(0.25), Z)
    assert not is_unbiased(unsharp_pom(0.5, labels=[-1, 1]), Z)
    assert is_unbiased(Z.as_pom(), Z)


def test_precision_decomposition_examples(mixed, rng):
    a = random_observable(rng, 3)
    x = random_unbiased_compatible_pom(rng, a)
    rho = random_state(rng, 3)
    parts = precision_decomposition(x, a, rho)
    assert abs(parts.bias) < 1e-12
    assert abs(precision(x, a, rho) ** 2 - (spread(x, rho)[1] - spread(a.as_pom(), rho)[1])) < 1e-9
    parts = precision_decomposition(unsharp_pom(0.5, labels=[-1, 1]), Z, mixed)
    assert abs(parts.bias - 0.25) < 1e-14
    assert abs(parts.total - precision(unsharp_pom(0.5, labels=[-1, 1]), Z, mixed) ** 2) < 1e-12


@given(seeds, st.integers(2, 4), st.booleans())
@settings(max_examples=60, deadline=None)
def test_precision_identities(seed, d, biased):
    rng = np.random.default_rng(seed)
    a = random_observable(rng, d)
    x = random_unbiased_compatible_pom(rng, a)
    if biased:
        x = Pom(random_labels(rng, len(x.outcomes)), x.effects)
    rho = random_state(rng, d)
    eps2 = precision(x, a, rho) ** 2
    parts = precision_decomposition(x, a, rho)
    assert abs(eps2 - parts.total) <= 1e-9
    assert eps2 >= parts.bias - 1e-12
    if not biased:
        assert abs(eps2 - (spread(x, rho)[1] - spread(a.as_pom(), rho)[1])) <= 1e-9


@given(seeds, st.integers(1, 4), st.integers(1, 5))
@settings(max_examples=60, deadline=None)
def test_pom_variance_dominates_operator_variance(seed, d, n):
    rng = np.random.default_rng(seed)
    x = random_pom(rng, d, n)
    rho = random_state(rng, d)
    assert spread(x, rho)[1] >= operator_variance(x.first_moment, rho) - 1e-12


def test_operator_variance_simple(zero, plus):
    assert operator_variance(SZ, zero) == 0
    assert abs(operator_variance(SZ, plus) - 1) < 1e-14


@given(seeds, st.integers(2, 4))
@settings(max_examples=30, deadline=None)
def test_precision_zero_iff_equal(seed, d):
    rng = np.random.default_rng(seed)
    a = random_observable(rng, d)
    assert precision_vanishes(a.as_pom(), a) and equals_observable(a.as_pom(), a)
    # relabel one eigenvalue: still compatible, no longer equal
    labels = list(a.outcomes)
    labels[0] -= 0.5 + rng.uniform()
    if len(set(labels)) == len(labels):
        moved = Pom(labels, a.projectors)
        assert not precision_vanishes(moved, a)
        assert not equals_observable(moved, a)
    # a genuinely unsharp compatible POM
    x = random_unbiased_compatible_pom(rng, a)
    assert not precision_vanishes(x, a)
    assert not equals_observable(x, a)


def test_precision_zero_needs_spanning_family():
    # vanishing on |0> alone does not identify the POM
    x = Pom([1, -1, -3], [np.diag([1, 0]), np.diag([0, 0.5]), np.diag([0, 0.5])])
    assert precision(x, Z, DensityState.pure([1, 0])) == 0
    assert not precision_vanishes(x, Z)


def test_diagonal_support_examples():
    v = diagonal_support_test({(1, 1): 0.5, (-1, -1): 0.5, (1, -1): 0.0, (-1, 1): 0.0})
    assert v.moment and v.marginal and bool(v)
    v = diagonal_support_test({(1, -1): 1.0})
    assert not v.moment and not v.marginal and not bool(v)


def test_diagonal_support_perturbation_flips_both(rng):
    for _ in range(20):
        base = random_grid_measure(rng, diagonal=True)
        labels = sorted({x for x, _ in base})
        x, y = rng.choice(labels, size=2, replace=False)
        for eps, expected in ((1e-6, False), (1e-15, True)):
            mu = {k: v * (1 - eps) for k, v in base.items()}
            mu[(x, y)] += eps
            v = diagonal_support_test(mu)
            assert v.agree and bool(v) == expected


def test_diagonal_support_accepts_distribution(plus):
    assert bool(diagonal_support_test(compatible_joint(Z.as_pom(), Z, plus)))


@given(seeds, st.booleans())
@settings(max_examples=40, deadline=None)
def test_diagonal_support_criteria_agree(seed, diag):
    rng = np.random.default_rng(seed)
    v = diagonal_support_test(random_grid_measure(rng, diagonal=diag))
    assert v.agree
    assert bool(v) == diag


def test_robertson_examples(zero, rng):
    chk = robertson_check(SX, SY, zero)
    assert abs(chk.lhs - 1) < 1e-14 and abs(chk.rhs - 1) < 1e-14 and chk.holds
    chk = robertson_check(SX, SX, random_state(rng, 2))
    assert chk.rhs == 0 and chk.holds


def test_holevo_examples(zero):
    chk = holevo_check(Observable.from_operator(SX).as_pom(), Observable.from_operator(SY).as_pom(), zero)
    assert abs(chk.lhs - 1) < 1e-14 and abs(chk.rhs - 1) < 1e-14
    x, y = marginals(jxy())
    chk = holevo_check(x, y, zero)
    assert abs(chk.lhs - 2) < 1e-12 and abs(chk.rhs - 1) < 1e-12 and chk.holds


@given(seeds, st.integers(2, 8))
@settings(max_examples=60, deadline=None)
def test_robertson_random(seed, d):
    rng = np.random.default_rng(seed)
    a, b = random_observable(rng, d), random_observable(rng, d)
    assert robertson_check(a, b, random_state(rng, d)).holds


@given(seeds, st.integers(2, 4))
@settings(max_examples=60, deadline=None)
def test_holevo_random(seed, d):
    rng = np.random.default_rng(seed)
    x, y = random_pom(rng, d, int(rng.integers(2, 5))), random_pom(rng, d, int(rng.integers(2, 5)))
    assert holevo_check(x, y, random_state(rng, d)).holds


def test_bias_error_type():
    assert issubclass(BiasError, ValueError) and issubclass(CompatibilityError, ValueError)
