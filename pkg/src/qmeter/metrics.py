"""Moments, precision and the preparation uncertainty checks."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .model import Distribution, Observable, Pom, as_observable, as_state, born_distribution, pom_equals
from .operators import DimensionError, commutator_trace, dag, norm, psd_sqrt

COMPAT_TOL = 1e-8
UNBIASED_TOL = 1e-9
CLAMP_BUDGET = 1e-9


class CompatibilityError(ValueError):
    """A POM does not commute with the observable it is compared against."""


class BiasError(ValueError):
    """A POM's first-moment operator differs from the target observable."""


def _chop(v: float, tol: float = 1e-13) -> float:
    # rounding residue on squared quantities that are exactly zero
    return 0.0 if abs(v) <= tol else v


def moment(x: Pom, f: Callable[[float], float], rho) -> float:
    """Expectation of ``f(X)``: ``sum_k f(x_k) Tr[E_k rho]``."""
    dist = born_distribution(x, rho)
    return float(sum(f(lab) * p for lab, p in zip(x.labels, dist.probs)))


def spread(x: Pom, rho) -> tuple[float, float, float]:
    """Mean, variance and standard deviation of the outcome of ``x``."""
    mean = moment(x, lambda v: v, rho)
    var = moment(x, lambda v: v * v, rho) - mean ** 2
    if var < -1e-12:
        raise ValueError(f"negative variance {var:.3e}")
    var = max(_chop(var), 0.0)
    return mean, var, float(np.sqrt(var))


def operator_variance(op: np.ndarray, rho) -> float:
    """``Tr[op^2 rho] - Tr[op rho]^2`` with the second moment taken through ``sqrt(rho)``."""
    rho = as_state(rho)
    s = psd_sqrt(rho.op)
    m1 = np.trace(op @ rho.op).real
    xs = op @ s
    m2 = np.trace(dag(xs) @ xs).real
    return m2 - m1 ** 2


def is_compatible(x: Pom, a: Observable, tol: float = COMPAT_TOL) -> bool:
    a = as_observable(a)
    return all(norm(e @ p - p @ e) <= tol for e in x.effects for p in a.projectors)


def compatible_joint(x: Pom, a: Observable, rho) -> Distribution:
    """Joint distribution ``mu(x_k, a_l) = Re Tr[E_k P_l rho]`` of an ``a``-compatible POM."""
    a = as_observable(a)
    rho = as_state(rho)
    if x.dim != a.dim or x.dim != rho.dim:
        raise DimensionError("POM, observable and state dimensions differ")
    if not is_compatible(x, a):
        raise CompatibilityError("POM is not compatible with the observable")
    labels, probs = [], []
    for xk, e in zip(x.outcomes, x.effects):
        for al, p in zip(a.outcomes, a.projectors):
            labels.append((xk, al))
            probs.append(np.trace(e @ p @ rho.op).real)
    probs = np.array(probs)
    clamped = -probs[probs < 0].sum()
    if clamped > CLAMP_BUDGET:
        raise CompatibilityError(f"joint distribution lost {clamped:.3e} to clamping")
    return Distribution(labels, np.clip(probs, 0.0, None))


def _joint_msd(mu: Distribution) -> float:
    return float(sum(p * (x - y) ** 2 for (x, y), p in zip(mu.labels, mu.probs)))


def precision(x: Pom, a: Observable, rho) -> float:
    """Root-mean-square error of ``x`` as a measurement of ``a`` in ``rho``."""
    return float(np.sqrt(_chop(_joint_msd(compatible_joint(x, a, rho)))))


def is_unbiased(x: Pom, a: Observable, tol: float = UNBIASED_TOL) -> bool:
    a = as_observable(a)
    if x.dim != a.dim:
        raise DimensionError("POM and observable dimensions differ")
    return norm(x.first_moment - a.operator) <= tol


@dataclass(frozen=True)
class PrecisionParts:
    pom_variance: float
    operator_variance: float
    bias: float

    @property
    def total(self) -> float:
        return self.pom_variance - self.operator_variance + self.bias


def precision_decomposition(x: Pom, a: Observable, rho) -> PrecisionParts:
    """Split the squared precision into ``ΔX² - ΔX̂² + Tr[(Â - X̂)² rho]``."""
    a = as_observable(a)
    rho = as_state(rho)
    if not is_compatible(x, a):
        raise CompatibilityError("POM is not compatible with the observable")
    _, var, _ = spread(x, rho)
    xhat = x.first_moment
    diff = a.operator - xhat
    s = psd_sqrt(rho.op)
    ds = diff @ s
    bias = np.trace(dag(ds) @ ds).real
    return PrecisionParts(var, operator_variance(xhat, rho), float(bias))


def spanning_states(dim: int) -> list[np.ndarray]:
    """Basis vectors and the superpositions ``(e_i + e_j)/√2``, ``(e_i + i e_j)/√2``."""
    eye = np.eye(dim, dtype=complex)
    states = [eye[i] for i in range(dim)]
    for i, j in itertools.combinations(range(dim), 2):
        states.append((eye[i] + eye[j]) / np.sqrt(2))
        states.append((eye[i] + 1j * eye[j]) / np.sqrt(2))
    return states


def precision_vanishes(x: Pom, a: Observable, tol: float = 1e-9) -> bool:
    """Whether the precision is zero on a family of states spanning the operator space."""
    return all(precision(x, a, psi) <= tol for psi in spanning_states(x.dim))


def equals_observable(x: Pom, a: Observable, tol: float = 1e-9) -> bool:
    return pom_equals(x, as_observable(a).as_pom(), tol)


@dataclass(frozen=True)
class SupportVerdict:
    """Both criteria for a grid measure to live on the diagonal."""

    moment: bool
    marginal: bool
    second_moment: float
    marginal_defect: float

    @property
    def agree(self) -> bool:
        return self.moment == self.marginal

    def __bool__(self) -> bool:
        return self.moment and self.marginal


def _subsets(values):
    for r in range(len(values) + 1):
        yield from itertools.combinations(values, r)


def diagonal_support_test(mu, tol: float = 1e-12) -> SupportVerdict:
    """Check diagonal support of a finite measure on a 2-D grid, two ways.

    ``mu`` is a ``Distribution`` with ``(x, y)`` labels or a mapping of such
    pairs to masses. The moment criterion is ``sum (x - y)^2 mu <= tol``. The
    marginal criterion requires ``mu(D1 × D2) = mu((D1 ∩ D2) × R)`` for every
    pair of label subsets, to within ``tol``.
    """
    items = list(mu.as_dict().items()) if isinstance(mu, Distribution) else list(dict(mu).items())
    masses = {(float(x), float(y)): float(p) for (x, y), p in items}
    second = sum(p * (x - y) ** 2 for (x, y), p in masses.items())

    xs = sorted({x for x, _ in masses})
    ys = sorted({y for _, y in masses})
    row_mass = {x: sum(p for (u, _), p in masses.items() if u == x) for x in xs}
    worst = 0.0
    for d1 in _subsets(xs):
        s1 = set(d1)
        for d2 in _subsets(ys):
            s2 = set(d2)
            lhs = sum(p for (x, y), p in masses.items() if x in s1 and y in s2)
            rhs = sum(row_mass[x] for x in s1 & s2)
            worst = max(worst, abs(lhs - rhs))
    return SupportVerdict(second <= tol, worst <= tol, float(second), float(worst))


@dataclass(frozen=True)
class BoundCheck:
    lhs: float
    rhs: float
    holds: bool


def robertson_check(a, b, rho, slack: float = 1e-12) -> BoundCheck:
    """``ΔA ΔB >= |Tr[[Â, B̂] rho]| / 2`` for two sharp observables."""
    a, b = as_observable(a), as_observable(b)
    lhs = spread(a.as_pom(), rho)[2] * spread(b.as_pom(), rho)[2]
    rhs = 0.5 * abs(commutator_trace(a.operator, b.operator, as_state(rho)))
    return BoundCheck(lhs, rhs, lhs >= rhs - slack)


def holevo_check(x: Pom, y: Pom, rho, slack: float = 1e-12) -> BoundCheck:
    """``ΔX ΔY >= |Tr[[X̂, Ŷ] rho]| / 2`` for two POMs via their first-moment operators."""
    lhs = spread(x, rho)[2] * spread(y, rho)[2]
    rhs = 0.5 * abs(commutator_trace(x.first_moment, y.first_moment, as_state(rho)))
    return BoundCheck(lhs, rhs, lhs >= rhs - slack)
