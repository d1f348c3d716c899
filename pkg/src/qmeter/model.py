"""States, observables, POMs, instruments and measurement schemes.

Outcome sets are finite lists of labels. A label is a real number, or a tuple
of reals for schemes with several meters. Subsets of outcomes play the role
of events.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from .operators import (
    ATOL,
    DimensionError,
    as_op,
    complete_isometry,
    dag,
    is_hermitian,
    is_unitary,
    ket,
    norm,
    psd_sqrt,
    tensor_product,
)

P_FLOOR = 1e-12
KRAUS_RANK_CUTOFF = 1e-12


class ValidationError(ValueError):
    """A constructed object violates its defining invariants."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


def _label(x) -> Hashable:
    if isinstance(x, (tuple, list, np.ndarray)):
        return tuple(float(v) for v in x)
    return float(x)


# ---------------------------------------------------------------------------
# value types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DensityState:
    """Density operator: Hermitian, positive semidefinite, unit trace."""

    op: np.ndarray

    def __post_init__(self):
        rho = as_op(self.op)
        if not is_hermitian(rho, ATOL):
            raise ValidationError("density operator is not Hermitian")
        if abs(np.trace(rho) - 1) > ATOL:
            raise ValidationError(f"density operator has trace {np.trace(rho).real:.12g}")
        if np.linalg.eigvalsh((rho + dag(rho)) / 2).min() < -ATOL:
            raise ValidationError("density operator has a negative eigenvalue")
        object.__setattr__(self, "op", _freeze(rho))

    @property
    def dim(self) -> int:
        return self.op.shape[0]

    @classmethod
    def pure(cls, psi) -> "DensityState":
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        n = np.linalg.norm(psi)
        if abs(n - 1) > 1e-9:
            raise ValidationError(f"state vector has norm {n:.12g}")
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityState":
        return cls(np.eye(dim) / dim)

    def is_pure(self, tol: float = 1e-9) -> bool:
        return abs(np.trace(self.op @ self.op).real - 1) <= tol


def as_state(x) -> DensityState:
    """Coerce a ``DensityState``, density matrix or state vector."""
    if isinstance(x, DensityState):
        return x
    a = np.asarray(x, dtype=complex)
    if a.ndim == 1 or (a.ndim == 2 and 1 in a.shape and a.size > 1):
        return DensityState.pure(a)
    return DensityState(a)


@dataclass(frozen=True, eq=False)
class Observable:
    """Projection-valued measure with real labels, stored in increasing order."""

    outcomes: tuple
    projectors: tuple

    def __post_init__(self):
        labels = [float(x) for x in self.outcomes]
        projs = [as_op(p) for p in self.projectors]
        if not labels or len(labels) != len(projs):
            raise ValidationError("observable needs one projector per outcome")
        order = np.argsort(labels, kind="stable")
        labels = [labels[i] for i in order]
        projs = [projs[i] for i in order]
        if any(b <= a for a, b in zip(labels, labels[1:])):
            raise ValidationError("observable outcome labels must be distinct")
        d = projs[0].shape[0]
        if any(p.shape != (d, d) for p in projs):
            raise DimensionError("projectors have mismatched dimensions")
        for p in projs:
            if not is_hermitian(p) or norm(p @ p - p) > ATOL:
                raise ValidationError("observable effect is not an orthogonal projection")
        for i, j in itertools.combinations(range(len(projs)), 2):
            if norm(projs[i] @ projs[j]) > ATOL:
                raise ValidationError("observable projectors are not mutually orthogonal")
        if norm(sum(projs) - np.eye(d)) > ATOL:
            raise ValidationError("observable projectors do not sum to the identity")
        object.__setattr__(self, "outcomes", tuple(labels))
        object.__setattr__(self, "projectors", tuple(_freeze(p) for p in projs))

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    @property
    def operator(self) -> np.ndarray:
        return sum(a * p for a, p in zip(self.outcomes, self.projectors))

    def as_pom(self) -> "Pom":
        return Pom(self.outcomes, self.projectors)

    @classmethod
    def from_operator(cls, h, cluster_tol: float | None = None) -> "Observable":
        from .operators import CLUSTER_TOL, spectral_pvm

        return spectral_pvm(h, CLUSTER_TOL if cluster_tol is None else cluster_tol)


def as_observable(a) -> Observable:
    if isinstance(a, Observable):
        return a
    return Observable.from_operator(a)


@dataclass(frozen=True, eq=False)
class Pom:
    """Probability-operator-valued measure on a finite outcome set."""

    outcomes: tuple
    effects: tuple

    def __post_init__(self):
        labels = [_label(x) for x in self.outcomes]
        effects = [as_op(e) for e in self.effects]
        if not labels or len(labels) != len(effects):
            raise ValidationError("POM needs one effect per outcome")
        if len(set(labels)) != len(labels):
            raise ValidationError("POM outcome labels must be distinct")
        d = effects[0].shape[0]
        if any(e.shape != (d, d) for e in effects):
            raise DimensionError("effects have mismatched dimensions")
        for e in effects:
            if not is_hermitian(e):
                raise ValidationError("POM effect is not Hermitian")
            if np.linalg.eigvalsh((e + dag(e)) / 2).min() < -ATOL:
                raise ValidationError("POM effect is not positive")
        if norm(sum(effects) - np.eye(d)) > ATOL:
            raise ValidationError("POM effects do not sum to the identity")
        object.__setattr__(self, "outcomes", tuple(labels))
        object.__setattr__(self, "effects", tuple(_freeze(e) for e in effects))

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    @property
    def labels(self) -> np.ndarray:
        """Outcome labels as a float array (single-variable POMs only)."""
        if any(isinstance(x, tuple) for x in self.outcomes):
            raise TypeError("POM has tuple-valued outcomes")
        return np.array(self.outcomes, dtype=float)

    def moment_operator(self, f: Callable[[float], float] = lambda x: x) -> np.ndarray:
        return sum(f(x) * e for x, e in zip(self.labels, self.effects))

    @property
    def first_moment(self) -> np.ndarray:
        return self.moment_operator()

    @property
    def second_moment(self) -> np.ndarray:
        return self.moment_operator(lambda x: x * x)

    def effect(self, label) -> np.ndarray:
        return self.effects[self.outcomes.index(_label(label))]


@dataclass(frozen=True, eq=False)
class Instrument:
    """Completely positive instrument given by one Kraus set per outcome."""

    outcomes: tuple
    kraus_sets: tuple

    def __post_init__(self):
        labels = [_label(x) for x in self.outcomes]
        sets = [tuple(_freeze(as_op(k)) for k in ks) for ks in self.kraus_sets]
        if not labels or len(labels) != len(sets):
            raise ValidationError("instrument needs one Kraus set per outcome")
        if len(set(labels)) != len(labels):
            raise ValidationError("instrument outcome labels must be distinct")
        if any(len(ks) == 0 for ks in sets):
            raise ValidationError("every outcome needs at least one Kraus operator")
        d = sets[0][0].shape[0]
        if any(k.shape != (d, d) for ks in sets for k in ks):
            raise DimensionError("Kraus operators have mismatched dimensions")
        total = sum(dag(k) @ k for ks in sets for k in ks)
        if norm(total - np.eye(d)) > ATOL:
            raise ValidationError("Kraus operators are not trace preserving")
        object.__setattr__(self, "outcomes", tuple(labels))
        object.__setattr__(self, "kraus_sets", tuple(sets))

    @property
    def dim(self) -> int:
        return self.kraus_sets[0][0].shape[0]

    def kraus(self, label) -> tuple:
        return self.kraus_sets[self.outcomes.index(_label(label))]

    def operation(self, label, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ dag(k) for k in self.kraus(label))


@dataclass(frozen=True, eq=False)
class MeasurementScheme:
    """Probe space, probe state, coupling unitary and meter observables."""

    probe_dim: int
    probe_state: DensityState
    coupling: np.ndarray
    meters: tuple

    def __post_init__(self):
        sigma = as_state(self.probe_state)
        meters = tuple(as_observable(m) for m in self.meters)
        u = as_op(self.coupling)
        k = int(self.probe_dim)
        if sigma.dim != k or any(m.dim != k for m in meters):
            raise DimensionError("probe state and meters must act on the probe space")
        if not meters:
            raise ValidationError("scheme needs at least one meter")
        if u.shape[0] % k:
            raise DimensionError("coupling dimension is not a multiple of the probe dimension")
        if not is_unitary(u):
            raise ValidationError("coupling is not unitary")
        for m1, m2 in itertools.combinations(meters, 2):
            for p in m1.projectors:
                for q in m2.projectors:
                    if norm(p @ q - q @ p) > ATOL:
                        raise ValidationError("meter observables do not commute")
        object.__setattr__(self, "probe_dim", k)
        object.__setattr__(self, "probe_state", sigma)
        object.__setattr__(self, "coupling", _freeze(u))
        object.__setattr__(self, "meters", meters)

    @property
    def system_dim(self) -> int:
        return self.coupling.shape[0] // self.probe_dim


@dataclass(frozen=True)
class PosteriorEntry:
    outcome: Hashable
    probability: float
    posterior: DensityState | None


@dataclass(frozen=True)
class PosteriorFamily:
    entries: tuple

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, label) -> PosteriorEntry:
        label = _label(label)
        for e in self.entries:
            if e.outcome == label:
                return e
        raise KeyError(label)

    def mixture(self) -> np.ndarray:
        """``sum_k p_k rho_k`` over outcomes with a defined posterior."""
        d = next(e.posterior.dim for e in self.entries if e.posterior is not None)
        return sum((e.probability * e.posterior.op for e in self.entries if e.posterior is not None),
                   np.zeros((d, d), dtype=complex))

    @property
    def excluded_weight(self) -> float:
        return float(sum(e.probability for e in self.entries if e.posterior is None))


@dataclass(frozen=True)
class Distribution:
    """Finite probability distribution over real or tuple labels."""

    labels: tuple
    probs: tuple

    def __post_init__(self):
        labels = tuple(_label(x) for x in self.labels)
        p = np.asarray(self.probs, dtype=float)
        if len(labels) != len(p):
            raise ValidationError("distribution needs one probability per label")
        if p.size and p.min() < -1e-12:
            raise ValidationError(f"negative probability {p.min():.3e}")
        p = np.clip(p, 0.0, None)
        if abs(p.sum() - 1) > 1e-10:
            raise ValidationError(f"probabilities sum to {p.sum():.12g}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "probs", tuple(float(v) for v in p))

    def __getitem__(self, label) -> float:
        return self.probs[self.labels.index(_label(label))]

    def as_dict(self) -> dict:
        return dict(zip(self.labels, self.probs))

    def __len__(self):
        return len(self.labels)


JointDistribution = Distribution


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    """Hermitian generator of the free evolution ``U_t = exp(-i t H / hbar)``."""

    op: np.ndarray
    hbar: float = 1.0

    def __post_init__(self):
        h = as_op(self.op)
        if not is_hermitian(h):
            raise ValidationError("Hamiltonian is not Hermitian")
        if not self.hbar > 0:
            raise ValidationError("hbar must be positive")
        object.__setattr__(self, "op", _freeze((h + dag(h)) / 2))
        object.__setattr__(self, "hbar", float(self.hbar))

    @property
    def dim(self) -> int:
        return self.op.shape[0]

    def unitary(self, t: float) -> np.ndarray:
        w, v = np.linalg.eigh(self.op)
        return (v * np.exp(-1j * t * w / self.hbar)) @ dag(v)


def as_hamiltonian(h) -> Hamiltonian:
    return h if isinstance(h, Hamiltonian) else Hamiltonian(h)


# ---------------------------------------------------------------------------
# statistics and state reduction
# ---------------------------------------------------------------------------

def _check_dim(obj, rho: DensityState):
    if obj.dim != rho.dim:
        raise DimensionError(f"dimension mismatch: {obj.dim} vs state {rho.dim}")


def born_distribution(x: Pom, rho) -> Distribution:
    """Outcome distribution ``p_k = Tr[E_k rho]``."""
    rho = as_state(rho)
    _check_dim(x, rho)
    p = [np.trace(e @ rho.op).real for e in x.effects]
    return Distribution(x.outcomes, np.clip(p, 0.0, None))


def apply_operation(t: Instrument, subset: Iterable | None, rho) -> np.ndarray:
    """Unnormalized reduced state for the event ``subset`` (``None`` = all outcomes)."""
    rho = as_state(rho)
    _check_dim(t, rho)
    labels = t.outcomes if subset is None else [_label(x) for x in subset]
    out = np.zeros((t.dim, t.dim), dtype=complex)
    for x in labels:
        if x not in t.outcomes:
            raise KeyError(f"unknown outcome {x!r}")
        out += t.operation(x, rho.op)
    return out


def associated_pom(t: Instrument) -> Pom:
    return Pom(t.outcomes, [sum(dag(k) @ k for k in ks) for ks in t.kraus_sets])


def posterior_family(t: Instrument, rho, p_floor: float = P_FLOOR) -> PosteriorFamily:
    """Outcome probabilities and normalized post-measurement states.

    Outcomes with probability at or below ``p_floor`` get ``None`` in place
    of a posterior.
    """
    rho = as_state(rho)
    dist = born_distribution(associated_pom(t), rho)
    entries = []
    for x, p in zip(t.outcomes, dist.probs):
        post = None
        if p > p_floor:
            s = t.operation(x, rho.op) / p
            s = (s + dag(s)) / 2
            post = DensityState(s / np.trace(s).real)
        entries.append(PosteriorEntry(x, p, post))
    return PosteriorFamily(tuple(entries))


def evolve(rho, h, t: float) -> DensityState:
    """Schrödinger-picture evolution ``U_t rho U_t^†``."""
    rho = as_state(rho)
    h = as_hamiltonian(h)
    _check_dim(h, rho)
    u = h.unitary(t)
    s = u @ rho.op @ dag(u)
    return DensityState((s + dag(s)) / 2)


def _sequence(ts: Sequence[Instrument], rho: DensityState, steps: Sequence[np.ndarray | None]):
    for t in ts:
        _check_dim(t, rho)
    labels, probs = [], []
    for combo in itertools.product(*(t.outcomes for t in ts)):
        s = rho.op
        for t, x, u in zip(ts, combo, steps):
            if u is not None:
                s = u @ s @ dag(u)
            s = t.operation(x, s)
        labels.append(combo)
        probs.append(np.trace(s).real)
    return Distribution(labels, np.clip(probs, 0.0, None))


def sequential_distribution(ts: Sequence[Instrument], rho) -> Distribution:
    """Joint outcome distribution of instruments applied in order."""
    rho = as_state(rho)
    return _sequence(ts, rho, [None] * len(ts))


def timed_sequential_distribution(ts: Sequence[Instrument], times: Sequence[float], h, rho) -> Distribution:
    """Joint distribution for measurements at times ``t_1 <= ... <= t_n``.

    The state evolves freely for ``t_1`` before the first instrument and for
    each gap ``t_{i+1} - t_i`` between consecutive instruments.
    """
    rho = as_state(rho)
    h = as_hamiltonian(h)
    times = [float(x) for x in times]
    if len(times) != len(ts):
        raise ValueError("need one time per instrument")
    if times and times[0] < 0:
        raise ValueError("measurement times must be non-negative")
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("measurement times must be non-decreasing")
    gaps = [t - s for s, t in zip([0.0] + times[:-1], times)]
    steps = [h.unitary(g) if g != 0 else None for g in gaps]
    return _sequence(ts, rho, steps)


# ---------------------------------------------------------------------------
# maps and dilations
# ---------------------------------------------------------------------------

def choi_matrix(kraus: Sequence[np.ndarray]) -> np.ndarray:
    """Choi matrix ``sum_ij |i><j| ⊗ T(|i><j|)`` of ``T(r) = sum_k K r K^†``.

    Built by applying the map to every matrix unit.
    """
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    d = kraus[0].shape[1]
    dout = kraus[0].shape[0]
    c = np.zeros((d * dout, d * dout), dtype=complex)
    for i in range(d):
        for j in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[i, j] = 1.0
            c[i * dout:(i + 1) * dout, j * dout:(j + 1) * dout] = sum(k @ unit @ dag(k) for k in kraus)
    return c


def choi_distance(t1: Instrument, t2: Instrument) -> float:
    """Largest per-outcome operator-norm distance between Choi matrices.

    Outcomes present in only one instrument are compared against the zero map.
    """
    if t1.dim != t2.dim:
        raise DimensionError("instruments act on different dimensions")
    zero = [np.zeros((t1.dim, t1.dim))]
    worst = 0.0
    for x in set(t1.outcomes) | set(t2.outcomes):
        k1 = t1.kraus(x) if x in t1.outcomes else zero
        k2 = t2.kraus(x) if x in t2.outcomes else zero
        worst = max(worst, norm(choi_matrix(k1) - choi_matrix(k2)))
    return worst


def pom_equals(x: Pom, y: Pom, tol: float = 1e-9) -> bool:
    """Equality as measures: same labels after dropping zero effects, same effects."""
    def support(p: Pom):
        return {lab: e for lab, e in zip(p.outcomes, p.effects) if norm(e) > tol}

    sx, sy = support(x), support(y)
    if x.dim != y.dim or set(sx) != set(sy):
        return False
    return all(norm(sx[k] - sy[k]) <= tol for k in sx)


def _meter_events(meters: Sequence[Observable]):
    """Joint events of commuting meters: (label, projector) with nonzero projector."""
    if len(meters) == 1:
        m = meters[0]
        return list(zip(m.outcomes, m.projectors))
    events = []
    for combo in itertools.product(*(list(zip(m.outcomes, m.projectors)) for m in meters)):
        p = combo[0][1]
        for _, q in combo[1:]:
            p = p @ q
        if norm(p) > 0.5:
            events.append((tuple(lab for lab, _ in combo), p))
    return events


def scheme_to_instrument(s: MeasurementScheme) -> Instrument:
    """Instrument ``rho -> Tr_K[(1 ⊗ M(x)) U (rho ⊗ sigma) U^†]`` of a scheme, as Kraus sets.

    With ``sigma = sum_l lam_l |phi_l><phi_l|`` and ``M(x) = sum_m |m><m|``
    the Kraus operators are ``sqrt(lam_l) <m| U |phi_l>`` (partial inner
    products on the probe factor).
    """
    dh, dk = s.system_dim, s.probe_dim
    lam, phis = np.linalg.eigh(s.probe_state.op)
    keep = lam > KRAUS_RANK_CUTOFF
    lam, phis = lam[keep], phis[:, keep]
    u = s.coupling.reshape(dh, dk, dh, dk)

    outcomes, sets = [], []
    for label, proj in _meter_events(s.meters):
        w, v = np.linalg.eigh(proj)
        ms = v[:, w > 0.5]
        ks = []
        for l_idx in range(len(lam)):
            for m_idx in range(ms.shape[1]):
                k = np.sqrt(lam[l_idx]) * np.einsum("c,acbd,d->ab", ms[:, m_idx].conj(), u, phis[:, l_idx])
                ks.append(k)
        nonzero = [k for k in ks if np.linalg.norm(k) > 1e-13]
        outcomes.append(label)
        sets.append(nonzero or [np.zeros((dh, dh), dtype=complex)])
    return Instrument(outcomes, sets)


def realize_instrument(t: Instrument, seed: int = 0) -> MeasurementScheme:
    """Measurement scheme with pure probe state whose instrument is ``t``.

    The probe has one basis vector per Kraus operator (at least two). The
    coupling extends the isometry ``psi ⊗ e0 -> sum_kj (K_kj psi) ⊗ e_kj`` to
    a unitary, and the meter reads ``x_k`` on every ``e_kj``.
    """
    if any(isinstance(x, tuple) for x in t.outcomes):
        raise TypeError("realize_instrument needs real outcome labels")
    d = t.dim
    flat = [(x, k) for x, ks in zip(t.outcomes, t.kraus_sets) for k in ks]
    n = max(len(flat), 2)
    w = np.zeros((d * n, d), dtype=complex)
    for idx, (_, k) in enumerate(flat):
        w[idx::n, :] = k
    u = complete_isometry(w, seed=seed, columns=[i * n for i in range(d)])

    index_labels = [x for x, _ in flat] + [flat[-1][0]] * (n - len(flat))
    meter_labels = sorted(set(index_labels))
    projs = []
    for lab in meter_labels:
        p = np.zeros((n, n), dtype=complex)
        for idx, x in enumerate(index_labels):
            if x == lab:
                p[idx, idx] = 1.0
        projs.append(p)
    probe = DensityState.pure(ket(0, n))
    return MeasurementScheme(n, probe, u, (Observable(meter_labels, projs),))


def naimark_dilate(x: Pom) -> tuple[np.ndarray, Observable]:
    """Isometry ``V psi = sum_k (sqrt(E_k) psi) ⊗ e_k`` and the dilated sharp observable.

    Returns ``(V, P)`` with ``P_k = 1 ⊗ |e_k><e_k|`` so that ``V^† P_k V = E_k``.
    """
    d, n = x.dim, len(x.outcomes)
    v = np.zeros((d * n, d), dtype=complex)
    projs = []
    for k, e in enumerate(x.effects):
        v[k::n, :] = psd_sqrt(e)
        ek = np.zeros((n, n))
        ek[k, k] = 1.0
        projs.append(tensor_product(np.eye(d), ek))
    return v, Observable(x.outcomes, projs)
