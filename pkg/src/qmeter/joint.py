"""Joint measurements of two quantities on a two-dimensional outcome grid."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .metrics import BiasError, CompatibilityError, is_compatible, is_unbiased, precision, spread
from .model import (
    DensityState,
    MeasurementScheme,
    Observable,
    Pom,
    ValidationError,
    as_observable,
    as_state,
)
from .operators import (
    ATOL,
    DimensionError,
    as_op,
    commutator,
    commutator_trace,
    complete_isometry,
    dag,
    is_hermitian,
    ket,
    norm,
    psd_sqrt,
    tensor_product,
)


@dataclass(frozen=True, eq=False)
class JointPom:
    """POM on the grid ``x_outcomes × y_outcomes``; ``effects[i][j]`` sits at ``(x_i, y_j)``."""

    x_outcomes: tuple
    y_outcomes: tuple
    effects: tuple

    def __post_init__(self):
        xs = tuple(float(v) for v in self.x_outcomes)
        ys = tuple(float(v) for v in self.y_outcomes)
        if len(set(xs)) != len(xs) or len(set(ys)) != len(ys):
            raise ValidationError("grid labels must be distinct on each axis")
        rows = [[as_op(m) for m in row] for row in self.effects]
        if len(rows) != len(xs) or any(len(r) != len(ys) for r in rows):
            raise ValidationError("effects grid does not match the outcome labels")
        d = rows[0][0].shape[0]
        for m in itertools.chain.from_iterable(rows):
            if m.shape != (d, d):
                raise DimensionError("grid effects have mismatched dimensions")
            if not is_hermitian(m) or np.linalg.eigvalsh((m + dag(m)) / 2).min() < -ATOL:
                raise ValidationError("grid effect is not positive semidefinite")
        if norm(sum(itertools.chain.from_iterable(rows)) - np.eye(d)) > ATOL:
            raise ValidationError("grid effects do not sum to the identity")
        object.__setattr__(self, "x_outcomes", xs)
        object.__setattr__(self, "y_outcomes", ys)
        object.__setattr__(self, "effects", tuple(tuple(r) for r in rows))

    @property
    def dim(self) -> int:
        return self.effects[0][0].shape[0]

    def cells(self):
        for i, x in enumerate(self.x_outcomes):
            for j, y in enumerate(self.y_outcomes):
                yield i, j, x, y, self.effects[i][j]


def marginals(m: JointPom) -> tuple[Pom, Pom]:
    """Marginal POMs along the x and y axes."""
    x = Pom(m.x_outcomes, [sum(row) for row in m.effects])
    y = Pom(m.y_outcomes, [sum(m.effects[i][j] for i in range(len(m.x_outcomes)))
                           for j in range(len(m.y_outcomes))])
    return x, y


@dataclass(frozen=True)
class JointReport:
    eps_a: float
    eps_b: float
    delta_x: float
    delta_y: float
    c: float
    check1: bool
    check2: bool

    @property
    def product_eps(self) -> float:
        return self.eps_a * self.eps_b

    @property
    def product_delta(self) -> float:
        return self.delta_x * self.delta_y


def _require_unbiased_compatible(x: Pom, a: Observable, which: str):
    if not is_compatible(x, a):
        raise CompatibilityError(f"{which} marginal is not compatible with its observable")
    if not is_unbiased(x, a):
        raise BiasError(f"{which} marginal is biased")


def joint_uncertainty_report(m: JointPom, a, b, rho, slack: float = 1e-10) -> JointReport:
    """Evaluate both joint-measurement inequalities for a coexistent pair.

    ``check1``: ``eps_A eps_B >= c/2``; ``check2``: ``ΔX ΔY >= c`` with
    ``c = |Tr[[Â, B̂] rho]|``.
    """
    a, b = as_observable(a), as_observable(b)
    rho = as_state(rho)
    x, y = marginals(m)
    _require_unbiased_compatible(x, a, "x")
    _require_unbiased_compatible(y, b, "y")
    eps_a, eps_b = precision(x, a, rho), precision(y, b, rho)
    dx, dy = spread(x, rho)[2], spread(y, rho)[2]
    c = abs(commutator_trace(a.operator, b.operator, rho))
    return JointReport(eps_a, eps_b, dx, dy, c,
                       eps_a * eps_b >= c / 2 - slack,
                       dx * dy >= c - slack)


def interacting_realization(m: JointPom, seed: int = 0) -> MeasurementScheme:
    """Scheme with a pure probe whose two commuting meters reproduce ``m``.

    The probe carries one basis vector per grid cell; the coupling extends
    ``psi ⊗ e0 -> sum_ij (sqrt(M_ij) psi) ⊗ e_ij`` to a unitary, and the
    meters read the row and column label of the cell.
    """
    d = m.dim
    nx, ny = len(m.x_outcomes), len(m.y_outcomes)
    n = max(nx * ny, 2)
    w = np.zeros((d * n, d), dtype=complex)
    for i, j, _, _, eff in m.cells():
        w[i * ny + j::n, :] = psd_sqrt(eff)
    u = complete_isometry(w, seed=seed, columns=[a * n for a in range(d)])

    def coordinate_meter(labels, axis):
        projs = []
        for k in range(len(labels)):
            p = np.zeros((n, n), dtype=complex)
            for i, j, *_ in m.cells():
                if (i, j)[axis] == k:
                    p[i * ny + j, i * ny + j] = 1.0
            projs.append(p)
        # padding cells read the last label
        for idx in range(nx * ny, n):
            projs[-1][idx, idx] = 1.0
        return Observable(labels, projs)

    meters = (coordinate_meter(m.x_outcomes, 0), coordinate_meter(m.y_outcomes, 1))
    return MeasurementScheme(n, DensityState.pure(ket(0, n)), u, meters)


@dataclass(frozen=True, eq=False)
class NoiseOperator:
    op: np.ndarray
    mean: float
    variance: float


def noise_operators(s: MeasurementScheme, observables, psi) -> list[NoiseOperator]:
    """Noise operators ``N_i = U^†(1 ⊗ M_i)U - A_i ⊗ 1`` with moments in ``psi ⊗ phi``.

    ``phi`` is the scheme's probe state, which must be pure; ``psi`` is a
    system state vector or pure density state.
    """
    observables = [as_observable(a) for a in observables]
    if len(observables) != len(s.meters):
        raise ValueError("need one observable per meter")
    if not s.probe_state.is_pure():
        raise ValueError("noise operators need a pure probe state")
    psi = _as_vector(psi)
    lam, vecs = np.linalg.eigh(s.probe_state.op)
    phi = vecs[:, -1]
    joint = np.kron(psi, phi)
    eye_k = np.eye(s.probe_dim)
    u = s.coupling
    out = []
    for meter, a in zip(s.meters, observables):
        if a.dim != s.system_dim:
            raise DimensionError("observable does not act on the system space")
        n_op = dag(u) @ tensor_product(np.eye(s.system_dim), meter.operator) @ u \
            - tensor_product(a.operator, eye_k)
        mean = np.vdot(joint, n_op @ joint).real
        second = np.vdot(joint, n_op @ (n_op @ joint)).real
        out.append(NoiseOperator(n_op, float(mean), float(second - mean ** 2)))
    return out


def noise_commutator(noise: list[NoiseOperator], s: MeasurementScheme, psi) -> complex:
    """``<psi ⊗ phi| [N_1, N_2] |psi ⊗ phi>``.

    For an unbiased interacting realization this equals ``-<psi|[A, B]|psi>``;
    only its modulus enters the uncertainty bound.
    """
    psi = _as_vector(psi)
    phi = np.linalg.eigh(s.probe_state.op)[1][:, -1]
    joint = np.kron(psi, phi)
    return complex(np.vdot(joint, commutator(noise[0].op, noise[1].op) @ joint))


def _as_vector(psi) -> np.ndarray:
    a = psi.op if isinstance(psi, DensityState) else np.asarray(psi, dtype=complex)
    if a.ndim == 1:
        return a / np.linalg.norm(a)
    rho = as_state(a)
    if not rho.is_pure():
        raise ValueError("system state must be pure")
    return np.linalg.eigh(rho.op)[1][:, -1]


def jxy(scale: float = np.sqrt(2.0)) -> JointPom:
    """Joint qubit POM ``M_xy = (I + (x/s²) σx + (y/s²) σy) / 4`` on the grid ``{±s}²``.

    Both marginals are unbiased: the x marginal for σx, the y marginal for σy.
    Needs ``s >= √2`` for positivity; ``s = √2`` gives rank-one effects.
    """
    if scale < np.sqrt(2.0) - 1e-12:
        raise ValueError("scale must be at least sqrt(2)")
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    labels = (scale, -scale)
    effects = [[(np.eye(2) + (x / scale ** 2) * sx + (y / scale ** 2) * sy) / 4 for y in labels]
               for x in labels]
    return JointPom(labels, labels, effects)
