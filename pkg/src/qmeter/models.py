"""Named instrument families and the standard qubit fixtures."""
from __future__ import annotations

from typing import Any, Mapping

import numpy as np

from .model import (
    DensityState,
    Hamiltonian,
    Instrument,
    MeasurementScheme,
    Observable,
    as_observable,
    scheme_to_instrument,
)
from .operators import ket, psd_sqrt, tensor_product

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)

PAULI = {"id": I2, "sx": SX, "sy": SY, "sz": SZ}


class ModelError(ValueError):
    """Invalid model descriptor; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def rotation_z_to_x(tau: float = 1.0, hbar: float = 1.0) -> Hamiltonian:
    """Qubit Hamiltonian with ``U_τ^† σz U_τ = σx``: ``H = -(π/4)(ħ/τ) σy``."""
    return Hamiltonian(-(np.pi / 4) * (hbar / tau) * SY, hbar)


def bloch_xy_state(delta: float) -> np.ndarray:
    """Qubit vector with Bloch vector ``(cos δ, sin δ, 0)``."""
    return np.array([1.0, np.exp(1j * delta)], dtype=complex) / np.sqrt(2)


def luders(a) -> Instrument:
    """Projective instrument: Kraus ``{P_k}`` per eigenvalue ``a_k``."""
    a = as_observable(a)
    return Instrument(a.outcomes, [[p] for p in a.projectors])


def unsharp(a, eta: float, labels=None) -> Instrument:
    """Unsharp measurement of ``a`` with square-root Kraus operators.

    Effects ``E_k = η P_k + (1 - η) I / n``. Default labels
    ``x_k = (a_k - (1 - η) mean(a)) / η`` make the POM unbiased; for σz this
    gives effects ``(1 ± η σz)/2`` with labels ``±1/η``.
    """
    a = as_observable(a)
    if not 0 < eta <= 1:
        raise ModelError("eta", f"must lie in (0, 1], got {eta}")
    n = len(a.outcomes)
    effects = [eta * p + (1 - eta) * np.eye(a.dim) / n for p in a.projectors]
    if labels is None:
        avals = np.array(a.outcomes)
        labels = (avals - (1 - eta) * avals.mean()) / eta
    elif len(labels) != n:
        raise ModelError("labels", f"need {n} labels")
    return Instrument(labels, [[psd_sqrt(e)] for e in effects])


def measure_prepare(a, psi0) -> Instrument:
    """Measure ``a`` projectively, then prepare ``psi0``: ``K_{k,m} = |psi0><e_{k,m}|``."""
    a = as_observable(a)
    psi0 = np.asarray(psi0, dtype=complex).reshape(-1)
    if psi0.shape[0] != a.dim:
        raise ModelError("psi0", "dimension does not match the observable")
    if abs(np.linalg.norm(psi0) - 1) > 1e-9:
        raise ModelError("psi0", f"not normalized (norm {np.linalg.norm(psi0):.12g})")
    sets = []
    for p in a.projectors:
        w, v = np.linalg.eigh(p)
        sets.append([np.outer(psi0, v[:, i].conj()) for i in np.flatnonzero(w > 0.5)])
    return Instrument(a.outcomes, sets)


def von_neumann_scheme(a, strength: float = 1.0) -> MeasurementScheme:
    """Controlled-rotation coupling to an ``n``-level probe prepared in ``|0>``.

    On the eigenspace of ``a_k`` the probe is rotated by ``strength · π/2``
    in the plane of ``|0>`` and ``|k>`` (``k >= 1``; ``k = 0`` is left alone).
    The meter reads ``a_j`` on ``|j>``. ``strength = 1`` is a projective
    measurement of ``a``.
    """
    a = as_observable(a)
    if not 0 <= strength <= 1:
        raise ModelError("strength", f"must lie in [0, 1], got {strength}")
    n = max(len(a.outcomes), 2)
    theta = strength * np.pi / 2
    u = np.zeros((a.dim * n, a.dim * n), dtype=complex)
    for k, p in enumerate(a.projectors):
        r = np.eye(n, dtype=complex)
        if k >= 1:
            c, s = np.cos(theta), np.sin(theta)
            r[0, 0], r[k, k], r[0, k], r[k, 0] = c, c, -s, s
        u += tensor_product(p, r)
    labels = list(a.outcomes) + [a.outcomes[-1]] * (n - len(a.outcomes))
    projs = []
    for lab in a.outcomes:
        p = np.zeros((n, n), dtype=complex)
        for j, x in enumerate(labels):
            if x == lab:
                p[j, j] = 1.0
        projs.append(p)
    return MeasurementScheme(n, DensityState.pure(ket(0, n)), u, (Observable(a.outcomes, projs),))


def von_neumann(a, strength: float = 1.0) -> Instrument:
    return scheme_to_instrument(von_neumann_scheme(a, strength))


FAMILIES = {
    "luders": {
        "params": ["observable"],
        "doc": "Projective (Lüders) instrument. Kraus {P_k} per eigenvalue a_k of the "
               "observable; posterior P_k rho P_k / p_k.",
    },
    "unsharp": {
        "params": ["observable", "eta", "labels?"],
        "doc": "Unsharp instrument. Effects E_k = eta P_k + (1-eta) I/n, Kraus sqrt(E_k). "
               "Default labels (a_k - (1-eta) mean(a))/eta give an unbiased POM; for sz "
               "the effects are (1 ± eta sz)/2 with labels ±1/eta. eta in (0, 1].",
    },
    "measure_prepare": {
        "params": ["observable", "psi0 | delta"],
        "doc": "Measure-and-prepare instrument. Kraus |psi0><e_{k,m}| for an eigenbasis "
               "e_{k,m} of the observable; every posterior equals |psi0><psi0|. On a qubit "
               "'delta' selects psi0 = (|0> + e^{i delta}|1>)/sqrt(2).",
    },
    "von_neumann": {
        "params": ["observable", "strength"],
        "doc": "Scheme-derived instrument. Probe |0> in n levels, coupling sum_k P_k ⊗ R_k "
               "with R_k rotating |0> toward |k> by strength*pi/2; meter reads a_j on |j>. "
               "strength = 1 reproduces the Lüders instrument.",
    },
}


def build_model(spec: Mapping[str, Any] | None = None, **params) -> Instrument:
    """Build an instrument from a descriptor such as ``{"family": "unsharp", "observable": SZ, "eta": 0.5}``.

    ``observable`` may be a matrix, an ``Observable`` or one of ``"sx"``,
    ``"sy"``, ``"sz"``.
    """
    spec = dict(spec or {}, **params)
    family = spec.pop("family", None)
    if family not in FAMILIES:
        raise ModelError("family", f"unknown model family {family!r}")
    obs = spec.pop("observable", "sz")
    if isinstance(obs, str):
        if obs not in PAULI:
            raise ModelError("observable", f"unknown named operator {obs!r}")
        obs = PAULI[obs]
    try:
        a = as_observable(obs)
    except ValueError as exc:
        raise ModelError("observable", str(exc)) from exc

    if family == "luders":
        _no_extra(spec)
        return luders(a)
    if family == "unsharp":
        eta = _real(spec.pop("eta", None), "eta")
        labels = spec.pop("labels", None)
        _no_extra(spec)
        return unsharp(a, eta, labels)
    if family == "measure_prepare":
        if "psi0" in spec and "delta" in spec:
            raise ModelError("psi0", "give psi0 or delta, not both")
        if "delta" in spec:
            if a.dim != 2:
                raise ModelError("delta", "delta is only defined for qubits")
            psi0 = bloch_xy_state(_real(spec.pop("delta"), "delta"))
        elif "psi0" in spec:
            psi0 = spec.pop("psi0")
        else:
            raise ModelError("psi0", "measure_prepare needs psi0 or delta")
        _no_extra(spec)
        return measure_prepare(a, psi0)
    strength = _real(spec.pop("strength", 1.0), "strength")
    _no_extra(spec)
    return von_neumann(a, strength)


def _real(v, path: str) -> float:
    if v is None:
        raise ModelError(path, "missing required parameter")
    try:
        return float(v)
    except (TypeError, ValueError) as exc:
        raise ModelError(path, f"not a real number: {v!r}") from exc


def _no_extra(spec: dict):
    if spec:
        key = sorted(spec)[0]
        raise ModelError(key, "unknown parameter")
