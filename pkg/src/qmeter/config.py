"""Scenario configuration: JSON parsing, validation and object construction.

Matrix literals are row-major nested arrays whose entries are reals, ``[re, im]``
pairs, or expression strings such as ``"pi/6"``.
"""
from __future__ import annotations

import ast
import json
import math
import operator
import os
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .joint import JointPom, jxy
from .model import (
    DensityState,
    Hamiltonian,
    Instrument,
    Observable,
    Pom,
    associated_pom,
    as_observable,
)
from .models import PAULI, ModelError, build_model, rotation_z_to_x
from .suites import SUITES

KINDS = ("born", "precision", "joint", "sql", "realize", "naimark", "suite", "search")

COMMON_KEYS = {"kind", "dim", "seed", "tolerances", "output"}
KIND_KEYS = {
    "born": ({"pom", "state"}, set()),
    "precision": ({"pom", "observable", "state"}, set()),
    "joint": ({"joint_pom", "observable", "observable_b", "state"}, set()),
    "sql": ({"model", "observable", "hamiltonian", "tau", "state"}, set()),
    "realize": ({"model"}, set()),
    "naimark": ({"pom"}, set()),
    "suite": ({"suite"}, {"trials"}),
    "search": ({"observable", "hamiltonian", "tau"}, {"state", "search"}),
}

DEFAULT_EQUALITY_TOL = 1e-10
DEFAULT_ROUNDTRIP_TOL = 1e-9


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


def _join(*parts) -> str:
    return ".".join(str(p) for p in parts if p != "")


# ---------------------------------------------------------------------------
# expressions and literals
# ---------------------------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}
_UNOPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}


def eval_expr(text: str) -> float:
    """Evaluate numbers, ``pi`` and ``+ - * /`` (with parentheses)."""
    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](walk(node.operand))
        raise ValueError(f"unsupported expression {text!r}")

    try:
        return walk(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ZeroDivisionError) as exc:
        raise ValueError(f"bad expression {text!r}: {exc}") from exc


def real(value, path: str) -> float:
    if isinstance(value, bool):
        raise ConfigError(path, "expected a number")
    if isinstance(value, (int, float)):
        out = float(value)
    elif isinstance(value, str):
        try:
            out = eval_expr(value)
        except ValueError as exc:
            raise ConfigError(path, str(exc)) from exc
    else:
        raise ConfigError(path, f"expected a number, got {type(value).__name__}")
    if not math.isfinite(out):
        raise ConfigError(path, "value is not finite")
    return out


def scalar(value, path: str) -> complex:
    if isinstance(value, list):
        if len(value) != 2:
            raise ConfigError(path, "complex entries are [re, im] pairs")
        return complex(real(value[0], f"{path}[0]"), real(value[1], f"{path}[1]"))
    return complex(real(value, path))


def vector(value, path: str, dim: int | None = None) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ConfigError(path, "expected a non-empty array")
    v = np.array([scalar(x, f"{path}[{i}]") for i, x in enumerate(value)])
    if dim is not None and len(v) != dim:
        raise ConfigError(path, f"expected length {dim}, got {len(v)}")
    return v


def matrix(value, path: str, dim: int | None = None) -> np.ndarray:
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise ConfigError(path, "expected a row-major nested array")
    rows = [vector(r, f"{path}[{i}]") for i, r in enumerate(value)]
    if any(len(r) != len(rows) for r in rows):
        raise ConfigError(path, "matrix must be square")
    m = np.array(rows)
    if dim is not None and m.shape[0] != dim:
        raise ConfigError(path, f"expected a {dim}x{dim} matrix, got {m.shape[0]}x{m.shape[0]}")
    return m


def matrix_literal(m: np.ndarray) -> list:
    """Inverse of :func:`matrix`: entries as ``[re, im]`` pairs."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


# ---------------------------------------------------------------------------
# object builders
# ---------------------------------------------------------------------------

def _keys(obj: dict, path: str, allowed: set, required: set = frozenset()):
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected an object")
    for k in sorted(obj):
        if k not in allowed:
            raise ConfigError(_join(path, k), "unknown key")
    for k in sorted(required):
        if k not in obj:
            raise ConfigError(_join(path, k), "missing required key")


def build_observable(spec, path: str, dim: int) -> Observable:
    if isinstance(spec, str):
        if spec not in PAULI:
            raise ConfigError(path, f"unknown named operator {spec!r}")
        op = PAULI[spec]
    elif isinstance(spec, dict) and "matrix" in spec:
        _keys(spec, path, {"matrix"})
        op = matrix(spec["matrix"], _join(path, "matrix"))
    elif isinstance(spec, dict) and "diag" in spec:
        _keys(spec, path, {"diag"})
        op = np.diag(vector(spec["diag"], _join(path, "diag")))
    else:
        raise ConfigError(path, "observable is a name, {'matrix': ...} or {'diag': [...]}")
    if op.shape[0] != dim:
        raise ConfigError(path, f"observable has dimension {op.shape[0]}, expected {dim}")
    try:
        return as_observable(op)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def build_state(spec, path: str, dim: int) -> DensityState:
    try:
        if isinstance(spec, str):
            named = {
                "zero": lambda: DensityState.pure(np.eye(dim)[0]),
                "one": lambda: DensityState.pure(np.eye(dim)[1]),
                "plus": lambda: DensityState.pure(np.ones(dim) / np.sqrt(dim)),
                "mixed": lambda: DensityState.maximally_mixed(dim),
            }
            if spec not in named:
                raise ConfigError(path, f"unknown named state {spec!r}")
            return named[spec]()
        if isinstance(spec, dict) and "vector" in spec:
            _keys(spec, path, {"vector"})
            return DensityState.pure(vector(spec["vector"], _join(path, "vector"), dim))
        if isinstance(spec, dict) and "matrix" in spec:
            _keys(spec, path, {"matrix"})
            return DensityState(matrix(spec["matrix"], _join(path, "matrix"), dim))
    except ConfigError:
        raise
    except (ValueError, IndexError) as exc:
        raise ConfigError(path, str(exc)) from exc
    raise ConfigError(path, "state is a name, {'vector': ...} or {'matrix': ...}")


MODEL_KEYS = {"family", "observable", "eta", "labels", "psi0", "delta", "strength"}


def build_instrument(spec, path: str, dim: int) -> Instrument:
    if isinstance(spec, dict) and "kraus" in spec:
        _keys(spec, path, {"outcomes", "kraus"}, {"outcomes", "kraus"})
        labels = [real(x, f"{path}.outcomes[{i}]") for i, x in enumerate(spec["outcomes"])]
        sets = []
        for i, ks in enumerate(spec["kraus"]):
            if not isinstance(ks, list) or not ks:
                raise ConfigError(f"{path}.kraus[{i}]", "expected a non-empty list of matrices")
            sets.append([matrix(k, f"{path}.kraus[{i}][{j}]", dim) for j, k in enumerate(ks)])
        try:
            return Instrument(labels, sets)
        except ValueError as exc:
            raise ConfigError(f"{path}.kraus", str(exc)) from exc
    _keys(spec, path, MODEL_KEYS, {"family"})
    params: dict[str, Any] = {"family": spec["family"]}
    params["observable"] = build_observable(spec.get("observable", "sz"), _join(path, "observable"), dim)
    for key in ("eta", "delta", "strength"):
        if key in spec:
            params[key] = real(spec[key], _join(path, key))
    if "labels" in spec:
        params["labels"] = [real(x, f"{path}.labels[{i}]") for i, x in enumerate(spec["labels"])]
    if "psi0" in spec:
        params["psi0"] = vector(spec["psi0"], _join(path, "psi0"), dim)
    try:
        return build_model(params)
    except ModelError as exc:
        raise ConfigError(_join(path, exc.path), str(exc).split(": ", 1)[-1]) from exc
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def build_pom(spec, path: str, dim: int) -> Pom:
    if isinstance(spec, dict) and "effects" in spec:
        _keys(spec, path, {"outcomes", "effects"}, {"outcomes", "effects"})
        labels = [real(x, f"{path}.outcomes[{i}]") for i, x in enumerate(spec["outcomes"])]
        effects = [matrix(e, f"{path}.effects[{i}]", dim) for i, e in enumerate(spec["effects"])]
        try:
            return Pom(labels, effects)
        except ValueError as exc:
            raise ConfigError(_join(path, "effects"), str(exc)) from exc
    if isinstance(spec, dict) and "family" in spec:
        return associated_pom(build_instrument(spec, path, dim))
    return build_observable(spec, path, dim).as_pom()


def build_joint_pom(spec, path: str, dim: int) -> JointPom:
    _keys(spec, path, {"preset", "scale", "x_outcomes", "y_outcomes", "effects"})
    if "preset" in spec:
        if spec["preset"] != "jxy":
            raise ConfigError(_join(path, "preset"), f"unknown preset {spec['preset']!r}")
        scale = real(spec.get("scale", "2"), _join(path, "scale")) if "scale" in spec else math.sqrt(2)
        if dim != 2:
            raise ConfigError("dim", "the jxy preset is a qubit POM")
        try:
            return jxy(scale)
        except ValueError as exc:
            raise ConfigError(_join(path, "scale"), str(exc)) from exc
    for k in ("x_outcomes", "y_outcomes", "effects"):
        if k not in spec:
            raise ConfigError(_join(path, k), "missing required key")
    xs = [real(x, f"{path}.x_outcomes[{i}]") for i, x in enumerate(spec["x_outcomes"])]
    ys = [real(y, f"{path}.y_outcomes[{i}]") for i, y in enumerate(spec["y_outcomes"])]
    grid = [[matrix(m, f"{path}.effects[{i}][{j}]", dim) for j, m in enumerate(row)]
            for i, row in enumerate(spec["effects"])]
    try:
        return JointPom(xs, ys, grid)
    except ValueError as exc:
        raise ConfigError(_join(path, "effects"), str(exc)) from exc


def build_hamiltonian(spec, path: str, dim: int, tau: float) -> Hamiltonian:
    _keys(spec, path, {"preset", "matrix", "hbar"})
    hbar = real(spec.get("hbar", 1.0), _join(path, "hbar"))
    if hbar <= 0:
        raise ConfigError(_join(path, "hbar"), "must be positive")
    if "preset" in spec:
        if spec["preset"] != "rotation_z_to_x":
            raise ConfigError(_join(path, "preset"), f"unknown preset {spec['preset']!r}")
        if dim != 2:
            raise ConfigError(_join(path, "preset"), "rotation_z_to_x is a qubit Hamiltonian")
        if tau == 0:
            raise ConfigError("tau", "rotation_z_to_x needs a nonzero tau")
        return rotation_z_to_x(tau, hbar)
    if "matrix" not in spec:
        raise ConfigError(path, "hamiltonian needs 'preset' or 'matrix'")
    try:
        return Hamiltonian(matrix(spec["matrix"], _join(path, "matrix"), dim), hbar)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(_join(path, "matrix"), str(exc)) from exc


# ---------------------------------------------------------------------------
# scenario config
# ---------------------------------------------------------------------------

def default_equality_tol() -> float:
    raw = os.environ.get("QMETER_TOL")
    if raw is None:
        return DEFAULT_EQUALITY_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise ConfigError("QMETER_TOL", f"not a decimal number: {raw!r}") from None
    if not tol > 0:
        raise ConfigError("QMETER_TOL", "must be positive")
    return tol


@dataclass(eq=False)
class ScenarioConfig:
    """Validated scenario: the raw JSON document plus the objects it describes."""

    kind: str
    data: dict
    objects: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int | None:
        return self.data.get("dim")

    @property
    def seed(self) -> int:
        return int(self.data.get("seed", 0))

    @property
    def equality_tol(self) -> float:
        return float(self.data.get("tolerances", {}).get("equality", default_equality_tol()))

    @property
    def roundtrip_tol(self) -> float:
        return float(self.data.get("tolerances", {}).get("roundtrip", DEFAULT_ROUNDTRIP_TOL))

    @property
    def output_format(self) -> str:
        return self.data.get("output", {}).get("format", "json")

    @property
    def timing(self) -> bool:
        return bool(self.data.get("output", {}).get("timing", False))

    def dump(self) -> bytes:
        """Canonical JSON (sorted keys) of the raw document."""
        return json.dumps(self.data, sort_keys=True, separators=(",", ":")).encode()


def _int(value, path: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, "expected an integer")
    if value < minimum:
        raise ConfigError(path, f"must be at least {minimum}")
    return value


def parse_config(raw: bytes | str | dict) -> ScenarioConfig:
    """Parse and validate a scenario document.

    Raises :class:`ConfigError` carrying the dotted path of the offending field.
    """
    if isinstance(raw, dict):
        data = raw
    else:
        try:
            text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
            data = json.loads(text)
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ConfigError("", f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("", "config must be a JSON object")
    kind = data.get("kind")
    if kind not in KINDS:
        raise ConfigError("kind", f"must be one of {', '.join(KINDS)}")
    required, optional = KIND_KEYS[kind]
    needs_dim = kind != "suite"
    _keys(data, "", COMMON_KEYS | required | optional, required | ({"dim"} if needs_dim else set()))

    default_equality_tol()
    objects: dict[str, Any] = {}
    dim = _int(data["dim"], "dim", 1) if "dim" in data else None
    if "seed" in data:
        _int(data["seed"], "seed")
    if "tolerances" in data:
        _keys(data["tolerances"], "tolerances", {"equality", "roundtrip"})
        for k, v in data["tolerances"].items():
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
                raise ConfigError(_join("tolerances", k), "must be a positive number")
    if "output" in data:
        _keys(data["output"], "output", {"format", "timing"})
        if data["output"].get("format", "json") not in ("json", "csv"):
            raise ConfigError("output.format", "must be 'json' or 'csv'")
        if not isinstance(data["output"].get("timing", False), bool):
            raise ConfigError("output.timing", "must be a boolean")

    tau = real(data["tau"], "tau") if "tau" in data else 0.0
    if "pom" in data:
        objects["pom"] = build_pom(data["pom"], "pom", dim)
    if "model" in data:
        objects["model"] = build_instrument(data["model"], "model", dim)
    if "observable" in data:
        objects["observable"] = build_observable(data["observable"], "observable", dim)
    if "observable_b" in data:
        objects["observable_b"] = build_observable(data["observable_b"], "observable_b", dim)
    if "joint_pom" in data:
        objects["joint_pom"] = build_joint_pom(data["joint_pom"], "joint_pom", dim)
    if "state" in data:
        objects["state"] = build_state(data["state"], "state", dim)
    if "hamiltonian" in data:
        objects["hamiltonian"] = build_hamiltonian(data["hamiltonian"], "hamiltonian", dim, tau)
    objects["tau"] = tau
    if kind == "suite":
        if data["suite"] not in SUITES:
            raise ConfigError("suite", f"unknown suite {data['suite']!r}; choose from {', '.join(sorted(SUITES))}")
        if "trials" in data:
            _int(data["trials"], "trials", 1)
    if "search" in data:
        _keys(data["search"], "search", {"budget", "objective", "rhs_floor"})
        s = data["search"]
        if "budget" in s:
            _int(s["budget"], "search.budget", 1)
        if s.get("objective", "ratio") not in ("ratio", "margin"):
            raise ConfigError("search.objective", "must be 'ratio' or 'margin'")
        if "rhs_floor" in s:
            real(s["rhs_floor"], "search.rhs_floor")
    return ScenarioConfig(kind, data, objects)
