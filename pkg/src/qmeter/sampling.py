"""Seeded random states, observables, POMs and instruments for the theorem suites."""
from __future__ import annotations

import numpy as np

from .joint import JointPom
from .model import DensityState, Hamiltonian, Instrument, Observable, Pom
from .operators import dag, inv_sqrt_psd, psd_sqrt, tensor_product


def ginibre(rng: np.random.Generator, rows: int, cols: int | None = None) -> np.ndarray:
    cols = rows if cols is None else cols
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    q, r = np.linalg.qr(ginibre(rng, dim))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = ginibre(rng, dim)
    return (g + dag(g)) / 2


def random_state(rng: np.random.Generator, dim: int, pure: bool | None = None) -> DensityState:
    if pure is None:
        pure = bool(rng.integers(2))
    if pure:
        v = ginibre(rng, dim, 1)[:, 0]
        return DensityState.pure(v / np.linalg.norm(v))
    rank = int(rng.integers(1, dim + 1))
    g = ginibre(rng, dim, rank)
    rho = g @ dag(g)
    return DensityState(rho / np.trace(rho).real)


def random_observable(rng: np.random.Generator, dim: int, degenerate: bool | None = None) -> Observable:
    """Random eigenbasis with integer-spaced eigenvalues, optionally with repeats."""
    if degenerate is None:
        degenerate = dim > 2 and bool(rng.integers(2))
    n = int(rng.integers(2, dim + 1)) if degenerate else dim
    values = np.sort(rng.choice(np.arange(-4, 5), size=n, replace=False)).astype(float)
    values += rng.uniform(-0.3, 0.3, size=n)
    values.sort()
    sizes = np.ones(n, dtype=int)
    for _ in range(dim - n):
        sizes[rng.integers(n)] += 1
    u = random_unitary(rng, dim)
    projs, col = [], 0
    for s in sizes:
        v = u[:, col:col + s]
        projs.append(v @ dag(v))
        col += s
    return Observable(values, projs)


def random_labels(rng: np.random.Generator, n: int, low: float = -3.0, high: float = 3.0) -> np.ndarray:
    while True:
        x = rng.uniform(low, high, size=n)
        if n < 2 or np.min(np.diff(np.sort(x))) > 1e-3:
            return x


def random_pom(rng: np.random.Generator, dim: int, n_outcomes: int) -> Pom:
    while True:
        gs = []
        for _ in range(n_outcomes):
            a = ginibre(rng, dim, int(rng.integers(1, dim + 1)))
            gs.append(a @ dag(a))
        if np.linalg.eigvalsh(sum(gs)).min() > 1e-6:
            break
    s = inv_sqrt_psd(sum(gs))
    effects = [s @ g @ s for g in gs]
    effects = [(e + dag(e)) / 2 for e in effects]
    return Pom(random_labels(rng, n_outcomes), effects)


def _normalize_kraus(kraus: list[np.ndarray]) -> list[np.ndarray]:
    s = inv_sqrt_psd(sum(dag(k) @ k for k in kraus))
    return [k @ s for k in kraus]


def random_instrument(rng: np.random.Generator, dim: int, n_outcomes: int, max_kraus: int = 2) -> Instrument:
    counts = [int(rng.integers(1, max_kraus + 1)) for _ in range(n_outcomes)]
    flat = _normalize_kraus([ginibre(rng, dim) for _ in range(sum(counts))])
    sets, i = [], 0
    for c in counts:
        sets.append(flat[i:i + c])
        i += c
    return Instrument(random_labels(rng, n_outcomes), sets)


def random_unbiased_compatible_pom(rng: np.random.Generator, a: Observable, n_outcomes: int | None = None) -> Pom:
    """POM diagonal in the eigenspaces of ``a`` whose first moment equals ``Â``.

    For each eigenvalue ``a_l`` a random distribution on the outcome grid is
    mixed with a point mass at a grid end so that its mean is exactly ``a_l``.
    """
    avals = np.array(a.outcomes)
    n = n_outcomes or int(rng.integers(2, 5))
    span = avals.max() - avals.min() + 1.0
    inner = rng.uniform(avals.min() - 0.5 * span, avals.max() + 0.5 * span, size=max(n - 2, 0))
    grid = np.concatenate([[avals.min() - span * rng.uniform(0.2, 1.0)],
                           inner,
                           [avals.max() + span * rng.uniform(0.2, 1.0)]])
    lo, hi = 0, len(grid) - 1
    weights = np.zeros((len(grid), len(avals)))
    for l_idx, target in enumerate(avals):
        q = rng.dirichlet(np.ones(len(grid)))
        m = q @ grid
        end = lo if m > target else hi
        t = (m - target) / (m - grid[end])
        w = (1 - t) * q
        w[end] += t
        weights[:, l_idx] = w
    effects = [sum(weights[k, l] * p for l, p in enumerate(a.projectors)) for k in range(len(grid))]
    return Pom(grid, effects)


def random_isometry_blocks(rng: np.random.Generator, dim: int, blocks: int) -> list[np.ndarray]:
    """``blocks`` operators ``V_j`` with ``sum_j V_j^† V_j = I``."""
    stacked = ginibre(rng, dim * blocks, dim)
    q, _ = np.linalg.qr(stacked)
    return [q[j * dim:(j + 1) * dim, :] for j in range(blocks)]


def instrument_for_pom(rng: np.random.Generator, pom: Pom, kind: str, max_kraus: int = 2) -> Instrument:
    """Instrument with associated POM ``pom``.

    ``kind`` is ``"luders"`` (Kraus ``sqrt(E_k)``), ``"rotated"`` (one random
    unitary after ``sqrt(E_k)``) or ``"general"`` (random isometry blocks).
    """
    sets = []
    for e in pom.effects:
        r = psd_sqrt(e)
        if kind == "luders":
            sets.append([r])
        elif kind == "rotated":
            sets.append([random_unitary(rng, pom.dim) @ r])
        elif kind == "general":
            blocks = random_isometry_blocks(rng, pom.dim, int(rng.integers(1, max_kraus + 1)))
            sets.append([v @ r for v in blocks])
        else:
            raise ValueError(f"unknown instrument kind {kind!r}")
    return Instrument(pom.outcomes, sets)


def random_unbiased_compatible_instrument(rng: np.random.Generator, a: Observable) -> Instrument:
    """Instrument whose associated POM is unbiased and compatible with ``a``."""
    if rng.random() < 0.3:
        pom = a.as_pom()
    else:
        pom = random_unbiased_compatible_pom(rng, a)
    kind = ("luders", "rotated", "general")[int(rng.integers(3))]
    return instrument_for_pom(rng, pom, kind)


def random_hamiltonian(rng: np.random.Generator, dim: int) -> Hamiltonian:
    return Hamiltonian(random_hermitian(rng, dim))


def random_grid_measure(rng: np.random.Generator, diagonal: bool, size: int | None = None) -> dict:
    """Probability masses on a small grid; diagonal ones live on ``x == y`` only."""
    n = size or int(rng.integers(2, 5))
    labels = [float(v) for v in rng.choice(np.arange(-4, 5), size=n, replace=False)]
    masses = {}
    if diagonal:
        w = rng.dirichlet(np.ones(n))
        for x, p in zip(labels, w):
            masses[(x, x)] = float(p)
        for x in labels:
            for y in labels:
                masses.setdefault((x, y), 0.0)
    else:
        w = rng.dirichlet(np.ones(n * n))
        for i, (x, y) in enumerate((x, y) for x in labels for y in labels):
            masses[(x, y)] = float(w[i])
    return masses


def random_coexistent_pair(rng: np.random.Generator):
    """Joint POM with unbiased marginals for two spin components, plus the pair ``(A, B)``.

    On a qubit ``M_xy = (I + (x/sx²) n·σ + (y/sy²) m·σ)/4`` on ``{±sx} × {±sy}``
    with unit ``n``, ``m`` and ``sx, sy`` large enough for positivity; optionally tensored with the
    identity of an ancillary factor so dimensions up to 4 occur.
    """
    from .models import SX, SY, SZ

    def unit():
        v = rng.standard_normal(3)
        return v / np.linalg.norm(v)

    n, m = unit(), unit()
    a = n[0] * SX + n[1] * SY + n[2] * SZ
    b = m[0] * SX + m[1] * SY + m[2] * SZ
    # positivity: 1/sx² + 1/sy² + 2|n·m|/(sx sy) <= 1
    base = np.sqrt(2 * (1 + abs(n @ m)))
    sx, sy = base * rng.uniform(1.0, 1.5, size=2)
    extra = int(rng.integers(1, 3))
    eye = np.eye(extra)
    labels_x, labels_y = (sx, -sx), (sy, -sy)
    effects = [[tensor_product((np.eye(2) + (x / sx ** 2) * a + (y / sy ** 2) * b) / 4, eye)
                for y in labels_y] for x in labels_x]
    return JointPom(labels_x, labels_y, effects), tensor_product(a, eye), tensor_product(b, eye)
