"""Instruments, outcome statistics and posterior states on a qubit.

A Lüders measurement of σz leaves the system in an eigenstate, so repeating
it gives the same answer. A measure-and-prepare instrument has the same
outcome statistics but forgets the state it measured.
"""
import numpy as np

from qmeter import associated_pom, born_distribution, posterior_family, sequential_distribution
from qmeter.model import DensityState
from qmeter.models import SX, SZ, bloch_xy_state, luders, measure_prepare

plus = DensityState.pure(np.array([1, 1]) / np.sqrt(2))
lz = luders(SZ)
mp = measure_prepare(SZ, bloch_xy_state(np.pi / 6))

print("Born statistics of σz on |+>:", born_distribution(associated_pom(lz), plus).as_dict())

for name, t in (("Lüders", lz), ("measure-prepare", mp)):
    print(f"\n{name} posteriors on |+>:")
    for e in posterior_family(t, plus):
        print(f"  x={e.outcome:+.0f}  p={e.probability:.3f}\n{np.round(e.posterior.op, 3)}")

print("\nrepeat Lüders-Z:", sequential_distribution([lz, lz], plus).as_dict())
print("repeat measure-prepare:", sequential_distribution([mp, mp], plus).as_dict())
print("Lüders-Z then Lüders-X on |+>:", sequential_distribution([lz, luders(SX)], plus).as_dict())
