"""Random search for SQL-beating instruments on a qubit and a qutrit."""
import numpy as np

from qmeter import sql_violation_search
from qmeter.models import SZ, rotation_z_to_x
from qmeter.sampling import random_hamiltonian, random_observable

res = sql_violation_search(2, SZ, rotation_z_to_x(), 1.0, budget=400, seed=3)
print(f"qubit: {res.status}, Δ²/bound = {res.ratio:.4f} after {res.evaluations} candidates")
for x, ks in zip(res.best.outcomes, res.best.kraus_sets):
    print(f"  outcome {x:+.3f}: {len(ks)} Kraus operator(s)")

rng = np.random.default_rng(5)
a, h = random_observable(rng, 3), random_hamiltonian(rng, 3)
res = sql_violation_search(3, a, h, 1.0, budget=300, seed=5)
print(f"qutrit: {res.status}, Δ²/bound = {res.ratio:.4f}")
