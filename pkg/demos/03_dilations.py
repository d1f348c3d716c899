"""Every instrument comes from a probe, a unitary coupling and a meter.

realize_instrument builds such a scheme, scheme_to_instrument reads the
instrument back off it, and the Choi matrices confirm the round trip.
naimark_dilate does the same for a POM with a sharp observable.
"""
import numpy as np

from qmeter import choi_distance, naimark_dilate, realize_instrument, scheme_to_instrument
from qmeter.sampling import random_instrument, random_pom

rng = np.random.default_rng(0)
t = random_instrument(rng, dim=3, n_outcomes=3, max_kraus=2)
s = realize_instrument(t, seed=1)
print(f"instrument on C^3 with {sum(len(k) for k in t.kraus_sets)} Kraus operators")
print(f"probe dimension {s.probe_dim}, coupling {s.coupling.shape}")
print("Choi distance after the round trip:", choi_distance(scheme_to_instrument(s), t))

x = random_pom(rng, 2, 3)
v, sharp = naimark_dilate(x)
print(f"\nNaimark isometry {v.shape}; ‖V†V - I‖ = {np.linalg.norm(v.conj().T @ v - np.eye(2), 2):.1e}")
for lab, e in zip(x.outcomes, x.effects):
    p = sharp.projectors[sharp.outcomes.index(lab)]
    print(f"  outcome {lab:+.3f}: ‖V†PV - E‖ = {np.linalg.norm(v.conj().T @ p @ v - e, 2):.1e}")
