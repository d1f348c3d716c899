"""Measuring σx and σy at once.

The grid POM M_xy = (I + (x/2)σx + (y/2)σy)/4 on {±√2}² has unbiased
marginals for σx and σy. On |0> both uncertainty products are saturated,
and the noise operators of an explicit dilation carry the errors.
"""
import numpy as np

from qmeter import interacting_realization, joint_uncertainty_report, jxy, noise_commutator, noise_operators
from qmeter.model import DensityState
from qmeter.models import SX, SY

zero = DensityState.pure([1, 0])
rep = joint_uncertainty_report(jxy(), SX, SY, zero)
print(f"ε_A ε_B = {rep.product_eps:.6f}  vs  c/2 = {rep.c / 2:.6f}")
print(f"ΔX ΔY  = {rep.product_delta:.6f}  vs  c   = {rep.c:.6f}")

for scale in (2.0, 3.0):
    r = joint_uncertainty_report(jxy(scale), SX, SY, zero)
    print(f"grid ±{scale}: ε_A ε_B = {r.product_eps:.3f}, ΔX ΔY = {r.product_delta:.3f}")

s = interacting_realization(jxy(), seed=0)
n1, n2 = noise_operators(s, [SX, SY], zero)
print(f"\nnoise means {n1.mean:+.1e} {n2.mean:+.1e}; variances {n1.variance:.6f} {n2.variance:.6f}")
print("<[N1, N2]> =", np.round(noise_commutator([n1, n2], s, zero), 9), " (<[σx, σy]> = 2i)")
