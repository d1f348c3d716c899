"""Repeated measurements and the standard quantum limit.

A second σz measurement a time τ later is predicted from the first outcome.
If the first measurement's resolution is no worse than the second's
precision, the prediction error cannot drop below |<[A(0), A(τ)]>|.
A measure-and-prepare instrument breaks that condition and beats the bound.
"""
import numpy as np

from qmeter import sql_report
from qmeter.model import DensityState
from qmeter.models import SZ, bloch_xy_state, luders, measure_prepare, rotation_z_to_x

zero = DensityState.pure([1, 0])
h = rotation_z_to_x()
for name, t in (("Lüders", luders(SZ)), ("measure-prepare δ=π/6", measure_prepare(SZ, bloch_xy_state(np.pi / 6)))):
    r = sql_report(t, SZ, h, 1.0, zero)
    print(f"{name}:")
    print(f"  σ = {r.sigma:.6f}, ε_after = {r.epsilon_after:.6f}, condition {r.condition_holds}")
    print(f"  Δ² = {r.delta_sq:.6f}, bound = {r.rhs:.6f}, bound respected {r.sql_holds}")
    for row in r.rows:
        print(f"    x={row.outcome:+.0f} p={row.probability:.3f} prediction={row.prediction}")
