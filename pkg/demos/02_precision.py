"""Precision of an unsharp measurement.

The unsharp σz measurement with η = 0.5 reports ±2. Its labels are chosen so
that the mean of the outcome equals <σz> in every state, i.e. it is unbiased.
The price is a mean-square error of 3 on |0>, computed here two ways.
"""
import numpy as np

from qmeter import associated_pom, compatible_joint, precision, precision_decomposition, spread
from qmeter.model import DensityState, Observable, Pom
from qmeter.models import SZ, unsharp

zero = DensityState.pure([1, 0])
a = Observable.from_operator(SZ)
x = associated_pom(unsharp(SZ, 0.5))

mu = compatible_joint(x, a, zero)
print("joint distribution of (outcome, σz):", mu.as_dict())
print("ε² from the joint distribution:", precision(x, a, zero) ** 2)
print("ε² from ΔX² - ΔA²:", spread(x, zero)[1] - spread(a.as_pom(), zero)[1])

print("\nrelabelled to ±1, the POM becomes biased:")
biased = Pom([1, -1], [x.effect(2), x.effect(-2)])
parts = precision_decomposition(biased, a, DensityState.maximally_mixed(2))
print(f"  pom variance {parts.pom_variance:.3f}, operator variance {parts.operator_variance:.3f}, "
      f"bias {parts.bias:.3f}, ε² {parts.total:.3f}")
