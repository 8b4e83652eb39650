"""Build the 2x2x2x2 four-angle tensor, recover its phases and decompose it."""

import numpy as np

from tensorphase.fixtures import example1
from tensorphase.phase import classify, phases, sectorial_decomposition

thetas = [-np.pi / 4, -np.pi / 12, np.pi / 6, np.pi / 3]
A = example1(thetas)

print("class       :", classify(A).cls.value)
pv = phases(A)
print("phases      :", np.round(pv.phases, 12))
print("planted     :", np.sort(thetas)[::-1])
print("center      :", round(pv.gamma, 12))

dec = sectorial_decomposition(A)
print("decomposition residual:", f"{dec.residual:.2e}")
