"""A singular tensor with a sectorial block: quasi-phases and the blocked form."""

import numpy as np

from tensorphase.analysis import quasi_blocked_decomposition, quasi_phases
from tensorphase.fixtures import example2
from tensorphase.phase import classify
from tensorphase.tensor import rank

thetas = [-0.4, 0.1, 0.5, 0.9]
A = example2(thetas)

print("class :", classify(A).cls.value)
print("rank  :", rank(A))
print("quasi-phases:", np.round(quasi_phases(A).phases, 10))
print("planted     :", sorted(thetas, reverse=True))

blk = quasi_blocked_decomposition(A, n=1, Jn=2)
print("blocked form residual:", f"{blk.residual:.2e}")
