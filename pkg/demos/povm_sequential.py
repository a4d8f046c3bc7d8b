"""
Binned pointer as a weak POVM
=============================

Turns the pointer into a POVM by binning its position, follows it with a
projective measurement and extracts the first-order slope of the conditional
average.  Ends with an instance whose first-order conditional ratio is negative.
"""

import numpy as np

from weakback import GaussianPointer
from weakback.povm import (
    GaussianBinnedFamily,
    backaction_decomposition,
    find_negativity_witness,
    sequential_probability,
    symmetric_edges,
)

pointer = GaussianPointer(x0=2.0, sigma=1.0)
sz = np.diag([1.0, -1.0])
fam = GaussianBinnedFamily(sz, pointer, symmetric_edges(pointer, 4))
print("labels alpha_m:", fam.labels)

theta = 0.3
I = np.array([np.cos(theta), np.sin(theta)])
plus = np.array([1.0, 1.0]) / np.sqrt(2)
finals = [np.outer(plus, plus), np.eye(2) - np.outer(plus, plus)]

print("Pr(n, m) at g = 0.3:")
print(sequential_probability(I, fam(0.3), finals))

dec = backaction_decomposition(I, fam, finals, 0)
print(f"zeroth={dec.zeroth:.6f} slope={dec.first_slope:.10f} Re<A'>_w={dec.weakvalue_re:.10f}")

# near-orthogonal post-selection: the first-order ratio leaves [0, 1]
w = find_negativity_witness(np.random.default_rng(1), pointer, coupling=0.1)
print("first-order ratio:", w.first_order_ratio)
print("exact ratio:      ", w.exact_ratio)
print("min Pr(n, m):     ", w.joint_probabilities.min())
