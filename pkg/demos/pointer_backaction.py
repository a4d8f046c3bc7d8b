"""
Pointer readout and the back-action on post-selection
=====================================================

Couples a qubit to a Gaussian pointer, post-selects, and compares the exact
pointer mean and post-selection probability with their first-order forms.
"""

import numpy as np

from weakback import GaussianPointer, Ket, WeakSetup
from weakback.convergence import fit_order
from weakback.pointer import backaction_relation

theta = 0.3
initial = Ket([np.cos(theta), np.sin(theta)])
final = Ket.from_unnormalized([1, 1])
sz = np.diag([1.0, -1.0])
pointer = GaussianPointer(x0=2.0, sigma=1.0)

kappas = np.array([4e-2, 2e-2, 1e-2, 5e-3])
rels = [backaction_relation(WeakSetup(initial, sz, pointer, k), final) for k in kappas]

print("Re<sz>_w =", rels[0].lhs_weakvalue_re)
for k, r in zip(kappas, rels):
    print(f"kappa={k:.4f}  ratio={r.rhs_probability_ratio:.12f}  "
          f"mean exact={r.pointer_mean_exact:.10f}  first order={r.pointer_mean_first_order:.10f}")

# probability gap closes like kappa^2, the pointer mean gap like kappa^3
prob = fit_order(kappas, [r.exact_probability_residual for r in rels])
mean = fit_order(kappas, [r.exact_pointer_residual for r in rels])
print("probability order:", prob.label())
print("pointer mean order:", mean.label())
