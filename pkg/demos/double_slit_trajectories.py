"""
Double slit: weak momentum and its streamlines
==============================================

Evaluates the real weak momentum of the two-slit field, integrates the
streamlines it defines and compares where they end with |psi|^2.
"""

import numpy as np

from weakback.scenarios.twoslit import (
    default_field,
    far_field_spacing,
    fringe_spacing,
    ks_distance,
    reconstruct_trajectories,
    sample_starts,
)

field = default_field()
z_end = field.z_planes[-1]
print(f"d={field.d} s={field.s} k={field.k}, last plane z={z_end}")

xi = np.linspace(-4, 4, 9)
print("weak momentum at z_end:", np.round(field.weak_momentum(xi, z_end), 4))

starts = sample_starts(field, 2000, rng=np.random.default_rng(0))
bundle = reconstruct_trajectories(field, starts)
print("non-crossing:", bundle.non_crossing())
print("KS distance of endpoints vs |psi|^2:", ks_distance(bundle.endpoints(), field, z_end))

# dark fringes far downstream sit at the textbook spacing
z = 200 * field.rayleigh
print("dark-fringe spacing:", fringe_spacing(field, z, "minima"))
print("2 pi z / (k d):     ", far_field_spacing(field, z))
