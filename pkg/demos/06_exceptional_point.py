"""
Dynamics exactly at an exceptional point
========================================

At gamma = J2 sqrt(n_c + 1) block n_c is a Jordan block: its propagator is
1 - i h t rather than a sum of exponentials.  A state prepared in that block
grows linearly in time.  The package switches to the Jordan form there and
extends the biorthogonal basis with a generalized eigenvector.
"""

import numpy as np

from fockssh import ModelParams, classify_pt_phase, subspace_block
from fockssh.validation import ep_jordan_dynamics

params = ModelParams(1.0, 0.2, gamma=0.4)
print("EP blocks:", classify_pt_phase(params)[1])
blk = subspace_block(params, 3)
print("block h^2 (nilpotent at the EP):\n", np.round(blk.h @ blk.h, 15))
for t in (1.0, 10.0, 100.0):
    up, down = blk.propagator(t) @ [1.0, 0.0]
    print(f"t = {t:5.1f}: amplitudes ({up:.3f}, {down:.3f}), norm {np.hypot(abs(up), abs(down)):.3f}")

err, slope = ep_jordan_dynamics()
print(f"dense propagation vs Jordan form: {err:.2e}; log-log growth slope {slope:.3f}")
