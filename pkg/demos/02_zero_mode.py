"""
Where does the zero mode live?
==============================

The zero mode is the displaced vacuum |alpha, down>, so its boson-number
distribution is Poissonian with mean alpha^2 = (J1/J2)^2.  For J1 < J2 it sits
on the left end of the Fock chain like an SSH edge state.  For J1 > J2 it moves
into the bulk and becomes a domain-wall state, because the sqrt(n) growth of
the intercell hopping puts the "topological" region at large n.  The finite
isotropic SSH chain is shown for comparison.
"""

import numpy as np

from fockssh import FockCutoff, ModelParams, isotropic_ssh_spectrum, zero_mode_profile

cutoff = FockCutoff(128)
for ratio in (0.5, 1.0, 4.0):
    p = zero_mode_profile(ModelParams(ratio * 0.2, 0.2), cutoff)
    n = np.arange(p.size)
    print(f"J1/J2 = {ratio}: peak at n = {int(np.argmax(p))}, <n> = {np.dot(n, p):.4f}, "
          f"expected {ratio**2:.4f}")

# an ordinary SSH chain with constant hoppings: edge modes only for J1 < J2
for j1 in (0.05, 0.4):
    spec = isotropic_ssh_spectrum(j1, 0.2, cells=50)
    sides = [side for side, _ in spec.edge_states]
    print(f"isotropic chain J1/J2 = {j1 / 0.2:.2f}: {spec.zero_indices.size} zero modes {sides}, "
          f"min |E| = {np.abs(spec.eigenvalues).min():.4f}")
