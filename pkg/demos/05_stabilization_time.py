"""
How fast does the state lock on?
================================

tau is the first time the bound-mode projection P0 exceeds 1 - 1e-6.  Weak
gain/loss leaves the bound state with only a small rate advantage.  Strong
gain/loss breaks PT symmetry, and the amplifying modes then compete with it.
The fastest stabilization therefore sits in between, near gamma ~ J2.
"""

import numpy as np

from fockssh import ModelParams, NotReached, basis_state, default_cutoff, stabilization_time

base = ModelParams(1.0, 0.2)
gammas = np.round(np.arange(0.04, 0.61, 0.04), 2)
for n_init in (10, 30):
    cutoff = default_cutoff(base.alpha, n_init)
    psi0 = basis_state(n_init, "down", cutoff)
    taus = []
    for g in gammas:
        try:
            taus.append(stabilization_time(psi0, base.with_gamma(g)))
        except NotReached:
            taus.append(np.nan)
    best = gammas[int(np.nanargmin(taus))]
    print(f"|{n_init}, down>: fastest at gamma = {best}")
    for g, tau in zip(gammas, taus):
        print(f"   gamma = {g:4.2f}  tau = {tau:9.3f}")
