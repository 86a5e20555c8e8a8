"""
Balanced gain and loss: PT-symmetric and PT-broken blocks
=========================================================

Adding -i gamma sz gives gain on spin up and loss on spin down.  After the
displacement, each two-level block n has eigenvalues
+-sqrt(J2^2 (n+1) - gamma^2).  They are real while J2 sqrt(n+1) > gamma and
imaginary below that, and block n is at an exceptional point (EP) when the
two are equal.  The displaced vacuum stays an exact eigenstate with
eigenvalue +i gamma, so it outgrows every other mode.
"""

import numpy as np

from fockssh import FockCutoff, ModelParams, analytic_nh_spectrum, classify_pt_phase, eigenstate_entropy
from fockssh.nonhermitian import block_eigenvalues

base = ModelParams(1.0, 0.2)
for gamma in (0.15, 0.4, 0.5):
    params = base.with_gamma(gamma)
    phase, eps = classify_pt_phase(params)
    e = block_eigenvalues(params, np.arange(8))
    print(f"gamma = {gamma}: phase {phase.value}, EP blocks {eps}")
    print("   E_+(n<8) =", np.round(e, 4))

# the eigensystem is biorthonormal: <L_i|R_j> = delta_ij
eig = analytic_nh_spectrum(base.with_gamma(0.5), 20, FockCutoff(256))
R, L = eig.right_vectors(), eig.left_vectors()
print("biorthonormality error:", np.abs(L.conj().T @ R - np.eye(R.shape[1])).max())

# spin-boson entanglement of an eigenvector: maximal (1 bit) below the EP of
# its block and decaying beyond it
for gamma in (0.1, 0.19, 0.21, 0.5, 2.0):
    s = eigenstate_entropy(base.with_gamma(gamma), 0, 1)
    print(f"S/ln2 of block 0 at gamma = {gamma}: {s:.4f}")
