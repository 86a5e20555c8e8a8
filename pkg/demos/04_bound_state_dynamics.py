"""
Bound-state attraction in Fock space
====================================

Every initial state with a spin-down overlap on the displaced vacuum flows to
|alpha, down>, because that mode grows like exp(gamma t) and all others grow
more slowly.  Here |50, down> (mean photon number 50) relaxes to a coherent
state with <n> = alpha^2 = 25 and no spin-boson entanglement.  The
closed-form propagation is checked against brute-force matrix exponentials.
"""

import numpy as np

from fockssh import (
    ModelParams,
    analytic_nh_spectrum,
    basis_state,
    bound_probability,
    build_hamiltonian,
    default_cutoff,
    evolve_analytic,
    evolve_oracle,
    expand_initial_state,
    fock_observables,
)

params = ModelParams(1.0, 0.2, gamma=0.15)
cutoff = default_cutoff(params.alpha, 50)
psi0 = basis_state(50, "down", cutoff)
eig = analytic_nh_spectrum(params, None, cutoff)
coeffs = expand_initial_state(psi0, eig)
print(f"cutoff n_max = {cutoff.n_max}, bound-state weight |c0|^2 = {abs(coeffs.c0) ** 2:.3e}")

times = np.array([0.0, 20.0, 50.0, 100.0, 150.0, 200.0])
series = evolve_analytic(coeffs, eig, times)
p0 = bound_probability(coeffs, eig, times)
for t, row, p in zip(times, series.renormalized(), p0):
    _, mean_n, s = fock_observables(row)
    print(f"t = {t:6.1f}   <n> = {mean_n:8.4f}   S = {s:.4f}   P0 = {p:.6f}")

# the same trajectory from exp(-i H t) on the truncated matrix
oracle = evolve_oracle(psi0, build_hamiltonian(params, cutoff, "balanced_nh"), times[:4])
print("max deviation from the dense propagator:",
      np.abs(oracle.renormalized() - series.renormalized()[:4]).max())
