"""
Which stationary branches survive small fluctuations?
=====================================================

Each scattering root defines a stationary field plus a locked atomic
coherence.  Linearising around it gives a non-Hermitian generator; a
complex eigenvalue means a fluctuation grows.
"""

import math

from cavarray import (Axis, ModelParams, build_heff, open_chain_energies, stability_spectrum,
                      sweep1d, transmission_roots, root_stability, vacuum_state)

# sanity check: around the vacuum the spectrum is the open-chain band, mirrored
p0 = ModelParams(omega=2.0, xi=1.0, J=0.0, N=5)
rep = stability_spectrum(build_heff(vacuum_state(5), p0))
band = open_chain_energies(p0)
print("vacuum spectrum real:", rep.stable, " band edges:", band.min(), band.max())

# decoupled atom: the sign of the Kerr term decides.  Plane waves of a
# defocusing chain are stable, those of a focusing chain are modulationally unstable
k_axis = Axis.midpoints("k", 0.0, math.pi, 60)
for g in (1.0, -1.0):
    grid = sweep1d(ModelParams(omega=2.0, xi=1.0, g=g, J=0.0, N=20), k_axis, stability=True)
    flags = [r.stable for c in grid.cells for r in c.stability]
    print(f"J = 0, g = {g:+.0f}: {sum(flags)} of {len(flags)} branches stable")

# coupled atom: an inverted atom (sigma_z = +1) is a gain medium and destabilises
# every branch; with the atom in its ground state part of the band survives
for sz in (1.0, -1.0):
    p = ModelParams(omega=2.0, xi=1.0, g=0.0, Omega=3.0, J=1.0, N=20, sigma_z_bg=sz)
    grid = sweep1d(p, k_axis, stability=True)
    flags = [r.stable for c in grid.cells for r in c.stability]
    print(f"J = 1, g = 0, sigma_z = {sz:+.0f}: {sum(flags)} of {len(flags)} branches stable")

# per-branch report at one momentum of the Kerr chain
p = ModelParams(omega=2.0, xi=1.0, g=1.0, Omega=3.0, J=1.0, N=20, sigma_z_bg=-1.0)
k = 0.4
for rt in transmission_roots(p, k):
    r = root_stability(p, k, rt)
    print(f"k = {k}, branch {rt.branch}: s2 = {rt.s2:.4f}, max|Im| = {r.max_im:.2e}")
