"""
Photon transfer across the atom at different detunings
======================================================

All photons start in cavity -1 with the atom excited.  The mean-field
equations are integrated in the photon-number rescaled picture, and the
first burst of population arriving in cavity +1 is compared for three
atomic frequencies.
"""

from cavarray import DynOptions, ModelParams, first_local_max, initial_all_in_site, integrate
from _plotting import plt, save

M = 15
opts = DynOptions(method="rk4_fixed", dt=1e-3, t_end=20.0, sample_every=10)
runs = {}
for Omega in (2.0, 3.0, 5.0):
    p = ModelParams(omega=2.0, xi=1.0, g=2.0, Omega=Omega, J=15.0, N=20)
    runs[Omega] = integrate(initial_all_in_site(-1, M, "excited", p.N), p, opts, M=M)

for Omega, tr in runs.items():
    i, peak = first_local_max(tr.n_site(1))
    print(f"Omega = {Omega}: first n_+1 peak {peak:.3f} at t = {tr.t[i]:.3f}; "
          f"drift Q {tr.metadata['Q_drift']:.1e}, L {tr.metadata['L_drift']:.1e}")

if plt is not None:
    fig, axes = plt.subplots(3, 1, figsize=(8, 8), sharex=True)
    for ax, (Omega, tr) in zip(axes, runs.items()):
        ax.plot(tr.t, tr.n_site(-1), "b--", label="n_-1")
        ax.plot(tr.t, tr.n_site(1), "r-", label="n_+1")
        ax.set_ylabel(f"Omega = {Omega}")
    axes[0].legend()
    axes[-1].set_xlabel("t")
    save(fig, "detuning_dynamics.png")
