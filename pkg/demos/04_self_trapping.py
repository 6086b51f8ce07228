"""
Kerr self-trapping
==================

With the atomic frequency fixed, increasing the Kerr strength first delays
the moment the two neighbouring cavities reach equal occupation and then
blocks transfer altogether, much like self-trapping of a condensate in a
double well.
"""

from cavarray import (DynOptions, ModelParams, first_sync_time, initial_all_in_site,
                      integrate)
from _plotting import plt, save

M = 15
opts = DynOptions(t_end=20.0, sample_every=10)
runs = {}
for g in (0.5, 2.0, 2.9, 3.0):
    p = ModelParams(omega=2.0, xi=1.0, g=g, Omega=3.0, J=15.0, N=20)
    runs[g] = integrate(initial_all_in_site(-1, M, "excited", p.N), p, opts, M=M)

for g, tr in runs.items():
    sync = first_sync_time(tr, 0.1 * M)
    sync_text = f"{sync:.3f}" if sync is not None else "never"
    print(f"g = {g}: max n_+1 = {tr.n_site(1).max():.3f}, "
          f"first |n_-1 - n_+1| <= {0.1 * M}: t = {sync_text}")

if plt is not None:
    fig, axes = plt.subplots(len(runs), 1, figsize=(8, 10), sharex=True)
    for ax, (g, tr) in zip(axes, runs.items()):
        ax.plot(tr.t, tr.n_site(-1), "b--")
        ax.plot(tr.t, tr.n_site(1), "r-")
        ax.set_ylabel(f"g = {g}")
    axes[-1].set_xlabel("t")
    save(fig, "self_trapping.png")
