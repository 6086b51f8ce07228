"""
Transmission through a single atom-dressed cavity
=================================================

A photon of quasi-momentum k scatters off the central cavity.  Without the
Kerr term the transmission has a closed form with a dip where the photon
energy approaches the atomic transition; with the Kerr term the stationary
equations become a cubic and several branches can coexist.
"""

import math

import numpy as np

from cavarray import Axis, ModelParams, sweep1d, transmission_linear
from _plotting import plt, save

# parameters of the k-spectrum figures; only g changes between panels
base = ModelParams(omega=2.0, xi=1.0, Omega=3.0, J=1.0)
k_axis = Axis.midpoints("k", 0.0, math.pi, 500)

# linear chain: every k has exactly one root, equal to the closed form
lin = sweep1d(base, k_axis)
closed = np.array([transmission_linear(base, k).s2 for k in k_axis.values()])
print("g = 0: max deviation from closed form",
      np.max(np.abs(lin.branch_field("max") - closed)))
print("       transmission at k = pi/2:", transmission_linear(base, math.pi / 2).s2)

# Kerr chain: count how many k carry more than one branch
grids = {}
for g in (0.0, 0.1, -0.5, 0.5, -1.0, 1.0):
    grids[g] = sweep1d(base.with_(g=g), k_axis)
    multi = sum(len(c.roots) > 1 for c in grids[g].cells)
    print(f"g = {g:+.1f}: {multi} of {k_axis.steps} k-points have several branches")

if plt is not None:
    fig, axes = plt.subplots(2, 3, figsize=(11, 6), sharex=True, sharey=True)
    for ax, (g, grid) in zip(axes.flat, grids.items()):
        for c in grid.cells:
            ax.plot([c.coords["k"]] * len(c.roots), c.s2, ".", ms=2, color="C0")
        ax.set_title(f"g = {g}")
    for ax in axes[-1]:
        ax.set_xlabel("k")
    for ax in axes[:, 0]:
        ax.set_ylabel("|s|^2")
    save(fig, "transmission_spectrum.png")
