"""
Transmission over the (k, g) plane
==================================

Sweeping the Kerr strength alongside the momentum shows two trends: the
pattern is mirror-symmetric in g when the atom is decoupled, and strong
nonlinearity of either sign suppresses transmission.
"""

import math

import numpy as np

from cavarray import Axis, ModelParams, sweep2d, transmission_roots
from _plotting import plt, save

base = ModelParams(omega=2.0, xi=1.0, Omega=3.0)
k_axis = Axis.midpoints("k", 0.0, math.pi, 120)
g_axis = Axis("g", -10.0, 10.0, 121)

fields = {}
for J in (0.0, 1.0, 5.0):
    grid = sweep2d(base.with_(J=J), k_axis, g_axis)
    fields[J] = grid.branch_field("min")
    blank = np.sum(grid.reasons() != "ok")
    print(f"J = {J}: {blank} empty cells out of {grid.reasons().size}")

# mirror symmetry for the free chain
f0 = fields[0.0]
print("J = 0: max |s2(k, g) - s2(k, -g)| =", np.nanmax(np.abs(f0 - f0[:, ::-1])))

# large-g asymptotics: 4 g^2 x^3 ~ 4 sin^2 k, so x ~ (sin^2 k / g^2)^(1/3)
p = base.with_(J=1.0)
for g in (1.0, 10.0, 100.0, 1000.0):
    x = min(rt.s2 for rt in transmission_roots(p.with_(g=g), math.pi / 2))
    print(f"g = {g:7.1f}: min s2 = {x:.5f}, asymptote {(1 / g ** 2) ** (1 / 3):.5f}")

if plt is not None:
    fig, axes = plt.subplots(1, 3, figsize=(13, 4), sharey=True)
    extent = [g_axis.start, g_axis.stop, k_axis.start, k_axis.stop]
    for ax, (J, f) in zip(axes, fields.items()):
        im = ax.imshow(f, origin="lower", aspect="auto", extent=extent, vmin=0, vmax=1)
        ax.set_title(f"J = {J}")
        ax.set_xlabel("g")
    axes[0].set_ylabel("k")
    fig.colorbar(im, ax=axes, label="min-branch |s|^2")
    save(fig, "kg_contour.png")
