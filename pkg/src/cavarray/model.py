"""Model parameters and the lattice dispersion relation.

Units: hbar = 1, every frequency and coupling shares one energy unit.
Sites run from -N to N; the atom sits in cavity 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace

from .errors import BandEdge, PoleAtResonance

SIGN_CONVENTIONS = ("eq8", "eq9")
DEFAULT_POLE_EPS = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the atom + cavity-array system.

    Attributes
    ----------
    omega : float
        Cavity resonance frequency.
    xi : float
        Inter-cavity hopping amplitude.
    g : float
        Kerr coupling.
    Omega : float
        Atomic transition frequency.
    J : float
        Effective atom-field coupling used by the scattering solver.
    J0 : float
        Bare atom-field coupling used by the dynamics and the fluctuation matrix.
    sigma_z_bg : float
        Background atomic inversion, in [-1, 1].
    N : int
        Half length of the array.
    """

    omega: float = 2.0
    xi: float = 1.0
    g: float = 0.0
    Omega: float = 3.0
    J: float = 1.0
    J0: float | None = None
    sigma_z_bg: float = 1.0
    N: int = 20

    def __post_init__(self):
        if self.J0 is None:
            object.__setattr__(self, "J0", self.J)
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise TypeError(f"{f.name} must be a number, got {v!r}")
            if not math.isfinite(v):
                raise ValueError(f"{f.name} must be finite, got {v!r}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be an integer >= 1, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        if abs(self.sigma_z_bg) > 1:
            raise ValueError(f"sigma_z_bg must lie in [-1, 1], got {self.sigma_z_bg}")

    @property
    def n_sites(self) -> int:
        return 2 * self.N + 1

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise KeyError(f"unknown ModelParams key(s): {', '.join(sorted(unknown))}")
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "ModelParams":
        return cls.from_dict(json.loads(text))


def check_mode(k: float) -> float:
    """Raise BandEdge when the plane wave at ``k`` carries no flux."""
    if abs(math.sin(k)) < 1e-14:
        raise BandEdge(f"sin(k) = 0 at k = {k!r}: band-edge state carries no flux")
    return k


def effective_coupling(J0: float, sigma_z: float) -> float:
    """J = J0 * sqrt(<sigma_z>), defined only for a non-negative inversion."""
    if sigma_z < 0:
        raise ValueError(f"effective coupling undefined for sigma_z = {sigma_z} < 0")
    return J0 * math.sqrt(sigma_z)


def dispersion_omega_k(params: ModelParams, k: float, intensity: float) -> float:
    """Plane-wave energy including the Kerr shift, -2 xi cos k + omega + 2 g I."""
    return -2.0 * params.xi * math.cos(k) + params.omega + 2.0 * params.g * intensity


def detuning_coefficient(params: ModelParams, omega_k: float,
                         sign_convention: str = "eq9",
                         eps: float = DEFAULT_POLE_EPS) -> float:
    """Atomic dispersive term D.

    ``eq9`` gives J^2 / (Omega_k - Omega); ``eq8`` gives J^2 / (Omega - Omega_k).
    """
    if sign_convention not in SIGN_CONVENTIONS:
        raise ValueError(f"unknown sign convention {sign_convention!r}")
    if params.J == 0:
        return 0.0
    delta = omega_k - params.Omega
    if abs(delta) < eps:
        raise PoleAtResonance(
            f"|Omega_k - Omega| = {abs(delta):.3g} below {eps:g} (atomic resonance)")
    d = params.J ** 2 / delta
    return d if sign_convention == "eq9" else -d
