"""Stationary nonlinear scattering of a plane wave off the atom-coupled cavity.

Writing the transmission amplitude as s = x + iy, the two real stationary
equations are

    2g|s|^2 y + D y - S x + S = 0
    2g|s|^2 x + D x + S y     = 0,        S = 2 xi sin k,

with D the atomic dispersive term.  Taking x*(first) - y*(second) gives
S (x - |s|^2) = 0, so every root has |s|^2 = x.  With A = 2gx + D the second
equation fixes y = -A x / S and the pair collapses to the scalar equation

    x (2gx + D)^2 = S^2 (1 - x),    x in (0, 1].

For a fixed Kerr shift in the dispersion D is constant and this is a cubic
in x, solved exactly.  In the self-consistent mode D depends on x and the
scalar equation is bracketed on a dense grid and refined by root bisection.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import BandEdge, NotLinear, PoleAtResonance
from .model import (DEFAULT_POLE_EPS, SIGN_CONVENTIONS, ModelParams, check_mode,
                    detuning_coefficient, dispersion_omega_k)

DISPERSION_MODES = ("fixed_intensity", "self_consistent")

# roots of the cubic closer than this in x are reported once
MERGE_TOL = 1e-10
# |Im| / max(1, |root|) below which a companion-matrix root counts as real
REAL_TOL = 1e-7


@dataclass(frozen=True)
class ScatterOptions:
    dispersion_mode: str = "fixed_intensity"
    I0: float = 1.0
    sign_convention: str = "eq9"
    residual_tol: float = 1e-9
    root_scan_points: int = 4000
    pole_eps: float = DEFAULT_POLE_EPS

    def __post_init__(self):
        if self.dispersion_mode not in DISPERSION_MODES:
            raise ValueError(f"dispersion_mode must be one of {DISPERSION_MODES}, "
                             f"got {self.dispersion_mode!r}")
        if self.sign_convention not in SIGN_CONVENTIONS:
            raise ValueError(f"sign_convention must be one of {SIGN_CONVENTIONS}, "
                             f"got {self.sign_convention!r}")
        if not self.I0 >= 0:
            raise ValueError(f"I0 must be non-negative, got {self.I0!r}")
        if not self.residual_tol > 0:
            raise ValueError(f"residual_tol must be positive, got {self.residual_tol!r}")
        if int(self.root_scan_points) != self.root_scan_points or self.root_scan_points < 100:
            raise ValueError("root_scan_points must be an integer >= 100")
        if not self.pole_eps > 0:
            raise ValueError("pole_eps must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ScatterOptions":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise KeyError(f"unknown ScatterOptions key(s): {', '.join(sorted(unknown))}")
        return cls(**d)


@dataclass(frozen=True)
class TransmissionRoot:
    """One solution branch of the stationary scattering problem."""

    k: float
    s: complex
    s2: float
    r: complex
    branch: int
    residual: tuple[float, float]
    valid: bool
    multiplicity: int = 1

    @property
    def x(self) -> float:
        return self.s.real

    @property
    def y(self) -> float:
        return self.s.imag


def _flux(params: ModelParams, k: float) -> float:
    check_mode(k)
    if params.xi == 0:
        raise BandEdge("xi = 0 disconnects the chain")
    return 2.0 * params.xi * math.sin(k)


def _intensity(opts: ScatterOptions, s2: float) -> float:
    return opts.I0 if opts.dispersion_mode == "fixed_intensity" else s2


def residual_eq9(params: ModelParams, k: float, s: complex,
                 opts: ScatterOptions = ScatterOptions()) -> tuple[float, float]:
    """Left-hand sides of the two real stationary equations at ``s``.

    The dispersion is evaluated at I0 (fixed mode) or at |s|^2
    (self-consistent mode).  A pole gives ``(inf, inf)``.
    """
    x, y = float(np.real(s)), float(np.imag(s))
    n2 = x * x + y * y
    S = 2.0 * params.xi * math.sin(k)
    omega_k = dispersion_omega_k(params, k, _intensity(opts, n2))
    try:
        D = detuning_coefficient(params, omega_k, opts.sign_convention, opts.pole_eps)
    except PoleAtResonance:
        return (math.inf, math.inf)
    r1 = 2.0 * params.g * n2 * y + D * y - x * S + S
    r2 = 2.0 * params.g * n2 * x + D * x + y * S
    return (r1, r2)


def _polish(coeffs: np.ndarray, x: float, iters: int = 50) -> float:
    d = np.polyder(coeffs)
    for _ in range(iters):
        fp = np.polyval(d, x)
        if fp == 0:
            break
        step = np.polyval(coeffs, x) / fp
        x_new = x - step
        if not math.isfinite(x_new):
            break
        if abs(x_new - x) <= 4e-16 * max(1.0, abs(x)):
            x = x_new
            break
        x = x_new
    return x


def cubic_coefficients(g: float, D: float, S: float) -> np.ndarray:
    """Coefficients of 4g^2 x^3 + 4gD x^2 + (D^2 + S^2) x - S^2, highest first."""
    return np.array([4.0 * g * g, 4.0 * g * D, D * D + S * S, -S * S])


def _fixed_intensity_candidates(g: float, D: float, S: float) -> list[float]:
    full = cubic_coefficients(g, D, S)
    # leading terms negligible on (0, 1] only produce far-away roots
    scale = np.max(np.abs(full))
    lead = 0
    while lead < 3 and abs(full[lead]) <= 1e-14 * scale:
        lead += 1
    xs = []
    for z in np.roots(full[lead:]):
        if abs(z.imag) <= REAL_TOL * max(1.0, abs(z)):
            xs.append(_polish(full, float(z.real)))
    # y = 0 branch: x = 1 with 2g + D = 0
    if abs(2.0 * g + D) <= 1e-14 * max(1.0, abs(D)):
        xs.append(1.0)
    return xs


def _self_consistent_candidates(params: ModelParams, k: float, S: float,
                                opts: ScatterOptions) -> list[float]:
    base = -2.0 * params.xi * math.cos(k) + params.omega
    sign = 1.0 if opts.sign_convention == "eq9" else -1.0
    J2 = params.J ** 2
    g = params.g

    def f(x):
        delta = base + 2.0 * g * x - params.Omega
        D = sign * J2 / delta if J2 else 0.0 * delta
        return x * (2.0 * g * x + D) ** 2 - S * S * (1.0 - x)

    # split (0, 1] at the detuning pole, if it falls inside
    segments = [(0.0, 1.0)]
    if J2 and g != 0:
        xp = (params.Omega - base) / (2.0 * g)
        if 0.0 <= xp <= 1.0:
            gap = max(opts.pole_eps / (2.0 * abs(g)), 1e-13)
            segments = [(0.0, xp - gap), (xp + gap, 1.0)]
    elif J2 and abs(base - params.Omega) < opts.pole_eps:
        raise PoleAtResonance("detuning pole independent of intensity")

    n = int(opts.root_scan_points)
    xs: list[float] = []
    with np.errstate(divide="ignore", invalid="ignore"):
        for lo, hi in segments:
            if hi <= lo:
                continue
            grid = np.linspace(lo, hi, max(2, int(n * (hi - lo)) + 2))
            vals = f(grid)
            for i in range(len(grid) - 1):
                a, b = vals[i], vals[i + 1]
                if not (np.isfinite(a) and np.isfinite(b)):
                    continue
                if a == 0.0:
                    xs.append(float(grid[i]))
                elif a * b < 0:
                    xs.append(brentq(f, grid[i], grid[i + 1],
                                     xtol=1e-15, rtol=1e-15, maxiter=200))
            if vals[-1] == 0.0:
                xs.append(float(grid[-1]))
        # y = 0 branch at x = 1
        if f(np.float64(1.0)) == 0.0:
            xs.append(1.0)
    return xs


def _merge(xs: list[float]) -> list[tuple[float, int]]:
    out: list[tuple[float, int]] = []
    for x in sorted(xs):
        if out and abs(x - out[-1][0]) <= MERGE_TOL:
            x0, m = out[-1]
            out[-1] = (x0, m + 1)
        else:
            out.append((x, 1))
    return out


def _detuning_at(params, k, x, opts):
    omega_k = dispersion_omega_k(params, k, _intensity(opts, x))
    return detuning_coefficient(params, omega_k, opts.sign_convention, opts.pole_eps)


def _make_root(params, k, x, S, opts, multiplicity=1, D=None) -> TransmissionRoot:
    if D is None:
        D = _detuning_at(params, k, x, opts)
    x = float(x)
    y = -(2.0 * params.g * x + D) * x / S
    s = complex(x, y)
    res = residual_eq9(params, k, s, opts)
    s2 = x * x + y * y
    valid = (x > 0 and s2 <= 1.0 + 1e-12
             and abs(res[0]) <= opts.residual_tol and abs(res[1]) <= opts.residual_tol)
    return TransmissionRoot(k=k, s=s, s2=s2, r=s - 1.0, branch=-1,
                            residual=(float(res[0]), float(res[1])),
                            valid=bool(valid), multiplicity=multiplicity)


def _order(roots: list[TransmissionRoot]) -> list[TransmissionRoot]:
    roots = sorted(roots, key=lambda rt: (rt.s2, rt.s.imag))
    return [TransmissionRoot(**{**rt.__dict__, "branch": i}) for i, rt in enumerate(roots)]


def candidate_roots(params: ModelParams, k: float,
                    opts: ScatterOptions = ScatterOptions()) -> list[TransmissionRoot]:
    """All candidate branches, including those failing the validity checks."""
    S = _flux(params, k)
    if opts.dispersion_mode == "fixed_intensity":
        D = _detuning_at(params, k, opts.I0, opts)
        xs = _fixed_intensity_candidates(params.g, D, S)
        xs = [x for x in xs if 0.0 < x <= 1.0 + 1e-12]
        roots = [_make_root(params, k, min(x, 1.0), S, opts, m, D) for x, m in _merge(xs)]
    else:
        xs = _self_consistent_candidates(params, k, S, opts)
        xs = [x for x in xs if 0.0 < x <= 1.0]
        roots = []
        for x, m in _merge(xs):
            try:
                roots.append(_make_root(params, k, x, S, opts, m))
            except PoleAtResonance:
                continue
    return _order(roots)


def transmission_roots(params: ModelParams, k: float,
                       opts: ScatterOptions = ScatterOptions()) -> list[TransmissionRoot]:
    """Every admissible transmission amplitude at quasi-momentum ``k``.

    Branches are sorted by ascending |s|^2 (ties by Im s) and numbered from 0.
    An empty list means no admissible root.

    Raises
    ------
    BandEdge
        sin k = 0 or xi = 0.
    PoleAtResonance
        Fixed-intensity mode with Omega_k at the atomic frequency.
    """
    return _order([rt for rt in candidate_roots(params, k, opts) if rt.valid])


def transmission_linear(params: ModelParams, k: float,
                        opts: ScatterOptions = ScatterOptions()) -> TransmissionRoot:
    """Closed-form root for g = 0: |s|^2 = S^2 / (S^2 + D^2)."""
    if params.g != 0:
        raise NotLinear(f"closed form requires g = 0, got g = {params.g}")
    S = _flux(params, k)
    D = _detuning_at(params, k, opts.I0, opts)
    den = S * S + D * D
    x = S * S / den
    y = -D * S / den
    s = complex(x, y)
    res = residual_eq9(params, k, s, opts)
    return TransmissionRoot(k=k, s=s, s2=x, r=s - 1.0, branch=0,
                            residual=(float(res[0]), float(res[1])), valid=True)


def reflection_of(root: TransmissionRoot) -> complex:
    """Reflection amplitude r = s - 1 from continuity at the atom site."""
    if not root.valid:
        raise ValueError("reflection_of requires a valid root")
    return root.s - 1.0
