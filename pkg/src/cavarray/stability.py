"""Linear fluctuations around a stationary background.

Fluctuation vector ordering:
(da_{-N}, da_{-N}^+, ..., da_N, da_N^+, d sigma_-, d sigma_z, d sigma_+).

The da^+ rows are the negated complex conjugates of the da rows, with the
roles of da and da^+ swapped (at the atom site the J0 d sigma_- source
becomes -J0 d sigma_+).  The three atomic rows are taken as printed for the
linearised Heisenberg equations, with alpha_0 and <sigma_{+,-,z}> frozen at
their background values.  Fluctuations evolve as exp(-i lambda t), so any
eigenvalue with a nonzero imaginary part signals a growing mode.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .dynamics import FieldState
from .errors import DimensionMismatch, EigenFailure, PoleAtResonance
from .model import ModelParams, dispersion_omega_k
from .scattering import ScatterOptions, TransmissionRoot, _intensity

DEFAULT_TOL = 1e-8


@dataclass
class FluctuationMatrix:
    entries: np.ndarray
    N: int

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def field_block(self) -> np.ndarray:
        n = 2 * (2 * self.N + 1)
        return self.entries[:n, :n]


@dataclass
class StabilityReport:
    eigenvalues: np.ndarray
    max_im: float
    stable: bool
    tolerance: float = DEFAULT_TOL

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def to_dict(self) -> dict:
        ev = sorted(self.eigenvalues, key=lambda z: (z.real, z.imag))
        return {"dim": self.dim, "max_im": self.max_im, "stable": self.stable,
                "eigenvalues": [[float(z.real), float(z.imag)] for z in ev]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict, tolerance: float = DEFAULT_TOL) -> "StabilityReport":
        ev = np.array([complex(re, im) for re, im in d["eigenvalues"]])
        if len(ev) != d["dim"]:
            raise DimensionMismatch(f"dim {d['dim']} but {len(ev)} eigenvalues")
        return cls(ev, float(d["max_im"]), bool(d["stable"]), tolerance)

    @classmethod
    def from_json(cls, text: str, tolerance: float = DEFAULT_TOL) -> "StabilityReport":
        return cls.from_dict(json.loads(text), tolerance)

    def __eq__(self, other):
        if not isinstance(other, StabilityReport):
            return NotImplemented
        return (self.to_dict() == other.to_dict())


def fluctuation_dim(N: int) -> int:
    return 2 * (2 * N + 1) + 3


def stationary_background(params: ModelParams, k: float, root: TransmissionRoot,
                          opts: ScatterOptions = ScatterOptions()) -> FieldState:
    """Field configuration of a scattering solution plus the locked atomic coherence.

    Left of the atom alpha_j = e^{ikj} + r e^{-ikj}, right of it s e^{ikj},
    alpha_0 = s; sz is the background inversion and
    sm = J0 alpha_0 sz / (Omega - Omega_k).
    """
    if not root.valid:
        raise ValueError("stationary_background requires a valid root")
    N = params.N
    j = np.arange(-N, N + 1)
    s, r = root.s, root.s - 1.0
    alphas = np.where(j < 0, np.exp(1j * k * j) + r * np.exp(-1j * k * j),
                      s * np.exp(1j * k * j))
    alphas[N] = s
    sz = params.sigma_z_bg
    if params.J0 == 0:
        sm = 0.0j
    else:
        omega_k = dispersion_omega_k(params, k, _intensity(opts, root.s2))
        delta = params.Omega - omega_k
        if abs(delta) < opts.pole_eps:
            raise PoleAtResonance(f"|Omega - Omega_k| = {abs(delta):.3g} at the background")
        sm = params.J0 * s * sz / delta
    return FieldState(alphas, complex(sm), float(sz))


def build_heff(background: FieldState, params: ModelParams) -> FluctuationMatrix:
    """Dense generator of the linearised fluctuation dynamics."""
    N = params.N
    if len(background.alphas) != 2 * N + 1:
        raise DimensionMismatch(
            f"background has {len(background.alphas)} sites, params expect {2 * N + 1}")
    n = 2 * N + 1
    dim = fluctuation_dim(N)
    H = np.zeros((dim, dim), dtype=complex)
    a = background.alphas
    g, xi, J0 = params.g, params.xi, params.J0
    ism, isz, isp = 2 * n, 2 * n + 1, 2 * n + 2

    for idx in range(n):
        p, m = 2 * idx, 2 * idx + 1
        diag = params.omega + 4.0 * g * abs(a[idx]) ** 2
        anom = 2.0 * g * a[idx] ** 2
        H[p, p] = diag
        H[p, m] = anom
        H[m, m] = -diag
        H[m, p] = -np.conj(anom)
        for nb in (idx - 1, idx + 1):
            if 0 <= nb < n:
                H[p, 2 * nb] = -xi
                H[m, 2 * nb + 1] = xi

    a0 = a[N]
    sm, sz, sp = background.sm, background.sz, background.sp_value
    p0, m0 = 2 * N, 2 * N + 1
    H[p0, ism] += J0
    H[m0, isp] += -J0

    H[ism, ism] = params.Omega
    H[ism, isz] = -J0 * a0
    H[ism, p0] = -J0 * sz

    H[isz, m0] = -2.0 * J0 * sm
    H[isz, isp] = 2.0 * J0 * a0
    H[isz, ism] = -2.0 * J0 * np.conj(a0)
    H[isz, p0] = 2.0 * J0 * sp

    H[isp, isp] = -params.Omega
    H[isp, isz] = J0 * np.conj(a0)
    H[isp, m0] = J0 * sz
    return FluctuationMatrix(H, N)


def stability_spectrum(m: FluctuationMatrix | np.ndarray,
                       tolerance: float = DEFAULT_TOL) -> StabilityReport:
    """Eigenvalues of the fluctuation generator and the stability verdict."""
    H = m.entries if isinstance(m, FluctuationMatrix) else np.asarray(m)
    if not np.isfinite(H).all():
        raise ValueError("fluctuation matrix has non-finite entries")
    try:
        ev = scipy.linalg.eigvals(H)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    if not np.isfinite(ev).all():
        raise EigenFailure("eigensolver returned non-finite eigenvalues")
    max_im = float(np.max(np.abs(ev.imag))) if len(ev) else 0.0
    return StabilityReport(ev, max_im, max_im <= tolerance, tolerance)


def open_chain_energies(params: ModelParams) -> np.ndarray:
    """omega - 2 xi cos q on the open chain, q = pi m / (2N + 2)."""
    n = 2 * params.N + 1
    q = math.pi * np.arange(1, n + 1) / (n + 1)
    return params.omega - 2.0 * params.xi * np.cos(q)


def root_stability(params: ModelParams, k: float, root: TransmissionRoot,
                   opts: ScatterOptions = ScatterOptions(),
                   tolerance: float = DEFAULT_TOL) -> StabilityReport:
    bg = stationary_background(params, k, root, opts)
    return stability_spectrum(build_heff(bg, params), tolerance)
