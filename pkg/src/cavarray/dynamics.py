"""Mean-field dynamics of the cavity array and the central two-level atom.

Equations of motion (hbar = 1), sites j = -N..N with hard walls beyond +-N:

    i d(alpha_j)/dt = omega alpha_j - xi (alpha_{j+1} + alpha_{j-1})
                      + 2 g |alpha_j|^2 alpha_j  [+ J0 <sigma_-> at j = 0]
    i d<sigma_->/dt = Omega <sigma_-> - J0 alpha_0 <sigma_z>
    i d<sigma_z>/dt = -2 J0 alpha_0^* <sigma_-> + 2 J0 alpha_0 <sigma_+>
    i d<sigma_+>/dt = -Omega <sigma_+> + J0 alpha_0^* <sigma_z>

The last line is the conjugate of the <sigma_-> line.  ``verbatim_eq4`` mode
uses alpha_0 instead of alpha_0^* there and evolves <sigma_+> independently;
only the conjugate-consistent form conserves the total excitation and the
Bloch length.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import RK45

from .errors import NonFinite, SiteOutOfRange, StepUnderflow
from .model import ModelParams

CONVENTIONS = ("conjugate_consistent", "verbatim_eq4")
METHODS = ("rk4_fixed", "rk45_adaptive")


@dataclass
class FieldState:
    """Cavity amplitudes alpha_{-N..N} and atomic expectation values.

    ``sp`` is only stored in verbatim mode; otherwise it is conj(sm).
    ``sz`` is real except in verbatim mode, where it may pick up an
    imaginary part.
    """

    alphas: np.ndarray
    sm: complex = 0.0j
    sz: complex | float = 1.0
    sp: complex | None = None
    t: float = 0.0

    def __post_init__(self):
        self.alphas = np.asarray(self.alphas, dtype=complex)
        if self.alphas.ndim != 1 or len(self.alphas) % 2 != 1:
            raise ValueError("alphas must be a 1-D array of odd length 2N+1")

    @property
    def N(self) -> int:
        return (len(self.alphas) - 1) // 2

    @property
    def sp_value(self) -> complex:
        return np.conj(self.sm) if self.sp is None else self.sp

    def alpha(self, j: int) -> complex:
        return self.alphas[j + self.N]

    def pack(self) -> np.ndarray:
        return np.concatenate([self.alphas, [self.sm, self.sz, self.sp_value]]).astype(complex)

    @classmethod
    def unpack(cls, y: np.ndarray, t: float = 0.0, convention: str = "conjugate_consistent"):
        n = len(y) - 3
        if convention == "conjugate_consistent":
            return cls(y[:n].copy(), complex(y[n]), float(y[n + 1].real), None, t)
        return cls(y[:n].copy(), complex(y[n]), complex(y[n + 1]), complex(y[n + 2]), t)


@dataclass(frozen=True)
class DynOptions:
    convention: str = "conjugate_consistent"
    method: str = "rk4_fixed"
    dt: float = 1e-3
    t_end: float = 20.0
    sample_every: int = 10
    boundary: str = "open"

    def __post_init__(self):
        if self.convention not in CONVENTIONS:
            raise ValueError(f"convention must be one of {CONVENTIONS}, got {self.convention!r}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end!r}")
        if int(self.sample_every) != self.sample_every or self.sample_every < 1:
            raise ValueError("sample_every must be a positive integer")
        if self.boundary != "open":
            raise ValueError(f"only open boundaries are supported, got {self.boundary!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "DynOptions":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise KeyError(f"unknown DynOptions key(s): {', '.join(sorted(unknown))}")
        return cls(**d)


def _rhs(y: np.ndarray, params: ModelParams, conjugate: bool) -> np.ndarray:
    n = len(y) - 3
    N = n // 2
    a = y[:n]
    sm, sz, sp = y[n], y[n + 1], y[n + 2]
    a0 = a[N]
    J0 = params.J0

    h = (params.omega + 2.0 * params.g * (a.real ** 2 + a.imag ** 2)) * a
    h[:-1] -= params.xi * a[1:]
    h[1:] -= params.xi * a[:-1]
    h[N] += J0 * sm

    out = np.empty_like(y)
    out[:n] = -1j * h
    dsm = -1j * (params.Omega * sm - J0 * a0 * sz)
    out[n] = dsm
    if conjugate:
        out[n + 1] = -4.0 * J0 * (a0.conjugate() * sm).imag
        out[n + 2] = dsm.conjugate()
    else:
        out[n + 1] = -1j * (-2.0 * J0 * a0.conjugate() * sm + 2.0 * J0 * a0 * sp)
        out[n + 2] = -1j * (-params.Omega * sp + J0 * a0 * sz)
    return out


def derivative(state: FieldState, params: ModelParams,
               convention: str = "conjugate_consistent") -> FieldState:
    """Time derivative of ``state``, returned as a FieldState of rates."""
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    conj = convention == "conjugate_consistent"
    d = _rhs(state.pack(), params, conj)
    n = len(state.alphas)
    if conj:
        return FieldState(d[:n], complex(d[n]), float(d[n + 1].real), None, state.t)
    return FieldState(d[:n], complex(d[n]), complex(d[n + 1]), complex(d[n + 2]), state.t)


def rescale_params(params: ModelParams, M: float) -> ModelParams:
    """Rescale to unit total photon number: g -> M g, J0 -> J0 / sqrt(M)."""
    if M < 1:
        raise ValueError(f"photon count M must be >= 1, got {M}")
    return params.with_(g=params.g * M, J0=params.J0 / math.sqrt(M))


def initial_all_in_site(site: int, M: float, atom: str, N: int) -> FieldState:
    """All M photons in one cavity (rescaled amplitude 1) and the atom excited or ground."""
    if not -N <= site <= N:
        raise SiteOutOfRange(f"site {site} outside -{N}..{N}")
    if M < 1:
        raise ValueError(f"photon count M must be >= 1, got {M}")
    if atom not in ("excited", "ground"):
        raise ValueError(f"atom must be 'excited' or 'ground', got {atom!r}")
    alphas = np.zeros(2 * N + 1, dtype=complex)
    alphas[site + N] = 1.0
    return FieldState(alphas, 0.0j, 1.0 if atom == "excited" else -1.0)


def vacuum_state(N: int, atom: str = "ground") -> FieldState:
    return FieldState(np.zeros(2 * N + 1, dtype=complex), 0.0j,
                      1.0 if atom == "excited" else -1.0)


def observables(state: FieldState, M: float = 1.0) -> dict:
    """Photon numbers n_j = M |alpha_j|^2, total excitation Q and Bloch length L."""
    p = np.abs(state.alphas) ** 2
    sz = state.sz
    Q = float(p.sum() + (np.real(sz) + 1.0) / 2.0)
    L = float(np.real(sz * sz + 4.0 * state.sp_value * state.sm))
    return {"n": M * p, "Q": Q, "L": L}


@dataclass
class Trajectory:
    """Sampled solution.  Arrays are indexed by sample along axis 0."""

    t: np.ndarray
    alphas: np.ndarray
    sm: np.ndarray
    sz: np.ndarray
    sp: np.ndarray | None
    M: float = 1.0
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    @property
    def N(self) -> int:
        return (self.alphas.shape[1] - 1) // 2

    @property
    def n(self) -> np.ndarray:
        """Photon numbers, shape (samples, 2N+1)."""
        return self.M * np.abs(self.alphas) ** 2

    def n_site(self, j: int) -> np.ndarray:
        return self.M * np.abs(self.alphas[:, j + self.N]) ** 2

    @property
    def Q(self) -> np.ndarray:
        return (np.abs(self.alphas) ** 2).sum(axis=1) + (np.real(self.sz) + 1.0) / 2.0

    @property
    def L(self) -> np.ndarray:
        sp = np.conj(self.sm) if self.sp is None else self.sp
        return np.real(self.sz * self.sz + 4.0 * sp * self.sm)

    @property
    def samples(self) -> list[FieldState]:
        return [FieldState(self.alphas[i], complex(self.sm[i]), self.sz[i],
                           None if self.sp is None else complex(self.sp[i]), float(self.t[i]))
                for i in range(len(self.t))]

    @property
    def observables(self) -> list[dict]:
        n, Q, L = self.n, self.Q, self.L
        return [{"n": n[i], "Q": float(Q[i]), "L": float(L[i])} for i in range(len(self.t))]


def _build_trajectory(ts, ys, conj, M, extra) -> Trajectory:
    ys = np.asarray(ys)
    n = ys.shape[1] - 3
    traj = Trajectory(
        t=np.asarray(ts, dtype=float),
        alphas=ys[:, :n].copy(),
        sm=ys[:, n].copy(),
        sz=ys[:, n + 1].real.copy() if conj else ys[:, n + 1].copy(),
        sp=None if conj else ys[:, n + 2].copy(),
        M=M,
    )
    if len(traj.t):
        Q, L = traj.Q, traj.L
        traj.metadata.update(Q_drift=float(np.max(np.abs(Q - Q[0]))),
                             L_drift=float(np.max(np.abs(L - L[0]))))
    traj.metadata.update(extra)
    return traj


def integrate(initial: FieldState, params: ModelParams,
              opts: DynOptions = DynOptions(), M: float = 1.0) -> Trajectory:
    """Integrate from t = 0 to ``opts.t_end``.

    Samples are taken at t = 0, every ``sample_every`` steps and at the final
    step.  Conservation drift of Q and L is stored in ``metadata``.

    Raises
    ------
    NonFinite
        The state left the finite domain; ``err.partial`` holds the samples
        recorded so far.
    StepUnderflow
        The adaptive stepper failed to meet its tolerance.
    """
    if len(initial.alphas) != params.n_sites:
        raise ValueError(f"state has {len(initial.alphas)} sites, params expect {params.n_sites}")
    conj = opts.convention == "conjugate_consistent"
    y = initial.pack()
    if conj:
        y[-1] = np.conj(y[-3])
        y[-2] = y[-2].real
    meta = {"method": opts.method, "convention": opts.convention}
    ts, ys = [0.0], [y.copy()]

    def fail(t):
        partial = _build_trajectory(ts, ys, conj, M, meta)
        return NonFinite(f"non-finite state at t = {t:.6g}", partial)

    # overflow surfaces as NonFinite below
    with np.errstate(over="ignore", invalid="ignore"):
        if opts.method == "rk4_fixed":
            n_steps = max(1, int(math.ceil(opts.t_end / opts.dt - 1e-9)))
            h = opts.t_end / n_steps
            f = _rhs
            for i in range(1, n_steps + 1):
                k1 = f(y, params, conj)
                k2 = f(y + 0.5 * h * k1, params, conj)
                k3 = f(y + 0.5 * h * k2, params, conj)
                k4 = f(y + h * k3, params, conj)
                y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                if not np.isfinite(y).all():
                    raise fail(i * h)
                if i % opts.sample_every == 0 or i == n_steps:
                    ts.append(i * h)
                    ys.append(y.copy())
            meta["steps"] = n_steps
            meta["dt"] = h
        else:
            solver = RK45(lambda t, v: _rhs(v, params, conj), 0.0, y, opts.t_end,
                          rtol=opts.dt, atol=opts.dt)
            steps = 0
            while solver.status == "running":
                msg = solver.step()
                if solver.status == "failed":
                    raise StepUnderflow(f"adaptive stepper failed at t = {solver.t:.6g}: {msg}")
                steps += 1
                if not np.isfinite(solver.y).all():
                    raise fail(solver.t)
                if steps % opts.sample_every == 0 or solver.status == "finished":
                    ts.append(float(solver.t))
                    ys.append(solver.y.copy())
            meta["steps"] = steps
    return _build_trajectory(ts, ys, conj, M, meta)


def first_local_max(values: np.ndarray) -> tuple[int, float] | None:
    """Index and value of the first interior local maximum, or None."""
    v = np.asarray(values)
    for i in range(1, len(v) - 1):
        if v[i] > v[i - 1] and v[i] >= v[i + 1]:
            return i, float(v[i])
    return None


def first_sync_time(traj: Trajectory, threshold: float, left: int = -1,
                    right: int = 1) -> float | None:
    """First sample time with |n_left - n_right| <= threshold, or None."""
    d = np.abs(traj.n_site(left) - traj.n_site(right))
    hit = np.nonzero(d <= threshold)[0]
    return float(traj.t[hit[0]]) if len(hit) else None
