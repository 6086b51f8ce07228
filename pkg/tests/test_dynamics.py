import math

import numpy as np
import pytest
import scipy.linalg

from cavarray import (DynOptions, FieldState, ModelParams, NonFinite, SiteOutOfRange,
                      StepUnderflow, derivative, initial_all_in_site, integrate, observables,
                      rescale_params, vacuum_state)
from cavarray.dynamics import first_local_max, first_sync_time


def hopping_matrix(params):
    n = params.n_sites
    return (params.omega * np.eye(n)
            - params.xi * (np.eye(n, k=1) + np.eye(n, k=-1)))


def random_field(N, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=2 * N + 1) + 1j * rng.normal(size=2 * N + 1)
    return a / np.linalg.norm(a)


class TestDerivative:
    def test_vacuum_with_excited_atom_is_fixed_point(self):
        d = derivative(vacuum_state(4, "excited"), ModelParams(N=4, g=1.3, J=2.0))
        assert np.all(d.alphas == 0)
        assert d.sm == 0 and d.sz == 0

    def test_single_site_hopping(self):
        p = ModelParams(omega=2, xi=1, g=0, J=0, N=6)
        a = np.zeros(13, complex)
        a[5 + 6] = 1.0
        d = derivative(FieldState(a, 0j, 1.0), p)
        expected = np.zeros(13, complex)
        expected[5 + 6] = -2j
        expected[4 + 6] = 1j
        expected[6 + 6] = 1j
        assert d.alphas == pytest.approx(expected, abs=1e-15)

    def test_atomic_coherence_source(self):
        p = ModelParams(J=2.0, Omega=3.0, N=2)
        a = np.zeros(5, complex)
        a[2] = 1.0
        d = derivative(FieldState(a, 0j, 1.0), p)
        assert d.sm == pytest.approx(2j, abs=1e-15)

    def test_conventions_differ_only_in_sigma_plus(self):
        p = ModelParams(J=1.5, Omega=3.0, N=2, g=0.4)
        a = np.array([0.1, 0.2j, 1j, 0.3, -0.2], complex)
        sm = 0.3 - 0.1j
        st_c = FieldState(a, sm, 0.5)
        st_v = FieldState(a, sm, 0.5, np.conj(sm))
        dc = derivative(st_c, p, "conjugate_consistent")
        dv = derivative(st_v, p, "verbatim_eq4")
        assert dc.alphas == pytest.approx(dv.alphas)
        assert dc.sm == pytest.approx(dv.sm)
        assert dc.sz == pytest.approx(dv.sz)
        # printed sigma_+ line: i d sp/dt = -Omega sp + J0 alpha_0 sz
        assert dv.sp == pytest.approx(-1j * (-3.0 * np.conj(sm) + 1.5 * 1j * 0.5))
        assert dc.sp_value == pytest.approx(np.conj(dc.sm))


class TestHelpers:
    def test_rescale(self):
        r = rescale_params(ModelParams(g=0.2, J=4.0), 15)
        assert r.g == pytest.approx(3.0)
        assert r.J0 == pytest.approx(4 / math.sqrt(15))
        p = ModelParams(g=0.3, J=1.2)
        assert rescale_params(p, 1) == p
        assert rescale_params(ModelParams(g=2 / 15), 15).g == pytest.approx(2.0)
        with pytest.raises(ValueError):
            rescale_params(p, 0.5)

    def test_initial_states(self):
        s = initial_all_in_site(-1, 15, "excited", 20)
        assert s.alpha(-1) == 1 and np.sum(np.abs(s.alphas) ** 2) == 1
        assert s.sz == 1 and s.sm == 0
        obs = observables(s, 15)
        assert obs["n"][-1 + 20] == 15
        assert obs["Q"] == 2 and obs["L"] == 1
        s = initial_all_in_site(0, 1, "ground", 1)
        assert s.alpha(0) == 1 and s.sz == -1
        with pytest.raises(SiteOutOfRange):
            initial_all_in_site(5, 1, "excited", 3)

    def test_vacuum_ground_observables(self):
        obs = observables(vacuum_state(3, "ground"), 10)
        assert np.all(obs["n"] == 0)
        assert obs["Q"] == 0 and obs["L"] == 1

    def test_options_validation(self):
        with pytest.raises(ValueError):
            DynOptions(dt=0)
        with pytest.raises(ValueError):
            DynOptions(t_end=-1)
        with pytest.raises(ValueError):
            DynOptions(method="euler")

    def test_first_local_max(self):
        assert first_local_max(np.array([0, 1, 3, 2, 5])) == (2, 3.0)
        assert first_local_max(np.array([0, 1, 2])) is None


class TestIntegrate:
    def test_vacuum_constant(self):
        p = ModelParams(g=2.0, J=3.0, Omega=2.5, N=5)
        tr = integrate(vacuum_state(5, "ground"), p, DynOptions(t_end=2.0, sample_every=100))
        assert np.all(tr.alphas == 0)
        assert np.all(tr.sz == -1) and np.all(tr.sm == 0)

    def test_samples_increasing(self, transfer_params):
        tr = integrate(initial_all_in_site(-1, 15, "excited", 20), transfer_params,
                       DynOptions(t_end=0.55, sample_every=100))
        assert np.all(np.diff(tr.t) > 0)
        assert tr.t[0] == 0 and tr.t[-1] == pytest.approx(0.55)
        assert len(tr.samples) == len(tr.t) == len(tr.observables)

    def test_linear_matches_matrix_exponential(self):
        p = ModelParams(omega=2, xi=1, g=0, J=0, N=20)
        a0 = random_field(20, 1)
        tr = integrate(FieldState(a0, 0j, 1.0), p, DynOptions(t_end=10.0, sample_every=1000))
        U = scipy.linalg.expm(-1j * hopping_matrix(p) * 10.0)
        assert np.max(np.abs(tr.alphas[-1] - U @ a0)) <= 1e-6

    def test_fourth_order_convergence(self):
        p = ModelParams(omega=2, xi=1, g=1.0, J=1.5, Omega=2.5, N=3)
        s0 = initial_all_in_site(-1, 1, "excited", 3)

        def end(dt):
            return integrate(s0, p, DynOptions(dt=dt, t_end=2.0, sample_every=10 ** 6)).alphas[-1]

        ref = end(0.05 / 16)
        e1 = np.max(np.abs(end(0.05) - ref))
        e2 = np.max(np.abs(end(0.025) - ref))
        assert 12 < e1 / e2 < 20

    def test_mirror_symmetry_with_decoupled_atom(self):
        p = ModelParams(omega=2, xi=1, g=1.7, J=0, N=8)
        a = random_field(8, 3)
        a = a + a[::-1]
        tr = integrate(FieldState(a, 0j, 1.0), p, DynOptions(t_end=5.0, sample_every=50))
        assert np.max(np.abs(tr.alphas - tr.alphas[:, ::-1])) < 1e-12

    @pytest.mark.parametrize("Omega, g", [(2, 2), (3, 2), (5, 2), (3, 0.5), (3, 2.9), (3, 3)])
    def test_conservation(self, Omega, g):
        p = ModelParams(omega=2, xi=1, g=g, Omega=Omega, J=15, N=20)
        tr = integrate(initial_all_in_site(-1, 15, "excited", 20), p,
                       DynOptions(t_end=5.0, sample_every=50), M=15)
        assert tr.metadata["Q_drift"] <= 1e-6
        assert tr.metadata["L_drift"] <= 1e-6
        assert np.max(np.abs(tr.Q - 2.0)) <= 1e-6

    def test_q_drift_shrinks_with_halved_step(self):
        p = ModelParams(omega=2, xi=1, g=2, Omega=2, J=15, N=10)
        s0 = initial_all_in_site(-1, 15, "excited", 10)
        d1 = integrate(s0, p, DynOptions(dt=4e-3, t_end=2.0)).metadata["Q_drift"]
        d2 = integrate(s0, p, DynOptions(dt=2e-3, t_end=2.0)).metadata["Q_drift"]
        assert d2 < d1

    def test_adaptive_agrees_with_rk4(self):
        p = ModelParams(omega=2, xi=1, g=1.0, J=2.0, Omega=3.0, N=5)
        s0 = initial_all_in_site(-1, 1, "excited", 5)
        a = integrate(s0, p, DynOptions(t_end=3.0, sample_every=10 ** 6))
        b = integrate(s0, p, DynOptions(method="rk45_adaptive", dt=1e-10, t_end=3.0,
                                        sample_every=10 ** 6))
        assert b.t[-1] == pytest.approx(3.0)
        assert np.max(np.abs(a.alphas[-1] - b.alphas[-1])) < 1e-6

    def test_verbatim_runs_and_breaks_conservation(self):
        p = ModelParams(omega=2, xi=1, g=1.0, J=2.0, Omega=3.0, N=5)
        s0 = initial_all_in_site(0, 1, "excited", 5)
        s0.alphas[5] = 1j
        tr = integrate(s0, p, DynOptions(convention="verbatim_eq4", t_end=2.0))
        assert tr.sp is not None
        assert tr.metadata["Q_drift"] > 1e-6

    def test_nonfinite_reports_partial(self):
        p = ModelParams(omega=2, xi=1, g=1e200, J=0, N=2)
        a = np.zeros(5, complex)
        a[2] = 1e60
        with pytest.raises(NonFinite) as err:
            integrate(FieldState(a, 0j, 1.0), p, DynOptions(t_end=1.0))
        part = err.value.partial
        assert part is not None and len(part.t) >= 1
        assert np.isfinite(part.alphas).all()

    def test_step_underflow_reported(self, monkeypatch):
        from cavarray import dynamics

        class Failing(dynamics.RK45):
            def step(self):
                self.status = "failed"
                return "Required step size is less than spacing between numbers."

        monkeypatch.setattr(dynamics, "RK45", Failing)
        with pytest.raises(StepUnderflow):
            integrate(vacuum_state(2), ModelParams(N=2), DynOptions(method="rk45_adaptive"))

    def test_insensitive_to_array_size(self, transfer_params):
        opts = DynOptions(t_end=8.0, sample_every=100)
        n1 = [integrate(initial_all_in_site(-1, 15, "excited", N), transfer_params.with_(N=N),
                        opts, M=15).n_site(1) for N in (20, 30)]
        assert np.max(np.abs(n1[0] - n1[1])) < 1e-6

    def test_sync_time(self, transfer_params):
        tr = integrate(initial_all_in_site(-1, 15, "excited", 20), transfer_params,
                       DynOptions(t_end=2.0), M=15)
        t = first_sync_time(tr, 1.5)
        assert t is not None and 0 < t < 2
