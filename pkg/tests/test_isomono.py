import itertools
import math

import numpy as np
import pytest

from monodromy.core import make_system
from monodromy.errors import DeltaHit, SamplesSpanCells
from monodromy.isomono import (
    Family,
    coalescence_limit,
    flow,
    mixed_partial_residual,
    omega_form,
    verify_isomonodromic,
)
from monodromy.painleve import a3_frozen_stokes, a3_state
from monodromy.systems import a3_family, ei_family


def spectral_distance(w0, w1):
    """Max eigenvalue distance under the best matching (sets, not order)."""
    return min(max(abs(a - b) for a, b in zip(w0, perm))
               for perm in itertools.permutations(w1))


def random_system(rng, n=3):
    u0 = np.array([0.0, 1.0, 2.3 + 0.7j])[:n]
    A1 = rng.normal(scale=0.4, size=(n, n)) + 1j * rng.normal(scale=0.4, size=(n, n))
    return make_system(n, tuple(u0), (1,) * n, [A1.tolist()]), A1


class TestOmegaForm:
    def test_bordered_cross_sparsity(self, rng):
        s, A1 = random_system(rng)
        form = omega_form(s, [0.0] * 3, A1)
        for k, M in enumerate(form.components):
            for a in range(3):
                for b in range(3):
                    if a != k and b != k:
                        assert M[a, b] == 0
            assert M[k, k] == 0

    def test_skew_commutator_identity(self):
        # [F1, E_k] entries V_ij (delta_ki - delta_kj)/(u_i - u_j)
        V = np.array([[0, 0.2, -0.3], [-0.2, 0, 0.15], [0.3, -0.15, 0]], dtype=complex)
        s = make_system(3, (0.0, 1.0, 2.0), (1, 1, 1), [V.tolist()])
        u = np.array([0.0, 1.0, 2.0])
        form = omega_form(s, [0.0] * 3, V)
        for k in range(3):
            Vk = np.zeros((3, 3), complex)
            for i in range(3):
                for j in range(3):
                    if i != j:
                        Vk[i, j] = V[i, j] * ((k == i) - (k == j)) / (u[i] - u[j])
            assert np.allclose(form.components[k], Vk)

    def test_removable_entries_at_delta(self):
        # vanishing numerators make Omega finite on the coalescence locus
        V = np.array([[0.0, 0.0, 0.3], [0.0, 0.0, -0.2], [-0.3, 0.2, 0.0]])
        s = make_system(3, (0.0, 0.0, 1.0), (2, 1), [V.tolist()])
        form = omega_form(s, [0.0] * 3, V)
        assert form.holomorphic_at_delta
        assert np.isfinite(form.theta0()).all()

    def test_singular_at_delta_raises(self):
        from monodromy.errors import SingularAtDelta

        V = np.array([[0.0, 1.0], [1.0, 0.0]])
        s = make_system(2, (0.0, 0.0), (2,), [V.tolist()])
        with pytest.raises(SingularAtDelta):
            omega_form(s, [0.0, 0.0], V)


class TestFlow:
    def test_diagonal_fixed_point(self):
        D = np.diag([0.3, 0.7, -0.2])
        s = make_system(3, (0.0, 0.5, 1.0), (1, 1, 1), [D.tolist()])
        res = flow(s, D, [[0, 0, 0], [0.1, -0.05, 0.02]], n_samples=4)
        for sm in res.samples:
            assert np.max(np.abs(sm.A1 - D)) < 1e-12

    def test_isospectral_and_skew_preserving(self, rng):
        # 20 random flows: eigenvalues conserved to 1e-9; flows started
        # skew-symmetric stay skew-symmetric to 1e-9
        for trial in range(20):
            n = 3
            skew = trial % 2 == 0
            if skew:
                M = rng.normal(scale=0.4, size=(n, n))
                A1 = (M - M.T).astype(complex)
            else:
                A1 = rng.normal(scale=0.4, size=(n, n)) + \
                    1j * rng.normal(scale=0.4, size=(n, n))
            s = make_system(n, (0.0, 1.0, 2.3 + 0.7j), (1,) * n, [A1.tolist()])
            dt = rng.normal(scale=0.15, size=n) + 1j * rng.normal(scale=0.15, size=n)
            res = flow(s, A1, [[0.0] * n, list(dt)], n_samples=4)
            w0 = np.linalg.eigvals(A1)
            for sm in res.samples:
                assert spectral_distance(w0, np.linalg.eigvals(sm.A1)) < 1e-9
                if skew:
                    assert np.max(np.abs(sm.A1 + sm.A1.T)) < 1e-9

    def test_a3_flow_matches_branch_series(self):
        # flowing the embedded family reproduces the V_12 = Omega_2 series
        fam = a3_family()
        t0 = [0.0, 0.05, 0.0]
        A0 = fam.A1_of_t(t0)
        s = make_system(3, fam.u0, fam.partition, [fam.A1_of_t])
        res = flow(s, A0, [t0, [0.0, 0.12, 0.0]], n_samples=5)
        # the displayed three-term series has an exact t^4 remainder of
        # -263/32768 t^4 + ..., so the flow is held to the closed form at
        # 1e-8 and to the truncated series within that remainder
        c4 = 263.0 / 32768
        for sm in res.samples:
            tv = sm.t[1].real
            series = -tv / 32 - tv ** 2 / 64 - 173 * tv ** 3 / 16384
            assert abs(sm.A1[0, 1] - a3_state(tv).V[0, 1]) < 1e-8
            assert abs(sm.A1[0, 1] - series) < 1.2 * c4 * tv ** 4 + 1e-8

    def test_flow_gradient_matches_analytic_field(self, rng):
        # finite-difference dA1/dt_k along the flow vs [[F1,E_k],A1]
        s, A1 = random_system(rng)
        h = 1e-6
        for trial in range(10):
            base = list(rng.normal(scale=0.05, size=3))
            res0 = flow(s, A1, [[0.0] * 3, base], n_samples=2)
            A_at = res0.samples[-1].A1
            u = np.array(s.u(base), dtype=complex)
            form = omega_form(s, base, A_at)
            for k in range(3):
                tp = list(base)
                tm = list(base)
                tp[k] += h
                tm[k] -= h
                Ap = flow(s, A_at, [base, tp], n_samples=2).samples[-1].A1
                Am = flow(s, A_at, [base, tm], n_samples=2).samples[-1].A1
                fd = (Ap - Am) / (2 * h)
                analytic = form.components[k] @ A_at - A_at @ form.components[k]
                scale = max(1.0, float(np.max(np.abs(analytic))))
                assert np.max(np.abs(fd - analytic)) < 1e-6 * scale

    def test_delta_hit_raises(self):
        fam = ei_family()
        s = make_system(2, fam.u0, fam.partition, [fam.A1_of_t])
        A0 = fam.A1_of_t([0.0, 0.1])
        with pytest.raises(DeltaHit):
            flow(s, A0, [[0.0, 0.1], [0.0, -0.1]], n_samples=3)

    def test_flatness_along_flows(self, rng):
        s, A1 = random_system(rng)
        assert mixed_partial_residual(s, (0.0, 0.0, 0.0), A1) < 1e-8


class TestVerifyIsomonodromic:
    def test_diagonal_family_zero_deviation(self):
        D = np.diag([0.3, 0.7, -0.2])
        fam = Family((0.0, 0.5, 1.2), (1, 1, 1), lambda t: D)
        rep, _ = verify_isomonodromic(fam, [(0.0, 0.0, 0.0), (0.05, 0.0, 0.0)], 0.11)
        assert rep["pass"]
        assert rep["dev_S_nu"] < 1e-10

    def test_a3_family_constant(self):
        fam = a3_family()
        ts = [(0.0, x, 0.0) for x in (0.1, 0.07, 0.05, 0.035, 0.025)]
        rep, datas = verify_isomonodromic(fam, ts, 0.0, tol=1e-6)
        assert rep["pass"]
        assert rep["dev_S_nu"] < 1e-6
        assert rep["dev_C0"] < 1e-6

    def test_negative_control_fails(self):
        # constant residue with moving Lambda is not isomonodromic
        A1 = np.array([[0.0, 0.4], [0.3, 1.0]], dtype=complex)
        fam = Family((0.0, 1.0), (1, 1), lambda t: A1)
        ts = [(0.0, 0.0), (0.0, 0.35)]
        rep, _ = verify_isomonodromic(fam, ts, 0.11, tol=1e-6)
        assert not rep["pass"]
        assert rep["dev_S_nu"] > 1e-3

    def test_samples_spanning_cells_rejected(self):
        fam = a3_family()
        # arg t on both sides of the wall at arg t = pi/2
        ts = [(0.0, 0.05 * np.exp(1.4j), 0.0), (0.0, 0.05 * np.exp(1.8j), 0.0)]
        with pytest.raises(SamplesSpanCells):
            verify_isomonodromic(fam, ts, 0.0)


class TestCoalescenceLimit:
    def test_a3_limit_equals_frozen(self):
        fam = a3_family()
        ts = [(0.0, x, 0.0) for x in (0.1, 0.05, 0.025)]
        lim = coalescence_limit(fam, ts, (0.0, 0.0, 0.0), 0.0)
        assert lim["vanishing_verdict"] == "HolomorphicAtDelta"
        assert lim["limit_vs_frozen"] < 1e-6
        S1c, S2c = a3_frozen_stokes("hankel-closed-form")
        assert np.max(np.abs(lim["frozen"].S_nu - S1c)) < 1e-6
        # coalescing entries stay tiny along the whole approach
        for trace in lim["coalescing_entry_trace"]:
            for pair, vals in trace.items():
                assert max(vals) < 1e-7

    def test_ei_limit_trivial_with_divergence(self):
        fam = ei_family()
        ts = [(0.0, x) for x in (0.05, 0.025, 0.0125)]
        lim = coalescence_limit(fam, ts, (0.0, 0.0), 0.0)
        # the computed S(t) carries 2 pi i t^2 while F_k diverge: verdict fails
        assert lim["vanishing_verdict"] == "Fails"
        for S, (_, x) in zip(lim["S_nu_plus_mu_samples"], ts):
            assert abs(S[1, 0] - 2j * math.pi * x * x) < 1e-8
        assert lim["limit_vs_frozen"] < 1e-7   # extrapolates to the identity
        assert np.max(np.abs(lim["frozen"].S_nu - np.eye(2))) < 1e-10

    def test_diagonal_family_trivial(self):
        D = np.diag([0.3, 0.8])
        fam = Family((0.0, 0.0), (2,), lambda t: D)
        ts = [(0.0, x) for x in (0.1, 0.05)]
        lim = coalescence_limit(fam, ts, (0.0, 0.0), 0.3)
        assert lim["limit_vs_frozen"] < 1e-10
        assert np.max(np.abs(lim["S_nu_limit"] - np.eye(2))) < 1e-10
