"""Isomonodromic deformation flow and constancy / coalescence-limit checks.

The deformation equations move the residue matrix by a commutator,
dA1/dt_k = [[F1, E_k], A1], so its spectrum is conserved; the eigenvector
frame co-integrates by dG0 = Theta0 G0.  Constancy of the essential data
(Stokes matrices, B1, connection matrix modulo its gauge orbit) across
samples in one cell is the operative definition of isomonodromy; the
coalescence-limit experiment extrapolates the data along a radial approach
to the coalescence locus and compares with the frozen system there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .cells import cell_signature
from .connect import NumericsParams, stokes_matrices
from .core import make_system, to_complex
from .errors import BlowUp, DeltaHit, OnWall, SamplesSpanCells, SingularAtDelta
from .formal import vanishing_report

SINGULAR_TOL = 1e-12


@dataclass
class DeformationForm:
    """Omega_k(z) = z E_k + [F1, E_k] and Theta0 = sum [F1, E_k] dt_k at one t."""

    t: tuple
    components: list          # components[k] = [F1, E_k], an n x n array
    holomorphic_at_delta: bool
    entry_flags: dict = field(default_factory=dict)

    def omega(self, k, z):
        n = self.components[k].shape[0]
        E = np.zeros((n, n), dtype=complex)
        E[k, k] = 1.0
        return z * E + self.components[k]

    def theta0(self, velocity=None):
        n = self.components[0].shape[0]
        v = np.ones(len(self.components)) if velocity is None else np.asarray(velocity)
        out = np.zeros((n, n), dtype=complex)
        for k, M in enumerate(self.components):
            out = out + v[k] * M
        return out


def _bracket_f1_ek(u, A1, tol=SINGULAR_TOL, strict=True):
    """All commutators [F1, E_k]: entry (a,b) of the k-th is
    A1_ab (delta_ak - delta_bk) / (u_a - u_b)."""
    n = len(u)
    comps = []
    flags = {}
    holo = True
    scale = max(1.0, float(np.max(np.abs(A1))))
    for k in range(n):
        M = np.zeros((n, n), dtype=complex)
        for a in range(n):
            for b in range(n):
                if a == b or (a != k and b != k):
                    continue
                d = u[a] - u[b]
                if abs(d) <= tol:
                    if abs(A1[a, b]) <= tol * scale:
                        M[a, b] = 0.0
                        flags[(a, b)] = "removable"
                        holo = holo and True
                    else:
                        if strict:
                            raise SingularAtDelta(
                                f"entry {(a, b)}: A1 = {A1[a, b]} over u_a - u_b = {d}")
                        flags[(a, b)] = "singular"
                        holo = False
                        M[a, b] = np.inf
                else:
                    M[a, b] = A1[a, b] * (1.0 if a == k else -1.0) / d
        comps.append(M)
    return comps, holo, flags


def omega_form(system, t, A1=None, strict=True) -> DeformationForm:
    """The deformation one-form at t for the current residue matrix A1.

    A1 defaults to the system's own coefficient at t; pass the flowed value
    when evaluating along an integrated deformation.
    """
    u = np.array([to_complex(x) for x in system.u(t)])
    if A1 is None:
        A1 = system.a_hat(1, t).to_numpy()
    else:
        A1 = np.asarray(A1, dtype=complex)
    comps, holo, flags = _bracket_f1_ek(u, A1, strict=strict)
    return DeformationForm(tuple(t), comps, holo, flags)


@dataclass
class FlowSample:
    x: float
    t: tuple
    A1: np.ndarray
    eigenvalues: np.ndarray
    G0: np.ndarray | None = None
    signature: object = None


@dataclass
class FlowResult:
    samples: list
    status: str
    logs: dict = field(default_factory=dict)


def flow(system, A1_init, path, params: NumericsParams | None = None,
         n_samples=9, tau_tilde=None, with_G0=True, rtol=1e-11, atol=1e-12,
         delta_tol=1e-9) -> FlowResult:
    """Integrate dA1/dt_k = [[F1, E_k], A1] along a piecewise-linear t-path.

    G0 is co-integrated by dG0 = Theta0 G0 when ``with_G0``.  Eigenvalues of
    A1 (conserved exactly by the commutator flow) are recorded at each
    sample; when ``tau_tilde`` is given the cell signature is traced too.
    Raises DeltaHit when the path touches the coalescence locus and BlowUp
    when the integrator collapses (movable pole).
    """
    waypoints = [np.array([to_complex(x) for x in p]) for p in path]
    n = system.n
    A1 = np.asarray(A1_init, dtype=complex)
    G0 = np.eye(n, dtype=complex)
    samples = []
    xs_global = np.linspace(0.0, 1.0, n_samples)
    nseg = len(waypoints) - 1

    def record(xg, t_now, A_now, G_now):
        w = np.linalg.eigvals(A_now)
        sig = None
        if tau_tilde is not None:
            try:
                sig = cell_signature(system, list(t_now), tau_tilde)
            except OnWall:
                sig = "on-wall"
        samples.append(FlowSample(float(xg), tuple(t_now), A_now.copy(),
                                  np.sort_complex(w), G_now.copy() if with_G0 else None,
                                  sig))

    record(0.0, waypoints[0], A1, G0)
    for i in range(nseg):
        t0v, t1v = waypoints[i], waypoints[i + 1]
        dt = t1v - t0v

        # coalescence pre-check along the straight segment
        for a in range(n):
            for b in range(a + 1, n):
                u0d = to_complex(system.u0[a]) - to_complex(system.u0[b])
                d0 = u0d + (t0v[a] - t0v[b])
                d1 = u0d + (t1v[a] - t1v[b])
                dd = d1 - d0
                den = abs(dd) ** 2
                xm = 0.0 if den == 0 else min(1.0, max(0.0, -(d0.conjugate() * dd).real / den))
                if abs(d0 + xm * dd) <= delta_tol and 0.0 < xm < 1.0:
                    raise DeltaHit(f"pair {(a, b)} coalesces inside segment {i}")

        def rhs(x, y):
            A = y[: n * n].reshape(n, n)
            t_now = t0v + x * dt
            u = np.array([to_complex(s) for s in system.u0]) + t_now
            comps, _, _ = _bracket_f1_ek(u, A, strict=True)
            Th = np.zeros((n, n), dtype=complex)
            for k in range(n):
                Th = Th + dt[k] * comps[k]
            dA = Th @ A - A @ Th
            if with_G0:
                G = y[n * n:].reshape(n, n)
                return np.concatenate([dA.ravel(), (Th @ G).ravel()])
            return dA.ravel()

        y0 = np.concatenate([A1.ravel(), G0.ravel()]) if with_G0 else A1.ravel()
        seg_xs = [x for x in xs_global if i / nseg < x <= (i + 1) / nseg]
        t_eval = sorted({(x * nseg - i) for x in seg_xs} | {1.0})
        try:
            sol = solve_ivp(rhs, (0.0, 1.0), y0, method="DOP853", rtol=rtol,
                            atol=atol, t_eval=t_eval)
        except SingularAtDelta as exc:
            raise DeltaHit(str(exc)) from exc
        if not sol.success:
            raise BlowUp(f"flow integration failed on segment {i}: {sol.message}",
                         last_good_t=tuple(t0v))
        for j, xloc in enumerate(sol.t):
            y = sol.y[:, j]
            A_now = y[: n * n].reshape(n, n)
            G_now = y[n * n:].reshape(n, n) if with_G0 else G0
            xg = (i + xloc) / nseg
            if xloc == 1.0 or any(abs(xg - x) < 1e-12 for x in seg_xs):
                record(xg, t0v + xloc * dt, A_now, G_now)
        A1 = sol.y[: n * n, -1].reshape(n, n)
        if with_G0:
            G0 = sol.y[n * n:, -1].reshape(n, n)
    return FlowResult(samples, "ok")


@dataclass
class Family:
    """A deformation family t -> A1(t) over the fixed unfolding u = u0 + t."""

    u0: tuple
    partition: tuple
    A1_of_t: object          # callable t -> n x n array
    label: str = ""

    def system_at(self, t):
        """The frozen system with coefficient A1(t), eigenvalues u0 + t."""
        A1 = np.asarray(self.A1_of_t(t), dtype=complex)
        n = len(self.u0)
        u_here = [to_complex(x) + to_complex(s) for x, s in zip(self.u0, t)]
        # group equal values so the frozen machinery applies on Delta too
        groups = []
        for a in range(n):
            for g in groups:
                if abs(u_here[g[0]] - u_here[a]) <= 1e-13 * (1 + abs(u_here[a])):
                    g.append(a)
                    break
            else:
                groups.append([a])
        if all(len(g) == 1 for g in groups):
            partition = (1,) * n
            perm = list(range(n))
        else:
            perm = [a for g in groups for a in g]
            partition = tuple(len(g) for g in groups)
        if perm != list(range(n)):
            P = np.zeros((n, n))
            for new, old in enumerate(perm):
                P[old, new] = 1.0
            A1 = P.T @ A1 @ P
            u_perm = [u_here[old] for old in perm]
        else:
            u_perm = u_here
        return make_system(n, tuple(u_perm), partition, [A1], label=self.label), perm


def _orbit_distance(C, C_ref, lattice, n):
    """Distance of C to C_ref modulo the Levelt gauge orbit.

    The connection matrix is defined up to C -> D^{-1} C with D in the gauge
    group (diagonal on equal-mu groups plus resonant nilpotent entries), so
    the distance is the least-squares residual over that linear family,
    normalized by |C_ref|.
    """
    pattern = {i: [i] for i in range(n)}
    for (i, j, _l) in lattice:
        pattern[i].append(j)
    resid = 0.0
    for i in range(n):
        cols = sorted(set(pattern[i]))
        A = np.vstack([C[j, :] for j in cols]).T
        b = C_ref[i, :]
        x, *_ = np.linalg.lstsq(A, b, rcond=None)
        resid = max(resid, float(np.max(np.abs(A @ x - b))))
    return resid / max(float(np.max(np.abs(C_ref))), 1e-300)


def verify_isomonodromic(family: Family, ts, tau_tilde,
                         params: NumericsParams | None = None, tol=1e-6):
    """Max deviation of the essential data across sample points in one cell.

    Returns a report dict with the deviations and a PASS/FAIL verdict.
    Raises SamplesSpanCells when the samples have different signatures.
    """
    params = params or NumericsParams()
    base_system = make_system(len(family.u0), family.u0, family.partition,
                              [family.A1_of_t(list(ts[0]))])
    sigs = []
    for t in ts:
        try:
            sigs.append(cell_signature(base_system, list(t), tau_tilde))
        except OnWall as exc:
            raise SamplesSpanCells(f"sample {t} sits on a wall: {exc}") from exc
    if any(s.signs != sigs[0].signs for s in sigs[1:]):
        raise SamplesSpanCells("samples lie in different cells")

    datas = []
    for t in ts:
        sys_t, _ = family.system_at(t)
        datas.append(stokes_matrices(sys_t, sys_t.zero_t(0j), tau_tilde, params))
    ref = datas[0]
    dev_S1 = max(float(np.max(np.abs(d.S_nu - ref.S_nu))) for d in datas)
    dev_S2 = max(float(np.max(np.abs(d.S_nu_plus_mu - ref.S_nu_plus_mu))) for d in datas)
    dev_B1 = max(float(np.max(np.abs(d.B1 - ref.B1))) for d in datas)
    dev_C0 = max(_orbit_distance(d.C0, ref.C0, ref.levelt.resonance_lattice,
                                 ref.C0.shape[0]) for d in datas)
    # constancy of the Fuchsian exponents (integer differences included)
    mu_ref = np.sort_complex(ref.levelt.mu)
    dev_mu = max(float(np.max(np.abs(np.sort_complex(d.levelt.mu) - mu_ref)))
                 for d in datas)
    report = {
        "dev_S_nu": dev_S1,
        "dev_S_nu_plus_mu": dev_S2,
        "dev_B1": dev_B1,
        "dev_C0": dev_C0,
        "dev_mu": dev_mu,
        "n_samples": len(ts),
        "pass": max(dev_S1, dev_S2, dev_B1, dev_C0, dev_mu) <= tol,
    }
    return report, datas


def _extrapolate_to_zero(hs, values):
    """Lagrange extrapolation of matrix samples values(h) to h = 0."""
    hs = [float(h) for h in hs]
    m = len(hs)
    out = np.zeros_like(values[0])
    for i in range(m):
        w = 1.0
        for j in range(m):
            if j != i:
                w *= hs[j] / (hs[j] - hs[i])
        out = out + w * values[i]
    return out


def coalescence_limit(family: Family, t_samples, t_delta, tau_tilde,
                      params: NumericsParams | None = None, vanishing_levels=3):
    """Stokes data along a radial approach to t_delta, with frozen comparison.

    Computes S(t) at each sample, extrapolates entrywise to the limit,
    computes the frozen system's matrices at t_delta, and traces the entries
    of the coalescing block.  The vanishing verdict is attached; a failing
    verdict does not abort (the divergence trace is the point).
    """
    params = params or NumericsParams()
    sys0 = make_system(len(family.u0), family.u0, family.partition,
                       [lambda t: family.A1_of_t(t)])
    try:
        vrep = vanishing_report(sys0, list(t_delta), vanishing_levels, mode="float")
        verdict = vrep.verdict
    except Exception as exc:           # diagnostics only
        vrep, verdict = None, f"unavailable ({exc})"

    hs, S1s, S2s, traces = [], [], [], []
    groups = None
    for t in t_samples:
        sys_t, perm = family.system_at(t)
        data = stokes_matrices(sys_t, sys_t.zero_t(0j), tau_tilde, params)
        h = max(abs(to_complex(a) - to_complex(b)) for a, b in zip(t, t_delta))
        hs.append(h)
        S1s.append(data.S_nu)
        S2s.append(data.S_nu_plus_mu)
        if groups is None:
            sys_frozen, _ = family.system_at(t_delta)
            groups = sys_frozen.blocks()
        trace = {}
        for rng in groups:
            idx = list(rng)
            if len(idx) < 2:
                continue
            for a in idx:
                for b in idx:
                    if a != b:
                        trace[(a, b)] = (abs(data.S_nu[a, b]),
                                         abs(data.S_nu_plus_mu[a, b]))
        traces.append(trace)

    S1_lim = _extrapolate_to_zero(hs, S1s)
    S2_lim = _extrapolate_to_zero(hs, S2s)
    sys_frozen, _ = family.system_at(t_delta)
    frozen = stokes_matrices(sys_frozen, sys_frozen.zero_t(0j), tau_tilde, params)
    return {
        "hs": hs,
        "S_nu_samples": S1s,
        "S_nu_plus_mu_samples": S2s,
        "S_nu_limit": S1_lim,
        "S_nu_plus_mu_limit": S2_lim,
        "frozen": frozen,
        "vanishing_verdict": verdict,
        "vanishing_report": vrep,
        "coalescing_entry_trace": traces,
        "limit_vs_frozen": max(
            float(np.max(np.abs(S1_lim - frozen.S_nu))),
            float(np.max(np.abs(S2_lim - frozen.S_nu_plus_mu)))),
    }


def mixed_partial_residual(system, t, A1, h=1e-5, z=1.0):
    """Finite-difference flatness check d_i Omega_j - d_j Omega_i = [Omega_i, Omega_j].

    Partials differentiate Omega built from the *flowed* A1 (the deformation
    equations transport A1 to the shifted points); the commutator side is
    analytic.  Returns the max residual over index pairs at the given z.
    """
    n = system.n
    A1 = np.asarray(A1, dtype=complex)

    def comps_at(t_target):
        if all(abs(a - b) == 0 for a, b in zip(t, t_target)):
            A_end = A1
        else:
            res = flow(system, A1, [list(t), list(t_target)], n_samples=2,
                       with_G0=False)
            A_end = res.samples[-1].A1
        u = np.array([to_complex(x) for x in system.u(list(t_target))])
        return _bracket_f1_ek(u, A_end)[0]

    base = comps_at(t)
    worst = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            def shifted(axis, sign):
                tt = list(t)
                tt[axis] = tt[axis] + sign * h
                return comps_at(tt)

            dOmj_di = (shifted(i, +1)[j] - shifted(i, -1)[j]) / (2 * h)
            dOmi_dj = (shifted(j, +1)[i] - shifted(j, -1)[i]) / (2 * h)
            Ei = np.zeros((n, n)); Ei[i, i] = 1.0
            Ej = np.zeros((n, n)); Ej[j, j] = 1.0
            Omi = z * Ei + base[i]
            Omj = z * Ej + base[j]
            res = dOmj_di - dOmi_dj - (Omi @ Omj - Omj @ Omi)
            worst = max(worst, float(np.max(np.abs(res))))
    return worst
