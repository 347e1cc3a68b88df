"""Actual fundamental solutions and monodromy data by numerical matching.

The canonical solution of sector r is pinned down by integrating the Levelt
solution from a series-accurate radius out to the matching radius along a
direction interior to S_r(t), then solving the linear matching
Y0_continued * C_r = Y_formal in least squares over an arc of sample points.
Stokes matrices follow as S_nu = C_1^{-1} C_2, S_{nu+mu} = C_2^{-1} C_3.

Matching directions are chosen where the exponentials e^{u_a z} separate
least ("balanced" directions); there the subdominant columns survive in
double precision and the match stays well conditioned as the radius grows.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp

from .core import to_complex
from .errors import (
    MatchingIllConditioned,
    PathThroughOrigin,
    RadiusTooSmall,
    StepFailure,
)
from .formal import FormalSolution, coalescence_groups, formal_coefficients, frozen_formal
from .geometry import Sector, build_sectors, dominance
from .levelt import LeveltData, evaluate_levelt, levelt_series


@dataclass(frozen=True)
class CoverPoint:
    """z = r e^{i theta} on the universal cover; theta is unrestricted."""

    r: float
    theta: float

    @property
    def z(self) -> complex:
        return self.r * cmath.exp(1j * self.theta)

    @property
    def winding(self) -> int:
        return math.floor((self.theta + math.pi) / (2 * math.pi))


@dataclass
class NumericsParams:
    """Engineering knobs of the matching pipeline (surfaced, not canonical)."""

    K: object = "auto"            # asymptotic truncation order or "auto" (optimal)
    max_K: int = 40
    r_match: object = "auto"      # matching radius or "auto"
    r0: float = 0.4               # Levelt anchor radius (series-accurate)
    levelt_order: int = 32
    ode_rtol: float = 1e-12
    ode_atol: float = 1e-13
    r_min: float = 1e-8
    n_arc: object = "auto"        # sample points on the matching arc
    arc_span: object = "auto"     # arc width in radians
    sector_margin: float = 0.05
    cond_max: float = 1e8
    target_tol: float = 1e-9


@dataclass
class SectorSolution:
    r_index: int
    sector: Sector
    direction: float              # matching direction on the cover
    C: np.ndarray                 # Y_r = Y0 * C
    residual: float
    cond: float
    formal_error: float
    center: complex = 0.0         # gauge shift e^{-center z} used internally
    samples: list = field(default_factory=list)  # (CoverPoint, Y0cont, Y_formal)


@dataclass
class MonodromyData:
    S_nu: np.ndarray
    S_nu_plus_mu: np.ndarray
    B1: np.ndarray                # diagonal vector
    C0: np.ndarray
    levelt: LeveltData
    sectors: dict
    quality: dict
    C_all: list = field(default_factory=list)
    extra_S: dict = field(default_factory=dict)


def evaluate_formal(sol: FormalSolution, point: CoverPoint, K="auto", max_K=40):
    """(I + sum F_k z^{-k}) z^{B1} e^{Lambda z} truncated at K, with error estimate.

    K = "auto" stops at the optimal index (before the first term that stops
    shrinking); the error estimate is the magnitude of the first omitted
    term.  K = 0 returns the bare exponential factor.
    """
    z = point.z
    logz = complex(math.log(point.r), point.theta)
    n = len(sol.u)
    F = [f.to_numpy() for f in sol.F]
    if K == "auto" and F and float(np.max(np.abs(F[0]))) >= point.r:
        raise RadiusTooSmall(
            f"first series term has size {np.max(np.abs(F[0])) / point.r:.3g} "
            f"at |z| = {point.r}; no asymptotic regime here")
    acc = np.eye(n, dtype=complex)
    zk = 1.0 + 0.0j
    prev_norm = math.inf
    err = 0.0
    used = 0
    kmax = len(F) if K == "auto" else min(int(K), len(F))
    limit = min(kmax, max_K)
    for k in range(1, limit + 1):
        zk /= z
        term = F[k - 1] * zk
        norm = float(np.max(np.abs(term)))
        if K == "auto" and norm >= prev_norm:
            err = norm
            break
        acc = acc + term
        prev_norm = norm
        used = k
    else:
        if limit < len(F):
            err = float(np.max(np.abs(F[limit] * zk / z)))
        else:
            err = prev_norm if used else 0.0
    u = np.array([to_complex(x) for x in sol.u])
    b1 = np.diag(sol.B1.to_numpy())
    factor = np.exp(b1 * logz + u * z)
    return acc * factor[None, :], err, used


def _segment_rhs(system, t, center=0.0):
    Lam = system.Lambda(t).to_numpy() - center * np.eye(system.n)
    coeffs = []
    k = 1
    while True:
        A = system.a_hat(k, t)
        if A is None:
            break
        coeffs.append(A.to_numpy())
        k += 1

    def A_of_z(z):
        M = Lam.copy()
        zk = z
        for A in coeffs:
            M = M + A / zk
            zk *= z
        return M

    return A_of_z


def propagate(system, t, points, Y0, params: NumericsParams | None = None,
              center=0.0):
    """Transport Y along the cover path through ``points`` (CoverPoint list).

    Consecutive points are joined by linear interpolation of (r, theta).
    ``center`` subtracts a scalar from Lambda (the gauge Y -> e^{-c z} Y),
    which tames the absolute exponential scale; connection and Stokes
    matrices are invariant under it.  info records the Wronskian drift
    against the exact trace identity.
    """
    params = params or NumericsParams()
    Y = np.asarray(Y0, dtype=complex)
    n = Y.shape[0]
    A_of_z = _segment_rhs(system, t, center)
    logdet_drift = 0.0
    for p0, p1 in zip(points[:-1], points[1:]):
        if min(p0.r, p1.r) < params.r_min:
            raise PathThroughOrigin(f"path reaches |z| = {min(p0.r, p1.r)} < r_min")

        def rhs(s, y):
            r = p0.r + s * (p1.r - p0.r)
            th = p0.theta + s * (p1.theta - p0.theta)
            e = cmath.exp(1j * th)
            z = r * e
            dz = (p1.r - p0.r) * e + r * 1j * (p1.theta - p0.theta) * e
            return (A_of_z(z) @ y.reshape(n, n) * dz).ravel()

        sol = solve_ivp(rhs, (0.0, 1.0), Y.ravel(), method="DOP853",
                        rtol=params.ode_rtol, atol=params.ode_atol, dense_output=False)
        if not sol.success:
            raise StepFailure(f"integration failed: {sol.message}")
        Ynew = sol.y[:, -1].reshape(n, n)
        # trace identity: d(log det Y) = tr A(z) dz
        expected = _trace_integral(system, t, p0, p1) - n * center * (p1.z - p0.z)
        s0 = np.linalg.slogdet(Y)
        s1 = np.linalg.slogdet(Ynew)
        drift = abs((s1[1] - s0[1]) - expected.real)
        logdet_drift = max(logdet_drift, drift)
        Y = Ynew
    return Y, {"logdet_drift": logdet_drift}


def _trace_integral(system, t, p0, p1):
    Lam = system.Lambda(t).to_numpy()
    z0, z1 = p0.z, p1.z
    total = np.trace(Lam) * (z1 - z0)
    k = 1
    while True:
        A = system.a_hat(k, t)
        if A is None:
            break
        tr = np.trace(A.to_numpy())
        if k == 1:
            total += tr * complex(math.log(p1.r) - math.log(p0.r), p1.theta - p0.theta)
        else:
            total += tr * (z1 ** (1 - k) - z0 ** (1 - k)) / (1 - k)
        k += 1
    return total


def _pair_scales(system, t):
    u = [to_complex(x) for x in system.u(t)]
    diffs = [u[a] - u[b] for a in range(len(u)) for b in range(len(u))
             if a < b and u[a] != u[b]]
    if not diffs:
        return [], 0.0, 0.0
    mags = [abs(d) for d in diffs]
    return diffs, min(mags), max(mags)


def _balanced_direction(diffs, sector: Sector, margin, fallback):
    """Direction in the sector minimizing the worst exponential separation."""
    if not diffs or not math.isfinite(sector.opening):
        return fallback
    lo = sector.right + margin
    hi = sector.left - margin
    grid = np.linspace(lo, hi, 721)
    worst = np.array([max(abs((d * cmath.exp(1j * th)).real) for d in diffs)
                      for th in grid])
    return float(grid[int(np.argmin(worst))])


def _matching_directions(diffs, sector: Sector, margin, fallback):
    """One direction per eigenvalue pair where its exponentials balance.

    Each pair contributes its interior Stokes directions Re(d e^{i theta}) = 0
    (where both exponentials of the pair have equal modulus, so the matching
    sees the subdominant column of that pair); the globally balanced
    direction anchors the set.
    """
    anchor = _balanced_direction(diffs, sector, margin, fallback)
    dirs = [anchor]
    if math.isfinite(sector.opening):
        lo = sector.right + margin
        hi = sector.left - margin
        for d in diffs:
            base = math.pi / 2 - cmath.phase(d)
            k0 = math.ceil((lo - base) / math.pi)
            th = base + k0 * math.pi
            while th <= hi:
                if all(abs(th - x) > 1e-3 for x in dirs):
                    dirs.append(th)
                th += math.pi
    return anchor, sorted(dirs)


def _auto_radius(min_sep, target_tol):
    # optimal truncation of the factorially divergent tail: error ~ e^{-|du| R}
    want = -math.log(max(target_tol, 1e-15)) + 4.0
    return max(want / max(min_sep, 1e-8), 12.0)


def _formal_for(system, t, K):
    groups = coalescence_groups(system, t)
    if any(len(g) > 1 for g in groups):
        return frozen_formal(system, t, K), True
    return formal_coefficients(system, t, K), False


def connection_matrices(system, t, tau_tilde, params: NumericsParams | None = None,
                        rs=(1, 2, 3)):
    """Central connection matrices C_r with Y_r = Y0 C_r for sectors S_r(t).

    Works at coalescence points too (frozen formal solution, rays of the
    distinct eigenvalues).  Returns (list of SectorSolution, LeveltData,
    FormalSolution).
    """
    params = params or NumericsParams()
    diffs, min_sep, max_sep = _pair_scales(system, t)
    if params.r_match != "auto":
        R = params.r_match
    elif diffs:
        R = _auto_radius(min_sep, params.target_tol)
    else:
        R = 25.0  # single exponential: the z^{-k} series is convergent
    if R <= params.r0:
        raise RadiusTooSmall(f"matching radius {R} inside the series radius {params.r0}")
    Kf = params.max_K if params.K == "auto" else int(params.K)
    formal, frozen = _formal_for(system, t, Kf)
    lev = levelt_series(system, t, params.levelt_order)
    sectors = build_sectors(system, t, tau_tilde, rs=rs)
    n = system.n
    m_arc = params.n_arc if params.n_arc != "auto" else max(2 * n, 7)
    out = []
    u_orig = np.array([to_complex(x) for x in system.u(t)])
    center = complex(np.mean(u_orig))
    u = u_orig - center
    formal_c = replace(formal, u=tuple(u))
    b1 = np.diag(formal.B1.to_numpy())
    for r_index in rs:
        sec = sectors[r_index]
        margin = params.sector_margin * min(1.0, sec.opening)
        halfplane_center = tau_tilde + (r_index - 1.5) * math.pi
        theta_star, directions = _matching_directions(diffs, sec, margin,
                                                      halfplane_center)
        span = params.arc_span
        if span == "auto":
            cap = 8.0 / max(R * max_sep, 1.0)
            span = min(0.3, cap, 0.4 * (sec.opening - 2 * margin) / max(len(directions), 1))
        cluster = max(3, int(math.ceil(m_arc / len(directions))))
        thetas = sorted({round(th + span * (k / (cluster - 1) - 0.5), 12)
                         for th in directions for k in range(cluster)})
        thetas = np.array(thetas)
        anchor = CoverPoint(params.r0, theta_star)
        Y0_anchor = evaluate_levelt(lev, anchor.r, anchor.theta) * \
            cmath.exp(-center * anchor.z)
        ray_end = CoverPoint(R, theta_star)
        Ycont, info = propagate(system, t, [anchor, ray_end], Y0_anchor, params,
                                center=center)
        samples = []
        # walk the sector arc outward from theta_star so each hop is short
        done = {int(np.argmin(np.abs(thetas - theta_star))): (ray_end, Ycont)}
        for idx in np.argsort(np.abs(thetas - theta_star)):
            idx = int(idx)
            if idx in done:
                continue
            src = min(done, key=lambda j: abs(thetas[j] - thetas[idx]))
            p_src, Y_src = done[src]
            p_dst = CoverPoint(R, float(thetas[idx]))
            Y_dst, _ = propagate(system, t, [p_src, p_dst], Y_src, params,
                                 center=center)
            done[idx] = (p_dst, Y_dst)
        A_rows = []
        B_rows = []
        weights = []
        f_err = 0.0
        for idx in range(len(thetas)):
            p, Yc = done[idx]
            Yf, err, used = evaluate_formal(formal_c, p, K=params.K, max_K=params.max_K)
            f_err = max(f_err, err)
            A_rows.append(Yc)
            B_rows.append(Yf)
            logz = complex(math.log(p.r), p.theta)
            weights.append(np.exp(-np.real(b1 * logz + u * p.z)))
            samples.append((p, Yc, Yf))
        A = np.vstack(A_rows)
        # per-column weighted solve in the normalized frame: the j-th column
        # equations are scaled by |z^{B1_j} e^{u_j z}|^{-1} per sample, so the
        # subdominant data each pair contributes near its own ray is retained
        C = np.zeros((n, n), dtype=complex)
        cond = 0.0
        residual = 0.0
        for j in range(n):
            w = np.concatenate([np.full(n, weights[sidx][j])
                                for sidx in range(len(thetas))])
            Aw = A * w[:, None]
            bw = np.concatenate([B_rows[sidx][:, j] * weights[sidx][j]
                                 for sidx in range(len(thetas))])
            # gate on the column-equilibrated condition number: row spread in
            # the normalized frame is genuine noise amplification (integration
            # error rides on the largest component), so it must stay visible
            colnorm = np.max(np.abs(Aw), axis=0)
            colnorm[colnorm == 0] = 1.0
            Aeq = Aw / colnorm[None, :]
            with np.errstate(all="ignore"):
                svals = np.linalg.svd(Aeq, compute_uv=False)
            cond_j = float(svals[0] / svals[-1]) if svals[-1] > 0 else math.inf
            cond = max(cond, cond_j)
            if cond_j > params.cond_max:
                raise MatchingIllConditioned(
                    f"matching system for sector {r_index}, column {j} "
                    f"has condition {cond_j:.3e}")
            y, *_ = np.linalg.lstsq(Aeq, bw, rcond=None)
            cj = y / colnorm
            C[:, j] = cj
            residual = max(residual, float(
                np.max(np.abs(Aw @ cj - bw)) / max(np.max(np.abs(bw)), 1e-300)))
        out.append(SectorSolution(r_index, sec, theta_star, C, residual, cond,
                                  f_err, center, samples))
    return out, lev, formal


def stokes_matrices(system, t, tau_tilde, params: NumericsParams | None = None,
                    n_sectors=3) -> MonodromyData:
    """Essential monodromy data at t: S_nu, S_{nu+mu}, B1, C0, Levelt data.

    S matrices connect the canonical solutions of consecutive sectors
    S_r(t), r = 1..n_sectors; C0 connects sector 1 to the Levelt solution.
    """
    params = params or NumericsParams()
    rs = tuple(range(1, n_sectors + 1))
    sols, lev, formal = connection_matrices(system, t, tau_tilde, params, rs=rs)
    C = [s.C for s in sols]
    S = [np.linalg.solve(C[i], C[i + 1]) for i in range(len(C) - 1)]
    B1 = np.diag(formal.B1.to_numpy())
    quality = {
        "match_residuals": [s.residual for s in sols],
        "match_conds": [s.cond for s in sols],
        "formal_errors": [s.formal_error for s in sols],
        "frozen": formal.frozen,
    }
    quality.update(_structure_quality(system, t, S, sols, tau_tilde))
    extra = {i + 1: S[i] for i in range(2, len(S))}
    data = MonodromyData(S[0], S[1] if len(S) > 1 else np.eye(system.n, dtype=complex),
                         B1, C[0], lev, {s.r_index: s.sector for s in sols},
                         quality, C_all=C, extra_S=extra)
    return data


def _structure_quality(system, t, S, sols, tau_tilde):
    """Unit-diagonal-block and triangularity violations of each Stokes matrix."""
    n = system.n
    groups = coalescence_groups(system, t)
    gof = {}
    for gi, g in enumerate(groups):
        for a in g:
            gof[a] = gi
    diag_dev = 0.0
    tri_dev = 0.0
    for i, Smat in enumerate(S):
        overlap_dir = 0.5 * (sols[i].sector.left + sols[i + 1].sector.right)
        for a in range(n):
            for b in range(n):
                if gof[a] == gof[b]:
                    target = 1.0 if a == b else 0.0
                    diag_dev = max(diag_dev, abs(Smat[a, b] - target))
                else:
                    if dominance(system, (a, b), overlap_dir, t) > 0:
                        tri_dev = max(tri_dev, abs(Smat[a, b]))
    return {"unit_diagonal_dev": diag_dev, "triangularity_dev": tri_dev}


def monodromy_consistency(system, t, tau_tilde, params: NumericsParams | None = None,
                          data: MonodromyData | None = None):
    """Residuals of the constraints tying S_nu, S_{nu+mu}, B1, C0 and L0 together.

    (i)  S_{nu-mu}^{-1} e^{2 pi i B1} S_nu^{-1} = C0^{-1} e^{2 pi i L0} C0,
         with S_{nu-mu} = e^{2 pi i B1} S_{nu+mu} e^{-2 pi i B1};
    (ii) M_inf = (S_nu S_{nu+mu}) e^{-2 pi i B1} against the round-trip
         monodromy of the propagated solution;
    (iii) S_{nu+2mu} = e^{-2 pi i B1} S_nu e^{2 pi i B1} (needs 4 sectors).
    """
    from scipy.linalg import expm

    params = params or NumericsParams()
    if data is None or not data.extra_S:
        data = stokes_matrices(system, t, tau_tilde, params, n_sectors=4)
    S1, S2 = data.S_nu, data.S_nu_plus_mu
    n = S1.shape[0]
    E = np.diag(np.exp(2j * math.pi * data.B1))
    Einv = np.diag(np.exp(-2j * math.pi * data.B1))
    S_prev = E @ S2 @ Einv
    lhs = np.linalg.inv(S_prev) @ E @ np.linalg.inv(S1)
    L0 = data.levelt.L0()
    M0 = expm(2j * math.pi * L0)
    rhs = np.linalg.solve(data.C0, M0 @ data.C0)
    res_i = float(np.max(np.abs(lhs - rhs)))

    # round-trip monodromy: transport the sector-1 solution inward along its
    # balanced ray (no exponential separation there), then loop at a small
    # radius where the fundamental matrix stays well conditioned
    sols, lev, formal = connection_matrices(system, t, tau_tilde, params, rs=(1,))
    s1 = sols[0]
    p_start = s1.samples[0][0]
    Y_start = s1.samples[0][1] @ s1.C     # the sector-1 canonical solution
    r_loop = min(max(4.0 * params.r0, 1.0), p_start.r)
    p_loop = CoverPoint(r_loop, p_start.theta)
    Y_loop0, _ = propagate(system, t, [p_start, p_loop], Y_start, params,
                           center=s1.center)
    loop = [CoverPoint(r_loop, p_loop.theta + k * math.pi / 8) for k in range(17)]
    Y_end, _ = propagate(system, t, loop, Y_loop0, params, center=s1.center)
    M_rt = np.linalg.solve(Y_loop0, Y_end)
    M_inf = (S1 @ S2) @ Einv
    res_ii = float(np.max(np.abs(M_inf - np.linalg.inv(M_rt))))

    res_iii = None
    if 3 in data.extra_S:
        S3 = data.extra_S[3]
        res_iii = float(np.max(np.abs(S3 - Einv @ S1 @ E)))
    return {"constraint": res_i, "infinity_monodromy": res_ii,
            "shifted_stokes": res_iii}
