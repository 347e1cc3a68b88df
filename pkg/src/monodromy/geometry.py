"""Stokes rays, admissible directions, sectors and the dominance relation.

All angles are absolute reals on the universal cover of the punctured
z-plane; sheet bookkeeping is explicit (a direction theta and theta + 2*pi
are different rays).  arg_p denotes the principal determination in (-pi, pi].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import arg_p, to_complex
from .errors import CoalescentPair, NotAdmissible, OnCrossingLocus, OnStokesRay

TWO_PI = 2 * math.pi
HALF3_PI = 1.5 * math.pi

ANGLE_TOL = 1e-12


@dataclass(frozen=True)
class Ray:
    """One Stokes ray direction on the cover, tagged by its eigenvalue pair."""

    direction: float
    pair: tuple
    splitting: bool  # True when u_a(0) != u_b(0) (the ray belongs to R-frak)


@dataclass(frozen=True)
class Sector:
    """Open angular sector S(right, left) on the cover, right < left."""

    right: float
    left: float
    kind: str = "custom"

    @property
    def opening(self):
        return self.left - self.right

    def contains(self, theta, margin=0.0):
        return self.right + margin < theta < self.left - margin

    @property
    def bisector(self):
        return 0.5 * (self.right + self.left)


@dataclass(frozen=True)
class StokesFan:
    """Directions tau_nu attached to Lambda(0) and an admissible eta.

    basic_taus holds tau_0 < ... < tau_{2 mu - 1} in (tau, tau + 2 pi) with
    tau = 3 pi/2 - eta; all other directions follow from
    tau_{nu + k mu} = tau_nu + k pi.
    """

    eta: float
    mu: int
    basic_taus: tuple

    @property
    def tau(self):
        return HALF3_PI - self.eta

    @property
    def degenerate(self):
        return self.mu == 0

    def tau_at(self, idx: int) -> float:
        if self.degenerate:
            raise ValueError("degenerate fan has no Stokes directions")
        nu, k = idx % self.mu, idx // self.mu
        return self.basic_taus[nu] + k * math.pi

    def sector(self, nu: int) -> Sector:
        """Canonical sector S_nu = S(tau_nu - pi, tau_{nu+1})."""
        if self.degenerate:
            return Sector(-math.inf, math.inf, kind="S_nu")
        return Sector(self.tau_at(nu) - math.pi, self.tau_at(nu + 1), kind="S_nu")

    def nu_of(self, tau_tilde: float) -> int:
        """The label nu with tau_nu < tau_tilde < tau_{nu+1}."""
        if self.degenerate:
            return 0
        k = math.floor((tau_tilde - self.basic_taus[0]) / math.pi)
        base = k * math.pi
        for j, tv in enumerate(self.basic_taus[: self.mu]):
            lo = tv + base
            nxt = self.tau_at(j + 1 + k * self.mu)
            if lo < tau_tilde < nxt:
                return j + k * self.mu
            if abs(tau_tilde - lo) <= ANGLE_TOL or abs(tau_tilde - nxt) <= ANGLE_TOL:
                raise NotAdmissible(f"tau_tilde = {tau_tilde} sits on a Stokes direction")
        # tau_tilde below the first basic direction of this sheet
        return k * self.mu - 1


def ray_direction(ua, ub) -> float:
    """Principal Stokes direction 3 pi/2 - arg_p(u_a - u_b) of the pair (a, b)."""
    d = to_complex(ua) - to_complex(ub)
    if d == 0:
        raise CoalescentPair("coincident eigenvalues have no Stokes ray")
    return HALF3_PI - arg_p(d)


def stokes_directions(system, t, window, pairs=None):
    """All Stokes ray directions of Lambda(t) in the half-open window (lo, hi].

    Directions are 3 pi/2 - arg_p(u_a - u_b) + 2 N pi, one entry per sheet
    copy, each tagged by its ordered pair.  Pairs coalescing at this t are
    skipped when enumerating all pairs, and raise CoalescentPair when
    requested explicitly.
    """
    lo, hi = window
    if not hi > lo:
        raise ValueError("empty angular window")
    u = [to_complex(x) for x in system.u(t)]
    u0 = [to_complex(x) for x in system.u0]
    explicit = pairs is not None
    if pairs is None:
        pairs = [(a, b) for a in range(system.n) for b in range(system.n) if a != b]
    out = []
    for a, b in pairs:
        if u[a] == u[b]:
            if explicit:
                raise CoalescentPair(f"pair {(a, b)} coalesces at t")
            continue
        base = ray_direction(u[a], u[b])
        n0 = math.ceil((lo - base) / TWO_PI)
        theta = base + n0 * TWO_PI
        if math.isclose(theta, lo, abs_tol=ANGLE_TOL):
            theta += TWO_PI
        while theta <= hi + ANGLE_TOL:
            out.append(Ray(theta, (a, b), splitting=(u0[a] != u0[b])))
            theta += TWO_PI
    out.sort(key=lambda r: (r.direction, r.pair))
    return out


def build_fan(system, eta, tol=ANGLE_TOL) -> StokesFan:
    """Fan of basic Stokes directions of Lambda(0) for an admissible eta.

    eta is admissible when it avoids arg_p(lambda_j - lambda_k) mod 2 pi for
    every pair of distinct eigenvalues of Lambda(0); the 2 mu distinct
    determinations in (eta - 2 pi, eta) give the basic directions.
    """
    lams = [to_complex(x) for x in system.distinct_u0()]
    s = len(lams)
    if s < 2:
        return StokesFan(float(eta), 0, ())
    values = []
    for j in range(s):
        for k in range(s):
            if j == k:
                continue
            a = arg_p(lams[j] - lams[k])
            # shift into (eta - 2 pi, eta)
            shift = math.floor((eta - a) / TWO_PI)
            v = a + shift * TWO_PI
            if abs(v - eta) <= tol or abs(v - (eta - TWO_PI)) <= tol:
                raise NotAdmissible(
                    f"eta = {eta} lies on the ray of the eigenvalue pair ({j}, {k})")
            values.append(v)
    values.sort(reverse=True)
    etas = []
    for v in values:
        if not etas or abs(etas[-1] - v) > tol:
            etas.append(v)
    if len(etas) % 2 != 0:
        raise NotAdmissible("odd number of ray determinations; eta too close to a ray")
    mu = len(etas) // 2
    taus = tuple(HALF3_PI - e for e in etas)
    for nu in range(mu):
        if abs(taus[nu + mu] - taus[nu] - math.pi) > 1e-9:
            raise NotAdmissible("ray directions do not pair up mod pi; eta too close to a ray")
    return StokesFan(float(eta), mu, taus)


def _sector_about(halfplane_right, halfplane_left, directions, kind):
    """Widen the closed half-plane to the nearest direction on either side."""
    below = [d for d in directions if d < halfplane_right - ANGLE_TOL]
    above = [d for d in directions if d > halfplane_left + ANGLE_TOL]
    if not below or not above:
        # directions repeat mod pi, so emptiness means there are none at all
        return Sector(-math.inf, math.inf, kind=kind)
    return Sector(max(below), min(above), kind=kind)


def build_sectors(system, t, tau_tilde, rs=(1, 2, 3), variant="S", tol=ANGLE_TOL):
    """Sectors S_r(t) (variant "S") or S-hat_r(t) (variant "S_hat").

    S_r(t) contains the closed half-plane [tau~ + (r-2) pi, tau~ + (r-1) pi]
    and extends to the nearest Stokes rays of Lambda(t) outside it; the hat
    variant only counts rays of pairs with u_a(0) != u_b(0).  Raises
    OnCrossingLocus when a ray of Lambda(t) sits on tau~ mod pi.
    """
    lo_window = tau_tilde + (min(rs) - 3) * math.pi - 0.5
    hi_window = tau_tilde + (max(rs)) * math.pi + 0.5
    rays = stokes_directions(system, t, (lo_window, hi_window))
    if variant == "S_hat":
        rays = [r for r in rays if r.splitting]
    elif variant != "S":
        raise ValueError("variant must be 'S' or 'S_hat'")
    dirs = [r.direction for r in rays]
    for d in dirs:
        k = round((d - tau_tilde) / math.pi)
        if abs(d - (tau_tilde + k * math.pi)) <= tol:
            raise OnCrossingLocus(
                f"a Stokes ray of Lambda(t) lies on the admissible direction (sheet {k})")
    out = {}
    for r in rs:
        right = tau_tilde + (r - 2) * math.pi
        left = tau_tilde + (r - 1) * math.pi
        kind = "S_nu(t)" if variant == "S" else "S_hat_nu(t)"
        out[r] = _sector_about(right, left, dirs, kind)
    return out


def dominance(system, pair, theta, t, tol=1e-14):
    """+1 when u_a dominates u_b along direction theta, -1 when dominated.

    Dominance means Re((u_a - u_b) rho e^{i theta}) > 0 for rho > 0, i.e.
    e^{u_a z} grows faster than e^{u_b z} along the ray.
    """
    a, b = pair
    u = [to_complex(x) for x in system.u(t)]
    d = u[a] - u[b]
    if d == 0:
        raise CoalescentPair(f"pair {pair} coalesces at t")
    v = (d * complex(math.cos(theta), math.sin(theta))).real
    if abs(v) <= tol * abs(d):
        raise OnStokesRay(f"direction {theta} is a Stokes ray of pair {pair}")
    return 1 if v > 0 else -1


def serialize_fan(fan: StokesFan) -> dict:
    return {
        "eta": f"{fan.eta:.16g}",
        "tau": f"{fan.tau:.16g}",
        "mu": fan.mu,
        "basic_taus": [f"{t:.16g}" for t in fan.basic_taus],
    }


def serialize_sector(sec: Sector) -> dict:
    return {
        "right": f"{sec.right:.16g}",
        "left": f"{sec.left:.16g}",
        "kind": sec.kind,
    }
