"""Cell decomposition of the deformation polydisc for a fixed admissible direction.

For linear unfolding u_a(t) = u_a(0) + t_a, the walls are real hyperplanes:
the crossing locus (a Stokes ray sits on the admissible line) and the
coalescence locus.  A cell is a connected component of the complement; it is
characterised exactly by the signs of the linear forms L_ab.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .core import to_complex
from .errors import (
    EndpointOnWall,
    MultiWall,
    OnWall,
    ResolutionTooCoarse,
)
from .geometry import HALF3_PI

WALL_TOL = 1e-12


@dataclass(frozen=True)
class CellSignature:
    tau_tilde: float
    pairs: tuple          # ordered (a, b), a < b
    signs: tuple          # +1 / -1 per pair

    def __str__(self):
        return "".join("+" if s > 0 else "-" for s in self.signs)


@dataclass(frozen=True)
class CrossingEvent:
    x: float              # global path parameter in [0, 1]
    pair: tuple
    wall: str             # "X", "X-nonlocal" or "Delta"
    direction: str        # "+->-", "-->+" or "touch"


def eta_tilde(tau_tilde: float) -> float:
    return HALF3_PI - tau_tilde


def _degenerate_form(et: float, tol=1e-9) -> bool:
    """True when eta~ = pi/2 mod pi, where the wall form is Re(u_a - u_b)."""
    return abs(math.cos(et)) <= tol


def wall_value(ua, ub, et: float) -> float:
    """The linear form L_ab locating the wall arg(u_a - u_b) = eta~ mod pi."""
    d = to_complex(ua) - to_complex(ub)
    if _degenerate_form(et):
        return d.real
    return d.imag - math.tan(et) * d.real


def tracked_pairs(system, include_nonlocal=False):
    """Pairs (a, b), a < b entering signatures: same-block unless asked otherwise."""
    owner = system.block_of()
    out = []
    for a in range(system.n):
        for b in range(a + 1, system.n):
            if include_nonlocal or owner[a] == owner[b]:
                out.append((a, b))
    return tuple(out)


def cell_signature(system, t, tau_tilde, tol=WALL_TOL, include_nonlocal=False):
    """Sign vector of the wall forms at t, or OnWall / MultiWall if t sits on one.

    Only unfolding pairs (u_a(0) = u_b(0)) are tracked by default; their
    rays are the only ones that can cross the admissible line inside the
    admissible polydisc.
    """
    et = eta_tilde(tau_tilde)
    pairs = tracked_pairs(system, include_nonlocal)
    u = system.u(t)
    scale = tol * (1.0 + max((abs(to_complex(x)) for x in t), default=0.0))
    hits = []
    signs = []
    for a, b in pairs:
        d = to_complex(u[a]) - to_complex(u[b])
        if abs(d) <= scale:
            hits.append(((a, b), "Delta"))
            signs.append(0)
            continue
        v = wall_value(u[a], u[b], et)
        if abs(v) <= scale * (1.0 + abs(math.tan(et)) if not _degenerate_form(et) else 1.0):
            hits.append(((a, b), "X"))
            signs.append(0)
        else:
            signs.append(1 if v > 0 else -1)
    if len(hits) >= 2:
        raise MultiWall(f"t lies on several walls: {hits}", pair=hits[0][0], kind="multi")
    if hits:
        (pair, kind), = hits
        raise OnWall(f"t lies on the {kind} wall of pair {pair}", pair=pair, kind=kind)
    return CellSignature(float(tau_tilde), pairs, tuple(signs))


def _bisect_sign_change(f, x0, x1, f0, f1, tol):
    while x1 - x0 > tol:
        xm = 0.5 * (x0 + x1)
        fm = f(xm)
        if fm == 0.0:
            return xm
        if (f0 > 0) != (fm > 0):
            x1, f1 = xm, fm
        else:
            x0, f0 = xm, fm
    return 0.5 * (x0 + x1)


def detect_crossings(system, path, tau_tilde, tol=1e-10):
    """All wall crossings along a piecewise-linear path t(x), x in [0, 1].

    Tracks the sign of every L_ab (same-block pairs as "X" walls, other
    pairs as "X-nonlocal") and coalescences u_a = u_b ("Delta").  Endpoints
    on a wall raise EndpointOnWall.
    """
    waypoints = [list(p) for p in path]
    if len(waypoints) < 2:
        return []
    et = eta_tilde(tau_tilde)
    owner = system.block_of()
    pairs = [(a, b) for a in range(system.n) for b in range(a + 1, system.n)]
    for label, t in (("start", waypoints[0]), ("end", waypoints[-1])):
        try:
            cell_signature(system, t, tau_tilde, include_nonlocal=True)
        except OnWall as exc:
            raise EndpointOnWall(f"path {label} point lies on a wall: {exc}") from exc

    nseg = len(waypoints) - 1
    events = []
    for i in range(nseg):
        t0 = np.array([to_complex(x) for x in waypoints[i]])
        t1 = np.array([to_complex(x) for x in waypoints[i + 1]])

        def t_of(x):
            return t0 + x * (t1 - t0)

        for a, b in pairs:
            kind = "X" if owner[a] == owner[b] else "X-nonlocal"

            def f(x, a=a, b=b):
                u = system.u(t_of(x))
                return wall_value(u[a], u[b], et)

            f0, f1 = f(0.0), f(1.0)
            if f0 == 0.0 or f1 == 0.0 or (f0 > 0) != (f1 > 0):
                xs = _bisect_sign_change(f, 0.0, 1.0, f0, f1, tol)
                direction = "+->-" if f0 > 0 else "-->+"
                events.append(CrossingEvent((i + xs) / nseg, (a, b), kind, direction))

            # coalescence: |u_a - u_b|^2 is quadratic in x on the segment
            u0 = system.u(t0)
            u1 = system.u(t1)
            d0 = to_complex(u0[a]) - to_complex(u0[b])
            d1 = to_complex(u1[a]) - to_complex(u1[b])
            dd = d1 - d0
            denom = abs(dd) ** 2
            xm = 0.5 if denom == 0 else min(1.0, max(0.0, -(d0.real * dd.real + d0.imag * dd.imag) / denom))
            if abs(d0 + xm * dd) <= tol:
                events.append(CrossingEvent((i + xm) / nseg, (a, b), "Delta", "touch"))
    events.sort(key=lambda e: (e.x, e.pair))
    return events


# -- exact region count for one complex parameter --------------------------------


@dataclass(frozen=True)
class _Line:
    """alpha * Re(c) + beta * Im(c) + gamma = 0 in the slice plane."""

    alpha: float
    beta: float
    gamma: float
    pair: tuple

    def value(self, c: complex) -> float:
        return self.alpha * c.real + self.beta * c.imag + self.gamma

    def direction(self):
        n = math.hypot(self.alpha, self.beta)
        return (-self.beta / n, self.alpha / n)


def _slice_lines(system, tau_tilde, slice_map, include_nonlocal):
    """Wall lines in the slice plane c -> t (slice_map must be real-linear)."""
    et = eta_tilde(tau_tilde)
    pairs = tracked_pairs(system, include_nonlocal)
    lines = []
    for a, b in pairs:
        # L is real-linear in c: recover coefficients from three evaluations
        def L(c):
            u = system.u(slice_map(c))
            return wall_value(u[a], u[b], et)

        g = L(0.0)
        al = L(1.0) - g
        be = L(1.0j) - g
        if abs(al) < 1e-15 and abs(be) < 1e-15:
            continue  # wall not visible in this slice
        lines.append(_Line(al, be, g, (a, b)))
    return lines


def _dedupe_lines(lines, tol=1e-10):
    uniq = []
    for ln in lines:
        n = math.hypot(ln.alpha, ln.beta)
        key = (ln.alpha / n, ln.beta / n, ln.gamma / n)
        found = False
        for kn in uniq:
            # same line up to overall sign
            if (abs(key[0] - kn[0]) < tol and abs(key[1] - kn[1]) < tol and abs(key[2] - kn[2]) < tol) or (
                abs(key[0] + kn[0]) < tol and abs(key[1] + kn[1]) < tol and abs(key[2] + kn[2]) < tol
            ):
                found = True
                break
        if not found:
            uniq.append(key)
    return [_Line(a, b, g, ()) for a, b, g in uniq]


def _disc_chord(line, radius):
    """Endpoints of the line's chord inside |c| < radius, or None."""
    n2 = line.alpha**2 + line.beta**2
    # foot of the perpendicular from the origin
    f = -line.gamma / n2
    px, py = f * line.alpha, f * line.beta
    d2 = px * px + py * py
    if d2 >= radius * radius:
        return None
    h = math.sqrt(radius * radius - d2)
    dx, dy = line.direction()
    return (complex(px - h * dx, py - h * dy), complex(px + h * dx, py + h * dy))


def _count_regions_in_disc(lines, radius):
    """Incremental count: each new line adds (interior intersections) + 1."""
    count = 1
    placed = []
    for ln in lines:
        chord = _disc_chord(ln, radius)
        if chord is None:
            continue
        pts = []
        for other in placed:
            den = ln.alpha * other.beta - ln.beta * other.alpha
            if abs(den) < 1e-14:
                continue
            x = (-ln.gamma * other.beta + other.gamma * ln.beta) / den
            y = (-ln.alpha * other.gamma + other.alpha * ln.gamma) / den
            if x * x + y * y < radius * radius * (1 - 1e-12):
                pts.append((x, y))
        distinct = []
        for p in pts:
            if all(math.hypot(p[0] - q[0], p[1] - q[1]) > 1e-12 for q in distinct):
                distinct.append(p)
        count += len(distinct) + 1
        placed.append(ln)
    return count


def enumerate_cells(system, tau_tilde, epsilon0, resolution=48, slice_map=None,
                    include_nonlocal=None, rng_seed=0):
    """Count the tau~-cells of the polydisc and return one representative each.

    With ``slice_map`` (a real-linear embedding c -> t of one complex
    parameter) the count is exact via the line arrangement in the slice
    plane.  Without it, systems with n <= 2 effective parameters are probed
    on a grid and larger ones by seeded Monte-Carlo; those results carry
    ``exact=False``.  ``include_nonlocal`` defaults to True exactly when
    epsilon0 exceeds the admissible radius bound, where splitting rays may
    also cross the admissible line.
    """
    if include_nonlocal is None:
        bound, _ = radius_bound(system, tau_tilde)
        include_nonlocal = epsilon0 > bound

    if slice_map is None and system.n == 1:
        slice_map = lambda c: [c]

    reps = {}
    if slice_map is not None:
        lines = _slice_lines(system, tau_tilde, slice_map, include_nonlocal)
        uniq = _dedupe_lines(lines)
        count = _count_regions_in_disc(uniq, epsilon0)
        # representatives: sample candidate points, dedupe by signature
        candidates = [0.35 * epsilon0 + 0.0j, -0.27 * epsilon0 + 0.11j * epsilon0]
        for k in range(resolution):
            ang = 2 * math.pi * (k + 0.37) / resolution
            for rad in (0.25, 0.55, 0.85):
                candidates.append(rad * epsilon0 * cmath.exp(1j * ang))
        for ln in uniq:
            chord = _disc_chord(ln, epsilon0)
            if chord is None:
                continue
            c0, c1 = chord
            nrm = math.hypot(ln.alpha, ln.beta)
            normal = complex(ln.alpha / nrm, ln.beta / nrm)
            for frac in (0.2, 0.5, 0.8):
                base = c0 + frac * (c1 - c0)
                for off in (1, -1):
                    candidates.append(base + off * 0.02 * epsilon0 * normal)
        for c in candidates:
            if abs(c) >= epsilon0:
                continue
            try:
                sig = cell_signature(system, slice_map(c), tau_tilde,
                                     include_nonlocal=include_nonlocal)
            except OnWall:
                continue
            reps.setdefault((sig.pairs, sig.signs), slice_map(c))
        if len(reps) != count:
            raise ResolutionTooCoarse(
                f"found {len(reps)} signatures for {count} regions; raise resolution")
        return {"count": count, "representatives": reps, "exact": True}

    # sampled probing in the full parameter space
    rng = np.random.default_rng(rng_seed)
    n_samples = resolution ** 2 if system.n <= 2 else resolution ** 2 * 4
    for _ in range(n_samples):
        c = rng.uniform(-1, 1, size=2 * system.n)
        t = [epsilon0 * complex(c[2 * i], c[2 * i + 1]) / math.sqrt(2) for i in range(system.n)]
        if max(abs(x) for x in t) >= epsilon0:
            continue
        try:
            sig = cell_signature(system, t, tau_tilde, include_nonlocal=include_nonlocal)
        except OnWall:
            continue
        reps.setdefault((sig.pairs, sig.signs), t)
    return {"count": len(reps), "representatives": reps, "exact": False}


def radius_bound(system, tau_tilde):
    """Largest admissible polydisc radius for this tau~, with a validity flag.

    Returns (epsilon0_max, flag); flag is "ok", "degenerate" (one distinct
    eigenvalue: bound is infinite) or "not-admissible" (the admissible line
    passes through two eigenvalues of Lambda(0): bound is zero).
    """
    lams = [to_complex(x) for x in system.distinct_u0()]
    if len(lams) < 2:
        return math.inf, "degenerate"
    et = eta_tilde(tau_tilde)
    e = cmath.exp(-1j * et)
    best = math.inf
    for j in range(len(lams)):
        for k in range(j + 1, len(lams)):
            # distance from lambda_k - lambda_j to the line of direction eta~
            d = 0.5 * abs(((lams[k] - lams[j]) * e).imag)
            best = min(best, d)
    if best <= 1e-14:
        return 0.0, "not-admissible"
    return best, "ok"
