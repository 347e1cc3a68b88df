"""Formal solutions at z = infinity: coefficient recursions and vanishing checks.

Away from the coalescence locus the gauge recursion determines the
coefficients F_k(t) of Y_F = (I + sum F_k z^{-k}) z^{B1} e^{Lambda z}
uniquely; the recursion is rational in the inputs, so it runs over floats,
Gaussian rationals, or rational functions of an unfolding parameter alike.
At a coalescence point the same recursion, restricted blockwise, yields the
frozen coefficients when the vanishing conditions hold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import (
    GaussRational,
    Matrix,
    RatFunc,
    scalar_is_zero,
    scalar_zero,
    to_complex,
)
from .errors import AtCoalescence, NotOnDelta, VanishingConditionsFail

FLOAT_TOL = 1e-12


@dataclass
class FormalSolution:
    """Coefficients F_1..F_K of the unique formal solution at t."""

    t: tuple
    u: tuple                 # eigenvalues u(t), kept for evaluation at infinity
    K: int
    F: list                  # list of Matrix, F[k-1] = F_k
    B1: Matrix               # diag(A1(t))
    mode: str                # "float" | "exact"
    frozen: bool = False
    unique: bool = True
    free_entries: list = field(default_factory=list)

    def as_numpy(self):
        import numpy as np
        return [f.to_numpy() for f in self.F], np.diag(self.B1.to_numpy())


def _coeffs_up_to(system, t, kmax):
    """A_1(t)..A_kmax(t) as Matrix, absent coefficients as None."""
    return [system.a_hat(k, t) for k in range(1, kmax + 1)]


def _is_zero(x, tol):
    return scalar_is_zero(x, tol)


def _rhs_offdiag(a, b, l, F, A, n):
    """The braced expression of the level-l off-diagonal relation.

    [ (A1)_aa - (A1)_bb + l - 1 ] (F_{l-1})_ab
      + sum_{g != a} (A1)_ag (F_{l-1})_gb
      + sum_{j=1}^{l-2} (A_{l-j} F_j)_ab + (A_l)_ab
    """
    A1 = A[0]
    acc = (A1[a, a] - A1[b, b] + (l - 1)) * F[l - 2][a, b]
    for g in range(n):
        if g != a:
            acc = acc + A1[a, g] * F[l - 2][g, b]
    for j in range(1, l - 1):
        Alj = A[l - j - 1]
        if Alj is None:
            continue
        s = scalar_zero(acc)
        for g in range(n):
            s = s + Alj[a, g] * F[j - 1][g, b]
        acc = acc + s
    if A[l - 1] is not None:
        acc = acc + A[l - 1][a, b]
    return acc


def _diag_entry(a, l, F, A, n):
    """(F_l)_aa from l (F_l)_aa = - sum_{b!=a}(A1)_ab (F_l)_ba
    - sum_{j=1}^{l-1}(A_{l+1-j} F_j)_aa - (A_{l+1})_aa."""
    A1 = A[0]
    acc = scalar_zero(A1[a, a])
    for b in range(n):
        if b != a:
            acc = acc + A1[a, b] * F[l - 1][b, a]
    for j in range(1, l):
        Aj = A[l - j]          # A_{l+1-j}
        if Aj is None:
            continue
        for g in range(n):
            acc = acc + Aj[a, g] * F[j - 1][g, a]
    if A[l] is not None:
        acc = acc + A[l][a, a]
    return (-acc) / l


def formal_coefficients(system, t, K, mode="float", tol=FLOAT_TOL) -> FormalSolution:
    """F_1..F_K of the formal solution at a point t off the coalescence locus.

    mode "exact" requires Gaussian-rational t and coefficients; the result
    is then exact.  Raises AtCoalescence when two eigenvalues coincide at t.
    """
    n = system.n
    u = system.u(t)
    for a in range(n):
        for b in range(a + 1, n):
            d = u[a] - u[b]
            scale = 0.0 if mode == "exact" else \
                tol * (1 + abs(to_complex(u[a])) + abs(to_complex(u[b])))
            if _is_zero(d, scale):
                raise AtCoalescence(f"u_{a}(t) = u_{b}(t); use frozen_formal at points of Delta")
    A = _coeffs_up_to(system, t, K + 1)
    if A[0] is None:
        A[0] = Matrix.zeros(n, n, like=u[0])
    like = A[0][0, 0]
    F = []
    for l in range(1, K + 1):
        Fl = Matrix.zeros(n, n, like=like)
        if l == 1:
            for a in range(n):
                for b in range(n):
                    if a != b:
                        Fl[a, b] = -A[0][a, b] / (u[a] - u[b])
        else:
            for a in range(n):
                for b in range(n):
                    if a != b:
                        Fl[a, b] = -_rhs_offdiag(a, b, l, F + [None], A, n) / (u[a] - u[b])
        F.append(Fl)
        for a in range(n):
            Fl[a, a] = _diag_entry(a, l, F, A, n)
    B1 = Matrix.diag([A[0][a, a] for a in range(n)])
    return FormalSolution(tuple(t), tuple(u), K, F, B1, mode)


# -- vanishing-condition diagnostics ------------------------------------------------


@dataclass
class CheckEntry:
    kind: str                # "entry" or "obstruction"
    pair: tuple
    level: int               # 0 for entry checks, else l >= 2
    residual: object         # scalar (exact or complex) or None when divergent
    resonant: bool = False
    passed: bool = True


@dataclass
class VanishingReport:
    t_delta: tuple
    groups: list             # coalescence groups at t_delta (index tuples)
    checks: list
    verdict: str             # "HolomorphicAtDelta" or "Fails"

    @property
    def failed(self):
        return [c for c in self.checks if not c.passed]


def coalescence_groups(system, t_delta, tol=1e-12):
    """Partition of indices by equal eigenvalue at t_delta."""
    u = [to_complex(x) for x in system.u(t_delta)]
    groups = []
    for a in range(system.n):
        for g in groups:
            if abs(u[g[0]] - u[a]) <= tol * (1 + abs(u[a])):
                g.append(a)
                break
        else:
            groups.append([a])
    return [tuple(g) for g in groups]


def _unfolding_direction(system, t_delta, groups, mode):
    """A direction v with v_a != v_b for every coalescing pair."""
    if mode == "exact":
        return [GaussRational(a + 1) for a in range(system.n)]
    return [complex(a + 1) for a in range(system.n)]


def vanishing_report(system, t_delta, L, mode="float", direction=None,
                     tol=1e-7) -> VanishingReport:
    """Check whether the F_k(t) stay holomorphic as t approaches t_delta.

    Entry checks: (A1(t_delta))_ab = 0 for every coalescing pair.
    Level-l checks (2 <= l <= L): the limit, along a radial unfolding
    t = t_delta + eps * v, of the level-l recursion numerator for every
    coalescing pair must vanish; in exact mode the limit is taken with
    rational-function arithmetic in eps and is exact.  In float mode the
    limit is a third-order Richardson estimate and ``tol`` bounds both it
    and the resonance detection.
    """
    groups = coalescence_groups(system, t_delta)
    pairs = [(a, b) for g in groups for a in g for b in g if a != b]
    if not pairs:
        raise NotOnDelta("no coalescing eigenvalue pair at t_delta")
    if L < 1:
        raise ValueError("L must be >= 1")

    checks = []
    A1 = system.a_hat(1, t_delta)
    if A1 is None:
        A1 = Matrix.zeros(system.n, system.n, like=system.u(t_delta)[0])
    exact = mode == "exact"
    for a, b in pairs:
        v = A1[a, b]
        ok = scalar_is_zero(v, 0.0 if exact else tol)
        checks.append(CheckEntry("entry", (a, b), 0, v, passed=ok))

    if L >= 2:
        if direction is None:
            direction = _unfolding_direction(system, t_delta, groups, mode)
        if exact:
            eps = RatFunc.variable()
            t_eps = [RatFunc.constant(td) + eps * RatFunc.constant(dv)
                     for td, dv in zip(t_delta, direction)]
            sol = formal_coefficients(system, t_eps, L - 1, mode="exact")
            A = _coeffs_up_to(system, t_eps, L)
            n = system.n
            for l in range(2, L + 1):
                for a, b in pairs:
                    expr = _rhs_offdiag(a, b, l, sol.F + [None], A, n)
                    lim = expr.limit0()
                    res = (A1[a, a] - A1[b, b] + (l - 1))
                    checks.append(CheckEntry(
                        "obstruction", (a, b), l,
                        lim, resonant=scalar_is_zero(res, 0.0),
                        passed=(lim is not None and not bool(lim))))
        else:
            n = system.n
            vals = {}
            eps0 = 5e-4
            for eps in (eps0, eps0 / 2, eps0 / 4):
                t_eps = [to_complex(td) + eps * dv for td, dv in zip(t_delta, direction)]
                sol = formal_coefficients(system, t_eps, L - 1, mode="float")
                A = _coeffs_up_to(system, t_eps, L)
                for l in range(2, L + 1):
                    for a, b in pairs:
                        vals.setdefault((l, a, b), []).append(
                            _rhs_offdiag(a, b, l, sol.F + [None], A, n))
            for (l, a, b), (v1, v2, v3) in vals.items():
                # third-order Richardson for f(eps) = lim + c1 eps + c2 eps^2;
                # divergence shows as |f| doubling under eps -> eps/2
                lim = (8 * v3 - 6 * v2 + v1) / 3
                divergent = abs(v3) > 1.6 * abs(v2) + tol and abs(v3) > 10 * tol
                res = to_complex(A1[a, a] - A1[b, b]) + (l - 1)
                checks.append(CheckEntry(
                    "obstruction", (a, b), l,
                    None if divergent else lim,
                    resonant=abs(res) <= tol,
                    passed=(not divergent) and abs(lim) <= tol))

    verdict = "HolomorphicAtDelta" if all(c.passed for c in checks) else "Fails"
    return VanishingReport(tuple(t_delta), groups, checks, verdict)


# -- frozen formal solutions at a coalescence point -----------------------------------


def frozen_formal(system, t_delta, K, mode="float", tol=1e-9,
                  resonance_tol=1e-9) -> FormalSolution:
    """Formal solution of the system frozen at t_delta (a point of Delta).

    Requires the frozen vanishing conditions: (A1)_ab(t_delta) = 0 for
    coalescing pairs and, at every integer resonance of diag(A1) within a
    group, the corresponding obstruction sum = 0.  Resonant free entries
    are fixed to zero and recorded in ``free_entries``; ``unique`` is False
    when any resonance occurs within a coalescence group.
    """
    n = system.n
    groups = coalescence_groups(system, t_delta)
    if all(len(g) == 1 for g in groups):
        raise NotOnDelta("t_delta is not a coalescence point; use formal_coefficients")
    group_of = {}
    for gi, g in enumerate(groups):
        for a in g:
            group_of[a] = gi
    u = system.u(t_delta)
    exact = mode == "exact"
    ztol = 0.0 if exact else tol

    A = _coeffs_up_to(system, t_delta, K + 2)
    if A[0] is None:
        A[0] = Matrix.zeros(n, n, like=u[0])
    A1 = A[0]
    for gi, g in enumerate(groups):
        for a in g:
            for b in g:
                if a != b and not scalar_is_zero(A1[a, b], ztol):
                    raise VanishingConditionsFail(
                        f"(A1)_{a}{b}(t_delta) = {A1[a, b]} != 0 on the coalescing pair")

    like = A1[0, 0]
    # resonance levels within groups: (A1)_aa - (A1)_bb + l - 1 = 0
    def resonance(a, b, l):
        r = A1[a, a] - A1[b, b] + (l - 1)
        return scalar_is_zero(r, resonance_tol if not exact else 0.0), r

    unique = True
    for g in groups:
        if len(g) < 2:
            continue
        for a in g:
            for b in g:
                if a == b:
                    continue
                d = to_complex(A1[b, b]) - to_complex(A1[a, a])
                if abs(d.imag) <= resonance_tol and abs(d.real - round(d.real)) <= resonance_tol \
                        and round(d.real) > 0:
                    unique = False

    F = []
    free = []
    # level l relations: same-group relations complete F_{l-1}; cross-group
    # relations then determine F_l.
    for l in range(1, K + 2):
        if l >= 2:
            Fprev = F[l - 2]
            for g in groups:
                for a in g:
                    for b in g:
                        if a == b:
                            continue
                        res_zero, res = resonance(a, b, l)
                        rhs = scalar_zero(like)
                        for c in range(n):
                            if group_of[c] != group_of[a]:
                                rhs = rhs + A1[a, c] * Fprev[c, b]
                        for j in range(1, l - 1):
                            Alj = A[l - j - 1]
                            if Alj is None:
                                continue
                            for c in range(n):
                                rhs = rhs + Alj[a, c] * F[j - 1][c, b]
                        if A[l - 1] is not None:
                            rhs = rhs + A[l - 1][a, b]
                        if res_zero:
                            if not scalar_is_zero(rhs, ztol):
                                raise VanishingConditionsFail(
                                    f"level-{l} obstruction at entry {(a, b)}: {rhs} != 0")
                            Fprev[a, b] = scalar_zero(like)
                            free.append((l - 1, a, b))
                        else:
                            Fprev[a, b] = -rhs / res
                for a in g:
                    Fprev[a, a] = _diag_entry(a, l - 1, F, A, n)
        if l <= K:
            Fl = Matrix.zeros(n, n, like=like)
            for a in range(n):
                for b in range(n):
                    if group_of[a] == group_of[b]:
                        continue
                    if l == 1:
                        Fl[a, b] = -A1[a, b] / (u[a] - u[b])
                    else:
                        Fl[a, b] = -_rhs_offdiag(a, b, l, F + [None], A, n) / (u[a] - u[b])
            F.append(Fl)

    B1 = Matrix.diag([A1[a, a] for a in range(n)])
    return FormalSolution(tuple(t_delta), tuple(u), K, F, B1, mode,
                          frozen=True, unique=unique, free_entries=free)


def recursion_residual(system, sol: FormalSolution):
    """Max violation of the level-l relations by the computed coefficients.

    Exact modes return the max |.| of exact residuals (0.0 when all vanish);
    the float mode returns a float.  Independent restatement of the
    recursion used by the property tests.
    """
    n = system.n
    u = sol.u
    A = _coeffs_up_to(system, sol.t, sol.K + 1)
    if A[0] is None:
        A[0] = Matrix.zeros(n, n, like=u[0])
    worst = 0.0
    for l in range(1, sol.K + 1):
        for a in range(n):
            for b in range(n):
                if a == b:
                    continue
                if sol.frozen and scalar_is_zero(u[a] - u[b], 1e-12):
                    continue
                if l == 1:
                    r = (u[a] - u[b]) * sol.F[0][a, b] + A[0][a, b]
                else:
                    r = (u[a] - u[b]) * sol.F[l - 1][a, b] \
                        + _rhs_offdiag(a, b, l, sol.F + [None], A, n)
                worst = max(worst, abs(to_complex(r)))
    return worst
