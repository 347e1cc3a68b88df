"""The 3x3 skew-symmetric reduction and its algebraic Painleve VI solution.

The one-parameter family dOmega1/dt = Omega2 Omega3 / t, dOmega2/dt =
Omega1 Omega3 / (1 - t), dOmega3/dt = Omega1 Omega2 / (t (t - 1)) is
equivalent to PVI with parameter mu; the branch attached to the 4-element
Coxeter case (mu = -1/4) is algebraic, with an exact rational Taylor series
at t = 0 computed here by exact series reversion.  The frozen system at
t = 0 integrates in Hankel functions of order 3/4, giving the Stokes
matrices in closed form.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp
import numpy as np
from scipy.integrate import solve_ivp

from .errors import (BranchUnspecified, GridSingular, OutOfRadius,
                     SingularConfiguration)

MU_A3 = -0.25
A3_RADIUS = 0.2


# -- exact power-series helpers over Fraction ------------------------------------


def _poly_shift(coeffs, s0: Fraction):
    """Coefficients of p(s0 + x) given those of p(x), by synthetic division."""
    out = [Fraction(c) for c in coeffs]
    n = len(out)
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            out[j] += s0 * out[j + 1]
    return out


def _series_mul(a, b, order):
    out = [Fraction(0)] * (order + 1)
    for i, x in enumerate(a[: order + 1]):
        if not x:
            continue
        for j, y in enumerate(b[: order + 1 - i]):
            out[i + j] += x * y
    return out


def _series_div(a, b, order):
    """a / b as a power series; b[0] must be nonzero."""
    if not b[0]:
        raise ZeroDivisionError("series division by a series of positive valuation")
    inv_b0 = Fraction(1) / b[0]
    out = []
    for k in range(order + 1):
        acc = a[k] if k < len(a) else Fraction(0)
        for j in range(1, k + 1):
            if j < len(b) and b[j]:
                acc -= b[j] * out[k - j]
        out.append(acc * inv_b0)
    return out


def _series_compose(a, b, order):
    """a(b(x)) with b of positive valuation."""
    if b[0]:
        raise ValueError("composition needs a series of positive valuation")
    out = [Fraction(0)] * (order + 1)
    power = [Fraction(1)] + [Fraction(0)] * order
    for k, ak in enumerate(a[: order + 1]):
        if k > 0:
            power = _series_mul(power, b, order)
        if ak:
            for i, p in enumerate(power):
                out[i] += ak * p
    return out


def _series_reversion(a, order):
    """sigma(t) with a(sigma(t)) = t, for a of valuation 1 (a[1] != 0)."""
    if a[0] or not a[1]:
        raise ValueError("reversion needs valuation exactly 1")
    sigma = [Fraction(0), Fraction(1) / a[1]]
    for k in range(2, order + 1):
        comp = _series_compose(a, sigma + [Fraction(0)], k)
        # comp = t + c_k t^k + ...; cancel c_k with the next sigma coefficient
        sigma.append(-comp[k] / a[1])
    return sigma


def _poly_expand(factors):
    """Product of polynomials given as coefficient lists (ascending)."""
    out = [Fraction(1)]
    for f in factors:
        res = [Fraction(0)] * (len(out) + len(f) - 1)
        for i, x in enumerate(out):
            for j, y in enumerate(f):
                res[i + j] += x * y
        out = res
    return out


def a3_taylor(n_terms=12):
    """Exact Taylor coefficients c_1..c_n of the algebraic branch y(t) at t = 0.

    Obtained by shifting the parametric forms to s = -1/3, series-dividing,
    reverting t(s) and composing.  All arithmetic is exact over Q.
    """
    order = n_terms + 2
    s0 = Fraction(-1, 3)
    one, three = Fraction(1), Fraction(3)
    # y(s) = (1-s)^2 (1+3s) (9s^2-5)^2 / ((1+s)(243 s^6 + 1539 s^4 - 207 s^2 + 25))
    num_y = _poly_expand([[one, -one], [one, -one], [one, three],
                          [Fraction(-5), Fraction(0), Fraction(9)],
                          [Fraction(-5), Fraction(0), Fraction(9)]])
    den_y = _poly_expand([[one, one],
                          [Fraction(25), Fraction(0), Fraction(-207), Fraction(0),
                           Fraction(1539), Fraction(0), Fraction(243)]])
    # t(s) = (1-s)^3 (1+3s) / ((1+s)^3 (1-3s))
    num_t = _poly_expand([[one, -one]] * 3 + [[one, three]])
    den_t = _poly_expand([[one, one]] * 3 + [[one, -three]])

    ys = _series_div(_poly_shift(num_y, s0), _poly_shift(den_y, s0), order)
    ts = _series_div(_poly_shift(num_t, s0), _poly_shift(den_t, s0), order)
    sigma = _series_reversion(ts, order)
    y_of_t = _series_compose(ys, sigma, order)
    assert y_of_t[0] == 0
    return y_of_t[1: n_terms + 1]


_A3_COEFFS_CACHE = {}


def _a3_coeffs(n_terms=30):
    if n_terms not in _A3_COEFFS_CACHE:
        _A3_COEFFS_CACHE[n_terms] = a3_taylor(n_terms)
    return _A3_COEFFS_CACHE[n_terms]


def a3_branch(t, n_terms=30):
    """(y, y') of the algebraic branch near t = 0, from the exact series.

    Valid for |t| <= 0.2 (raises OutOfRadius beyond)."""
    if abs(t) > A3_RADIUS:
        raise OutOfRadius(f"|t| = {abs(t)} exceeds the working radius {A3_RADIUS}")
    coeffs = [complex(Fraction(c)) for c in _a3_coeffs(n_terms)]
    y = 0.0 + 0.0j
    dy = 0.0 + 0.0j
    for k in range(len(coeffs), 0, -1):
        c = coeffs[k - 1]
        y = y * t + c
        dy = dy * t + k * c
    y *= t
    return y, dy


def a3_parametric(s):
    """(y, t) of the algebraic solution in its rational parametrization."""
    s = complex(s)
    num_y = (1 - s) ** 2 * (1 + 3 * s) * (9 * s * s - 5) ** 2
    den_y = (1 + s) * (243 * s**6 + 1539 * s**4 - 207 * s**2 + 25)
    num_t = (1 - s) ** 3 * (1 + 3 * s)
    den_t = (1 + s) ** 3 * (1 - 3 * s)
    return num_y / den_y, num_t / den_t


# -- Omega triple and the skew matrix ------------------------------------------------


@dataclass
class PainleveState:
    t: complex
    y: complex
    dy: complex
    mu: complex
    A_aux: complex
    Omega: tuple
    branch: tuple

    @property
    def V(self):
        O1, O2, O3 = self.Omega
        return np.array([[0, O2, -O3], [-O2, 0, O1], [O3, -O1, 0]], dtype=complex)


def omegas_from_y(y, dy, t, mu=MU_A3, branch=(0, 0)) -> PainleveState:
    """The triple (Omega1, Omega2, Omega3) from a PVI solution value.

    Principal square roots; the two branch bits flip (Omega2, Omega3) and
    (Omega1, Omega3) respectively, covering the allowed even sign changes.
    """
    y, dy, t = complex(y), complex(dy), complex(t)
    if t in (0.0, 1.0) or y in (0.0, 1.0) or y == t:
        raise SingularConfiguration("y in {0, 1, t} or t in {0, 1}")
    A = 0.5 * (dy * t * (t - 1) - y * (y - 1))
    sy = cmath.sqrt(y)
    sy1 = cmath.sqrt(y - 1)
    syt = cmath.sqrt(y - t)
    st = cmath.sqrt(t)
    st1 = cmath.sqrt(1 - t)
    O1 = 1j * sy1 * syt / st * (A / ((y - 1) * (y - t)) + mu)
    O2 = 1j * sy * syt / st1 * (A / (y * (y - t)) + mu)
    O3 = -sy * sy1 / (st * st1) * (A / (y * (y - 1)) + mu)
    if branch[0]:
        O2, O3 = -O2, -O3
    if branch[1]:
        O1, O3 = -O1, -O3
    return PainleveState(t, y, dy, mu, A, (O1, O2, O3), tuple(branch))


def a3_state(t, branch=(0, 0)) -> PainleveState:
    y, dy = a3_branch(t)
    return omegas_from_y(y, dy, t, MU_A3, branch)


def _series_sqrt_gauss(S, order):
    """Square root of a GaussRational power series with S[0] a perfect square.

    S[0] must be +-(p/q)^2 or +-(p/q)^2 * i^2-free, i.e. its square root must
    again be Gaussian rational (the A3 combinations are arranged that way).
    Newton iteration x -> (x + S/x)/2 in truncated series arithmetic.
    """
    from .core import GaussRational

    c0 = S[0]
    # sqrt of a real-rational leading term: positive -> +r, negative -> +i r
    if c0.im != 0:
        raise ValueError("series sqrt leading term must be real rational")
    mag = Fraction(abs(c0.re))
    r = Fraction(math.isqrt(mag.numerator), math.isqrt(mag.denominator))
    if r * r != mag:
        raise ValueError("series sqrt needs a perfect-square leading term")
    x0 = GaussRational(r, 0) if c0.re > 0 else GaussRational(0, r)

    def mul(a, b):
        out = [GaussRational(0)] * (order + 1)
        for i, xa in enumerate(a[: order + 1]):
            if not xa:
                continue
            for j, xb in enumerate(b[: order + 1 - i]):
                out[i + j] = out[i + j] + xa * xb
        return out

    def div(a, b):
        inv0 = GaussRational(1) / b[0]
        out = []
        for k in range(order + 1):
            acc = a[k] if k < len(a) else GaussRational(0)
            for j in range(1, k + 1):
                if j < len(b) and b[j]:
                    acc = acc - b[j] * out[k - j]
            out.append(acc * inv0)
        return out

    x = [x0] + [GaussRational(0)] * order
    half = GaussRational(Fraction(1, 2))
    for _ in range(order.bit_length() + 2):
        x = [(a + b) * half for a, b in zip(x, div(S, x))]
    return x


def a3_omega_series(n_terms=6):
    """Exact Taylor series of (Omega1/(i sqrt2), Omega2, Omega3/(i sqrt2)).

    All three normalized components have Gaussian-rational coefficients;
    the signs follow the principal branch on 0 < t < 1.
    """
    from .core import GaussRational

    order = n_terms + 2
    y = [Fraction(0)] + _a3_coeffs(order)              # y(t), exact
    yp = [Fraction(k) * y[k] for k in range(1, len(y))] + [Fraction(0)]

    def g(x):
        return GaussRational(x)

    def mul(a, b):
        out = [GaussRational(0)] * (order + 1)
        for i, xa in enumerate(a[: order + 1]):
            if not xa:
                continue
            for j, xb in enumerate(b[: order + 1 - i]):
                out[i + j] = out[i + j] + xa * xb
        return out

    def div(a, b):
        # valuation-aware: strip the common zero of order val(b) first
        vb = next(k for k, c in enumerate(b) if c)
        if vb:
            assert all(not c for c in a[:vb]), "quotient is not a power series"
            a = a[vb:] + [GaussRational(0)] * vb
            b = b[vb:] + [GaussRational(0)] * vb
        inv0 = GaussRational(1) / b[0]
        out = []
        for k in range(order + 1):
            acc = a[k] if k < len(a) else GaussRational(0)
            for j in range(1, k + 1):
                if j < len(b) and b[j]:
                    acc = acc - b[j] * out[k - j]
            out.append(acc * inv0)
        return out

    def add(a, b):
        return [x + y for x, y in zip(a, b)]

    def scal(c, a):
        return [c * x for x in a]

    pad = lambda c: [g(x) for x in c[: order + 1]] + [g(0)] * max(0, order + 1 - len(c))
    Y = pad(y)
    Yp = pad(yp)
    one = pad([Fraction(1)])
    tser = pad([Fraction(0), Fraction(1)])
    y_over_t = [Y[k + 1] for k in range(order)] + [g(0)]          # y/t
    ym1 = add(Y, scal(g(-1), one))                                # y - 1
    ymt_over_t = add(y_over_t, scal(g(-1), one))                  # (y - t)/t
    one_minus_t = add(one, scal(g(-1), tser))                     # 1 - t
    mu = g(Fraction(-1, 4))
    # A = (y' t(t-1) - y(y-1)) / 2
    t_tm1 = mul(tser, add(tser, scal(g(-1), one)))
    A = scal(g(Fraction(1, 2)), add(mul(Yp, t_tm1), scal(g(-1), mul(Y, ym1))))

    # Omega1 / (i sqrt 2) = -sqrt((y-1)(y-t)/(2t)) [A/((y-1)(y-t)) + mu]
    # (the principal product of the two roots is minus the positive branch
    # of the combined radicand on 0 < t < 1)
    q1 = mul(ym1, ymt_over_t)               # (y-1)(y-t)/t
    bracket1 = add(div(A, mul(q1, tser)), scal(mu, one))
    O1 = scal(g(-1), mul(_series_sqrt_gauss(scal(g(Fraction(1, 2)), q1), order),
                         bracket1))

    # Omega2 = i sqrt(y (y-t)) / sqrt(1-t) [A/(y(y-t)) + mu]
    #        = i t sqrt((y/t)((y-t)/t)/(1-t)) [...]
    q2 = div(mul(y_over_t, ymt_over_t), one_minus_t)
    bracket2 = add(div(A, mul(mul(y_over_t, ymt_over_t), mul(tser, tser))),
                   scal(mu, one))
    root2 = _series_sqrt_gauss(q2, order)   # leading -1/2 -> i/2-type root
    O2_over_t = scal(GaussRational(0, 1), mul(root2, bracket2))
    O2 = [g(0)] + O2_over_t[: order]

    # Omega3 / (i sqrt 2) = -sqrt(y(y-1)/(2 t (1-t))) / i * ... ; arranged so the
    # radicand y(y-1)/(2t(1-t)) has leading term -1/4 with root i/2:
    q3 = scal(g(Fraction(1, 2)), div(mul(y_over_t, ym1), one_minus_t))
    bracket3 = add(div(A, mul(mul(y_over_t, ym1), tser)), scal(mu, one))
    root3 = _series_sqrt_gauss(q3, order)
    O3 = scal(GaussRational(0, 1), mul(root3, bracket3))

    return (O1[: n_terms + 1], O2[: n_terms + 1], O3[: n_terms + 1])


def a3_V_of_t(t):
    """The skew residue matrix V(t) of the A3 branch (principal signs).

    At the coalescence point itself the Omega limits (i/(4 sqrt 2), 0,
    i/(4 sqrt 2)) are substituted; V is continuous there."""
    if abs(complex(t)) < 1e-9:
        c = 1j * math.sqrt(2) / 8
        return np.array([[0, 0, -c], [0, 0, c], [c, -c, 0]], dtype=complex)
    return a3_state(t).V


def a3_family_A1(t_vec):
    """A1(t) for the embedded 3x3 family with u = (t_1, t_2, 1 + t_3).

    The cross-ratio argument is (u_2 - u_1)/(u_3 - u_1)."""
    u1, u2, u3 = t_vec[0], t_vec[1], 1.0 + t_vec[2]
    s = (complex(u2) - complex(u1)) / (complex(u3) - complex(u1))
    return a3_state(s).V


def pvi_rhs(t, y, dy, mu):
    """Second derivative of y prescribed by PVI_mu."""
    t, y, dy = complex(t), complex(y), complex(dy)
    term1 = 0.5 * (1 / y + 1 / (y - 1) + 1 / (y - t)) * dy * dy
    term2 = (1 / t + 1 / (t - 1) + 1 / (y - t)) * dy
    term3 = 0.5 * y * (y - 1) * (y - t) / (t * t * (t - 1) ** 2) * (
        (2 * mu - 1) ** 2 + t * (t - 1) / (y - t) ** 2)
    return term1 - term2 + term3


def pvi_residual(y_fn, ts, mu=MU_A3, h=3e-5, dps=30):
    """Max |y'' - PVI rhs| over the grid, y'' by central differences of y_fn.

    The rhs cancels catastrophically as t -> 0, so it is evaluated in
    extended precision; the finite differences stay at the accuracy of y_fn.
    """
    worst = 0.0
    with mp.workdps(dps):
        for t in ts:
            t = complex(t)
            if t in (0.0, 1.0):
                raise GridSingular("grid touches a fixed singular point")
            y0 = y_fn(t)
            yp = y_fn(t + h)
            ym = y_fn(t - h)
            if y0 in (0.0, 1.0) or y0 == t:
                raise GridSingular("solution value hits 0, 1 or t on the grid")
            y0m, ypm, ymm, tm = mp.mpc(y0), mp.mpc(yp), mp.mpc(ym), mp.mpc(t)
            d1 = (ypm - ymm) / (2 * h)
            d2 = (ypm - 2 * y0m + ymm) / (h * h)
            term1 = (1 / y0m + 1 / (y0m - 1) + 1 / (y0m - tm)) * d1 * d1 / 2
            term2 = (1 / tm + 1 / (tm - 1) + 1 / (y0m - tm)) * d1
            term3 = y0m * (y0m - 1) * (y0m - tm) / (tm * tm * (tm - 1) ** 2) * (
                (2 * mu - 1) ** 2 + tm * (tm - 1) / (y0m - tm) ** 2) / 2
            worst = max(worst, float(abs(d2 - (term1 - term2 + term3))))
    return worst


def omega_flow(omega_init, t0, t1, rtol=1e-12, atol=1e-13, t_eval=None):
    """Integrate the Omega system between t0 and t1 along the segment.

    Returns (ts, triples).  The path must avoid the fixed points {0, 1}.
    """
    O0 = np.asarray(omega_init, dtype=complex)
    t0c, t1c = complex(t0), complex(t1)

    def rhs(x, O):
        t = t0c + x * (t1c - t0c)
        dt = t1c - t0c
        return np.array([
            O[1] * O[2] / t,
            O[0] * O[2] / (1 - t),
            O[0] * O[1] / (t * (t - 1)),
        ]) * dt

    xe = None if t_eval is None else [float(x) for x in t_eval]
    sol = solve_ivp(rhs, (0.0, 1.0), O0, method="DOP853", rtol=rtol, atol=atol,
                    t_eval=xe)
    if not sol.success:
        from .errors import BlowUp
        raise BlowUp(f"Omega flow failed: {sol.message}")
    ts = [t0c + x * (t1c - t0c) for x in sol.t]
    return ts, [tuple(sol.y[:, j]) for j in range(sol.y.shape[1])]


# -- special functions on the universal cover ------------------------------------------


@dataclass
class SpecialFnConfig:
    series_cutoff: int = 60
    asymptotic_switch_radius: float = 10.0
    dps: int = 25

    def __post_init__(self):
        if self.asymptotic_switch_radius < 10:
            raise ValueError("asymptotic switch radius must be >= 10")


def special_ei(z, winding=0, side=None):
    """Exponential integral Ei on the cover: Ei(z e^{2 pi i k}) = Ei(z) + 2 pi i k.

    z is the principal-sheet value; winding counts full turns (the branch
    point sits at 0, cut along the negative axis).  Exactly on the cut the
    two one-sided values differ by 2 pi i, so ``side`` (+1 above, -1 below)
    must be given there.
    """
    if z == 0:
        raise ZeroDivisionError("Ei is singular at 0")
    z = complex(z)
    if z.imag == 0.0 and z.real < 0.0:
        if side is None:
            raise BranchUnspecified(
                "Ei on the cut (negative axis): pass side=+1 (from above) or -1")
        # one-sided values around the principal-value integral: PV +- i pi
        pv = float(mp.ei(mp.mpf(z.real)))
        return pv + 1j * math.pi * side + 2j * math.pi * winding
    val = complex(mp.ei(mp.mpc(z)))
    return val + 2j * math.pi * winding


def special_e1(z, winding=0):
    """Exponential integral E1 on the cover: E1(z e^{2 pi i k}) = E1(z) - 2 pi i k."""
    if z == 0:
        raise ZeroDivisionError("E1 is singular at 0")
    val = complex(mp.e1(mp.mpc(z)))
    return val - 2j * math.pi * winding


def _hankel_from_J(kind, nu, z, m, dps=30):
    """H^(kind)_nu(z e^{i pi m}) via J_{+-nu}(z) and exact winding factors.

    J_nu(z e^{i pi m}) = e^{i pi m nu} J_nu(z); the Hankel combinations
    H1 = (J_{-nu} - e^{-i pi nu} J_nu)/(i sin pi nu),
    H2 = (e^{ i pi nu} J_nu - J_{-nu})/(i sin pi nu).
    The J's cancel exponentially in the subdominant regime, so the
    combination is done at working precision dps before conversion.
    """
    with mp.workdps(dps):
        nu_mp = mp.mpf(nu)
        s = mp.mpc(0, 1) * mp.sin(mp.pi * nu_mp)
        rot = mp.e ** (mp.mpc(0, 1) * mp.pi * m * nu_mp)
        Jp = mp.besselj(nu_mp, mp.mpc(z)) * rot
        Jm = mp.besselj(-nu_mp, mp.mpc(z)) / rot
        if kind == 1:
            out = (Jm - mp.e ** (-mp.mpc(0, 1) * mp.pi * nu_mp) * Jp) / s
        else:
            out = (mp.e ** (mp.mpc(0, 1) * mp.pi * nu_mp) * Jp - Jm) / s
        return complex(out)


_HANKEL_AK_CACHE = {}


def _hankel_ak(nu, kmax):
    key = (nu, kmax)
    if key not in _HANKEL_AK_CACHE:
        ak = [1.0]
        for k in range(1, kmax + 1):
            ak.append(ak[-1] * (4 * nu * nu - (2 * k - 1) ** 2) / (8 * k))
        _HANKEL_AK_CACHE[key] = ak
    return _HANKEL_AK_CACHE[key]


def hankel34_asymptotic(kind, z, kmax=None):
    """Optimally truncated large-|z| expansion of H^(1,2)_{3/4}(z).

    Valid for -pi < arg z < 2 pi (kind 1) / -2 pi < arg z < pi (kind 2);
    relative accuracy is limited to ~ e^{-2|z|} by the divergent tail.
    """
    nu = 0.75
    z = complex(z)
    sign = 1 if kind == 1 else -1
    chi = z - (0.5 * nu + 0.25) * math.pi
    ak = _hankel_ak(nu, kmax if kmax is not None else max(8, int(2.2 * abs(z)) + 4))
    acc = 0.0
    prev = math.inf
    term_scale = 1.0
    for k, a in enumerate(ak):
        term = a * (sign * 1j) ** k / z ** k
        if abs(term) >= prev:
            break
        acc += term
        prev = abs(term)
    return cmath.sqrt(2 / (math.pi * z)) * cmath.exp(sign * 1j * chi) * acc


def special_hankel34(kind, z, winding_pi=0, config: SpecialFnConfig | None = None):
    """H^(1,2)_{3/4} at z e^{i pi winding_pi} (half-turn winding on the cover).

    Series route (J_{+-3/4} via mpmath, exact winding factors) below the
    switch radius; the optimally truncated asymptotic expansion above it,
    reduced to the principal validity window through the same connection
    formulas.
    """
    if kind not in (1, 2):
        raise ValueError("kind must be 1 or 2")
    config = config or SpecialFnConfig()
    if abs(z) < config.asymptotic_switch_radius:
        return _hankel_from_J(kind, 0.75, z, winding_pi)
    # reduce winding into the asymptotic validity window
    theta = cmath.phase(z) + math.pi * winding_pi
    if winding_pi == 0 and (-math.pi < theta < 2 * math.pi if kind == 1
                            else -2 * math.pi < theta < math.pi):
        return hankel34_asymptotic(kind, z)
    return _hankel_from_J(kind, 0.75, z, winding_pi)


def hankel_cyclic_residual(x):
    """|H1(x e^{-i pi}) - 2 cos(3 pi/4) H1(x) - e^{-3 pi i/4} H2(x)| at x."""
    lhs = _hankel_from_J(1, 0.75, x, -1)
    rhs = 2 * math.cos(0.75 * math.pi) * _hankel_from_J(1, 0.75, x, 0) \
        + cmath.exp(-0.75j * math.pi) * _hankel_from_J(2, 0.75, x, 0)
    return abs(lhs - rhs)


# -- closed-form Stokes matrices of the frozen system -----------------------------------


def a3_frozen_system():
    """The 3x3 frozen system at the coalescence point of the A3 branch."""
    from .core import make_system

    c = 1j * math.sqrt(2) / 8
    V0 = [[0, 0, -c], [0, 0, c], [c, -c, 0]]
    return make_system(3, (0.0, 0.0, 1.0), (2, 1), [V0], label="a3-frozen")


def a3_frozen_stokes(method="hankel-closed-form", J_variant=False, params=None):
    """Stokes matrices S1, S2 of the frozen A3 system by either route.

    "hankel-closed-form": the sector solutions are Hankel functions; the
    entries follow from the connection constants and the order-3/4 cyclic
    relation, plus skew-symmetry (S2 = S1^{-T}).
    "numeric": the generic matching pipeline on the frozen system.
    """
    if method == "numeric":
        from .connect import stokes_matrices

        sysF = a3_frozen_system()
        data = stokes_matrices(sysF, [0.0, 0.0, 0.0], 0.0, params)
        S1, S2 = data.S_nu, data.S_nu_plus_mu
    elif method == "hankel-closed-form":
        # connection constants of the sector solutions (subdominant column
        # pair via H1, dominant via H2 / rotated H1)
        c1_minus = -0.5j * math.sqrt(math.pi / 2) * cmath.exp(7j * math.pi / 8)
        c1_hat = 0.5 * math.sqrt(math.pi) * cmath.exp(3j * math.pi / 8)
        c2 = 0.5 * math.sqrt(math.pi) * cmath.exp(-3j * math.pi / 8)
        # consistency of the dominant tails: c1_hat e^{-3 pi i/4} must be c2
        assert abs(c1_hat * cmath.exp(-0.75j * math.pi) - c2) < 1e-15
        # cyclic relation H1(e^{-i pi} x) = 2 cos(3 pi/4) H1(x) + e^{-3 pi i/4} H2(x):
        # matching the subdominant H1 parts of column 3 across the sectors,
        # with the constant-row condition s23 = -s13, gives
        # 2 s13 c1_minus = 2 cos(3 pi/4) c1_hat.
        s13 = 2 * math.cos(0.75 * math.pi) * c1_hat / (2 * c1_minus)
        s13 = complex(round(s13.real, 12), round(s13.imag, 12))
        S1 = np.array([[1, 0, s13], [0, 1, -s13], [0, 0, 1]], dtype=complex)
        S2 = np.linalg.inv(S1).T
    else:
        raise ValueError("method must be 'hankel-closed-form' or 'numeric'")
    if J_variant:
        J = np.diag([1.0, -1.0, 1.0])
        S1 = J @ S1 @ J
        S2 = J @ S2 @ J
    return S1, S2
