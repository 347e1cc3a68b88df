"""The exactly solvable systems used as golden oracles and CLI builtins."""

from __future__ import annotations

import math

import numpy as np

from .core import GaussRational, make_system
from .isomono import Family


def ei_system(mode="float"):
    """2x2 triangular system with Lambda = diag(t1, t2), A1 = [[1,0],[t2-t1,2]].

    Solvable in exponential integrals; its lower-left Stokes entry is
    2 pi i (t2 - t1)^2 while the formal coefficients diverge at t1 = t2.
    """
    if mode == "exact":
        one, two, zero = GaussRational(1), GaussRational(2), GaussRational(0)
        return make_system(2, (zero, zero), (2,),
                           [lambda t: [[one, zero], [t[1] - t[0], two]]],
                           label="ei")
    return make_system(2, (0.0, 0.0), (2,),
                       [lambda t: [[1.0, 0.0], [t[1] - t[0], 2.0]]],
                       label="ei")


def ei_explicit_solution(t, z):
    """Closed-form fundamental matrix of the Ei system at deformation value t.

    Y = [[1,0],[w,1]] diag(z, z^2 e^{t z}) with w = t^2 z e^{t z} E1(t z) - t
    (principal branch of the exponential integral E1)."""
    import mpmath as mp

    t, z = complex(t), complex(z)
    w = t * t * z * np.exp(t * z) * complex(mp.e1(t * z)) - t
    return np.array([[1.0, 0.0], [w, 1.0]], dtype=complex) @ \
        np.diag([z, z * z * np.exp(t * z)])


def ei_family() -> Family:
    return Family((0.0, 0.0), (2,),
                  lambda t: np.array([[1.0, 0.0],
                                      [complex(t[1]) - complex(t[0]), 2.0]]),
                  label="ei-family")


def a3_frozen_system():
    from .painleve import a3_frozen_system as _f

    return _f()


def a3_family() -> Family:
    """The 3x3 skew family of the algebraic branch, u = (t1, t2, 1 + t3)."""
    from .painleve import a3_V_of_t

    def A1(t):
        s = (complex(t[1]) - complex(t[0])) / (1.0 + complex(t[2]) - complex(t[0]))
        return a3_V_of_t(s)

    return Family((0.0, 0.0, 1.0), (2, 1), A1, label="a3-family")


def appendix_three_point_system():
    """u = (0, t, 1): one unfolding pair locally, three cells globally."""
    return make_system(3, (0.0, 0.0, 1.0), (2, 1),
                       [np.zeros((3, 3)).tolist()], label="appendix-ex1")


def appendix_cross_system():
    """Five eigenvalues 0, t, it, -t, -it: eight pi/4 cells."""
    return make_system(5, (0.0,) * 5, (5,),
                       [np.zeros((5, 5)).tolist()], label="appendix-cross")


def appendix_cross_slice(c):
    return [0.0, c, 1j * c, -c, -1j * c]


def appendix_three_point_slice(c):
    return [0.0, c, 0.0]


def random_distinct_system(rng, n=3, spread=2.0):
    """Random system with distinct eigenvalues and a dense residue matrix.

    Eigenvalues are drawn near a random line with bounded transverse
    scatter, keeping every pair separation within the double-precision
    conditioning budget of the matching pipeline (a strongly scalene
    triangle of eigenvalues needs more working precision; the pipeline
    reports MatchingIllConditioned for those rather than degrading).
    """
    direction = np.exp(2j * math.pi * rng.uniform())
    while True:
        pos = np.sort(rng.uniform(-spread, spread, size=n))
        if min(np.diff(pos)) > 1.0:
            break
    u0 = pos * direction
    minsep = min(abs(u0[a] - u0[b]) for a in range(n) for b in range(n) if a < b)
    u0 = u0 + (rng.normal(scale=0.04, size=n) * minsep * 1j) * direction
    shift = rng.normal(scale=spread) + 1j * rng.normal(scale=spread)
    u0 = u0 + shift
    A1 = rng.normal(scale=0.5, size=(n, n)) + 1j * rng.normal(scale=0.5, size=(n, n))
    return make_system(n, tuple(u0), (1,) * n, [A1.tolist()], label="random")


BUILTIN_SYSTEMS = {
    "ei": ei_system,
    "a3-frozen": lambda mode="float": a3_frozen_system(),
    "appendix-ex1": lambda mode="float": appendix_three_point_system(),
    "appendix-cross": lambda mode="float": appendix_cross_system(),
}

BUILTIN_FAMILIES = {
    "ei-family": ei_family,
    "a3-family": a3_family,
}

BUILTIN_SLICES = {
    "appendix-ex1": appendix_three_point_slice,
    "appendix-cross": appendix_cross_slice,
}
