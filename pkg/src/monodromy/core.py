"""Numeric kernel.

Two arithmetic modes run through the package: floating (complex / numpy)
and exact (Gaussian rationals, i.e. complex numbers with Fraction parts).
The formal-series recursions are rational in their inputs, so they run
unchanged over either mode; ODE integration and eigensolves are float-only.

A third scalar type, :class:`RatFunc`, is a rational function of one formal
unfolding parameter with Gaussian-rational coefficients.  It exists so that
limits of recursion expressions along a radial approach to the coalescence
locus can be taken exactly (valuation bookkeeping instead of extrapolation).
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DimensionMismatch, NotDiagonalizable, PartitionInconsistent

_FractionTypes = (int, Fraction)


class GaussRational:
    """Exact complex scalar with Fraction real and imaginary parts.

    Serializes as ``"p/q+r/s*i"`` (see :meth:`from_string`).
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def from_string(cls, s: str) -> "GaussRational":
        s = s.replace(" ", "")
        if s.endswith("*i"):
            body = s[:-2]
            # split at the sign that separates the two fractions
            for k in range(len(body) - 1, 0, -1):
                if body[k] in "+-" and body[k - 1] not in "+-*/":
                    return cls(Fraction(body[:k]), Fraction(body[k:] or "0"))
            return cls(0, Fraction(body))
        return cls(Fraction(s), 0)

    def __str__(self):
        sign = "+" if self.im >= 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}*i"

    def __repr__(self):
        return f"GaussRational('{self}')"

    # -- ring operations -----------------------------------------------------

    @staticmethod
    def _coerce(x):
        if isinstance(x, GaussRational):
            return x
        if isinstance(x, _FractionTypes):
            return GaussRational(x)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        d = other.re * other.re + other.im * other.im
        if d == 0:
            raise ZeroDivisionError("division by zero GaussRational")
        return GaussRational(
            (self.re * other.re + self.im * other.im) / d,
            (self.im * other.re - self.re * other.im) / d,
        )

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __neg__(self):
        return GaussRational(-self.re, -self.im)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out, base = GaussRational(1), self
        while n:
            if n & 1:
                out = out * base
            base, n = base * base, n >> 1
        return out

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def __abs__(self):
        return abs(complex(self))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def conjugate(self):
        return GaussRational(self.re, -self.im)


def _poly_trim(c):
    while c and not c[-1]:
        c.pop()
    return c


def _poly_add(a, b):
    n = max(len(a), len(b))
    out = []
    for k in range(n):
        x = a[k] if k < len(a) else GaussRational(0)
        y = b[k] if k < len(b) else GaussRational(0)
        out.append(x + y)
    return _poly_trim(out)


def _poly_mul(a, b):
    if not a or not b:
        return []
    out = [GaussRational(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return _poly_trim(out)


def _poly_divmod(a, b):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    q = [GaussRational(0)] * max(0, len(a) - len(b) + 1)
    inv_lead = GaussRational(1) / b[-1]
    while len(a) >= len(b):
        coef = a[-1] * inv_lead
        deg = len(a) - len(b)
        q[deg] = coef
        for j, y in enumerate(b):
            a[deg + j] = a[deg + j] - coef * y
        _poly_trim(a)
        if not a:
            break
    return _poly_trim(q), a


def _poly_gcd(a, b):
    a, b = list(a), list(b)
    while b:
        a, b = b, _poly_divmod(a, b)[1]
    if a:
        inv = GaussRational(1) / a[-1]
        a = [c * inv for c in a]
    return a


class RatFunc:
    """Rational function of one formal parameter over Gaussian rationals.

    Coefficients ascending; the denominator is kept monic and coprime to the
    numerator, so equality and valuation at 0 are exact.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = [c if isinstance(c, GaussRational) else GaussRational(c) for c in num]
        den = [GaussRational(1)] if den is None else [
            c if isinstance(c, GaussRational) else GaussRational(c) for c in den
        ]
        num, den = _poly_trim(num), _poly_trim(den)
        if not den:
            raise ZeroDivisionError("zero denominator")
        g = _poly_gcd(num, den)
        if len(g) > 1:
            num = _poly_divmod(num, g)[0]
            den = _poly_divmod(den, g)[0]
        inv = GaussRational(1) / den[-1]
        self.num = [c * inv for c in num]
        self.den = [c * inv for c in den]

    @classmethod
    def variable(cls):
        return cls([GaussRational(0), GaussRational(1)])

    @classmethod
    def constant(cls, c):
        return cls([c if isinstance(c, GaussRational) else GaussRational(c)])

    @staticmethod
    def _coerce(x):
        if isinstance(x, RatFunc):
            return x
        if isinstance(x, (GaussRational,) + _FractionTypes):
            return RatFunc.constant(x)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return RatFunc(
            _poly_add(_poly_mul(self.num, other.den), _poly_mul(other.num, self.den)),
            _poly_mul(self.den, other.den),
        )

    __radd__ = __add__

    def __neg__(self):
        return RatFunc([-c for c in self.num], self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return RatFunc(_poly_mul(self.num, other.num), _poly_mul(self.den, other.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not other.num:
            raise ZeroDivisionError("division by zero rational function")
        return RatFunc(_poly_mul(self.num, other.den), _poly_mul(self.den, other.num))

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((tuple(self.num), tuple(self.den)))

    def __bool__(self):
        return bool(self.num)

    def __repr__(self):
        return f"RatFunc({self.num}, {self.den})"

    def valuation(self) -> int | None:
        """Order of vanishing at 0 (negative for a pole, None for 0)."""
        if not self.num:
            return None
        vn = next(k for k, c in enumerate(self.num) if c)
        vd = next(k for k, c in enumerate(self.den) if c)
        return vn - vd

    def limit0(self):
        """Exact limit at the origin, or None when the limit is infinite."""
        v = self.valuation()
        if v is None:
            return GaussRational(0)
        if v < 0:
            return None
        if v > 0:
            return GaussRational(0)
        vn = next(k for k, c in enumerate(self.num) if c)
        return self.num[vn] / self.den[vn]

    def __call__(self, x):
        num = _eval_poly(self.num, x)
        den = _eval_poly(self.den, x)
        return num / den


def _eval_poly(coeffs, x):
    out = 0 * x if not isinstance(x, (int, float, complex)) else 0
    for c in reversed(coeffs):
        out = out * x + c
    return out


def scalar_zero(like):
    """Additive identity in the ring of ``like``."""
    if isinstance(like, GaussRational):
        return GaussRational(0)
    if isinstance(like, RatFunc):
        return RatFunc.constant(0)
    return 0j


def scalar_is_zero(x, tol=0.0):
    if isinstance(x, (GaussRational, RatFunc)):
        return not bool(x)
    return abs(x) <= tol


def to_complex(x):
    if isinstance(x, GaussRational):
        return complex(x)
    if isinstance(x, RatFunc):
        raise TypeError("rational function has no complex value; take a limit")
    return complex(x)


class Matrix:
    """Dense matrix over any of the package's scalar rings.

    Deliberately small: only the operations the recursions need.  Heavy
    float linear algebra goes through numpy (:meth:`to_numpy`).
    """

    __slots__ = ("data", "rows", "cols")

    def __init__(self, data):
        self.data = [list(row) for row in data]
        self.rows = len(self.data)
        self.cols = len(self.data[0]) if self.data else 0
        if any(len(r) != self.cols for r in self.data):
            raise DimensionMismatch("ragged rows")

    @classmethod
    def zeros(cls, rows, cols, like=0j):
        z = scalar_zero(like)
        return cls([[z for _ in range(cols)] for _ in range(rows)])

    @classmethod
    def eye(cls, n, like=0j):
        z = scalar_zero(like)
        one = z + 1
        return cls([[one if i == j else z for j in range(n)] for i in range(n)])

    @classmethod
    def diag(cls, entries):
        entries = list(entries)
        n = len(entries)
        m = cls.zeros(n, n, like=entries[0] if entries else 0j)
        for i, e in enumerate(entries):
            m.data[i][i] = e
        return m

    @classmethod
    def from_numpy(cls, arr):
        return cls([[complex(x) for x in row] for row in np.atleast_2d(arr)])

    def to_numpy(self):
        return np.array([[to_complex(x) for x in row] for row in self.data], dtype=complex)

    def __getitem__(self, ij):
        return self.data[ij[0]][ij[1]]

    def __setitem__(self, ij, value):
        self.data[ij[0]][ij[1]] = value

    @property
    def shape(self):
        return (self.rows, self.cols)

    def __add__(self, other):
        if self.shape != other.shape:
            raise DimensionMismatch(f"add {self.shape} with {other.shape}")
        return Matrix([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.data, other.data)])

    def __sub__(self, other):
        if self.shape != other.shape:
            raise DimensionMismatch(f"sub {self.shape} with {other.shape}")
        return Matrix([[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.data, other.data)])

    def __neg__(self):
        return Matrix([[-a for a in row] for row in self.data])

    def __mul__(self, scalar):
        return Matrix([[a * scalar for a in row] for row in self.data])

    __rmul__ = __mul__

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise DimensionMismatch(f"matmul {self.shape} with {other.shape}")
        out = Matrix.zeros(self.rows, other.cols, like=self.data[0][0])
        for i in range(self.rows):
            for k in range(self.cols):
                a = self.data[i][k]
                if scalar_is_zero(a):
                    continue
                for j in range(other.cols):
                    out.data[i][j] = out.data[i][j] + a * other.data[k][j]
        return out

    def transpose(self):
        return Matrix([[self.data[i][j] for i in range(self.rows)] for j in range(self.cols)])

    def map(self, fn):
        return Matrix([[fn(a) for a in row] for row in self.data])

    def norm_max(self):
        return max((abs(to_complex(a)) for row in self.data for a in row), default=0.0)

    def __eq__(self, other):
        return isinstance(other, Matrix) and self.data == other.data

    def __repr__(self):
        return f"Matrix({self.data!r})"


@dataclass
class MatrixSeries:
    """Truncated matrix power series in z (at 0) or 1/z (at infinity).

    ``coeffs[k]`` multiplies ``var**k``; all arithmetic truncates at the
    smaller order of the operands.
    """

    coeffs: list
    var: str = "1/z"  # "1/z": expansion at infinity; "z": expansion at 0

    def __post_init__(self):
        if self.var not in ("z", "1/z"):
            raise ValueError("var must be 'z' or '1/z'")
        shapes = {c.shape for c in self.coeffs}
        if len(shapes) > 1:
            raise DimensionMismatch("series coefficients of mixed shapes")

    @property
    def order(self):
        return len(self.coeffs) - 1

    def __add__(self, other):
        self._check(other)
        k = min(self.order, other.order)
        return MatrixSeries([self.coeffs[i] + other.coeffs[i] for i in range(k + 1)], self.var)

    def __mul__(self, other):
        self._check(other)
        k = min(self.order, other.order)
        like = self.coeffs[0].data[0][0]
        out = [Matrix.zeros(self.coeffs[0].rows, other.coeffs[0].cols, like=like)
               for _ in range(k + 1)]
        for i, a in enumerate(self.coeffs):
            if i > k:
                break
            for j, b in enumerate(other.coeffs):
                if i + j > k:
                    break
                out[i + j] = out[i + j] + a @ b
        return MatrixSeries(out, self.var)

    def _check(self, other):
        if self.var != other.var:
            raise ValueError("series in different variables")

    def eval(self, z):
        w = 1.0 / z if self.var == "1/z" else z
        acc = self.coeffs[-1].map(lambda c: to_complex(c))
        arr = acc.to_numpy()
        for c in reversed(self.coeffs[:-1]):
            arr = arr * w + c.to_numpy()
        return arr


def _as_matrix(obj, n):
    if isinstance(obj, Matrix):
        m = obj
    elif isinstance(obj, np.ndarray):
        m = Matrix.from_numpy(obj)
    else:
        m = Matrix(obj)
    if m.shape != (n, n):
        raise DimensionMismatch(f"coefficient is {m.shape}, system is {n}x{n}")
    return m


@dataclass(frozen=True)
class SystemCoefficients:
    """The input data of dY/dz = (Lambda(t) + sum_k A_k(t) z^{-k}) Y.

    Eigenvalues unfold linearly, u_a(t) = u0_a + t_a; the partition groups
    equal entries of u0.  Each coefficient is a constant matrix or a callable
    t -> matrix; callables must be built from ring operations so they can be
    evaluated over exact scalars as well as floats.
    """

    n: int
    u0: tuple
    partition: tuple
    coefficients: tuple  # generators for A_1, A_2, ...
    label: str = ""

    def u(self, t):
        if len(t) != self.n:
            raise DimensionMismatch(f"t has {len(t)} entries, system has {self.n}")
        return [u + dt for u, dt in zip(self.u0, t)]

    def Lambda(self, t):
        return Matrix.diag(self.u(t))

    def a_hat(self, k, t):
        """A_k(t) as a Matrix, or None when the coefficient is absent (zero)."""
        if k < 1:
            raise ValueError("coefficient index starts at 1")
        if k > len(self.coefficients):
            return None
        gen = self.coefficients[k - 1]
        mat = gen(t) if callable(gen) else gen
        return _as_matrix(mat, self.n)

    @property
    def n_coefficients(self):
        return len(self.coefficients)

    def blocks(self):
        """Index ranges of the coalescence partition of u0."""
        out, start = [], 0
        for p in self.partition:
            out.append(range(start, start + p))
            start += p
        return out

    def block_of(self):
        """Array mapping index a -> partition block number."""
        owner = [0] * self.n
        for b, rng in enumerate(self.blocks()):
            for a in rng:
                owner[a] = b
        return owner

    def same_block(self, a, b):
        owner = self.block_of()
        return owner[a] == owner[b]

    def distinct_u0(self):
        """One representative u0 value per partition block."""
        return [self.u0[rng[0]] for rng in self.blocks()]

    def zero_t(self, like=None):
        z = scalar_zero(like if like is not None else self.u0[0])
        return [z] * self.n


def make_system(n, u0, partition, coefficients, label="") -> SystemCoefficients:
    """Validate and build a :class:`SystemCoefficients`.

    Entries of u0 must be constant within each partition block and distinct
    across blocks (exactly for exact scalars, else to 1e-12 absolute).
    """
    u0 = tuple(u0)
    partition = tuple(int(p) for p in partition)
    if len(u0) != n:
        raise DimensionMismatch(f"u0 has {len(u0)} entries, n = {n}")
    if any(p < 1 for p in partition) or sum(partition) != n:
        raise PartitionInconsistent(f"partition {partition} does not sum to {n}")

    def _same(x, y):
        if isinstance(x, GaussRational) or isinstance(y, GaussRational):
            gx = x if isinstance(x, GaussRational) else GaussRational(x)
            gy = y if isinstance(y, GaussRational) else GaussRational(y)
            return gx == gy
        return abs(complex(x) - complex(y)) <= 1e-12

    start = 0
    reps = []
    for p in partition:
        block = u0[start:start + p]
        if any(not _same(v, block[0]) for v in block[1:]):
            raise PartitionInconsistent(f"u0 block {block} is not constant")
        reps.append(block[0])
        start += p
    for i in range(len(reps)):
        for j in range(i + 1, len(reps)):
            if _same(reps[i], reps[j]):
                raise PartitionInconsistent(
                    f"blocks {i} and {j} share the eigenvalue {reps[i]}")

    coefficients = tuple(coefficients)
    zero_t = [scalar_zero(u0[0] if u0 else 0j)] * n
    for k in range(1, len(coefficients) + 1):
        gen = coefficients[k - 1]
        mat = gen(zero_t) if callable(gen) else gen
        _as_matrix(mat, n)
    return SystemCoefficients(n, u0, partition, coefficients, label)


def diagonalize(M, tol=1e-10):
    """Eigen-decomposition G^{-1} M G = diag, rejecting defective matrices.

    Returns (eigenvalues, G, residual) with residual = max |G^-1 M G - diag|.
    Raises NotDiagonalizable when the eigenvector matrix has condition
    number above 1/tol.
    """
    A = M.to_numpy() if isinstance(M, Matrix) else np.asarray(M, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch("diagonalize needs a square matrix")
    w, G = np.linalg.eig(A)
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > 1.0 / max(tol, 1e-300):
        raise NotDiagonalizable(
            f"eigenvector matrix condition {cond:.3e} exceeds 1/tol = {1.0 / tol:.3e}")
    D = np.linalg.solve(G, A @ G)
    residual = float(np.max(np.abs(D - np.diag(np.diag(D)))))
    return w, G, residual


def serialize_scalar(x):
    """JSON form of a scalar: [re, im] for floats, 'p/q+r/s*i' for exact."""
    if isinstance(x, GaussRational):
        return str(x)
    z = complex(x)
    return [z.real, z.imag]


def parse_scalar(obj):
    if isinstance(obj, str):
        return GaussRational.from_string(obj)
    if isinstance(obj, (list, tuple)) and len(obj) == 2:
        return complex(obj[0], obj[1])
    if isinstance(obj, (int, float)):
        return complex(obj)
    raise ValueError(f"cannot parse scalar {obj!r}")


def arg_p(z) -> float:
    """Principal argument in (-pi, pi]."""
    a = cmath.phase(complex(z))
    if a <= -np.pi:
        a += 2 * np.pi
    return a
