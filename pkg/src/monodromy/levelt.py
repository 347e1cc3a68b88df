"""Fundamental solutions in Levelt (Birkhoff) normal form at the Fuchsian point z = 0.

Y0(z) = G0 (I + sum_l Psi_l z^l) z^{D0} z^{S0 + R0}, with diag(A1(t))
diagonalizable (diagonal Jordan form; defective residues are out of scope).
The series is entire, so the truncation error at radius r decays like
(c r)^L / L!; R0 collects the resonant corrections at positive-integer
eigenvalue differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import diagonalize
from .errors import DimensionMismatch, InvalidGaugePattern

RESONANCE_TOL = 1e-9
NEAR_RESONANCE_BAND = 1e-6


@dataclass
class LeveltData:
    G0: np.ndarray
    mu: np.ndarray                 # eigenvalues of A1, column order of G0
    D0: np.ndarray                 # integer vector, mu = D0 + S0 diag
    S0: np.ndarray                 # diagonal vector, 0 <= Re < 1
    R0: np.ndarray                 # nilpotent resonant correction
    Psi: list                      # Psi_1..Psi_L, coefficients on z^l
    resonance_lattice: tuple       # (i, j, l) with mu_i - mu_j = l > 0 integer
    quality: dict = field(default_factory=dict)

    @property
    def order(self):
        return len(self.Psi)

    def L0(self):
        return np.diag(self.S0) + self.R0

    def local_exponent(self):
        """D0 + L0, the full monodromy exponent at 0."""
        return np.diag(self.D0.astype(complex)) + self.L0()


def _snap_integer(x, tol):
    r = round(x.real) if abs(x.real - round(x.real)) <= tol else None
    return r


def levelt_exponents(A1, tol=1e-10, resonance_tol=RESONANCE_TOL):
    """Eigenvalues of A1 split as mu = d + rho, d integer, 0 <= Re rho < 1.

    Returns (mu, D0, S0, lattice); the lattice lists every ordered pair with
    a positive-integer eigenvalue difference.
    """
    w, G, _ = diagonalize(A1, tol)
    mu = np.asarray(w, dtype=complex)
    D0 = np.empty(len(mu), dtype=int)
    for i, m in enumerate(mu):
        snapped = _snap_integer(m, resonance_tol)
        re = snapped if snapped is not None else m.real
        D0[i] = math.floor(re + resonance_tol)
    S0 = mu - D0
    lattice = resonance_lattice(mu, resonance_tol)
    return mu, D0, S0, lattice


def resonance_lattice(mu, tol=RESONANCE_TOL):
    out = []
    n = len(mu)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            d = complex(mu[i] - mu[j])
            if abs(d.imag) <= tol and abs(d.real - round(d.real)) <= tol and round(d.real) > 0:
                out.append((i, j, int(round(d.real))))
    return tuple(out)


def _canonical_eig(A1, tol):
    """Eigen-decomposition with a deterministic order and column scaling.

    A numerically diagonal A1 keeps its input order with G0 = I (so that a
    diagonal residue gives the identity connection matrix); otherwise the
    eigenvalues sort by (Re, Im) and each eigenvector is scaled so its entry
    of largest modulus equals 1.  This fixes the C0 gauge orbit
    representative.
    """
    A = np.asarray(A1, dtype=complex)
    off = A - np.diag(np.diag(A))
    scale = max(float(np.max(np.abs(A))), 1e-300)
    if float(np.max(np.abs(off))) <= 1e-14 * scale:
        return np.diag(A).copy(), np.eye(A.shape[0], dtype=complex)
    w, G, _ = diagonalize(A1, tol)
    order = sorted(range(len(w)), key=lambda i: (w[i].real, w[i].imag))
    w = w[order]
    G = G[:, order]
    for j in range(G.shape[1]):
        k = int(np.argmax(np.abs(G[:, j])))
        G[:, j] = G[:, j] / G[k, j]
    return w, G


def _series_recursion(Lam_t, mu, L, resonance_tol, dtype_ctx=None):
    """Psi_1..Psi_L and R_(l) of the reduced-form recursion.

    (mu_i - mu_j - l) (Psi_l)_ij = (R_l)_ij + (sum_m Psi_{l-m} R_m)_ij
                                   - (Lam_t Psi_{l-1})_ij,
    with (R_l)_ij supported exactly on the resonances mu_i - mu_j = l, where
    the left side vanishes and the entry of R_l is read off instead.
    """
    n = len(mu)
    Psi = []
    Rs = {}
    prev = np.eye(n, dtype=complex)
    R0 = np.zeros((n, n), dtype=complex)
    near = []
    for l in range(1, L + 1):
        rhs = -(Lam_t @ prev)
        for m, Rm in Rs.items():
            rhs = rhs + Psi[l - m - 1] @ Rm
        Pl = np.zeros((n, n), dtype=complex)
        Rl = np.zeros((n, n), dtype=complex)
        has_R = False
        for i in range(n):
            for j in range(n):
                delta = mu[i] - mu[j] - l
                if abs(delta) <= resonance_tol:
                    Rl[i, j] = -rhs[i, j]
                    has_R = True
                else:
                    if abs(delta) < NEAR_RESONANCE_BAND:
                        near.append((i, j, l, abs(delta)))
                    Pl[i, j] = rhs[i, j] / delta
        if has_R:
            Rs[l] = Rl
            R0 = R0 + Rl
        Psi.append(Pl)
        prev = Pl
    return Psi, R0, Rs, near


def levelt_series(system, t, L, tol=1e-10, resonance_tol=RESONANCE_TOL):
    """Levelt normal form of dY/dz = (Lambda(t) + A1(t)/z) Y at z = 0.

    Coalescence of Lambda(t) is allowed (the z = 0 structure does not feel
    it); A1(t) must be diagonalizable.  Near-resonant denominators inside
    the band (resonance_tol, 1e-6) are recomputed in extended precision and
    flagged in ``quality``.
    """
    A1m = system.a_hat(1, t)
    if A1m is None:
        raise DimensionMismatch("system has no A_1 coefficient")
    A1 = A1m.to_numpy()
    Lam = system.Lambda(t).to_numpy()
    mu, G0 = _canonical_eig(A1, tol)
    D0 = np.empty(len(mu), dtype=int)
    for i, m in enumerate(mu):
        snapped = _snap_integer(m, resonance_tol)
        re = snapped if snapped is not None else m.real
        D0[i] = math.floor(re + resonance_tol)
    S0 = mu - D0
    lattice = resonance_lattice(mu, resonance_tol)

    Lam_t = np.linalg.solve(G0, Lam @ G0)
    Psi, R0, Rs, near = _series_recursion(Lam_t, mu, L, resonance_tol)
    quality = {"near_resonances": near}
    if near:
        quality["extended_precision"] = True
        Psi, R0 = _series_recursion_mp(Lam_t, mu, L, resonance_tol)
    return LeveltData(G0, mu, D0, S0, R0, Psi, lattice, quality)


def _series_recursion_mp(Lam_t, mu, L, resonance_tol, dps=40):
    """Same recursion over mpmath complex numbers (near-resonant systems)."""
    import mpmath as mp

    with mp.workdps(dps):
        n = len(mu)
        mmu = [mp.mpc(x) for x in mu]
        M = [[mp.mpc(Lam_t[i, j]) for j in range(n)] for i in range(n)]
        Psi = []
        Rs = {}
        prev = [[mp.mpc(1 if i == j else 0) for j in range(n)] for i in range(n)]
        R0 = [[mp.mpc(0) for _ in range(n)] for _ in range(n)]
        for l in range(1, L + 1):
            rhs = [[-sum(M[i][k] * prev[k][j] for k in range(n)) for j in range(n)]
                   for i in range(n)]
            for m, Rm in Rs.items():
                Pm = Psi[l - m - 1]
                for i in range(n):
                    for j in range(n):
                        rhs[i][j] += sum(Pm[i][k] * Rm[k][j] for k in range(n))
            Pl = [[mp.mpc(0) for _ in range(n)] for _ in range(n)]
            Rl = [[mp.mpc(0) for _ in range(n)] for _ in range(n)]
            has_R = False
            for i in range(n):
                for j in range(n):
                    delta = mmu[i] - mmu[j] - l
                    if abs(delta) <= resonance_tol:
                        Rl[i][j] = -rhs[i][j]
                        has_R = True
                    else:
                        Pl[i][j] = rhs[i][j] / delta
            if has_R:
                Rs[l] = Rl
                for i in range(n):
                    for j in range(n):
                        R0[i][j] += Rl[i][j]
            Psi.append(Pl)
            prev = Pl
        to_np = lambda M: np.array([[complex(x) for x in row] for row in M])
        return [to_np(P) for P in Psi], to_np(R0)


def evaluate_levelt(data: LeveltData, r: float, theta: float, order=None):
    """Y0 at the cover point z = r e^{i theta} (theta unrestricted).

    z^{D0} z^{S0} is diagonal exp(mu log z); z^{R0} = exp(R0 log z) is a
    finite nilpotent sum.
    """
    z = r * complex(math.cos(theta), math.sin(theta))
    logz = complex(math.log(r), theta)
    n = len(data.mu)
    W = np.eye(n, dtype=complex)
    zp = 1.0 + 0.0j
    upto = len(data.Psi) if order is None else min(order, len(data.Psi))
    for l in range(upto):
        zp *= z
        W = W + data.Psi[l] * zp
    diag = np.exp(data.mu * logz)
    zR = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(1, n + 1):
        term = term @ (data.R0 * logz) / k
        if not term.any():
            break
        zR = zR + term
    return data.G0 @ W @ (diag[:, None] * zR)


def levelt_residual(system, t, data: LeveltData, r: float, n_points=8):
    """Max ODE residual of the truncated normal form over a circle |z| = r.

    Measured in the normal-form frame (right-multiplied by the inverse of
    z^{D0} z^{L0}), which removes the z^mu column scaling and the resonant
    logarithms; what is left is the series tail, O(r^{L}).
    """
    A1 = system.a_hat(1, t).to_numpy()
    Lam = system.Lambda(t).to_numpy()
    n = len(data.mu)
    worst = 0.0
    for k in range(n_points):
        theta = 2 * math.pi * (k + 0.3) / n_points
        z = r * complex(math.cos(theta), math.sin(theta))
        logz = complex(math.log(r), theta)
        W = np.eye(n, dtype=complex)
        dW = np.zeros((n, n), dtype=complex)
        zp = 1.0 + 0.0j
        for l, P in enumerate(data.Psi, start=1):
            dW = dW + P * (l * zp)
            zp *= z
            W = W + P * zp
        diag = np.exp(data.mu * logz)
        zR = np.eye(n, dtype=complex)
        term = np.eye(n, dtype=complex)
        for kk in range(1, n + 1):
            term = term @ (data.R0 * logz) / kk
            zR = zR + term
        M = diag[:, None] * zR
        dM = (data.mu[:, None] / z) * M + diag[:, None] * (data.R0 @ zR) / z
        Y = data.G0 @ W @ M
        dY = data.G0 @ (dW @ M + W @ dM)
        res = np.linalg.solve(M.T, (dY - (Lam + A1 / z) @ Y).T).T
        worst = max(worst, float(np.max(np.abs(res))))
    return worst


def gauge_apply(data: LeveltData, D0_frak=None, D_frak=None, tol=1e-12) -> LeveltData:
    """Transform the normal form by a gauge D = D0 (I + D_1 + ... + D_kappa).

    D0 must commute with the (diagonal) Jordan form, i.e. be supported on
    equal-mu groups; (D_l)_ij may be nonzero only when mu_i - mu_j = l.
    The transformed exponent is L~ = D^{-1} L D, R~ = D^{-1} R D +
    D^{-1} [S, D].
    """
    n = len(data.mu)
    D0f = np.eye(n, dtype=complex) if D0_frak is None else np.asarray(D0_frak, dtype=complex)
    D_frak = {} if D_frak is None else {int(l): np.asarray(M, dtype=complex)
                                        for l, M in D_frak.items()}
    mu = data.mu
    for i in range(n):
        for j in range(n):
            if abs(mu[i] - mu[j]) > tol and abs(D0f[i, j]) > tol:
                raise InvalidGaugePattern(f"D0 entry {(i, j)} links distinct eigenvalues")
    for l, M in D_frak.items():
        if l < 1:
            raise InvalidGaugePattern("gauge levels start at 1")
        for i in range(n):
            for j in range(n):
                if abs(M[i, j]) > tol and abs(mu[i] - mu[j] - l) > tol:
                    raise InvalidGaugePattern(
                        f"D_{l} entry {(i, j)} is off the resonance mu_i - mu_j = {l}")

    kappa = max(D_frak.keys(), default=0)
    N = sum(D_frak.values(), np.zeros((n, n), dtype=complex))
    Dmat = D0f @ (np.eye(n) + N)
    Dinv = np.linalg.inv(Dmat)
    S = np.diag(data.S0)
    L = data.L0()
    L_new = Dinv @ L @ Dmat
    R_new = Dinv @ data.R0 @ Dmat + Dinv @ (S @ Dmat - Dmat @ S)

    # Psi~ from (I + sum Psi z^l) D0 (I + sum D_l z^l) = D0 (I + sum Psi~ z^l)
    Lmax = len(data.Psi)
    D0inv = np.linalg.inv(D0f)
    Psi_new = []
    terms = {0: np.eye(n, dtype=complex)}
    for l, M in D_frak.items():
        terms[l] = M
    for l in range(1, Lmax + 1):
        acc = np.zeros((n, n), dtype=complex)
        for m in range(0, l + 1):
            if m not in terms:
                continue
            Pl = np.eye(n, dtype=complex) if l - m == 0 else data.Psi[l - m - 1]
            acc = acc + Pl @ D0f @ terms[m]
        Psi_new.append(D0inv @ acc)
    G_new = data.G0 @ D0f
    return LeveltData(G_new, data.mu.copy(), data.D0.copy(), data.S0.copy(),
                      R_new, Psi_new, data.resonance_lattice,
                      {"gauge_applied": True})
