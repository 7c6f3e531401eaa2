"""Classical oracles: Ising chains and tori, Monte Carlo, the Nishimori-line RBIM
sum, the plaquette Ising model and the critical transverse-field Ising chain.

Couplings are dimensionless (``K = beta * J``).  An infinite coupling is passed
as ``math.inf`` and handled before any arithmetic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numba import njit
from scipy.sparse import csr_matrix
from scipy.sparse.linalg import eigsh
from scipy.special import gammaln, logsumexp

from .lattice import Bond, Lattice

TM_MAX_WIDTH = 12
EXPLICIT_MAX_BONDS = 12
EXPLICIT_MAX_SPINS = 16


# --------------------------------------------------------------------------
# parameter dictionary


@dataclass(frozen=True)
class ParameterMap:
    """Error rate, gate angle, and the two Ising couplings they induce.

    ``beta`` solves ``tanh(beta) = p / (1 - p)``; the dephased state's Renyi-2
    correlator lives at coupling ``2 * beta``, its type-II strange correlator at
    ``beta``.  ``beta_tilde`` solves ``exp(-2 beta_tilde) = tan(theta)`` and
    governs the pure-state strange correlator of the purification.
    """

    p: float
    theta: float
    beta: float
    beta_tilde: float

    @property
    def renyi2_coupling(self) -> float:
        return 2 * self.beta

    def as_dict(self) -> dict:
        return {k: ("inf" if v == math.inf else v) for k, v in
                dict(p=self.p, theta=self.theta, beta=self.beta, beta_tilde=self.beta_tilde).items()}


def _theta_from_p(p: float) -> float:
    return 0.5 * math.asin(1.0 - 2.0 * p)


def _beta_from_p(p: float) -> float:
    if p == 0.5:
        return math.inf
    return math.atanh(p / (1.0 - p))


def _beta_tilde_from_theta(theta: float) -> float:
    if theta == 0.0:
        return math.inf
    return -0.5 * math.log(math.tan(theta))


def param_map(*, p: float | None = None, theta: float | None = None, beta: float | None = None,
              beta_tilde: float | None = None) -> ParameterMap:
    """Fill in the full map from exactly one of its entries."""
    given = {k: v for k, v in dict(p=p, theta=theta, beta=beta, beta_tilde=beta_tilde).items() if v is not None}
    if len(given) != 1:
        raise ValueError(f"give exactly one parameter, got {sorted(given)}")
    if p is not None:
        if not 0.0 <= p <= 0.5:
            raise ValueError(f"p={p} outside [0, 1/2]; fold p -> 1-p first")
        theta = _theta_from_p(p)
        return ParameterMap(p, theta, _beta_from_p(p), _beta_tilde_from_theta(theta))
    if theta is not None:
        if not 0.0 <= theta <= math.pi / 4 + 1e-15:
            raise ValueError(f"theta={theta} outside [0, pi/4]")
        theta = min(theta, math.pi / 4)
        p = 0.5 * (1.0 - math.sin(2.0 * theta))
        p = max(p, 0.0)
        return ParameterMap(p, theta, _beta_from_p(p), _beta_tilde_from_theta(theta))
    if beta is not None:
        if not beta >= 0.0:
            raise ValueError(f"beta={beta} must be >= 0")
        if beta == math.inf:
            return ParameterMap(0.5, 0.0, math.inf, math.inf)
        t = math.tanh(beta)
        p = t / (1.0 + t)
        theta = _theta_from_p(p)
        return ParameterMap(p, theta, beta, _beta_tilde_from_theta(theta))
    if not beta_tilde >= 0.0:
        raise ValueError(f"beta_tilde={beta_tilde} must be >= 0")
    if beta_tilde == math.inf:
        return ParameterMap(0.5, 0.0, math.inf, math.inf)
    theta = math.atan(math.exp(-2.0 * beta_tilde))
    p = 0.5 * (1.0 - math.sin(2.0 * theta))
    return ParameterMap(p, theta, _beta_from_p(p), beta_tilde)


def p_from_coupling(K: float) -> float:
    """Error rate whose Renyi-2 coupling ``2 beta`` equals ``K``."""
    return param_map(beta=K / 2).p


P_CRITICAL = 0.5 * (1.0 - math.sqrt(math.sqrt(2.0) - 1.0))
K_CRITICAL = 0.5 * math.log(1.0 + math.sqrt(2.0))


def _tanh(K: float) -> float:
    return 1.0 if K == math.inf else math.tanh(K)


# --------------------------------------------------------------------------
# exact Ising correlators


def ising1d_corr(K: float, r: int, L: int, periodic: bool = False) -> float:
    """``<s_a s_{a+r}>`` on an ``L``-site chain."""
    if not 0 <= r < L:
        raise ValueError(f"separation {r} must lie in [0, {L})")
    t = _tanh(K)
    if not periodic:
        return t**r
    return (t**r + t ** (L - r)) / (1.0 + t**L)


def ising_corr_bruteforce(K: float, n_spins: int, bonds: Sequence[tuple[int, int]], sites: Sequence[int]) -> float:
    """``<prod_{i in sites} s_i>`` by summing all ``2**n`` configurations.

    Multiple bonds between the same pair add their couplings, as on tiny tori.
    """
    if n_spins > EXPLICIT_MAX_SPINS:
        raise ValueError(f"{n_spins} spins exceed the explicit-sum budget")
    if K == math.inf:
        return _frozen_corr(n_spins, bonds, sites)
    spins = _spin_table(n_spins)
    bond_prod = _bond_products(spins, bonds)
    logw = K * bond_prod.sum(axis=1)
    obs = np.prod(spins[:, list(sites)], axis=1) if len(sites) else np.ones(len(spins))
    w = np.exp(logw - logw.max())
    return float(np.dot(w, obs) / w.sum())


def _frozen_corr(n_spins, bonds, sites) -> float:
    # zero temperature ferromagnet: uniform average over the ground states
    # (one global flip per connected component)
    parent = list(range(n_spins))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in bonds:
        parent[find(a)] = find(b)
    counts: dict[int, int] = {}
    for s in sites:
        counts[find(s)] = counts.get(find(s), 0) + 1
    return 1.0 if all(c % 2 == 0 for c in counts.values()) else 0.0


def _spin_table(n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    return 1 - 2 * ((idx[:, None] >> np.arange(n)[None, :]) & 1)


def _bond_products(spins: np.ndarray, bonds) -> np.ndarray:
    a = np.array([b[0] for b in bonds], dtype=int)
    b = np.array([b[1] for b in bonds], dtype=int)
    return spins[:, a] * spins[:, b]


def lattice_bond_pairs(lat: Lattice) -> list[tuple[int, int]]:
    return [(b.a, b.b) for b in lat.bonds()]


def _row_transfer(K: float, Lx: int):
    """Symmetric row transfer matrix and diagonal row spins for a periodic strip."""
    rows = _spin_table(Lx)
    horiz = (rows * np.roll(rows, -1, axis=1)).sum(axis=1) if Lx > 1 else np.zeros(len(rows))
    vert = rows @ rows.T
    # T[a, b] = exp(K/2 h_a) exp(K v_ab) exp(K/2 h_b); shift exponents to keep values bounded
    expo = 0.5 * K * (horiz[:, None] + horiz[None, :]) + K * vert
    T = np.exp(expo - expo.max())
    return T, rows


def ising2d_tm_corr(K: float, Lx: int, Ly: int, dx: int, dy: int = 0) -> float:
    """``<s_{(0,0)} s_{(dx,dy)}>`` on a periodic ``Lx x Ly`` torus by row transfer matrix.

    Bonds follow the lattice enumeration, so on a width- or height-2 torus each
    neighbouring pair is joined by two bonds.
    """
    if Lx > TM_MAX_WIDTH:
        raise ValueError(f"transfer-matrix width {Lx} exceeds {TM_MAX_WIDTH}")
    if Lx < 2 or Ly < 2:
        raise ValueError("torus must be at least 2x2")
    dx %= Lx
    dy %= Ly
    if K == math.inf:
        return 1.0
    T, rows = _row_transfer(K, Lx)
    w, V = np.linalg.eigh(T)
    w = w / np.abs(w).max()
    s0 = rows[:, 0].astype(float)
    sd = rows[:, dx].astype(float)

    def power(n):
        return (V * w**n) @ V.T

    num = np.trace((s0[:, None] * power(dy)) @ (sd[:, None] * power(Ly - dy)))
    den = np.sum(w**Ly)
    return float(num / den)


# --------------------------------------------------------------------------
# RBIM on the Nishimori line


def rbim_nishimori_annealed_corr(beta_tilde: float, n_spins: int, bonds: Sequence[tuple[int, int]],
                                 i: int, j: int, method: str = "explicit") -> float:
    """Annealed average ``sum_s Z(s)^2 <s_i s_j>_s^2 / sum_s Z(s)^2`` over bond signs ``s``.

    ``Z(s)`` is the random-bond Ising partition function at coupling
    ``beta_tilde``.  ``method="explicit"`` sums every sign pattern and spin
    configuration; ``method="reduction"`` uses the two-replica gauge identity,
    which turns the sum into a clean Ising correlator at ``tanh(beta) =
    tanh(beta_tilde)**2``.
    """
    if method == "reduction":
        K = param_map(beta_tilde=beta_tilde).beta
        return ising_corr_bruteforce(K, n_spins, bonds, [i, j])
    if method != "explicit":
        raise ValueError(method)
    nb = len(bonds)
    if nb > EXPLICIT_MAX_BONDS or n_spins > EXPLICIT_MAX_SPINS:
        raise ValueError(f"explicit sum over {nb} bonds / {n_spins} spins exceeds the budget")
    if beta_tilde == math.inf:
        return 1.0
    spins = _spin_table(n_spins)
    bp = _bond_products(spins, bonds)  # (configs, bonds)
    signs = _spin_table(nb)  # (patterns, bonds)
    expo = beta_tilde * (signs @ bp.T)  # (patterns, configs)
    w = np.exp(expo - beta_tilde * nb)
    Z = w.sum(axis=1)
    N = w @ (spins[:, i] * spins[:, j])
    return float(np.sum(N**2) / np.sum(Z**2))


# --------------------------------------------------------------------------
# Monte Carlo


def stream_for(seed: int, *key: int) -> np.random.Generator:
    """Philox stream addressed by a 64-bit seed plus integer keys."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


@njit(cache=True)
def _ising_sweeps(spins, K, uniforms, mags, corr, rmax):
    L = spins.shape[0]
    acc = np.empty(5)
    for k in range(5):
        acc[k] = math.exp(-2.0 * K * (2 * k - 4)) if K * (2 * k - 4) > 0 else 1.0
    n_sweeps = uniforms.shape[0]
    for t in range(n_sweeps):
        u = 0
        for y in range(L):
            yu = y + 1 if y + 1 < L else 0
            yd = y - 1 if y > 0 else L - 1
            for x in range(L):
                xr = x + 1 if x + 1 < L else 0
                xl = x - 1 if x > 0 else L - 1
                s = spins[y, x]
                h = spins[y, xr] + spins[y, xl] + spins[yu, x] + spins[yd, x]
                # flipping costs 2 K s h
                k = (s * h + 4) // 2
                if uniforms[t, u] < acc[k]:
                    spins[y, x] = -s
                u += 1
        m = 0
        for y in range(L):
            for x in range(L):
                m += spins[y, x]
        mags[t] = m / (L * L)
        for r in range(1, rmax + 1):
            c = 0
            for y in range(L):
                for x in range(L):
                    xr = x + r
                    if xr >= L:
                        xr -= L
                    yr = y + r
                    if yr >= L:
                        yr -= L
                    c += spins[y, x] * (spins[y, xr] + spins[yr, x])
            corr[t, r - 1] = c / (2.0 * L * L)


@njit(cache=True)
def _plaquette_sweeps(spins, K, uniforms, R, four):
    L = spins.shape[0]
    acc = np.empty(9)
    for k in range(9):
        d = k - 4
        acc[k] = math.exp(-2.0 * K * d) if d > 0 else 1.0
    n_sweeps = uniforms.shape[0]
    for t in range(n_sweeps):
        u = 0
        for y in range(L):
            for x in range(L):
                h = 0
                for dy in (-1, 0):
                    for dx in (-1, 0):
                        x0 = (x + dx) % L
                        y0 = (y + dy) % L
                        x1 = (x0 + 1) % L
                        y1 = (y0 + 1) % L
                        prod = spins[y0, x0] * spins[y0, x1] * spins[y1, x0] * spins[y1, x1]
                        h += prod
                # each plaquette product changes sign under the flip
                if uniforms[t, u] < acc[h + 4]:
                    spins[y, x] = -spins[y, x]
                u += 1
        c = 0
        for y in range(L):
            for x in range(L):
                xr = (x + R) % L
                yr = (y + R) % L
                c += spins[y, x] * spins[y, xr] * spins[yr, x] * spins[yr, xr]
        four[t] = c / (L * L)


def jackknife(series: np.ndarray, estimator, n_bins: int = 20) -> tuple[float, float]:
    """Binned jackknife mean and error of ``estimator(bin_means)``.

    ``series`` has time along axis 0; ``estimator`` maps an array of per-sample
    values (rows) to a scalar.
    """
    series = np.asarray(series, dtype=float)
    n = (len(series) // n_bins) * n_bins
    if n == 0:
        raise ValueError("series shorter than the number of bins")
    bins = series[:n].reshape((n_bins, n // n_bins) + series.shape[1:]).mean(axis=1)
    full = estimator(bins.mean(axis=0))
    total = bins.sum(axis=0)
    leave = np.array([estimator((total - bins[b]) / (n_bins - 1)) for b in range(n_bins)])
    err = math.sqrt((n_bins - 1) / n_bins * np.sum((leave - leave.mean()) ** 2))
    return float(full), err


@dataclass
class IsingMCResult:
    K: float
    L: int
    sweeps: int
    m2: float
    m2_err: float
    binder: float
    binder_err: float
    corr: np.ndarray
    corr_err: np.ndarray
    series: dict = field(repr=False, default_factory=dict)


def _binder_from_moments(mom):
    m2, m4 = mom[0], mom[1]
    return 1.0 - m4 / (3.0 * m2 * m2)


def ising2d_mc(K: float, L: int, sweeps: int, seed: int, therm: int = 10_000, rmax: int | None = None,
               n_bins: int = 20, chunk: int = 2000, stream: int = 0) -> IsingMCResult:
    """Metropolis estimates of ``<m^2>``, the Binder cumulant and ``<s_0 s_r>`` on an ``L x L`` torus."""
    if L < 2 or sweeps < n_bins:
        raise ValueError("need L >= 2 and at least one sweep per bin")
    rmax = L // 2 if rmax is None else rmax
    rng = stream_for(seed, 0, L, stream, int(round(K * 1e9)))
    spins = np.where(rng.random((L, L)) < 0.5, 1, -1).astype(np.int64)
    # thermalize
    dummy_m = np.empty(min(chunk, max(therm, 1)))
    dummy_c = np.empty((min(chunk, max(therm, 1)), 0))
    left = therm
    while left > 0:
        n = min(chunk, left)
        _ising_sweeps(spins, K, rng.random((n, L * L)), dummy_m[:n], dummy_c[:n], 0)
        left -= n
    mags = np.empty(sweeps)
    corr = np.empty((sweeps, rmax))
    done = 0
    while done < sweeps:
        n = min(chunk, sweeps - done)
        _ising_sweeps(spins, K, rng.random((n, L * L)), mags[done:done + n], corr[done:done + n], rmax)
        done += n
    mom = np.column_stack([mags**2, mags**4])
    m2, m2_err = jackknife(mom, lambda v: v[0], n_bins)
    u4, u4_err = jackknife(mom, _binder_from_moments, n_bins)
    c_mean = corr.mean(axis=0)
    c_err = np.array([jackknife(corr[:, r], lambda v: float(v), n_bins)[1] for r in range(rmax)])
    return IsingMCResult(K, L, sweeps, m2, m2_err, u4, u4_err, c_mean, c_err,
                         series={"m": mags})


@dataclass
class BinderScan:
    couplings: np.ndarray
    sizes: tuple[int, ...]
    binder: np.ndarray  # (sizes, couplings)
    binder_err: np.ndarray
    crossings: dict  # (L1, L2) -> (K*, err)
    K_star: float
    K_star_err: float

    @property
    def p_c(self) -> float:
        return p_from_coupling(self.K_star)

    @property
    def p_c_err(self) -> float:
        # dp/dK by central difference
        h = 1e-6
        return abs(p_from_coupling(self.K_star + h) - p_from_coupling(self.K_star - h)) / (2 * h) * self.K_star_err


def _linear_fit(x, y, err):
    w = 1.0 / np.asarray(err) ** 2
    A = np.column_stack([np.ones_like(x), x])
    cov = np.linalg.inv(A.T @ (w[:, None] * A))
    coef = cov @ (A.T @ (w * y))
    return coef, cov


def binder_crossing(couplings: Sequence[float], sizes: Sequence[int], sweeps: int | Sequence[int], seed: int,
                    therm: int = 10_000, results: dict | None = None) -> BinderScan:
    """Binder cumulants on a coupling grid and pairwise crossings from straight-line fits."""
    Ks = np.asarray(couplings, dtype=float)
    sizes = tuple(sizes)
    sweeps_by_L = dict(zip(sizes, sweeps)) if not isinstance(sweeps, int) else {L: sweeps for L in sizes}
    U = np.empty((len(sizes), len(Ks)))
    dU = np.empty_like(U)
    for a, L in enumerate(sizes):
        for b, K in enumerate(Ks):
            res = results[(L, float(K))] if results is not None else ising2d_mc(K, L, sweeps_by_L[L], seed, therm, rmax=0)
            U[a, b], dU[a, b] = res.binder, res.binder_err
    K0 = float(Ks.mean())
    fits = [_linear_fit(Ks - K0, U[a], dU[a]) for a in range(len(sizes))]
    crossings = {}
    for a, b in itertools.combinations(range(len(sizes)), 2):
        (ca, Ca), (cb, Cb) = fits[a], fits[b]
        da, db = ca[0] - cb[0], ca[1] - cb[1]
        x = -da / db
        # first-order error propagation of x = -da/db
        var = (Ca[0, 0] + Cb[0, 0]) / db**2 + (da**2 / db**4) * (Ca[1, 1] + Cb[1, 1]) \
            - 2 * da / db**3 * (Ca[0, 1] + Cb[0, 1])
        crossings[(sizes[a], sizes[b])] = (K0 + x, math.sqrt(max(var, 0.0)))
    vals = np.array([v for v, _ in crossings.values()])
    errs = np.array([e for _, e in crossings.values()])
    w = 1.0 / np.maximum(errs, 1e-12) ** 2
    K_star = float(np.sum(w * vals) / np.sum(w))
    # pairs share data, so report the larger of the naive weighted error and the spread
    K_err = float(max(math.sqrt(1.0 / np.sum(w)), vals.std()))
    return BinderScan(Ks, sizes, U, dU, crossings, K_star, K_err)


@dataclass
class PlaquetteMCResult:
    K: float
    L: int
    R: int
    value: float
    error: float


def plaquette_ising_mc(K: float, L: int, sweeps: int, seed: int, R: int | None = None, therm: int = 5_000,
                       n_bins: int = 20, chunk: int = 2000) -> PlaquetteMCResult:
    """Corner four-point ``<s s s s>`` of an ``R x R`` square, averaged over translations."""
    if not 2 <= L <= 32:
        raise ValueError("plaquette MC supports 2 <= L <= 32")
    R = L // 2 if R is None else R
    if K == 0:
        return PlaquetteMCResult(K, L, R, 0.0, 0.0)
    if K == math.inf:
        return PlaquetteMCResult(K, L, R, 1.0, 0.0)
    rng = stream_for(seed, 1, L, R, int(round(K * 1e9)))
    spins = np.where(rng.random((L, L)) < 0.5, 1, -1).astype(np.int64)
    buf = np.empty(chunk)
    left = therm
    while left > 0:
        n = min(chunk, left)
        _plaquette_sweeps(spins, K, rng.random((n, L * L)), R, buf[:n])
        left -= n
    four = np.empty(sweeps)
    done = 0
    while done < sweeps:
        n = min(chunk, sweeps - done)
        _plaquette_sweeps(spins, K, rng.random((n, L * L)), R, four[done:done + n])
        done += n
    val, err = jackknife(four, lambda v: float(v), n_bins)
    return PlaquetteMCResult(K, L, R, val, err)


def plaquette_ising_corner_exact(K: float, L: int, R: int) -> float:
    """Exact corner four-point of the periodic ``L x L`` plaquette Ising model.

    Plaquette products are free variables except for one parity constraint per
    row and per column of plaquettes; the constraints are resolved by summing
    over row subsets ``A`` and column subsets ``B`` in closed form.
    """
    if K == math.inf:
        return 1.0
    if not 0 < R < L:
        raise ValueError("need 0 < R < L")
    t = math.tanh(K)
    if t == 0:
        return 0.0
    lt = math.log(t)

    def log_sum(with_rect: bool) -> float:
        terms = []
        for a in range(R + 1):
            for a2 in range(L - R + 1):
                for b in range(R + 1):
                    for b2 in range(L - R + 1):
                        mult = (_lbinom(R, a) + _lbinom(L - R, a2) + _lbinom(R, b) + _lbinom(L - R, b2))
                        ones = _odd_count(R, L, a, a2, b, b2, with_rect)
                        terms.append(mult + ones * lt)
        return float(logsumexp(terms))

    return math.exp(log_sum(True) - log_sum(False))


def _lbinom(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def _odd_count(R, L, a, a2, b, b2, with_rect):
    """Number of plaquettes whose exponent row(A) + col(B) + rect is odd."""
    # rows: a of R rect rows in A, a2 of the L-R others; columns likewise
    def mismatch(n_rows_in, rows_tot, n_cols_in, cols_tot, flip):
        # count (row, col) pairs with alpha xor beta xor flip == 1
        same = n_rows_in * n_cols_in + (rows_tot - n_rows_in) * (cols_tot - n_cols_in)
        diff = rows_tot * cols_tot - same
        return same if flip else diff

    rect = 1 if with_rect else 0
    return (mismatch(a, R, b, R, rect) + mismatch(a, R, b2, L - R, 0)
            + mismatch(a2, L - R, b, R, 0) + mismatch(a2, L - R, b2, L - R, 0))


# --------------------------------------------------------------------------
# critical transverse-field Ising chain


def tfim_critical_corr(r: int) -> float:
    """``<Z_0 Z_r>`` in the ground state of the infinite chain ``-sum(Z Z + X)``.

    Free-fermion Toeplitz determinant ``det[G_{i-j-1}]`` with
    ``G_k = 2 (-1)^k / (pi (2k + 1))``.
    """
    if r < 0 or r > 4096:
        raise ValueError("separation out of range")
    if r == 0:
        return 1.0
    k = np.arange(-r, r)
    G = 2.0 * (-1.0) ** k / (math.pi * (2 * k + 1))
    i = np.arange(r)
    M = G[(i[:, None] - i[None, :] - 1) + r]
    sign, logdet = np.linalg.slogdet(M)
    return float(sign * math.exp(logdet))


def gapless_dual_chain(L: int, tol: float = 1e-12) -> tuple[np.ndarray, float]:
    """Ground-state weights of the gapless SPT chain in its ancilla ``X`` basis.

    On the open chain every bulk ``X~ X X~`` term is conserved and equal to +1,
    so ancilla ``X`` values ``a_0..a_{L-2}`` fix the system ``X`` values
    ``s_i = a_{i-1} a_i`` (with ``s_0 = a_0`` and ``s_{L-1} = a_{L-2}`` in the
    sector where both edge operators are +1).  What remains is the critical
    chain ``-sum(flip a_k) - sum(a_{k-1} a_k) - a_0 - a_{L-2}``.  Returns the
    probabilities ``P(a)`` (bit ``k`` set means ``a_k = -1``) and the energy of
    the full chain.
    """
    n = L - 1
    if n < 2 or n > 24:
        raise ValueError("need 3 <= L <= 25")
    dim = 1 << n
    idx = np.arange(dim)
    a = 1 - 2 * ((idx[:, None] >> np.arange(n)) & 1)
    diag = -(a[:, 1:] * a[:, :-1]).sum(axis=1) - a[:, 0] - a[:, -1]
    rows = np.concatenate([idx] + [idx ^ (1 << k) for k in range(n)])
    cols = np.concatenate([idx] * (n + 1))
    vals = np.concatenate([diag.astype(float), -np.ones(n * dim)])
    H = csr_matrix((vals, (rows, cols)), shape=(dim, dim))
    v0 = np.ones(dim) / math.sqrt(dim)
    w, V = eigsh(H, k=1, which="SA", v0=v0, tol=tol)
    psi = V[:, 0]
    P = psi**2 / np.sum(psi**2)
    # the conserved bulk terms contribute -(L - 2)
    return P, float(w[0]) - (L - 2)


def gapless_renyi2_dual(L: int, pairs: Sequence[tuple[int, int]]) -> list[float]:
    """Renyi-2 of ``Z_i Z_j`` on the traced gapless chain, from :func:`gapless_dual_chain`.

    ``Z_i Z_j`` flips ``s_i`` and ``s_j``, which is flipping ``a_i..a_{j-1}``.
    """
    P, _ = gapless_dual_chain(L)
    idx = np.arange(P.size)
    norm = float(np.dot(P, P))
    out = []
    for i, j in pairs:
        i, j = min(i, j), max(i, j)
        if not 0 <= i < j < L:
            raise ValueError(f"bad pair {(i, j)}")
        mask = ((1 << j) - 1) ^ ((1 << i) - 1)
        out.append(float(np.dot(P, P[idx ^ mask])) / norm)
    return out


def fit_power_law(r: Sequence[float], values: Sequence[float]) -> tuple[float, float]:
    """Least-squares exponent and prefactor of ``values ~ A r^(-eta)``."""
    x = np.log(np.asarray(r, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    return float(-slope), float(math.exp(intercept))


# --------------------------------------------------------------------------
# Pauli mixtures on stabilizer states


def _popcount(m: int) -> int:
    return int(m).bit_count()


def gf2_nullspace(columns: Sequence[int]) -> list[int]:
    """Basis of ``{s : XOR_k s_k columns[k] = 0}``; each ``s`` is a bitmask over columns."""
    pivots: dict[int, tuple[int, int]] = {}  # pivot bit -> (reduced column, combination)
    basis = []
    for k, col in enumerate(columns):
        comb = 1 << k
        while col:
            top = col.bit_length() - 1
            if top not in pivots:
                pivots[top] = (col, comb)
                break
            pc, pcomb = pivots[top]
            col ^= pc
            comb ^= pcomb
        if col == 0:
            basis.append(comb)
    return basis


def gf2_solve(columns: Sequence[int], target: int) -> int | None:
    """Some ``s`` with ``XOR_k s_k columns[k] = target``, or ``None``."""
    pivots: dict[int, tuple[int, int]] = {}
    for k, col in enumerate(columns):
        comb = 1 << k
        while col:
            top = col.bit_length() - 1
            if top not in pivots:
                pivots[top] = (col, comb)
                break
            pc, pcomb = pivots[top]
            col ^= pc
            comb ^= pcomb
    sol = 0
    while target:
        top = target.bit_length() - 1
        if top not in pivots:
            return None
        pc, pcomb = pivots[top]
        target ^= pc
        sol ^= pcomb
    return sol


def _span(basis: Sequence[int]) -> list[int]:
    out = [0]
    for b in basis:
        out += [x ^ b for x in out]
    return out


def pauli_mixture_correlators(p: float, flip_masks: Sequence[int], target_mask: int) -> tuple[float, float]:
    """Renyi-2 and reference-state correlators of a Pauli-mixture state, combinatorially.

    The state is ``prod_k [(1-p) + p g_k . g_k]`` applied to a stabilizer state
    ``|0>``, where ``flip_masks[k]`` lists the stabilizers that generator ``g_k``
    anticommutes with, and every product of generators with an empty flip mask
    acts on ``|0>`` as a stabilizer.  The state is then a mixture of orthogonal
    syndrome classes with probabilities given by independent Bernoulli(p) coins.

    Returns ``(renyi2, ref)`` for an operator ``Q`` with syndrome ``target_mask``:
    ``renyi2 = sum_c q(c) q(c+Q) / sum_c q(c)^2`` and
    ``ref = <0|Q rho Q|0> / <0|rho|0> = q(Q) / q(0)``.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p outside [0, 1]")
    n = len(flip_masks)
    S = gf2_solve(flip_masks, target_mask)
    if S is None:
        return 0.0, 0.0
    R = _span(gf2_nullspace(flip_masks))

    def class_weight(mask: int, q: float) -> float:
        # probability that n independent Bernoulli(q) coins land in mask + R
        return sum(q ** _popcount(mask ^ r) * (1 - q) ** (n - _popcount(mask ^ r)) for r in R)

    q2 = 2 * p * (1 - p)  # two independent coins differ
    renyi2 = class_weight(S, q2) / class_weight(0, q2)
    ref = class_weight(S, p) / class_weight(0, p)
    return renyi2, ref
