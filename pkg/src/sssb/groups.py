"""Strong-to-weak symmetry breaking states for finite on-site symmetry groups.

For a group ``G`` acting on ``L`` sites through ``U_g = u_g^{(x) L}``, the
maximally strongly symmetric state is ``rho_S = P0 / N_I`` with
``P0 = (1/|G|) sum_g U_g`` the projector onto the identity sector and
``N_I = Tr P0 = (1/|G|) sum_g (tr u_g)^L`` its rank.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

MAX_DENSE_DIM = 4096
REP_ATOL = 1e-12
SCALAR_ATOL = 1e-10


@dataclass(frozen=True)
class FiniteGroup:
    name: str
    table: np.ndarray  # table[g, h] = index of g*h
    labels: tuple = ()

    def __post_init__(self):
        t = np.asarray(self.table)
        n = t.shape[0]
        if t.shape != (n, n) or t.min() < 0 or t.max() >= n:
            raise ValueError("multiplication table must be an n x n array of element indices")
        object.__setattr__(self, "table", t)
        e = self.identity
        inv = np.full(n, -1)
        for g in range(n):
            hits = np.flatnonzero(t[g] == e)
            if len(hits) != 1:
                raise ValueError(f"element {g} has no unique inverse")
            inv[g] = hits[0]
        object.__setattr__(self, "_inverse", inv)

    @property
    def order(self) -> int:
        return self.table.shape[0]

    @property
    def identity(self) -> int:
        for e in range(self.order):
            if np.array_equal(self.table[e], np.arange(self.order)) and np.array_equal(self.table[:, e], np.arange(self.order)):
                return e
        raise ValueError("table has no identity element")

    @property
    def inverse(self) -> np.ndarray:
        return self._inverse

    def mul(self, g: int, h: int) -> int:
        return int(self.table[g, h])

    def is_associative(self) -> bool:
        t = self.table
        # (gh)k == g(hk) for all triples, vectorized
        left = t[t[:, :, None], np.arange(self.order)[None, None, :]]
        right = t[np.arange(self.order)[:, None, None], t[None, :, :]]
        return bool(np.array_equal(left, right))

    def is_group(self) -> bool:
        rows_ok = all(sorted(r) == list(range(self.order)) for r in self.table.tolist())
        return rows_ok and self.is_associative()


def _from_permutations(name: str, perms: Sequence[tuple[int, ...]]) -> FiniteGroup:
    perms = [tuple(p) for p in perms]
    index = {p: k for k, p in enumerate(perms)}
    n = len(perms)
    table = np.empty((n, n), dtype=int)
    for a, g in enumerate(perms):
        for b, h in enumerate(perms):
            # (g h)(i) = g(h(i))
            table[a, b] = index[tuple(g[h[i]] for i in range(len(g)))]
    return FiniteGroup(name, table, tuple(perms))


def _closure(generators: Sequence[tuple[int, ...]]) -> list[tuple[int, ...]]:
    ident = tuple(range(len(generators[0])))
    elems = [ident]
    frontier = [ident]
    seen = {ident}
    while frontier:
        nxt = []
        for g in frontier:
            for s in generators:
                h = tuple(s[g[i]] for i in range(len(g)))
                if h not in seen:
                    seen.add(h)
                    elems.append(h)
                    nxt.append(h)
        frontier = nxt
    return elems


def cyclic(n: int) -> FiniteGroup:
    g = np.arange(n)
    return FiniteGroup(f"Z{n}", (g[:, None] + g[None, :]) % n, tuple(range(n)))


def symmetric3() -> FiniteGroup:
    return _from_permutations("S3", list(itertools.permutations(range(3))))


def dihedral4() -> FiniteGroup:
    return _from_permutations("D4", _closure([(1, 2, 3, 0), (0, 3, 2, 1)]))


def group_by_name(name: str) -> FiniteGroup:
    key = name.upper()
    if key == "S3":
        return symmetric3()
    if key == "D4":
        return dihedral4()
    if key.startswith("Z") and key[1:].isdigit():
        return cyclic(int(key[1:]))
    raise ValueError(f"unknown group {name!r}; built-ins are Z<n>, S3, D4")


# --------------------------------------------------------------------------
# representations


@dataclass(frozen=True)
class LocalRep:
    group: FiniteGroup
    mats: tuple[np.ndarray, ...]
    name: str = ""

    def __post_init__(self):
        G = self.group
        if len(self.mats) != G.order:
            raise ValueError("need one matrix per group element")
        d = self.mats[0].shape[0]
        for u in self.mats:
            if u.shape != (d, d) or not np.allclose(u.conj().T @ u, np.eye(d), atol=REP_ATOL):
                raise ValueError("representation matrices must be d x d unitaries")
        if not np.allclose(self.mats[G.identity], np.eye(d), atol=REP_ATOL):
            raise ValueError("identity must be represented by I")
        for g in range(G.order):
            for h in range(G.order):
                if not np.allclose(self.mats[g] @ self.mats[h], self.mats[G.mul(g, h)], atol=REP_ATOL):
                    raise ValueError(f"u_{g} u_{h} != u_{G.mul(g, h)}")

    @property
    def d(self) -> int:
        return self.mats[0].shape[0]

    def characters(self) -> np.ndarray:
        return np.array([np.trace(u) for u in self.mats])

    def global_op(self, g: int, L: int) -> np.ndarray:
        _check_dense(self.d, L)
        return reduce(np.kron, [self.mats[g]] * L)


def shift_rep(n: int) -> LocalRep:
    """``Z_n`` acting by cyclic shift of a ``d = n`` level system; for ``n = 2`` this is ``X``."""
    G = cyclic(n)
    S = np.roll(np.eye(n), 1, axis=0).astype(complex)
    return LocalRep(G, tuple(np.linalg.matrix_power(S, g) for g in range(n)), f"shift Z{n}")


def clock_rep(n: int) -> LocalRep:
    """``Z_n`` acting by ``diag(1, w, w^2, ...)^g`` with ``w = exp(2 pi i / n)``."""
    G = cyclic(n)
    w = np.exp(2j * np.pi / n)
    return LocalRep(G, tuple(np.diag(w ** (g * np.arange(n))) for g in range(n)), f"clock Z{n}")


def scalar_rep(n: int, d: int = 2, charge: int = 1) -> LocalRep:
    G = cyclic(n)
    return LocalRep(G, tuple(np.exp(2j * np.pi * charge * g / n) * np.eye(d) for g in range(n)), f"scalar Z{n}")


def permutation_rep(G: FiniteGroup) -> LocalRep:
    """Defining permutation representation of a permutation group."""
    if not G.labels or not isinstance(G.labels[0], tuple):
        raise ValueError("group was not built from permutations")
    d = len(G.labels[0])
    mats = []
    for perm in G.labels:
        P = np.zeros((d, d), dtype=complex)
        for i, j in enumerate(perm):
            P[j, i] = 1.0
        mats.append(P)
    return LocalRep(G, tuple(mats), f"perm {G.name}")


def rep_by_name(name: str) -> LocalRep:
    """``"Z2"`` (shift/X), ``"Z3"`` (clock), ``"S3"`` (permutation), or ``"<group>:<kind>"``."""
    if ":" in name:
        gname, kind = name.split(":", 1)
    else:
        gname, kind = name, {"Z2": "shift", "Z3": "clock"}.get(name.upper(), "perm")
    G = group_by_name(gname)
    if kind == "perm":
        return permutation_rep(G)
    n = G.order
    if kind == "shift":
        return shift_rep(n)
    if kind == "clock":
        return clock_rep(n)
    if kind == "scalar":
        return scalar_rep(n)
    raise ValueError(f"unknown representation kind {kind!r}")


# --------------------------------------------------------------------------
# scalar subgroup and the SSSB state


@dataclass(frozen=True)
class ScalarSubgroup:
    elements: tuple[int, ...]
    quotient_order: int

    @property
    def order(self) -> int:
        return len(self.elements)


def scalar_subgroup(rep: LocalRep) -> ScalarSubgroup:
    """Elements represented by a multiple of the identity, and ``|G / H|``."""
    d = rep.d
    H = tuple(g for g, u in enumerate(rep.mats) if np.allclose(u, u[0, 0] * np.eye(d), atol=SCALAR_ATOL))
    return ScalarSubgroup(H, rep.group.order // len(H))


def _check_dense(d: int, L: int) -> None:
    if d**L > MAX_DENSE_DIM:
        raise ValueError(f"d^L = {d**L} exceeds the dense budget {MAX_DENSE_DIM}")


def _check_multiple(rep: LocalRep, L: int) -> None:
    h = scalar_subgroup(rep).order
    if L % h:
        raise ValueError(f"L={L} must be a multiple of |H|={h}")


def identity_projector(rep: LocalRep, L: int) -> np.ndarray:
    _check_dense(rep.d, L)
    _check_multiple(rep, L)
    G = rep.group
    return sum(rep.global_op(g, L) for g in range(G.order)) / G.order


def identity_sector_count(rep: LocalRep, L: int) -> int:
    """``N_I = (1/|G|) sum_g (tr u_g)^L``, exact via the character sum."""
    _check_multiple(rep, L)
    total = sum(complex(np.trace(u)) ** L for u in rep.mats) / rep.group.order
    n = round(total.real)
    if abs(total - n) > 1e-8:
        raise ArithmeticError(f"character sum {total} is not an integer")
    return int(n)


def build_sssb_state(rep: LocalRep, L: int) -> np.ndarray:
    P0 = identity_projector(rep, L)
    return P0 / np.trace(P0).real


@dataclass(frozen=True)
class PurityRow:
    L: int
    purity: float
    ratio: float
    sectors: int


def purity_asymptote_report(rep: LocalRep, Ls: Sequence[int]) -> list[PurityRow]:
    """``Tr rho_S^2`` and ``Tr rho_S^2 * d^L / |G~|`` for each chain length."""
    q = scalar_subgroup(rep).quotient_order
    rows = []
    for L in Ls:
        rho = build_sssb_state(rep, L)
        pur = float(np.real(np.vdot(rho, rho)))
        rows.append(PurityRow(L, pur, pur * rep.d**L / q, identity_sector_count(rep, L)))
    return rows


# --------------------------------------------------------------------------
# order-parameter multiplets


@dataclass(frozen=True)
class OrderParamMultiplet:
    """Local operators ``O^alpha`` and their transformation matrices ``M(g)``.

    ``u_g^dag O^alpha u_g = sum_beta M_{alpha beta}(g) O^beta``.
    """

    ops: tuple[np.ndarray, ...]
    M: tuple[np.ndarray, ...]

    @property
    def dim(self) -> int:
        return len(self.ops)


def make_multiplet(rep: LocalRep, ops: Sequence[np.ndarray], atol: float = 1e-10) -> OrderParamMultiplet:
    """Find ``M(g)`` by Hilbert-Schmidt projection and verify closure, unitarity of the action
    and the absence of an identity component."""
    ops = tuple(np.asarray(o, dtype=complex) for o in ops)
    k = len(ops)
    gram = np.array([[np.vdot(a, b) for b in ops] for a in ops])  # <O_a, O_b>
    Ms = []
    for u in rep.mats:
        M = np.empty((k, k), dtype=complex)
        for a, O in enumerate(ops):
            target = u.conj().T @ O @ u
            rhs = np.array([np.vdot(b, target) for b in ops])
            coef = np.linalg.solve(gram.T, rhs)
            resid = target - sum(c * b for c, b in zip(coef, ops))
            if np.abs(resid).max() > atol:
                raise ValueError("operator set is not closed under the group action")
            M[a] = coef
        Ms.append(M)
    G = rep.group
    for g in range(G.order):
        for h in range(G.order):
            # u_{gh}^dag O u_{gh} = u_h^dag (u_g^dag O u_g) u_h  =>  M(gh) = M(g) M(h)
            if not np.allclose(Ms[G.mul(g, h)], Ms[g] @ Ms[h], atol=atol):
                raise ValueError("M is not a representation")
    mult = OrderParamMultiplet(ops, tuple(Ms))
    if abs(trivial_content(mult)) > atol:
        raise ValueError("multiplet contains the identity representation")
    return mult


def trivial_content(mult: OrderParamMultiplet) -> complex:
    """Multiplicity of the identity irrep, ``(1/|G|) sum_g tr M(g)``."""
    return complex(sum(np.trace(M) for M in mult.M) / len(mult.M))


def is_irreducible(mult: OrderParamMultiplet, atol: float = 1e-10) -> bool:
    norm = sum(abs(np.trace(M)) ** 2 for M in mult.M) / len(mult.M)
    return abs(norm - 1.0) < atol


def _two_site(rep: LocalRep, L: int, A: np.ndarray, i: int, B: np.ndarray, j: int) -> np.ndarray:
    """Operator ``A`` on site ``i`` and ``B`` on site ``j``; site 0 is the least-significant digit."""
    d = rep.d
    factors = [np.eye(d, dtype=complex)] * L
    factors[i] = A
    factors[j] = B
    return reduce(np.kron, factors[::-1])


@dataclass(frozen=True)
class MultipletCorrelators:
    conventional: np.ndarray  # [alpha, beta]
    renyi2: np.ndarray


def multiplet_correlators(rep: LocalRep, mult: OrderParamMultiplet, L: int, i: int, j: int) -> MultipletCorrelators:
    """Conventional ``Tr(rho O^a(i)^dag O^b(j))`` and Renyi-2 ``Tr(rho W rho W^dag)/Tr(rho^2)``
    with ``W = O^a(i)^dag O^b(j)``."""
    if i == j:
        raise ValueError("sites must differ")
    rho = build_sssb_state(rep, L)
    pur = float(np.real(np.vdot(rho, rho)))
    k = mult.dim
    conv = np.empty((k, k), dtype=complex)
    ren = np.empty((k, k), dtype=complex)
    for a, Oa in enumerate(mult.ops):
        for b, Ob in enumerate(mult.ops):
            W = _two_site(rep, L, Oa.conj().T, i, Ob, j)
            conv[a, b] = np.trace(rho @ W)
            ren[a, b] = np.trace(rho @ W @ rho @ W.conj().T) / pur
    return MultipletCorrelators(conv, ren)


def renyi2_trace_formula(rep: LocalRep, Oa: np.ndarray, Ob: np.ndarray, L: int) -> complex:
    """Renyi-2 of ``W = Oa^dag (site i) Ob (site j)`` on ``rho_S`` from the group sum

    ``N_I^{-1} |G|^{-2} sum_{g,g'} tr(u_g Oa^dag u_g' Oa) tr(u_g Ob u_g' Ob^dag) (tr u_{g g'})^{L-2}``,

    which never builds an ``L``-site operator.
    """
    G = rep.group
    u = rep.mats
    chars = rep.characters()
    n_i = identity_sector_count(rep, L)
    total = 0j
    for g in range(G.order):
        for h in range(G.order):
            t1 = np.trace(u[g] @ Oa.conj().T @ u[h] @ Oa)
            t2 = np.trace(u[g] @ Ob @ u[h] @ Ob.conj().T)
            total += t1 * t2 * chars[G.mul(g, h)] ** (L - 2)
    # Tr(rho W rho W^dag) = total / (|G|^2 N_I^2); divide by Tr rho^2 = 1/N_I
    return complex(total / (G.order**2 * n_i))


def charged_operator(rep: LocalRep) -> np.ndarray:
    """A one-dimensional charged operator for the built-in cyclic reps."""
    n = rep.d
    if rep.name.startswith("shift"):
        w = cmath.exp(2j * math.pi / n)
        return np.diag(w ** np.arange(n))
    if rep.name.startswith("clock"):
        return np.roll(np.eye(n), 1, axis=0).astype(complex)
    raise ValueError("no default charged operator for this representation")


def standard_multiplet_s3(rep: LocalRep) -> OrderParamMultiplet:
    """Two diagonal operators spanning the 2-dimensional irrep of ``S3`` on ``C^3``."""
    w = cmath.exp(2j * math.pi / 3)
    return make_multiplet(rep, [np.diag([1, w, w * w]), np.diag([1, w * w, w])])
