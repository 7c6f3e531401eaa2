"""Mixed-state and purified-state diagnostics.

All correlators take a charged pair ``(O_x, O_y)`` of Pauli strings and work
with their product ``Q = O_x O_y``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .purify import PurifiedState
from .qcore import (
    KET_MINUS,
    KET_PLUS,
    PauliString,
    apply_pauli,
    expectation,
    matrix_sqrt_psd,
    partial_trace,
    plus_state,
    purity,
    von_neumann_entropy,
)

DEGENERATE = 1e-14
OVERLAP_FLOOR = 1e-12
MAX_ANNEALED_ANCILLAS = 20
FIDELITY_CUTOFF = 1e-13


@dataclass(frozen=True)
class ChargedPair:
    O_x: PauliString
    O_y: PauliString

    def __post_init__(self):
        if self.O_x.n_qubits != self.O_y.n_qubits:
            raise ValueError("pair operators act on different registers")
        if set(self.O_x.support) & set(self.O_y.support):
            raise ValueError("pair operators must have disjoint supports")

    @classmethod
    def zz(cls, n_qubits: int, i: int, j: int) -> "ChargedPair":
        return cls(PauliString.z_on(n_qubits, [i]), PauliString.z_on(n_qubits, [j]))

    @property
    def product(self) -> PauliString:
        return self.O_x * self.O_y


PairLike = ChargedPair | PauliString


def _product(pair: PairLike) -> PauliString:
    return pair.product if isinstance(pair, ChargedPair) else pair


def _real(z: complex, what: str, atol: float = 1e-10) -> float:
    if abs(np.imag(z)) > atol * max(1.0, abs(z)):
        raise ArithmeticError(f"{what} has imaginary part {np.imag(z):.3e}")
    return float(np.real(z))


def renyi2_correlator(rho: np.ndarray, pair: PairLike) -> float:
    """``Tr(Q rho Q^dag rho) / Tr(rho^2)`` with ``Q = O_x O_y``."""
    pur = purity(rho)
    if pur < DEGENERATE:
        raise ValueError("Tr rho^2 is numerically zero")
    Q = _product(pair)
    num = np.vdot(rho, apply_pauli(rho, Q))  # Tr(rho^dag Q rho Q^dag)
    return _real(num / pur, "Renyi-2 correlator")


def renyi2_order_param(rho: np.ndarray, O: PauliString) -> float:
    """Single-operator version ``Tr(O rho O^dag rho) / Tr(rho^2)``."""
    return renyi2_correlator(rho, O)


def conventional_correlator(rho: np.ndarray, pair: PairLike) -> float:
    return _real(expectation(rho, _product(pair)), "two-point function")


def typeII_strange_correlator(rho: np.ndarray, pair: PairLike, rho0: np.ndarray | None = None) -> float:
    """``Tr(rho0 Q rho Q^dag) / Tr(rho0 rho)``; ``rho0`` defaults to ``|+...+><+...+|``.

    ``rho0`` may be passed as a state vector, which is the common pure case.
    """
    Q = _product(pair)
    n = Q.n_qubits
    ref = plus_state(n) if rho0 is None else np.asarray(rho0)
    sigma = apply_pauli(rho, Q)
    if ref.ndim == 1:
        num = np.vdot(ref, sigma @ ref)
        den = np.vdot(ref, rho @ ref)
    else:
        num = np.trace(ref @ sigma)
        den = np.trace(ref @ rho)
    if abs(den) < DEGENERATE:
        raise ValueError("reference state is orthogonal to rho")
    return _real(num / den, "type-II strange correlator")


def strange_correlator(trivial: np.ndarray, psi: np.ndarray, pair: PairLike) -> complex:
    """``<trivial| Q |psi> / <trivial|psi>``."""
    Q = _product(pair)
    den = np.vdot(trivial, psi)
    if abs(den) < OVERLAP_FLOOR:
        raise ValueError("trivial state has no overlap with psi")
    return complex(np.vdot(trivial, apply_pauli(psi, Q)) / den)


def trivial_reference(psi: PurifiedState) -> np.ndarray:
    """System in ``|+>`` on every site, ancillas in ``|0>``."""
    out = np.zeros(1 << psi.register.n_qubits, dtype=complex)
    out[: 1 << psi.n_system] = plus_state(psi.n_system)
    return out


def _system_pauli(psi: PurifiedState, Q: PauliString) -> PauliString:
    if Q.n_qubits == psi.n_system:
        return Q
    if Q.n_qubits != psi.register.n_qubits or (Q.x_mask | Q.z_mask) >> psi.n_system:
        raise ValueError("operator must act on system qubits only")
    return PauliString(psi.n_system, Q.x_mask, Q.z_mask, Q.phase)


@dataclass(frozen=True)
class AnnealedResult:
    uniform: float
    born_weighted: float


def annealed_strange_correlator_full(psi: PurifiedState, pair: PairLike, ref: np.ndarray | None = None) -> AnnealedResult:
    """Ancilla-pattern average of ``|C_s|^2`` with ``C_s`` the strange correlator
    against ``|ref> x |s>``, in two weightings.

    ``uniform`` is ``sum_s |<ref,s|Q|psi>|^2 / sum_s |<ref,s|psi>|^2``: every
    pattern contributes with the weight of its trivial-state overlap.
    ``born_weighted`` averages ``|C_s|^2`` with the Born probability of the
    ancilla outcome ``s`` instead.
    """
    if psi.n_ancilla > MAX_ANNEALED_ANCILLAS:
        raise ValueError(f"{psi.n_ancilla} ancillas exceed the explicit pattern budget")
    Q = _system_pauli(psi, _product(pair))
    ref = plus_state(psi.n_system) if ref is None else ref
    M = psi.amplitude_matrix()  # (patterns, system)
    QM = _apply_rows(M, Q)
    den = M @ ref.conj()
    num = QM @ ref.conj()
    uniform = float(np.sum(np.abs(num) ** 2) / np.sum(np.abs(den) ** 2))
    born = np.sum(np.abs(M) ** 2, axis=1)
    ok = np.abs(den) > OVERLAP_FLOOR
    C2 = np.abs(num[ok]) ** 2 / np.abs(den[ok]) ** 2
    born_weighted = float(np.sum(born[ok] * C2) / np.sum(born[ok]))
    return AnnealedResult(uniform, born_weighted)


def _apply_rows(M: np.ndarray, Q: PauliString) -> np.ndarray:
    """Apply ``Q`` to every row of ``M`` (each row a system state vector)."""
    idx = np.arange(M.shape[1])
    src = idx ^ Q.x_mask
    signs = 1 - 2 * (np.bitwise_count(src & Q.z_mask).astype(np.int64) & 1)
    return Q.coefficient * signs[None, :] * M[:, src]


def annealed_strange_correlator(psi: PurifiedState, pair: PairLike) -> float:
    return annealed_strange_correlator_full(psi, pair).uniform


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity ``(Tr |sqrt(rho) sqrt(sigma)|)^2``.

    The nuclear-norm form keeps round-off linear; eigenvalues below
    ``FIDELITY_CUTOFF`` of the largest are treated as zero.
    """
    a = matrix_sqrt_psd(rho, FIDELITY_CUTOFF)
    b = matrix_sqrt_psd(sigma, FIDELITY_CUTOFF)
    return float(np.sum(np.linalg.svd(a @ b, compute_uv=False)) ** 2)


def fidelity_correlator(rho: np.ndarray, pair: PairLike) -> float:
    return fidelity(rho, apply_pauli(rho, _product(pair)))


# --------------------------------------------------------------------------
# mutual information and the measurement-induced bound


def mutual_information(state: np.ndarray, A: Sequence[int], B: Sequence[int]) -> float:
    """``S(A) + S(B) - S(AB)`` in nats."""
    A, B = list(A), list(B)
    if set(A) & set(B):
        raise ValueError("regions overlap")
    sA = von_neumann_entropy(partial_trace(state, A))
    sB = von_neumann_entropy(partial_trace(state, B))
    sAB = von_neumann_entropy(partial_trace(state, A + B))
    return sA + sB - sAB


@dataclass(frozen=True)
class MIEOutcome:
    outcome: tuple[int, ...]
    probability: float
    mutual_information: float
    bound: float
    charges: tuple[int, int]
    strange: complex
    product_term: float  # Tr(rho_A x rho_B Y), dropped from the bound


@dataclass(frozen=True)
class MIEReport:
    holds: bool
    outcomes: list[MIEOutcome]

    @property
    def worst_margin(self) -> float:
        return min((o.mutual_information - o.bound for o in self.outcomes), default=math.inf)


_BASES = {"z": (np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)), "x": (KET_PLUS, KET_MINUS)}


def mie_bound_check(psi: PurifiedState, A: Sequence[int], B: Sequence[int], C: Sequence[int], pair: ChargedPair,
                    region_basis: str = "x", charge_basis: str = "x", tol: float = 1e-12) -> MIEReport:
    """Test ``I(A:B) >= p(m_a m_b | c, s)^2 |C|^2 / (2 |O_A|^2 |O_B|^2)`` on every outcome.

    Region ``C`` is measured in ``region_basis`` and every ancilla in ``z``; for
    each outcome with probability above ``1e-12`` the post-measurement state on
    ``A`` and ``B`` is formed and each choice of the fixed-charge states
    ``m_a, m_b`` (in ``charge_basis``) is checked.  ``A`` and ``B`` are single
    system sites; Pauli operators have unit norm.
    """
    A, B, C = list(A), list(B), list(C)
    if len(A) != 1 or len(B) != 1:
        raise ValueError("A and B must be single sites")
    if set(A) & set(B) or set(A) & set(C) or set(B) & set(C):
        raise ValueError("regions overlap")
    n_sys = psi.n_system
    if set(A + B + C) != set(range(n_sys)):
        raise ValueError("A, B and C must partition the system")
    a, b = A[0], B[0]
    OA, OB = pair.O_x, pair.O_y
    if OA.support != [a] or OB.support != [b]:
        raise ValueError("charged operators must sit on A and B")
    oa = _local_matrix(OA, a)
    ob = _local_matrix(OB, b)

    # tensor with axes (ancilla patterns, system sites high..low)
    M = psi.amplitude_matrix()
    T = M.reshape((M.shape[0],) + (2,) * n_sys)
    axis = {site: 1 + (n_sys - 1 - site) for site in range(n_sys)}
    # rotate the measured system sites into their measurement basis
    kets = _BASES[region_basis]
    rot = np.array([k.conj() for k in kets])  # row m is <m|
    for c in C:
        T = np.moveaxis(np.tensordot(rot, T, axes=([1], [axis[c]])), 0, axis[c])
    # order remaining axes as (pattern, C outcomes..., site b, site a)
    T = np.moveaxis(T, [axis[c] for c in C] + [axis[b], axis[a]],
                    list(range(1, 1 + len(C))) + [1 + len(C), 2 + len(C)])
    amps = T.reshape(-1, 2, 2)  # outcome, b, a
    charge = _BASES[charge_basis]
    out: list[MIEOutcome] = []
    holds = True
    n_c = len(C)
    for k in range(amps.shape[0]):
        phi = amps[k]
        prob = float(np.sum(np.abs(phi) ** 2))
        if prob <= tol:
            continue
        phi = phi / math.sqrt(prob)
        vec = phi.reshape(-1)  # index b*2 + a, so site a is the low bit
        rho_a = partial_trace(vec, [0], 2)
        info = 2 * von_neumann_entropy(rho_a)
        pattern, c_idx = divmod(k, 1 << n_c)
        outcome = tuple(int(x) for x in np.binary_repr(c_idx, n_c)) + tuple(
            int(x) for x in np.binary_repr(pattern, psi.n_ancilla) if psi.n_ancilla)
        for ia, ma in enumerate(charge):
            for ib, mb in enumerate(charge):
                m = np.kron(mb, ma)
                overlap = np.vdot(m, vec)
                if abs(overlap) ** 2 <= tol:
                    continue
                num = np.vdot(m, np.kron(ob, oa) @ vec)
                strange = complex(num / overlap)
                p_cond = abs(overlap) ** 2
                rho_b = partial_trace(vec, [1], 2)
                prod = np.vdot(m, np.kron(ob, oa) @ (np.kron(rho_b, rho_a) @ m))
                bound = p_cond**2 * abs(strange) ** 2 / 2.0
                ok = info >= bound - 1e-12
                holds &= ok
                out.append(MIEOutcome(outcome, prob, info, bound, (ia, ib), strange, float(abs(prod))))
    return MIEReport(bool(holds), out)


def _local_matrix(P: PauliString, site: int) -> np.ndarray:
    local = PauliString(1, (P.x_mask >> site) & 1, (P.z_mask >> site) & 1, P.phase)
    return local.to_matrix()
