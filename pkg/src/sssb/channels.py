"""Kraus channels, the lattice decoherence channels, and symmetry tests.

A channel factor is a list of ``(weight, op)`` pairs, meaning Kraus operators
``sqrt(weight) * op``.  ``op`` is either a :class:`PauliString` or a
:class:`DenseOp`.  Composite channels apply their factors in a fixed order.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .lattice import Lattice
from .qcore import (
    ATOL_IDENTITY,
    PauliString,
    apply_pauli,
    dm,
    embed_operator,
    is_unitary,
)

SYMMETRY_ATOL = 1e-9


@dataclass(frozen=True)
class DenseOp:
    matrix: np.ndarray
    targets: tuple[int, ...]

    def full(self, n_qubits: int) -> np.ndarray:
        return embed_operator(self.matrix, self.targets, n_qubits)


Op = PauliString | DenseOp


def _op_matrix(op: Op, n_qubits: int) -> np.ndarray:
    if isinstance(op, PauliString):
        return op.to_matrix()
    return op.full(n_qubits)


@dataclass(frozen=True)
class KrausChannel:
    n_qubits: int
    kraus: tuple[tuple[float, Op], ...]

    def __post_init__(self):
        for w, op in self.kraus:
            if w < 0:
                raise ValueError("Kraus weights must be nonnegative")
            if isinstance(op, PauliString) and op.n_qubits != self.n_qubits:
                raise ValueError("Kraus operator acts on the wrong register")

    def apply(self, rho: np.ndarray) -> np.ndarray:
        if rho.ndim == 1:
            rho = dm(rho)
        out = np.zeros_like(rho, dtype=complex)
        for w, op in self.kraus:
            if w == 0:
                continue
            if isinstance(op, PauliString):
                out += w * apply_pauli(rho, op)
            else:
                K = op.full(self.n_qubits)
                out += w * (K @ rho @ K.conj().T)
        return out

    __call__ = apply

    def completeness_defect(self) -> float:
        """``|| sum_m K_m^dag K_m - I ||_max``."""
        if all(isinstance(op, PauliString) for _, op in self.kraus):
            # Pauli strings are unitary, so the sum is (sum of weights) * I
            return abs(sum(w for w, _ in self.kraus) - 1.0)
        dim = 1 << self.n_qubits
        acc = np.zeros((dim, dim), dtype=complex)
        for w, op in self.kraus:
            K = _op_matrix(op, self.n_qubits)
            acc += w * (K.conj().T @ K)
        return float(np.abs(acc - np.eye(dim)).max())

    def is_trace_preserving(self, atol: float = ATOL_IDENTITY) -> bool:
        return self.completeness_defect() <= atol


@dataclass(frozen=True)
class CompositeChannel:
    """Ordered composition; ``factors[0]`` is applied first."""

    n_qubits: int
    factors: tuple[KrausChannel, ...]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        if rho.ndim == 1:
            rho = dm(rho)
        for f in self.factors:
            rho = f.apply(rho)
        return rho

    __call__ = apply

    def is_trace_preserving(self, atol: float = ATOL_IDENTITY) -> bool:
        return all(f.is_trace_preserving(atol) for f in self.factors)

    def reordered(self, order: Sequence[int]) -> "CompositeChannel":
        return CompositeChannel(self.n_qubits, tuple(self.factors[i] for i in order))


Channel = KrausChannel | CompositeChannel


def _check_rate(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"error rate {p} outside [0, 1]")


def pauli_mix(P: PauliString, p: float) -> KrausChannel:
    """``rho -> (1-p) rho + p P rho P^dag``."""
    _check_rate(p)
    return KrausChannel(P.n_qubits, ((1.0 - p, PauliString.identity(P.n_qubits)), (p, P)))


def compose_paulis(paulis: Iterable[PauliString], p: float, n_qubits: int) -> CompositeChannel:
    _check_rate(p)
    return CompositeChannel(n_qubits, tuple(pauli_mix(P, p) for P in paulis))


def _width(lat_sites: int, n_qubits: int | None) -> int:
    n = lat_sites if n_qubits is None else n_qubits
    if n < lat_sites:
        raise ValueError("register smaller than the lattice sublattice")
    return n


def bond_dephase(lat: Lattice, p: float, n_qubits: int | None = None) -> CompositeChannel:
    """``Z_a Z_b`` dephasing on every bond; vertex ``v`` is qubit ``v``."""
    n = _width(lat.n_vertices, n_qubits)
    return compose_paulis((PauliString.z_on(n, [b.a, b.b]) for b in lat.bonds()), p, n)


def bond_dephase_1d(lat: Lattice, p: float, n_qubits: int | None = None) -> CompositeChannel:
    if lat.kind != "chain":
        raise ValueError("expected a chain")
    return bond_dephase(lat, p, n_qubits)


def bond_dephase_2d(lat: Lattice, p: float, n_qubits: int | None = None) -> CompositeChannel:
    if lat.kind != "square":
        raise ValueError("expected a square lattice")
    return bond_dephase(lat, p, n_qubits)


def star_operator(lat: Lattice, v: int, n_qubits: int | None = None, letter: str = "X") -> PauliString:
    links, _ = lat.star_of(v)
    n = _width(lat.n_links, n_qubits)
    return PauliString.from_sites(n, {k: letter for k in links})


def plaquette_operator(lat: Lattice, plaq: tuple[int, int], n_qubits: int | None = None, on: str = "links") -> PauliString:
    """``Z`` product around a plaquette: on its links, or on its corner vertices."""
    if on == "links":
        sites = lat.plaquette_links(plaq)
        n = _width(lat.n_links, n_qubits)
    elif on == "corners":
        sites = lat.plaquette_corners(plaq)
        n = _width(lat.n_vertices, n_qubits)
    else:
        raise ValueError(on)
    return PauliString.z_on(n, sites)


def star_channel(lat: Lattice, p: float, n_qubits: int | None = None) -> CompositeChannel:
    """Four-spin ``X`` measurement noise on every star; link ``k`` is qubit ``k``."""
    if lat.kind != "square" or not lat.periodic:
        raise ValueError("star channel needs a periodic square lattice")
    n = _width(lat.n_links, n_qubits)
    return compose_paulis((star_operator(lat, v, n) for v in range(lat.n_vertices)), p, n)


def plaquette_channel(lat: Lattice, p: float, n_qubits: int | None = None) -> CompositeChannel:
    """Corner ``ZZZZ`` dephasing on every plaquette; vertex ``v`` is qubit ``v``."""
    if lat.kind != "square":
        raise ValueError("plaquette channel needs a square lattice")
    n = _width(lat.n_vertices, n_qubits)
    return compose_paulis((plaquette_operator(lat, q, n, on="corners") for q in lat.plaquettes()), p, n)


def toric_dephase(lat: Lattice, p: float) -> CompositeChannel:
    """Single-link ``Z`` dephasing on a toric-code register (qubits on links)."""
    _require_torus(lat)
    n = lat.n_links
    return compose_paulis((PauliString.z_on(n, [k]) for k in range(n)), p, n)


def fermion_partner(lat: Lattice, link: int) -> int:
    """Link paired with ``link`` by the fermion-hopping channel.

    The pair sits half a lattice step along ``+x, -y``: the x-link at ``(x, y)``
    pairs with the y-link at ``(x+1, y-1)``, and the y-link at ``(x, y)`` pairs
    with the x-link at ``(x, y)``.  Together they trace a staircase on the
    lattice, which is what makes the ``Z X`` products string-like.
    """
    _require_torus(lat)
    n_v = lat.n_vertices
    x, y = lat.coords(link % n_v)
    if link < n_v:
        return lat.link_y(x + 1, y - 1)
    return lat.link_x(x, y)


def fermion_hop(lat: Lattice, link: int) -> PauliString:
    return PauliString.from_sites(lat.n_links, {link: "Z", fermion_partner(lat, link): "X"})


def toric_fermion_channel(lat: Lattice, p: float) -> CompositeChannel:
    _require_torus(lat)
    return compose_paulis((fermion_hop(lat, k) for k in range(lat.n_links)), p, lat.n_links)


def fermion_loops(lat: Lattice, x0: int = 0, y0: int = 0) -> tuple[PauliString, PauliString]:
    """The two noncontractible loop operators that commute with every fermion hop."""
    _require_torus(lat)
    ops_x: dict[int, str] = {}
    for x in range(lat.Lx):
        ops_x[lat.link_x(x, y0)] = "Z"
        ops_x[lat.link_y(x, y0)] = "X"
    ops_y: dict[int, str] = {}
    for y in range(lat.Ly):
        ops_y[lat.link_y(x0, y)] = "Z"
        ops_y[lat.link_x(x0 - 1, y)] = "X"
    n = lat.n_links
    return PauliString.from_sites(n, ops_x), PauliString.from_sites(n, ops_y)


def _require_torus(lat: Lattice) -> None:
    if lat.kind != "square" or not lat.periodic:
        raise ValueError("toric-code channels need a periodic square lattice")


# --------------------------------------------------------------------------
# symmetry


class SymmetryClass(str, Enum):
    STRONG = "Strong"
    WEAK_ONLY = "WeakOnly"
    NONE = "None"


Symmetry = PauliString | np.ndarray


def _sym_matrix(U: Symmetry, n_qubits: int) -> np.ndarray:
    if isinstance(U, PauliString):
        if U.n_qubits != n_qubits:
            raise ValueError("symmetry acts on the wrong register")
        return U.to_matrix()
    U = np.asarray(U, dtype=complex)
    if not is_unitary(U):
        raise ValueError("symmetry operator is not unitary")
    return U


def _commutation_phase(K: np.ndarray, U: np.ndarray) -> complex | None:
    """Phase ``c`` with ``U K U^dag = c K``, or ``None`` if there is none."""
    lhs = U @ K @ U.conj().T
    mask = np.abs(K) > 1e-8
    if not mask.any():
        return None
    c = np.vdot(K[mask], lhs[mask]) / np.vdot(K[mask], K[mask])
    c = c / abs(c) if abs(c) > 0 else 1.0
    if np.linalg.norm(lhs - c * K) > SYMMETRY_ATOL * max(1.0, np.linalg.norm(K)):
        return None
    return c


def _factor_is_strong(f: KrausChannel, U: Symmetry) -> bool:
    ops = [op for w, op in f.kraus if w > 0]
    if isinstance(U, PauliString) and all(isinstance(op, PauliString) for op in ops):
        return len({op.commutes(U) for op in ops}) <= 1
    Um = _sym_matrix(U, f.n_qubits)
    phases = []
    for op in ops:
        c = _commutation_phase(_op_matrix(op, f.n_qubits), Um)
        if c is None:
            return False
        phases.append(c)
    return all(abs(c - phases[0]) < SYMMETRY_ATOL for c in phases)


def is_strong_symmetric_channel(ch: Channel, U: Symmetry) -> bool:
    """Every Kraus operator commutes with ``U`` up to one phase shared within each factor."""
    factors = ch.factors if isinstance(ch, CompositeChannel) else (ch,)
    return all(_factor_is_strong(f, U) for f in factors)


def is_weak_symmetric_channel(ch: Channel, U: Symmetry) -> bool:
    """``U E(rho) U^dag = E(U rho U^dag)``, checked on the Kraus set up to phases."""
    factors = ch.factors if isinstance(ch, CompositeChannel) else (ch,)
    for f in factors:
        Um = _sym_matrix(U, f.n_qubits)
        for w, op in f.kraus:
            if w > 0 and _commutation_phase(_op_matrix(op, f.n_qubits), Um) is None:
                return False
    return True


def strong_phase(rho: np.ndarray, U: Symmetry) -> complex | None:
    """Phase with ``U rho = e^{i phi} rho``, or ``None``."""
    Um = _sym_matrix(U, rho.shape[0].bit_length() - 1)
    lhs = Um @ rho
    mask = np.abs(rho) > 1e-8
    if not mask.any():
        return None
    c = np.vdot(rho[mask], lhs[mask]) / np.vdot(rho[mask], rho[mask])
    if abs(c) < 1e-12:
        return None
    c = c / abs(c)
    if np.linalg.norm(lhs - c * rho) > SYMMETRY_ATOL:
        return None
    return complex(c)


def classify_state_symmetry(rho: np.ndarray, U: Symmetry) -> SymmetryClass:
    Um = _sym_matrix(U, rho.shape[0].bit_length() - 1)
    if np.linalg.norm(Um @ rho @ Um.conj().T - rho) > SYMMETRY_ATOL:
        return SymmetryClass.NONE
    if strong_phase(rho, Um) is not None:
        return SymmetryClass.STRONG
    return SymmetryClass.WEAK_ONLY


def charge_of(rho: np.ndarray, U: Symmetry) -> float | None:
    """Phase angle of a strongly symmetric ``rho`` in ``(-pi, pi]``."""
    c = strong_phase(rho, U)
    return None if c is None else cmath.phase(c)
