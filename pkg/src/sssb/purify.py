"""Purified states: Stinespring circuits on system + ancilla registers.

Every gate family here has the same shape.  A parity operator ``Pi`` on some
system qubits splits them into ``P+ = (1 + Pi)/2`` and ``P- = (1 - Pi)/2``, and
one ancilla starting in a reference state ``|r>`` is rotated by::

    U(theta) = P+ (cos I + sin F) + P- (sin I + cos F)

where ``F`` is an anti-Hermitian unitary with ``F|r>`` orthogonal to ``|r>``
(``F = -iY`` for ``|r> = |0>``, ``F = iY`` for ``|r> = |+>``).  Tracing out the
ancilla gives ``rho -> (1-p) rho + p Pi rho Pi`` with ``p = (1 - sin 2 theta)/2``.
At ``theta = 0`` the ancilla is flipped exactly when ``Pi = -1``; at
``theta = pi/4`` the gate acts on the ancilla alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from . import channels
from .lattice import Lattice, Path, Register, boundary_links, path_between
from .qcore import (
    KET_0,
    KET_PLUS,
    PauliString,
    apply_gate,
    apply_pauli,
    embed_operator,
    expectation,
    normalize,
    product_state,
    purity,
)

_Y = np.array([[0, -1j], [1j, 0]])
F_FROM_ZERO = -1j * _Y  # maps |0> to |1>
F_FROM_PLUS = 1j * _Y  # maps |+> to |->

GAPLESS_MAX_QUBITS = 18


def parity_rotation(parity: np.ndarray, theta: float, F: np.ndarray = F_FROM_ZERO) -> np.ndarray:
    """Gate on ``k`` control qubits (low bits) plus one ancilla (highest bit)."""
    dim = parity.shape[0]
    Pp = 0.5 * (np.eye(dim) + parity)
    Pm = 0.5 * (np.eye(dim) - parity)
    c, s = math.cos(theta), math.sin(theta)
    return np.kron(np.eye(2), c * Pp + s * Pm) + np.kron(F, s * Pp + c * Pm)


def _zz(k: int) -> np.ndarray:
    return PauliString.z_on(k, range(k)).to_matrix()


def _xx(k: int) -> np.ndarray:
    return PauliString.x_on(k, range(k)).to_matrix()


def cluster_gate_1d(theta: float) -> np.ndarray:
    """Three-qubit gate on ``(system i, ancilla, system i+1)``, in that bit order."""
    _check_theta(theta)
    G = parity_rotation(_zz(2), theta)  # bits: sys i, sys i+1, ancilla
    return embed_operator(G, [0, 2, 1], 3)


def link_gate(theta: float) -> np.ndarray:
    """``Z Z``-controlled ancilla rotation, bit order ``(sys a, sys b, ancilla)``."""
    _check_theta(theta)
    return parity_rotation(_zz(2), theta)


def star_gate(theta: float, n_links: int = 4) -> np.ndarray:
    """Star-``X``-controlled rotation of a vertex ancilla prepared in ``|+>``."""
    _check_theta(theta)
    return parity_rotation(_xx(n_links), theta, F_FROM_PLUS)


def plaquette_gate(theta: float, n_corners: int = 4) -> np.ndarray:
    """Corner-``Z``-controlled rotation of a plaquette ancilla prepared in ``|0>``."""
    _check_theta(theta)
    return parity_rotation(_zz(n_corners), theta)


def _check_theta(theta: float) -> None:
    if not -1e-15 <= theta <= math.pi / 4 + 1e-15:
        raise ValueError(f"theta={theta} outside [0, pi/4]")


# --------------------------------------------------------------------------
# purified states


@dataclass(frozen=True)
class PurifiedState:
    state: np.ndarray
    register: Register
    theta: float
    family: str
    initial_system: np.ndarray = field(repr=False)
    channel: Callable[[float], channels.Channel] = field(repr=False)

    @property
    def lattice(self) -> Lattice:
        return self.register.lattice

    @property
    def n_system(self) -> int:
        return self.register.n_system

    @property
    def n_ancilla(self) -> int:
        return self.register.n_ancilla

    def amplitude_matrix(self) -> np.ndarray:
        """``M[a, s]``: ancilla index ``a``, system index ``s``."""
        return self.state.reshape(1 << self.n_ancilla, 1 << self.n_system)

    def reduced(self) -> np.ndarray:
        """System density matrix after tracing out every ancilla."""
        M = self.amplitude_matrix()
        return M.T @ M.conj()

    def expect(self, P: PauliString) -> float:
        return float(np.real(expectation(self.state, P)))

    def pauli(self, sys: dict[int, str] | None = None, anc: dict[int, str] | None = None) -> PauliString:
        """Pauli string from system-site and ancilla-site letter maps."""
        ops = dict(sys or {})
        for k, letter in (anc or {}).items():
            ops[self.register.anc(k)] = letter
        return PauliString.from_sites(self.register.n_qubits, ops)

    def channel_output(self, p: float | None = None) -> np.ndarray:
        """The matching channel applied to the initial system product state."""
        if p is None:
            p = 0.5 * (1 - math.sin(2 * self.theta))
        return self.channel(p)(self.initial_system)


def _start(register: Register, sys_ket: np.ndarray, anc_ket: np.ndarray) -> np.ndarray:
    register.check_budget()
    return product_state([sys_ket] * register.n_system + [anc_ket] * register.n_ancilla)


def build_1d_spt(L: int, theta: float, periodic: bool = False) -> PurifiedState:
    """Cluster-state purification of the bond-dephased chain, ancillas on links."""
    if L < 2:
        raise ValueError("need L >= 2")
    lat = Lattice.chain(L, periodic)
    reg = Register(lat, "vertices", "links")
    psi = _start(reg, KET_PLUS, KET_0)
    G = link_gate(theta)
    for b in lat.bonds():
        psi = apply_gate(psi, G, [b.a, b.b, reg.anc(b.link)], check_unitary=False)
    init = product_state([KET_PLUS] * L)
    return PurifiedState(psi, reg, theta, "cluster-1d", init, lambda p: channels.bond_dephase(lat, p))


def build_2d_spt(Lx: int, Ly: int, theta: float, periodic: bool = True) -> PurifiedState:
    """Vertex system, link ancillas, one ``ZZ``-controlled gate per link."""
    lat = Lattice.square(Lx, Ly, periodic)
    reg = Register(lat, "vertices", "links")
    psi = _start(reg, KET_PLUS, KET_0)
    G = link_gate(theta)
    for b in lat.bonds():
        psi = apply_gate(psi, G, [b.a, b.b, reg.anc(b.link)], check_unitary=False)
    init = product_state([KET_PLUS] * lat.n_vertices)
    return PurifiedState(psi, reg, theta, "link-2d", init, lambda p: channels.bond_dephase(lat, p))


def build_1form_system_spt(Lx: int, Ly: int, theta: float) -> PurifiedState:
    """Link system in ``|0>``, vertex ancillas in ``|+>``, star-``X`` controlled gates."""
    lat = Lattice.square(Lx, Ly, True)
    reg = Register(lat, "links", "vertices")
    psi = _start(reg, KET_0, KET_PLUS)
    for v in range(lat.n_vertices):
        links, _ = lat.star_of(v)
        G = star_gate(theta, len(links))
        psi = apply_gate(psi, G, list(links) + [reg.anc(v)], check_unitary=False)
    init = product_state([KET_0] * lat.n_links)
    return PurifiedState(psi, reg, theta, "star-1form", init, lambda p: channels.star_channel(lat, p))


def build_subsystem_spt(Lx: int, Ly: int, theta: float = 0.0, periodic: bool = True) -> PurifiedState:
    """Vertex system in ``|+>``, plaquette ancillas flipped by the corner ``Z`` parity."""
    lat = Lattice.square(Lx, Ly, periodic)
    reg = Register(lat, "vertices", "plaquettes")
    psi = _start(reg, KET_PLUS, KET_0)
    for k, q in enumerate(lat.plaquettes()):
        corners = lat.plaquette_corners(q)
        G = plaquette_gate(theta, len(corners))
        psi = apply_gate(psi, G, list(corners) + [reg.anc(k)], check_unitary=False)
    init = product_state([KET_PLUS] * lat.n_vertices)
    return PurifiedState(psi, reg, theta, "plaquette-subsystem", init, lambda p: channels.plaquette_channel(lat, p))


def build_toric_code(Lx: int, Ly: int) -> np.ndarray:
    """Toric-code ground state in the sector where both noncontractible ``Z`` loops are ``+1``."""
    lat = Lattice.square(Lx, Ly, True)
    n = lat.n_links
    if n > 14:
        raise ValueError(f"{n} link qubits exceed the dense budget")
    psi = product_state([KET_0] * n)
    for v in range(lat.n_vertices):
        psi = 0.5 * (psi + apply_pauli(psi, channels.star_operator(lat, v)))
    return normalize(psi)


# --------------------------------------------------------------------------
# EPR doubling


def epr_double(source: PurifiedState | np.ndarray) -> np.ndarray:
    """Doubled system state ``vec(rho) / sqrt(Tr rho^2)``.

    The first copy occupies the low ``N`` bits and the conjugated copy the high
    ``N`` bits, so amplitude ``rho[a, b]`` sits at index ``a + 2**N * b``.
    """
    rho = source.reduced() if isinstance(source, PurifiedState) else np.asarray(source)
    pur = purity(rho)
    if pur < 1e-14:
        raise ValueError("Tr rho^2 is numerically zero")
    return rho.flatten(order="F") / math.sqrt(pur)


def conjugate(P: PauliString) -> PauliString:
    """Entrywise complex conjugate; ``X`` and ``Z`` are real so only the phase flips."""
    return PauliString(P.n_qubits, P.x_mask, P.z_mask, -P.phase)


def doubled_operator(Q: PauliString) -> PauliString:
    return Q.tensor(conjugate(Q))


def four_point(doubled: np.ndarray, Q: PauliString) -> float:
    """``<pp| Q x Q* |pp>`` on an EPR-doubled state."""
    return float(np.real(expectation(doubled, doubled_operator(Q))))


# --------------------------------------------------------------------------
# string and membrane orders


def string_operator(psi: PurifiedState, path: Path) -> PauliString:
    """``Z_a (prod of ancilla Z over the path's links) Z_b`` for link-ancilla registers."""
    if psi.register.system != "vertices" or psi.register.ancilla != "links":
        raise ValueError("string order needs vertex system qubits and link ancillas")
    if not path.links:
        raise ValueError("path has no links")
    a, b = path.endpoints
    if a == b:
        raise ValueError("path endpoints coincide")
    anc: dict[int, str] = {}
    for k in path.links:
        if k in anc:
            raise ValueError("path reuses a link")
        anc[k] = "Z"
    return psi.pauli({a: "Z", b: "Z"}, anc)


def string_order(psi: PurifiedState, path: Path | tuple[int, int]) -> float:
    if isinstance(path, tuple):
        path = path_between(psi.lattice, *path)
    return psi.expect(string_operator(psi, path))


def membrane_operator(psi: PurifiedState, region: Sequence) -> PauliString:
    """Membrane operator for the star (1-form) and plaquette (subsystem) registers.

    Star register: ``region`` is a vertex set ``A``; the operator is ``X`` on the
    links leaving ``A`` times ancilla ``X`` on ``A``.  Plaquette register:
    ``region`` is ``(x0, y0, w, h)``, a rectangle of plaquettes; the operator is
    ``Z`` on the rectangle's four corners times ancilla ``Z`` on every plaquette
    inside.
    """
    lat, reg = psi.lattice, psi.register
    if reg.system == "links" and reg.ancilla == "vertices":
        A = list(region)
        if not A or len(set(A)) != len(A) or any(not 0 <= v < lat.n_vertices for v in A):
            raise ValueError(f"bad vertex region {region}")
        return psi.pauli({k: "X" for k in boundary_links(lat, A)}, {v: "X" for v in A})
    if reg.system == "vertices" and reg.ancilla == "plaquettes":
        x0, y0, w, h = region
        if w < 1 or h < 1:
            raise ValueError("rectangle must contain at least one plaquette")
        plaqs = lat.plaquettes()
        inside = [(x0 + i, y0 + j) for j in range(h) for i in range(w)]
        idx = []
        for q in inside:
            qq = (q[0] % lat.Lx, q[1] % lat.Ly) if lat.periodic else q
            if qq not in plaqs:
                raise ValueError(f"plaquette {q} not on the lattice")
            idx.append(plaqs.index(qq))
        if len(set(idx)) != len(idx):
            raise ValueError("rectangle wraps onto itself")
        corners = [lat.vertex(x0, y0), lat.vertex(x0 + w, y0), lat.vertex(x0, y0 + h), lat.vertex(x0 + w, y0 + h)]
        z = PauliString.z_on(reg.n_qubits, corners)  # repeated corners cancel
        return z * psi.pauli(None, {k: "Z" for k in idx})
    raise ValueError(f"no membrane operator for register {reg.system}/{reg.ancilla}")


def membrane_order(psi: PurifiedState, region: Sequence) -> float:
    return psi.expect(membrane_operator(psi, region))


# --------------------------------------------------------------------------
# gapless SPT chain


def pauli_sparse(P: PauliString) -> sp.csr_matrix:
    dim = 1 << P.n_qubits
    idx = np.arange(dim)
    signs = 1 - 2 * (np.bitwise_count(idx & P.z_mask).astype(np.int64) & 1)
    return sp.csr_matrix((P.coefficient * signs, (idx ^ P.x_mask, idx)), shape=(dim, dim))


def gapless_terms(L: int) -> tuple[Register, list[PauliString], list[PauliString]]:
    """Bulk terms and the two boundary operators of the open gapless-SPT chain."""
    lat = Lattice.chain(L)
    reg = Register(lat, "vertices", "links")
    n = reg.n_qubits
    terms = []
    for i in range(L - 1):
        terms.append(PauliString.from_sites(n, {i: "Z", reg.anc(i): "Z", i + 1: "Z"}))
    for i in range(1, L - 1):
        terms.append(PauliString.from_sites(n, {reg.anc(i - 1): "X", i: "X", reg.anc(i): "X"}))
    for i in range(L):
        terms.append(PauliString.from_sites(n, {i: "X"}))
    # left and right edge operators commute with every bulk term
    edges = [PauliString.from_sites(n, {0: "X", reg.anc(0): "X"}),
             PauliString.from_sites(n, {reg.anc(L - 2): "X", L - 1: "X"})]
    return reg, terms, edges


@dataclass(frozen=True)
class GaplessGroundState:
    psi: PurifiedState
    energy: float
    residual: float
    gap: float


def build_gapless_spt(L: int, boundary_field: float = 1e-6, seed: int = 1234, tol: float = 1e-12,
                      maxiter: int = 20_000) -> GaplessGroundState:
    """Ground state of ``-sum(Z Z~ Z + X~ X X~ + X)`` on an open chain.

    The two edge operators ``X_0 X~_0`` and ``X~_{L-2} X_{L-1}`` commute with the
    Hamiltonian and label degenerate sectors; a weak field along them selects
    the sector where both are ``+1``.  Among the lowest Lanczos vectors we keep
    the one with the largest edge eigenvalue, so the tiny splitting never has
    to be resolved by the eigensolver itself.
    """
    reg, terms, edges = gapless_terms(L)
    n = reg.n_qubits
    if n > GAPLESS_MAX_QUBITS:
        raise ValueError(f"{n} qubits exceed the sparse budget of {GAPLESS_MAX_QUBITS}")
    H = -sum(pauli_sparse(P) for P in terms)
    B = sum(pauli_sparse(P) for P in edges)
    Hf = (H - boundary_field * B).tocsr()
    rng = np.random.Generator(np.random.Philox(seed))
    v0 = rng.normal(size=1 << n)
    k = 6
    try:
        w, V = eigsh(Hf, k=k, which="SA", v0=v0, tol=tol, maxiter=maxiter)
    except Exception as exc:  # ArpackNoConvergence and friends
        raise RuntimeError(f"ground-state solver did not converge: {exc}") from exc
    order = np.argsort(w)
    w, V = w[order], V[:, order]
    low = np.flatnonzero(w < w[0] + 1e-4)
    sub = V[:, low]
    Bsub = sub.conj().T @ (B @ sub)
    bw, bv = np.linalg.eigh(0.5 * (Bsub + Bsub.conj().T))
    gs = sub @ bv[:, -1]
    gs = gs / np.linalg.norm(gs)
    E = float(np.real(np.vdot(gs, Hf @ gs)))
    res = float(np.linalg.norm(Hf @ gs - E * gs))
    gap = float(w[low[-1] + 1] - w[0]) if low[-1] + 1 < len(w) else float("nan")
    # fix the global phase so the largest amplitude is real and positive
    j = int(np.argmax(np.abs(gs)))
    gs = gs * (abs(gs[j]) / gs[j])
    lat = reg.lattice
    init = product_state([KET_PLUS] * L)
    ps = PurifiedState(gs, reg, float("nan"), "gapless-1d", init, lambda p: channels.bond_dephase(lat, p))
    return GaplessGroundState(ps, E, res, gap)
