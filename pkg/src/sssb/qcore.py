"""Dense linear algebra over qubit registers.

States are plain complex numpy arrays: a state vector has length ``2**n`` and a
density matrix has shape ``(2**n, 2**n)``.  Site ``i`` is bit ``i`` of the basis
index (site 0 is the least-significant bit), so the basis state
``|b_0 b_1 ... b_{n-1}>`` sits at index ``sum(b_i << i)``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

ATOL_CONSTRUCT = 1e-12
ATOL_IDENTITY = 1e-10
ATOL_DECOMP = 1e-9
PSD_CLAMP = 1e-10
PSD_REJECT = 1e-8

_LABEL_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_PHASE_PREFIX = {"": 0, "+": 0, "i": 1, "+i": 1, "-": 2, "-i": 3}


def _popcount(a: np.ndarray | int):
    if isinstance(a, (int, np.integer)):
        return int(a).bit_count()
    return np.bitwise_count(a).astype(np.int64)


def num_qubits(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim <= 0 or (1 << n) != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


@dataclass(frozen=True)
class PauliString:
    """Signed Pauli operator ``i**phase * prod_j X_j**x_j Z_j**z_j``.

    ``x_mask`` and ``z_mask`` are bitsets over the register (bit ``j`` is site
    ``j``).  With this convention ``Y = i X Z``, so a string built from the label
    ``"Y"`` has ``phase == 1``.
    """

    n_qubits: int
    x_mask: int = 0
    z_mask: int = 0
    phase: int = 0

    def __post_init__(self):
        full = (1 << self.n_qubits) - 1
        if self.n_qubits < 0 or self.x_mask & ~full or self.z_mask & ~full:
            raise ValueError("Pauli masks exceed the register size")
        object.__setattr__(self, "phase", self.phase % 4)

    # construction -----------------------------------------------------------
    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse e.g. ``"-iXZIY"``; character ``j`` of the body acts on site ``j``."""
        body = label.lstrip("+-i")
        prefix = label[: len(label) - len(body)]
        if prefix not in _PHASE_PREFIX:
            raise ValueError(f"bad phase prefix {prefix!r}")
        phase = _PHASE_PREFIX[prefix]
        x = z = 0
        for j, ch in enumerate(body):
            try:
                xb, zb = _LABEL_BITS[ch]
            except KeyError:
                raise ValueError(f"bad Pauli letter {ch!r}") from None
            x |= xb << j
            z |= zb << j
            phase += xb & zb
        return cls(len(body), x, z, phase)

    @classmethod
    def from_sites(cls, n_qubits: int, ops: dict[int, str] | None = None, **kw: Iterable[int]) -> "PauliString":
        """Build from a site map, e.g. ``from_sites(4, {0: "Z", 3: "Z"})`` or ``from_sites(4, X=[0, 1])``."""
        letters = dict(ops or {})
        for letter, sites in kw.items():
            for s in sites:
                if s in letters:
                    raise ValueError(f"site {s} given twice")
                letters[s] = letter
        chars = ["I"] * n_qubits
        for s, letter in letters.items():
            if not 0 <= s < n_qubits:
                raise ValueError(f"site {s} outside register of {n_qubits}")
            chars[s] = letter
        return cls.from_label("".join(chars))

    @classmethod
    def z_on(cls, n_qubits: int, sites: Iterable[int]) -> "PauliString":
        mask = 0
        for s in sites:
            mask ^= 1 << s
        return cls(n_qubits, 0, mask)

    @classmethod
    def x_on(cls, n_qubits: int, sites: Iterable[int]) -> "PauliString":
        mask = 0
        for s in sites:
            mask ^= 1 << s
        return cls(n_qubits, mask, 0)

    # algebra ----------------------------------------------------------------
    def __mul__(self, other: "PauliString") -> "PauliString":
        if not isinstance(other, PauliString):
            return NotImplemented
        self._check(other)
        # Z^z1 X^x2 = (-1)^{z1.x2} X^x2 Z^z1
        sign = 2 * _popcount(self.z_mask & other.x_mask)
        return PauliString(
            self.n_qubits,
            self.x_mask ^ other.x_mask,
            self.z_mask ^ other.z_mask,
            self.phase + other.phase + sign,
        )

    def __neg__(self) -> "PauliString":
        return PauliString(self.n_qubits, self.x_mask, self.z_mask, self.phase + 2)

    def dagger(self) -> "PauliString":
        # (X^x Z^z)^dag = Z^z X^x = (-1)^{x.z} X^x Z^z
        sign = 2 * _popcount(self.x_mask & self.z_mask)
        return PauliString(self.n_qubits, self.x_mask, self.z_mask, -self.phase + sign)

    def commutes(self, other: "PauliString") -> bool:
        self._check(other)
        return (_popcount(self.x_mask & other.z_mask) + _popcount(self.z_mask & other.x_mask)) % 2 == 0

    def is_hermitian(self) -> bool:
        return (self.phase - _popcount(self.x_mask & self.z_mask)) % 2 == 0

    def tensor(self, other: "PauliString") -> "PauliString":
        """``self`` on the low sites, ``other`` shifted above them."""
        n = self.n_qubits
        return PauliString(
            n + other.n_qubits,
            self.x_mask | (other.x_mask << n),
            self.z_mask | (other.z_mask << n),
            self.phase + other.phase,
        )

    def embed(self, n_qubits: int, sites: Sequence[int]) -> "PauliString":
        """Relabel site ``j`` of this string to ``sites[j]`` of a larger register."""
        if len(sites) != self.n_qubits:
            raise ValueError("site list length must equal n_qubits")
        x = z = 0
        for j, s in enumerate(sites):
            x |= ((self.x_mask >> j) & 1) << s
            z |= ((self.z_mask >> j) & 1) << s
        return PauliString(n_qubits, x, z, self.phase)

    @property
    def support(self) -> list[int]:
        m = self.x_mask | self.z_mask
        return [j for j in range(self.n_qubits) if (m >> j) & 1]

    @property
    def coefficient(self) -> complex:
        return 1j**self.phase

    def label(self) -> str:
        chars = []
        ph = self.phase
        for j in range(self.n_qubits):
            xb, zb = (self.x_mask >> j) & 1, (self.z_mask >> j) & 1
            chars.append("IXZY"[xb + 2 * zb])
            ph -= xb & zb
        return ["+", "+i", "-", "-i"][ph % 4] + "".join(chars)

    def __repr__(self):
        return f"PauliString({self.label()!r})"

    def to_matrix(self) -> np.ndarray:
        dim = 1 << self.n_qubits
        idx = np.arange(dim)
        out = np.zeros((dim, dim), dtype=complex)
        # X^x Z^z |b> = (-1)^{z.b} |b ^ x>
        signs = 1 - 2 * (_popcount(idx & self.z_mask) & 1)
        out[idx ^ self.x_mask, idx] = signs * self.coefficient
        return out

    def _check(self, other: "PauliString"):
        if self.n_qubits != other.n_qubits:
            raise ValueError(f"register mismatch: {self.n_qubits} vs {other.n_qubits}")


def random_pauli(n_qubits: int, rng: random.Random | np.random.Generator) -> PauliString:
    if isinstance(rng, np.random.Generator):
        x, z, ph = (int(v) for v in rng.integers(0, [1 << n_qubits, 1 << n_qubits, 4]))
    else:
        x, z, ph = rng.getrandbits(n_qubits), rng.getrandbits(n_qubits), rng.randrange(4)
    return PauliString(n_qubits, x, z, ph)


# --------------------------------------------------------------------------
# applying operators


def _pauli_parts(P: PauliString, dim: int):
    idx = np.arange(dim)
    src = idx ^ P.x_mask
    signs = 1 - 2 * (_popcount(src & P.z_mask) & 1)
    return src, signs


def apply_pauli(state: np.ndarray, P: PauliString, two_sided: bool = True) -> np.ndarray:
    """Return ``P|psi>`` for vectors, ``P rho P^dag`` (or ``P rho`` if not two-sided) for matrices."""
    state = np.asarray(state)
    n = num_qubits(state.shape[0])
    if P.n_qubits != n:
        raise ValueError(f"Pauli acts on {P.n_qubits} qubits, state has {n}")
    src, signs = _pauli_parts(P, state.shape[0])
    if state.ndim == 1:
        return P.coefficient * signs * state[src]
    if state.ndim != 2 or state.shape[0] != state.shape[1]:
        raise ValueError("expected a vector or square matrix")
    left = signs[:, None] * state[src, :]
    if not two_sided:
        return P.coefficient * left
    # the global phase cancels between P and P^dag
    return left[:, src] * signs[None, :]


def right_multiply_pauli(rho: np.ndarray, P: PauliString) -> np.ndarray:
    """``rho @ P`` without forming the Pauli matrix."""
    dim = rho.shape[0]
    if P.n_qubits != num_qubits(dim):
        raise ValueError("register mismatch")
    # (rho P)[a, b] = sum_c rho[a, c] P[c, b];  P[b ^ x, b] = s(b) coeff
    idx = np.arange(dim)
    signs = 1 - 2 * (_popcount(idx & P.z_mask) & 1)
    return P.coefficient * rho[:, idx ^ P.x_mask] * signs[None, :]


def expectation(state: np.ndarray, P: PauliString | np.ndarray) -> complex:
    """``<psi|P|psi>`` or ``Tr(rho P)``."""
    state = np.asarray(state)
    if isinstance(P, PauliString):
        if state.ndim == 1:
            return complex(np.vdot(state, apply_pauli(state, P)))
        src, signs = _pauli_parts(P, state.shape[0])
        # Tr(rho P) = sum_b P[b^x, b] rho[b, b^x]
        idx = np.arange(state.shape[0])
        return complex(P.coefficient * np.sum(signs[idx ^ P.x_mask] * state[idx, src]))
    if state.ndim == 1:
        return complex(np.vdot(state, P @ state))
    return complex(np.trace(state @ P))


def is_unitary(G: np.ndarray, atol: float = ATOL_IDENTITY) -> bool:
    G = np.asarray(G)
    return G.ndim == 2 and G.shape[0] == G.shape[1] and np.allclose(G.conj().T @ G, np.eye(G.shape[0]), atol=atol)


def apply_gate(state: np.ndarray, G: np.ndarray, targets: Sequence[int], check_unitary: bool = True) -> np.ndarray:
    """Embed ``G`` on ``targets`` and apply it to a state vector.

    Row/column index bit ``k`` of ``G`` corresponds to ``targets[k]``, matching the
    register-wide little-endian convention.
    """
    state = np.asarray(state, dtype=complex)
    G = np.asarray(G, dtype=complex)
    n = num_qubits(state.shape[0])
    k = len(targets)
    if len(set(targets)) != k:
        raise ValueError(f"duplicate targets {list(targets)}")
    if G.shape != (1 << k, 1 << k):
        raise ValueError(f"gate of shape {G.shape} does not fit {k} targets")
    if any(not 0 <= t < n for t in targets):
        raise ValueError("target outside register")
    if check_unitary and not is_unitary(G):
        raise ValueError("gate is not unitary")
    # numpy axis a of the (2,)*n tensor is site n-1-a
    psi = state.reshape((2,) * n)
    gate = G.reshape((2,) * (2 * k))
    # gate axes: outputs (bit k-1 ... bit 0), inputs (bit k-1 ... bit 0)
    in_axes = [n - 1 - targets[k - 1 - a] for a in range(k)]
    out = np.tensordot(gate, psi, axes=(list(range(k, 2 * k)), in_axes))
    # out axes: gate outputs first, then remaining psi axes in order
    rest = [a for a in range(n) if a not in in_axes]
    order = in_axes + rest
    out = np.moveaxis(out, list(range(n)), order)
    return out.reshape(-1)


def embed_operator(G: np.ndarray, targets: Sequence[int], n_qubits: int) -> np.ndarray:
    """Full ``2**n`` matrix of ``G`` acting on ``targets``."""
    dim = 1 << n_qubits
    cols = [apply_gate(np.eye(dim, dtype=complex)[:, j], G, targets, check_unitary=False) for j in range(dim)]
    return np.column_stack(cols)


# --------------------------------------------------------------------------
# states


def basis_state(bits: Sequence[int]) -> np.ndarray:
    n = len(bits)
    psi = np.zeros(1 << n, dtype=complex)
    psi[sum(int(b) << j for j, b in enumerate(bits))] = 1.0
    return psi


def product_state(local_states: Sequence[np.ndarray]) -> np.ndarray:
    """Tensor product with ``local_states[0]`` on site 0 (least-significant)."""
    psi = np.ones(1, dtype=complex)
    for v in local_states:
        psi = np.kron(np.asarray(v, dtype=complex), psi)
    return psi


KET_0 = np.array([1, 0], dtype=complex)
KET_1 = np.array([0, 1], dtype=complex)
KET_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
KET_MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)


def plus_state(n: int) -> np.ndarray:
    return np.full(1 << n, 2 ** (-n / 2), dtype=complex)


def zero_state(n: int) -> np.ndarray:
    return basis_state([0] * n)


def dm(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def normalize(psi: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise ValueError("cannot normalize the zero vector")
    return psi / nrm


def check_density_matrix(rho: np.ndarray, atol: float = ATOL_CONSTRUCT) -> None:
    """Raise if ``rho`` is not Hermitian, PSD (to ``-PSD_CLAMP``) and unit trace."""
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if not np.allclose(rho, rho.conj().T, atol=atol):
        raise ValueError("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1) > atol * max(1, rho.shape[0] ** 0.5):
        raise ValueError(f"trace {tr} != 1")
    lo = np.linalg.eigvalsh(rho).min()
    if lo < -PSD_CLAMP:
        raise ValueError(f"negative eigenvalue {lo}")


def partial_trace(state: np.ndarray, keep: Sequence[int], n_qubits: int | None = None) -> np.ndarray:
    """Reduced density matrix on ``keep`` (returned in the order of ``keep``)."""
    state = np.asarray(state, dtype=complex)
    keep = list(keep)
    if not keep:
        raise ValueError("keep list is empty")
    n = num_qubits(state.shape[0]) if n_qubits is None else n_qubits
    if len(set(keep)) != len(keep) or any(not 0 <= k < n for k in keep):
        raise ValueError(f"invalid keep list {keep} for {n} qubits")
    traced = [j for j in range(n) if j not in keep]
    # tensor axis for site j is n-1-j; we want output bit a <-> keep[a]
    keep_axes = [n - 1 - keep[a] for a in reversed(range(len(keep)))]
    tr_axes = [n - 1 - j for j in traced]
    k = len(keep)
    if state.ndim == 1:
        psi = state.reshape((2,) * n).transpose(keep_axes + tr_axes).reshape(1 << k, -1)
        return psi @ psi.conj().T
    rho = state.reshape((2,) * (2 * n))
    rho = rho.transpose(keep_axes + tr_axes + [n + a for a in keep_axes] + [n + a for a in tr_axes])
    m = 1 << (n - k)
    rho = rho.reshape(1 << k, m, 1 << k, m)
    return np.einsum("ajbj->ab", rho)


def purity(rho: np.ndarray) -> float:
    # Tr(rho^2) = sum |rho_ab|^2 for Hermitian rho
    return float(np.real(np.vdot(rho, rho)))


def matrix_sqrt_psd(rho: np.ndarray, rel_cutoff: float = 0.0) -> np.ndarray:
    """Hermitian PSD square root through an eigendecomposition.

    Eigenvalues in ``(-1e-8, 0)`` are clamped to zero; anything more negative is
    rejected as an invalid input.  Eigenvalues below ``rel_cutoff`` times the
    largest are also zeroed, which keeps round-off out of the square root.
    """
    h = 0.5 * (rho + rho.conj().T)
    w, v = np.linalg.eigh(h)
    if w.size and w.min() < -PSD_REJECT:
        raise ValueError(f"matrix is not PSD: eigenvalue {w.min():.3e}")
    w = np.where(w > rel_cutoff * max(w.max(initial=0.0), 0.0), w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def von_neumann_entropy(rho: np.ndarray) -> float:
    w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    w = w[w > 1e-14]
    return float(-np.sum(w * np.log(w)))


def random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return psi / np.linalg.norm(psi)


def random_density_matrix(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    dim = 1 << n
    rank = dim if rank is None else rank
    A = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = A @ A.conj().T
    return rho / np.trace(rho).real
