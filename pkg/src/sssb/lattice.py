"""Chains and square lattices, their links/stars/plaquettes, and register layouts.

Conventions
-----------
Vertices of an ``Lx x Ly`` lattice are numbered ``v = x + Lx*y`` (``y`` grows
upward).  On a periodic lattice the x-link leaving ``v`` toward ``+x`` has index
``v`` and the y-link leaving ``v`` toward ``+y`` has index ``Lx*Ly + v``.  On an
open lattice only links with both endpoints inside exist; they are numbered
consecutively, all x-links row-major first, then all y-links row-major.

Plaquette ``(x, y)`` has lower-left corner ``(x, y)``::

    (x,y+1) --xl(x,y+1)-- (x+1,y+1)
       |                     |
    yl(x,y)              yl(x+1,y)
       |                     |
    (x,y) ----xl(x,y)---- (x+1,y)

A register places system qubits first and ancilla qubits after them, each
block in the lattice order above.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Sequence

MAX_DENSE_QUBITS = 14


class Bond(NamedTuple):
    a: int
    b: int
    link: int


class Role(str, Enum):
    SYSTEM_VERTEX = "system-vertex"
    SYSTEM_LINK = "system-link"
    ANCILLA_LINK = "ancilla-link"
    ANCILLA_VERTEX = "ancilla-vertex"
    ANCILLA_PLAQUETTE = "ancilla-plaquette"


@dataclass(frozen=True)
class Lattice:
    """A chain (``Ly == 1``, ``kind == "chain"``) or an ``Lx x Ly`` square lattice."""

    kind: str
    Lx: int
    Ly: int = 1
    periodic: bool = False
    _links: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("chain", "square"):
            raise ValueError(f"unknown lattice kind {self.kind!r}")
        if self.kind == "chain" and self.Ly != 1:
            raise ValueError("a chain has Ly == 1")
        if self.Lx < 2 or self.Ly < 1 or (self.kind == "square" and self.Ly < 2):
            raise ValueError(f"lattice too small: {self.Lx}x{self.Ly}")
        object.__setattr__(self, "_links", self._build_links())

    @classmethod
    def chain(cls, L: int, periodic: bool = False) -> "Lattice":
        return cls("chain", L, 1, periodic)

    @classmethod
    def square(cls, Lx: int, Ly: int, periodic: bool = True) -> "Lattice":
        return cls("square", Lx, Ly, periodic)

    # counts -----------------------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return self.Lx * self.Ly

    @property
    def n_links(self) -> int:
        return len(self._links["list"])

    @property
    def n_plaquettes(self) -> int:
        if self.kind == "chain":
            return 0
        if self.periodic:
            return self.Lx * self.Ly
        return (self.Lx - 1) * (self.Ly - 1)

    # geometry ---------------------------------------------------------------
    def vertex(self, x: int, y: int = 0) -> int:
        if self.periodic:
            x, y = x % self.Lx, y % self.Ly
        elif not (0 <= x < self.Lx and 0 <= y < self.Ly):
            raise IndexError(f"vertex ({x}, {y}) outside open lattice")
        return x + self.Lx * y

    def coords(self, v: int) -> tuple[int, int]:
        return v % self.Lx, v // self.Lx

    def link_x(self, x: int, y: int = 0) -> int:
        """Link from ``(x, y)`` to ``(x+1, y)``."""
        return self._lookup("x", x, y)

    def link_y(self, x: int, y: int = 0) -> int:
        """Link from ``(x, y)`` to ``(x, y+1)``."""
        return self._lookup("y", x, y)

    def has_link(self, direction: str, x: int, y: int = 0) -> bool:
        try:
            self._lookup(direction, x, y)
        except IndexError:
            return False
        return True

    def link_endpoints(self, link: int) -> tuple[int, int]:
        return self._links["list"][link]

    def bonds(self) -> list[Bond]:
        """Every nearest-neighbour bond once: x-links row-major, then y-links."""
        return [Bond(a, b, k) for k, (a, b) in enumerate(self._links["list"])]

    def star_of(self, v: int) -> tuple[list[int], bool]:
        """Links touching vertex ``v`` and whether the star is complete (4 links, or 2 on a chain)."""
        x, y = self.coords(v)
        cand = [("x", x, y), ("x", x - 1, y)]
        if self.kind == "square":
            cand += [("y", x, y), ("y", x, y - 1)]
        links = [self._lookup(*c) for c in cand if self.has_link(*c)]
        return links, len(links) == len(cand)

    def plaquettes(self) -> list[tuple[int, int]]:
        if self.kind == "chain":
            return []
        nx = self.Lx if self.periodic else self.Lx - 1
        ny = self.Ly if self.periodic else self.Ly - 1
        return [(x, y) for y in range(ny) for x in range(nx)]

    def plaquette_index(self, x: int, y: int) -> int:
        nx = self.Lx if self.periodic else self.Lx - 1
        if self.periodic:
            x, y = x % self.Lx, y % self.Ly
        return x + nx * y

    def plaquette_links(self, plaq: tuple[int, int]) -> list[int]:
        x, y = plaq
        return [self.link_x(x, y), self.link_x(x, y + 1), self.link_y(x, y), self.link_y(x + 1, y)]

    def plaquette_corners(self, plaq: tuple[int, int]) -> list[int]:
        """Corner vertices (with repeats removed, which matters only on tiny tori)."""
        x, y = plaq
        corners = [self.vertex(x, y), self.vertex(x + 1, y), self.vertex(x, y + 1), self.vertex(x + 1, y + 1)]
        return list(dict.fromkeys(corners))

    # internals --------------------------------------------------------------
    def _build_links(self) -> dict:
        lst: list[tuple[int, int]] = []
        index: dict[tuple[str, int, int], int] = {}
        Lx, Ly = self.Lx, self.Ly
        dirs = ("x",) if self.kind == "chain" else ("x", "y")
        for d in dirs:
            for y in range(Ly):
                for x in range(Lx):
                    nx, ny = (x + 1, y) if d == "x" else (x, y + 1)
                    if not self.periodic and (nx >= Lx or ny >= Ly):
                        continue
                    index[(d, x, y)] = len(lst)
                    lst.append((x + Lx * y, (nx % Lx) + Lx * (ny % Ly)))
        return {"list": lst, "index": index}

    def _lookup(self, d: str, x: int, y: int) -> int:
        if self.periodic:
            x, y = x % self.Lx, y % self.Ly
        try:
            return self._links["index"][(d, x, y)]
        except KeyError:
            raise IndexError(f"no {d}-link at ({x}, {y})") from None


# --------------------------------------------------------------------------
# paths


@dataclass(frozen=True)
class Path:
    vertices: tuple[int, ...]
    links: tuple[int, ...]

    @property
    def endpoints(self) -> tuple[int, int]:
        return self.vertices[0], self.vertices[-1]


_STEPS = {"+x": (1, 0), "-x": (-1, 0), "+y": (0, 1), "-y": (0, -1)}


def walk(lat: Lattice, start: int, moves: Sequence[str]) -> Path:
    """Follow unit ``moves`` (``"+x"``, ``"-y"``, ...) from ``start``."""
    verts = [start]
    links = []
    x, y = lat.coords(start)
    for m in moves:
        if m not in _STEPS:
            raise ValueError(f"bad move {m!r}")
        dx, dy = _STEPS[m]
        d = "x" if dx else "y"
        if lat.kind == "chain" and d == "y":
            raise ValueError("chains have no y moves")
        lx, ly = (x, y) if dx + dy > 0 else (x + dx, y + dy)
        links.append(lat.link_x(lx, ly) if d == "x" else lat.link_y(lx, ly))
        x, y = x + dx, y + dy
        verts.append(lat.vertex(x, y))
    return Path(tuple(verts), tuple(links))


def path_between(lat: Lattice, a: int, b: int) -> Path:
    """Straight-line path: first along x, then along y, never wrapping."""
    ax, ay = lat.coords(a)
    bx, by = lat.coords(b)
    moves = (["+x"] * (bx - ax) if bx >= ax else ["-x"] * (ax - bx)) + (
        ["+y"] * (by - ay) if by >= ay else ["-y"] * (ay - by)
    )
    return walk(lat, a, moves)


def boundary_links(lat: Lattice, region: Sequence[int]) -> list[int]:
    """Links with exactly one endpoint in the vertex ``region``."""
    inside = set(region)
    return [k for k, (a, b) in enumerate(lat._links["list"]) if (a in inside) != (b in inside)]


def column_x_links(lat: Lattice, x: int) -> list[int]:
    """All x-links leaving column ``x``; on a torus this is a closed dual loop."""
    return [lat.link_x(x, y) for y in range(lat.Ly)]


def row_y_links(lat: Lattice, y: int) -> list[int]:
    return [lat.link_y(x, y) for x in range(lat.Lx)]


# --------------------------------------------------------------------------
# registers


@dataclass(frozen=True)
class Register:
    """System block followed by an ancilla block, with a role per qubit."""

    lattice: Lattice
    system: str = "vertices"
    ancilla: str | None = "links"

    def __post_init__(self):
        if self.system not in ("vertices", "links"):
            raise ValueError(f"system must live on vertices or links, not {self.system!r}")
        if self.ancilla not in (None, "vertices", "links", "plaquettes"):
            raise ValueError(f"bad ancilla placement {self.ancilla!r}")
        if self.ancilla == self.system:
            raise ValueError("system and ancilla cannot share a sublattice")

    def _count(self, where: str | None) -> int:
        lat = self.lattice
        return {None: 0, "vertices": lat.n_vertices, "links": lat.n_links, "plaquettes": lat.n_plaquettes}[where]

    @property
    def n_system(self) -> int:
        return self._count(self.system)

    @property
    def n_ancilla(self) -> int:
        return self._count(self.ancilla)

    @property
    def n_qubits(self) -> int:
        return self.n_system + self.n_ancilla

    def sys(self, k: int) -> int:
        if not 0 <= k < self.n_system:
            raise IndexError(k)
        return k

    def anc(self, k: int) -> int:
        if not 0 <= k < self.n_ancilla:
            raise IndexError(k)
        return self.n_system + k

    @property
    def system_sites(self) -> list[int]:
        return list(range(self.n_system))

    @property
    def ancilla_sites(self) -> list[int]:
        return list(range(self.n_system, self.n_qubits))

    def roles(self) -> list[Role]:
        sys_role = Role.SYSTEM_VERTEX if self.system == "vertices" else Role.SYSTEM_LINK
        anc_role = {
            "links": Role.ANCILLA_LINK,
            "vertices": Role.ANCILLA_VERTEX,
            "plaquettes": Role.ANCILLA_PLAQUETTE,
            None: None,
        }[self.ancilla]
        return [sys_role] * self.n_system + [anc_role] * self.n_ancilla

    def check_budget(self, limit: int = MAX_DENSE_QUBITS) -> None:
        if self.n_qubits > limit:
            raise ValueError(f"register of {self.n_qubits} qubits exceeds the dense budget of {limit}")
