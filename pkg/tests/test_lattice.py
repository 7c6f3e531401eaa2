import pytest

from sssb.lattice import (
    Lattice,
    Register,
    Role,
    boundary_links,
    column_x_links,
    path_between,
    walk,
)
from sssb.qcore import PauliString


def test_bond_counts():
    assert len(Lattice.chain(3).bonds()) == 2
    assert len(Lattice.chain(4, periodic=True).bonds()) == 4
    assert len(Lattice.square(2, 2).bonds()) == 8
    assert len(Lattice.square(3, 3).bonds()) == 18
    assert len(Lattice.square(3, 3, periodic=False).bonds()) == 12


def test_two_by_two_torus_has_double_bonds():
    lat = Lattice.square(2, 2)
    pairs = [frozenset((b.a, b.b)) for b in lat.bonds()]
    assert len(set(pairs)) == 4  # every neighbour pair appears twice


def test_stars_and_star_product_is_identity():
    lat = Lattice.square(3, 3)
    n = lat.n_links
    total = PauliString.identity(n)
    for v in range(lat.n_vertices):
        links, complete = lat.star_of(v)
        assert complete and len(links) == 4
        for k in links:
            assert v in lat.link_endpoints(k)
        total = total * PauliString.x_on(n, links)
    assert total == PauliString.identity(n)


def test_open_lattice_stars_are_incomplete_at_edges():
    lat = Lattice.square(3, 3, periodic=False)
    links, complete = lat.star_of(lat.vertex(0, 0))
    assert len(links) == 2 and not complete
    assert lat.star_of(lat.vertex(1, 1))[1]


def test_plaquettes():
    lat = Lattice.square(3, 3)
    assert len(lat.plaquettes()) == 9
    q = (2, 2)
    assert sorted(lat.plaquette_corners(q)) == sorted([8, 6, 2, 0])
    # every link belongs to exactly two plaquettes
    count = [0] * lat.n_links
    for p in lat.plaquettes():
        for k in lat.plaquette_links(p):
            count[k] += 1
    assert set(count) == {2}
    assert len(Lattice.square(2, 2).plaquette_corners((0, 0))) == 4
    assert Lattice.square(3, 3, periodic=False).n_plaquettes == 4


def test_walk_and_paths():
    lat = Lattice.square(3, 3, periodic=False)
    p = walk(lat, 0, ["+x", "+x", "+y"])
    assert p.vertices == (0, 1, 2, 5)
    assert p.links == (lat.link_x(0, 0), lat.link_x(1, 0), lat.link_y(2, 0))
    q = path_between(lat, 8, 0)
    assert q.endpoints == (8, 0) and len(q.links) == 4
    with pytest.raises(IndexError):
        walk(lat, 2, ["+x"])
    with pytest.raises(ValueError):
        walk(lat, 0, ["up"])


def test_boundary_links_and_columns():
    lat = Lattice.square(3, 3)
    assert sorted(boundary_links(lat, [4])) == sorted(lat.star_of(4)[0])
    assert boundary_links(lat, range(9)) == []
    # two x-link columns bound the vertex strip between them
    strip = [lat.vertex(1, y) for y in range(3)]
    assert sorted(column_x_links(lat, 0) + column_x_links(lat, 1)) == sorted(boundary_links(lat, strip))


def test_register_layout():
    lat = Lattice.square(2, 2)
    reg = Register(lat, "links", "vertices")
    assert (reg.n_system, reg.n_ancilla, reg.n_qubits) == (8, 4, 12)
    assert reg.anc(0) == 8
    assert reg.roles()[0] is Role.SYSTEM_LINK and reg.roles()[-1] is Role.ANCILLA_VERTEX
    assert Register(Lattice.square(3, 3, periodic=False), "vertices", "plaquettes").n_qubits == 13
    assert Register(lat, "vertices", "plaquettes").n_qubits == 8
    with pytest.raises(ValueError):
        Register(Lattice.square(3, 3), "vertices", "links").check_budget()
    with pytest.raises(ValueError):
        Register(lat, "links", "links")
