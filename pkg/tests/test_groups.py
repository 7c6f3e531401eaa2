import math

import numpy as np
import pytest

from sssb import channels, groups as gr
from sssb.lattice import Lattice
from sssb.qcore import plus_state


@pytest.mark.parametrize("G", [gr.cyclic(2), gr.cyclic(5), gr.symmetric3(), gr.dihedral4()])
def test_builtin_groups_are_groups(G):
    assert G.is_group() and G.is_associative()
    e = G.identity
    for g in range(G.order):
        assert G.mul(g, G.inverse[g]) == e


def test_group_orders_and_lookup():
    assert gr.symmetric3().order == 6 and gr.dihedral4().order == 8
    assert gr.group_by_name("z4").order == 4
    with pytest.raises(ValueError):
        gr.group_by_name("A5")


@pytest.mark.parametrize("name", ["Z2", "Z3", "S3", "D4:perm", "Z4:shift"])
def test_reps_are_homomorphisms(name):
    rep = gr.rep_by_name(name)
    G = rep.group
    for g in range(G.order):
        assert np.allclose(rep.mats[g] @ rep.mats[g].conj().T, np.eye(rep.d))
        for h in range(G.order):
            assert np.allclose(rep.mats[g] @ rep.mats[h], rep.mats[G.mul(g, h)], atol=1e-12)


@pytest.mark.parametrize("name,L,want", [("Z2", 4, 8), ("Z3", 3, 9), ("S3", 3, 5), ("S3", 4, 14), ("Z2", 5, 16)])
def test_identity_sector_count_is_projector_rank(name, L, want):
    rep = gr.rep_by_name(name)
    n_i = gr.identity_sector_count(rep, L)
    P = gr.identity_projector(rep, L)
    assert n_i == want
    assert np.allclose(P @ P, P, atol=1e-12)
    assert n_i == np.linalg.matrix_rank(P) == round(np.trace(P).real)


def test_scalar_subgroup():
    assert gr.scalar_subgroup(gr.rep_by_name("Z2")).order == 1
    sc = gr.scalar_subgroup(gr.scalar_rep(3))
    assert sc.order == 3 and sc.quotient_order == 1
    with pytest.raises(ValueError):
        gr.identity_projector(gr.scalar_rep(3), 4)  # L not a multiple of |H|


def test_dense_budget():
    with pytest.raises(ValueError):
        gr.identity_projector(gr.rep_by_name("Z2"), 13)


@pytest.mark.parametrize("name,Ls", [("Z2", [6, 8, 10]), ("Z3", [4, 6]), ("S3", [4, 6])])
def test_purity_ratio_approaches_one(name, Ls):
    rows = gr.purity_asymptote_report(gr.rep_by_name(name), Ls)
    for row in rows:
        assert math.isclose(row.purity, 1 / row.sectors, rel_tol=1e-12)
    assert abs(rows[-1].ratio - 1) <= abs(rows[0].ratio - 1) + 1e-12
    assert abs(rows[-1].ratio - 1) < 0.01


def test_cyclic_charged_correlators():
    for name in ("Z2", "Z3"):
        rep = gr.rep_by_name(name)
        O = gr.charged_operator(rep)
        mult = gr.make_multiplet(rep, [O])
        L = 6
        c = gr.multiplet_correlators(rep, mult, L, 0, 3)
        assert abs(c.conventional[0, 0]) < 1e-12
        assert np.isclose(c.renyi2[0, 0], gr.renyi2_trace_formula(rep, O, O, L), atol=1e-10)
        assert abs(c.renyi2[0, 0]) > 0.5


def test_s3_multiplet():
    rep = gr.rep_by_name("S3")
    mult = gr.standard_multiplet_s3(rep)
    assert mult.dim == 2 and gr.is_irreducible(mult)
    assert abs(gr.trivial_content(mult)) < 1e-12
    L = 6
    c = gr.multiplet_correlators(rep, mult, L, 0, 2)
    # off-diagonal entries vanish by charge; the diagonal is an invariant contraction
    # and only dies off with L
    assert abs(c.conventional[0, 1]) < 1e-12 and abs(c.conventional[1, 0]) < 1e-12
    for a, Oa in enumerate(mult.ops):
        for b, Ob in enumerate(mult.ops):
            assert np.isclose(c.renyi2[a, b], gr.renyi2_trace_formula(rep, Oa, Ob, L), atol=1e-10)


def test_make_multiplet_rejects_bad_sets():
    rep = gr.rep_by_name("S3")
    w = np.exp(2j * np.pi / 3)
    with pytest.raises(ValueError):
        gr.make_multiplet(rep, [np.diag([1, w, w * w])])  # not closed
    with pytest.raises(ValueError):
        gr.make_multiplet(rep, [np.eye(3)])  # trivial irrep
    with pytest.raises(ValueError):
        gr.charged_operator(rep)


def test_s3_conventional_decays_while_renyi2_stays():
    rep = gr.rep_by_name("S3")
    mult = gr.standard_multiplet_s3(rep)
    conv, ren = [], []
    for L in (3, 4, 5, 6):
        c = gr.multiplet_correlators(rep, mult, L, 0, 2)
        conv.append(abs(c.conventional[0, 0]))
        ren.append(c.renyi2[0, 0].real)
    assert all(b < a / 2 for a, b in zip(conv, conv[1:]))
    assert min(ren) > 0.5


def test_character_orthogonality_of_multiplets():
    rep = gr.rep_by_name("S3")
    mult = gr.standard_multiplet_s3(rep)
    assert np.abs(sum(mult.M)).max() < 1e-12
    z3 = gr.rep_by_name("Z3")
    m3 = gr.make_multiplet(z3, [gr.charged_operator(z3)])
    assert np.abs(sum(m3.M)).max() < 1e-12


def test_single_charged_operator_has_no_renyi2():
    for name in ("Z2", "Z3"):
        rep = gr.rep_by_name(name)
        L = 4
        rho = gr.build_sssb_state(rep, L)
        O = gr._two_site(rep, L, gr.charged_operator(rep), 0, np.eye(rep.d), 1)
        val = np.trace(rho @ O @ rho @ O.conj().T) / np.trace(rho @ rho)
        assert abs(val) < 1e-10


def test_sssb_state_is_strongly_symmetric_and_matches_rho_plus():
    for name, L in (("Z2", 4), ("Z3", 4), ("Z4:shift", 4), ("S3", 3)):
        rep = gr.rep_by_name(name)
        rho = gr.build_sssb_state(rep, L)
        assert np.isclose(np.trace(rho).real, 1)
        for g in range(rep.group.order):
            U = rep.global_op(g, L)
            assert channels.classify_state_symmetry(rho, U) is channels.SymmetryClass.STRONG
    rho_plus = channels.bond_dephase(Lattice.chain(4), 0.5)(plus_state(4))
    assert np.allclose(gr.build_sssb_state(gr.rep_by_name("Z2"), 4), rho_plus, atol=1e-12)


def test_exact_purity_ratio_for_cyclic_reps():
    for name in ("Z2", "Z3"):
        row = gr.purity_asymptote_report(gr.rep_by_name(name), [4])[0]
        assert abs(row.ratio - 1) < 1e-12
    assert gr.identity_sector_count(gr.scalar_rep(2), 4) == 16
