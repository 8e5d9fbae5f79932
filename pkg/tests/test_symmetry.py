from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subtile.catalog import load_bundled
from subtile.errors import InputError, VerificationError
from subtile.system import GroupSpec, Tile, check_support, load_system
from subtile.symmetry import (
    act_on_prototile,
    attach_group,
    check_commutation,
    check_freeness,
    group_elements,
    orbit_rep,
    orbits,
    require_free,
    standard_position,
)


def test_penrose_group_is_d10(penrose):
    G = attach_group(penrose)
    assert len(G) == 20
    assert sorted(G[i].name for i in G.generators()) == ["f", "r"]
    # r^10 = e, f^2 = e, f r f = r^-1
    r, f = G.by_name("r").index, G.by_name("f").index
    x = G.identity
    for _ in range(10):
        x = G.mul(r, x)
    assert x == G.identity
    assert G.mul(f, f) == G.identity
    assert G.mul(G.mul(f, r), f) == G.inverse[r]


def test_group_table_is_a_group(penrose):
    G = attach_group(penrose)
    n = len(G)
    for a in range(n):
        assert sorted(G.table[a]) == list(range(n))
        assert G.mul(a, G.inverse[a]) == G.identity


def test_action_is_a_homomorphism(penrose):
    G = attach_group(penrose)
    for g, h in itertools.product(range(len(G)), repeat=2):
        for p in penrose.ids:
            assert G.act(g, G.act(h, p)) == G.act(G.mul(g, h), p)


def test_penrose_commutation_and_freeness(penrose):
    rep = check_commutation(penrose)
    assert rep.ok and rep.checked == 20 * 40
    assert check_freeness(penrose)
    assert standard_position(penrose) == [1, 21]
    assert [len(o) for o in orbits(penrose)] == [20, 20]


def test_rotation_subgroup_positions(penrose):
    sub = penrose.with_group(GroupSpec(10, False, 0))
    assert check_commutation(sub).ok
    assert check_freeness(sub)
    assert standard_position(sub) == [1, 11, 21, 31]


def test_orbit_rep_transports_representative(penrose):
    G = attach_group(penrose)
    reps = orbit_rep(penrose)
    assert set(reps) == set(penrose.ids)
    for p, (s, g) in reps.items():
        assert s in (1, 21)
        assert G.act(g, s) == p


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 19), st.sampled_from(range(1, 41)), st.integers(1, 2))
def test_supertiles_commute_with_group(g, p, n):
    sys = load_bundled("penrose")
    G = attach_group(sys)
    lhs = set(sys.supertile(G.act(g, p), n))
    rhs = {G.act_tile(g, t) for t in sys.supertile(p, n)}
    assert lhs == rhs


def test_act_on_prototile_by_name(penrose):
    assert act_on_prototile(penrose, "e", 7) == 7
    assert act_on_prototile(penrose, "r", 1) != 1


def test_square_is_not_free(square):
    assert not check_freeness(square)
    with pytest.raises(InputError):
        require_free(square)
    with pytest.warns(UserWarning):
        standard_position(square)


def test_bad_rotation_order(F10):
    with pytest.raises(InputError):
        group_elements(GroupSpec(3), F10)


def rectangle_doc(rotation_order):
    # one 2x1 rectangle, cut into four half-size copies
    return {
        "cyclotomic_order": 4,
        "lambda": ["2", "0"],
        "prototiles": [{"id": 1, "vertices": [["0", "0"], ["2", "0"], ["2", "1"], ["0", "1"]]}],
        "substitution": {"1": [{"id": 1, "translation": [a, b]} for a in ("0", "2") for b in ("0", "1")]},
        "group": {"rotation_order": rotation_order},
    }


def test_non_symmetry_detected():
    half_turn = load_system(rectangle_doc(2))
    assert check_support(half_turn).ok
    assert check_commutation(half_turn).ok
    with pytest.raises(VerificationError):
        attach_group(load_system(rectangle_doc(4)))


def test_act_tile_moves_puncture(penrose):
    G = attach_group(penrose)
    r = G.by_name("r").index
    z = penrose.field.zeta(1)
    t = Tile(1, z)
    img = G.act_tile(r, t)
    assert img.x == z * z
    assert img.proto == G.act(r, 1)
