import random
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from conftest import fx
from randgen import random_restricted_monoid_action
from paglob.glob import (
    act_on_element,
    embed,
    enumerate_truncation,
    finite_monoid_globalization,
    is_equivalent,
)
from paglob.paction import (
    Config,
    FiniteMonoid,
    MonoidPartialAction,
    Space,
    act,
    normalize_config,
    singleton_homogeneous_action,
    trivial_presentation_action,
)
from paglob.words import all_words, is_prefix, normal_words


def shimrat(n=3):
    return singleton_homogeneous_action(Space(tuple("xyz"[:n])))


def gen(a, name):
    return (a.presentation.gen_id(name),)


def test_embed():
    assert embed(0) == ((), 0)
    a = shimrat()
    assert act_on_element(a, (), embed(1)) == embed(1)
    assert len({embed(x) for x in range(3)}) == 3


def test_act_on_element_shimrat():
    a = shimrat()
    xy = gen(a, "(xy)")
    assert act_on_element(a, xy, embed(1)) == embed(0)
    assert act_on_element(a, xy, embed(2)) == (xy, 2)


def test_truncation_zero_is_X():
    a = fx("dihedral").action
    assert list(enumerate_truncation(a, 0)) == [embed(x) for x in range(a.n)]


def test_z_gluing_truncation():
    a = fx("z_gluing").action
    assert [a.show(el) for el in enumerate_truncation(a, 1)] == ["p", "q", "g·q"]


def test_shimrat_two_truncation():
    a = shimrat(2)
    shown = [a.show(el) for el in enumerate_truncation(a, 1)]
    assert sorted(shown) == sorted(["x", "y", "(xy)·x", "(yx)·y"])


def test_truncation_is_sorted_and_unique():
    a = shimrat()
    t = list(enumerate_truncation(a, 2))
    assert len(t) == len(set(t))
    keys = [(a.presentation.word_key(el.word), el.point) for el in t]
    assert keys == sorted(keys)


def test_klein_four_classes():
    q = finite_monoid_globalization(fx("klein_four").monoid_action)
    c = q.class_of(0, 0)
    assert set(q.members(c)) == {("e", "0"), ("u", "0")}
    # 2 is not in u·X
    u = q.monoid.names.index("u")
    assert q.embed(2) not in {q.class_of(u, x) for x in range(3)}
    # 0 is in neither v·X nor uv·X
    for name in ("v", "uv"):
        m = q.monoid.names.index(name)
        assert q.embed(0) not in {q.class_of(m, x) for x in range(3)}
    assert q.size == 6


def test_trivial_monoid_classes_are_singletons():
    m = FiniteMonoid.build(["e"], [["e"]], "e")
    q = finite_monoid_globalization(MonoidPartialAction.build(m, Space.of_size(3), {}))
    assert q.size == 3
    assert all(len(q.classes[c]) == 1 for c in range(3))


def test_is_equivalent():
    a = shimrat()
    assert not is_equivalent(a, ((), 0), ((), 1))
    c = (gen(a, "(xy)") + gen(a, "(yz)"), 2)
    assert is_equivalent(a, c, (gen(a, "(xz)"), 2))
    assert is_equivalent(a, c, (gen(a, "(xy)"), 1))


# -- properties --

CONFLUENT = ["dihedral", "free_monoid", "free_group", "free_product", "shimrat3", "category", "z_gluing"]


@pytest.mark.parametrize("name", CONFLUENT)
def test_action_laws_on_Y(name):
    a = fx(name).action
    ws = normal_words(a.presentation, 3)
    els = list(enumerate_truncation(a, 2))
    for el in els:
        assert act_on_element(a, (), el) == el
    for u, v in product(ws[:10], ws[:10]):
        for el in els:
            assert act_on_element(a, u + v, el) == act_on_element(a, u, act_on_element(a, v, el))


@pytest.mark.parametrize("name", CONFLUENT)
def test_restriction_law(name):
    a = fx(name).action
    for u in all_words(a.presentation, 3):
        for x in range(a.n):
            y = act(a, u, x)
            if y is not None:
                assert act_on_element(a, u, embed(x)) == embed(y)


@pytest.mark.parametrize("name", CONFLUENT)
def test_truncation_monotone_and_complete(name):
    a = fx(name).action
    prev = set()
    for n in range(4):
        cur = set(enumerate_truncation(a, n))
        assert prev <= cur
        assert all(len(el.word) == n for el in cur - prev)
        # every configuration of length <= n normalizes inside Y_n, and Y_n is exactly that image
        image = {normalize_config(a, Config(u, x)) for u in all_words(a.presentation, n) for x in range(a.n)}
        assert image == cur
        prev = cur


def _check_union_find_matches_normal_forms(ma):
    q = finite_monoid_globalization(ma)
    pa = trivial_presentation_action(ma)
    gid = {name: i for i, name in enumerate(pa.presentation.generators)}
    unit = ma.monoid.unit

    def nf(u, x):
        w = () if u == unit else (gid[ma.monoid.names[u]],)
        return normalize_config(pa, Config(w, x))

    nodes = list(product(range(ma.monoid.size), range(ma.n)))
    for (u, x), (v, y) in product(nodes, nodes):
        assert (q.class_of(u, x) == q.class_of(v, y)) == (nf(u, x) == nf(v, y))
    assert q.size == len({nf(u, x) for u, x in nodes})


@pytest.mark.parametrize("name", ["constant_maps", "reflection_group", "sierpinski"])
def test_union_find_matches_normal_forms(name):
    _check_union_find_matches_normal_forms(fx(name).monoid_action)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_union_find_matches_normal_forms_random(seed):
    ma = random_restricted_monoid_action(random.Random(seed))
    ma.validate()
    if trivial_presentation_action(ma).confluence.confluent:
        _check_union_find_matches_normal_forms(ma)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_quotient_action_is_well_defined(seed):
    ma = random_restricted_monoid_action(random.Random(seed))
    q = finite_monoid_globalization(ma)
    m = ma.monoid
    for u, v in product(range(m.size), repeat=2):
        for x in range(ma.n):
            assert q.translate[u][q.class_of(v, x)] == q.class_of(m.mul(u, v), x)


@pytest.mark.parametrize("name", CONFLUENT)
def test_peeled_configurations_keep_normal_form(name):
    """(u, x) with normal form (v, y) lies in w·X for every v ⪯ w ⪯ u."""
    a = fx(name).action
    p = a.presentation
    for u in normal_words(p, 3):
        for x in range(a.n):
            v, y = normalize_config(a, Config(u, x))
            for k in range(len(v), len(u) + 1):
                w = u[:k]
                assert is_prefix(p, v, w)
                # the intermediate configuration after peeling u down to w
                z = act(a, u[k:], x)
                assert z is not None
                assert normalize_config(a, Config(w, z)) == (v, y)
