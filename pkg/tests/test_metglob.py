import random
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from conftest import fx, group_fixtures, metric_fixtures
from randgen import free_group_action, free_monoid_action, random_metric_action
from paglob.common import INF, PreconditionError
from paglob.glob import act_on_element, embed, enumerate_truncation
from paglob.metglob import (
    BruteForceOracle,
    WeakPseudometric,
    check_local_isometry,
    check_nonexpansive,
    check_path,
    check_separated,
    classify_path,
    distance,
    distance_bruteforce,
    distance_group_formula,
    distance_matrix,
    geodesic,
    glue,
    glue_formula,
    homogenize_step,
    validate_pseudometric,
)
from paglob.paction import (
    PartialAction,
    Space,
    is_nowhere_degenerate,
    partial_map,
    singleton_homogeneous_action,
    trivial_presentation_action,
)
from paglob.words import Presentation, is_prefix, normal_words

TOL = 1e-9


def close(u, v):
    return u == v or abs(u - v) <= TOL


def metric(rows):
    return WeakPseudometric.from_rows(rows)


def one_gen(rows, mapping):
    n = len(rows)
    return PartialAction(Presentation.build(["g"]), Space.of_size(n, metric(rows)), (partial_map(n, mapping),))


# -- pseudometrics --


def test_one_point_space():
    rep = validate_pseudometric(metric([[0]]))
    assert rep.valid and rep.flags["separated"] and rep.flags["metric"]


def test_zero_distance_not_separated():
    rep = validate_pseudometric(metric([[0, 0], [0, 0]]))
    assert rep.valid and not rep.flags["separated"]


def test_triangle_violation():
    rep = validate_pseudometric(metric([[0, 5, 10], [5, 0, 1], [10, 1, 0]]))
    assert not rep.valid
    assert any("triangle" in v for v in rep.violations)


def test_infinite_distances_are_allowed():
    rep = validate_pseudometric(metric([[0, "inf"], ["inf", 0]]))
    assert rep.valid and rep.flags["separated"] and not rep.flags["metric"]


def test_negative_distance_rejected():
    with pytest.raises(ValueError):
        metric([[0, -1], [-1, 0]])


def test_nonexpansive_examples():
    line = [[abs(i - j) for j in range(3)] for i in range(3)]
    assert check_nonexpansive(one_gen(line, {0: 2, 1: 1, 2: 0}))
    assert check_nonexpansive(one_gen(line, {0: 1, 1: 1, 2: 1}))
    assert not check_nonexpansive(one_gen(line, {0: 0, 1: 2}))


def test_nonexpansive_needs_metric():
    a = PartialAction(Presentation.build(["g"]), Space.of_size(2), ((0, None),))
    with pytest.raises(PreconditionError):
        check_nonexpansive(a)


# -- distance --


def test_distance_on_X_is_d():
    a = fx("dihedral").action
    d = a.space.metric
    for x, y in product(range(a.n), repeat=2):
        assert distance(a, embed(x), embed(y)) == d(x, y)


def test_z_gluing_distance():
    a = fx("z_gluing").action
    assert distance(a, embed(1), ((0,), 1)) == 2.0


def test_empty_domain_gives_infinity():
    a = fx("degenerate").action
    assert distance(a, embed(0), ((0,), 0)) == INF


def test_distance_refuses_non_confluent():
    pa = trivial_presentation_action(fx("klein_four").monoid_action)
    flat = metric([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    a = PartialAction(pa.presentation, Space(pa.space.names, flat), pa.maps)
    with pytest.raises(PreconditionError):
        distance(a, embed(0), embed(1))


def test_distance_refuses_expansive_maps():
    line = [[abs(i - j) for j in range(3)] for i in range(3)]
    with pytest.raises(PreconditionError):
        distance(one_gen(line, {0: 0, 1: 2}), embed(0), embed(1))


def test_distance_matrix_matches_pairwise():
    a = fx("shimrat3").action
    els = list(enumerate_truncation(a, 1))
    dm = distance_matrix(a, els)
    for i, j in product(range(len(els)), repeat=2):
        assert close(dm[i][j], distance(a, els[i], els[j]))


# -- brute force --


def test_bruteforce_single_segment():
    a = fx("dihedral").action
    assert distance_bruteforce(a, embed(0), embed(3), 1, depth=1) == 3.0


def test_bruteforce_z_gluing():
    a = fx("z_gluing").action
    assert distance_bruteforce(a, embed(1), ((0,), 1), 2) == 2.0
    assert distance_bruteforce(a, embed(1), ((0,), 1), 1) == INF


def test_bruteforce_unreachable():
    a = fx("degenerate").action
    assert distance_bruteforce(a, embed(0), ((0,), 0), 4, depth=3) == INF


def test_bruteforce_is_an_upper_bound():
    a = fx("free_monoid").action
    o = BruteForceOracle(a, 4)
    els = list(enumerate_truncation(a, 2))
    dm = distance_matrix(a, els)
    for i, e in enumerate(els):
        dd = o.distances_from(e, 2)
        for j, f in enumerate(els):
            assert dd.get(f, INF) >= dm[i][j] - TOL


# -- group formula --


def test_group_formula_empty_product():
    a = fx("free_group").action
    assert distance_group_formula(a, (0,), (0,), 2, 0) == a.space.metric(0, 2)


def test_group_formula_z_gluing():
    a = fx("z_gluing_group").action
    assert distance_group_formula(a, (), (0,), 1, 1) == 2.0


def test_group_formula_needs_group():
    with pytest.raises(PreconditionError):
        distance_group_formula(fx("z_gluing").action, (), (0,), 1, 1)


# -- geodesics --


def test_geodesic_inside_X():
    a = fx("dihedral").action
    w = geodesic(a, embed(0), embed(2))
    assert w.segments == (((), 0, 2),)
    assert w.form == "A3" and w.total == 2.0


def test_geodesic_z_gluing():
    a = fx("z_gluing").action
    w = geodesic(a, embed(1), ((0,), 1))
    assert w.segments == (((), 1, 0), ((0,), 0, 1))
    assert w.form == "A5"
    assert w.total == 2.0


def test_geodesic_same_point():
    a = fx("shimrat3").action
    el = ((0,), 0)
    w = geodesic(a, el, el)
    assert w.total == 0.0


def test_geodesic_none_when_unreachable():
    a = fx("degenerate").action
    assert geodesic(a, embed(0), ((0,), 0)) is None


def test_classify_patterns():
    a = fx("z_gluing").action
    g = (0,)
    assert classify_path(a, [((), 1, 0)])[0] == "A3"
    assert classify_path(a, [(g, 1, 0)])[0] == "A1"
    assert classify_path(a, [(g, 0, 1)])[0] == "A2"
    assert classify_path(a, [(g, 1, 0), ((), 0, 1)])[0] == "A4"
    assert classify_path(a, [(g, 1, 0), ((), 1, 0), (g, 0, 1)])[0] == "A6"
    assert classify_path(a, [(g, 1, 0), (g, 0, 1)])[0] == "A7"


# -- separation and layers --


def test_separated_fixture():
    assert check_separated(fx("shimrat3").action, 2).passed


def test_zero_distance_fails_separation():
    a = one_gen([[0, 0], [0, 0]], {0: 0})
    rep = check_separated(a, 0)
    assert not rep.passed and rep.min_distance == 0


def test_empty_space_separated():
    a = PartialAction(Presentation.build(["g"]), Space((), metric([])), ((),))
    assert check_separated(a, 2).passed


def test_local_isometry_examples():
    assert check_local_isometry(fx("z_gluing").action, (0,)).passed
    a = fx("shimrat3").action
    assert check_local_isometry(a, (a.presentation.gen_id("(xy)"),)).passed
    one = one_gen([[0]], {})
    assert check_local_isometry(one, (0,)).passed
    assert check_local_isometry(a, ()).passed


# -- gluing --


def test_glue_chain():
    g = glue(metric([[0, 1], [1, 0]]), metric([[0, 2], [2, 0]]), [(1, 0)])
    assert g.metric.dist[0][2] == 3.0
    assert g.origin == ((1, 0), (1, 1), (2, 1))


def test_glue_full_identification():
    m = metric([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    g = glue(m, m, [(0, 0), (1, 1), (2, 2)])
    assert g.metric == m


def test_glue_disjoint():
    g = glue(metric([[0, 1], [1, 0]]), metric([[0, 2], [2, 0]]), [])
    assert g.metric.dist[0][2] == INF and g.metric.dist[1][3] == INF
    assert g.metric.dist[2][3] == 2.0


def test_glue_rejects_non_isometric():
    with pytest.raises(ValueError):
        glue(metric([[0, 1], [1, 0]]), metric([[0, 2], [2, 0]]), [(0, 0), (1, 1)])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_glue_matches_formula(seed):
    rng = random.Random(seed)
    g, m1, m2, ident = random_glue(rng)
    n1 = m1.size
    kept = [y for side, y in g.origin if side == 2]
    for x in range(n1):
        for k, y in enumerate(kept):
            assert close(g.metric.dist[x][n1 + k], glue_formula(m1, m2, ident, x, y))
    for x, y in product(range(n1), repeat=2):
        assert close(g.metric.dist[x][y], m1(x, y))


def random_glue(rng):
    """Two subsets of one line sharing some points."""
    pts = sorted(rng.sample(range(12), rng.randint(2, 7)))
    a = sorted(rng.sample(pts, rng.randint(1, len(pts))))
    b = sorted(rng.sample(pts, rng.randint(1, len(pts))))
    m1 = metric([[abs(p - q) for q in a] for p in a])
    m2 = metric([[abs(p - q) for q in b] for p in b])
    ident = [(a.index(p), b.index(p)) for p in a if p in b]
    return glue(m1, m2, ident), m1, m2, ident


# -- homogenization --


def test_homogenize_singletons_is_shimrat():
    sp = fx("shimrat3").space
    gamma = [{y: x} for x in range(3) for y in range(3) if x != y]
    r = homogenize_step(sp, gamma, 2)
    assert r.passed
    assert len(r.truncation) == len(enumerate_truncation(singleton_homogeneous_action(sp), 2))
    assert len(r.action.presentation.rules) == 12


def test_homogenize_global_isometry_collapses():
    sp = fx("shimrat3").space
    r = homogenize_step(sp, [{0: 1, 1: 0, 2: 2}], 3)
    assert list(r.truncation) == [embed(x) for x in range(3)]
    assert r.passed


def test_homogenize_empty_gamma():
    sp = fx("shimrat3").space
    r = homogenize_step(sp, [], 2)
    assert list(r.truncation) == [embed(x) for x in range(3)]


def test_homogenize_rejects_bad_gamma():
    sp = fx("shimrat3").space
    with pytest.raises(ValueError, match="isometric"):
        homogenize_step(sp, [{0: 2, 1: 0}], 2)
    with pytest.raises(ValueError, match="empty"):
        homogenize_step(sp, [{}], 2)


# -- properties --


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_isometric_embedding(seed):
    a = random_metric_action(random.Random(seed))
    d = a.space.metric
    dm = distance_matrix(a, [embed(x) for x in range(a.n)])
    for x, y in product(range(a.n), repeat=2):
        assert close(dm[x][y], d(x, y))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_oracle_agreement(seed):
    rng = random.Random(seed)
    a = random_metric_action(rng)
    if a.n > 4 or a.presentation.size > 4:
        a = free_monoid_action(rng, n=3, k=2)
    els = list(enumerate_truncation(a, 2))
    dm = distance_matrix(a, els)
    o = BruteForceOracle(a, 4)
    for i, e in enumerate(els):
        for j, f in enumerate(els):
            segs = 2 * (len(e.word) + len(f.word) + 1)
            assert close(o.distance(e, f, segs), dm[i][j])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_group_formula_agreement(seed):
    a = free_group_action(random.Random(seed), n=random.Random(seed).randint(1, 4))
    els = list(enumerate_truncation(a, 2))
    dm = distance_matrix(a, els)
    for i, e in enumerate(els):
        for j, f in enumerate(els):
            assert close(distance_group_formula(a, e.word, f.word, e.point, f.point), dm[i][j])


@pytest.mark.parametrize("name", group_fixtures())
def test_translation_invariance_groups(name):
    a = fx(name).action
    els = list(enumerate_truncation(a, 1))
    dm = distance_matrix(a, els)
    for w in normal_words(a.presentation, 2):
        moved = [act_on_element(a, w, el) for el in els]
        dm2 = distance_matrix(a, moved)
        for i, j in product(range(len(els)), repeat=2):
            assert close(dm[i][j], dm2[i][j])


@pytest.mark.parametrize("name", metric_fixtures())
def test_translations_nonexpansive(name):
    a = fx(name).action
    els = list(enumerate_truncation(a, 1))
    dm = distance_matrix(a, els)
    for w in normal_words(a.presentation, 2):
        moved = [act_on_element(a, w, el) for el in els]
        dm2 = distance_matrix(a, moved)
        for i, j in product(range(len(els)), repeat=2):
            assert dm2[i][j] <= dm[i][j] + TOL


@pytest.mark.parametrize("name", metric_fixtures())
def test_close_elements_share_prefix(name):
    """D(u·x, v·y) < d(x, dom(g_1)) with u·x normal forces u ⪯ v."""
    a = fx(name).action
    d = a.space.metric
    els = list(enumerate_truncation(a, 2))
    dm = distance_matrix(a, els)
    for i, e in enumerate(els):
        if not e.word:
            continue
        eps = d.to_set(e.point, a.dom(e.word[-1]))
        for j, f in enumerate(els):
            if dm[i][j] < eps:
                assert is_prefix(a.presentation, e.word, f.word)


@pytest.mark.parametrize("name", metric_fixtures())
def test_pseudometric_criterion(name):
    a = fx(name).action
    els = list(enumerate_truncation(a, 2))
    dm = distance_matrix(a, els)
    has_inf = any(v == INF for row in dm for v in row)
    assert has_inf == (not is_nowhere_degenerate(a))


@pytest.mark.parametrize("name", metric_fixtures())
def test_triangle_inequality_on_Y2(name):
    a = fx(name).action
    els = list(enumerate_truncation(a, 2))
    if len(els) > 20:
        els = els[:20]
    dm = distance_matrix(a, els)
    assert validate_pseudometric(WeakPseudometric(tuple(tuple(r) for r in dm))).valid


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_geodesics_realize_distance(seed):
    a = random_metric_action(random.Random(seed))
    els = list(enumerate_truncation(a, 2))[:25]
    dm = distance_matrix(a, els)
    for i, e in enumerate(els):
        for j, f in enumerate(els):
            w = geodesic(a, e, f)
            if dm[i][j] == INF:
                assert w is None
                continue
            assert close(w.total, dm[i][j])
            assert w.form in {f"A{k}" for k in range(1, 8)}
            assert check_path(a, e, f, w.segments)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_separation_random(seed):
    a = random_metric_action(random.Random(seed))
    assert check_separated(a, 2).passed


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_local_isometry_random(seed):
    a = random_metric_action(random.Random(seed))
    for u in normal_words(a.presentation, 2):
        assert check_local_isometry(a, u).passed
