from hypothesis import given, strategies as st
import pytest

from scpdil import lattice as lw

coords = st.integers(-6, 6)


def vec(n):
    return st.tuples(*([coords] * n))


def test_lattice_bounds_examples():
    assert lw.lattice_bounds((2, 0), (1, 1)) == ((2, 1), (1, 0))
    assert lw.lattice_bounds((0, 0), (3, 5)) == ((3, 5), (0, 0))
    j, m = lw.lattice_bounds((3, 1), (1, 2))
    assert (j, m) == ((3, 2), (1, 1))
    assert lw.add(j, m) == (4, 3) == lw.add((3, 1), (1, 2))


def test_lattice_bounds_dimension_mismatch():
    with pytest.raises(lw.DimensionError):
        lw.lattice_bounds((1, 2), (1, 2, 3))


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(vec(n), vec(n))))
def test_join_plus_meet_is_sum(pair):
    x, y = pair
    j, m = lw.lattice_bounds(x, y)
    assert lw.add(j, m) == lw.add(x, y)
    assert lw.leq(m, j)


def test_pos_neg_parts_examples():
    assert lw.pos_neg_parts((-1, 2)) == ((0, 2), (1, 0))
    assert lw.pos_neg_parts((0, 0)) == ((0, 0), (0, 0))
    assert lw.pos_neg_parts((-3, -1)) == ((0, 0), (3, 1))


@given(st.integers(1, 5).flatmap(vec))
def test_pos_neg_parts_unique_split(g):
    plus, minus = lw.pos_neg_parts(g)
    assert lw.sub(plus, minus) == tuple(g)
    assert all(c >= 0 for c in plus + minus)
    assert lw.meet(plus, minus) == lw.zero(len(g))


def test_support_perp_examples():
    supp, perp = lw.support_perp((0, 3, 0))
    assert supp == {2}
    assert perp((1, 0, 5))
    supp, perp = lw.support_perp((0, 0))
    assert supp == frozenset()
    assert perp((4, 7)) and perp((0, 0))
    _, perp = lw.support_perp((1, 1))
    assert not perp((0, 1))


def test_word_reverse_source_examples():
    assert lw.word_reverse_source((2, 3, 1)) == ((1, 3, 2), 1)
    assert lw.word_reverse_source(()) == ((), None)
    assert lw.word_reverse_source((2,)) == ((2,), 2)


words = st.lists(st.integers(1, 3), max_size=6).map(tuple)


@given(words, words)
def test_reverse_is_antihomomorphic_involution(u, v):
    assert lw.reverse(lw.reverse(u)) == u
    assert lw.reverse(u + v) == lw.reverse(v) + lw.reverse(u)
    assert len(lw.reverse(u)) == len(u)


def test_enumerate_box_order():
    assert lw.enumerate_box(2, 1) == [(0, 0), (1, 0), (0, 1), (1, 1)]
    assert lw.enumerate_box(1, 3) == [(0,), (1,), (2,), (3,)]


@given(st.integers(1, 3), st.integers(0, 3))
def test_enumeration_sizes_and_stability(n, N):
    box = lw.enumerate_box(n, N)
    assert len(box) == (N + 1) ** n == len(set(box))
    assert box == lw.enumerate_box(n, N)
    assert len(lw.enumerate_words(n, N)) == sum(n**k for k in range(N + 1))


def test_enumerate_words_count():
    assert len(lw.enumerate_words(2, 2)) == 7
    assert lw.enumerate_words(2, 1) == [(), (1,), (2,)]


def test_unit_is_one_based():
    assert lw.unit(3, 1) == (1, 0, 0)
    with pytest.raises(ValueError):
        lw.unit(2, 0)


def test_reduced_words():
    assert lw.reduced((1, -1, 2)) == (2,)
    assert lw.reduced((2, 1, -1, -2)) == ()
    assert lw.reduced((1, 2, -1)) == (1, 2, -1)


def test_cayley_branch_vertices():
    # n = 1: the branch is the single ray 1, 11, 111
    assert lw.cayley_branch_vertices(1, 3) == [(1,), (1, 1), (1, 1, 1)]
    verts = lw.cayley_branch_vertices(2, 2)
    assert verts[:2] == [(1,), (2,)]
    # each length-1 vertex has 2n - 1 children
    assert len(verts) == 2 + 2 * 3
    for w in verts:
        assert w[-1] > 0 and lw.reduced(w) == w


def test_enumerate_cube():
    cube = lw.enumerate_cube(2, 1)
    assert cube[0] == (0, 0) and len(cube) == 9
