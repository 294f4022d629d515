from hypothesis import given, settings
from hypothesis import strategies as st

from loopmp import UnionFind


def test_basic_ops():
    uf = UnionFind(5)
    assert uf.union(0, 1)
    assert not uf.union(1, 0)
    assert uf.connected(0, 1)
    assert not uf.connected(0, 2)
    assert uf.cluster_size(1) == 2
    assert uf.cluster_size(3) == 1


def test_find_idempotent():
    uf = UnionFind(4)
    uf.union(0, 1)
    uf.union(2, 3)
    uf.union(0, 3)
    r = uf.find(2)
    assert uf.find(2) == r
    assert uf.find(uf.find(2)) == r


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 9), st.integers(0, 9)), max_size=40))
def test_sizes_always_sum_to_n(pairs):
    uf = UnionFind(10)
    for x, y in pairs:
        uf.union(x, y)
    roots = {uf.find(i) for i in range(10)}
    assert sum(uf.size[r] for r in roots) == 10
