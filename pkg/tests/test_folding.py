import random

from sphmach.folding import (
    SubgroupGraph, express_in_subgroup, expand_expression, subgroup_contains,
)
from sphmach.words import reduce_word, winv, wmul


def rand_word(rng, rank, length):
    return reduce_word(
        rng.choice([i for i in range(-rank, rank + 1) if i])
        for _ in range(length))


def test_basis_case():
    expr = express_in_subgroup([(1,), (2,)], (1, -2, 1))
    assert expr == (1, -2, 1)


def test_index_reasons():
    assert express_in_subgroup([(1, 1)], (1,)) is None
    assert subgroup_contains([(1, 1)], (1, 1, 1, 1))


def test_ab_ba_example():
    gens = [(1, 2), (2, 1)]
    expr = express_in_subgroup(gens, (1, 2, 2, 1))
    assert expr == (1, 2)
    assert expand_expression(expr, gens) == (1, 2, 2, 1)


def test_expression_round_trips_on_random_subgroups():
    rng = random.Random(0)
    for _ in range(300):
        gens = [rand_word(rng, 3, rng.randint(1, 8))
                for _ in range(rng.randint(1, 4))]
        e = reduce_word(
            rng.choice([i for i in range(-len(gens), len(gens) + 1) if i])
            for _ in range(rng.randint(0, 10)))
        target = expand_expression(e, gens)
        expr = express_in_subgroup(gens, target)
        assert expr is not None
        assert expand_expression(expr, gens) == target


def test_non_members_rejected():
    rng = random.Random(1)
    # index-2 subgroup: words of even total exponent
    gens = [(1, 1), (1, 2), (2, 1)]
    for _ in range(100):
        w = rand_word(rng, 2, rng.randint(1, 9))
        exponent = sum(1 if x > 0 else -1 for x in w)
        member = subgroup_contains(gens, w)
        if exponent % 2:
            assert not member
        got = express_in_subgroup(gens, w)
        assert (got is not None) == member
        if got is not None:
            assert expand_expression(got, gens) == w


def test_index_of_core_graph():
    g = SubgroupGraph([(1, 1), (1, 2), (2, 1)])
    assert g.index_in(2) == 2
    assert SubgroupGraph([(1,), (2,)]).index_in(2) == 1
    assert SubgroupGraph([(1, 1)]).index_in(2) is None


def test_generators_need_not_be_free():
    # redundant generating sets still give valid expressions
    gens = [(1,), (2,), (1, 2)]
    target = (2, 2, -1)
    expr = express_in_subgroup(gens, target)
    assert expr is not None
    assert expand_expression(expr, gens) == target
