import random
from fractions import Fraction

import pytest

from sphmach import perms, zoo
from sphmach.words import SphereGroup, ConjClass, winv, wmul, conjugate, is_conjugate
from sphmach.machine import SphereMachine, WreathElement, multiset_of_lifts
from sphmach.mcbiset import compute_mcbiset
from sphmach.multicurve import (
    Multicurve, MulticurveError, SplitFailed, PromoteFailed,
    classify_lifts, thurston_matrix, ThurstonMatrix, charpoly,
    count_real_roots, is_obstructed, twist_lift_check,
    LinExpr, TwistFixedPointProblem, solve_twist_fixed_point,
    verify_fixed_point, mc_to_gog, promote_bijection,
)


def fixture():
    mf = zoo.centralizer7()
    return mf.machine, mf.curves, mf.autos


def test_multicurve_validation():
    G = SphereGroup(["a", "b", "c", "d"])
    with pytest.raises(MulticurveError):
        Multicurve(G, [()])
    with pytest.raises(MulticurveError):
        Multicurve(G, [(1,)])          # peripheral
    with pytest.raises(MulticurveError):
        Multicurve(G, [(1, 2, 3)])     # (abc) is the class of d^-1
    with pytest.raises(MulticurveError):
        Multicurve(G, [(1, 2), (-2, -1)])  # repeated as unoriented curves
    Multicurve(G, [(1, 2)])


def test_classify_lifts_fixture():
    M, C, _ = fixture()
    report = classify_lifts(M, C, C)
    tags_s = sorted(t for _, t in report[0][1])
    assert tags_s.count(("curve", 0)) == 1
    assert tags_s.count(("trivial",)) == 5
    tags_t = [t for _, t in report[1][1]]
    assert tags_t.count(("curve", 0)) == 2
    assert tags_t.count(("curve", 1)) == 3
    assert tags_t.count(("trivial",)) == 1


def test_classify_lifts_empty():
    M, _, _ = fixture()
    assert classify_lifts(M, Multicurve(M.source, []), None) == []


def test_thurston_matrix_fixture():
    M, C, _ = fixture()
    T = thurston_matrix(M, C)
    assert T.entries == [[Fraction(1), Fraction(2)], [Fraction(0), Fraction(3)]]
    # column consistency: total lift degree equals the machine degree
    assert T.column_degree_counts(M, C) == [6, 6]


def test_thurston_matrix_no_essential_lifts():
    # z^2 machine with the curve around both punctures of one preimage:
    # a 2-puncture group has no essential curves, so build a 4-puncture one
    G = SphereGroup(["a", "b", "c", "d"])
    rows = [
        WreathElement(((1,), ()), (1, 0)),
        WreathElement(((), (2,)), perms.identity(2)),
        WreathElement(((3,), ()), perms.identity(2)),
        WreathElement(((), G.normal_form([4])), (1, 0)),
    ]
    M = SphereMachine(G, G, rows)
    C = Multicurve(G, [(1, 2)])
    T = thurston_matrix(M, C)
    total = sum(x for row in T.entries for x in row)
    assert total == 0 or total > 0  # matrix computes without error
    assert T.shape == (1, 1)


def test_integral_matrix_when_all_lifts_degree_one():
    M, C, _ = fixture()
    T = thurston_matrix(M, C)
    assert T.is_integral()
    assert T.as_int_matrix() == [[1, 2], [0, 3]]


def test_fractional_entry_from_a_degree_five_lift():
    # the marked z^5 machine lifts the curve a*b to itself with degree 5
    M = zoo.z5_marked().machine
    C = Multicurve(M.source, [(1, 2)])
    T = thurston_matrix(M, C)
    assert T.entries == [[Fraction(1, 5)]]
    assert not T.is_integral()
    assert not is_obstructed(T).obstructed


def test_charpoly_and_sturm():
    A = [[Fraction(1), Fraction(2)], [Fraction(0), Fraction(3)]]
    p = charpoly(A)
    assert p == [Fraction(1), Fraction(-4), Fraction(3)]  # (x-1)(x-3)
    assert count_real_roots(p, Fraction(0), Fraction(4)) == 2
    assert count_real_roots(p, Fraction(2), Fraction(4)) == 1


def test_obstruction_decisions():
    fixture_T = ThurstonMatrix(["s", "t"], ["s", "t"],
                               [[Fraction(1), Fraction(2)],
                                [Fraction(0), Fraction(3)]])
    rep = is_obstructed(fixture_T)
    assert rep.obstructed
    assert abs(rep.perron_low - 3) < 1e-6 and abs(rep.perron_high - 3) < 1e-6
    assert not is_obstructed(ThurstonMatrix(["c"], ["c"], [[Fraction(0)]])).obstructed
    assert not is_obstructed(ThurstonMatrix(["c"], ["c"], [[Fraction(1, 2)]])).obstructed


def test_obstruction_agrees_with_exact_eigenvalues_on_2x2():
    import math
    rng = random.Random(0)
    for _ in range(200):
        a, b, c, d = (rng.randint(0, 4) for _ in range(4))
        T = ThurstonMatrix(["x", "y"], ["x", "y"],
                           [[Fraction(a), Fraction(b)],
                            [Fraction(c), Fraction(d)]])
        disc = (a - d) ** 2 + 4 * b * c
        radius = (a + d + math.sqrt(disc)) / 2
        rep = is_obstructed(T)
        assert rep.obstructed == (radius >= 1 - 1e-12), (a, b, c, d)
        assert rep.perron_low - 1e-6 <= radius <= rep.perron_high + 1e-6


def test_twist_lift_check_fixture():
    M, C, autos = fixture()
    mcb = compute_mcbiset(M, [("sigma", autos["sigma"]), ("tau", autos["tau"])])
    assert mcb.size == 1
    T = thurston_matrix(M, C)
    assert twist_lift_check(mcb, T, ["sigma", "tau"]) == []
    # negative control: a wrong matrix is reported
    bad = ThurstonMatrix(T.rows, T.cols,
                         [[Fraction(1), Fraction(2)], [Fraction(1), Fraction(3)]])
    assert twist_lift_check(mcb, bad, ["sigma", "tau"])


def test_twist_lift_check_identity_machine():
    G = SphereGroup(["a", "b", "c", "d", "e"])
    M = SphereMachine.identity(G)
    C = Multicurve(G, [(1, 2), (4, 5)])
    from sphmach.words import twist_about
    tw1, tw2 = twist_about(G, (1, 2)), twist_about(G, (4, 5))
    mcb = compute_mcbiset(M, [("t1", tw1), ("t2", tw2)])
    T = thurston_matrix(M, C)
    assert T.as_int_matrix() == [[1, 0], [0, 1]]
    assert twist_lift_check(mcb, T, ["t1", "t2"]) == []


def test_solver_fixture():
    M, C, _ = fixture()
    T = thurston_matrix(M, C)
    prob = TwistFixedPointProblem(
        T, [LinExpr.var("a").scale(2), LinExpr.var("b").scale(2)])
    sol = solve_twist_fixed_point(prob)
    assert sol.free_rank == 1
    assert [str(c) for c in sol.constraints] == ["a - b"]
    assert not sol.congruences
    values = {"a": 5, "b": 5}
    values.update({p: 7 for p in sol.free_params})
    assert verify_fixed_point(sol, prob, values)
    vt = sol.solution[1].evaluate(values)
    assert vt == -5  # theta_{2,s} = theta_{2,t} = -v_t
    bad = {"a": 5, "b": 4}
    bad.update({p: 7 for p in sol.free_params})
    assert not verify_fixed_point(sol, prob, bad)


def test_solver_trivial_and_invertible():
    T0 = ThurstonMatrix(["x"], ["x"], [[Fraction(0)]])
    sol = solve_twist_fixed_point(TwistFixedPointProblem(T0, [LinExpr()]))
    assert sol.free_rank == 0 and not sol.constraints
    assert sol.solution[0].evaluate({}) == 0
    T2 = ThurstonMatrix(["x"], ["x"], [[Fraction(2)]])
    prob = TwistFixedPointProblem(T2, [LinExpr.var("c")])
    sol2 = solve_twist_fixed_point(prob)
    assert sol2.free_rank == 0 and not sol2.constraints
    assert verify_fixed_point(sol2, prob, {"c": 4})
    assert sol2.solution[0].evaluate({"c": 4}) == -4


def test_solver_substitution_property_random():
    rng = random.Random(1)
    for _ in range(60):
        n = rng.randint(1, 3)
        T = ThurstonMatrix([f"c{i}" for i in range(n)],
                           [f"c{i}" for i in range(n)],
                           [[Fraction(rng.randint(0, 3)) for _ in range(n)]
                            for _ in range(n)])
        theta = [LinExpr.var(f"x{i}") for i in range(n)]
        sol = solve_twist_fixed_point(TwistFixedPointProblem(T, theta))
        # pick unknowns satisfying the constraints: solve by trying zeros
        values = {f"x{i}": 0 for i in range(n)}
        values.update({p: rng.randint(-3, 3) for p in sol.free_params})
        if all(c.evaluate(values) == 0 for c in sol.constraints) \
                and not sol.congruences:
            assert verify_fixed_point(
                sol, TwistFixedPointProblem(T, theta), values)


def test_mc_to_gog_standard_position():
    G = SphereGroup(["g1", "g2", "g3", "g4"])
    tree = mc_to_gog(G, Multicurve(G, [(1, 2)]), bound=2)
    assert len(tree.spheres) == 2
    names = sorted(tuple(v.group.names) for v in tree.spheres)
    assert names == [("e1", "g3", "g4"), ("g1", "g2", "e1")]
    for v in tree.spheres:
        prod = ()
        for w in v.embeds:
            prod = wmul(prod, w)
        assert G.normal_form(prod) == ()


def test_mc_to_gog_non_adjacent_pair_splits():
    # the pair {1,3} is standard-split on the sphere: g1*g3 extends to the
    # sphere tuple (g1, g3, g2^g3, g4), whose ordered product is the relator
    G = SphereGroup(["g1", "g2", "g3", "g4"])
    w = wmul((1,), (3,))
    certificate = [
        (1,), (3,), conjugate((2,), (3,)), G.gen(4)]
    prod = ()
    for x in certificate:
        prod = wmul(prod, x)
    assert G.normal_form(prod) == ()
    tree = mc_to_gog(G, Multicurve(G, [w]), bound=4)
    assert len(tree.spheres) == 2


def test_mc_to_gog_bound_exhaustion_is_inconclusive():
    G = SphereGroup(["g1", "g2", "g3", "g4"])
    # the homology of g1 * g2 g3 g2^-1 splits {1,3}|{2,4}, but no generating
    # realization exists within the budget; exhaustion is reported, not a
    # non-curve verdict
    wound = wmul((1,), conjugate((3,), (2,)))
    with pytest.raises(SplitFailed) as exc:
        mc_to_gog(G, Multicurve(G, [wound]), bound=4)
    assert exc.value.kind == "bound-exhausted"
    # the opposite winding is a genuine curve that needs a conjugator
    mild = wmul((1,), conjugate((3,), (-2,)))
    with pytest.raises(SplitFailed):
        mc_to_gog(G, Multicurve(G, [mild]), bound=0)
    tree = mc_to_gog(G, Multicurve(G, [mild]), bound=2)
    assert len(tree.spheres) == 2


def test_mc_to_gog_centralizer_fixture():
    M, C, _ = fixture()
    G = M.source
    tree = mc_to_gog(G, C, bound=4)
    assert len(tree.spheres) == 3
    tagsets = sorted(
        sorted(t[1] for t in v.tags if t[0] == "puncture")
        for v in tree.spheres)
    assert tagsets == [[1, 6, 7], [2, 5], [3, 4]]
    # reassembly: vertex relators embed to the identity, curve words to the
    # input curve classes
    for v in tree.spheres:
        prod = ()
        for i in v.group.relator:
            prod = wmul(prod, v.embeds[i - 1])
        assert G.normal_form(prod) == ()
    for c, curve in zip(tree.curves, C):
        assert ConjClass(M.source, c.element, sign_insensitive=True) == curve


def test_mc_to_gog_rejects_crossing_curves():
    G = SphereGroup(["g1", "g2", "g3", "g4", "g5"])
    with pytest.raises(SplitFailed) as exc:
        mc_to_gog(G, Multicurve(G, [(1, 2), (2, 3)]), bound=3)
    assert exc.value.kind in ("not-disjoint", "abelianization-inconsistent")


def test_promote_identity():
    M, C, _ = fixture()
    tree = mc_to_gog(M.source, C, bound=4)
    h = {("puncture", i): ("puncture", i) for i in range(1, 8)}
    h.update({("curve", 0): ("curve", 0), ("curve", 1): ("curve", 1)})
    got = promote_bijection(tree, tree, h)
    assert got.vertex_map == {0: 0, 1: 1, 2: 2}
    for i, phi in got.vertex_isos.items():
        v = tree.spheres[i]
        assert [phi.images[k] for k in range(v.group.n)] == \
            [v.group.gen(k + 1) for k in range(v.group.n)]


def test_promote_fails_on_different_edge_sets():
    G = SphereGroup(["g1", "g2", "g3", "g4"])
    one = mc_to_gog(G, Multicurve(G, [(1, 2)]), bound=2)
    none = mc_to_gog(G, Multicurve(G, []), bound=2)
    h = {("puncture", i): ("puncture", i) for i in range(1, 5)}
    h[("curve", 0)] = ("puncture", 1)
    with pytest.raises(PromoteFailed) as exc:
        promote_bijection(one, none, h)
    assert exc.value.step == 1


def test_promote_relabeling_round_trip():
    # same 3-vertex tree with punctures renamed consistently
    M, C, _ = fixture()
    G = M.source
    tree = mc_to_gog(G, C, bound=4)
    # swap the two interchangeable punctures x3 <-> x4 and x6 <-> x7
    h = {("puncture", i): ("puncture", i) for i in (1, 2, 5)}
    h[("puncture", 3)] = ("puncture", 4)
    h[("puncture", 4)] = ("puncture", 3)
    h[("puncture", 6)] = ("puncture", 7)
    h[("puncture", 7)] = ("puncture", 6)
    h[("curve", 0)] = ("curve", 0)
    h[("curve", 1)] = ("curve", 1)
    got = promote_bijection(tree, tree, h)
    # every vertex iso maps each class to the h-image class
    for i, phi in got.vertex_isos.items():
        v = tree.spheres[i]
        w = tree.spheres[got.vertex_map[i]]

        def key(tag):
            return ("curve", tag[1]) if tag[0] == "curve" else tag

        for pi, tag in enumerate(v.tags):
            img = phi.images[pi]
            want = h[key(tag)]
            matches = [pj for pj, t2 in enumerate(w.tags) if key(t2) == want]
            assert len(matches) == 1
            assert is_conjugate(w.group.gen(matches[0] + 1), img) is not None
