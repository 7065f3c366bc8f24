"""Semilinear set algebra against set-theoretic ground truth."""

import itertools
import random

import pytest

from knapsolve.errors import InputError
from knapsolve.semilinear import (
    DiophSystem,
    LinearSet,
    SemilinearSet,
    solve_dioph_nonneg,
)


def box_points(S, bound):
    d = S.dim
    return {
        v
        for v in itertools.product(range(bound + 1), repeat=d)
        if S.membership(v)
    }


def test_membership_base_point():
    S = SemilinearSet(("x", "y"), [LinearSet((2, 1), [])])
    assert S.membership((2, 1))
    assert not S.membership((2, 2))


def test_membership_two_periods():
    S = SemilinearSet(("x", "y"), [LinearSet((0, 0), [(2, 0), (0, 3)])])
    assert not S.membership((1, 1))
    assert S.membership((4, 3))


def test_membership_dimension_mismatch():
    S = SemilinearSet(("x",), [LinearSet((0,), [(1,)])])
    with pytest.raises(InputError):
        S.membership((1, 2))


def test_solve_dioph_single_solution():
    # 2x + 3y = 7
    S = solve_dioph_nonneg(DiophSystem([(2, 3)], (7,)))
    assert box_points(S, 10) == {(2, 1)}


def test_solve_dioph_homogeneous():
    # 2x - 3y = 0
    S = solve_dioph_nonneg(DiophSystem([(2, -3)], (0,)))
    expected = {(3 * k, 2 * k) for k in range(8)}
    assert box_points(S, 21) == {v for v in expected if max(v) <= 21}


def test_solve_dioph_unsatisfiable():
    S = solve_dioph_nonneg(DiophSystem([(0,)], (1,)))
    assert S.is_empty_representation()


def test_solve_dioph_against_enumeration():
    rng = random.Random(7)
    for _ in range(30):
        rows = rng.randrange(1, 3)
        d = rng.randrange(1, 4)
        matrix = [
            tuple(rng.randrange(-3, 4) for _ in range(d)) for _ in range(rows)
        ]
        rhs = tuple(rng.randrange(-4, 8) for _ in range(rows))
        sys = DiophSystem(matrix, rhs)
        S = solve_dioph_nonneg(sys)
        for v in itertools.product(range(9), repeat=d):
            assert S.membership(v) == (sys.apply(v) == rhs), (matrix, rhs, v)


def test_intersect_lcm():
    S1 = SemilinearSet(("x",), [LinearSet((0,), [(2,)])])
    S2 = SemilinearSet(("x",), [LinearSet((0,), [(3,)])])
    inter = S1.intersect(S2)
    assert box_points(inter, 30) == {(v,) for v in range(0, 31, 6)}


def test_intersect_idempotent():
    S = SemilinearSet(("x", "y"), [LinearSet((1, 0), [(2, 1)])])
    assert box_points(S.intersect(S), 12) == box_points(S, 12)


def test_intersect_parity_empty():
    S1 = SemilinearSet(("x",), [LinearSet((0,), [(2,)])])
    S2 = SemilinearSet(("x",), [LinearSet((1,), [(2,)])])
    assert box_points(S1.intersect(S2), 20) == set()


def test_intersect_aligns_by_name():
    S1 = SemilinearSet(("x", "y"), [LinearSet((1, 2), [])])
    S2 = SemilinearSet(("y", "x"), [LinearSet((2, 1), [])])
    assert box_points(S1.intersect(S2), 4) == {(1, 2)}


def test_direct_sum():
    S1 = SemilinearSet(("x",), [LinearSet((1,), [(2,)])])
    S2 = SemilinearSet(("y",), [LinearSet((0,), [(3,)])])
    S = S1.direct_sum(S2)
    assert S.vars == ("x", "y")
    assert box_points(S, 12) == {
        (1 + 2 * a, 3 * b) for a in range(6) for b in range(5)
        if 1 + 2 * a <= 12 and 3 * b <= 12
    }
    assert S.magnitude() == 3


def test_direct_sum_empty_annihilates():
    S1 = SemilinearSet(("x",), [LinearSet((1,), [])])
    S2 = SemilinearSet.empty(("y",))
    assert S1.direct_sum(S2).is_empty_representation()


def test_direct_sum_overlap_rejected():
    S = SemilinearSet(("x",), [LinearSet((1,), [])])
    with pytest.raises(InputError):
        S.direct_sum(S)


def test_restrict():
    S = SemilinearSet(("x", "y"), [LinearSet((2, 1), [])])
    assert box_points(S.restrict(("x",)), 4) == {(2,)}
    diag = SemilinearSet(("x", "y"), [LinearSet((0, 0), [(1, 1)])])
    assert box_points(diag.restrict(("y",)), 4) == {(v,) for v in range(5)}
    assert SemilinearSet.empty(("x", "y")).restrict(("y",)).is_empty_representation()


def test_magnitude():
    S = SemilinearSet(("x", "y"), [LinearSet((2, 1), [(0, 3)])])
    assert S.magnitude() == 3
    assert SemilinearSet.empty(("x",)).magnitude() == 0
    S2 = SemilinearSet(
        ("x",), [LinearSet((5,), []), LinearSet((0,), [(7,)])]
    )
    assert S2.magnitude() == 7


def test_affine_substitute():
    S = SemilinearSet(("x",), [LinearSet((0,), [(1,)])])
    out = S.affine_substitute({"x": 2}, {"x": 3})
    assert box_points(out, 30) == {(3 + 2 * k,) for k in range(14)}
    S2 = SemilinearSet(("x",), [LinearSet((1,), [(2,)])])
    out2 = S2.affine_substitute({"x": 3}, {"x": 1})
    assert box_points(out2, 30) == {(4 + 6 * k,) for k in range(5)}


def random_semilinear(rng, var_names):
    d = len(var_names)
    comps = []
    for _ in range(rng.randrange(0, 4)):
        base = tuple(rng.randrange(0, 5) for _ in range(d))
        periods = [
            tuple(rng.randrange(0, 5) for _ in range(d))
            for _ in range(rng.randrange(0, 3))
        ]
        comps.append(LinearSet(base, periods))
    return SemilinearSet(var_names, comps)


def test_random_ops_against_definitions():
    rng = random.Random(20_24)
    for _ in range(60):
        d = rng.randrange(1, 4)
        names = tuple("xyz"[:d])
        S1 = random_semilinear(rng, names)
        S2 = random_semilinear(rng, names)
        bound = 20
        pts1 = S1.points_in_box(bound)
        pts2 = S2.points_in_box(bound)
        inter = S1.intersect(S2)
        uni = S1.union(S2)
        for v in itertools.product(range(0, bound + 1, 3), repeat=d):
            m1, m2 = v in pts1, v in pts2
            assert S1.membership(v) == m1
            assert inter.membership(v) == (m1 and m2)
            assert uni.membership(v) == (m1 or m2)


def test_points_in_box_matches_membership():
    rng = random.Random(99)
    for _ in range(20):
        d = rng.randrange(1, 3)
        names = tuple("xy"[:d])
        S = random_semilinear(rng, names)
        pts = S.points_in_box(10)
        for v in itertools.product(range(11), repeat=d):
            assert (v in pts) == S.membership(v)


def test_union_commutative_associative():
    rng = random.Random(5)
    names = ("x", "y")
    A = random_semilinear(rng, names)
    B = random_semilinear(rng, names)
    C = random_semilinear(rng, names)
    assert A.union(B).points_in_box(9) == B.union(A).points_in_box(9)
    assert A.union(B.union(C)).points_in_box(9) == A.union(B).union(C).points_in_box(9)


def test_json_round_trip():
    S = SemilinearSet(("x", "y"), [LinearSet((1, 2), [(3, 0)])])
    assert SemilinearSet.from_json(S.to_json()) == S
