"""Base group backends and the generic exponent driver."""

import itertools
import random

import pytest

from knapsolve.errors import InputError
from knapsolve.expr import parse_expr
from knapsolve.groups import (
    FiniteGroup,
    IntegerGroup,
    build_backend,
    cyclic_group,
    solve_exponent,
)
from knapsolve.words import invert_word


def test_integer_word_problem():
    Z = IntegerGroup()
    assert Z.word_problem(("t", "t", "t'", "t'"))
    assert not Z.word_problem(("t",))
    assert Z.norm(("t", "t", "t'")) == 1
    with pytest.raises(InputError):
        Z.word_problem(("a",))


def test_integer_knapsack():
    Z = IntegerGroup()
    S = solve_exponent(Z, parse_expr("t^x t'^4"))
    assert S.points_in_box(10) == {(4,)}
    S = solve_exponent(Z, parse_expr("(t t)^x (t t t)^y t'^7"))
    assert S.points_in_box(10) == {(2, 1)}
    S = solve_exponent(Z, parse_expr("(t t)^x (t' t')^y"))
    assert S.points_in_box(9) == {(k, k) for k in range(10)}


def test_integer_repeated_variable():
    Z = IntegerGroup()
    S = solve_exponent(Z, parse_expr("t^x t^x t'^6"))
    assert S.points_in_box(10) == {(3,)}


def test_cyclic_group_word_problem():
    Z2 = cyclic_group(2, "a")
    assert not Z2.word_problem(("a", "a", "a"))
    assert Z2.word_problem(("a", "a"))
    assert Z2.word_problem(("a", "a'"))
    assert Z2.norm(("a",)) == 1


def test_finite_knapsack():
    Z2 = cyclic_group(2, "a")
    S = solve_exponent(Z2, parse_expr("a^x a"))
    assert S.points_in_box(9) == {(k,) for k in range(1, 10, 2)}
    Z3 = cyclic_group(3, "b")
    S = solve_exponent(Z3, parse_expr("b^x"))
    assert S.points_in_box(9) == {(k,) for k in range(0, 10, 3)}
    assert S.magnitude() <= 3
    S = solve_exponent(Z2, parse_expr("a^x a^y a"))
    assert S.points_in_box(8) == {
        (x, y) for x in range(9) for y in range(9) if (x + y) % 2 == 1
    }


def test_finite_group_validation():
    with pytest.raises(InputError):
        FiniteGroup(["e", "a"], [[0, 1], [1, 1]], {"a": 1})  # not a group
    with pytest.raises(InputError):
        FiniteGroup(["e", "a"], [[0, 1]], {"a": 1})  # ragged
    with pytest.raises(InputError):
        FiniteGroup(["e", "a"], [[0, 1], [1, 0]], {"a": 7})  # bad generator


def test_word_inverse_property():
    rng = random.Random(3)
    for backend in (IntegerGroup(), cyclic_group(2, "a"), cyclic_group(5, "c")):
        letters = sorted(backend.alphabet)
        for _ in range(25):
            w = tuple(rng.choice(letters) for _ in range(rng.randrange(0, 8)))
            assert backend.word_problem(w + invert_word(w))


def test_build_backend_leaves():
    Z = build_backend({"type": "IntegerGroup", "generator": "t"})
    assert Z.word_problem(("t", "t'"))
    Z4 = build_backend({"type": "CyclicGroup", "order": 4, "generator": "a"})
    assert Z4.word_problem(("a",) * 4)
    desc = {
        "type": "FiniteGroup",
        "elements": ["e", "a"],
        "table": [[0, 1], [1, 0]],
        "generators": {"a": 1},
    }
    Z2 = build_backend(desc)
    assert Z2.word_problem(("a", "a"))
    with pytest.raises(InputError):
        build_backend({"type": "Nonsense"})
    with pytest.raises(InputError):
        build_backend([1, 2])


def test_solve_knapsack_finite_magnitude_bound():
    for n in (2, 3, 4, 6):
        G = cyclic_group(n, "a")
        e = parse_expr("a^x (a a)^y a")
        S = solve_exponent(G, e)
        assert S.magnitude() <= n
        for v in itertools.product(range(12), repeat=2):
            expected = G.word_problem(e.evaluate(dict(zip(("x", "y"), v))))
            assert S.membership(v) == expected
