"""Brute-force oracle: enumeration and mismatch reporting."""

from knapsolve.expr import parse_expr
from knapsolve.groups import IntegerGroup, cyclic_group
from knapsolve.oracle import brute_force_solutions, compare
from knapsolve.semilinear import LinearSet, SemilinearSet


def test_brute_force_integer_example():
    backend = IntegerGroup("t")
    e = parse_expr("t^x t'^4")
    assert brute_force_solutions(backend, e, 6) == {(4,)}


def test_brute_force_cyclic():
    backend = cyclic_group(2, "a")
    e = parse_expr("a^x")
    assert brute_force_solutions(backend, e, 5) == {(0,), (2,), (4,)}


def test_brute_force_unsatisfiable():
    backend = cyclic_group(2, "a")
    assert brute_force_solutions(backend, parse_expr("a^x a"), 4) == {(1,), (3,)}
    assert brute_force_solutions(backend, parse_expr("(a a)^x a"), 4) == set()


def test_compare_passes_on_correct_set():
    backend = cyclic_group(3, "b")
    e = parse_expr("b^x")
    S = SemilinearSet(("x",), [LinearSet((0,), [(3,)])])
    report = compare(backend, e, S, 9)
    assert report["ok"]
    assert report["mismatches"] == []


def test_compare_reports_witness_both_directions():
    backend = cyclic_group(3, "b")
    e = parse_expr("b^x")
    # base perturbed: claims 1 instead of 0
    wrong = SemilinearSet(("x",), [LinearSet((1,), [(3,)])])
    report = compare(backend, e, wrong, 9)
    assert not report["ok"]
    points = {tuple(m["point"]) for m in report["mismatches"]}
    # misses a real solution and claims a non-solution
    assert (0,) in points and (1,) in points


def test_compare_empty_against_empty():
    backend = cyclic_group(2, "a")
    e = parse_expr("(a a)^x a")
    report = compare(backend, e, SemilinearSet.empty(("x",)), 6)
    assert report["ok"]
