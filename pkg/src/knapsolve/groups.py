"""Group backends and the generic exponent-equation driver.

A backend wraps a concretely described group and exposes three things:
the generator alphabet (closed under formal inverses), the word problem
(w =? 1), and a knapsack solver producing a SemilinearSet for
expressions in which every variable occurs once.  The generic driver
solve_exponent() handles repeated variables by knapsackify + intersect +
restrict, so backends never see them.

Base backends: the infinite cyclic group (one generator, exponent sums)
and finite groups given by a Cayley table.  Composite backends (graph
products, free products, HNN-extensions, amalgams, finite extensions)
live in their own modules and are wired up here by build_backend().
"""

import itertools

from .errors import InputError
from .expr import ExponentExpression, knapsackify
from .semilinear import DiophSystem, LinearSet, SemilinearSet, solve_dioph_nonneg
from .words import invert_letter, invert_word


class GroupBackend:
    """Interface shared by every group backend."""

    #: frozenset of generator letters, closed under invert_letter
    alphabet = frozenset()

    def word_problem(self, word):
        raise NotImplementedError

    def solve_knapsack(self, e):
        """Solution set of e = 1; every variable of e occurs exactly once."""
        raise NotImplementedError

    def norm(self, word):
        """Geodesic length of the element represented by word."""
        raise NotImplementedError

    def check_word(self, word):
        for a in word:
            if a not in self.alphabet:
                raise InputError(f"letter {a!r} not in group alphabet")


def solve_exponent(backend, e):
    """Full solution set of e = 1 over the backend's group.

    Reduces to the knapsack case: rename repeated variables apart,
    solve, intersect with the diagonal constraint, project back.
    """
    for period, _var, tail in e.factors:
        backend.check_word(period)
        backend.check_word(tail)
    e_prime, K = knapsackify(e)
    sols = backend.solve_knapsack(e_prime)
    if tuple(sols.vars) != e_prime.variables:
        sols = sols._aligned_to(e_prime.variables)
    return sols.intersect(K).restrict(e.variables)


# ---------------------------------------------------------------------------
# Infinite cyclic group


class IntegerGroup(GroupBackend):
    """The group of integers, one generator letter (default "t")."""

    def __init__(self, generator="t"):
        if generator.endswith("'"):
            raise InputError("generator name may not end with an apostrophe")
        self.generator = generator
        self.alphabet = frozenset({generator, invert_letter(generator)})

    def exponent_sum(self, word):
        self.check_word(word)
        return sum(-1 if a.endswith("'") else 1 for a in word)

    def word_problem(self, word):
        return self.exponent_sum(word) == 0

    def norm(self, word):
        return abs(self.exponent_sum(word))

    def solve_knapsack(self, e):
        coeffs = [self.exponent_sum(p) for p, _v, _t in e.factors]
        const = sum(self.exponent_sum(t) for _p, _v, t in e.factors)
        sys = DiophSystem([tuple(coeffs)], (-const,))
        return solve_dioph_nonneg(sys, var_names=e.variables)

    # -- element-level interface (used when this is a vertex group) ----

    identity_elem = 0

    def elem_from_word(self, word):
        return self.exponent_sum(word)

    def elem_mul(self, a, b):
        return a + b

    def elem_inv(self, a):
        return -a

    def elem_word(self, a):
        letter = self.generator if a >= 0 else invert_letter(self.generator)
        return (letter,) * abs(a)

    def elem_norm(self, a):
        return abs(a)

    def elem_sort_key(self, a):
        return (abs(a), a)

    def solve_elem_knapsack(self, entries, var_names):
        """Solve a product of element powers and constants equal to 1.

        entries: sequence of ("pow", elem, var) and ("const", elem).
        """
        coeffs = {v: 0 for v in var_names}
        const = 0
        for entry in entries:
            if entry[0] == "pow":
                coeffs[entry[2]] += entry[1]
            else:
                const += entry[1]
        sys = DiophSystem([tuple(coeffs[v] for v in var_names)], (-const,))
        return solve_dioph_nonneg(sys, var_names=tuple(var_names))


# ---------------------------------------------------------------------------
# Finite groups by Cayley table


class FiniteGroup(GroupBackend):
    """A finite group given by its multiplication table.

    Elements are opaque indices into the element-name list; the table is
    authoritative.  Generator letters map to elements; inverse letters
    map to the inverse elements automatically.
    """

    def __init__(self, element_names, table, generators):
        n = len(element_names)
        if len(set(element_names)) != n:
            raise InputError("FiniteGroup: duplicate element names")
        if len(table) != n or any(len(row) != n for row in table):
            raise InputError("FiniteGroup: table is not n x n")
        for i, row in enumerate(table):
            for j, v in enumerate(row):
                if not 0 <= v < n:
                    raise InputError(
                        f"FiniteGroup: table entry ({i},{j}) out of range"
                    )
        self.names = tuple(element_names)
        self.table = tuple(tuple(row) for row in table)
        # identity: the unique two-sided neutral element
        ids = [
            e
            for e in range(n)
            if all(self.table[e][x] == x and self.table[x][e] == x for x in range(n))
        ]
        if len(ids) != 1:
            raise InputError("FiniteGroup: no unique identity element")
        self.identity = ids[0]
        # inverses
        inv = [None] * n
        for x in range(n):
            for y in range(n):
                if self.table[x][y] == self.identity and self.table[y][x] == self.identity:
                    inv[x] = y
        if any(v is None for v in inv):
            raise InputError("FiniteGroup: some element has no inverse")
        self.inverse = tuple(inv)
        # associativity spot-check (full check is cubic; fine at this size)
        if n <= 12:
            triples = itertools.product(range(n), repeat=3)
        else:
            triples = itertools.islice(
                itertools.product(range(n), repeat=3), 2000
            )
        for a, b, c in triples:
            if self.table[self.table[a][b]][c] != self.table[a][self.table[b][c]]:
                raise InputError(
                    f"FiniteGroup: associativity fails at ({a},{b},{c})"
                )
        self.generator_map = {}
        for letter, idx in generators.items():
            if letter.endswith("'"):
                raise InputError("generator name may not end with an apostrophe")
            if not 0 <= idx < n:
                raise InputError(f"FiniteGroup: generator {letter!r} out of range")
            self.generator_map[letter] = idx
            self.generator_map[invert_letter(letter)] = self.inverse[idx]
        self.alphabet = frozenset(self.generator_map)
        # geodesic distances from the identity
        dist = {self.identity: 0}
        frontier = [self.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for g in set(self.generator_map.values()):
                    y = self.table[x][g]
                    if y not in dist:
                        dist[y] = dist[x] + 1
                        nxt.append(y)
            frontier = nxt
        self.distance = dist
        # a geodesic word for every reachable element
        geo = {self.identity: ()}
        frontier = [self.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for letter, g in self.generator_map.items():
                    y = self.table[x][g]
                    if y not in geo:
                        geo[y] = geo[x] + (letter,)
                        nxt.append(y)
            frontier = nxt
        self.geodesic = geo

    def eval_word(self, word):
        self.check_word(word)
        x = self.identity
        for a in word:
            x = self.table[x][self.generator_map[a]]
        return x

    def word_problem(self, word):
        return self.eval_word(word) == self.identity

    def norm(self, word):
        x = self.eval_word(word)
        if x not in self.distance:
            raise InputError("element not generated by the given generators")
        return self.distance[x]

    def order_of(self, x):
        k = 1
        y = x
        while y != self.identity:
            y = self.table[y][x]
            k += 1
        return k

    def solve_knapsack(self, e):
        """Enumerate residue tuples modulo element orders."""
        gs = [self.eval_word(p) for p, _v, _t in e.factors]
        tails = [self.eval_word(t) for _p, _v, t in e.factors]
        orders = [self.order_of(g) for g in gs]
        var_names = e.variables
        comps = []
        diag = [
            tuple(orders[i] if j == i else 0 for j in range(len(orders)))
            for i in range(len(orders))
        ]
        for residues in itertools.product(*[range(o) for o in orders]):
            x = self.identity
            for g, r, tail in zip(gs, residues, tails):
                for _ in range(r):
                    x = self.table[x][g]
                x = self.table[x][tail]
            if x == self.identity:
                comps.append(LinearSet(residues, diag))
        return SemilinearSet(var_names, comps)

    # -- element-level interface ---------------------------------------

    @property
    def identity_elem(self):
        return self.identity

    def elem_from_word(self, word):
        return self.eval_word(word)

    def elem_mul(self, a, b):
        return self.table[a][b]

    def elem_inv(self, a):
        return self.inverse[a]

    def elem_word(self, a):
        if a not in self.geodesic:
            raise InputError("element not generated by the given generators")
        return self.geodesic[a]

    def elem_norm(self, a):
        return self.distance[a]

    def elem_sort_key(self, a):
        return a

    def solve_elem_knapsack(self, entries, var_names):
        orders = {}
        for entry in entries:
            if entry[0] == "pow":
                orders.setdefault(entry[2], []).append(entry[1])
        # each variable occurs once in a knapsack product
        var_names = tuple(var_names)
        var_elem = {}
        for entry in entries:
            if entry[0] == "pow":
                var_elem[entry[2]] = entry[1]
        ords = [self.order_of(var_elem[v]) if v in var_elem else 1 for v in var_names]
        diag = [
            tuple(ords[i] if j == i else 0 for j in range(len(var_names)))
            for i in range(len(var_names))
        ]
        comps = []
        for residues in itertools.product(*[range(o) for o in ords]):
            val = dict(zip(var_names, residues))
            x = self.identity
            for entry in entries:
                if entry[0] == "pow":
                    g = entry[1]
                    for _ in range(val[entry[2]]):
                        x = self.table[x][g]
                else:
                    x = self.table[x][entry[1]]
            if x == self.identity:
                comps.append(LinearSet(residues, diag))
        return SemilinearSet(var_names, comps)


def cyclic_group(n, letter="a"):
    """Z/n with one generator letter; convenience constructor."""
    names = [f"g{i}" for i in range(n)]
    table = [[(i + j) % n for j in range(n)] for i in range(n)]
    return FiniteGroup(names, table, {letter: 1 % n})


# ---------------------------------------------------------------------------
# GroupDesc JSON


def build_backend(desc):
    """Build a backend from a constructor-tagged description tree."""
    if not isinstance(desc, dict) or "type" not in desc:
        raise InputError("group description must be an object with a 'type'")
    kind = desc["type"]
    if kind == "IntegerGroup":
        return IntegerGroup(desc.get("generator", "t"))
    if kind == "FiniteGroup":
        try:
            return FiniteGroup(desc["elements"], desc["table"], desc["generators"])
        except KeyError as exc:
            raise InputError(f"FiniteGroup description missing {exc}") from exc
    if kind == "CyclicGroup":
        # shorthand used by tests and the corpus
        return cyclic_group(int(desc["order"]), desc.get("generator", "a"))
    if kind in ("GraphProduct", "FreeProduct"):
        from .gp_solver import GraphProductBackend

        children = [build_backend(c) for c in desc.get("vertices", desc.get("children", []))]
        if not children:
            raise InputError(f"{kind}: needs at least one child group")
        if kind == "FreeProduct":
            edges = []
        else:
            edges = [tuple(e) for e in desc.get("edges", [])]
        return GraphProductBackend(children, edges)
    if kind == "Hnn":
        from .hnn import HnnBackend

        base = build_backend(desc["base"])
        return HnnBackend(
            base,
            desc.get("stable_letter", "t"),
            [tuple(w) for w in desc["A"]],
            [tuple(w) for w in desc["B"]],
        )
    if kind == "Amalgam":
        from .hnn import AmalgamBackend

        return AmalgamBackend(
            build_backend(desc["left"]),
            build_backend(desc["right"]),
            [tuple(w) for w in desc["phi1"]],
            [tuple(w) for w in desc["phi2"]],
            desc.get("stable_letter", "t"),
        )
    if kind == "FiniteExt":
        from .finite_ext import FiniteExtBackend

        return FiniteExtBackend(
            build_backend(desc["subgroup"]),
            desc["cosets"],
            desc["rules"],
        )
    raise InputError(f"unknown group constructor {kind!r}")


__all__ = [
    "GroupBackend",
    "IntegerGroup",
    "FiniteGroup",
    "cyclic_group",
    "build_backend",
    "solve_exponent",
]
