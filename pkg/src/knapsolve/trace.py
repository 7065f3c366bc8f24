"""Trace monoid over vertex-group atoms.

Atoms are nontrivial elements of one vertex group; two atoms commute
exactly when their vertices are adjacent in the independence graph.
Traces are stored in lexicographic normal form (least linearization
under the order: vertex index first, then the vertex group's element
order), so equality and hashing are cheap.

The rewriting system R multiplies adjacent same-vertex atoms (deleting
the pair when the product is trivial).  It is confluent and
length-reducing, and a trace represents the group identity iff its
normal form is empty; nf_R implements it on top of the trace's
dependence order.
"""

import itertools

from .errors import BudgetExceededError, InputError

PREFIX_COUNT_CAP = 200_000
LEVI_CAP = 300_000


class Atom:
    __slots__ = ("vertex", "elem", "_hash")

    def __init__(self, vertex, elem):
        object.__setattr__(self, "vertex", vertex)
        object.__setattr__(self, "elem", elem)
        object.__setattr__(self, "_hash", hash((vertex, elem)))

    def __setattr__(self, name, value):
        raise AttributeError("Atom is immutable")

    def __eq__(self, other):
        return (
            isinstance(other, Atom)
            and self.vertex == other.vertex
            and self.elem == other.elem
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Atom({self.vertex}, {self.elem})"


class TraceMonoid:
    """Context object: vertex groups plus the independence graph."""

    def __init__(self, vertex_backends, edges):
        self.vertices = list(vertex_backends)
        n = len(self.vertices)
        edge_set = set()
        for i, j in edges:
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise InputError(f"bad independence edge ({i},{j})")
            edge_set.add(frozenset((i, j)))
        self.edges = edge_set
        # letter -> vertex index; child alphabets must be disjoint
        self.letter_map = {}
        for idx, backend in enumerate(self.vertices):
            for letter in backend.alphabet:
                if letter in self.letter_map:
                    raise InputError(
                        f"letter {letter!r} appears in two vertex groups"
                    )
                self.letter_map[letter] = idx
        self.alphabet = frozenset(self.letter_map)

    def independent(self, v1, v2):
        return v1 != v2 and frozenset((v1, v2)) in self.edges

    def dependent_vertex_pairs(self):
        """All (i, j) with i <= j whose atoms do not commute (incl. i=j)."""
        n = len(self.vertices)
        out = [(i, i) for i in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                if not self.independent(i, j):
                    out.append((i, j))
        return out

    def alpha(self):
        """Largest clique size in the independence graph."""
        n = len(self.vertices)
        best = 1 if n else 0
        for size in range(2, n + 1):
            for combo in itertools.combinations(range(n), size):
                if all(
                    self.independent(a, b)
                    for a, b in itertools.combinations(combo, 2)
                ):
                    best = max(best, size)
        return best

    # -- atoms ---------------------------------------------------------

    def atom_key(self, atom):
        backend = self.vertices[atom.vertex]
        return (atom.vertex, backend.elem_sort_key(atom.elem))

    def atom_mul(self, a, b):
        """Product of two same-vertex atoms; None if it is the identity."""
        backend = self.vertices[a.vertex]
        prod = backend.elem_mul(a.elem, b.elem)
        if prod == backend.identity_elem:
            return None
        return Atom(a.vertex, prod)

    def atom_inv(self, a):
        backend = self.vertices[a.vertex]
        return Atom(a.vertex, backend.elem_inv(a.elem))

    def atom_norm(self, a):
        return self.vertices[a.vertex].elem_norm(a.elem)

    def atom_word(self, a):
        return self.vertices[a.vertex].elem_word(a.elem)

    def atoms_from_word(self, word):
        atoms = []
        for letter in word:
            if letter not in self.letter_map:
                raise InputError(f"letter {letter!r} not in any vertex group")
            vertex = self.letter_map[letter]
            backend = self.vertices[vertex]
            elem = backend.elem_from_word((letter,))
            if elem != backend.identity_elem:
                atoms.append(Atom(vertex, elem))
        return atoms

    # -- traces --------------------------------------------------------

    def canon(self, atoms):
        """Lexicographically least linearization of the commutation class."""
        remaining = list(atoms)
        out = []
        while remaining:
            best = None
            for idx, atom in enumerate(remaining):
                if any(
                    not self.independent(prev.vertex, atom.vertex)
                    for prev in remaining[:idx]
                ):
                    continue
                key = self.atom_key(atom)
                if best is None or key < best[0]:
                    best = (key, idx)
            _, idx = best
            out.append(remaining.pop(idx))
        return Trace(self, tuple(out))

    def trace(self, atoms):
        return self.canon(atoms)

    def trace_from_word(self, word):
        return self.canon(self.atoms_from_word(word))

    def empty_trace(self):
        return Trace(self, ())


class Trace:
    """Immutable trace in canonical linearization; create via TraceMonoid."""

    __slots__ = ("monoid", "atoms", "_order", "_alph", "_inv", "_hash")

    def __init__(self, monoid, atoms):
        object.__setattr__(self, "monoid", monoid)
        object.__setattr__(self, "atoms", tuple(atoms))
        object.__setattr__(self, "_order", None)
        object.__setattr__(self, "_alph", None)
        object.__setattr__(self, "_inv", None)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("Trace is immutable")

    def __eq__(self, other):
        return (
            isinstance(other, Trace)
            and self.monoid is other.monoid
            and self.atoms == other.atoms
        )

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash(self.atoms))
        return self._hash

    def __len__(self):
        return len(self.atoms)

    def __repr__(self):
        inner = " ".join(f"{a.vertex}:{a.elem}" for a in self.atoms)
        return f"[{inner}]"

    def __mul__(self, other):
        return self.monoid.canon(self.atoms + other.atoms)

    def pow(self, k):
        return self.monoid.canon(self.atoms * k)

    def inv(self):
        if self._inv is None:
            object.__setattr__(self, "_inv", self.monoid.canon(
                [self.monoid.atom_inv(a) for a in reversed(self.atoms)]
            ))
        return self._inv

    def alph_gamma(self):
        if self._alph is None:
            object.__setattr__(
                self, "_alph", frozenset(a.vertex for a in self.atoms)
            )
        return self._alph

    def norm(self):
        return sum(self.monoid.atom_norm(a) for a in self.atoms)

    def to_word(self):
        out = []
        for a in self.atoms:
            out.extend(self.monoid.atom_word(a))
        return tuple(out)

    # -- dependence order over positions of the canonical word ---------

    def order(self):
        """order[i] = set of positions strictly below position i."""
        if self._order is not None:
            return self._order
        n = len(self.atoms)
        below = [set() for _ in range(n)]
        for j in range(n):
            for i in range(j - 1, -1, -1):
                if i in below[j]:
                    continue
                if not self.monoid.independent(
                    self.atoms[i].vertex, self.atoms[j].vertex
                ):
                    below[j].add(i)
                    below[j] |= below[i]
        object.__setattr__(self, "_order", below)
        return below

    def minimal_positions(self):
        below = self.order()
        return [i for i in range(len(self.atoms)) if not below[i]]

    def maximal_positions(self):
        below = self.order()
        n = len(self.atoms)
        above = set()
        for j in range(n):
            above |= below[j]
        # position i is maximal iff nothing has it strictly below
        return [i for i in range(n) if not any(i in below[j] for j in range(n))]

    def subtrace(self, positions):
        keep = sorted(positions)
        return self.monoid.canon([self.atoms[i] for i in keep])

    def downsets(self, cap=LEVI_CAP):
        """All downsets of the dependence order, as frozensets of positions."""
        below = self.order()
        n = len(self.atoms)
        found = {frozenset()}
        frontier = [frozenset()]
        while frontier:
            nxt = []
            for d in frontier:
                for i in range(n):
                    if i in d or not below[i] <= d:
                        continue
                    d2 = d | {i}
                    if d2 not in found:
                        found.add(d2)
                        if len(found) > cap:
                            raise BudgetExceededError("downset enumeration", cap)
                        nxt.append(d2)
            frontier = nxt
        return found


def trace_equal(t1, t2):
    return t1 == t2


def project_pair(t, i, j):
    """Atoms of vertices i and j in canonical order.

    For a dependent pair this is the projection word, independent of the
    chosen linearization; it is the basis of the projection
    characterization of trace equality.
    """
    return tuple(a for a in t.atoms if a.vertex in (i, j))


def equal_by_projections(t1, t2):
    return all(
        project_pair(t1, i, j) == project_pair(t2, i, j)
        for i, j in t1.monoid.dependent_vertex_pairs()
    )


# ---------------------------------------------------------------------------
# The rewriting system R


def _factor_pairs(t):
    """All position pairs (p, q) forming a rewritable factor [ab].

    p, q carry same-vertex atoms, consecutive among that vertex's
    positions, with nothing strictly between them in the dependence
    order.
    """
    below = t.order()
    by_vertex = {}
    for pos, atom in enumerate(t.atoms):
        by_vertex.setdefault(atom.vertex, []).append(pos)
    n = len(t.atoms)
    pairs = []
    for positions in by_vertex.values():
        for p, q in zip(positions, positions[1:]):
            blocked = any(
                p in below[r] and r in below[q]
                for r in range(n)
                if r != p and r != q
            )
            if not blocked:
                pairs.append((p, q))
    return pairs


def has_redex(t):
    return bool(_factor_pairs(t))


def nf_R(t, rng=None):
    """Unique R-irreducible normal form of t.

    With rng given, redexes are chosen at random instead of first-found;
    confluence guarantees the result is the same either way (and the
    test suite spot-checks exactly that).
    """
    cur = t
    while True:
        pairs = _factor_pairs(cur)
        if not pairs:
            return cur
        if rng is not None:
            p, q = pairs[rng.randrange(len(pairs))]
        else:
            p, q = pairs[0]
        merged = cur.monoid.atom_mul(cur.atoms[p], cur.atoms[q])
        atoms = list(cur.atoms)
        if merged is None:
            del atoms[q]
            del atoms[p]
        else:
            atoms[p] = merged
            del atoms[q]
        cur = cur.monoid.canon(atoms)


# ---------------------------------------------------------------------------
# Structure: prefixes, connectivity, well-behavedness


def prefix_count(t, cap=PREFIX_COUNT_CAP):
    """Number of prefixes of t (downsets of its dependence order)."""
    below = t.order()
    n = len(t.atoms)
    strictly_above = [set() for _ in range(n)]
    for j in range(n):
        for i in below[j]:
            strictly_above[i].add(j)
    memo = {}

    def count(positions):
        if not positions:
            return 1
        key = positions
        if key in memo:
            return memo[key]
        if len(memo) > cap:
            raise BudgetExceededError("prefix counting", cap)
        x = next(iter(positions))
        up = (strictly_above[x] & positions) | {x}
        down = (below[x] & positions) | {x}
        result = count(positions - up) + count(positions - down)
        memo[key] = result
        return result

    return count(frozenset(range(n)))


def connected_components(t):
    """Split t into pairwise independent connected factors."""
    vertices = sorted(t.alph_gamma())
    parent = {v: v for v in vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for v1, v2 in itertools.combinations(vertices, 2):
        if not t.monoid.independent(v1, v2):
            parent[find(v1)] = find(v2)
    groups = {}
    for pos, atom in enumerate(t.atoms):
        groups.setdefault(find(atom.vertex), []).append(pos)
    return [t.subtrace(positions) for positions in groups.values()]


def is_connected(t):
    return len(connected_components(t)) == 1


def _same_vertex_split(t):
    """Positions (p, q), p minimal, q maximal, p != q, same vertex.

    Such a pair witnesses a factorization t = a v b with a, b atoms of
    one vertex group; its absence is the fourth well-behavedness
    condition.
    """
    minimal = t.minimal_positions()
    maximal = set(t.maximal_positions())
    for p in minimal:
        for q in maximal:
            if p != q and t.atoms[p].vertex == t.atoms[q].vertex:
                return (p, q)
    return None


def is_well_behaved(t):
    return (
        len(t.atoms) >= 2
        and not has_redex(t)
        and is_connected(t)
        and _same_vertex_split(t) is None
    )


# ---------------------------------------------------------------------------
# Power presentation


def power_presentation(u):
    """Rewrite u^m as s (v1^m ... vk^m) t with well-behaved or atomic vi.

    Iteratively peels matching first/last atoms of the same vertex group
    (u = a v b gives u^m = a (v.(ba))^m a^{-1}), then splits what is
    left into connected components.  The exact bounds |s|+|t|+sum|vi| <=
    3|u| (geodesic norms) and k <= alpha are asserted on every call.
    """
    monoid = u.monoid
    input_norm = u.norm()
    cur = nf_R(u)
    s = monoid.empty_trace()
    t = monoid.empty_trace()
    while len(cur.atoms) >= 2:
        split = _same_vertex_split(cur)
        if split is None:
            break
        p, q = split
        a = cur.atoms[p]
        b = cur.atoms[q]
        middle = cur.subtrace(set(range(len(cur.atoms))) - {p, q})
        c = monoid.atom_mul(b, a)
        s = nf_R(s * monoid.canon([a]))
        t = nf_R(monoid.canon([monoid.atom_inv(a)]) * t)
        if c is None:
            cur = nf_R(middle)
        else:
            cur = nf_R(middle * monoid.canon([c]))
    parts = connected_components(cur)
    for part in parts:
        assert len(part.atoms) == 1 or is_well_behaved(part), (
            "power presentation produced a bad factor"
        )
    alpha = monoid.alpha()
    assert len(parts) <= max(alpha, 1), "more factors than the clique bound"
    total = s.norm() + t.norm() + sum(p.norm() for p in parts)
    assert total <= 3 * input_norm, (
        f"power presentation norm bound violated: {total} > 3*{input_norm}"
    )
    return s, parts, t


# ---------------------------------------------------------------------------
# Levi decompositions


def levi_decompositions(t, m, n, cap=LEVI_CAP):
    """All m x n grids {w_ij} with row product t and Levi independence.

    Enumerates assignments of positions to cells; exponential, guarded
    by a budget, meant for small traces and tests.
    """
    size = len(t.atoms)
    cells = m * n
    if cells**size > cap:
        raise BudgetExceededError("Levi grid enumeration", cap)
    seen = set()
    out = []
    for assignment in itertools.product(range(cells), repeat=size):
        grid = [[[] for _ in range(n)] for _ in range(m)]
        for pos, cell in enumerate(assignment):
            grid[cell // n][cell % n].append(pos)
        traces = [
            [t.subtrace(grid[i][j]) for j in range(n)] for i in range(m)
        ]
        key = tuple(tuple(w.atoms for w in row) for row in traces)
        if key in seen:
            continue
        ok = True
        # independence: w_ij commutes with w_kl for i < k, j > l
        for i, k in itertools.combinations(range(m), 2):
            for j in range(n):
                for l in range(j):
                    if not _independent_traces(traces[i][j], traces[k][l]):
                        ok = False
        if not ok:
            continue
        rows = t.monoid.empty_trace()
        for i in range(m):
            for j in range(n):
                rows = rows * traces[i][j]
        if rows != t:
            continue
        cols = t.monoid.empty_trace()
        for j in range(n):
            for i in range(m):
                cols = cols * traces[i][j]
        if cols != t:
            continue
        seen.add(key)
        out.append(traces)
    return out


def _independent_traces(t1, t2):
    return all(
        t1.monoid.independent(v1, v2)
        for v1 in t1.alph_gamma()
        for v2 in t2.alph_gamma()
    )
