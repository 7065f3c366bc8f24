"""Finite extensions via coset-pushing tables.

A finite extension H of a group G is described by coset representatives
C (containing 1) and a total rewriting table (c, a) -> (w, d) with
c a = w d in H, where w is a word over G's generators and d in C.  Any
prefix of a word over H's generators then normalizes to (G-word, coset),
which decides the word problem whenever G's is decidable.

Exponent equations reduce to G: the coset sequence under powers of a
period u follows the orbit of the map f(c) = "coset of c u", which is
eventually periodic with entry and period at most l = |C|.  Guessing,
per factor, either a concrete exponent below l or the orbit residue r
turns e = 1 into an exponent equation over G; the exponent change
sigma(x) = k x' + (l + r) maps G's solution set back through an affine
substitution.
"""

from .errors import InputError
from .expr import ExponentExpression, knapsackify
from .groups import GroupBackend, solve_exponent
from .semilinear import LinearSet, SemilinearSet
from .words import invert_letter

#: name of the identity coset representative
IDENTITY_COSET = "1"


class FiniteExtBackend(GroupBackend):
    """Finite extension of a subgroup backend by a coset-pushing table.

    cosets is a list of representative names containing "1"; rules is an
    iterable of (c, a, w, d) rows covering every pair of a coset and a
    generator of the extension.
    """

    def __init__(self, subgroup, cosets, rules):
        self.subgroup = subgroup
        self.cosets = tuple(cosets)
        if IDENTITY_COSET not in self.cosets:
            raise InputError('cosets must contain the identity coset "1"')
        if len(set(self.cosets)) != len(self.cosets):
            raise InputError("duplicate coset representative")
        coset_letters = set()
        for c in self.cosets:
            if c == IDENTITY_COSET:
                continue
            coset_letters.add(c)
            coset_letters.add(invert_letter(c))
        self.alphabet = frozenset(subgroup.alphabet) | coset_letters
        self.rules = {}
        rows = [
            (r["c"], r["a"], r["w"], r["d"]) if isinstance(r, dict) else r
            for r in rules
        ]
        for c, a, w, d in rows:
            if c not in self.cosets or d not in self.cosets:
                raise InputError(f"rule references unknown coset {c!r} or {d!r}")
            if a not in self.alphabet:
                raise InputError(f"rule letter {a!r} not in extension alphabet")
            w = tuple(w)
            for letter in w:
                if letter not in subgroup.alphabet:
                    raise InputError(
                        f"rewritten word letter {letter!r} not in subgroup"
                    )
            if (c, a) in self.rules:
                raise InputError(f"duplicate rule for {(c, a)!r}")
            self.rules[(c, a)] = (w, d)
        for c in self.cosets:
            for a in sorted(self.alphabet):
                if (c, a) not in self.rules:
                    raise InputError(f"rewriting table misses {(c, a)!r}")
        for a in subgroup.alphabet:
            _w, d = self.rules[(IDENTITY_COSET, a)]
            if d != IDENTITY_COSET:
                raise InputError("subgroup letters must fix the identity coset")

    def push(self, coset, word):
        """(g, d) with coset * word = g * d in H and g over G's generators."""
        out = []
        for a in word:
            w, coset = self.rules[(coset, a)]
            out.extend(w)
        return tuple(out), coset

    def word_problem(self, word):
        return fe_word_problem(self, word)

    def norm(self, word):
        return len(tuple(word))

    def solve_knapsack(self, e):
        return solve_exponent_finite_ext(self, e)


def _backend(desc):
    if isinstance(desc, FiniteExtBackend):
        return desc
    from .groups import build_backend

    backend = build_backend(desc)
    if not isinstance(backend, FiniteExtBackend):
        raise InputError("expected a finite-extension description")
    return backend


def fe_word_problem(desc, word):
    """w = 1 in H: the pushed G-word is 1 in G and the final coset is 1."""
    backend = _backend(desc)
    backend.check_word(word)
    g, coset = backend.push(IDENTITY_COSET, word)
    return coset == IDENTITY_COSET and backend.subgroup.word_problem(g)


class CosetOrbit:
    """Orbit of d under f(c) = coset of c u; eventually periodic.

    values lists f^0(d), ..., f^{2l-1}(d) with l = |C|; the orbit enters
    its cycle within l steps, so entry = f^l(d) lies on the cycle and k
    is the cycle length.
    """

    def __init__(self, values, l, k):
        self.values = tuple(values)
        self.l = l
        self.k = k
        self.entry = self.values[l]

    def value_at(self, z):
        if z < self.l:
            return self.values[z]
        return self.values[self.l + (z - self.l) % self.k]

    def residues(self, target):
        """All r in [0, k) with f^{l+r}(d) = target; empty means bad guess."""
        return [r for r in range(self.k) if self.values[self.l + r] == target]


def coset_orbit(desc, d, u):
    """Iterate the coset map of u from d until one full cycle past l."""
    backend = _backend(desc)
    if d not in backend.cosets:
        raise InputError(f"unknown coset {d!r}")
    backend.check_word(u)
    l = len(backend.cosets)
    values = [d]
    for _ in range(2 * l):
        _g, d = backend.push(values[-1], u)
        values.append(d)
    k = next(k for k in range(1, l + 1) if values[l + k] == values[l])
    return CosetOrbit(values[: 2 * l], l, k)


class _Branch:
    """Partial rewriting of the equation into the subgroup."""

    __slots__ = ("coset", "leading", "factors_g", "points", "substitutions")

    def __init__(self, coset, leading, factors_g, points, substitutions):
        self.coset = coset
        self.leading = leading
        self.factors_g = factors_g
        self.points = points
        self.substitutions = substitutions

    def emit_const(self, word):
        if self.factors_g:
            p0, v0, t0 = self.factors_g[-1]
            self.factors_g[-1] = (p0, v0, t0 + tuple(word))
        else:
            self.leading = self.leading + tuple(word)

    def child(self):
        return _Branch(
            self.coset, self.leading, list(self.factors_g),
            dict(self.points), dict(self.substitutions),
        )


def solve_exponent_finite_ext(desc, e, diagnostics=None):
    """Solution set of e = 1 over the finite extension described by desc.

    Per factor, either the exponent takes a concrete value below l or it
    equals l + r + k x' for the orbit residue r and cycle length k; each
    guess combination rewrites e into an exponent equation over the
    subgroup whose solutions map back through affine_substitute.
    """
    backend = _backend(desc)
    e_prime, K = knapsackify(e)
    stats = diagnostics if diagnostics is not None else {}
    stats.setdefault("branches", 0)
    stats.setdefault("pruned", 0)

    sub = backend.subgroup
    l = len(backend.cosets)
    names = e_prime.variables
    for period, _var, tail in e_prime.factors:
        backend.check_word(period)
        backend.check_word(tail)

    branches = [_Branch(IDENTITY_COSET, (), [], {}, {})]
    for period, var, tail in e_prime.factors:
        period = tuple(period)
        tail = tuple(tail)
        nxt = []
        for branch in branches:
            for j in range(l):
                child = branch.child()
                g, child.coset = backend.push(
                    child.coset, period * j + tail
                )
                child.emit_const(g)
                child.points[var] = j
                nxt.append(child)
            orbit = coset_orbit(backend, branch.coset, period)
            entry = orbit.entry
            g_enter, c_enter = backend.push(branch.coset, period * orbit.l)
            assert c_enter == entry, "orbit entry certification failed"
            g_cycle, c_cycle = backend.push(entry, period * orbit.k)
            assert c_cycle == entry, "orbit cycle certification failed"
            for r in range(orbit.k):
                child = branch.child()
                child.emit_const(g_enter)
                g_res, child.coset = backend.push(entry, period * r + tail)
                child.factors_g.append((g_cycle, var, g_res))
                child.substitutions[var] = (orbit.k, orbit.l + r)
                nxt.append(child)
        branches = nxt

    total = SemilinearSet.empty(names)
    for branch in branches:
        stats["branches"] += 1
        if branch.coset != IDENTITY_COSET:
            stats["pruned"] += 1
            continue
        solved = _branch_solutions(sub, names, branch)
        if solved is None:
            stats["pruned"] += 1
            continue
        total = total.union(solved)

    result = total.intersect(K).restrict(e.variables)
    return result._aligned_to(e.variables)


def _branch_solutions(sub, names, branch):
    """SemilinearSet over all equation variables for one guess, or None."""
    # a factor whose cycle word is syntactically empty puts no subgroup
    # constraint on its variable; fold its tail into the neighbours
    kept = []
    lead = tuple(branch.leading)
    free = []
    for p, var, t in branch.factors_g:
        if p:
            kept.append([p, var, t])
        elif kept:
            free.append(var)
            kept[-1][2] = kept[-1][2] + t
        else:
            free.append(var)
            lead = lead + t

    pieces = []
    if kept:
        # conjugating the leading constant to the end preserves e = 1
        if lead:
            kept[-1][2] = kept[-1][2] + lead
        sols = solve_exponent(
            sub, ExponentExpression([tuple(f) for f in kept])
        )
        if sols.is_empty_representation():
            return None
        coeffs = {v: branch.substitutions[v][0] for v in sols.vars}
        offsets = {v: branch.substitutions[v][1] for v in sols.vars}
        pieces.append(sols.affine_substitute(coeffs, offsets))
    elif not sub.word_problem(lead):
        return None
    for var in free:
        k, off = branch.substitutions[var]
        pieces.append(SemilinearSet((var,), [LinearSet((off,), [(k,)])]))
    for var, j in sorted(branch.points.items()):
        pieces.append(SemilinearSet.point((var,), (j,)))
    out = None
    for piece in pieces:
        out = piece if out is None else out.direct_sum(piece)
    assert out is not None and set(out.vars) == set(names)
    return out._aligned_to(names)
