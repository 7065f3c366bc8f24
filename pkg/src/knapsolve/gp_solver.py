"""Exponent equations over graph products of groups.

A graph product is built from vertex groups and an independence graph:
generators of adjacent vertex groups commute.  Elements are irreducible
traces over group-element atoms (module trace).  Solving e = 1 walks a
guess tree:

  1. rewrite every period into atomic or well-behaved parts and rename
     repeated variables apart (preprocess);
  2. guess which atomic powers evaluate to the identity;
  3. search for reductions of the remaining factor tuple: constants may
     split at downsets, symbolic powers split into alphabet-tagged
     factors, adjacent same-vertex atoms merge or discharge into local
     vertex-group constraints, mutually inverse factors cancel;
  4. turn each surviving symbolic factor into a shape p u^x s via the
     power-factorization grids, resolve matched factor pairs with the
     exact two-dimensional trace solver, and assemble a semilinear set
     per guess;
  5. union over all guesses, intersect the variable-equality constraint
     and project back to the input variables.

The tuple of factors is treated modulo commutation of independent
entries, so the search never enumerates swap sequences explicitly; two
entries interact when nothing lies strictly between them in the
dependence order of the tuple.
"""

import itertools

from .errors import BudgetExceededError, InputError
from .groups import GroupBackend, build_backend
from .semilinear import LinearSet, SemilinearSet
from .trace import (
    Atom,
    TraceMonoid,
    is_connected,
    is_well_behaved,
    nf_R,
    power_presentation,
    project_pair,
)
from .unary_automata import word_pair_power_solutions

SEARCH_STATES_CAP = 2_000_000
#: default limit on symbolic factors per power in the reduction search
FACTOR_CAP = 3


class GraphProductBackend(GroupBackend):
    """Graph product of vertex group backends over an independence graph."""

    def __init__(self, children, edges):
        self.monoid = TraceMonoid(children, edges)
        self.alphabet = self.monoid.alphabet

    def trace(self, word):
        self.check_word(word)
        return nf_R(self.monoid.trace_from_word(word))

    def word_problem(self, word):
        return not self.trace(word).atoms

    def norm(self, word):
        return self.trace(word).norm()

    def canonical_word(self, word):
        return self.trace(word).to_word()

    def solve_knapsack(self, e):
        return solve_exponent_graph_product(self, e)


# ---------------------------------------------------------------------------
# Preprocessing


class PreparedKnapsack:
    """Period/constant structure with atomic or well-behaved periods.

    powers[i] = (trace, occurrence variable); tails[0] is the leading
    constant (empty once folded into the last tail by conjugation) and
    tails[i+1] follows powers[i].  occ_vars lists every occurrence
    variable in order; free_occs are occurrences whose period is the
    identity.
    """

    def __init__(self, monoid, powers, tails, occ_vars, free_occs):
        self.monoid = monoid
        self.powers = powers
        self.tails = tails
        self.occ_vars = occ_vars
        self.free_occs = free_occs


def preprocess(backend, e):
    """Rewrite e so that every period is atomic or well-behaved.

    Returns (prep, K) with sol(e) = (K cap sol(prep)) restricted to the
    variables of e; K has magnitude one and ties renamed occurrences of
    the same variable together.
    """
    monoid = backend.monoid
    for period, _var, tail in e.factors:
        backend.check_word(period)
        backend.check_word(tail)

    used = set(e.variables)
    counters = {}
    occ_vars = []
    occ_groups = {}

    def occurrence(var):
        if var not in counters:
            counters[var] = 1
            name = var
        else:
            counters[var] += 1
            name = f"{var}_{counters[var]}"
            while name in used:
                counters[var] += 1
                name = f"{var}_{counters[var]}"
        used.add(name)
        occ_vars.append(name)
        occ_groups.setdefault(var, []).append(name)
        return name

    base_norm = 0
    powers = []
    free_occs = []
    tails = [monoid.empty_trace()]
    for period, var, tail in e.factors:
        u = nf_R(monoid.trace_from_word(period))
        v = nf_R(monoid.trace_from_word(tail))
        base_norm += u.norm() + v.norm()
        if not u.atoms:
            free_occs.append(occurrence(var))
            tails[-1] = nf_R(tails[-1] * v)
            continue
        s, parts, t = power_presentation(u)
        tails[-1] = nf_R(tails[-1] * s)
        for part in parts:
            powers.append((part, occurrence(var)))
            tails.append(monoid.empty_trace())
        tails[-1] = nf_R(t * v)
    if powers and tails[0].atoms:
        # a leading constant conjugates away: w e' = 1 iff e' w = 1
        tails[-1] = nf_R(tails[-1] * tails[0])
        tails[0] = monoid.empty_trace()

    total_norm = sum(t.norm() for t in tails) + sum(u.norm() for u, _ in powers)
    assert total_norm <= 3 * base_norm, "preprocessing norm bound violated"
    nontrivial = sum(1 for p, _v, _t in e.factors if nf_R(monoid.trace_from_word(p)).atoms)
    assert len(powers) <= max(monoid.alpha(), 1) * nontrivial, (
        "preprocessing degree bound violated"
    )

    zero = tuple(0 for _ in occ_vars)
    periods = []
    for var in e.variables:
        group = occ_groups.get(var)
        if not group:
            continue
        members = set(group)
        periods.append(tuple(1 if name in members else 0 for name in occ_vars))
    K = SemilinearSet(tuple(occ_vars), [LinearSet(zero, periods)])
    assert K.magnitude() <= 1
    prep = PreparedKnapsack(monoid, powers, tails, tuple(occ_vars), free_occs)
    return prep, K


# ---------------------------------------------------------------------------
# Reduction search over factor tuples
#
# Items (all hashable):
#   ("C", trace)                 concrete irreducible trace
#   ("A", vertex, entries)       symbolic same-vertex atom product;
#                                entries are ("e", elem) or ("p", i, elem)
#                                with i an atomic power index
#   ("F", i, fid, alph)          symbolic factor of power i with guessed
#                                vertex alphabet alph
#   ("W", i)                     an untouched well-behaved power u_i^{x_i}


class ReductionSearch:
    """Enumerates reductions of refinements of an item tuple.

    powers maps well-behaved power indices to their period traces.
    Emits (records, orders): records is a frozenset of constraints
    ("zero", i), ("ident", vertex, entries), ("assign", fid, i, alph,
    value-atoms) and ("pair", fidL, iL, alphL, fidR, iR, alphR); orders
    maps each power index to its factor id sequence.
    """

    def __init__(self, monoid, powers, splits_cap, creation_cap,
                 states_cap=SEARCH_STATES_CAP, factor_cap=FACTOR_CAP):
        self.monoid = monoid
        self.powers = powers
        self.power_alphs = {i: u.alph_gamma() for i, u in powers.items()}
        self.power_atoms = {
            i: tuple(sorted(set(u.atoms), key=monoid.atom_key))
            for i, u in powers.items()
        }
        self.splits_cap = splits_cap
        self.factor_cap = factor_cap
        self.creation_cap = creation_cap
        self.states_cap = states_cap
        self.states = 0
        self.seen = {}
        self.results = {}
        self._indep = {}

    # -- item helpers --------------------------------------------------

    def item_alph(self, item):
        tag = item[0]
        if tag == "C":
            return item[1].alph_gamma()
        if tag == "A":
            return frozenset((item[1],))
        if tag == "F":
            return item[3]
        return self.power_alphs[item[1]]

    def item_key(self, item):
        tag = item[0]
        if tag == "C":
            return (0, tuple(self.monoid.atom_key(a) for a in item[1].atoms))
        if tag == "A":
            child = self.monoid.vertices[item[1]]
            entries = tuple(
                ("e", child.elem_sort_key(e[1])) if e[0] == "e"
                else ("p", e[1], child.elem_sort_key(e[2]))
                for e in item[2]
            )
            return (1, item[1], entries)
        if tag == "F":
            return (2, item[1], item[2], tuple(sorted(item[3])))
        return (3, item[1])

    def independent_items(self, a, b):
        key = (a, b)
        hit = self._indep.get(key)
        if hit is None:
            alph_a = self.item_alph(a)
            alph_b = self.item_alph(b)
            hit = all(
                self.monoid.independent(v, w)
                for v in alph_a
                for w in alph_b
            )
            self._indep[key] = hit
        return hit

    def canon_items(self, items):
        """Normal form of the tuple modulo commutation of independents."""
        items = list(items)
        n = len(items)
        below = [set() for _ in range(n)]
        for j in range(n):
            for i in range(j - 1, -1, -1):
                if i in below[j]:
                    continue
                if not self.independent_items(items[i], items[j]):
                    below[j].add(i)
                    below[j] |= below[i]
        remaining = set(range(n))
        out = []
        while remaining:
            available = [
                i for i in remaining if not (below[i] & remaining)
            ]
            pick = min(available, key=lambda i: (self.item_key(items[i]), i))
            out.append(items[pick])
            remaining.discard(pick)
        return tuple(out)

    def interaction_pairs(self, items):
        """Index pairs that commutation can make adjacent (left, right)."""
        n = len(items)
        below = [set() for _ in range(n)]
        for j in range(n):
            for i in range(j - 1, -1, -1):
                if i in below[j]:
                    continue
                if not self.independent_items(items[i], items[j]):
                    below[j].add(i)
                    below[j] |= below[i]
        pairs = []
        for i in range(n):
            for j in range(i + 1, n):
                blocked = any(
                    i in below[r] and r in below[j]
                    for r in range(n)
                    if r != i and r != j
                )
                if not blocked:
                    pairs.append((i, j))
        return pairs

    def atom_entries(self, item):
        if item[0] == "A":
            return item[1], item[2]
        if item[0] == "C" and len(item[1].atoms) == 1:
            atom = item[1].atoms[0]
            return atom.vertex, (("e", atom.elem),)
        return None

    # -- search --------------------------------------------------------

    def run(self, items):
        items = self.canon_items(items)
        orders = tuple(
            (i, ()) for i in sorted(self.powers) if any(
                it[0] == "W" and it[1] == i for it in items
            )
        )
        self._dfs(items, dict(orders), frozenset(), 0, {})
        return self.results

    def canon_fids(self, items, orders, records):
        """Renumber factor ids by position so isomorphic states collapse."""
        mapping = {}
        for i in sorted(orders):
            for fid in orders[i]:
                mapping[fid] = len(mapping)
        if all(old == new for old, new in mapping.items()):
            return items, orders, records
        new_items = tuple(
            ("F", it[1], mapping[it[2]], it[3]) if it[0] == "F" else it
            for it in items
        )
        new_orders = {
            i: tuple(mapping[f] for f in fids) for i, fids in orders.items()
        }
        new_records = frozenset(
            ("assign", mapping[r[1]], r[2], r[3], r[4]) if r[0] == "assign"
            else ("pair", mapping[r[1]], r[2], r[3], mapping[r[4]], r[5], r[6])
            if r[0] == "pair" else r
            for r in records
        )
        return new_items, new_orders, new_records

    def _emit(self, records, orders):
        key = frozenset(records)
        if key not in self.results:
            self.results[key] = dict(orders)

    def _dfs(self, items, orders, records, splits, creations):
        key = (items, tuple(sorted(orders.items())), records)
        spent = (splits, tuple(sorted(creations.items())))
        prior = self.seen.setdefault(key, [])
        for old_splits, old_creations in prior:
            old = dict(old_creations)
            if old_splits <= splits and all(
                old.get(v, 0) <= n for v, n in creations.items()
            ):
                return
        prior.append(spent)
        self.states += 1
        if self.states > self.states_cap:
            raise BudgetExceededError("reduction search states", self.states_cap)
        if not items:
            self._emit(records, orders)
            return
        monoid = self.monoid
        n = len(items)

        def recurse(new_items, new_orders, new_records, new_splits, new_creations):
            new_items, new_orders, new_records = self.canon_fids(
                self.canon_items(new_items), new_orders, new_records
            )
            self._dfs(
                new_items,
                new_orders,
                new_records,
                new_splits,
                new_creations,
            )

        # unary moves
        for pos in range(n):
            item = items[pos]
            rest = items[:pos] + items[pos + 1:]
            tag = item[0]
            if tag == "W":
                i = item[1]
                recurse(rest, orders, records | {("zero", i)}, splits, creations)
                fid = self._fresh_fid(orders)
                new_orders = dict(orders)
                new_orders[i] = (fid,)
                factor = ("F", i, fid, self.power_alphs[i])
                recurse(
                    items[:pos] + (factor,) + items[pos + 1:],
                    new_orders, records, splits, creations,
                )
            elif tag == "C" and len(item[1].atoms) > 1:
                if splits + 1 > self.splits_cap:
                    continue
                trace = item[1]
                all_pos = set(range(len(trace.atoms)))
                for down in trace.downsets():
                    if not down or down == all_pos:
                        continue
                    left = trace.subtrace(down)
                    right = trace.subtrace(all_pos - down)
                    recurse(
                        items[:pos] + (("C", left), ("C", right)) + items[pos + 1:],
                        orders, records, splits + 1, creations,
                    )
            elif tag == "F":
                i, fid, alph = item[1], item[2], item[3]
                # guess that this factor is a single atom of u_i
                if len(alph) == 1:
                    vertex = next(iter(alph))
                    for atom in self.power_atoms[i]:
                        if atom.vertex != vertex:
                            continue
                        value = monoid.canon([atom])
                        rec = ("assign", fid, i, alph, value.atoms)
                        recurse(
                            items[:pos] + (("C", value),) + items[pos + 1:],
                            orders, records | {rec}, splits, creations,
                        )
                # split into two alphabet-tagged factors
                if (splits + 1 <= self.splits_cap
                        and len(orders[i]) < self.factor_cap):
                    sub = sorted(alph)
                    fid1 = self._fresh_fid(orders)
                    fid2 = fid1 + 1
                    new_orders = dict(orders)
                    seq = list(new_orders[i])
                    at = seq.index(fid)
                    new_orders[i] = tuple(seq[:at] + [fid1, fid2] + seq[at + 1:])
                    for r1 in range(1, len(sub) + 1):
                        for a1 in itertools.combinations(sub, r1):
                            s1 = frozenset(a1)
                            need = alph - s1
                            for r2 in range(1, len(sub) + 1):
                                for a2 in itertools.combinations(sub, r2):
                                    s2 = frozenset(a2)
                                    if not need <= s2:
                                        continue
                                    f1 = ("F", i, fid1, s1)
                                    f2 = ("F", i, fid2, s2)
                                    recurse(
                                        items[:pos] + (f1, f2) + items[pos + 1:],
                                        new_orders, records, splits + 1, creations,
                                    )

        # binary moves between entries that commutation can make adjacent
        if not monoid.edges:
            usable = [(i, i + 1) for i in range(n - 1)]
        else:
            usable = self.interaction_pairs(items)
        for i, j in usable:
            left, right = items[i], items[j]
            rest = tuple(
                it for pos, it in enumerate(items) if pos != i and pos != j
            )

            def consumed(extra_records, new_creations=creations):
                recurse(rest, orders, records | extra_records, splits, new_creations)

            if left[0] == "C" and right[0] == "C":
                if right[1] == left[1].inv():
                    consumed(set())
            if left[0] == "C" and right[0] == "F":
                value = left[1].inv()
                if value.alph_gamma() == right[3]:
                    rec = ("assign", right[2], right[1], right[3], value.atoms)
                    consumed({rec})
            if left[0] == "F" and right[0] == "C":
                value = right[1].inv()
                if value.alph_gamma() == left[3]:
                    rec = ("assign", left[2], left[1], left[3], value.atoms)
                    consumed({rec})
            if left[0] == "F" and right[0] == "F" and left[3] == right[3]:
                rec = (
                    "pair",
                    left[2], left[1], left[3],
                    right[2], right[1], right[3],
                )
                consumed({rec})

            ea = self.atom_entries(left)
            eb = self.atom_entries(right)
            if ea and eb and ea[0] == eb[0]:
                vertex = ea[0]
                entries = ea[1] + eb[1]
                concrete = all(entry[0] == "e" for entry in entries)
                if concrete:
                    child = monoid.vertices[vertex]
                    prod = child.identity_elem
                    for entry in entries:
                        prod = child.elem_mul(prod, entry[1])
                    if prod == child.identity_elem:
                        consumed(set())  # cancellation
                    elif creations.get(vertex, 0) < self.creation_cap:
                        new_creations = dict(creations)
                        new_creations[vertex] = new_creations.get(vertex, 0) + 1
                        merged = ("C", monoid.canon([Atom(vertex, prod)]))
                        recurse(
                            rest[:i] + (merged,) + rest[i:],
                            orders, records, splits, new_creations,
                        )
                else:
                    consumed({("ident", vertex, entries)})
                    if creations.get(vertex, 0) < self.creation_cap:
                        new_creations = dict(creations)
                        new_creations[vertex] = new_creations.get(vertex, 0) + 1
                        merged = ("A", vertex, entries)
                        recurse(
                            rest[:i] + (merged,) + rest[i:],
                            orders, records, splits, new_creations,
                        )

    @staticmethod
    def _fresh_fid(orders):
        top = -1
        for fids in orders.values():
            for fid in fids:
                top = max(top, fid)
        return top + 1


def enumerate_refinement_reductions(monoid, items, powers=None,
                                    pieces_budget=None, creation_budget=None,
                                    states_budget=SEARCH_STATES_CAP):
    """All reductions of refinements of the item tuple, within budgets.

    Defaults follow the completeness bounds for a tuple of m entries:
    refinements of length at most (3 alpha + 4) m^2 (for free products
    at most max(m, 7m - 12)) and at most m - 2 atom creations per
    vertex.  Returns {records: orders}.
    """
    powers = powers or {}
    m = len(items)
    cap = _max_splits(monoid, m)
    if pieces_budget is not None:
        cap = min(cap, max(0, pieces_budget - m))
    creation_cap = max(0, m - 2)
    if creation_budget is not None:
        creation_cap = min(creation_cap, creation_budget)
    search = ReductionSearch(monoid, powers, cap, creation_cap, states_budget)
    results = search.run(tuple(items))
    # every emitted script stayed within the stated bounds by construction
    assert search.states <= states_budget
    return results


# ---------------------------------------------------------------------------
# Power factorization grids


_FACTORIZATION_CACHE = {}
_GRID_CACHE = {}


def _ordered_factorizations(t, parts):
    """All tuples (w_1, ..., w_parts) with w_1 ... w_parts = t."""
    key = (id(t.monoid), t.atoms, parts)
    cached = _FACTORIZATION_CACHE.get(key)
    if cached is not None:
        return cached
    if parts == 1:
        out = [(t,)]
    else:
        out = []
        all_pos = set(range(len(t.atoms)))
        for down in t.downsets():
            first = t.subtrace(down)
            rest = t.subtrace(all_pos - down)
            for tail in _ordered_factorizations(rest, parts - 1):
                out.append((first,) + tail)
    _FACTORIZATION_CACHE[key] = out
    return out


def simplify_power_factorization(u, m):
    """Shape guesses for u^x = y_1 ... y_m with u connected nonempty.

    Yields (c, forms) where forms[j] (1-based position) is either
    ("power", p, s) meaning y_j = p u^{x_j} s with x_j >= 1, or
    ("concrete", w) meaning y_j = w, and x = c + sum of the x_j.
    """
    assert u.atoms and is_connected(u)
    assert m >= 1
    key = (id(u.monoid), u.atoms, m)
    cached = _GRID_CACHE.get(key)
    if cached is not None:
        return cached
    monoid = u.monoid
    empty = monoid.empty_trace()
    out = []
    if m == 1:
        out.append((0, (("power", empty, empty),)))
        _GRID_CACHE[key] = out
        return out
    gamma = len(monoid.vertices)
    # per column j < m: constant c_j and a factorization
    # s_j p_{j+1,j} ... p_{m,j} = u^{c_j}
    col_options = []
    for j in range(1, m):
        opts = []
        for c in range(gamma + 1):
            power = u.pow(c)
            for parts in _ordered_factorizations(power, m - j + 1):
                opts.append((c, parts[0], parts[1:]))
        col_options.append(opts)
    seen = set()
    for combo in itertools.product(*col_options):
        s = {j: combo[j - 1][1] for j in range(1, m)}
        s[m] = empty
        p = {}
        for j in range(1, m):
            for offset, piece in enumerate(combo[j - 1][2]):
                p[(j + 1 + offset, j)] = piece
        # independence of grid cells
        ok = True
        for (i1, j1), piece1 in p.items():
            if not ok:
                break
            for (i2, j2), piece2 in p.items():
                if j1 < j2 < i2 < i1 and not _independent(piece1, piece2):
                    ok = False
                    break
        if not ok:
            continue
        c_total = sum(combo[j - 1][0] for j in range(1, m))
        for bits in itertools.product((False, True), repeat=m):
            K = {j + 1 for j in range(m) if bits[j]}
            good = True
            for (i1, j1), piece in p.items():
                for k in range(j1 + 1, i1):
                    if k in K:
                        if piece.atoms:
                            good = False
                            break
                    elif not _independent(piece, s[k]):
                        good = False
                        break
                if not good:
                    break
            if not good:
                continue
            forms = []
            for j in range(1, m + 1):
                prefix = empty
                for l in range(1, j):
                    prefix = prefix * p[(j, l)]
                if j in K:
                    forms.append(("power", prefix, s[j]))
                else:
                    w = prefix * s[j]
                    if not w.atoms:
                        good = False
                        break
                    forms.append(("concrete", w))
            if not good:
                continue
            entry = (c_total, tuple(forms))
            sig = (c_total, tuple(
                (f[0], f[1].atoms, f[2].atoms) if f[0] == "power"
                else (f[0], f[1].atoms)
                for f in forms
            ))
            if sig not in seen:
                seen.add(sig)
                out.append(entry)
    _GRID_CACHE[key] = out
    return out


def _independent(t1, t2):
    monoid = t1.monoid
    return all(
        monoid.independent(v, w)
        for v in t1.alph_gamma()
        for w in t2.alph_gamma()
    )


# ---------------------------------------------------------------------------
# Two-dimensional trace knapsack


_TWO_DIM_CACHE = {}


def two_dim_trace_solve(p, u, s, q, v, t):
    """All (x, y) with p u^x s = q v^y t, as a list of lines (a,b,c,d).

    Each line stands for {(a + b z, c + d z) | z in N}.  Every trace
    equation is checked through its projections onto the dependent
    vertex pairs; each projection is a word equation handled by the
    unary automata pipeline; the projection constraints are intersected
    as semilinear sets.
    """
    monoid = u.monoid
    if not u.atoms or not v.atoms:
        raise InputError("two_dim_trace_solve needs nonempty periods")
    key = (
        id(monoid),
        p.atoms, u.atoms, s.atoms, q.atoms, v.atoms, t.atoms,
    )
    cached = _TWO_DIM_CACHE.get(key)
    if cached is not None:
        return cached
    result = _two_dim_trace_solve(p, u, s, q, v, t)
    _TWO_DIM_CACHE[key] = result
    return result


def _two_dim_trace_solve(p, u, s, q, v, t):
    monoid = u.monoid
    assert is_connected(u) and is_connected(v)
    names = ("x", "y")
    constraint = None
    for i, j in monoid.dependent_vertex_pairs():
        pu = project_pair(u, i, j)
        pv = project_pair(v, i, j)
        pp = project_pair(p, i, j)
        ps = project_pair(s, i, j)
        pq = project_pair(q, i, j)
        pt = project_pair(t, i, j)
        if not pu and not pv:
            if pp + ps == pq + pt:
                continue
            return []
        if pu and pv:
            lines = word_pair_power_solutions(pp, pu, ps, pq, pv, pt)
            comps = [
                LinearSet((a, c), [] if (b, d) == (0, 0) else [(b, d)])
                for a, b, c, d in lines
            ]
            local = SemilinearSet(names, comps)
        elif pu:
            # y plays no role in this projection; x has one candidate
            target = pq + pt
            slack = len(target) - len(pp) - len(ps)
            if slack < 0 or slack % len(pu):
                return []
            x0 = slack // len(pu)
            if pp + pu * x0 + ps != target:
                return []
            local = SemilinearSet(names, [LinearSet((x0, 0), [(0, 1)])])
        else:
            target = pp + ps
            slack = len(target) - len(pq) - len(pt)
            if slack < 0 or slack % len(pv):
                return []
            y0 = slack // len(pv)
            if pq + pv * y0 + pt != target:
                return []
            local = SemilinearSet(names, [LinearSet((0, y0), [(1, 0)])])
        constraint = local if constraint is None else constraint.intersect(local)
        if constraint.is_empty_representation():
            return []
    assert constraint is not None, "nonempty period with no projection"
    lines = set()
    for comp in constraint.components:
        assert len(comp.periods) <= 1, "projection intersection is not a line"
        b, d = comp.periods[0] if comp.periods else (0, 0)
        lines.add((comp.base[0], b, comp.base[1], d))
    return sorted(lines)


def _positive_lines(lines):
    """Restrict lines to x >= 1 and y >= 1 by shifting the parameter."""
    out = []
    for a, b, c, d in lines:
        for _ in range(2):
            if a == 0 or c == 0:
                if b == 0 and a == 0:
                    a = -1
                    break
                if d == 0 and c == 0:
                    a = -1
                    break
                a, c = a + b, c + d
        if a >= 1 and c >= 1:
            out.append((a, b, c, d))
    return sorted(set(out))


_CONCRETE_POWER_CACHE = {}


def _solve_concrete_power(prefix, u, suffix, target):
    """The unique x >= 1 with prefix u^x suffix = target, or None."""
    key = (id(u.monoid), prefix.atoms, u.atoms, suffix.atoms, target.atoms)
    if key in _CONCRETE_POWER_CACHE:
        return _CONCRETE_POWER_CACHE[key]
    slack = len(target.atoms) - len(prefix.atoms) - len(suffix.atoms)
    step = len(u.atoms)
    x = None
    if slack >= step and slack % step == 0:
        x = slack // step
        if prefix * u.pow(x) * suffix != target:
            x = None
    _CONCRETE_POWER_CACHE[key] = x
    return x


# ---------------------------------------------------------------------------
# The full solver


def solve_exponent_graph_product(desc, e, pieces_budget=None,
                                 creation_budget=None,
                                 states_budget=SEARCH_STATES_CAP,
                                 diagnostics=None):
    """Solution set of e = 1 over the graph product described by desc."""
    backend = desc if isinstance(desc, GraphProductBackend) else build_backend(desc)
    monoid = backend.monoid
    prep, K = preprocess(backend, e)
    occ_vars = prep.occ_vars
    stats = diagnostics if diagnostics is not None else {}
    stats.setdefault("branches", 0)
    stats.setdefault("reductions", 0)
    stats.setdefault("states", 0)
    stats.setdefault("complete", True)

    if not prep.powers:
        assert occ_vars, "an exponent expression always carries variables"
        constant_ok = not prep.tails[0].atoms
        sols = (SemilinearSet.universe(occ_vars) if constant_ok
                else SemilinearSet.empty(occ_vars))
        return sols.intersect(K).restrict(e.variables)._aligned_to(e.variables)

    indices = list(range(1, len(prep.powers) + 1))
    period = {i: prep.powers[i - 1][0] for i in indices}
    var_of = {i: prep.powers[i - 1][1] for i in indices}
    atomic = [i for i in indices if len(period[i].atoms) == 1]
    wb = {i: period[i] for i in indices if i not in atomic}
    for i in wb:
        assert is_well_behaved(wb[i]), "non-atomic period must be well-behaved"

    constrained = [name for name in occ_vars if name not in prep.free_occs]
    assert constrained, "every power contributes a constrained occurrence"
    total = SemilinearSet.empty(tuple(constrained))

    for n1_bits in itertools.product((False, True), repeat=len(atomic)):
        n1 = {atomic[k] for k in range(len(atomic)) if n1_bits[k]}
        stats["branches"] += 1
        n1_sets = []
        dead = False
        for i in sorted(n1):
            atom = period[i].atoms[0]
            child = monoid.vertices[atom.vertex]
            sols = child.solve_elem_knapsack(
                [("pow", atom.elem, var_of[i])], (var_of[i],)
            )
            if sols.is_empty_representation():
                dead = True
                break
            n1_sets.append(sols)
        if dead:
            continue

        items = []
        if prep.tails[0].atoms:
            items.append(("C", prep.tails[0]))
        for i in indices:
            if i in n1:
                pass
            elif i in wb:
                items.append(("W", i))
            else:
                atom = period[i].atoms[0]
                items.append(("A", atom.vertex, (("p", i, atom.elem),)))
            tail = prep.tails[i]
            if tail.atoms:
                items.append(("C", tail))

        if not items:
            total = total.union(_assemble_direct_sum(n1_sets, constrained))
            continue

        splits_cap = _splits_cap(monoid, len(items), pieces_budget)
        if splits_cap < _max_splits(monoid, len(items)):
            stats["complete"] = False
        search = ReductionSearch(
            monoid, wb,
            splits_cap,
            _creation_cap(len(items), creation_budget),
            states_budget,
        )
        results = search.run(tuple(items))
        stats["states"] += search.states
        stats["reductions"] += len(results)
        for records, orders in results.items():
            sets = _assemble_outcome(
                monoid, wb, var_of, records, orders, n1_sets, n1, stats
            )
            if sets is None:
                continue
            total = total.union(_assemble_direct_sum(sets, constrained))

    result = total
    for name in prep.free_occs:
        result = result.direct_sum(SemilinearSet.universe((name,)))
    result = result._aligned_to(occ_vars)
    result = result.intersect(K).restrict(e.variables)
    return result._aligned_to(e.variables)


def _max_splits(monoid, m):
    """Completeness ceiling on splits for an m-entry tuple."""
    pieces = (3 * monoid.alpha() + 4) * m * m
    if not monoid.edges:
        pieces = min(pieces, max(m, 7 * m - 12))
    return max(0, pieces - m)


def _splits_cap(monoid, m, budget):
    bound = _max_splits(monoid, m)
    if budget is not None:
        return min(bound, budget)
    # practical default; raise via the budget argument when needed
    return min(bound, 2 * m)


def _creation_cap(m, budget):
    cap = max(0, m - 2)
    if budget is not None:
        cap = min(cap, budget)
    return cap


def _assemble_direct_sum(sets, names):
    """Direct-sum disjoint-variable sets and align to the given order."""
    out = None
    for piece in sets:
        out = piece if out is None else out.direct_sum(piece)
    assert out is not None, "a branch always constrains some variable"
    missing = [n for n in names if n not in set(out.vars)]
    assert not missing, f"branch left variables unconstrained: {missing}"
    return out._aligned_to(tuple(names))


def _assemble_outcome(monoid, wb, var_of, records, orders, n1_sets, n1, stats):
    """Turn one reduction outcome into per-variable semilinear sets.

    Returns a list of SemilinearSets over disjoint variable groups, or
    None if the outcome is contradictory.
    """
    zero_powers = set()
    idents = []
    assigns = {}
    pairs = []
    for rec in records:
        if rec[0] == "zero":
            zero_powers.add(rec[1])
        elif rec[0] == "ident":
            idents.append((rec[1], rec[2]))
        elif rec[0] == "assign":
            assigns[rec[1]] = (rec[2], rec[3], monoid.trace(rec[4]))
        else:
            pairs.append(rec[1:])

    sets = list(n1_sets)
    for i in sorted(zero_powers):
        sets.append(SemilinearSet.point((var_of[i],), (0,)))

    for vertex, entries in idents:
        child = monoid.vertices[vertex]
        mapped = []
        names = []
        for entry in entries:
            if entry[0] == "e":
                mapped.append(("const", entry[1]))
            else:
                _kind, i, elem = entry
                assert i not in wb, "symbolic entries come from atomic powers"
                mapped.append(("pow", elem, var_of[i]))
                names.append(var_of[i])
        sols = child.solve_elem_knapsack(mapped, tuple(names))
        if sols.is_empty_representation():
            return None
        sets.append(sols)

    active = {i: fids for i, fids in orders.items() if fids}
    fid_alph = {}
    fid_power = {}
    for fid, (i, alph, _value) in assigns.items():
        fid_alph[fid] = alph
        fid_power[fid] = i
    for fid_l, i_l, alph_l, fid_r, i_r, alph_r in pairs:
        fid_alph[fid_l], fid_alph[fid_r] = alph_l, alph_r
        fid_power[fid_l], fid_power[fid_r] = i_l, i_r

    grids = {}
    for i, fids in active.items():
        u = wb[i]
        options = []
        for c_total, forms in simplify_power_factorization(u, len(fids)):
            by_fid = {}
            ok = True
            for fid, form in zip(fids, forms):
                alph = fid_alph[fid]
                if form[0] == "power":
                    if alph != u.alph_gamma():
                        ok = False
                        break
                else:
                    if form[1].alph_gamma() != alph:
                        ok = False
                        break
                by_fid[fid] = form
            if ok:
                options.append((c_total, by_fid))
        if not options:
            return None
        grids[i] = options

    # resolve assigned factors per power, leaving only paired ones open
    paired_fids = set()
    for fid_l, _il, _al, fid_r, _ir, _ar in pairs:
        paired_fids.add(fid_l)
        paired_fids.add(fid_r)
    reduced = {}
    for i, fids in active.items():
        opts = []
        seen = set()
        for c_total, by_fid in grids[i]:
            c = c_total
            ok = True
            open_forms = {}
            for fid in fids:
                form = by_fid[fid]
                if fid in assigns:
                    _i2, _alph, value = assigns[fid]
                    if form[0] == "concrete":
                        if form[1] != value:
                            ok = False
                            break
                    else:
                        x = _solve_concrete_power(form[1], wb[i], form[2], value)
                        if x is None:
                            ok = False
                            break
                        c += x
                else:
                    assert fid in paired_fids, "every factor id is consumed"
                    open_forms[fid] = form
            if not ok:
                continue
            sig = (c, tuple(sorted(
                (fid, _form_sig(form)) for fid, form in open_forms.items()
            )))
            if sig in seen:
                continue
            seen.add(sig)
            opts.append((c, open_forms))
        if not opts:
            return None
        reduced[i] = opts
    stats["grids"] = stats.get("grids", 0) + 1

    # pair records couple at most two powers at a time; solve the pair
    # relation per connected component of powers and direct-sum the rest
    parent = {i: i for i in active}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for _fl, i_l, _al, _fr, i_r, _ar in pairs:
        parent[find(i_l)] = find(i_r)
    groups = {}
    for i in sorted(active):
        groups.setdefault(find(i), []).append(i)

    for order in sorted(groups.values()):
        comp_pairs = [pr for pr in pairs if find(pr[1]) == find(order[0])]
        names = tuple(var_of[i] for i in order)
        components = _pair_component_solutions(wb, order, comp_pairs, reduced)
        group_set = SemilinearSet(names, components)
        if group_set.is_empty_representation():
            return None
        sets.append(group_set)
    return sets


_COMPONENT_CACHE = {}


def _pair_component_solutions(wb, order, comp_pairs, reduced):
    """LinearSets over a pair-connected group of powers (cached)."""
    fid_map = {}
    for i in order:
        _c0, first = reduced[i][0]
        for fid in sorted(first):
            fid_map[fid] = len(fid_map)
    key = (
        id(wb[order[0]].monoid),
        tuple(
            (wb[i], tuple(
                (c, tuple(sorted(
                    (fid_map[fid], _form_sig(f)) for fid, f in of.items()
                )))
                for c, of in reduced[i]
            ))
            for i in order
        ),
        tuple(sorted(
            (fid_map[fl], order.index(il), fid_map[fr], order.index(ir))
            for fl, il, _al, fr, ir, _ar in comp_pairs
        )),
    )
    cached = _COMPONENT_CACHE.get(key)
    if cached is not None:
        return cached
    # pair resolution only looks at the open forms, so group options by
    # form shape and expand the constant offsets afterwards
    grouped = []
    for i in order:
        by_forms = {}
        for c, of in reduced[i]:
            shape = tuple(sorted(of.items()))
            slot = by_forms.setdefault(shape, (of, []))
            slot[1].append(c)
        grouped.append(list(by_forms.values()))
    components = []
    for combo in itertools.product(*grouped):
        forms = {}
        for of, _cs in combo:
            forms.update(of)
        extra = {i: 0 for i in order}
        ok = True
        pair_lines = []
        for fid_l, i_l, _al, fid_r, i_r, _ar in comp_pairs:
            form_l, form_r = forms[fid_l], forms[fid_r]
            if form_l[0] == "concrete" and form_r[0] == "concrete":
                if form_r[1] != form_l[1].inv():
                    ok = False
                    break
            elif form_l[0] == "concrete":
                x = _solve_concrete_power(
                    form_r[1], wb[i_r], form_r[2], form_l[1].inv()
                )
                if x is None:
                    ok = False
                    break
                extra[i_r] += x
            elif form_r[0] == "concrete":
                x = _solve_concrete_power(
                    form_l[1], wb[i_l], form_l[2], form_r[1].inv()
                )
                if x is None:
                    ok = False
                    break
                extra[i_l] += x
            else:
                lines = two_dim_trace_solve(
                    form_l[1], wb[i_l], form_l[2],
                    form_r[2].inv(), wb[i_r].inv(), form_r[1].inv(),
                )
                lines = _positive_lines(lines)
                if not lines:
                    ok = False
                    break
                pair_lines.append((i_l, i_r, lines))
        if not ok:
            continue
        for choice in itertools.product(*(pl[2] for pl in pair_lines)):
            shift = dict(extra)
            periods = []
            for (i_l, i_r, _), (a, b, c, d) in zip(pair_lines, choice):
                shift[i_l] += a
                shift[i_r] += c
                vec = {i: 0 for i in order}
                vec[i_l] += b
                vec[i_r] += d
                if any(vec.values()):
                    periods.append(tuple(vec[i] for i in order))
            for cs in itertools.product(*(g[1] for g in combo)):
                components.append(LinearSet(
                    tuple(cs[k] + shift[i] for k, i in enumerate(order)),
                    periods,
                ))
    _COMPONENT_CACHE[key] = components
    return components


def _form_sig(form):
    if form[0] == "power":
        return ("power", form[1].atoms, form[2].atoms)
    return ("concrete", form[1].atoms)
