"""HNN-extensions with finite associated subgroups, and amalgamated products.

An HNN-extension H = <G, t | t^{-1} a t = phi(a), a in A> adds a stable
letter t to a base group G together with an isomorphism phi between two
finite subgroups A and B of G.  Elements are Britton-reduced alternating
words g0 t^{d1} g1 ... t^{dk} gk.  Solving e = 1 walks the same kind of
guess tree as the graph-product solver:

  1. rewrite every period into a base element or a well-behaved core via
     the power presentation u^m = s v^m p;
  2. guess which base-element powers evaluate to the identity;
  3. search for reductions of the factor tuple: constants split at
     letter positions, symbolic powers split into factors, adjacent base
     items merge or discharge into base-group constraints, and
     generalized cancellations consume two t-bearing items around a
     connecting element from A u B;
  4. cut each surviving symbolic factor into the shape s u^{x_j} p,
     resolve matched factor pairs with the two-dimensional automaton
     solver, and assemble a semilinear set per guess;
  5. union over guesses, intersect the variable-equality constraint,
     project back to the input variables.

An amalgamated product G1 *_A G2 embeds into the HNN-extension of the
free product G1 * G2 by g -> t^{-1} g t on the first factor, so its
solver is the HNN solver after that substitution.
"""

import itertools
import math

from .errors import BudgetExceededError, InputError
from .expr import ExponentExpression, normalize
from .groups import GroupBackend, solve_exponent
from .semilinear import LinearSet, SemilinearSet
from .unary_automata import (
    TICK,
    Nfa,
    lengths_to_xy,
    loop_language_nfa,
    unary_length_set,
)
from .words import invert_letter, invert_word

SEARCH_STATES_CAP = 2_000_000
#: default limit on symbolic factors per power in the reduction search
FACTOR_CAP = 3


class BrittonWord:
    """Alternating word g0 t^{d1} g1 ... t^{dk} gk over a base group.

    Base segments are canonical base-group words; d_i is +1 or -1.
    """

    __slots__ = ("gs", "deltas")

    def __init__(self, gs, deltas):
        gs = tuple(tuple(g) for g in gs)
        deltas = tuple(deltas)
        if len(gs) != len(deltas) + 1:
            raise InputError("BrittonWord needs one more base segment than t's")
        if any(d not in (1, -1) for d in deltas):
            raise InputError("BrittonWord exponents must be +1 or -1")
        object.__setattr__(self, "gs", gs)
        object.__setattr__(self, "deltas", deltas)

    def __setattr__(self, name, value):
        raise AttributeError("BrittonWord is immutable")

    def __eq__(self, other):
        return (
            isinstance(other, BrittonWord)
            and self.gs == other.gs
            and self.deltas == other.deltas
        )

    def __hash__(self):
        return hash((self.gs, self.deltas))

    def __repr__(self):
        return f"BrittonWord({self.gs}, {self.deltas})"

    @property
    def tcount(self):
        return len(self.deltas)

    def is_identity(self):
        return not self.deltas and not self.gs[0]

    def is_base(self):
        return not self.deltas

    def letters(self, stable):
        out = list(self.gs[0])
        for d, g in zip(self.deltas, self.gs[1:]):
            out.append(stable if d == 1 else invert_letter(stable))
            out.extend(g)
        return tuple(out)


class HnnBackend(GroupBackend):
    """HNN-extension of a base backend by an isomorphism of finite subgroups.

    The associated subgroups are given as parallel element lists: the
    i-th word of a_words maps to the i-th word of b_words.
    """

    def __init__(self, base, stable_letter, a_words, b_words):
        if stable_letter.endswith("'"):
            raise InputError("stable letter may not end with an apostrophe")
        bad = {stable_letter, invert_letter(stable_letter)} & set(base.alphabet)
        if bad:
            raise InputError("stable letter clashes with the base alphabet")
        self.base = base
        self.stable = stable_letter
        self.alphabet = frozenset(base.alphabet) | {
            stable_letter,
            invert_letter(stable_letter),
        }
        self._canon_cache = {}
        if len(a_words) != len(b_words):
            raise InputError("associated subgroup lists must be parallel")
        a_elems = [self.base_canon(tuple(w)) for w in a_words]
        b_elems = [self.base_canon(tuple(w)) for w in b_words]
        if len(set(a_elems)) != len(a_elems) or len(set(b_elems)) != len(b_elems):
            raise InputError("associated subgroup lists contain duplicates")
        phi = dict(zip(a_elems, b_elems))
        if () not in phi:
            phi[()] = ()
            a_elems.append(())
            b_elems.append(())
        if phi[()] != ():
            raise InputError("phi must fix the identity")
        self._check_subgroup(a_elems, "A")
        self._check_subgroup(b_elems, "B")
        for x in a_elems:
            for y in a_elems:
                if phi[self.base_mul(x, y)] != self.base_mul(phi[x], phi[y]):
                    raise InputError("phi is not an isomorphism from A to B")
        self.a_set = frozenset(a_elems)
        self.b_set = frozenset(b_elems)
        self.ab = self.a_set | self.b_set
        self.phi = phi
        self.phi_inv = {b: a for a, b in phi.items()}

    def _check_subgroup(self, elems, name):
        have = set(elems)
        for x in elems:
            if self.base_canon(invert_word(x)) not in have:
                raise InputError(f"{name} is not closed under inverses")
            for y in elems:
                if self.base_mul(x, y) not in have:
                    raise InputError(f"{name} is not closed under products")

    # -- base-group element arithmetic on canonical words --------------

    def base_canon(self, word):
        word = tuple(word)
        hit = self._canon_cache.get(word)
        if hit is not None:
            return hit
        base = self.base
        if hasattr(base, "canonical_word"):
            out = tuple(base.canonical_word(word))
        else:
            out = tuple(base.elem_word(base.elem_from_word(word)))
        self._canon_cache[word] = out
        return out

    def base_mul(self, *words):
        out = ()
        for w in words:
            out = out + tuple(w)
        return self.base_canon(out)

    def base_inv(self, word):
        return self.base_canon(invert_word(word))

    def sub_set(self, alpha):
        """The subgroup whose elements may cross t^{alpha} leftwards."""
        return self.a_set if alpha == 1 else self.b_set

    def cross(self, c, alpha):
        """phi^{alpha}(c) for c in sub_set(alpha)."""
        return self.phi[c] if alpha == 1 else self.phi_inv[c]

    # -- words ---------------------------------------------------------

    def parse(self, word):
        self.check_word(word)
        gs = [[]]
        deltas = []
        for letter in word:
            if letter == self.stable:
                deltas.append(1)
                gs.append([])
            elif letter == invert_letter(self.stable):
                deltas.append(-1)
                gs.append([])
            else:
                gs[-1].append(letter)
        return BrittonWord([self.base_canon(g) for g in gs], deltas)

    def identity_bw(self):
        return BrittonWord([()], ())

    def base_bw(self, word):
        return BrittonWord([self.base_canon(word)], ())

    def concat(self, u, v):
        return BrittonWord(
            u.gs[:-1] + (self.base_mul(u.gs[-1], v.gs[0]),) + v.gs[1:],
            u.deltas + v.deltas,
        )

    def bw_inv(self, u):
        return BrittonWord(
            tuple(self.base_inv(g) for g in reversed(u.gs)),
            tuple(-d for d in reversed(u.deltas)),
        )

    def bw_pow(self, u, k):
        out = self.identity_bw()
        for _ in range(k):
            out = self.concat(out, u)
        return out

    def bw_norm(self, u):
        return u.tcount + sum(self.base.norm(g) for g in u.gs)

    # -- GroupBackend interface ----------------------------------------

    def word_problem(self, word):
        return britton_reduce(self, self.parse(word)).is_identity()

    def norm(self, word):
        return self.bw_norm(britton_reduce(self, self.parse(word)))

    def solve_knapsack(self, e):
        return solve_exponent_hnn(self, e)


def britton_reduce(backend, w):
    """Normal form: replace pins t^{-a} c t^{a} -> phi^{a}(c) until none."""
    if not isinstance(w, BrittonWord):
        w = backend.parse(w)
    gs = list(w.gs)
    deltas = list(w.deltas)
    changed = True
    while changed:
        changed = False
        for j in range(len(deltas) - 1):
            if deltas[j + 1] != -deltas[j]:
                continue
            if gs[j + 1] not in backend.sub_set(deltas[j + 1]):
                continue
            inner = backend.cross(gs[j + 1], deltas[j + 1])
            gs[j : j + 3] = [backend.base_mul(gs[j], inner, gs[j + 2])]
            del deltas[j : j + 2]
            changed = True
            break
    return BrittonWord(gs, deltas)


def hnn_equal(backend, u, v):
    """u = v in the extension, via the connecting-element chain."""
    u = britton_reduce(backend, u)
    v = britton_reduce(backend, v)
    if u.deltas != v.deltas:
        return False
    c = ()
    for i, d in enumerate(u.deltas):
        c = backend.base_mul(invert_word(u.gs[i]), c, v.gs[i])
        if c not in backend.sub_set(d):
            return False
        c = backend.cross(c, d)
    return backend.base_mul(invert_word(u.gs[-1]), c, v.gs[-1]) == ()


def reduce_product(backend, u, v):
    """A reduced word equal to uv; cancellation happens at the junction."""
    return britton_reduce(backend, backend.concat(u, v))


def is_well_behaved_bw(backend, w):
    """w and w^2 reduced: then every power of w is reduced."""
    if w != britton_reduce(backend, w):
        return False
    sq = backend.concat(w, w)
    return sq == britton_reduce(backend, sq)


def hnn_power_presentation(backend, u):
    """(s, v, p) with u^m = s v^m p, v a base element or well-behaved.

    The core v either lies in the base group or starts with t^{+-1}; the
    combined size of s, v, p is at most three times the size of u, and
    the equality is verified for small powers on every call.
    """
    u = britton_reduce(backend, u)
    one = backend.identity_bw()
    k = u.tcount
    if k == 0:
        return one, u, one
    # largest cancellation depth between a copy of u and the next one
    best_m, best_c = 0, ()
    for m in range(1, k // 2 + 1):
        z = BrittonWord(((),) + u.gs[k - m + 1 :], u.deltas[k - m :])
        x = BrittonWord(u.gs[:m] + ((),), u.deltas[:m])
        zx = britton_reduce(backend, backend.concat(z, x))
        if zx.tcount == 0 and zx.gs[0] in backend.ab:
            best_m, best_c = m, zx.gs[0]
    m, c = best_m, best_c
    if m:
        z = BrittonWord(((),) + u.gs[k - m + 1 :], u.deltas[k - m :])
        x = BrittonWord(u.gs[:m] + ((),), u.deltas[:m])
    else:
        z = x = one
    y = BrittonWord(u.gs[m : k - m + 1], u.deltas[m : k - m])
    yc = BrittonWord(y.gs[:-1] + (backend.base_mul(y.gs[-1], c),), y.deltas)
    if yc.tcount == 0:
        s = x
        v = yc
        p = backend.concat(backend.base_bw(invert_word(c)), z)
    else:
        g, gq = yc.gs[0], yc.gs[-1]
        v = BrittonWord(
            ((),) + yc.gs[1:-1] + (backend.base_mul(gq, g),), yc.deltas
        )
        s = BrittonWord(x.gs[:-1] + (g,), x.deltas)
        cg = backend.base_mul(c, g)
        p = backend.concat(backend.base_bw(invert_word(cg)), z)
        assert is_well_behaved_bw(backend, v), "power core must be well-behaved"
    norm_u = backend.bw_norm(u)
    assert (
        backend.bw_norm(s) + backend.bw_norm(p) + backend.bw_norm(v)
        <= 3 * norm_u
    ), "power presentation size bound violated"
    for mm in range(6):
        lhs = backend.bw_pow(u, mm)
        rhs = backend.concat(backend.concat(s, backend.bw_pow(v, mm)), p)
        assert hnn_equal(backend, lhs, rhs), "power presentation equality failed"
    return s, v, p


# ---------------------------------------------------------------------------
# Two-dimensional knapsack: a u1 u^x u2 = v1 v^y v2 b


def _full_slots(bw):
    out = [("g", bw.gs[0])]
    for d, g in zip(bw.deltas, bw.gs[1:]):
        out.append(("t", d))
        out.append(("g", g))
    return out


def _cycle_slots(bw):
    slots = _full_slots(bw)
    if bw.gs[0] == ():
        return slots[1:]
    if bw.gs[-1] == () and bw.tcount:
        return slots[:-1]
    raise InputError("period must start or end with the stable letter")


def _side_parts(affix1, cycle, affix2):
    """Slot sequences (stem, cycle, exit) strictly alternating in lockstep."""
    stem = _full_slots(affix1)
    exit_ = _full_slots(affix2)
    if cycle[0][0] == "g":
        if stem[-1] == ("g", ()):
            stem = stem[:-1]
        assert not stem or stem[-1][0] == "t", "prefix misaligned with period"
    if cycle[-1][0] == "g":
        if exit_ and exit_[0] == ("g", ()):
            exit_ = exit_[1:]
        assert not exit_ or exit_[0][0] == "t", "suffix misaligned with period"
    first = stem[0] if stem else cycle[0]
    if first[0] == "t":
        stem = [("g", ())] + stem
    last = exit_[-1] if exit_ else cycle[-1]
    if last[0] == "t":
        exit_ = exit_ + [("g", ())]
    return stem, cycle, exit_


def _connect_product(backend, n1, n2, a, b):
    """Synchronized product tracking the connecting element c.

    A base-slot pair (g on top, h on bottom) moves c to h^{-1} c g; a
    t-slot pair needs matching exponents and applies phi, emitting the
    unary tick.  Runs from c = a to c = b.
    """
    transitions = []
    for p1, top, q1 in n1.transitions:
        for p2, bot, q2 in n2.transitions:
            if top[0] == "t" and bot[0] == "t":
                if top[1] != bot[1]:
                    continue
                d = top[1]
                for c in backend.sub_set(d):
                    c2 = backend.cross(c, d)
                    transitions.append(((c, p1, p2), TICK, (c2, q1, q2)))
            elif top[0] == "g" and bot[0] == "g":
                for c in backend.ab:
                    c2 = backend.base_mul(invert_word(bot[1]), c, top[1])
                    if c2 in backend.ab:
                        transitions.append(((c, p1, p2), None, (c2, q1, q2)))
    initials = {(a, p1, p2) for p1 in n1.initials for p2 in n2.initials}
    finals = {(b, p1, p2) for p1 in n1.finals for p2 in n2.finals}
    states = initials | finals
    for src, _lab, dst in transitions:
        states.add(src)
        states.add(dst)
    return Nfa(states, transitions, initials, finals)


_HNN_TWO_DIM_CACHE = {}


def two_dim_hnn_solve(backend, a, u1, u, u2, v1, v, v2, b):
    """Lines (a0,b0,c0,d0) = {(a0+b0 z, c0+d0 z)} with a u1 u^x u2 = v1 v^y v2 b.

    u and v must be well-behaved and contain the stable letter; a and b
    are A u B elements given as base words.  Both sides are laid out as
    strictly alternating slot sequences consumed in lockstep while the
    connecting element is tracked; accepted tick counts determine x and
    y by division.
    """
    a = backend.base_canon(a)
    b = backend.base_canon(b)
    if a not in backend.ab or b not in backend.ab:
        raise InputError("boundary elements must lie in the associated subgroups")
    for w in (u, v):
        if not w.tcount:
            raise InputError("two_dim_hnn_solve needs periods containing t")
    key = (id(backend), a, u1, u, u2, v1, v, v2, b)
    cached = _HNN_TWO_DIM_CACHE.get(key)
    if cached is not None:
        return cached
    stem_u, cyc_u, exit_u = _side_parts(u1, _cycle_slots(u), u2)
    stem_v, cyc_v, exit_v = _side_parts(v1, _cycle_slots(v), v2)
    n1 = loop_language_nfa(stem_u, cyc_u, exit_u)
    n2 = loop_language_nfa(stem_v, cyc_v, exit_v)
    prod = _connect_product(backend, n1, n2, a, b)
    progs = unary_length_set(prod)
    tu, tv = u.tcount, v.tcount
    pairs = []
    for b0, c0 in progs:
        if c0 and (c0 % tu or c0 % tv):
            # refine to a step every length class divides
            step = math.lcm(c0, tu, tv)
            pairs.extend((b0 + c0 * k, step) for k in range(step // c0))
        else:
            pairs.append((b0, c0))
    result = lengths_to_xy(
        pairs, u1.tcount + u2.tcount, tu, v1.tcount + v2.tcount, tv
    )
    _HNN_TWO_DIM_CACHE[key] = result
    return result


# ---------------------------------------------------------------------------
# Reduction search over factor tuples
#
# Items (all hashable):
#   ("C", bw)          concrete reduced word
#   ("B", entries)     symbolic base product; entries are ("e", word) or
#                      ("p", i, word) with i a base-element power index
#   ("F", i, fid)      symbolic factor of the well-behaved power i
#   ("W", i)           an untouched power u_i^{x_i}


class HnnReductionSearch:
    """Enumerates reductions of refinements of an item tuple.

    powers maps well-behaved power indices to their period words.  Emits
    (records, orders): records is a frozenset of constraints ("zero", i),
    ("val", entries, a), ("assign", fid, i, value) and ("pair", fidL,
    iL, a, fidR, iR, b); orders maps each power index to its factor id
    sequence.
    """

    def __init__(self, backend, powers, splits_cap, creation_cap,
                 states_cap=SEARCH_STATES_CAP, factor_cap=FACTOR_CAP):
        self.backend = backend
        self.powers = powers
        self.splits_cap = splits_cap
        self.creation_cap = creation_cap
        self.states_cap = states_cap
        self.factor_cap = factor_cap
        self.states = 0
        self.seen = {}
        self.results = {}
        self.ab = sorted(backend.ab)

    def run(self, items):
        orders = {
            i: ()
            for i in sorted(self.powers)
            if any(it[0] == "W" and it[1] == i for it in items)
        }
        self._dfs(tuple(items), orders, frozenset(), 0, 0)
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
            ("F", it[1], mapping[it[2]]) if it[0] == "F" else it
            for it in items
        )
        new_orders = {
            i: tuple(mapping[f] for f in fids) for i, fids in orders.items()
        }
        new_records = frozenset(
            ("assign", mapping[r[1]], r[2], r[3]) if r[0] == "assign"
            else ("pair", mapping[r[1]], r[2], r[3], mapping[r[4]], r[5], r[6])
            if r[0] == "pair" else r
            for r in records
        )
        return new_items, new_orders, new_records

    def _emit(self, records, orders):
        if records not in self.results:
            self.results[records] = dict(orders)

    def _recurse(self, items, orders, records, splits, creations):
        items, orders, records = self.canon_fids(items, orders, records)
        self._dfs(items, orders, records, splits, creations)

    @staticmethod
    def _fresh_fid(orders):
        top = -1
        for fids in orders.values():
            for fid in fids:
                top = max(top, fid)
        return top + 1

    def _base_entries(self, item):
        if item[0] == "B":
            return item[1]
        if item[0] == "C" and item[1].is_base():
            return (("e", item[1].gs[0]),)
        return None

    @staticmethod
    def _t_bearing(item):
        if item[0] == "F":
            return True
        return item[0] == "C" and item[1].tcount >= 1

    def _dfs(self, items, orders, records, splits, creations):
        key = (items, tuple(sorted(orders.items())), records)
        prior = self.seen.setdefault(key, [])
        for old_splits, old_creations in prior:
            if old_splits <= splits and old_creations <= creations:
                return
        prior.append((splits, creations))
        self.states += 1
        if self.states > self.states_cap:
            raise BudgetExceededError("reduction search states", self.states_cap)
        if not items:
            self._emit(records, orders)
            return
        backend = self.backend
        n = len(items)

        # unary moves
        for pos in range(n):
            item = items[pos]
            rest = items[:pos] + items[pos + 1 :]
            tag = item[0]
            if tag == "W":
                i = item[1]
                self._recurse(
                    rest, orders, records | {("zero", i)}, splits, creations
                )
                fid = self._fresh_fid(orders)
                new_orders = dict(orders)
                new_orders[i] = (fid,)
                self._recurse(
                    items[:pos] + (("F", i, fid),) + items[pos + 1 :],
                    new_orders, records, splits, creations,
                )
            elif tag == "F":
                i, fid = item[1], item[2]
                if (splits + 1 <= self.splits_cap
                        and len(orders[i]) < self.factor_cap):
                    fid1 = self._fresh_fid(orders)
                    fid2 = fid1 + 1
                    new_orders = dict(orders)
                    seq = list(new_orders[i])
                    at = seq.index(fid)
                    new_orders[i] = tuple(seq[:at] + [fid1, fid2] + seq[at + 1 :])
                    self._recurse(
                        items[:pos] + (("F", i, fid1), ("F", i, fid2))
                        + items[pos + 1 :],
                        new_orders, records, splits + 1, creations,
                    )
            elif tag == "C":
                letters = item[1].letters(backend.stable)
                if len(letters) > 1 and splits + 1 <= self.splits_cap:
                    seen_cuts = set()
                    for j in range(1, len(letters)):
                        left = backend.parse(letters[:j])
                        right = backend.parse(letters[j:])
                        if left.is_identity() or right.is_identity():
                            continue
                        if (left, right) in seen_cuts:
                            continue
                        seen_cuts.add((left, right))
                        self._recurse(
                            items[:pos] + (("C", left), ("C", right))
                            + items[pos + 1 :],
                            orders, records, splits + 1, creations,
                        )
            elif tag == "B":
                rec = ("val", item[1], ())
                self._recurse(rest, orders, records | {rec}, splits, creations)

        # adjacent base merges
        for pos in range(n - 1):
            left, right = items[pos], items[pos + 1]
            el = self._base_entries(left)
            er = self._base_entries(right)
            if el is None or er is None:
                continue
            rest = items[:pos] + items[pos + 2 :]
            entries = el + er
            if all(entry[0] == "e" for entry in entries):
                prod = backend.base_mul(*[entry[1] for entry in entries])
                if prod == ():
                    self._recurse(rest, orders, records, splits, creations)
                elif creations < self.creation_cap:
                    merged = ("C", backend.base_bw(prod))
                    self._recurse(
                        items[:pos] + (merged,) + items[pos + 2 :],
                        orders, records, splits, creations + 1,
                    )
            else:
                rec = ("val", entries, ())
                self._recurse(rest, orders, records | {rec}, splits, creations)
                if creations < self.creation_cap:
                    merged = ("B", entries)
                    self._recurse(
                        items[:pos] + (merged,) + items[pos + 2 :],
                        orders, records, splits, creations + 1,
                    )

        # generalized cancellations (u_i, a, u_{i+1}) -> b
        for pos in range(n - 1):
            if self._t_bearing(items[pos]) and self._t_bearing(items[pos + 1]):
                self._gencancel(
                    items, pos, None, pos + 1, orders, records, splits, creations
                )
        for pos in range(n - 2):
            if (self._t_bearing(items[pos])
                    and self._base_entries(items[pos + 1]) is not None
                    and self._t_bearing(items[pos + 2])):
                self._gencancel(
                    items, pos, pos + 1, pos + 2,
                    orders, records, splits, creations,
                )

    def _gencancel(self, items, ix, im, iy, orders, records, splits, creations):
        backend = self.backend
        X, Y = items[ix], items[iy]
        if im is None:
            a_opts = [((), None)]
        else:
            entries = self._base_entries(items[im])
            if all(entry[0] == "e" for entry in entries):
                aw = backend.base_mul(*[entry[1] for entry in entries])
                if aw not in backend.ab:
                    return
                a_opts = [(aw, None)]
            else:
                a_opts = [(aw, ("val", entries, aw)) for aw in self.ab]
        before, after = items[:ix], items[iy + 1 :]

        def emit(out_word, extra, new_creations):
            out = () if out_word == () else (("C", backend.base_bw(out_word)),)
            self._recurse(
                before + out + after,
                orders, records | extra, splits, new_creations,
            )

        for aw, val_rec in a_opts:
            extra = {val_rec} if val_rec else set()
            if X[0] == "C" and Y[0] == "C":
                mid = backend.base_bw(aw)
                r = britton_reduce(
                    backend, backend.concat(backend.concat(X[1], mid), Y[1])
                )
                if r.tcount == 0 and r.gs[0] in backend.ab:
                    emit(r.gs[0], extra, creations)
            elif X[0] == "F" and Y[0] == "F":
                for bw_ in self.ab:
                    rec = ("pair", X[2], X[1], aw, Y[2], Y[1], bw_)
                    emit(bw_, extra | {rec}, creations)
            elif X[0] == "F":
                # X a Y = b, so X = b Y^{-1} a^{-1}
                for bw_ in self.ab:
                    value = britton_reduce(backend, backend.concat(
                        backend.concat(backend.base_bw(bw_), backend.bw_inv(Y[1])),
                        backend.base_bw(invert_word(aw)),
                    ))
                    if value.tcount == 0:
                        continue
                    rec = ("assign", X[2], X[1], value)
                    emit(bw_, extra | {rec}, creations)
            else:
                # X a Y = b, so Y = a^{-1} X^{-1} b
                for bw_ in self.ab:
                    value = britton_reduce(backend, backend.concat(
                        backend.concat(
                            backend.base_bw(invert_word(aw)),
                            backend.bw_inv(X[1]),
                        ),
                        backend.base_bw(bw_),
                    ))
                    if value.tcount == 0:
                        continue
                    rec = ("assign", Y[2], Y[1], value)
                    emit(bw_, extra | {rec}, creations)


def _max_splits_hnn(m):
    """Completeness ceiling on splits for an m-entry tuple."""
    return max(0, max(m, 7 * m - 12) - m)


def _splits_cap_hnn(m, budget):
    bound = _max_splits_hnn(m)
    if budget is not None:
        return min(bound, budget)
    # practical default; raise via the budget argument when needed
    return min(bound, 2 * m)


def _creation_cap_hnn(m, budget):
    cap = max(0, 4 * m - 8)
    if budget is not None:
        cap = min(cap, budget)
    return cap


def enumerate_hnn_reductions(backend, items, powers=None, pieces_budget=None,
                             creation_budget=None,
                             states_budget=SEARCH_STATES_CAP):
    """All reductions of refinements of the item tuple, within budgets.

    Defaults follow the completeness bounds for m entries: refinement
    length at most max(m, 7m - 12) and at most 4m - 8 atom creations.
    Returns {records: orders}.
    """
    powers = powers or {}
    m = len(items)
    cap = _max_splits_hnn(m)
    if pieces_budget is not None:
        cap = min(cap, max(0, pieces_budget - m))
    creation_cap = _creation_cap_hnn(m, creation_budget)
    search = HnnReductionSearch(backend, powers, cap, creation_cap, states_budget)
    results = search.run(tuple(items))
    assert search.states <= states_budget
    return results


# ---------------------------------------------------------------------------
# The full solver


class PreparedHnnKnapsack:
    """Period/constant structure with base-element or well-behaved periods."""

    def __init__(self, powers, tails, occ_vars, free_occs):
        self.powers = powers
        self.tails = tails
        self.occ_vars = occ_vars
        self.free_occs = free_occs


def preprocess_hnn(backend, e):
    """Rewrite e so that every period is a base element or well-behaved.

    Returns (prep, K) with sol(e) = (K cap sol(prep)) restricted to the
    variables of e; K has magnitude one and ties renamed occurrences of
    the same variable together.
    """
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

    powers = []
    free_occs = []
    tails = [backend.identity_bw()]
    for period, var, tail in e.factors:
        u = britton_reduce(backend, backend.parse(period))
        w = britton_reduce(backend, backend.parse(tail))
        if u.is_identity():
            free_occs.append(occurrence(var))
            tails[-1] = britton_reduce(backend, backend.concat(tails[-1], w))
            continue
        s, v, p = hnn_power_presentation(backend, u)
        tails[-1] = britton_reduce(backend, backend.concat(tails[-1], s))
        powers.append((v, occurrence(var)))
        tails.append(britton_reduce(backend, backend.concat(p, w)))
    if powers and not tails[0].is_identity():
        # a leading constant conjugates away: w e' = 1 iff e' w = 1
        tails[-1] = britton_reduce(backend, backend.concat(tails[-1], tails[0]))
        tails[0] = backend.identity_bw()

    zero = tuple(0 for _ in occ_vars)
    periods = []
    for var in e.variables:
        group = occ_groups.get(var)
        if not group:
            continue
        members = set(group)
        periods.append(tuple(1 if name in members else 0 for name in occ_vars))
    K = SemilinearSet(tuple(occ_vars), [LinearSet(zero, periods)])
    prep = PreparedHnnKnapsack(powers, tails, tuple(occ_vars), free_occs)
    return prep, K


def solve_exponent_hnn(desc, e, pieces_budget=None, creation_budget=None,
                       states_budget=SEARCH_STATES_CAP, diagnostics=None):
    """Solution set of e = 1 over the HNN-extension described by desc."""
    if isinstance(desc, HnnBackend):
        backend = desc
    else:
        from .groups import build_backend

        backend = build_backend(desc)
        if not isinstance(backend, HnnBackend):
            raise InputError("solve_exponent_hnn needs an HNN description")
    prep, K = preprocess_hnn(backend, e)
    occ_vars = prep.occ_vars
    stats = diagnostics if diagnostics is not None else {}
    stats.setdefault("branches", 0)
    stats.setdefault("reductions", 0)
    stats.setdefault("states", 0)
    stats.setdefault("complete", True)

    if not prep.powers:
        assert occ_vars, "an exponent expression always carries variables"
        constant_ok = prep.tails[0].is_identity()
        sols = (SemilinearSet.universe(occ_vars) if constant_ok
                else SemilinearSet.empty(occ_vars))
        return sols.intersect(K).restrict(e.variables)._aligned_to(e.variables)

    indices = list(range(1, len(prep.powers) + 1))
    period = {i: prep.powers[i - 1][0] for i in indices}
    var_of = {i: prep.powers[i - 1][1] for i in indices}
    atomic = [i for i in indices if period[i].tcount == 0]
    wb = {i: period[i] for i in indices if period[i].tcount >= 1}
    for i in wb:
        assert is_well_behaved_bw(backend, wb[i]), (
            "non-base period must be well-behaved"
        )

    constrained = [name for name in occ_vars if name not in prep.free_occs]
    assert constrained, "every power contributes a constrained occurrence"
    total = SemilinearSet.empty(tuple(constrained))

    for n1_bits in itertools.product((False, True), repeat=len(atomic)):
        n1 = {atomic[k] for k in range(len(atomic)) if n1_bits[k]}
        stats["branches"] += 1
        n1_sets = []
        dead = False
        for i in sorted(n1):
            expr = ExponentExpression([(period[i].gs[0], var_of[i], ())])
            sols = solve_exponent(backend.base, expr)
            if sols.is_empty_representation():
                dead = True
                break
            n1_sets.append(sols)
        if dead:
            continue

        items = []
        if not prep.tails[0].is_identity():
            items.append(("C", prep.tails[0]))
        for i in indices:
            if i in n1:
                pass
            elif i in wb:
                items.append(("W", i))
            else:
                items.append(("B", (("p", i, period[i].gs[0]),)))
            tail = prep.tails[i]
            if not tail.is_identity():
                items.append(("C", tail))

        if not items:
            total = total.union(_assemble_direct_sum(n1_sets, constrained))
            continue

        splits_cap = _splits_cap_hnn(len(items), pieces_budget)
        if splits_cap < _max_splits_hnn(len(items)):
            stats["complete"] = False
        search = HnnReductionSearch(
            backend, wb,
            splits_cap,
            _creation_cap_hnn(len(items), creation_budget),
            states_budget,
        )
        results = search.run(tuple(items))
        stats["states"] += search.states
        stats["reductions"] += len(results)
        for records, orders in results.items():
            sets = _assemble_hnn_outcome(
                backend, wb, var_of, records, orders, n1_sets, stats
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


def _assemble_direct_sum(sets, names):
    """Direct-sum disjoint-variable sets and align to the given order."""
    out = None
    for piece in sets:
        out = piece if out is None else out.direct_sum(piece)
    assert out is not None, "a branch always constrains some variable"
    missing = [n for n in names if n not in set(out.vars)]
    assert not missing, f"branch left variables unconstrained: {missing}"
    return out._aligned_to(tuple(names))


def _val_solution(backend, entries, a, var_of):
    """Solve (product of entries) = a over the base group."""
    leading = []
    factors = []
    for entry in entries:
        if entry[0] == "e":
            if factors:
                p0, v0, t0 = factors[-1]
                factors[-1] = (p0, v0, t0 + entry[1])
            else:
                leading.extend(entry[1])
        else:
            factors.append((entry[2], var_of[entry[1]], ()))
    assert factors, "a symbolic base product contains a power"
    p0, v0, t0 = factors[-1]
    factors[-1] = (p0, v0, t0 + invert_word(a))
    expr = normalize(tuple(leading), factors)
    return solve_exponent(backend.base, expr)


def _match_power_value(backend, sfx, u, pfx, value):
    """The unique x >= 0 with sfx u^x pfx = value, or None."""
    tm = value.tcount - sfx.tcount - pfx.tcount
    if tm < 0 or tm % u.tcount:
        return None
    x = tm // u.tcount
    candidate = backend.concat(backend.concat(sfx, backend.bw_pow(u, x)), pfx)
    return x if hnn_equal(backend, candidate, value) else None


def _restrict_lines(lines, need_x, need_y):
    """Keep only line points with x >= 1 / y >= 1 where required."""
    out = set()
    for a0, b0, c0, d0 in lines:
        dead = False
        for _ in range(2):
            if (need_x and a0 < 1) or (need_y and c0 < 1):
                if (need_x and a0 < 1 and b0 == 0) or (
                        need_y and c0 < 1 and d0 == 0):
                    dead = True
                    break
                a0, c0 = a0 + b0, c0 + d0
        if dead or (need_x and a0 < 1) or (need_y and c0 < 1):
            continue
        out.add((a0, b0, c0, d0))
    return sorted(out)


def _assemble_hnn_outcome(backend, wb, var_of, records, orders, n1_sets, stats):
    """Turn one reduction outcome into per-variable semilinear sets.

    Returns a list of SemilinearSets over disjoint variable groups, or
    None if the outcome is contradictory.
    """
    zero_powers = set()
    vals = []
    assigns = {}
    pairs = []
    for rec in records:
        if rec[0] == "zero":
            zero_powers.add(rec[1])
        elif rec[0] == "val":
            vals.append((rec[1], rec[2]))
        elif rec[0] == "assign":
            assigns[rec[1]] = (rec[2], rec[3])
        else:
            pairs.append(rec[1:])

    sets = list(n1_sets)
    for i in sorted(zero_powers):
        sets.append(SemilinearSet.point((var_of[i],), (0,)))

    for entries, a in vals:
        sols = _val_solution(backend, entries, a, var_of)
        if sols.is_empty_representation():
            return None
        sets.append(sols)

    active = {i: fids for i, fids in orders.items() if fids}
    paired_fids = set()
    for fid_l, _il, _a, fid_r, _ir, _b in pairs:
        paired_fids.add(fid_l)
        paired_fids.add(fid_r)

    # cut each power word into factor shapes sfx u^{x_j} pfx and resolve
    # the assigned factors, leaving only paired ones open
    reduced = {}
    for i, fids in active.items():
        u = wb[i]
        uletters = u.letters(backend.stable)
        suffixes = {0: backend.identity_bw()}
        prefixes = {0: backend.identity_bw()}
        for o in range(1, len(uletters)):
            suffixes[o] = backend.parse(uletters[o:])
            prefixes[o] = backend.parse(uletters[:o])
        opts = []
        seen = set()
        for cuts in itertools.product(
                range(len(uletters)), repeat=len(fids) - 1):
            c = sum(1 for o in cuts for _ in (0,) if o > 0)
            bounds = (0,) + cuts + (0,)
            ok = True
            open_forms = {}
            for k, fid in enumerate(fids):
                sfx = suffixes[bounds[k]]
                pfx = prefixes[bounds[k + 1]]
                if fid in assigns:
                    _i2, value = assigns[fid]
                    x = _match_power_value(backend, sfx, u, pfx, value)
                    if x is None:
                        ok = False
                        break
                    c += x
                else:
                    assert fid in paired_fids, "every factor id is consumed"
                    open_forms[fid] = (sfx, pfx)
            if not ok:
                continue
            sig = (c, tuple(sorted(open_forms.items())))
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

    for _fl, i_l, _a, _fr, i_r, _b in pairs:
        parent[find(i_l)] = find(i_r)
    groups = {}
    for i in sorted(active):
        groups.setdefault(find(i), []).append(i)

    for order in sorted(groups.values()):
        comp_pairs = [pr for pr in pairs if find(pr[1]) == find(order[0])]
        names = tuple(var_of[i] for i in order)
        components = _hnn_pair_components(backend, wb, order, comp_pairs, reduced)
        group_set = SemilinearSet(names, components)
        if group_set.is_empty_representation():
            return None
        sets.append(group_set)
    return sets


def _hnn_pair_components(backend, wb, order, comp_pairs, reduced):
    """LinearSets over a pair-connected group of powers."""
    components = []
    for combo in itertools.product(*(reduced[i] for i in order)):
        forms = {}
        for _c, of in combo:
            forms.update(of)
        ok = True
        pair_lines = []
        for fid_l, i_l, a, fid_r, i_r, b in comp_pairs:
            sfx_l, pfx_l = forms[fid_l]
            sfx_r, pfx_r = forms[fid_r]
            # (sfx_l u_l^x pfx_l) a (sfx_r u_r^y pfx_r) = b, inverted to
            # a^{-1} pfx_l^{-1} (u_l^{-1})^x sfx_l^{-1} = sfx_r u_r^y pfx_r b^{-1}
            lines = two_dim_hnn_solve(
                backend,
                invert_word(a),
                backend.bw_inv(pfx_l),
                backend.bw_inv(wb[i_l]),
                backend.bw_inv(sfx_l),
                sfx_r,
                wb[i_r],
                pfx_r,
                invert_word(b),
            )
            # a factor consumed by a generalized cancellation contains t
            need_x = sfx_l.tcount + pfx_l.tcount == 0
            need_y = sfx_r.tcount + pfx_r.tcount == 0
            lines = _restrict_lines(lines, need_x, need_y)
            if not lines:
                ok = False
                break
            pair_lines.append((i_l, i_r, lines))
        if not ok:
            continue
        base_c = {i: c for i, (c, _of) in zip(order, combo)}
        for choice in itertools.product(*(pl[2] for pl in pair_lines)):
            shift = dict(base_c)
            periods = []
            for (i_l, i_r, _), (a0, b0, c0, d0) in zip(pair_lines, choice):
                shift[i_l] += a0
                shift[i_r] += c0
                vec = {i: 0 for i in order}
                vec[i_l] += b0
                vec[i_r] += d0
                if any(vec.values()):
                    periods.append(tuple(vec[i] for i in order))
            components.append(LinearSet(
                tuple(shift[i] for i in order), periods
            ))
    return components


# ---------------------------------------------------------------------------
# Amalgamated products


class AmalgamBackend(GroupBackend):
    """Amalgamated product of two backends over isomorphic finite subgroups.

    phi1 and phi2 are parallel element lists: the i-th word over the
    left factor is identified with the i-th word over the right factor.
    Internally the group embeds into an HNN-extension of the free
    product of the factors.
    """

    def __init__(self, left, right, phi1, phi2, stable_letter="t"):
        if set(left.alphabet) & set(right.alphabet):
            raise InputError("amalgam factors must use disjoint alphabets")
        for w in phi1:
            if any(letter not in left.alphabet for letter in w):
                raise InputError("phi1 words must lie in the left factor")
        for w in phi2:
            if any(letter not in right.alphabet for letter in w):
                raise InputError("phi2 words must lie in the right factor")
        from .gp_solver import GraphProductBackend

        self.left = left
        self.right = right
        base = GraphProductBackend([left, right], [])
        self.hnn = HnnBackend(
            base, stable_letter,
            [tuple(w) for w in phi1],
            [tuple(w) for w in phi2],
        )
        self.stable = stable_letter
        self.alphabet = frozenset(left.alphabet) | frozenset(right.alphabet)

    def word_problem(self, word):
        return self.hnn.word_problem(amalgam_embed(self, word))

    def norm(self, word):
        return self.hnn.norm(amalgam_embed(self, word))

    def solve_knapsack(self, e):
        return solve_exponent_amalgam(self, e)


def amalgam_embed(backend, word):
    """Conjugate left-factor letters by the stable letter: g -> t^{-1} g t."""
    backend.check_word(word)
    tin = invert_letter(backend.stable)
    out = []
    for letter in word:
        if letter in backend.left.alphabet:
            out.extend((tin, letter, backend.stable))
        else:
            out.append(letter)
    return tuple(out)


def solve_exponent_amalgam(desc, e, pieces_budget=None, creation_budget=None,
                           states_budget=SEARCH_STATES_CAP, diagnostics=None):
    """Solution set of e = 1 over the amalgamated product described by desc."""
    if isinstance(desc, AmalgamBackend):
        backend = desc
    else:
        from .groups import build_backend

        backend = build_backend(desc)
        if not isinstance(backend, AmalgamBackend):
            raise InputError("solve_exponent_amalgam needs an amalgam description")
    embedded = ExponentExpression([
        (amalgam_embed(backend, p), var, amalgam_embed(backend, t))
        for p, var, t in e.factors
    ])
    return solve_exponent_hnn(
        backend.hnn, embedded,
        pieces_budget=pieces_budget,
        creation_budget=creation_budget,
        states_budget=states_budget,
        diagnostics=diagnostics,
    )


__all__ = [
    "BrittonWord",
    "HnnBackend",
    "AmalgamBackend",
    "britton_reduce",
    "hnn_equal",
    "reduce_product",
    "is_well_behaved_bw",
    "hnn_power_presentation",
    "two_dim_hnn_solve",
    "enumerate_hnn_reductions",
    "solve_exponent_hnn",
    "amalgam_embed",
    "solve_exponent_amalgam",
    "preprocess_hnn",
]
