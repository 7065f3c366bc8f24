"""Automata support for two-dimensional word knapsack.

To solve p u^x s = q v^y t over words, intersect the automata for
p u^* s and q v^* t, forget the letters (keep only their count), read
off the accepted lengths as arithmetic progressions, and convert each
length back to the (x, y) pair it determines.  The length set of a
unary automaton is extracted from the determinized subset trajectory:
it is eventually periodic, with the tail giving singletons and the
cycle giving progressions.
"""

from .errors import BudgetExceededError, InputError

#: the single letter of unary automata
TICK = object()

SUBSET_TRAJECTORY_CAP = 100_000


class Nfa:
    """States, labeled transitions (label None = epsilon), initials, finals."""

    def __init__(self, states, transitions, initials, finals):
        self.states = set(states)
        self.transitions = []
        for src, label, dst in transitions:
            if src not in self.states or dst not in self.states:
                raise InputError("transition references unknown state")
            self.transitions.append((src, label, dst))
        self.initials = set(initials)
        self.finals = set(finals)
        if not self.initials <= self.states or not self.finals <= self.states:
            raise InputError("initial/final state not in state set")

    def labels(self):
        return {label for _s, label, _d in self.transitions if label is not None}

    def eps_closure(self, subset):
        out = set(subset)
        frontier = list(subset)
        while frontier:
            state = frontier.pop()
            for src, label, dst in self.transitions:
                if label is None and src == state and dst not in out:
                    out.add(dst)
                    frontier.append(dst)
        return frozenset(out)

    def step(self, subset, label):
        return {
            dst
            for src, lab, dst in self.transitions
            if lab == label and src in subset
        }

    def accepts(self, word):
        subset = self.eps_closure(self.initials)
        for symbol in word:
            subset = self.eps_closure(self.step(subset, symbol))
            if not subset:
                return False
        return bool(subset & self.finals)


def loop_language_nfa(p, u, s):
    """An automaton for {p u^x s : x >= 0} with |p|+|u|+|s| states."""
    p, u, s = tuple(p), tuple(u), tuple(s)
    if not u:
        raise InputError("loop_language_nfa: empty loop word")

    def pstate(i):
        return ("p", i) if i < len(p) else ("u", 0)

    states = [("p", i) for i in range(len(p))]
    states += [("u", i) for i in range(len(u))]
    states += [("s", i) for i in range(1, len(s) + 1)]
    transitions = []
    for i, letter in enumerate(p):
        transitions.append((pstate(i), letter, pstate(i + 1)))
    for i, letter in enumerate(u):
        transitions.append((("u", i), letter, ("u", (i + 1) % len(u))))
    for i, letter in enumerate(s):
        src = ("u", 0) if i == 0 else ("s", i)
        transitions.append((src, letter, ("s", i + 1)))
    final = ("s", len(s)) if s else ("u", 0)
    return Nfa(states, transitions, [pstate(0)], [final])


def nfa_product(n1, n2):
    """Intersection automaton; inputs must be epsilon-free."""
    for nfa in (n1, n2):
        if any(label is None for _s, label, _d in nfa.transitions):
            raise InputError("nfa_product expects epsilon-free automata")
    states = {(a, b) for a in n1.states for b in n2.states}
    transitions = []
    for s1, lab1, d1 in n1.transitions:
        for s2, lab2, d2 in n2.transitions:
            if lab1 == lab2:
                transitions.append(((s1, s2), lab1, (d1, d2)))
    initials = {(a, b) for a in n1.initials for b in n2.initials}
    finals = {(a, b) for a in n1.finals for b in n2.finals}
    return Nfa(states, transitions, initials, finals)


def relabel_unary(nfa):
    """Forget letters: every non-epsilon transition becomes a tick."""
    transitions = [
        (src, None if label is None else TICK, dst)
        for src, label, dst in nfa.transitions
    ]
    return Nfa(nfa.states, transitions, nfa.initials, nfa.finals)


class ProgressionSet:
    """Union of arithmetic progressions {b + c z}; c = 0 is a singleton."""

    def __init__(self, pairs):
        self.pairs = sorted(set((int(b), int(c)) for b, c in pairs))

    def __repr__(self):
        return f"ProgressionSet({self.pairs})"

    def __iter__(self):
        return iter(self.pairs)

    def contains(self, length):
        for b, c in self.pairs:
            if c == 0:
                if length == b:
                    return True
            elif length >= b and (length - b) % c == 0:
                return True
        return False


def unary_length_set(nfa, cap=SUBSET_TRAJECTORY_CAP):
    """Accepted lengths of a unary automaton as a ProgressionSet.

    Follows the subset trajectory S_0, S_1, ... until the first repeat;
    lengths before the repeat start are singletons, accepted residues
    within the cycle become progressions with the cycle length as
    period.
    """
    subset = nfa.eps_closure(nfa.initials)
    seen = {subset: 0}
    trajectory = [subset]
    while True:
        subset = nfa.eps_closure(nfa.step(subset, TICK))
        if subset in seen:
            tail = seen[subset]
            cycle = len(trajectory) - tail
            break
        seen[subset] = len(trajectory)
        trajectory.append(subset)
        if len(trajectory) > cap:
            raise BudgetExceededError("subset trajectory", cap)
    pairs = []
    for length, subset in enumerate(trajectory):
        if subset & nfa.finals:
            if length < tail:
                pairs.append((length, 0))
            else:
                pairs.append((length, cycle))
    return ProgressionSet(pairs)


def lengths_to_xy(progressions, ps_len, u_len, qt_len, v_len):
    """Convert accepted lengths to (x, y)-lines.

    A length ell determines x = (ell - |ps|)/|u| and y = (ell - |qt|)/|v|;
    progressions failing the sign or divisibility filters contain no
    valid lengths and are dropped.  Returns lines (a, b, c, d) denoting
    {(a + b z, c + d z) : z >= 0}.
    """
    if u_len < 1 or v_len < 1:
        raise InputError("lengths_to_xy needs nonempty loop words")
    lines = set()
    for b0, c0 in progressions:
        if b0 < ps_len or b0 < qt_len:
            continue
        if (b0 - ps_len) % u_len or (b0 - qt_len) % v_len:
            continue
        if c0 % u_len or c0 % v_len:
            continue
        lines.add(
            (
                (b0 - ps_len) // u_len,
                c0 // u_len,
                (b0 - qt_len) // v_len,
                c0 // v_len,
            )
        )
    return sorted(lines)


def word_pair_power_solutions(p, u, s, q, v, t):
    """Lines for {(x, y) : p u^x s = q v^y t as words}.

    The full pipeline: loop automata, product, unary projection, length
    progressions, division back to exponents.  For a given accepted
    length both exponents are forced, so acceptance of the intersection
    at that length is exactly word equality.
    """
    a1 = loop_language_nfa(p, u, s)
    a2 = loop_language_nfa(q, v, t)
    prod = relabel_unary(nfa_product(a1, a2))
    progressions = unary_length_set(prod)
    return lengths_to_xy(
        progressions, len(p) + len(s), len(u), len(q) + len(t), len(v)
    )
