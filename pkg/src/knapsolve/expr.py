"""Exponent expressions u1^{x1} v1 ... uk^{xk} vk.

An exponent expression alternates periods-with-variables and constant
tail words.  Variables may repeat; an expression where every variable
occurs exactly once is a knapsack expression, and knapsackify() reduces
the general case to that one via a magnitude-one diagonal constraint.

Text syntax (also used by the CLI):

    (a b)^x c (a)^y        periods in parentheses, ^variable
    t^x t'^4               single letters may drop the parentheses;
                           an integer exponent denotes a repeated constant

Letters are identifiers, inverse letters carry a trailing apostrophe,
letters are separated by whitespace inside parentheses.
"""

import json
import re

from .errors import InputError
from .semilinear import LinearSet, SemilinearSet
from .words import invert_word

_TOKEN = re.compile(
    r"\s*(?:(?P<lpar>\()|(?P<rpar>\))|\^(?P<expvar>[A-Za-z_][A-Za-z0-9_]*)"
    r"|\^(?P<expnum>[0-9]+)|(?P<letter>[A-Za-z_][A-Za-z0-9_]*'?)"
    r"|(?P<bad>\S))"
)


class ExponentExpression:
    """Immutable alternating sequence of (period, variable, tail) factors."""

    __slots__ = ("factors",)

    def __init__(self, factors):
        factors = tuple(
            (tuple(period), var, tuple(tail)) for period, var, tail in factors
        )
        if not factors:
            raise InputError("exponent expression needs at least one factor")
        for period, var, _tail in factors:
            if not period:
                raise InputError("empty period in exponent expression")
            if not var:
                raise InputError("missing variable name")
        object.__setattr__(self, "factors", factors)

    def __setattr__(self, name, value):
        raise AttributeError("ExponentExpression is immutable")

    def __eq__(self, other):
        return (
            isinstance(other, ExponentExpression)
            and self.factors == other.factors
        )

    def __hash__(self):
        return hash(self.factors)

    def __repr__(self):
        return f"ExponentExpression({list(self.factors)})"

    @property
    def variables(self):
        """Distinct variables in order of first occurrence (the set X_e)."""
        return tuple(dict.fromkeys(var for _p, var, _t in self.factors))

    def degree(self):
        """Number of powers; repeated variables count separately."""
        return len(self.factors)

    def length(self):
        return sum(len(p) + len(t) for p, _v, t in self.factors)

    def letters(self):
        out = set()
        for p, _v, t in self.factors:
            out.update(p)
            out.update(t)
        return out

    def evaluate(self, valuation):
        """The word u1^{sigma(x1)} v1 ... for a total valuation sigma."""
        word = []
        for period, var, tail in self.factors:
            if var not in valuation:
                raise InputError(f"valuation missing variable {var!r}")
            word.extend(period * int(valuation[var]))
            word.extend(tail)
        return tuple(word)


def normalize(leading, factors):
    """Fold a leading constant word into an ExponentExpression.

    Conjugating by the leading constant v0 preserves the solution set
    (v0^{-1} e v0 starts with a period and ends with the old tails
    followed by v0), and for e = v0 u1^{x1} ... the conjugation just
    moves v0 to the very end.
    """
    factors = list(factors)
    if not factors:
        raise InputError("expression without any power")
    if leading:
        period, var, tail = factors[-1]
        factors[-1] = (period, var, tuple(tail) + tuple(leading))
    return ExponentExpression(factors)


def parse_expr(text):
    """Parse the textual expression syntax into an ExponentExpression."""
    items = []  # ("word", letters) | ("power", letters, var) | ("repeat", letters, n)
    pos = 0
    pending_group = None
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.group("bad"):
            where = m.start("bad") if m else pos
            raise InputError(f"parse error at position {where}: {text[where:where+10]!r}")
        pos = m.end()
        if m.group("lpar"):
            if pending_group is not None:
                raise InputError(f"nested '(' at position {m.start()}")
            pending_group = []
        elif m.group("rpar"):
            if pending_group is None:
                raise InputError(f"unmatched ')' at position {m.start()}")
            if not pending_group:
                raise InputError(f"empty group at position {m.start()}")
            items.append(("word", tuple(pending_group)))
            pending_group = None
        elif m.group("letter"):
            if pending_group is not None:
                pending_group.append(m.group("letter"))
            else:
                items.append(("word", (m.group("letter"),)))
        else:
            # an exponent; applies to the preceding word item
            if pending_group is not None or not items or items[-1][0] != "word":
                raise InputError(f"dangling '^' at position {m.start()}")
            word = items.pop()[1]
            if m.group("expvar"):
                items.append(("power", word, m.group("expvar")))
            else:
                items.append(("repeat", word, int(m.group("expnum"))))
    if pending_group is not None:
        raise InputError("unterminated '('")

    leading = []
    factors = []
    for item in items:
        if item[0] == "word":
            chunk = item[1]
        elif item[0] == "repeat":
            chunk = item[1] * item[2]
        else:
            factors.append((item[1], item[2], ()))
            continue
        if factors:
            period, var, tail = factors[-1]
            factors[-1] = (period, var, tail + chunk)
        else:
            leading.extend(chunk)
    return normalize(tuple(leading), factors)


def format_expr(e):
    parts = []
    for period, var, tail in e.factors:
        parts.append("(" + " ".join(period) + f")^{var}")
        parts.extend(tail)
    return " ".join(parts)


def knapsackify(e):
    """Rename repeated variables apart; return (e', K).

    Every variable occurs once in e', and sol(e) = (K \\cap sol(e')) with
    the original variables restricted back afterwards.  K is the diagonal
    constraint tying the fresh copies to their originals; its
    representation has magnitude one.
    """
    used = set(e.variables)
    counts = {}
    new_factors = []
    groups = {}  # original var -> list of variable names in e'
    for period, var, tail in e.factors:
        counts[var] = counts.get(var, 0) + 1
        if counts[var] == 1:
            name = var
        else:
            n = counts[var]
            name = f"{var}_{n}"
            while name in used:
                n += 1
                name = f"{var}_{n}"
            used.add(name)
        groups.setdefault(var, []).append(name)
        new_factors.append((period, name, tail))
    e_prime = ExponentExpression(new_factors)
    all_vars = e_prime.variables
    zero = (0,) * len(all_vars)
    periods = []
    for var in e.variables:
        members = set(groups[var])
        periods.append(tuple(1 if v in members else 0 for v in all_vars))
    K = SemilinearSet(all_vars, [LinearSet(zero, periods)])
    return e_prime, K


def expr_to_json_dict(e):
    return {
        "factors": [
            {"period": list(p), "var": v, **({"tail": list(t)} if t else {})}
            for p, v, t in e.factors
        ]
    }


def expr_from_json_dict(data):
    try:
        factors = [
            (tuple(f["period"]), f["var"], tuple(f.get("tail", ())))
            for f in data["factors"]
        ]
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad expression JSON: {exc}") from exc
    return ExponentExpression(factors)


def expr_from_json(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"bad JSON: {exc}") from exc
    return expr_from_json_dict(data)


__all__ = [
    "ExponentExpression",
    "normalize",
    "parse_expr",
    "format_expr",
    "knapsackify",
    "expr_to_json_dict",
    "expr_from_json_dict",
    "expr_from_json",
    "invert_word",
]
