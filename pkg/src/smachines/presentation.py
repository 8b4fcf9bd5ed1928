"""Group presentations read off a machine, and the modified length scale.

Each positive rule theta with parts [U_i -> V_i] (one-letter bases,
i = 1..m) contributes the relations U_i theta_i = theta_{i-1} V_i over
per-position theta-letters theta_0..theta_m (identified cyclically when a
hub is given), plus the commutation relations theta_j a = a theta_j for
every letter a the rule permits in sector j.  The optional hub relation
is the L-th power of the accept word.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .engine import AdmissibleWord, SMachine
from .words import Q, WordError, invert, reduce_word


@dataclass
class Presentation:
    generators: list[str]
    relators: list[tuple[str, list[str]]]    # (label, token list)
    hub: Optional[list[str]] = None

    def counts(self) -> dict[str, int]:
        tq = sum(1 for lbl, _ in self.relators if lbl.startswith("(q)"))
        ta = sum(1 for lbl, _ in self.relators if lbl.startswith("(a)"))
        return {"theta_q": tq, "theta_a": ta,
                "total": len(self.relators) + (1 if self.hub else 0)}

    def to_dict(self) -> dict:
        out = {"generators": self.generators,
               "relators": [{"label": lbl, "word": w} for lbl, w in self.relators]}
        if self.hub:
            out["hub"] = self.hub
        return out


def _tok(alph, x: int) -> str:
    nm = alph.name(x)
    return nm if x > 0 else nm + "^-1"


def cyclically_reduce(tokens: list[str]) -> list[str]:
    def inv(t):
        return t[:-3] if t.endswith("^-1") else t + "^-1"
    out = list(tokens)
    # free reduction first
    stack: list[str] = []
    for t in out:
        if stack and stack[-1] == inv(t):
            stack.pop()
        else:
            stack.append(t)
    out = stack
    while len(out) >= 2 and out[0] == inv(out[-1]):
        out = out[1:-1]
    return out


def emit_presentation(m: SMachine, L: int = 0,
                      hub: Optional[AdmissibleWord] = None) -> Presentation:
    """Generators and relators of the group simulating the machine.

    Relator count: per positive rule, one (theta,q)-relator per part plus
    one (theta,a)-relator per permitted letter; plus the hub if given.
    """
    alph = m.hw.alphabet
    for r in m.positive_rules:
        if any(p.hi != p.lo for p in r.parts):
            raise WordError(f"{r.name}: presentations need one-letter-base parts")
    gens = [l.name for l in alph.letters()]
    n = m.hw.n_parts
    relators: list[tuple[str, list[str]]] = []
    cyclic = hub is not None
    for r in m.positive_rules:
        def th(i: int) -> str:
            if cyclic:
                i = i % n
            return f"{r.name}_{i}"
        for idx in range(n + (0 if cyclic else 1)):
            nm = th(idx)
            if nm not in gens:
                gens.append(nm)
        parts = sorted(r.parts, key=lambda p: p.lo)
        for p in parts:
            i = p.lo + 1   # positions: theta_{i-1} left of part, theta_i right
            u = [_tok(alph, x) for x in p.u]
            v = [_tok(alph, x) for x in p.v]
            word = u + [th(i)] + _inv_tokens(v) + [th(i - 1) + "^-1"]
            relators.append((f"(q) {r.name} part {p.lo}", cyclically_reduce(word)))
        for t, perm in enumerate(r.perms):
            letters = m.hw.tapes[t] if perm is None else sorted(perm)
            for x in letters:
                a = alph.name(x)
                word = [th(t + 1), a, th(t + 1) + "^-1", a + "^-1"]
                relators.append((f"(a) {r.name} {a}", cyclically_reduce(word)))
    hubword = None
    if hub is not None:
        if L < 1:
            raise WordError("hub needs an exponent L >= 1")
        base_parts = [b for b, s in hub.base]
        if base_parts != list(range(n)) or any(s < 0 for _, s in hub.base):
            raise WordError("hub word must have the standard base")
        hubword = [_tok(alph, x) for x in hub.word] * L
    return Presentation(gens, relators, hubword)


def _inv_tokens(tokens: list[str]) -> list[str]:
    def inv(t):
        return t[:-3] if t.endswith("^-1") else t + "^-1"
    return [inv(t) for t in reversed(tokens)]


def expected_relator_count(m: SMachine, hub: bool = False) -> int:
    total = 0
    for r in m.positive_rules:
        total += len(r.parts)
        for t, perm in enumerate(r.perms):
            total += len(m.hw.tapes[t]) if perm is None else len(perm)
    return total + (1 if hub else 0)


# ---------------------------------------------------------------------------
# Modified length
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LengthScale:
    """delta in (0,1) with J*delta < 1."""

    delta: Fraction
    J: int = 1

    def __post_init__(self):
        if not (0 < self.delta < 1):
            raise WordError("delta must lie in (0,1)")
        if self.J < 1 or self.J * self.delta >= 1:
            raise WordError("need J >= 1 and J*delta < 1")


QK, AK, TK = "q", "a", "t"   # letter classes for the length scale


def letter_cost(kind: str, delta: Fraction) -> Fraction:
    return delta if kind == AK else Fraction(1)


def modified_length(kinds: Sequence[str], scale: LengthScale) -> Fraction:
    """Minimum decomposition cost: single letters cost 1 (q, theta) or
    delta (a); a two-letter factor with exactly one theta-letter and no
    q-letter costs 1.  Dynamic programming over positions."""
    d = scale.delta
    n = len(kinds)
    dp = [Fraction(0)] * (n + 1)
    for i in range(n):
        best = dp[i] + letter_cost(kinds[i], d)
        if i + 1 < n:
            pass
        if i > 0:
            pair = {kinds[i - 1], kinds[i]}
            if QK not in pair and sorted((kinds[i - 1], kinds[i])).count(TK) == 1:
                cand = dp[i - 1] + 1
                if cand < best:
                    best = cand
        dp[i + 1] = best
    return dp[n]


def brute_modified_length(kinds: Sequence[str], scale: LengthScale) -> Fraction:
    """Exhaustive decomposition minimum; oracle for the DP."""
    d = scale.delta
    n = len(kinds)
    best = [None] * (n + 1)
    best[0] = Fraction(0)

    def factor_cost(seg: Sequence[str]) -> Optional[Fraction]:
        if len(seg) == 1:
            return letter_cost(seg[0], d)
        if len(seg) == 2 and QK not in seg and list(seg).count(TK) == 1:
            return Fraction(1)
        return None

    for i in range(1, n + 1):
        for j in range(max(0, i - 2), i):
            c = factor_cost(kinds[j:i])
            if c is None or best[j] is None:
                continue
            tot = best[j] + c
            if best[i] is None or tot < best[i]:
                best[i] = tot
    return best[n]


def kinds_of_tokens(tokens: Sequence[str]) -> list[str]:
    """Classify plain tokens: names starting with 'theta' or containing
    '_' followed by digits are theta-letters, single-letter lowercase
    names starting with a/b/c/x/y are a-letters, the rest q-letters.
    Used by the CLI's length subcommand."""
    out = []
    for t in tokens:
        base = t[:-3] if t.endswith("^-1") else t
        if base.startswith("theta") or base.startswith("th_"):
            out.append(TK)
        elif base[0] in "abcxyz" and not base[0] == "q":
            out.append(AK)
        else:
            out.append(QK)
    return out


def band_length_bounds(base_len: int, top_a_len: int) -> tuple[int, int]:
    """Cell-count bounds of a band with the given base length and top
    a-length: between l_a - l_b and l_a + 3 l_b."""
    if base_len < 0 or top_a_len < 0:
        raise WordError("lengths must be nonnegative")
    return (max(0, top_a_len - base_len), top_a_len + 3 * base_len)


def subword_additivity_ok(kinds: Sequence[str], scale: LengthScale) -> bool:
    """|s1| + |s2| >= |s| >= |s1| + |s2| - delta at every split point."""
    total = modified_length(kinds, scale)
    for i in range(len(kinds) + 1):
        a = modified_length(kinds[:i], scale)
        b = modified_length(kinds[i:], scale)
        if not (a + b >= total >= a + b - scale.delta):
            return False
    return True


def length_lower_bound_ok(kinds: Sequence[str], scale: LengthScale) -> bool:
    """|s| >= max(c, c + (d - c) delta) for c theta-letters, d a-letters."""
    c = sum(1 for k in kinds if k == TK)
    d = sum(1 for k in kinds if k == AK)
    val = modified_length(kinds, scale)
    return val >= max(Fraction(c), Fraction(c) + (d - c) * scale.delta)
