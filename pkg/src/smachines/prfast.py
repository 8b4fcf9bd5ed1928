"""Exhaustive verification of the primitive-machine sweep lemma.

Enumerates, for every start word of the four one-sector shapes with
bounded content, every applicable reduced history up to a depth bound,
checking all five clauses along the way.  The state space is tiny
(phase, two sector contents), so the enumeration runs on a compact
integer encoding; a numba kernel makes the full acceptance-scale sweep
(content up to 4, depth 12, two letters) feasible, with a pure-Python
fallback of the same algorithm.

Letter codes: a=2, A=3, b=4, B=5; inverse = code ^ 1.  Rules 0..9:
0..3 sweep rules of phase 1 (z1(a), z1(b) and inverses), 4 = z12,
5..8 phase 2, 9 = z12 inverse.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

INVR = np.array([2, 3, 0, 1, 9, 7, 8, 5, 6, 4], dtype=np.int8)
# rule -> (phase, letter, sign): letter it multiplies sector 1 by (on the
# right); sector 2 gets the inverse action on the left
RULE_PHASE = np.array([1, 1, 1, 1, 1, 2, 2, 2, 2, 2], dtype=np.int8)
RULE_LET = np.array([3, 5, 2, 4, 0, 2, 4, 3, 5, 0], dtype=np.int8)

MAXW = 24


def _kernel(u1_0, n1, u2_0, n2, ph0, maxd, counters, hitbuf):
    """DFS over applicable reduced histories; counters collects clause
    violations and node/hit statistics.  Compiled by numba when available;
    also runs as plain Python."""
    u1 = np.zeros((maxd + 2, MAXW), dtype=np.int8)
    u2 = np.zeros((maxd + 2, MAXW), dtype=np.int8)
    l1 = np.zeros(maxd + 2, dtype=np.int64)
    l2 = np.zeros(maxd + 2, dtype=np.int64)
    ph = np.zeros(maxd + 2, dtype=np.int8)
    ri = np.zeros(maxd + 2, dtype=np.int8)
    last = np.zeros(maxd + 2, dtype=np.int8)
    mx = np.zeros(maxd + 2, dtype=np.int64)      # max interior a-length
    const = np.zeros(maxd + 2, dtype=np.int8)    # all a-lengths equal start
    for i in range(n1):
        u1[0, i] = u1_0[i]
    for i in range(n2):
        u2[0, i] = u2_0[i]
    l1[0] = n1
    l2[0] = n2
    ph[0] = ph0
    ri[0] = 0
    last[0] = -1
    mx[0] = -1
    const[0] = 1
    a0 = n1 + n2
    start_is_A = ph0 == 1 and n2 == 0
    start_is_B = ph0 == 2 and n2 == 0
    nodes = 1
    hits = 0
    d = 0
    while d >= 0:
        r = ri[d]
        if r == 10:
            d -= 1
            continue
        ri[d] = r + 1
        if RULE_PHASE[r] != ph[d]:
            continue
        if last[d] >= 0 and INVR[last[d]] == r:
            continue
        n1d = l1[d]
        n2d = l2[d]
        if r == 4 or r == 9:
            if n1d != 0:
                continue
            for i in range(n2d):
                u2[d + 1, i] = u2[d, i]
            l1[d + 1] = 0
            l2[d + 1] = n2d
            ph[d + 1] = 2 if r == 4 else 1
        else:
            c = RULE_LET[r]
            if n1d > 0 and u1[d, n1d - 1] == (c ^ 1):
                for i in range(n1d - 1):
                    u1[d + 1, i] = u1[d, i]
                l1[d + 1] = n1d - 1
            else:
                for i in range(n1d):
                    u1[d + 1, i] = u1[d, i]
                u1[d + 1, n1d] = c
                l1[d + 1] = n1d + 1
            if n2d > 0 and u2[d, 0] == c:
                for i in range(n2d - 1):
                    u2[d + 1, i] = u2[d, i + 1]
                l2[d + 1] = n2d - 1
            else:
                u2[d + 1, 0] = c ^ 1
                for i in range(n2d):
                    u2[d + 1, i + 1] = u2[d, i]
                l2[d + 1] = n2d + 1
            ph[d + 1] = ph[d]
        nodes += 1
        anew = l1[d + 1] + l2[d + 1]
        acur = n1d + n2d
        aprev = l1[d - 1] + l2[d - 1] if d > 0 else -1
        # clause 1: growth persists
        if d > 0 and acur > aprev and anew <= acur:
            counters[1] += 1
        # clause 2: interior max bounded by endpoints
        if mx[d] > a0 and mx[d] > anew:
            counters[2] += 1
        # clause 5: one-sector starts are minimal
        if anew < a0:
            counters[5] += 1
        # clauses 3/4: endpoint shapes
        if l2[d + 1] == 0 and (start_is_A or start_is_B):
            ph_new = ph[d + 1]
            same = (ph_new == 1 and start_is_A) or (ph_new == 2 and start_is_B)
            if same:
                counters[4] += 1
            else:
                ok = 1 if const[d] == 1 and anew == a0 else 0
                if l1[d + 1] != n1:
                    ok = 0
                else:
                    for i in range(n1):
                        if u1[d + 1, i] != u1_0[i]:
                            ok = 0
                if d + 1 != 2 * a0 + 1:
                    ok = 0
                if ok == 0:
                    counters[3] += 1
                if hits < hitbuf.shape[0]:
                    hitbuf[hits] = d + 1
                hits += 1
        if d + 1 < maxd:
            nd = d + 1
            mx[nd] = mx[d] if mx[d] >= acur else acur
            const[nd] = 1 if const[d] == 1 and anew == a0 else 0
            ri[nd] = 0
            last[nd] = r
            d = nd
        elif d + 1 == maxd:
            # leaf: already checked above; do not expand further
            nd = d + 1
            mx[nd] = mx[d] if mx[d] >= acur else acur
            const[nd] = 1 if const[d] == 1 and anew == a0 else 0
            ri[nd] = 10
            last[nd] = r
            d = nd
    counters[0] += nodes
    counters[6] += hits
    return nodes


try:
    import numba

    kernel = numba.njit(cache=True)(_kernel)
except Exception:  # pragma: no cover - numba present in the supported env
    kernel = _kernel


INV_CHAR = {"a": "A", "A": "a", "b": "B", "B": "b"}
CODE = {"a": 2, "A": 3, "b": 4, "B": 5}


def reduced_words(alphabet: str, n: int):
    """All freely reduced words of length exactly n (as strings; capital
    letters are inverses)."""
    if n == 0:
        yield ""
        return
    for w in reduced_words(alphabet, n - 1):
        for ch in alphabet:
            if not w or w[-1] != INV_CHAR[ch]:
                yield w + ch


@dataclass
class PrimExhaustiveReport:
    max_content: int
    max_depth: int
    starts: int = 0
    nodes: int = 0
    hits: int = 0
    violations: dict = field(default_factory=lambda: {k: 0 for k in (1, 2, 3, 4, 5)})
    canonical_missing: list = field(default_factory=list)
    nonunique: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (all(v == 0 for v in self.violations.values())
                and not self.canonical_missing and not self.nonunique)


def run_prim_exhaustive(max_content: int = 4, max_depth: int = 12,
                        letters: str = "aAbB") -> PrimExhaustiveReport:
    """Exhaustively check the five sweep-lemma clauses over all start words
    q1 u p q2 / q1 p u q2 (both p-phases) with ||u|| <= max_content and all
    applicable reduced histories of length <= max_depth."""
    rep = PrimExhaustiveReport(max_content, max_depth)
    hitbuf = np.zeros(64, dtype=np.int64)
    for n in range(max_content + 1):
        for w in reduced_words(letters, n):
            codes = np.array([CODE[c] for c in w], dtype=np.int8)
            empty = np.zeros(0, dtype=np.int8)
            for ph0, u1c, u2c in ((1, codes, empty), (2, codes, empty),
                                  (1, empty, codes), (2, empty, codes)):
                if n == 0 and u1c is empty and u2c is codes:
                    continue  # duplicate of the empty (1, e, e) starts
                counters = np.zeros(8, dtype=np.int64)
                hitbuf[:] = 0
                kernel(u1c, len(u1c), u2c, len(u2c), ph0, max_depth, counters, hitbuf)
                rep.starts += 1
                rep.nodes += int(counters[0])
                rep.hits += int(counters[6])
                for k in (1, 2, 3, 4, 5):
                    rep.violations[k] += int(counters[k])
                if len(u2c) == 0:
                    canon = 2 * n + 1
                    nhits = int(counters[6])
                    if canon <= max_depth:
                        if nhits == 0:
                            rep.canonical_missing.append((ph0, w))
                        elif nhits > 1:
                            rep.nonunique.append((ph0, w, nhits))
    return rep


# ---------------------------------------------------------------------------
# Cross-check against the generic engine
# ---------------------------------------------------------------------------


def crosscheck_against_engine(samples: int, seed: int, max_content: int = 3,
                              max_depth: int = 10) -> int:
    """Random walks on the fast model are replayed through the generic
    engine; states must agree at every step.  Returns number of walks."""
    from .engine import apply_rule, parse_admissible
    from .library import PrimitiveSpec, make_primitive

    rng = random.Random(seed)
    m = make_primitive(PrimitiveSpec(("a", "b")))
    alph = m.hw.alphabet
    names = ["z1(a)", "z1(b)", "z1(a)^-1", "z1(b)^-1", "z12",
             "z2(a)", "z2(b)", "z2(a)^-1", "z2(b)^-1", "z12^-1"]

    def decode(codes):
        lut = {2: "a", 3: "a^-1", 4: "b", 5: "b^-1"}
        return " ".join(lut[c] for c in codes)

    def decode2(codes):
        lut = {2: "a'", 3: "a'^-1", 4: "b'", 5: "b'^-1"}
        return " ".join(lut[c] for c in codes)

    done = 0
    for _ in range(samples):
        n = rng.randrange(0, max_content + 1)
        w = ""
        for _ in range(n):
            choices = [c for c in "aAbB" if not w or w[-1] != INV_CHAR[c]]
            w += rng.choice(choices)
        ph = rng.choice((1, 2))
        u1 = [CODE[c] for c in w]
        u2: list[int] = []
        toks = f"q1 {decode(u1)} p{ph} q2".replace("  ", " ")
        aw = m.parse(toks)
        last = -1
        for _ in range(rng.randrange(0, max_depth)):
            opts = []
            for r in range(10):
                if RULE_PHASE[r] != ph:
                    continue
                if last >= 0 and INVR[last] == r:
                    continue
                if r in (4, 9) and u1:
                    continue
                opts.append(r)
            r = rng.choice(opts)
            if r == 4:
                ph = 2
            elif r == 9:
                ph = 1
            else:
                c = int(RULE_LET[r])
                if u1 and u1[-1] == (c ^ 1):
                    u1.pop()
                else:
                    u1.append(c)
                if u2 and u2[0] == c:
                    u2.pop(0)
                else:
                    u2.insert(0, c ^ 1)
            aw = apply_rule(m.rule(names[r]), aw)
            expect = f"q1 {decode(u1)} p{ph} {decode2(u2)} q2".replace("  ", " ").replace("  ", " ")
            if aw.tokens() != expect:
                raise AssertionError(f"fast model diverged: {aw.tokens()} != {expect}")
            last = r
        done += 1
    return done
