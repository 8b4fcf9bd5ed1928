"""Property checks for the elementary computation lemmas, with fuzzers.

Each check takes a concrete computation (or generates a batch of fuzzed
ones), verifies the lemma's conclusion, and returns a CheckReport whose
failures carry replayable witnesses (machine name, start word, history).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .engine import (
    AdmissibleWord,
    Computation,
    Hardware,
    NotApplicable,
    Rule,
    SMachine,
    apply_rule,
    make_rule,
    parse_admissible,
    run,
)
from .words import Q, A, WordError, invert, reduce_word


@dataclass
class CheckReport:
    lemma: str
    trials: int = 0
    failures: list[dict] = field(default_factory=list)
    params: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def merge(self, other: "CheckReport") -> "CheckReport":
        assert other.lemma == self.lemma
        return CheckReport(self.lemma, self.trials + other.trials,
                           self.failures + other.failures, self.params)

    def to_dict(self) -> dict:
        return {"lemma": self.lemma, "trials": self.trials, "passed": self.passed,
                "failures": self.failures[:20], "params": self.params}


def _witness(comp: Computation, note: str) -> dict:
    return {"note": note,
            "machine": comp.machine.name,
            "start": comp.w0.tokens(),
            "history": " ".join(comp.history_names())}


# ---------------------------------------------------------------------------
# Fuzzers
# ---------------------------------------------------------------------------


def fuzz_reduced_computation(m: SMachine, w0: AdmissibleWord, length: int,
                             rng: random.Random, shrink_bias: float = 0.3,
                             retries: int = 20) -> Computation:
    """A random reduced applicable history from w0, deterministic per seed.

    A fraction of the steps prefers rules that do not grow the a-length,
    to reach the lemmas' boundary cases.  Dead ends back off and retry.
    """
    rules = m.all_rules()
    for _ in range(retries):
        comp = Computation(m, w0)
        cur = w0
        last: Optional[Rule] = None
        ok = True
        for _ in range(length):
            options = []
            for r in rules:
                if last is not None and r is last.inverse():
                    continue
                try:
                    nxt = apply_rule(r, cur)
                except NotApplicable:
                    continue
                options.append((r, nxt))
            if not options:
                ok = False
                break
            if rng.random() < shrink_bias:
                best = min(o[1].a_len for o in options)
                options = [o for o in options if o[1].a_len == best]
            last, cur = options[rng.randrange(len(options))]
            comp.history.append(last)
            comp.trace.append(cur)
        if ok or comp.t > 0:
            return comp
    return Computation(m, w0)


def fuzz_admissible_word(m: SMachine, base_len: int, max_sector: int,
                         rng: random.Random, max_tries: int = 200) -> AdmissibleWord:
    """A random admissible word with a random (not necessarily standard)
    base of the requested length."""
    hw = m.hw
    alph = hw.alphabet
    for _ in range(max_tries):
        # random walk over state-letter occurrences obeying the sector shapes
        pi = rng.randrange(hw.n_parts)
        sign = rng.choice((1, -1))
        letters = [(rng.choice(hw.parts[pi]), sign)]
        for _ in range(base_len - 1):
            pi_, s_ = alph.group(letters[-1][0]), letters[-1][1]
            moves = []
            if s_ > 0 and pi_ + 1 < hw.n_parts:
                moves.append(("next", 1))
            if s_ < 0 and pi_ > 0:
                moves.append(("prev", -1))
            moves.append(("flip", -s_))
            kind, ns = moves[rng.randrange(len(moves))]
            if kind == "next":
                letters.append((rng.choice(hw.parts[pi_ + 1]), 1))
            elif kind == "prev":
                letters.append((rng.choice(hw.parts[pi_ - 1]), -1))
            else:
                letters.append((letters[-1][0], ns))
        word: list[int] = []
        ok = True
        for k, (lid, s) in enumerate(letters):
            word.append(lid * s)
            if k == len(letters) - 1:
                break
            nid, nsg = letters[k + 1]
            tape = _sector_tape(alph, hw, lid, s, nid, nsg)
            if tape is None:
                ok = False
                break
            n = rng.randrange(max_sector + 1)
            if tape >= len(hw.tapes) or (n > 0 and not hw.tapes[tape]):
                n = 0
            seg: list[int] = []
            for _ in range(n):
                x = rng.choice(hw.tapes[tape]) * rng.choice((1, -1))
                if seg and seg[-1] == -x:
                    continue
                seg.append(x)
            if (lid * s, nid * nsg) == (word[-1], -word[-1]) and not seg:
                ok = False  # q q^-1 would not be reduced
                break
            word.extend(seg)
        if not ok:
            continue
        try:
            return parse_admissible(hw, tuple(word))
        except Exception:
            continue
    raise WordError("could not build an admissible word with the requested base shape")


def _sector_tape(alph, hw, lid, s, nid, nsg) -> Optional[int]:
    lp, rp = alph.group(lid), alph.group(nid)
    if s > 0 and nsg > 0:
        return lp if rp == lp + 1 else None
    if s < 0 and nsg < 0:
        return rp if lp == rp + 1 else None
    if s > 0 and nsg < 0:
        return lp if (nid == lid and lp < len(hw.tapes)) else None
    return lp - 1 if (nid == lid and lp > 0) else None


# ---------------------------------------------------------------------------
# Machines for the one-sector lemmas
# ---------------------------------------------------------------------------


def left_multiplier_machine(k: int = 3) -> tuple[SMachine, dict[str, str]]:
    """Two-part machine whose rule t_c multiplies the sector by the letter
    c on the left; returns the rule->letter bijection."""
    letters = [f"c{i}" for i in range(k)]
    hw = Hardware([("Q0", ["q0"]), ("Q1", ["q1"])], [("Y1", letters)])
    rules = [make_rule(hw, f"t{c}", [("q0", f"q0 {c}"), ("q1", "q1")]) for c in letters]
    return SMachine(hw, rules, name="gen-left"), {f"t{c}": c for c in letters}


def right_multiplier_machine(k: int = 3) -> tuple[SMachine, dict[str, str]]:
    letters = [f"c{i}" for i in range(k)]
    hw = Hardware([("Q0", ["q0"]), ("Q1", ["q1"])], [("Y1", letters)])
    rules = [make_rule(hw, f"t{c}", [("q0", "q0"), ("q1", f"{c} q1")]) for c in letters]
    return SMachine(hw, rules, name="gen-right"), {f"t{c}": c for c in letters}


def two_sided_machine(k: int = 2) -> SMachine:
    """Rules multiply the sector by one letter on each side; the left and
    right letters come from disjoint halves of the alphabet."""
    left = [f"l{i}" for i in range(k)]
    right = [f"r{i}" for i in range(k)]
    hw = Hardware([("Q0", ["q0"]), ("Q1", ["q1"])], [("Y1", left + right)])
    rules = [make_rule(hw, f"t{i}", [("q0", f"q0 {left[i]}"), (f"{right[i]}^-1 q1", "q1")])
             for i in range(k)]
    return SMachine(hw, rules, name="gen1")


def conjugating_machine(k: int = 3) -> SMachine:
    """Rules of the shape q -> a q' b (distinct right letters b) acting on
    words q u q^-1; a flanking part hosts the left letters' sector."""
    bletters = [f"b{fam}{i}" for fam in "tsu" for i in range(k)]
    hw = Hardware([("QL", ["d"]), ("Q0", [f"q{i}" for i in range(3)]), ("Q1", ["e"])],
                  [("YA", [f"a{i}" for i in range(k)]), ("YB", bletters)])
    rules = []
    for i in range(k):
        rules.append(make_rule(hw, f"t{i}", [("d", "d"), ("q0", f"a{i} q1 bt{i}"), ("e", "e")]))
        rules.append(make_rule(hw, f"s{i}", [("d", "d"), ("q1", f"a{i} q2 bs{i}"), ("e", "e")]))
        rules.append(make_rule(hw, f"u{i}", [("d", "d"), ("q2", f"a{i} q0 bu{i}"), ("e", "e")]))
    return SMachine(hw, rules, name="gen2")


# ---------------------------------------------------------------------------
# Lemma checks
# ---------------------------------------------------------------------------


def check_gen(comp: Computation, rule_letter: dict[str, str], side: str = "left") -> CheckReport:
    """One-sector computations whose rules multiply the sector by distinct
    letters on one side: the history is a letter copy of the reduced form
    of u'u^-1 (read right to left) or u^-1 u' (left to right), its length
    is at most ||u|| + ||u'||, and intermediate sectors never exceed
    max(||u||, ||u'||)."""
    rep = CheckReport("gen", trials=1, params={"side": side})
    m = comp.machine
    alph = m.hw.alphabet
    if any(len(x.qpos) != 2 for x in comp.trace):
        rep.failures.append(_witness(comp, "base is not two-letter"))
        return rep
    u = comp.w0.sector(0)
    u2 = comp.w_t.sector(0)
    names = []
    for r in comp.history:
        nm = r.name[:-3] if r.name.endswith("^-1") else r.name
        lid = alph.id_of(rule_letter[nm])
        names.append(lid if not r.name.endswith("^-1") else -lid)
    if side == "left":
        expected = list(reversed(reduce_word(tuple(u2) + invert(u))))
    else:
        expected = list(reduce_word(invert(u) + tuple(u2)))
    if names != expected:
        rep.failures.append(_witness(comp, f"history is not the copy of the reduced form"))
    if comp.t > len(u) + len(u2):
        rep.failures.append(_witness(comp, f"||H||={comp.t} > ||u||+||u'||={len(u)+len(u2)}"))
    bound = max(len(u), len(u2))
    for i, w in enumerate(comp.trace):
        if len(w.sector(0)) > bound:
            rep.failures.append(_witness(comp, f"||u''||>{bound} at step {i}"))
            break
    if not comp.t and u != u2:
        rep.failures.append(_witness(comp, "empty history but different sectors"))
    return rep


def check_gen1(comp: Computation) -> CheckReport:
    """Rules multiplying the sector by a letter on each side from disjoint
    alphabets: ||W_j|| <= max(||W_0||, ||W_t||) and 2||H|| <= ||u||+||u'||."""
    rep = CheckReport("gen1", trials=1)
    u, u2 = comp.w0.sector(0), comp.w_t.sector(0)
    if 2 * comp.t > len(u) + len(u2):
        rep.failures.append(_witness(comp, f"2||H||={2*comp.t} > {len(u)+len(u2)}"))
    bound = max(len(comp.w0.word), len(comp.w_t.word))
    for i, w in enumerate(comp.trace):
        if len(w.word) > bound:
            rep.failures.append(_witness(comp, f"||W_{i}|| > max of endpoints"))
            break
    return rep


def factor_history(names: list[str], max_h2: int, max_h1: int, max_h3: int):
    """Search a factorization H = H1 H2^k H3 within the given bounds."""
    n = len(names)
    for h1 in range(min(max_h1, n) + 1):
        for h2 in range(min(max_h2, n - h1), 0, -1):
            block = names[h1:h1 + h2]
            k = 0
            pos = h1
            while pos + h2 <= n and names[pos:pos + h2] == block:
                k += 1
                pos += h2
            if n - pos <= max_h3:
                return (h1, h2, k, n - pos)
        if n - h1 <= max_h3:
            return (h1, 0, 0, n - h1)
    return None


def check_gen2(comp: Computation) -> CheckReport:
    """Conjugating computations on base Q Q^-1: the history factors as
    H1 H2^k H3 with ||H2|| <= min(||u||,||u'||), ||H1|| <= ||u||/2,
    ||H3|| <= ||u'||/2; and (the companion statement) the a-length never
    exceeds max(||u||, ||u'||)."""
    rep = CheckReport("gen2", trials=1)
    u, u2 = comp.w0.sector(0), comp.w_t.sector(0)
    if not u:
        rep.failures.append(_witness(comp, "u must be nontrivial"))
        return rep
    names = [r.name for r in comp.history]
    f = factor_history(names, min(len(u), len(u2)), len(u) // 2, len(u2) // 2)
    if f is None:
        rep.failures.append(_witness(comp, "no H1 H2^k H3 factorization within bounds"))
    bound = max(len(u), len(u2))
    for i, w in enumerate(comp.trace):
        if w.a_len > bound:
            rep.failures.append(_witness(comp, f"|W_{i}|_a > max(||u||,||u'||)"))
            break
    return rep


check_gen3 = check_gen2   # the a-length clause is verified alongside


# ---------------------------------------------------------------------------
# Batch drivers
# ---------------------------------------------------------------------------


def _random_sector(hw: Hardware, tape: int, n: int, rng: random.Random) -> tuple[int, ...]:
    out: list[int] = []
    while len(out) < n:
        x = rng.choice(hw.tapes[tape]) * rng.choice((1, -1))
        if out and out[-1] == -x:
            continue
        out.append(x)
    return tuple(out)


def run_gen_batch(trials: int, seed: int, max_len: int = 14) -> CheckReport:
    rng = random.Random(seed)
    m, bij = left_multiplier_machine()
    mr, bij_r = right_multiplier_machine()
    out = CheckReport("gen", params={"trials": trials, "seed": seed})
    for i in range(trials):
        left = i % 2 == 0
        mm, bb = (m, bij) if left else (mr, bij_r)
        u = _random_sector(mm.hw, 0, rng.randrange(0, 5), rng)
        w0 = parse_admissible(mm.hw, (mm.hw.alphabet.id_of("q0"),) + u
                              + (mm.hw.alphabet.id_of("q1"),))
        comp = fuzz_reduced_computation(mm, w0, rng.randrange(0, max_len), rng)
        out = out.merge(check_gen(comp, bb, "left" if left else "right"))
        if not out.passed:
            break
    return out


def run_gen1_batch(trials: int, seed: int, max_len: int = 12) -> CheckReport:
    rng = random.Random(seed)
    m = two_sided_machine()
    out = CheckReport("gen1", params={"trials": trials, "seed": seed})
    for _ in range(trials):
        u = _random_sector(m.hw, 0, rng.randrange(0, 5), rng)
        w0 = parse_admissible(m.hw, (m.hw.alphabet.id_of("q0"),) + u
                              + (m.hw.alphabet.id_of("q1"),))
        comp = fuzz_reduced_computation(m, w0, rng.randrange(0, max_len), rng)
        out = out.merge(check_gen1(comp))
        if not out.passed:
            break
    return out


def run_gen2_batch(trials: int, seed: int, max_len: int = 10) -> CheckReport:
    rng = random.Random(seed)
    m = conjugating_machine()
    alph = m.hw.alphabet
    out = CheckReport("gen2", params={"trials": trials, "seed": seed})
    qs = [alph.id_of(f"q{i}") for i in range(3)]
    for _ in range(trials):
        q = rng.choice(qs)
        u = _random_sector(m.hw, 1, rng.randrange(1, 5), rng)
        w0 = parse_admissible(m.hw, (q,) + u + (-q,))
        comp = fuzz_reduced_computation(m, w0, rng.randrange(0, max_len), rng)
        out = out.merge(check_gen2(comp))
        if not out.passed:
            break
    return out


# ---------------------------------------------------------------------------
# Registry for the CLI and the service
# ---------------------------------------------------------------------------


def _registry() -> dict[str, Callable[[int, int, int], CheckReport]]:
    from . import suites
    return {
        "gen": run_gen_batch,
        "gen1": run_gen1_batch,
        "gen2": run_gen2_batch,
        "gen3": run_gen2_batch,
        "prim1": suites.run_prim_fuzz_clause(1),
        "prim2": suites.run_prim_fuzz_clause(2),
        "prim5": suites.run_prim_fuzz_clause(5),
        "ewe": suites.run_ewe,
        "hprim": suites.run_hprim,
        "w": suites.run_w,
        "three": suites.run_three,
        "wi": suites.run_wi,
        "9": suites.run_nine,
        "9d": suites.run_nine_d5,
        "qqiv": suites.run_qqiv,
        "red": suites.run_red,
    }


def available_checks() -> list[str]:
    return sorted(_registry())


def run_check(lemma: str, trials: int, seed: int, max_len: int = 12) -> CheckReport:
    reg = _registry()
    if lemma not in reg:
        raise WordError(f"unknown lemma id {lemma!r}; known: {', '.join(sorted(reg))}")
    return reg[lemma](trials, seed, max_len)
