"""Fuzz suites for the machine-specific computation lemmas: primitive
sweepers, historical sectors, division machines, and the biprimitive
projection."""

from __future__ import annotations

import random
from typing import Callable

from .engine import (
    Computation,
    NotApplicable,
    Rule,
    SMachine,
    applicable,
    apply_rule,
    make_rule,
    parse_admissible,
    run,
)
from .lemmalab import (
    CheckReport,
    _witness,
    fuzz_admissible_word,
    fuzz_reduced_computation,
)
from .library import (
    PrimitiveSpec,
    make_biprimitive,
    make_division,
    make_primitive,
    iota,
    pi_history,
    pi_word,
)
from .transforms import add_historical_sectors, compose_primitives
from .words import Q


def _pr(alpha=("a", "b")) -> SMachine:
    return make_primitive(PrimitiveSpec(tuple(alpha)))


def _random_content(m, tape, n, rng):
    out = []
    while len(out) < n:
        x = rng.choice(m.hw.tapes[tape]) * rng.choice((1, -1))
        if out and out[-1] == -x:
            continue
        out.append(x)
    return tuple(out)


def _pr_standard_start(m: SMachine, rng: random.Random):
    alph = m.hw.alphabet
    p = rng.choice(("p1", "p2"))
    u = _random_content(m, 0, rng.randrange(0, 4), rng)
    v = _random_content(m, 1, rng.randrange(0, 4), rng)
    word = (alph.id_of("q1"),) + u + (alph.id_of(p),) + v + (alph.id_of("q2"),)
    return parse_admissible(m.hw, word)


def check_prim_clauses(comp: Computation, clauses=(1, 2, 5)) -> CheckReport:
    """Clauses of the sweep lemma on a standard-base computation:
    (1) once the a-length grows it keeps growing, (2) interior a-lengths
    never exceed both endpoints, (5) one-sector starts are minimal."""
    rep = CheckReport("prim", trials=1)
    alens = [w.a_len for w in comp.trace]
    if 1 in clauses:
        for i in range(1, len(alens) - 1):
            if alens[i] > alens[i - 1] and alens[i + 1] <= alens[i]:
                rep.failures.append(_witness(comp, f"clause 1 fails at step {i}"))
                break
    if 2 in clauses:
        # every prefix is a computation, so check all of them
        run_max = 0
        for t in range(1, len(alens)):
            if run_max > max(alens[0], alens[t]):
                rep.failures.append(_witness(comp, f"clause 2 fails for prefix {t}"))
                break
            run_max = max(run_max, alens[t])
    if 5 in clauses and _one_sector_start(comp.w0):
        if any(a < alens[0] for a in alens):
            rep.failures.append(_witness(comp, "clause 5 fails"))
    return rep


def _one_sector_start(w) -> bool:
    if len(w.qpos) != 3:
        return False
    return len(w.sector(0)) == 0 or len(w.sector(1)) == 0


def run_prim_fuzz_clause(clause: int) -> Callable[[int, int, int], CheckReport]:
    def driver(trials: int, seed: int, max_len: int = 12) -> CheckReport:
        rng = random.Random(seed)
        m = _pr()
        out = CheckReport("prim", params={"clause": clause, "seed": seed})
        for _ in range(trials):
            w0 = _pr_standard_start(m, rng)
            comp = fuzz_reduced_computation(m, w0, rng.randrange(1, max_len), rng)
            out = out.merge(check_prim_clauses(comp, (clause,)))
            if not out.passed:
                break
        return out
    return driver


def run_ewe(trials: int, seed: int, max_len: int = 10) -> CheckReport:
    """Mirror-base starts q p u p^-1 q^-1 and q^-1 p^-1 v p q: the a-length
    never drops below the start."""
    rng = random.Random(seed)
    m = _pr()
    alph = m.hw.alphabet
    out = CheckReport("ewe", params={"seed": seed})
    for _ in range(trials):
        p = alph.id_of(rng.choice(("p1", "p2")))
        if rng.random() < 0.5:
            q = alph.id_of("q1")
            u = _random_content(m, 1, rng.randrange(1, 4), rng)
            word = (q, p) + u + (-p, -q)
        else:
            q = alph.id_of("q2")
            u = _random_content(m, 0, rng.randrange(1, 4), rng)
            word = (-q, -p) + u + (p, q)
        w0 = parse_admissible(m.hw, word)
        comp = fuzz_reduced_computation(m, w0, rng.randrange(1, max_len), rng)
        if any(w.a_len < w0.a_len for w in comp.trace):
            out.failures.append(_witness(comp, "a-length dropped below start"))
            break
        out.trials += 1
    return out


def run_hprim(trials: int, seed: int, max_len: int = 14) -> CheckReport:
    """Compositions of primitive machines: t <= ||W_0|| + ||W_t|| - 4 and
    interior a-lengths bounded by the endpoint maximum."""
    rng = random.Random(seed)
    machines = [
        compose_primitives([PrimitiveSpec(("a",)), PrimitiveSpec(("a",))], "parallel"),
        compose_primitives([PrimitiveSpec(("a", "b")), PrimitiveSpec(("a", "b"))], "parallel"),
        compose_primitives([PrimitiveSpec(("a",)), PrimitiveSpec(("a",))], "sequential"),
    ]
    out = CheckReport("hprim", params={"seed": seed})
    for _ in range(trials):
        m = machines[rng.randrange(len(machines))]
        w0 = _standard_composition_start(m, rng)
        comp = fuzz_reduced_computation(m, w0, rng.randrange(1, max_len), rng)
        if comp.t > len(comp.w0.word) + len(comp.w_t.word) - 4:
            out.failures.append(_witness(comp, "t > ||W_0||+||W_t||-4"))
            break
        bound = max(comp.w0.a_len, comp.w_t.a_len)
        mx = 0
        bad = False
        for t in range(1, comp.t + 1):
            if mx > max(comp.w0.a_len, comp.trace[t].a_len):
                out.failures.append(_witness(comp, "interior a-length exceeds endpoints"))
                bad = True
                break
            mx = max(mx, comp.trace[t].a_len)
        if bad:
            break
        out.trials += 1
    return out


def _standard_composition_start(m: SMachine, rng: random.Random):
    pm = m.meta["primitive"]
    alph = m.hw.alphabet
    toks = ["q0"]
    for c, comp in enumerate(pm["components"], 1):
        stage = "p1" if pm["mode"] == "parallel" else \
            ("p1" if c == 1 else "p0")
        u = _random_content(m, 2 * c - 2, rng.randrange(0, 3), rng)
        toks.extend(m.hw.alphabet.name(x) if x > 0 else m.hw.alphabet.name(x) + "^-1"
                    for x in u)
        toks.append(f"{stage}.{c}")
        v = _random_content(m, 2 * c - 1, rng.randrange(0, 3), rng)
        toks.extend(m.hw.alphabet.name(x) if x > 0 else m.hw.alphabet.name(x) + "^-1"
                    for x in v)
        toks.append(f"q{c}")
    return m.parse(" ".join(toks))


def _toy_machine() -> SMachine:
    """Small three-part machine used for the historical-sector suites."""
    from .engine import Hardware
    hw = Hardware([("Q0", ["q0"]), ("Q1", ["q1", "q1'"]), ("Q2", ["q2"])],
                  [("Y1", ["a"]), ("Y2", ["b"])])
    rules = [
        make_rule(hw, "t1", [("q0", "q0 a"), ("q1", "q1'"), ("q2", "q2")]),
        make_rule(hw, "t2", [("q0 a", "q0"), ("q1'", "q1 b"), ("q2", "q2")]),
        make_rule(hw, "t3", [("q0", "q0"), ("a q1", "q1"), ("q2", "q2")]),
    ]
    return SMachine(hw, rules, name="toy3")


def toy_m2() -> SMachine:
    return add_historical_sectors(_toy_machine())


def _free_toy_machine() -> SMachine:
    """Like the toy machine but with singleton state parts, so every rule
    applies to every admissible word; lets the periodic-history suite run
    arbitrary reduced histories."""
    from .engine import Hardware
    hw = Hardware([("Q0", ["q0"]), ("Q1", ["q1"]), ("Q2", ["q2"])],
                  [("Y1", ["a"]), ("Y2", ["b"])])
    rules = [
        make_rule(hw, "t1", [("q0", "q0 a"), ("q1", "q1"), ("q2", "q2")]),
        make_rule(hw, "t2", [("q0", "q0"), ("q1", "q1 b"), ("q2", "q2")]),
    ]
    return SMachine(hw, rules, name="toy-free")


def toy_m2_free() -> SMachine:
    return add_historical_sectors(_free_toy_machine())


def run_w(trials: int, seed: int, max_len: int = 12) -> CheckReport:
    """Historical-sector computations with two-letter base and one-alphabet
    start: ||H|| <= |W_t|_a and |W_0|_a <= |W_t|_a."""
    rng = random.Random(seed)
    m2 = toy_m2()
    alph = m2.hw.alphabet
    xi = m2.hw.tape_names.index("X1")
    lefts = [x for x in m2.hw.tapes[xi] if alph.name(x).endswith("l]")]
    rights = [x for x in m2.hw.tapes[xi] if alph.name(x).endswith("r]")]
    out = CheckReport("w", params={"seed": seed})
    for _ in range(trials):
        side = lefts if rng.random() < 0.5 else rights
        u = []
        for _ in range(rng.randrange(0, 4)):
            x = rng.choice(side) * rng.choice((1, -1))
            if u and u[-1] == -x:
                continue
            u.append(x)
        ql = rng.choice(("q1.l", "q1'.l"))
        qr = rng.choice(("q1.r", "q1'.r"))
        w0 = parse_admissible(m2.hw, (alph.id_of(ql),) + tuple(u) + (alph.id_of(qr),))
        comp = fuzz_reduced_computation(m2, w0, rng.randrange(1, max_len), rng)
        if comp.t > comp.w_t.a_len or comp.w0.a_len > comp.w_t.a_len:
            out.failures.append(_witness(comp, "||H|| or |W_0|_a exceeds |W_t|_a"))
            break
        out.trials += 1
    return out


def run_three(trials: int, seed: int, max_len: int = 0) -> CheckReport:
    """Every admissible word with base length >= 3 has a historical sector."""
    rng = random.Random(seed)
    m2 = toy_m2()
    out = CheckReport("three", params={"seed": seed})
    for _ in range(trials):
        aw = fuzz_admissible_word(m2, rng.randrange(3, 7), 2, rng)
        hist = any(m2.hw.tape_names[t].startswith("X") for t in aw.sector_tape)
        if not hist:
            out.failures.append({"note": "no historical sector", "word": aw.tokens(),
                                 "base": aw.base_names()})
            break
        out.trials += 1
    return out


def run_wi(trials: int, seed: int, max_len: int = 8) -> CheckReport:
    """Two-letter-base computations with periodic history H1 H2^k H3:
    every sector length stays below ||w_0||+||w_t||+2h1+3h2+2h3."""
    rng = random.Random(seed)
    m2 = toy_m2_free()
    alph = m2.hw.alphabet
    rules = [r.name for r in m2.positive_rules]
    rules += [r + "^-1" for r in rules]
    out = CheckReport("wi", params={"seed": seed})

    def rand_hist(n):
        names: list[str] = []
        while len(names) < n:
            cand = rng.choice(rules)
            if names and _inv(cand) == names[-1]:
                continue
            names.append(cand)
        return names

    def _inv(nm):
        return nm[:-3] if nm.endswith("^-1") else nm + "^-1"

    for _ in range(trials):
        h1 = rand_hist(rng.randrange(0, max_len))
        h2 = rand_hist(rng.randrange(1, max_len))
        h3 = rand_hist(rng.randrange(0, max_len))
        k = rng.randrange(0, 4)
        hist = h1 + h2 * k + h3
        # keep only reduced concatenations
        if any(_inv(a) == b for a, b in zip(hist, hist[1:])):
            continue
        xi = m2.hw.tape_names.index("X1")
        u = []
        for _ in range(rng.randrange(0, 3)):
            x = rng.choice(m2.hw.tapes[xi]) * rng.choice((1, -1))
            if u and u[-1] == -x:
                continue
            u.append(x)
        try:
            w0 = parse_admissible(m2.hw, (alph.id_of("q1.l"),) + tuple(u) + (alph.id_of("q1.r"),))
            comp = run(m2, w0, hist)
        except Exception:
            continue
        bound = (len(comp.w0.sector(0)) + len(comp.w_t.sector(0))
                 + 2 * len(h1) + 3 * len(h2) + 2 * len(h3))
        if any(len(w.sector(0)) > bound for w in comp.trace):
            out.failures.append(_witness(comp, f"sector exceeds periodic bound {bound}"))
            break
        out.trials += 1
    return out


def _nine_driver(lemma: str, m2: SMachine):
    def driver(trials: int, seed: int, max_len: int = 10) -> CheckReport:
        rng = random.Random(seed)
        out = CheckReport(lemma, params={"seed": seed})
        for _ in range(trials):
            try:
                aw = fuzz_admissible_word(m2, rng.randrange(3, 6), 2, rng)
            except Exception:
                continue
            comp = fuzz_reduced_computation(m2, aw, rng.randrange(1, max_len), rng)
            for t in range(comp.t + 1):
                bound = 9 * (comp.w0.a_len + comp.trace[t].a_len)
                if any(comp.trace[i].a_len > bound for i in range(t + 1)):
                    out.failures.append(_witness(comp, "a-length exceeds 9(|W_0|+|W_t|)"))
                    return out
            out.trials += 1
        return out
    return driver


def run_nine(trials: int, seed: int, max_len: int = 10) -> CheckReport:
    return _nine_driver("9", toy_m2())(trials, seed, max_len)


def run_nine_d5(trials: int, seed: int, max_len: int = 10) -> CheckReport:
    return _nine_driver("9d", make_division(5))(trials, seed, max_len)


def run_qqiv(trials: int, seed: int, max_len: int = 0) -> CheckReport:
    """If a rule locks the sector between parts i and i+1, no admissible
    word in its domain has base subwords Q_i Q_i^-1 or Q_{i+1}^-1 Q_{i+1}."""
    rng = random.Random(seed)
    d1 = make_division(1)
    locked_rules = []
    for r in d1.all_rules():
        for t in range(len(d1.hw.tapes)):
            if r.locks(t):
                locked_rules.append((r, t))
    out = CheckReport("qqiv", params={"seed": seed})
    for _ in range(trials):
        try:
            aw = fuzz_admissible_word(d1, rng.randrange(2, 6), 2, rng)
        except Exception:
            continue
        for r, t in locked_rules:
            if not applicable(r, aw):
                continue
            base = aw.base
            for (p1, s1), (p2, s2) in zip(base, base[1:]):
                if (p1, s1, p2, s2) == (t, 1, t, -1) or (p1, s1, p2, s2) == (t + 1, -1, t + 1, 1):
                    out.failures.append({"note": f"{r.name} admits base {aw.base_names()}",
                                         "word": aw.tokens()})
                    return out
        out.trials += 1
    return out


def run_red(trials: int, seed: int, max_len: int = 30) -> CheckReport:
    """Projections of reduced biprimitive computations are reduced."""
    rng = random.Random(seed)
    pr = make_primitive(PrimitiveSpec(("a",)))
    bi = make_biprimitive(pr)
    out = CheckReport("red", params={"seed": seed})
    for _ in range(trials):
        u = _random_content(pr, 0, rng.randrange(0, 3), rng)
        w = parse_admissible(pr.hw, (pr.hw.alphabet.id_of("q1"),) + u
                             + (pr.hw.alphabet.id_of("p1"), pr.hw.alphabet.id_of("q2")))
        comp = fuzz_reduced_computation(bi, iota(bi, w), rng.randrange(1, max_len), rng)
        names = pi_history(bi, comp.history)
        for a, b in zip(names, names[1:]):
            if a == (b[:-3] if b.endswith("^-1") else b + "^-1"):
                out.failures.append(_witness(comp, "projected history not reduced"))
                return out
        out.trials += 1
    return out
