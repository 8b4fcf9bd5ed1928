"""Concrete machines: primitive sweepers, division machines, Z-machines,
and the biprimitive composition.

Primitive machines have a three-letter base Q1 P Q2; the middle letter
sweeps a sector, converting between an alphabet and its primed copy.
Division machines check divisibility of one tape exponent by (twice,
iterated to cubes) another.  Z-machines are four-letter primitive
sweepers used to slow a primitive machine down to quadratic time in the
biprimitive composition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .engine import (
    AdmissibleWord,
    Computation,
    Hardware,
    Rule,
    SMachine,
    apply_rule,
    make_rule,
    parse_admissible,
    run,
)
from .words import WordError, invert, reduce_word


@dataclass(frozen=True)
class PrimitiveSpec:
    """Sector alphabet and sweep direction of one primitive machine."""

    alphabet: tuple[str, ...]
    direction: str = "left"   # "left" = Pr (p runs toward Q1), "right" = Pr*
    tag: str = ""             # suffix for letter names when composing

    def __post_init__(self):
        if not self.alphabet:
            raise WordError("primitive machine needs a nonempty alphabet")
        if self.direction not in ("left", "right"):
            raise WordError(f"bad direction {self.direction!r}")


def _primed(names: Sequence[str]) -> list[str]:
    return [n + "'" for n in names]


def make_primitive(spec: PrimitiveSpec, name: str = "Pr") -> SMachine:
    """Three-part machine whose middle letter sweeps one sector and back.

    For direction "left" the content starts in the Q1P-sector: p1 walks
    left converting letters to their primed copies in the PQ2-sector,
    flips to p2 against q1 (locking Q1P), and walks back.  Direction
    "right" mirrors this with content in the PQ2-sector.
    """
    t = spec.tag
    q1, p1, p2, q2 = "q1" + t, "p1" + t, "p2" + t, "q2" + t
    base = [a + t for a in spec.alphabet]
    copy = _primed(base)
    if spec.direction == "left":
        tapes = [("Y1" + t, base), ("Y2" + t, copy)]
    else:
        tapes = [("Y1" + t, copy), ("Y2" + t, base)]
    hw = Hardware([("Q1" + t, [q1]), ("P" + t, [p1, p2]), ("Q2" + t, [q2])], tapes)
    rules = []
    if spec.direction == "left":
        for a, ap in zip(base, copy):
            rules.append(make_rule(hw, f"z1({a})",
                                   [(q1, q1), (p1, f"{a}^-1 {p1} {ap}"), (q2, q2)]))
        rules.append(make_rule(hw, "z12", [(q1, q1), (p1, p2), (q2, q2)],
                               {"Y1" + t: []}))
        for a, ap in zip(base, copy):
            rules.append(make_rule(hw, f"z2({a})",
                                   [(q1, q1), (p2, f"{a} {p2} {ap}^-1"), (q2, q2)]))
    else:
        for a, ap in zip(base, copy):
            rules.append(make_rule(hw, f"z1({a})",
                                   [(q1, q1), (p1, f"{ap} {p1} {a}^-1"), (q2, q2)]))
        rules.append(make_rule(hw, "z12", [(q1, q1), (p1, p2), (q2, q2)],
                               {"Y2" + t: []}))
        for a, ap in zip(base, copy):
            rules.append(make_rule(hw, f"z2({a})",
                                   [(q1, q1), (p2, f"{ap}^-1 {p2} {a}"), (q2, q2)]))
    meta = {"primitive": {"mode": "single", "tag": t, "direction": spec.direction,
                          "components": [{"parts": [0, 1, 2], "direction": spec.direction,
                                          "alphabet": base, "copy": copy}]}}
    return SMachine(hw, rules, name=name, meta=meta)


def primitive_canonical_history(m: SMachine, content: Sequence[tuple[str, int]]) -> list[str]:
    """The forced 2k+1 history sweeping signed ``content`` once.

    For a left machine this drives q1 u p1 q2 to q1 u p2 q2.
    """
    comp = m.meta["primitive"]["components"][0]
    direction = comp["direction"]
    if direction == "left":
        first = [f"z1({a})" + ("" if e > 0 else "^-1") for a, e in reversed(content)]
        second = [f"z2({a})" + ("" if e > 0 else "^-1") for a, e in content]
    else:
        first = [f"z1({a})" + ("" if e > 0 else "^-1") for a, e in content]
        second = [f"z2({a})" + ("" if e > 0 else "^-1") for a, e in reversed(content)]
    return first + ["z12"] + second


def pr_start(m: SMachine, content: Sequence[tuple[str, int]], state: str = "p1") -> AdmissibleWord:
    """q1 u p q2 (left machines) or q1 p u q2 (right machines)."""
    t = m.meta["primitive"]["tag"]
    hw = m.hw
    u = " ".join(a + ("" if e > 0 else "^-1") for a, e in content)
    if m.meta["primitive"]["direction"] == "left":
        return m.parse(f"q1{t} {u} {state}{t} q2{t}".replace("  ", " "))
    return m.parse(f"q1{t} {state}{t} {u} q2{t}".replace("  ", " "))


# ---------------------------------------------------------------------------
# Division machines D1..D5
# ---------------------------------------------------------------------------


def make_division(stage: int) -> SMachine:
    """Division machines.

    D1 checks 2k | l on input s a^k s1 t1 b^l t'; D2 adds a counting
    sector T2T3; D3 chains three divisibility phases; D4 adds the eraser
    tau and the stop rule tau0; D5 wraps D4 in historical sectors.
    """
    if stage not in (1, 2, 3, 4, 5):
        raise WordError(f"division stage must be 1..5, got {stage}")
    if stage == 1:
        return _make_d1()
    if stage == 2:
        return _make_d2()
    m4 = _make_d34(with_eraser=(stage >= 4))
    if stage <= 4:
        return m4
    from .transforms import add_historical_sectors
    m5 = add_historical_sectors(m4)
    m5.name = "D5"
    return m5


def _make_d1() -> SMachine:
    hw = Hardware(
        [("S1", ["s"]), ("S2", ["s1", "s2", "s3"]), ("T1", ["t1", "t2"]), ("T2", ["t'"])],
        [("A1", ["a"]), ("A2", ["a'"]), ("B", ["b"])],
    )
    rules = [
        make_rule(hw, "tau1", [("s", "s"), ("s1", "a^-1 s1 a'"), ("t1", "t1 b^-1"), ("t'", "t'")]),
        make_rule(hw, "tau12", [("s", "s"), ("s1", "s2"), ("t1", "t1"), ("t'", "t'")], {"A1": []}),
        make_rule(hw, "tau2", [("s", "s"), ("s2", "a s2 a'^-1"), ("t1", "t1 b^-1"), ("t'", "t'")]),
        make_rule(hw, "tau21", [("s", "s"), ("s2", "s1"), ("t1", "t1"), ("t'", "t'")], {"A2": []}),
        make_rule(hw, "tau3", [("s", "s"), ("s1", "s3"), ("t1", "t2"), ("t'", "t'")],
                  {"A2": [], "B": []}),
    ]
    return SMachine(hw, rules, name="D1", input_sectors=[0, 2])


def _make_d2() -> SMachine:
    hw = Hardware(
        [("S1", ["s"]), ("S2", ["s1", "s2", "s3"]), ("T1", ["t1", "t2"]),
         ("T2", ["t'"]), ("T3", ["t''"])],
        [("A1", ["a"]), ("A2", ["a'"]), ("B", ["b"]), ("C", ["c"])],
    )
    rules = [
        make_rule(hw, "tau1", [("s", "s"), ("s1", "a^-1 s1 a'"), ("t1", "t1 b^-1"),
                               ("t'", "t'"), ("t''", "t''")]),
        make_rule(hw, "tau12", [("s", "s"), ("s1", "s2"), ("t1", "t1"),
                                ("t'", "t'"), ("t''", "t''")], {"A1": []}),
        make_rule(hw, "tau2", [("s", "s"), ("s2", "a s2 a'^-1"), ("t1", "t1 b^-1"),
                               ("t'", "t'"), ("t''", "t''")]),
        make_rule(hw, "tau21", [("s", "s"), ("s2", "s1"), ("t1", "t1"),
                                ("t'", "t' c"), ("t''", "t''")], {"A2": []}),
        make_rule(hw, "tau3", [("s", "s"), ("s1", "s3"), ("t1", "t2"),
                               ("t'", "t'"), ("t''", "t''")], {"A2": [], "B": []}),
    ]
    return SMachine(hw, rules, name="D2", input_sectors=[0, 2])


def _make_d34(with_eraser: bool) -> SMachine:
    """Three divisibility phases; sectors T1T2 and T2T3 swap roles in the
    middle phase, and the third phase runs with T2T3 locked."""
    s_parts = {
        "S1": ["s#1", "s#2", "s#3", "s#f"] + (["s#0"] if with_eraser else []),
        "S2": ["s1#1", "s2#1", "s1#2", "s2#2", "s1#3", "s2#3", "s1#f"]
              + (["s1#0"] if with_eraser else []),
        "T1": ["t1#1", "t1#2", "t1#3", "t2#f"] + (["t2#0"] if with_eraser else []),
        "T2": ["t'#1", "t'#2", "t'#3", "t'#f"] + (["t'#0"] if with_eraser else []),
        "T3": ["t''#1", "t''#2", "t''#3", "t''#f"] + (["t''#0"] if with_eraser else []),
    }
    hw = Hardware(
        [(k, v) for k, v in s_parts.items()],
        [("A1", ["a"]), ("A2", ["a'"]), ("B", ["b"]), ("C", ["c"])],
    )
    rules = []

    def ident(ph, *skip):
        out = []
        for part, base in (("S1", "s"), ("S2", None), ("T1", None), ("T2", "t'"), ("T3", "t''")):
            if part in skip:
                continue
            if part == "S1":
                out.append((f"s#{ph}", f"s#{ph}"))
            elif part == "T2":
                out.append((f"t'#{ph}", f"t'#{ph}"))
            elif part == "T3":
                out.append((f"t''#{ph}", f"t''#{ph}"))
            elif part == "T1":
                out.append((f"t1#{ph}", f"t1#{ph}"))
        return out

    # phase 1: divide l by 2k, counting cycles into T2T3
    rules += [
        make_rule(hw, "tau1#1", [("s#1", "s#1"), ("s1#1", "a^-1 s1#1 a'"),
                                 ("t1#1", "t1#1 b^-1")] + ident(1, "S1", "S2", "T1")),
        make_rule(hw, "tau12#1", [("s#1", "s#1"), ("s1#1", "s2#1")] + ident(1, "S1", "S2"),
                  {"A1": []}),
        make_rule(hw, "tau2#1", [("s#1", "s#1"), ("s2#1", "a s2#1 a'^-1"),
                                 ("t1#1", "t1#1 b^-1")] + ident(1, "S1", "S2", "T1")),
        make_rule(hw, "tau21#1", [("s#1", "s#1"), ("s2#1", "s1#1"),
                                  ("t'#1", "t'#1 c")] + ident(1, "S1", "S2", "T2"),
                  {"A2": []}),
        make_rule(hw, "sigma12", [("s#1", "s#2"), ("s1#1", "s1#2"), ("t1#1", "t1#2"),
                                  ("t'#1", "t'#2"), ("t''#1", "t''#2")],
                  {"A2": [], "B": []}),
    ]
    # phase 2: divide the count by 2k, writing the new count back into T1T2
    rules += [
        make_rule(hw, "tau1#2", [("s#2", "s#2"), ("s1#2", "a^-1 s1#2 a'"),
                                 ("t'#2", "t'#2 c^-1")] + ident(2, "S1", "S2", "T2")),
        make_rule(hw, "tau12#2", [("s#2", "s#2"), ("s1#2", "s2#2")] + ident(2, "S1", "S2"),
                  {"A1": []}),
        make_rule(hw, "tau2#2", [("s#2", "s#2"), ("s2#2", "a s2#2 a'^-1"),
                                 ("t'#2", "t'#2 c^-1")] + ident(2, "S1", "S2", "T2")),
        make_rule(hw, "tau21#2", [("s#2", "s#2"), ("s2#2", "s1#2"),
                                  ("t1#2", "t1#2 b")] + ident(2, "S1", "S2", "T1"),
                  {"A2": []}),
        make_rule(hw, "sigma23", [("s#2", "s#3"), ("s1#2", "s1#3"), ("t1#2", "t1#3"),
                                  ("t'#2", "t'#3"), ("t''#2", "t''#3")],
                  {"A2": [], "C": []}),
    ]
    # phase 3: divide again with the counting sector locked throughout
    rules += [
        make_rule(hw, "tau1#3", [("s#3", "s#3"), ("s1#3", "a^-1 s1#3 a'"),
                                 ("t1#3", "t1#3 b^-1")] + ident(3, "S1", "S2", "T1"), {"C": []}),
        make_rule(hw, "tau12#3", [("s#3", "s#3"), ("s1#3", "s2#3")] + ident(3, "S1", "S2"),
                  {"A1": [], "C": []}),
        make_rule(hw, "tau2#3", [("s#3", "s#3"), ("s2#3", "a s2#3 a'^-1"),
                                 ("t1#3", "t1#3 b^-1")] + ident(3, "S1", "S2", "T1"), {"C": []}),
        make_rule(hw, "tau21#3", [("s#3", "s#3"), ("s2#3", "s1#3")] + ident(3, "S1", "S2"),
                  {"A2": [], "C": []}),
        make_rule(hw, "sigma3f", [("s#3", "s#f"), ("s1#3", "s1#f"), ("t1#3", "t2#f"),
                                  ("t'#3", "t'#f"), ("t''#3", "t''#f")],
                  {"A2": [], "B": [], "C": []}),
    ]
    name = "D3"
    input_sectors = [0, 2]
    if with_eraser:
        name = "D4"
        rules.append(make_rule(hw, "tau",
                               [("s#f", "s#f a^-1"), ("s1#f", "s1#f"), ("t2#f", "t2#f"),
                                ("t'#f", "t'#f"), ("t''#f", "t''#f")],
                               {"A2": [], "B": [], "C": []}))
        rules.append(make_rule(hw, "tau0",
                               [("s#f", "s#0"), ("s1#f", "s1#0"), ("t2#f", "t2#0"),
                                ("t'#f", "t'#0"), ("t''#f", "t''#0")],
                               {"A1": [], "A2": [], "B": [], "C": []}))
    m = SMachine(hw, rules, name=name, input_sectors=input_sectors)
    if with_eraser:
        m.accept_word = hw.word("s#0 s1#0 t2#0 t'#0 t''#0")
    return m


def division_input(m: SMachine, k: int, ell: int) -> AdmissibleWord:
    """Input configuration s a^k s1 t1 b^ell t' (plus trailing parts)."""
    if k < 0:
        raise WordError("k must be nonnegative")
    a = "a " * k
    b = ("b " * ell) if ell >= 0 else ("b^-1 " * (-ell))
    if m.name == "D1":
        return m.parse(f"s {a}s1 t1 {b}t'")
    if m.name == "D2":
        return m.parse(f"s {a}s1 t1 {b}t' t''")
    if m.name in ("D3", "D4"):
        return m.parse(f"s#1 {a}s1#1 t1#1 {b}t'#1 t''#1")
    raise WordError(f"no input template for {m.name}")


def d1_empty_t_sector(aw: AdmissibleWord) -> bool:
    """Target of the D1/D2 search: the T1-letter has been switched to t2,
    which only the rule locking T1T2 can do."""
    return "t2" in {aw.hw.alphabet.name(aw.word[p]) for p in aw.qpos}


# ---------------------------------------------------------------------------
# Z-machines
# ---------------------------------------------------------------------------


def make_z_machine(direction: str, alphabet: Sequence[str], name: str = "Z") -> SMachine:
    """Four-part sweeper L K P R over A' | A'' | A'''.

    Left machines run the P-letter through the KP-sector (content in the
    double-primed copy), right machines run the K-letter, with the far
    sector locked throughout.
    """
    if direction not in ("left", "right"):
        raise WordError(f"bad direction {direction!r}")
    if not alphabet:
        raise WordError("Z-machine needs a nonempty alphabet")
    a1 = [a + "'" for a in alphabet]
    a2 = [a + "''" for a in alphabet]
    a3 = [a + "'''" for a in alphabet]
    hw = Hardware(
        [("L", ["L"]), ("K", ["k1", "k2", "k3"]), ("P", ["p1", "p2", "p3"]), ("R", ["R"])],
        [("A'", a1), ("A''", a2), ("A'''", a3)],
    )
    rules = []
    if direction == "left":
        for a in alphabet:
            rules.append(make_rule(hw, f"x1({a})",
                                   [("L", "L"), ("k1", "k1"),
                                    ("p1", f"{a}''^-1 p1 {a}'''"), ("R", "R")], {"A'": []}))
        rules.append(make_rule(hw, "x2", [("L", "L"), ("k1", "k2"), ("p1", "p2"), ("R", "R")],
                               {"A'": [], "A''": []}))
        for a in alphabet:
            rules.append(make_rule(hw, f"x3({a})",
                                   [("L", "L"), ("k2", "k2"),
                                    ("p2", f"{a}'' p2 {a}'''^-1"), ("R", "R")], {"A'": []}))
        rules.append(make_rule(hw, "x4", [("L", "L"), ("k2", "k3"), ("p2", "p3"), ("R", "R")],
                               {"A'": [], "A'''": []}))
    else:
        for a in alphabet:
            rules.append(make_rule(hw, f"x1({a})",
                                   [("L", "L"), ("k1", f"{a}' k1 {a}''^-1"),
                                    ("p1", "p1"), ("R", "R")], {"A'''": []}))
        rules.append(make_rule(hw, "x2", [("L", "L"), ("k1", "k2"), ("p1", "p2"), ("R", "R")],
                               {"A''": [], "A'''": []}))
        for a in alphabet:
            rules.append(make_rule(hw, f"x3({a})",
                                   [("L", "L"), ("k2", f"{a}'^-1 k2 {a}''"),
                                    ("p2", "p2"), ("R", "R")], {"A'''": []}))
        rules.append(make_rule(hw, "x4", [("L", "L"), ("k2", "k3"), ("p2", "p3"), ("R", "R")],
                               {"A'": [], "A'''": []}))
    return SMachine(hw, rules, name=name, meta={"z": {"direction": direction,
                                                      "alphabet": list(alphabet)}})


def z_canonical_history(direction: str, content: Sequence[tuple[str, int]]) -> list[str]:
    """The 2s+2 sweep over signed content resting in the KP-sector."""
    def sgn(e):
        return "" if e > 0 else "^-1"
    if direction == "left":
        first = [f"x1({a}){sgn(e)}" for a, e in reversed(content)]
        second = [f"x3({a}){sgn(e)}" for a, e in content]
    else:
        first = [f"x1({a}){sgn(e)}" for a, e in content]
        second = [f"x3({a}){sgn(e)}" for a, e in reversed(content)]
    return first + ["x2"] + second + ["x4"]


# ---------------------------------------------------------------------------
# Biprimitive composition
# ---------------------------------------------------------------------------


def make_biprimitive(p: SMachine, name: str = "") -> SMachine:
    """Interleave Z-machines between consecutive state letters of a
    primitive machine (or a parallel composition of primitive machines).

    Every rule theta of p becomes a frame: x-(theta) indexes all state
    letters with theta and parks the inserted zk/zp letters at stage 1;
    the Z-machines sweep their sectors wave by wave (left-sector machines
    first, then right-sector ones; sectors inside one wave are driven
    simultaneously by joint rules); bar(theta) performs theta's rewrite on
    the double-primed content and resets the stages; the Z-machines sweep
    again; x+(theta) strips the indices.  Identity parts pin the waves, so
    only one wave can be active at a time and the canonical computation is
    the unique reduced one between embedded configurations.
    """
    pm = p.meta.get("primitive")
    if pm is None:
        raise WordError("biprimitive composition needs a primitive machine or "
                        "a parallel composition of primitive machines")
    if pm.get("mode") == "sequential":
        raise WordError("biprimitive composition of sequential compositions is not supported")
    hw0 = p.hw
    alph0 = hw0.alphabet
    n_sec = len(hw0.tapes)

    sec_dir: dict[int, str] = {}
    for comp in pm["components"]:
        c = comp["parts"][1]
        sec_dir[c] = "left"       # 1-based sector between parts c-1 and c
        sec_dir[c + 1] = "right"
    if set(sec_dir) != set(range(1, n_sec + 1)):
        raise WordError("primitive components must tile the base")
    wave1 = sorted(s for s, d in sec_dir.items() if d == "left")
    wave2 = sorted(s for s, d in sec_dir.items() if d == "right")
    waves = [wave1, wave2]
    wave_of = {s: (0 if s in wave1 else 1) for s in sec_dir}

    thetas = [r.name for r in p.positive_rules]

    # per-sector copy alphabets; the trailing sector index keeps stacked
    # primes unique when a parent alphabet is itself primed
    copies: dict[int, dict[str, tuple[str, str, str]]] = {}
    unprime: dict[str, str] = {}
    for s1 in range(1, n_sec + 1):
        m = {}
        for x in hw0.tapes[s1 - 1]:
            y = alph0.name(x)
            trio = (f"{y}'{s1}", f"{y}''{s1}", f"{y}'''{s1}")
            m[y] = trio
            for c in trio:
                unprime[c] = y
        copies[s1] = m

    parts: list[tuple[str, list[str]]] = []
    tapes: list[tuple[str, list[str]]] = []
    for i in range(hw0.n_parts):
        sletters = [alph0.name(x) for x in hw0.parts[i]]
        full = list(sletters) + [f"{s}@{th}" for th in thetas for s in sletters]
        parts.append((hw0.part_names[i], full))
        if i < n_sec:
            s1 = i + 1
            parts.append((f"K{s1}", [f"zk{s1}"] + [f"zk{s1}@{th}.{j}" for th in thetas
                                                   for j in (1, 2, 3)]))
            parts.append((f"P{s1}", [f"zp{s1}"] + [f"zp{s1}@{th}.{j}" for th in thetas
                                                   for j in (1, 2, 3)]))
            names = [alph0.name(x) for x in hw0.tapes[i]]
            tapes.append((f"Y'{s1}", [copies[s1][y][0] for y in names]))
            tapes.append((f"Y''{s1}", [copies[s1][y][1] for y in names]))
            tapes.append((f"Y'''{s1}", [copies[s1][y][2] for y in names]))
    hw = Hardware(parts, tapes)

    all_locked: dict[str, Optional[list]] = {}
    for s in range(1, n_sec + 1):
        all_locked[f"Y'{s}"] = []
        all_locked[f"Y'''{s}"] = []

    def ctok(word, s1):
        """Tokens of a parent sector word moved to the double-primed copy."""
        toks = []
        for x in word:
            nm = copies[s1][alph0.name(x)][1]
            toks.append(nm if x > 0 else nm + "^-1")
        return " ".join(toks)

    rules: list[Rule] = []
    for r in p.positive_rules:
        th = r.name
        lhs_of: dict[int, str] = {}
        rhs_of: dict[int, str] = {}
        uw: dict[int, tuple] = {}     # 1-based sector -> right words of part to its left
        vw: dict[int, tuple] = {}     # 1-based sector -> left words of part to its right
        for part in r.parts:
            qi = next(i for i, x in enumerate(part.u) if alph0.kind(x) == "q")
            qj = next(i for i, x in enumerate(part.v) if alph0.kind(x) == "q")
            lhs_of[part.lo] = alph0.name(part.u[qi])
            rhs_of[part.lo] = alph0.name(part.v[qj])
            vw[part.lo] = (part.u[:qi], part.v[:qj])
            uw[part.lo + 1] = (part.u[qi + 1:], part.v[qj + 1:])
        moves_q = any(lhs_of[i] != rhs_of[i] for i in range(hw0.n_parts))

        pv = []
        for i in range(hw0.n_parts):
            pv.append((lhs_of[i], f"{lhs_of[i]}@{th}"))
            if i < n_sec:
                pv.append((f"zk{i+1}", f"zk{i+1}@{th}.1"))
                pv.append((f"zp{i+1}", f"zp{i+1}@{th}.1"))
        rules.append(make_rule(hw, f"x-({th})", pv, dict(all_locked)))

        pv = []
        for i in range(hw0.n_parts):
            pv.append((f"{lhs_of[i]}@{th}", f"{rhs_of[i]}@{th}"))
            if i < n_sec:
                s1 = i + 1
                ul, ur = uw.get(s1, ((), ()))
                vl, vr = vw.get(s1, ((), ()))
                pv.append(((f"zk{s1}@{th}.3 " + ctok(ul, s1)).strip(),
                           (f"zk{s1}@{th}.1 " + ctok(ur, s1)).strip()))
                pv.append(((ctok(vl, s1) + f" zp{s1}@{th}.3").strip(),
                           (ctok(vr, s1) + f" zp{s1}@{th}.1").strip()))
        perms: dict[str, Optional[list]] = dict(all_locked)
        for i in range(n_sec):
            ps = r.perms[i]
            if ps is not None:
                perms[f"Y''{i+1}"] = [copies[i + 1][alph0.name(x)][1] for x in ps]
        rules.append(make_rule(hw, f"bar({th})", pv, perms))

        pv = []
        for i in range(hw0.n_parts):
            pv.append((f"{rhs_of[i]}@{th}", rhs_of[i]))
            if i < n_sec:
                pv.append((f"zk{i+1}@{th}.3", f"zk{i+1}"))
                pv.append((f"zp{i+1}@{th}.3", f"zp{i+1}"))
        rules.append(make_rule(hw, f"x+({th})", pv, dict(all_locked)))

        # joint Z-rules per wave; "<" variant runs between x-(th) and
        # bar(th) (lhs state letters), ">" between bar(th) and x+(th)
        for wi, wave in enumerate(waves):
            d = sec_dir[wave[0]]
            lead = wave[0]
            index_alphabet = [alph0.name(x) for x in hw0.tapes[lead - 1]]
            for variant in ("<", ">"):
                if variant == ">" and not moves_q:
                    continue
                s_of = lhs_of if variant == "<" else rhs_of
                fixed = [(f"{s_of[i]}@{th}", f"{s_of[i]}@{th}") for i in range(hw0.n_parts)]
                pins = []
                for s2 in range(1, n_sec + 1):
                    if s2 in wave:
                        continue
                    stage = 3 if wave_of[s2] < wi else 1
                    pins.append((f"zk{s2}@{th}.{stage}", f"zp{s2}@{th}.{stage}"))
                suffix = f"@{th}.{variant}{wi}"

                def zrule(rname, kp_parts, extra_perms):
                    pv = list(fixed) + kp_parts
                    for kl, pl in pins:
                        pv.append((kl, kl))
                        pv.append((pl, pl))
                    perms = dict(all_locked)
                    perms.update(extra_perms)
                    rules.append(make_rule(hw, rname, pv, perms))

                def stages(rname, j1, j2, extra_perms):
                    kp = []
                    for s1 in wave:
                        kp.append((f"zk{s1}@{th}.{j1}", f"zk{s1}@{th}.{j2}"))
                        kp.append((f"zp{s1}@{th}.{j1}", f"zp{s1}@{th}.{j2}"))
                    zrule(rname, kp, extra_perms)

                if d == "left":
                    open3 = {f"Y'''{s1}": None for s1 in wave}
                    for ai, a in enumerate(index_alphabet):
                        kp = []
                        for s1 in wave:
                            y = alph0.name(hw0.tapes[s1 - 1][ai])
                            c2, c3 = copies[s1][y][1], copies[s1][y][2]
                            kp.append((f"zk{s1}@{th}.1", f"zk{s1}@{th}.1"))
                            kp.append((f"zp{s1}@{th}.1", f"{c2}^-1 zp{s1}@{th}.1 {c3}"))
                        zrule(f"x1({a}){suffix}", kp, open3)
                    stages(f"x2{suffix}", 1, 2,
                           dict(open3, **{f"Y''{s1}": [] for s1 in wave}))
                    for ai, a in enumerate(index_alphabet):
                        kp = []
                        for s1 in wave:
                            y = alph0.name(hw0.tapes[s1 - 1][ai])
                            c2, c3 = copies[s1][y][1], copies[s1][y][2]
                            kp.append((f"zk{s1}@{th}.2", f"zk{s1}@{th}.2"))
                            kp.append((f"zp{s1}@{th}.2", f"{c2} zp{s1}@{th}.2 {c3}^-1"))
                        zrule(f"x3({a}){suffix}", kp, open3)
                    stages(f"x4{suffix}", 2, 3, {})
                else:
                    open1 = {f"Y'{s1}": None for s1 in wave}
                    for ai, a in enumerate(index_alphabet):
                        kp = []
                        for s1 in wave:
                            y = alph0.name(hw0.tapes[s1 - 1][ai])
                            c1, c2 = copies[s1][y][0], copies[s1][y][1]
                            kp.append((f"zk{s1}@{th}.1", f"{c1} zk{s1}@{th}.1 {c2}^-1"))
                            kp.append((f"zp{s1}@{th}.1", f"zp{s1}@{th}.1"))
                        zrule(f"x1({a}){suffix}", kp, open1)
                    stages(f"x2{suffix}", 1, 2,
                           dict(open1, **{f"Y''{s1}": [] for s1 in wave}))
                    for ai, a in enumerate(index_alphabet):
                        kp = []
                        for s1 in wave:
                            y = alph0.name(hw0.tapes[s1 - 1][ai])
                            c1, c2 = copies[s1][y][0], copies[s1][y][1]
                            kp.append((f"zk{s1}@{th}.2", f"{c1}^-1 zk{s1}@{th}.2 {c2}"))
                            kp.append((f"zp{s1}@{th}.2", f"zp{s1}@{th}.2"))
                        zrule(f"x3({a}){suffix}", kp, open1)
                    stages(f"x4{suffix}", 2, 3, {})

    meta = {"biprimitive": {"of": p.name, "sectors": sec_dir, "waves": waves,
                            "thetas": thetas, "copies": copies, "unprime": unprime}}
    bi = SMachine(hw, rules, name=name or f"Bi({p.name})", meta=meta)
    bi.meta["parent"] = p
    return bi


def iota(bi: SMachine, w: AdmissibleWord) -> AdmissibleWord:
    """Embed a standard-base word of the parent: insert resting zk/zp
    letters and move the content to the double-primed copies."""
    p: SMachine = bi.meta["parent"]
    copies = bi.meta["biprimitive"]["copies"]
    alph0 = p.hw.alphabet
    toks = []
    sec = 0
    for i, x in enumerate(w.word):
        if alph0.kind(x) == "q":
            if i > 0:
                toks.append(f"zp{sec}")
            nm = alph0.name(x)
            toks.append(nm if x > 0 else nm + "^-1")
            if i < len(w.word) - 1:
                sec += 1
                toks.append(f"zk{sec}")
        else:
            nm = copies[sec][alph0.name(x)][1]
            toks.append(nm if x > 0 else nm + "^-1")
    return bi.parse(" ".join(toks))


def pi_word(bi: SMachine, aw: AdmissibleWord) -> AdmissibleWord:
    """Project a biprimitive word to the parent machine: drop zk/zp letters
    and theta-indices, merge the primed copies, reduce."""
    p: SMachine = bi.meta["parent"]
    unprime = bi.meta["biprimitive"]["unprime"]
    alph = bi.hw.alphabet
    out = []
    for x in aw.word:
        nm = alph.name(x)
        if alph.kind(x) == "q":
            if nm.startswith(("zk", "zp")):
                continue
            nm = nm.split("@")[0]
        else:
            nm = unprime[nm]
        y = p.hw.alphabet.id_of(nm)
        out.append(y if x > 0 else -y)
    return parse_admissible(p.hw, reduce_word(out))


def pi_history(bi: SMachine, history: Sequence[Rule]) -> list[str]:
    """Project a biprimitive history: forget chi-rules, unbar theta-rules."""
    out = []
    for r in history:
        nm = r.name
        neg = nm.endswith("^-1")
        if neg:
            nm = nm[:-3]
        if nm.startswith("bar(") and nm.endswith(")"):
            out.append(nm[4:-1] + ("^-1" if neg else ""))
    return out


def _zsweep_names(bi: SMachine, th: str, wave_idx: int, wave: list[int], direction: str,
                  variant: str, content: list[tuple[str, int]], inverse: bool = False) -> list[str]:
    """Rule names of one joint sweep of a wave whose lead sector holds the
    given signed content (other wave sectors must hold the letter-copies)."""
    p: SMachine = bi.meta["parent"]
    r0 = p.rule(th)
    alph0 = p.hw.alphabet
    moves_q = False
    for part in r0.parts:
        qu = next(x for x in part.u if alph0.kind(x) == "q")
        qv = next(x for x in part.v if alph0.kind(x) == "q")
        if qu != qv:
            moves_q = True
    var = variant if moves_q else "<"
    suffix = f"@{th}.{var}{wave_idx}"
    if direction == "left":
        first = [f"x1({a}){suffix}" + ("" if e > 0 else "^-1") for a, e in reversed(content)]
        second = [f"x3({a}){suffix}" + ("" if e > 0 else "^-1") for a, e in content]
    else:
        first = [f"x1({a}){suffix}" + ("" if e > 0 else "^-1") for a, e in content]
        second = [f"x3({a}){suffix}" + ("" if e > 0 else "^-1") for a, e in reversed(content)]
    names = first + [f"x2{suffix}"] + second + [f"x4{suffix}"]
    if inverse:
        names = [n[:-3] if n.endswith("^-1") else n + "^-1" for n in reversed(names)]
    return names


def _lead_content(bi: SMachine, aw: AdmissibleWord, s1: int) -> list[tuple[str, int]]:
    """Signed parent-alphabet names of the double-primed content of sector
    s1, read between its K and P letters (used by the canonical builder;
    for joint waves the content letter family is indexed by the lead
    sector's alphabet positions)."""
    alph = bi.hw.alphabet
    unprime = bi.meta["biprimitive"]["unprime"]
    p: SMachine = bi.meta["parent"]
    alph0 = p.hw.alphabet
    lead_names = [alph0.name(x) for x in p.hw.tapes[s1 - 1]]
    for k in range(len(aw.qpos) - 1):
        lname = alph.name(aw.word[aw.qpos[k]])
        if lname == f"zk{s1}" or lname.startswith(f"zk{s1}@"):
            out = []
            for x in aw.sector(k):
                base = unprime[alph.name(x)]
                out.append((base, 1 if x > 0 else -1))
            return out
    raise WordError(f"no K{s1} letter in word")


def canonical_biprimitive_run(bi: SMachine, w0: AdmissibleWord,
                              pr_history: Sequence[str]) -> Computation:
    """Build and engine-verify the canonical computation that simulates the
    parent history: one x-/sweeps/bar/sweeps/x+ frame per parent rule."""
    meta = bi.meta["biprimitive"]
    waves: list[list[int]] = meta["waves"]
    sec_dir: dict[int, str] = meta["sectors"]
    cur = iota(bi, w0)
    start = cur
    names: list[str] = []

    def emit(rn: str):
        nonlocal cur
        cur = apply_rule(bi.rule(rn), cur)
        names.append(rn)

    for h in pr_history:
        neg = h.endswith("^-1")
        th = h[:-3] if neg else h
        if not neg:
            emit(f"x-({th})")
            for wi, wave in enumerate(waves):
                for rn in _zsweep_names(bi, th, wi, wave, sec_dir[wave[0]], "<",
                                        _lead_content(bi, cur, wave[0])):
                    emit(rn)
            emit(f"bar({th})")
            for wi, wave in enumerate(waves):
                for rn in _zsweep_names(bi, th, wi, wave, sec_dir[wave[0]], ">",
                                        _lead_content(bi, cur, wave[0])):
                    emit(rn)
            emit(f"x+({th})")
        else:
            emit(f"x+({th})^-1")
            for wi, wave in reversed(list(enumerate(waves))):
                for rn in _zsweep_names(bi, th, wi, wave, sec_dir[wave[0]], ">",
                                        _lead_content(bi, cur, wave[0]), inverse=True):
                    emit(rn)
            emit(f"bar({th})^-1")
            for wi, wave in reversed(list(enumerate(waves))):
                for rn in _zsweep_names(bi, th, wi, wave, sec_dir[wave[0]], "<",
                                        _lead_content(bi, cur, wave[0]), inverse=True):
                    emit(rn)
            emit(f"x-({th})^-1")
    return run(bi, start, names)
