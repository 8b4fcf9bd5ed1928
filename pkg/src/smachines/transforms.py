"""Machine-to-machine constructions: rule normalization, historical
sectors, control letters, primitive compositions, and step graphs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .engine import Hardware, Rule, SMachine, make_rule
from .words import Q, WordError


# ---------------------------------------------------------------------------
# Rule normalization
# ---------------------------------------------------------------------------


@dataclass
class Normalization:
    machine: SMachine
    translation: dict[str, list[str]]   # original rule name -> replacement word

    def translate(self, history: Sequence[str]) -> list[str]:
        out: list[str] = []
        for h in history:
            if h.endswith("^-1"):
                out.extend(_inv_name(n) for n in reversed(self.translation[h[:-3]]))
            else:
                out.extend(self.translation[h])
        return out


def _inv_name(name: str) -> str:
    return name[:-3] if name.endswith("^-1") else name + "^-1"


def _tables(m: SMachine):
    hw = m.hw
    alph = hw.alphabet
    parts = [[hw.part_names[i], [alph.name(x) for x in hw.parts[i]]] for i in range(hw.n_parts)]
    tapes = [(hw.tape_names[i], [alph.name(x) for x in hw.tapes[i]]) for i in range(len(hw.tapes))]
    return parts, tapes


def _rule_tokens(m: SMachine, r: Rule) -> list[tuple[str, str]]:
    return [(m.hw.tokens(p.u), m.hw.tokens(p.v)) for p in r.parts]


def _perm_tokens(m: SMachine, r: Rule) -> dict[str, Optional[list[str]]]:
    out: dict[str, Optional[list[str]]] = {}
    for t, s in enumerate(r.perms):
        if s is not None:
            out[m.hw.tape_names[t]] = sorted(m.hw.alphabet.name(x) for x in s)
    return out


def _retag(m: SMachine, w, repl: dict[str, str]) -> str:
    alph = m.hw.alphabet
    toks = []
    for x in w:
        nm = repl.get(alph.name(x), alph.name(x))
        toks.append(nm if x > 0 else nm + "^-1")
    return " ".join(toks)


def _rebuild(m: SMachine, parts_tbl, tapes_tbl, remove: Rule,
             new_rules: list[tuple[str, list[tuple[str, str]], dict]]) -> SMachine:
    keep = []
    for r0 in m.positive_rules:
        if r0 is remove:
            continue
        keep.append((r0.name, _rule_tokens(m, r0), _perm_tokens(m, r0)))
    hw2 = Hardware([(pn, ls) for pn, ls in parts_tbl], tapes_tbl)
    rules2 = [make_rule(hw2, nm, ps, pm) for nm, ps, pm in keep + new_rules]
    return SMachine(hw2, rules2, name=m.name, meta=dict(m.meta))


def _part_pieces(m: SMachine, p) -> tuple[tuple, tuple, tuple, tuple, str, str]:
    """(lu, ru, lv, rv, q_lhs, q_rhs) for a one-letter-base part."""
    alph = m.hw.alphabet
    uq = next(i for i, x in enumerate(p.u) if alph.kind(x) == Q)
    vq = next(i for i, x in enumerate(p.v) if alph.kind(x) == Q)
    return (p.u[:uq], p.u[uq + 1:], p.v[:vq], p.v[vq + 1:],
            alph.name(p.u[uq]), alph.name(p.v[vq]))


def normalize(m: SMachine, strength: int = 2) -> Normalization:
    """Split rules until every part has a one-letter base (strength 1);
    additionally until every part's context words have length at most one
    per side (strength 2); additionally until each rule moves at most one
    tape letter in total (strength 3).

    Returns the new machine with the history translation.  The original
    state letters survive, so a computation of the original machine between
    words without auxiliary letters corresponds to the computation of the
    new machine with the translated history, with identical endpoints.
    """
    if strength not in (1, 2, 3):
        raise WordError("strength must be 1, 2 or 3")
    translation = {r.name: [r.name] for r in m.positive_rules}
    gen = 0
    while True:
        gen += 1
        step = _norm_step(m, strength, gen)
        if step is None:
            return Normalization(m, translation)
        m, old_name, replacement = step
        _substitute(translation, old_name, replacement)


def _substitute(translation: dict[str, list[str]], name: str, rep: list[str]) -> None:
    for k, seq in translation.items():
        out: list[str] = []
        for h in seq:
            neg = h.endswith("^-1")
            base = h[:-3] if neg else h
            if base == name:
                out.extend(_inv_name(x) for x in reversed(rep)) if neg else out.extend(rep)
            else:
                out.append(h)
        translation[k] = out


def _norm_step(m: SMachine, strength: int, gen: int):
    for r in m.positive_rules:
        if any(p.hi > p.lo for p in r.parts):
            return _split_base(m, r, gen)
    if strength < 2:
        return None
    for r in m.positive_rules:
        for pi, p in enumerate(r.parts):
            lu, ru, lv, rv, _, _ = _part_pieces(m, p)
            if len(lu) + len(lv) >= 2:
                return _peel_left(m, r, pi, gen)
            if len(ru) + len(rv) >= 2:
                return _peel_right(m, r, pi, gen)
    if strength < 3:
        return None
    for r in m.positive_rules:
        actions = _content_actions(m, r)
        if len(actions) >= 2:
            return _chain_actions(m, r, gen)
    return None


def _split_base(m: SMachine, r: Rule, gen: int):
    """Replace a rule having a multi-letter-base part by theta1 theta2
    theta3: theta1 absorbs the lhs interior words of the split part and
    moves everything to stage copies, theta2 crosses the stages locking the
    interior sectors, theta3 emits the rhs interior words."""
    alph = m.hw.alphabet
    parts_tbl, tapes_tbl = _tables(m)
    target = next(p for p in r.parts if p.hi > p.lo)

    def stage(nm: str, s: int, part_idx: int) -> str:
        full = f"{nm}%{gen}.{s}"
        if full not in parts_tbl[part_idx][1]:
            parts_tbl[part_idx][1].append(full)
        return full

    t1: list[tuple[str, str]] = []
    t2: list[tuple[str, str]] = []
    t3: list[tuple[str, str]] = []
    t2_locks: dict[str, Optional[list[str]]] = {}
    for p in r.parts:
        if p is target:
            uq = [i for i, x in enumerate(p.u) if alph.kind(x) == Q]
            vq = [i for i, x in enumerate(p.v) if alph.kind(x) == Q]
            for j, base_idx in enumerate(range(p.lo, p.hi + 1)):
                nm_u = alph.name(p.u[uq[j]])
                nm_v = alph.name(p.v[vq[j]])
                u_right = p.u[uq[j] + 1: uq[j + 1] if j + 1 < len(uq) else len(p.u)]
                v_right = p.v[vq[j] + 1: vq[j + 1] if j + 1 < len(vq) else len(p.v)]
                u_left = p.u[:uq[0]] if j == 0 else ()
                v_left = p.v[:vq[0]] if j == 0 else ()
                s1 = stage(nm_u, 1, base_idx)
                s2 = stage(nm_u, 2, base_idx)
                t1.append(((m.hw.tokens(u_left) + f" {nm_u} " + m.hw.tokens(u_right)).strip(), s1))
                t2.append((s1, s2))
                t3.append((s2, (m.hw.tokens(v_left) + f" {nm_v} " + m.hw.tokens(v_right)).strip()))
                if j > 0:
                    t2_locks[tapes_tbl[base_idx - 1][0]] = []
        else:
            vq = [i for i, x in enumerate(p.v) if alph.kind(x) == Q]
            ren1, ren2 = {}, {}
            for j, base_idx in enumerate(range(p.lo, p.hi + 1)):
                nm_v = alph.name(p.v[vq[j]])
                ren1[nm_v] = stage(nm_v, 1, base_idx)
                ren2[nm_v] = stage(nm_v, 2, base_idx)
            t1.append((m.hw.tokens(p.u), _retag(m, p.v, ren1)))
            t2.append((_retag(m, p.v, ren1), _retag(m, p.v, ren2)))
            t3.append((_retag(m, p.v, ren2), m.hw.tokens(p.v)))
    perms = _perm_tokens(m, r)
    p2 = dict(perms)
    p2.update(t2_locks)
    names = [f"{r.name}%{gen}.1", f"{r.name}%{gen}.2", f"{r.name}%{gen}.3"]
    m2 = _rebuild(m, parts_tbl, tapes_tbl, r,
                  [(names[0], t1, perms), (names[1], t2, p2), (names[2], t3, perms)])
    return m2, r.name, names


def _fresh_mids(m: SMachine, r: Rule, gen: int, parts_tbl) -> dict[int, str]:
    mids = {}
    for j, p in enumerate(r.parts):
        nm = f"{r.name}%{gen}~{p.lo}"
        parts_tbl[p.lo][1].append(nm)
        mids[j] = nm
    return mids


def _peel_left(m: SMachine, r: Rule, pi: int, gen: int):
    """Shorten the left context of part pi by one letter.

    If the lhs left word is at least as long, peel its innermost letter:
    [v a q u -> v' q' u'] becomes [a q u -> ~q u'] then [v ~q -> v' q'].
    Otherwise peel the rhs innermost letter through the mirror split."""
    parts_tbl, tapes_tbl = _tables(m)
    mids = _fresh_mids(m, r, gen, parts_tbl)
    t1: list[tuple[str, str]] = []
    t2: list[tuple[str, str]] = []
    for j, p in enumerate(r.parts):
        mid = mids[j]
        if j != pi:
            t1.append((m.hw.tokens(p.u), mid))
            t2.append((mid, m.hw.tokens(p.v)))
            continue
        lu, ru, lv, rv, qu, qv = _part_pieces(m, p)
        tok = m.hw.tokens
        if len(lu) >= len(lv):
            t1.append(((tok(lu[-1:]) + f" {qu} " + tok(ru)).strip(),
                       (mid + " " + tok(rv)).strip()))
            t2.append(((tok(lu[:-1]) + " " + mid).strip(),
                       (tok(lv) + " " + qv).strip()))
        else:
            t1.append(((tok(lu) + f" {qu} " + tok(ru)).strip(),
                       (tok(lv[:-1]) + " " + mid + " " + tok(rv)).strip()))
            t2.append((mid, (tok(lv[-1:]) + " " + qv).strip()))
    perms = _perm_tokens(m, r)
    names = [f"{r.name}%{gen}a", f"{r.name}%{gen}b"]
    m2 = _rebuild(m, parts_tbl, tapes_tbl, r,
                  [(names[0], t1, perms), (names[1], t2, perms)])
    return m2, r.name, names


def _peel_right(m: SMachine, r: Rule, pi: int, gen: int):
    """Mirror of _peel_left for the right context of part pi."""
    parts_tbl, tapes_tbl = _tables(m)
    mids = _fresh_mids(m, r, gen, parts_tbl)
    t1: list[tuple[str, str]] = []
    t2: list[tuple[str, str]] = []
    for j, p in enumerate(r.parts):
        mid = mids[j]
        if j != pi:
            t1.append((m.hw.tokens(p.u), mid))
            t2.append((mid, m.hw.tokens(p.v)))
            continue
        lu, ru, lv, rv, qu, qv = _part_pieces(m, p)
        tok = m.hw.tokens
        if len(ru) >= len(rv):
            # [v q u a -> v' q' u']  =  [v q a' ... ]: consume the innermost
            # right letter with the v-side rewrite, finish the rest after
            t1.append(((tok(lu) + f" {qu} " + tok(ru[:1])).strip(),
                       (tok(lv) + " " + mid).strip()))
            t2.append(((mid + " " + tok(ru[1:])).strip(),
                       (qv + " " + tok(rv)).strip()))
        else:
            t1.append(((tok(lu) + f" {qu} " + tok(ru)).strip(),
                       (mid + " " + tok(rv[1:])).strip()))
            t2.append(((tok(lv) + " " + mid).strip(),
                       (qv + " " + tok(rv[:1])).strip()))
    perms = _perm_tokens(m, r)
    names = [f"{r.name}%{gen}a", f"{r.name}%{gen}b"]
    m2 = _rebuild(m, parts_tbl, tapes_tbl, r,
                  [(names[0], t1, perms), (names[1], t2, perms)])
    return m2, r.name, names


def _content_actions(m: SMachine, r: Rule) -> list[tuple[int, str]]:
    """One entry per context-word action of a strength-2 rule."""
    out = []
    for j, p in enumerate(r.parts):
        lu, ru, lv, rv, _, _ = _part_pieces(m, p)
        if lu or lv:
            out.append((j, "left"))
        if ru or rv:
            out.append((j, "right"))
    return out


def _chain_actions(m: SMachine, r: Rule, gen: int):
    """Strength 3: chain the rule into one rule per context action; the
    other parts pass through bare stage letters, leaving sector content in
    place until its own action fires."""
    alph = m.hw.alphabet
    parts_tbl, tapes_tbl = _tables(m)
    actions = _content_actions(m, r)
    k = len(actions)
    pieces = [_part_pieces(m, p) for p in r.parts]

    def stage_name(j: int, s: int) -> str:
        lo = r.parts[j].lo
        nm = f"{r.name}%{gen}~{lo}.{s}"
        if nm not in parts_tbl[lo][1]:
            parts_tbl[lo][1].append(nm)
        return nm

    rules_out = []
    names = []
    tok = m.hw.tokens
    for s in range(k):
        aj, aside = actions[s]
        pv: list[tuple[str, str]] = []
        for j, p in enumerate(r.parts):
            lu, ru, lv, rv, qu, qv = pieces[j]
            src = qu if s == 0 else stage_name(j, s)
            dst = qv if s == k - 1 else stage_name(j, s + 1)
            lhs, rhs = src, dst
            if j == aj and aside == "left":
                lhs = (tok(lu) + " " + src).strip()
                rhs = (tok(lv) + " " + dst).strip()
            elif j == aj and aside == "right":
                lhs = (src + " " + tok(ru)).strip()
                rhs = (dst + " " + tok(rv)).strip()
            pv.append((lhs, rhs))
        nm = f"{r.name}%{gen}s{s+1}"
        names.append(nm)
        rules_out.append((nm, pv, _perm_tokens(m, r)))
    m2 = _rebuild(m, parts_tbl, tapes_tbl, r, rules_out)
    return m2, r.name, names


# ---------------------------------------------------------------------------
# Historical sectors
# ---------------------------------------------------------------------------


def add_historical_sectors(m: SMachine, start_rules: Sequence[str] = (),
                           stop_rules: Sequence[str] = ()) -> SMachine:
    """Endow a machine with historical sectors.

    Every part except the two ends splits into a left and a right copy
    with a fresh historical sector between them.  Each positive rule
    multiplies every historical sector by its own letter pair: the left
    copy letter comes off on the left, the right copy letter goes on on
    the right, so the sector accumulates the history.  Working sectors
    keep their alphabets and locks.  Start rules admit no letters from the
    right alphabets, stop rules none from the left ones.
    """
    _require_simp12(m)
    alph = m.hw.alphabet
    n = m.hw.n_parts
    thetas = [r.name for r in m.positive_rules]

    parts: list[tuple[str, list[str]]] = []
    tapes: list[tuple[str, list[str]]] = []
    for i in range(n):
        letters = [alph.name(x) for x in m.hw.parts[i]]
        pn = m.hw.part_names[i]
        if i > 0:
            parts.append((f"{pn}.l", [f"{x}.l" for x in letters]))
        if 0 < i < n - 1:
            tapes.append((f"X{i}", [f"[{th}.{i}l]" for th in thetas]
                          + [f"[{th}.{i}r]" for th in thetas]))
        if i < n - 1:
            parts.append((f"{pn}.r", [f"{x}.r" for x in letters]))
            tapes.append((m.hw.tape_names[i], [alph.name(x) for x in m.hw.tapes[i]]))
    hw2 = Hardware(parts, tapes)

    rules2 = []
    for r in m.positive_rules:
        pv: list[tuple[str, str]] = []
        perms: dict[str, Optional[list[str]]] = {}
        for p in r.parts:
            i = p.lo
            lu, ru, lv, rv, qu, qv = _part_pieces(m, p)
            tok = m.hw.tokens
            if i > 0:
                hist = f" [{r.name}.{i}l]" if i < n - 1 else ""
                pv.append(((tok(lu) + f" {qu}.l{hist}").strip(),
                           (tok(lv) + f" {qv}.l").strip()))
            if i < n - 1:
                hist = f"[{r.name}.{i}r] " if i > 0 else ""
                pv.append(((f"{qu}.r " + tok(ru)).strip(),
                           (f"{hist}{qv}.r " + tok(rv)).strip()))
        for t, s in enumerate(r.perms):
            if s is not None:
                perms[m.hw.tape_names[t]] = sorted(alph.name(x) for x in s)
        if r.name in start_rules:
            for i in range(1, n - 1):
                perms[f"X{i}"] = [f"[{th}.{i}l]" for th in thetas]
        if r.name in stop_rules:
            for i in range(1, n - 1):
                perms[f"X{i}"] = [f"[{th}.{i}r]" for th in thetas]
        rules2.append(make_rule(hw2, r.name, pv, perms))
    return SMachine(hw2, rules2, name=f"{m.name}+hist" if m.name else "hist",
                    meta={"historical": {"of": m.name, "thetas": thetas, "n_parts": n}})


def _require_simp12(m: SMachine) -> None:
    alph = m.hw.alphabet
    for r in m.positive_rules:
        for p in r.parts:
            if p.hi != p.lo:
                raise WordError(f"{r.name}: one-letter-base parts required; normalize first")
            lu, ru, lv, rv, _, _ = _part_pieces(m, p)
            if len(lu) + len(lv) > 1 or len(ru) + len(rv) > 1:
                raise WordError(f"{r.name}: context words too long; normalize first")


# ---------------------------------------------------------------------------
# Control letters
# ---------------------------------------------------------------------------


def add_control_letters(m: SMachine) -> SMachine:
    """Flank every part Q_i with control parts P_i and R_i.

    Each rule part [v q u -> v' q' u'] becomes [v p -> v' p],
    [q -> q'] and [r u -> r u'], with the two inner sectors locked by
    every rule.  The control letters stand idle here; compositions run
    them while this machine waits.
    """
    _require_simp12(m)
    alph = m.hw.alphabet
    n = m.hw.n_parts
    parts: list[tuple[str, list[str]]] = []
    tapes: list[tuple[str, list[str]]] = []
    for i in range(n):
        parts.append((f"P{i}", [f"cp{i}"]))
        parts.append((m.hw.part_names[i], [alph.name(x) for x in m.hw.parts[i]]))
        parts.append((f"R{i}", [f"cr{i}"]))
        tapes.append((f"PQ{i}", []))
        tapes.append((f"QR{i}", []))
        if i < n - 1:
            tapes.append((m.hw.tape_names[i], [alph.name(x) for x in m.hw.tapes[i]]))
    hw2 = Hardware(parts, tapes)
    rules2 = []
    for r in m.positive_rules:
        pv: list[tuple[str, str]] = []
        perms: dict[str, Optional[list[str]]] = {f"PQ{i}": [] for i in range(n)}
        perms.update({f"QR{i}": [] for i in range(n)})
        for p in r.parts:
            i = p.lo
            lu, ru, lv, rv, qu, qv = _part_pieces(m, p)
            tok = m.hw.tokens
            pv.append(((tok(lu) + f" cp{i}").strip(), (tok(lv) + f" cp{i}").strip()))
            pv.append((qu, qv))
            pv.append(((f"cr{i} " + tok(ru)).strip(), (f"cr{i} " + tok(rv)).strip()))
        for t, s in enumerate(r.perms):
            if s is not None:
                perms[m.hw.tape_names[t]] = sorted(alph.name(x) for x in s)
        rules2.append(make_rule(hw2, r.name, pv, perms))
    return SMachine(hw2, rules2, name=f"{m.name}+ctl" if m.name else "ctl",
                    meta={"control": {"of": m.name}})


def project_control_word(mc: SMachine, aw, m: SMachine):
    """Drop the control letters of an M_c word, back to the base machine."""
    from .engine import parse_admissible
    from .words import reduce_word
    alph = mc.hw.alphabet
    out = []
    for x in aw.word:
        nm = alph.name(x)
        if alph.kind(x) == Q and (nm.startswith("cp") or nm.startswith("cr")):
            continue
        y = m.hw.alphabet.id_of(nm)
        out.append(y if x > 0 else -y)
    return parse_admissible(m.hw, reduce_word(out))


# ---------------------------------------------------------------------------
# Primitive compositions
# ---------------------------------------------------------------------------


def compose_primitives(specs, mode: str, name: str = "") -> SMachine:
    """Parallel or sequential composition of primitive machines on a chain
    base Q0 P1 Q1 P2 Q2 ...

    Parallel: one rule family, indexed by the first component's alphabet,
    drives all components simultaneously; a rule applies iff it applies in
    every component.  Sequential: components run one after another; the
    connecting rule z21.c locks the finished component's sweep sector and
    wakes the next component's p-letter.
    """
    specs = list(specs)
    if not specs:
        raise WordError("need at least one primitive component")
    if mode not in ("parallel", "sequential"):
        raise WordError(f"bad mode {mode!r}")
    if mode == "parallel" and len({len(s.alphabet) for s in specs}) != 1:
        raise WordError("parallel composition needs equal alphabet sizes")
    n = len(specs)
    parts: list[tuple[str, list[str]]] = [("Q0", ["q0"])]
    tapes: list[tuple[str, list[str]]] = []
    comp_meta = []
    for c, sp in enumerate(specs, 1):
        plets = [f"p1.{c}", f"p2.{c}"]
        if mode == "sequential":
            plets = ([f"p0.{c}"] if c > 1 else []) + plets + ([f"p3.{c}"] if c < n else [])
        parts.append((f"P{c}", plets))
        parts.append((f"Q{c}", [f"q{c}"]))
        base = [f"{a}.{c}" for a in sp.alphabet]
        copy = [f"{a}.{c}'" for a in sp.alphabet]
        if sp.direction == "left":
            tapes.append((f"Y1.{c}", base))
            tapes.append((f"Y2.{c}", copy))
        else:
            tapes.append((f"Y1.{c}", copy))
            tapes.append((f"Y2.{c}", base))
        comp_meta.append({"parts": [2 * c - 2, 2 * c - 1, 2 * c],
                          "direction": sp.direction, "alphabet": base, "copy": copy})
    hw = Hardware(parts, tapes)

    def qparts():
        return [(f"q{i}", f"q{i}") for i in range(n + 1)]

    rules = []
    if mode == "parallel":
        idx = specs[0].alphabet
        for ai, a in enumerate(idx):
            pv = qparts()
            for c, sp in enumerate(specs, 1):
                b, bp = f"{sp.alphabet[ai]}.{c}", f"{sp.alphabet[ai]}.{c}'"
                pv.append((f"p1.{c}", f"{b}^-1 p1.{c} {bp}" if sp.direction == "left"
                           else f"{bp} p1.{c} {b}^-1"))
            rules.append(make_rule(hw, f"z1({a})", pv))
        pv = qparts()
        locks: dict[str, Optional[list[str]]] = {}
        for c, sp in enumerate(specs, 1):
            pv.append((f"p1.{c}", f"p2.{c}"))
            locks[f"Y1.{c}" if sp.direction == "left" else f"Y2.{c}"] = []
        rules.append(make_rule(hw, "z12", pv, locks))
        for ai, a in enumerate(idx):
            pv = qparts()
            for c, sp in enumerate(specs, 1):
                b, bp = f"{sp.alphabet[ai]}.{c}", f"{sp.alphabet[ai]}.{c}'"
                pv.append((f"p2.{c}", f"{b} p2.{c} {bp}^-1" if sp.direction == "left"
                           else f"{bp}^-1 p2.{c} {b}"))
            rules.append(make_rule(hw, f"z2({a})", pv))
    else:
        for c, sp in enumerate(specs, 1):
            idle = [(f"p0.{d}", f"p0.{d}") for d in range(c + 1, n + 1)] + \
                   [(f"p3.{d}", f"p3.{d}") for d in range(1, c)]
            sweep_lock = f"Y1.{c}" if sp.direction == "left" else f"Y2.{c}"
            rest_lock = f"Y2.{c}" if sp.direction == "left" else f"Y1.{c}"
            for a in sp.alphabet:
                b, bp = f"{a}.{c}", f"{a}.{c}'"
                pv = qparts() + idle
                pv.append((f"p1.{c}", f"{b}^-1 p1.{c} {bp}" if sp.direction == "left"
                           else f"{bp} p1.{c} {b}^-1"))
                rules.append(make_rule(hw, f"z1({a}).{c}", pv))
            pv = qparts() + idle
            pv.append((f"p1.{c}", f"p2.{c}"))
            rules.append(make_rule(hw, f"z12.{c}", pv, {sweep_lock: []}))
            for a in sp.alphabet:
                b, bp = f"{a}.{c}", f"{a}.{c}'"
                pv = qparts() + idle
                pv.append((f"p2.{c}", f"{b} p2.{c} {bp}^-1" if sp.direction == "left"
                           else f"{bp}^-1 p2.{c} {b}"))
                rules.append(make_rule(hw, f"z2({a}).{c}", pv))
            if c < n:
                pv = qparts()
                pv.append((f"p2.{c}", f"p3.{c}"))
                pv.append((f"p0.{c+1}", f"p1.{c+1}"))
                pv.extend((f"p0.{d}", f"p0.{d}") for d in range(c + 2, n + 1))
                pv.extend((f"p3.{d}", f"p3.{d}") for d in range(1, c))
                rules.append(make_rule(hw, f"z21.{c}", pv, {rest_lock: []}))
    meta = {"primitive": {"mode": mode, "tag": "", "direction": specs[0].direction,
                          "components": comp_meta}}
    return SMachine(hw, rules, name=name or f"{mode}-composition", meta=meta)


# ---------------------------------------------------------------------------
# Step graphs
# ---------------------------------------------------------------------------


@dataclass
class StepEdge:
    src: str
    dst: str
    src_vector: Optional[list[str]] = None   # one letter per part
    dst_vector: Optional[list[str]] = None


@dataclass
class StepGraphSpec:
    steps: list[tuple[str, SMachine]]
    edges: list[StepEdge] = field(default_factory=list)


def build_step_graph(spec: StepGraphSpec) -> SMachine:
    """Union machine whose steps have disjoint state letters and whose
    connecting rules switch the state-letter vectors between steps.

    A connecting rule locks a sector iff all rules of the source step or
    all rules of the destination step lock it.  Since state letters of
    different steps are disjoint, a reduced history mixing two steps must
    contain the connecting rule between them.
    """
    if not spec.steps:
        raise WordError("step graph needs at least one step")
    shapes = {(mm.hw.n_parts, tuple(tuple(map(mm.hw.alphabet.name, t)) for t in mm.hw.tapes))
              for _, mm in spec.steps}
    if len(shapes) != 1:
        raise WordError("all steps must share part count and tape alphabets")
    if len(spec.steps) == 1 and not spec.edges:
        return spec.steps[0][1]
    first = spec.steps[0][1]
    n = first.hw.n_parts

    parts: list[tuple[str, list[str]]] = []
    for i in range(n):
        letters: list[str] = []
        for sid, mm in spec.steps:
            letters.extend(f"{mm.hw.alphabet.name(x)}@{sid}" for x in mm.hw.parts[i])
        parts.append((first.hw.part_names[i], letters))
    tapes = [(first.hw.tape_names[i], [first.hw.alphabet.name(x) for x in first.hw.tapes[i]])
             for i in range(len(first.hw.tapes))]
    hw2 = Hardware(parts, tapes)

    rules2 = []
    by_id = dict(spec.steps)
    for sid, mm in spec.steps:
        ren = {mm.hw.alphabet.name(x): f"{mm.hw.alphabet.name(x)}@{sid}"
               for i in range(n) for x in mm.hw.parts[i]}
        for r in mm.positive_rules:
            pv = [(_retag(mm, p.u, ren), _retag(mm, p.v, ren)) for p in r.parts]
            rules2.append(make_rule(hw2, f"{r.name}@{sid}", pv, _perm_tokens(mm, r)))
    for e in spec.edges:
        msrc, mdst = by_id[e.src], by_id[e.dst]
        for mm, vec, label in ((msrc, e.src_vector, "src"), (mdst, e.dst_vector, "dst")):
            if vec is None and any(len(p) > 1 for p in mm.hw.parts):
                raise WordError(f"edge {e.src}->{e.dst}: {label}_vector required when "
                                f"parts have several letters")
        sv = e.src_vector or [msrc.hw.alphabet.name(msrc.hw.parts[i][0]) for i in range(n)]
        dv = e.dst_vector or [mdst.hw.alphabet.name(mdst.hw.parts[i][0]) for i in range(n)]
        pv = [(f"{a}@{e.src}", f"{b}@{e.dst}") for a, b in zip(sv, dv)]
        perms: dict[str, Optional[list[str]]] = {}
        for t in range(len(tapes)):
            if all(r.locks(t) for r in msrc.positive_rules) or \
               all(r.locks(t) for r in mdst.positive_rules):
                perms[tapes[t][0]] = []
        rules2.append(make_rule(hw2, f"theta({e.src},{e.dst})", pv, perms))
    return SMachine(hw2, rules2, name="step-graph",
                    meta={"stepgraph": {"steps": [s for s, _ in spec.steps],
                                        "edges": [(e.src, e.dst) for e in spec.edges]}})


def step_history(m: SMachine, history: Sequence[Rule]) -> list[str]:
    """The sequence of steps a history visits; connecting rules separate
    them and do not appear."""
    out: list[str] = []
    for r in history:
        nm = r.name[:-3] if r.name.endswith("^-1") else r.name
        if nm.startswith("theta(") and nm.endswith(")"):
            continue
        step = nm.rsplit("@", 1)[1] if "@" in nm else ""
        if not out or out[-1] != step:
            out.append(step)
    return out
