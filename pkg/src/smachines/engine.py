"""S-machine semantics: hardware, admissible words, rules, application, runs.

A machine rewrites freely reduced words over a partitioned group alphabet.
Rules replace, simultaneously, every occurrence of their state letters
(with either sign); the result is trimmed to start and end with state
letters and automatically reduced.  Machines are symmetric: every rule has
an inverse in the rule set.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .words import (
    A,
    Alphabet,
    Q,
    WordT,
    WordError,
    a_length,
    concat,
    invert,
    is_reduced,
    reduce_word,
)


class NotAdmissible(ValueError):
    pass


class NotApplicable(ValueError):
    def __init__(self, msg: str, sector: Optional[int] = None):
        super().__init__(msg)
        self.sector = sector


class RunFailed(RuntimeError):
    """A history letter failed to apply; carries the successful prefix."""

    def __init__(self, step: int, rule_name: str, partial: "Computation", reason: str):
        super().__init__(f"step {step}: rule {rule_name} not applicable: {reason}")
        self.step = step
        self.rule_name = rule_name
        self.partial = partial


class Hardware:
    """State parts Q_0..Q_N and tape alphabets Y_1..Y_N (here 0-indexed:
    ``tapes[i]`` is the alphabet of the sector between parts i and i+1)."""

    def __init__(self, parts: Sequence[tuple[str, Sequence[str]]],
                 tapes: Sequence[tuple[str, Sequence[str]]]):
        if len(parts) < 2:
            raise WordError("need at least two state parts")
        if len(tapes) != len(parts) - 1:
            raise WordError("need exactly one tape alphabet per sector")
        self.alphabet = Alphabet()
        self.part_names = [p[0] for p in parts]
        self.tape_names = [t[0] for t in tapes]
        self.parts: list[list[int]] = []
        self.tapes: list[list[int]] = []
        for pi, (_, letters) in enumerate(parts):
            ids = [self.alphabet.add(nm, Q, pi, j) for j, nm in enumerate(letters)]
            if not ids:
                raise WordError(f"state part {self.part_names[pi]!r} is empty")
            self.parts.append(ids)
        for ti, (_, letters) in enumerate(tapes):
            self.tapes.append([self.alphabet.add(nm, A, ti, j) for j, nm in enumerate(letters)])
        self.tape_sets = [frozenset(t) for t in self.tapes]

    @property
    def n_parts(self) -> int:
        return len(self.parts)

    def word(self, tokens: str) -> WordT:
        return self.alphabet.from_tokens(tokens)

    def tokens(self, word: Iterable[int]) -> str:
        return self.alphabet.to_tokens(word)

    def a_len(self, word: Iterable[int]) -> int:
        return a_length(self.alphabet, word)


@dataclass(frozen=True)
class AdmissibleWord:
    """A parsed admissible word: alternating state letters and tape sectors.

    ``qpos`` holds the positions of state-letter occurrences in ``word``;
    ``base`` the part indices with signs; ``sector_tape`` the tape alphabet
    index of each sector (the sector between the k-th and (k+1)-th state
    letter).
    """

    hw: Hardware
    word: WordT
    qpos: tuple[int, ...]
    base: tuple[tuple[int, int], ...]
    sector_tape: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.word)

    @property
    def a_len(self) -> int:
        return len(self.word) - len(self.qpos)

    def sector(self, k: int) -> WordT:
        return self.word[self.qpos[k] + 1:self.qpos[k + 1]]

    def sectors(self) -> list[WordT]:
        return [self.sector(k) for k in range(len(self.qpos) - 1)]

    def base_names(self) -> str:
        out = []
        for pi, sign in self.base:
            nm = self.hw.part_names[pi]
            out.append(nm if sign > 0 else nm + "^-1")
        return " ".join(out)

    def tokens(self) -> str:
        return self.hw.tokens(self.word)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, AdmissibleWord) and self.word == other.word

    def __hash__(self) -> int:
        return hash(self.word)


def parse_admissible(hw: Hardware, word: WordT) -> AdmissibleWord:
    """Check the three sector shapes and return the parsed structure."""
    alph = hw.alphabet
    if not word:
        raise NotAdmissible("empty word")
    if not is_reduced(word):
        raise NotAdmissible("word is not freely reduced")
    qpos = tuple(i for i, x in enumerate(word) if alph.kind(x) == Q)
    if not qpos:
        raise NotAdmissible("no state letters")
    if qpos[0] != 0 or qpos[-1] != len(word) - 1:
        raise NotAdmissible("word must start and end with state letters")
    base: list[tuple[int, int]] = []
    for p in qpos:
        x = word[p]
        base.append((alph.group(x), 1 if x > 0 else -1))
    sector_tape: list[int] = []
    for k in range(len(qpos) - 1):
        lpos, rpos = qpos[k], qpos[k + 1]
        u = word[lpos + 1:rpos]
        lx, rx = word[lpos], word[rpos]
        lp, ls = alph.group(lx), (1 if lx > 0 else -1)
        rp, rs = alph.group(rx), (1 if rx > 0 else -1)
        if ls > 0 and rs > 0:
            if rp != lp + 1:
                raise NotAdmissible(
                    f"sector {k}: parts {hw.part_names[lp]} {hw.part_names[rp]} not consecutive")
            tape = lp
        elif ls < 0 and rs < 0:
            if lp != rp + 1:
                raise NotAdmissible(
                    f"sector {k}: inverted parts {hw.part_names[lp]}^-1 {hw.part_names[rp]}^-1 not consecutive")
            tape = rp
        elif ls > 0 and rs < 0:
            # q u q^-1 with u in the alphabet right of q's part
            if lx != -rx:
                raise NotAdmissible(f"sector {k}: q u q'^-1 with distinct letters")
            if lp >= len(hw.tapes):
                raise NotAdmissible(f"sector {k}: no tape alphabet right of part {hw.part_names[lp]}")
            tape = lp
        else:
            # q^-1 u q with u in the alphabet left of q's part
            if lx != -rx:
                raise NotAdmissible(f"sector {k}: q^-1 u q' with distinct letters")
            if lp == 0:
                raise NotAdmissible(f"sector {k}: no tape alphabet left of part {hw.part_names[0]}")
            tape = lp - 1
        allowed = hw.tape_sets[tape]
        for x in u:
            if abs(x) not in allowed:
                raise NotAdmissible(
                    f"sector {k}: letter {alph.name(x)} not in tape alphabet {hw.tape_names[tape]}")
        sector_tape.append(tape)
    return AdmissibleWord(hw, word, qpos, tuple(base), tuple(sector_tape))


@dataclass(frozen=True)
class RulePart:
    """One part [U_i -> V_i] of a rule, spanning base parts lo..hi."""

    lo: int
    hi: int
    u: WordT
    v: WordT


def _part_state_ids(alph: Alphabet, w: WordT) -> list[int]:
    return [x for x in w if alph.kind(x) == Q]


class Rule:
    """An S-rule [U_1 -> V_1, ..., U_m -> V_m] with tape permission sets.

    ``perms[t]`` is the frozenset of allowed tape-letter ids for tape
    alphabet t; ``None`` means the full alphabet.  A locked sector is one
    with an empty permission set.
    """

    def __init__(self, hw: Hardware, name: str, parts: Sequence[RulePart],
                 perms: Optional[dict[int, Optional[frozenset[int]]]] = None,
                 positive: bool = True, _inverse: "Rule | None" = None):
        self.hw = hw
        self.name = name
        self.parts = list(parts)
        self.positive = positive
        self.perms: list[Optional[frozenset[int]]] = [None] * len(hw.tapes)
        if perms:
            for t, s in perms.items():
                self.perms[t] = s
        self._validate()
        # fast path for rules all of whose parts have 1-letter base
        self.simple = all(p.lo == p.hi for p in self.parts)
        self._match: dict[int, tuple[WordT, WordT]] = {}
        if self.simple:
            alph = hw.alphabet
            for p in self.parts:
                qs = _part_state_ids(alph, p.u)
                repl = self._replacement(p)
                self._match[qs[0]] = (repl, invert(repl))
        if _inverse is not None:
            self._inv = _inverse
        else:
            inv_parts = [RulePart(p.lo, p.hi, p.v, p.u) for p in self.parts]
            self._inv = Rule(hw, name + "^-1", inv_parts,
                             {t: s for t, s in enumerate(self.perms)},
                             positive=not positive, _inverse=self)

    def _validate(self) -> None:
        hw, alph = self.hw, self.hw.alphabet
        if not self.parts:
            raise WordError(f"rule {self.name}: no parts")
        spans = sorted((p.lo, p.hi) for p in self.parts)
        if spans[0][0] != 0 or spans[-1][1] != hw.n_parts - 1:
            raise WordError(f"rule {self.name}: parts must start at Q_0 and end at Q_N")
        for (a_lo, a_hi), (b_lo, b_hi) in zip(spans, spans[1:]):
            if b_lo != a_hi + 1:
                raise WordError(f"rule {self.name}: part bases do not tile the standard base")
        for p in self.parts:
            for w in (p.u, p.v):
                qs = [x for x in w if alph.kind(x) == Q]
                if len(qs) != p.hi - p.lo + 1 or any(x < 0 for x in qs):
                    raise WordError(f"rule {self.name}: part words must contain "
                                    f"exactly the positive state letters of their span")
                for x, pi in zip(qs, range(p.lo, p.hi + 1)):
                    if alph.group(x) != pi:
                        raise WordError(f"rule {self.name}: state letter {alph.name(x)} "
                                        f"not in part {hw.part_names[pi]}")
                if not is_reduced(w):
                    raise WordError(f"rule {self.name}: part word not reduced")
        if all(p.u == p.v for p in self.parts):
            raise WordError(f"rule {self.name}: identity rules are not S-rules")
        # context words must lie in the adjacent sector alphabets
        for p in self.parts:
            for w in (p.u, p.v):
                qidx = [i for i, x in enumerate(w) if alph.kind(x) == Q]
                segs = [(w[:qidx[0]], p.lo - 1)]
                for a, b in zip(qidx, qidx[1:]):
                    segs.append((w[a + 1:b], alph.group(w[a])))
                segs.append((w[qidx[-1] + 1:], p.hi))
                for seg, t in segs:
                    if not seg:
                        continue
                    if t < 0 or t >= len(hw.tapes):
                        raise WordError(f"rule {self.name}: tape letters beyond the base ends")
                    for x in seg:
                        if abs(x) not in hw.tape_sets[t]:
                            raise WordError(
                                f"rule {self.name}: letter {alph.name(x)} not in the "
                                f"{hw.tape_names[t]} alphabet of its sector")

    def _replacement(self, p: RulePart) -> WordT:
        # U = u0 q u1 (1-letter base): the occurrence of q is replaced by
        # u0^-1 V u1^-1.
        alph = self.hw.alphabet
        qi = next(i for i, x in enumerate(p.u) if alph.kind(x) == Q)
        u0, u1 = p.u[:qi], p.u[qi + 1:]
        return reduce_word(invert(u0) + p.v + invert(u1))

    def inverse(self) -> "Rule":
        return self._inv

    def locks(self, tape: int) -> bool:
        s = self.perms[tape]
        return s is not None and not s

    def allows(self, tape: int, letter_id: int) -> bool:
        s = self.perms[tape]
        return True if s is None else letter_id in s

    def __repr__(self) -> str:
        return f"<Rule {self.name}>"


def lock_convention_violations(rule: Rule) -> list[str]:
    """Parts adjacent to a locked sector must carry no tape letters on the
    locked side.  The machines built here obey this convention; rules taken
    verbatim from worked examples may not, so it is a check, not an error."""
    alph = rule.hw.alphabet
    out = []
    for p in rule.parts:
        for w, which in ((p.u, "lhs"), (p.v, "rhs")):
            qidx = [i for i, x in enumerate(w) if alph.kind(x) == Q]
            if not qidx:
                continue
            if rule.locks(p.hi) if p.hi < len(rule.perms) else False:
                if qidx[-1] != len(w) - 1:
                    out.append(f"{rule.name}: {which} tape letters right of a lock at part {p.hi}")
            if p.lo - 1 >= 0 and rule.locks(p.lo - 1):
                if qidx[0] != 0:
                    out.append(f"{rule.name}: {which} tape letters left of a lock at part {p.lo}")
    return out


def applicable(rule: Rule, aw: AdmissibleWord) -> bool:
    try:
        check_applicable(rule, aw)
        return True
    except NotApplicable:
        return False


def check_applicable(rule: Rule, aw: AdmissibleWord) -> None:
    """Raise NotApplicable with the offending sector/letter if the rule
    does not apply: every tape letter must be permitted and every state
    letter must occur inside some part subword."""
    alph = aw.hw.alphabet
    for k in range(len(aw.qpos) - 1):
        t = aw.sector_tape[k]
        perm = rule.perms[t]
        if perm is None:
            continue
        for x in aw.word[aw.qpos[k] + 1:aw.qpos[k + 1]]:
            if abs(x) not in perm:
                raise NotApplicable(
                    f"tape letter {alph.name(x)} not in Y({rule.name})", sector=k)
    if rule.simple:
        match = rule._match
        for p in aw.qpos:
            if abs(aw.word[p]) not in match:
                raise NotApplicable(
                    f"state letter {alph.name(aw.word[p])} not rewritten by {rule.name}")
    else:
        _match_blocks(rule, aw)


def _match_blocks(rule: Rule, aw: AdmissibleWord) -> list[tuple[int, int, WordT]]:
    """Cover the word's state letters by Ū_i^{±1} subwords.

    Returns a list of (start, end, replacement) spans over aw.word.  Only
    needed for rules with multi-letter base parts; raises NotApplicable if
    the state letters cannot be covered.
    """
    alph = aw.hw.alphabet
    trimmed: list[tuple[WordT, WordT]] = []
    for p in rule.parts:
        qi_first = next(i for i, x in enumerate(p.u) if alph.kind(x) == Q)
        qi_last = max(i for i, x in enumerate(p.u) if alph.kind(x) == Q)
        ubar = p.u[qi_first:qi_last + 1]
        u0, u1 = p.u[:qi_first], p.u[qi_last + 1:]
        repl = reduce_word(invert(u0) + p.v + invert(u1))
        trimmed.append((ubar, repl))
    spans: list[tuple[int, int, WordT]] = []
    k = 0
    qpos = aw.qpos
    word = aw.word
    while k < len(qpos):
        hit = None
        for ubar, repl in trimmed:
            nq = sum(1 for x in ubar if alph.kind(x) == Q)
            if k + nq > len(qpos):
                continue
            start, end = qpos[k], qpos[k + nq - 1] + 1
            seg = word[start:end]
            if seg == ubar:
                hit = (start, end, repl)
            elif seg == invert(ubar):
                hit = (start, end, invert(repl))
            if hit:
                break
        if hit is None:
            raise NotApplicable(
                f"state letter {alph.name(word[qpos[k]])} not covered by a part of {rule.name}")
        spans.append(hit)
        covered = sum(1 for x in word[hit[0]:hit[1]] if alph.kind(x) == Q)
        k += covered
    return spans


def apply_rule(rule: Rule, aw: AdmissibleWord) -> AdmissibleWord:
    """Apply the rule: substitute, reduce, trim stray end tape letters."""
    check_applicable(rule, aw)
    alph = aw.hw.alphabet
    out: list[int] = []
    if rule.simple:
        match = rule._match
        for x in aw.word:
            if alph.kind(x) == Q:
                plus, minus = match[abs(x)]
                out.extend(plus if x > 0 else minus)
            else:
                out.append(x)
    else:
        spans = _match_blocks(rule, aw)
        pos = 0
        for start, end, repl in spans:
            out.extend(aw.word[pos:start])
            out.extend(repl)
            pos = end
        out.extend(aw.word[pos:])
    red = list(reduce_word(out))
    kinds = alph._kinds
    while red and kinds[abs(red[0])] == A:
        red.pop(0)
    while red and kinds[abs(red[-1])] == A:
        red.pop()
    return parse_admissible(aw.hw, tuple(red))


class SMachine:
    """Hardware plus an involution-closed rule set."""

    def __init__(self, hw: Hardware, rules: Sequence[Rule], name: str = "",
                 input_template: Optional[str] = None,
                 accept_word: Optional[WordT] = None,
                 input_sectors: Optional[list[int]] = None,
                 meta: Optional[dict] = None):
        self.hw = hw
        self.name = name
        self.positive_rules = list(rules)
        for r in self.positive_rules:
            if not r.positive:
                raise WordError(f"rule {r.name} registered as positive but marked negative")
        self.rules: dict[str, Rule] = {}
        for r in self.positive_rules:
            if r.name in self.rules:
                raise WordError(f"duplicate rule name {r.name}")
            self.rules[r.name] = r
            self.rules[r.inverse().name] = r.inverse()
        self.input_template = input_template
        self.accept_word = accept_word
        self.input_sectors = input_sectors or []
        self.meta = meta or {}

    def all_rules(self) -> list[Rule]:
        out = list(self.positive_rules)
        out.extend(r.inverse() for r in self.positive_rules)
        return out

    def rule(self, name: str) -> Rule:
        try:
            return self.rules[name]
        except KeyError:
            raise WordError(f"unknown rule {name!r}") from None

    def parse(self, tokens: str) -> AdmissibleWord:
        return parse_admissible(self.hw, self.hw.word(tokens))

    def parse_word(self, word: WordT) -> AdmissibleWord:
        return parse_admissible(self.hw, word)

    def accept_admissible(self) -> Optional[AdmissibleWord]:
        if self.accept_word is None:
            return None
        return parse_admissible(self.hw, self.accept_word)


@dataclass
class Computation:
    """A start word, a history of rules, and the full trace W_0..W_t."""

    machine: SMachine
    w0: AdmissibleWord
    history: list[Rule] = field(default_factory=list)
    trace: list[AdmissibleWord] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.trace:
            self.trace = [self.w0]

    @property
    def t(self) -> int:
        return len(self.history)

    @property
    def w_t(self) -> AdmissibleWord:
        return self.trace[-1]

    def history_names(self) -> list[str]:
        return [r.name for r in self.history]

    def is_reduced(self) -> bool:
        for a, b in zip(self.history, self.history[1:]):
            if a.inverse() is b:
                return False
        return True


def run(machine: SMachine, w0: AdmissibleWord, history: Sequence[Rule | str]) -> Computation:
    """Apply the history left to right; fail at the first inapplicable rule."""
    comp = Computation(machine, w0)
    cur = w0
    for i, r in enumerate(history):
        rule = machine.rule(r) if isinstance(r, str) else r
        try:
            cur = apply_rule(rule, cur)
        except NotApplicable as e:
            raise RunFailed(i, rule.name, comp, str(e)) from None
        comp.history.append(rule)
        comp.trace.append(cur)
    return comp


@dataclass
class SearchResult:
    found: Optional[Computation]
    visited: int
    capped: int          # configurations skipped by the a-length cap
    depth_reached: int

    @property
    def ok(self) -> bool:
        return self.found is not None


def search_computations(machine: SMachine, w0: AdmissibleWord,
                        target: Callable[[AdmissibleWord], bool],
                        max_depth: int, max_alen: Optional[int] = None) -> SearchResult:
    """Breadth-first search for a shortest history reaching the target.

    Shortest histories are automatically reduced.  Exploration order over
    rules is fixed (positives in insertion order, then their inverses), so
    ties break deterministically.  Configurations whose a-length exceeds
    ``max_alen`` are not expanded; their number is reported.
    """
    rules = machine.all_rules()
    if target(w0):
        return SearchResult(Computation(machine, w0), 1, 0, 0)
    seen: dict[WordT, tuple[WordT, Rule] | None] = {w0.word: None}
    frontier: deque[AdmissibleWord] = deque([w0])
    visited = 1
    capped = 0
    depth = 0
    depth_counts = [1]
    remaining_at_depth = 1
    next_count = 0
    while frontier and depth < max_depth:
        aw = frontier.popleft()
        remaining_at_depth -= 1
        for rule in rules:
            try:
                nxt = apply_rule(rule, aw)
            except NotApplicable:
                continue
            if nxt.word in seen:
                continue
            seen[nxt.word] = (aw.word, rule)
            visited += 1
            if target(nxt):
                hist: list[Rule] = []
                cur = nxt.word
                while seen[cur] is not None:
                    prev, r = seen[cur]  # type: ignore[misc]
                    hist.append(r)
                    cur = prev
                hist.reverse()
                return SearchResult(run(machine, w0, hist), visited, capped, depth + 1)
            if max_alen is not None and nxt.a_len > max_alen:
                capped += 1
                continue
            frontier.append(nxt)
            next_count += 1
        if remaining_at_depth == 0:
            depth += 1
            depth_counts.append(next_count)
            remaining_at_depth = next_count
            next_count = 0
    return SearchResult(None, visited, capped, depth)


def make_rule(machine_hw: Hardware, name: str,
              parts: Sequence[tuple[str, str]],
              perms: Optional[dict[str, Optional[list[str]]]] = None) -> Rule:
    """Convenience constructor from token strings.

    ``parts`` maps token words "v q u" -> "v' q' u'"; spans are inferred
    from the state letters.  ``perms`` maps tape-alphabet names to allowed
    letter lists (empty list = locked sector, absent = full alphabet).
    """
    hw = machine_hw
    alph = hw.alphabet
    rp: list[RulePart] = []
    for utok, vtok in parts:
        u, v = hw.word(utok), hw.word(vtok)
        qs = [x for x in u if alph.kind(x) == Q]
        if not qs:
            raise WordError(f"rule {name}: part {utok!r} has no state letter")
        lo = alph.group(qs[0])
        hi = alph.group(qs[-1])
        rp.append(RulePart(lo, hi, u, v))
    rp.sort(key=lambda p: p.lo)
    pm: dict[int, Optional[frozenset[int]]] = {}
    if perms:
        for tname, letters in perms.items():
            t = hw.tape_names.index(tname)
            pm[t] = None if letters is None else frozenset(alph.id_of(x) for x in letters)
    return Rule(hw, name, rp, pm)
