"""Letters and freely reduced words over partitioned group alphabets.

Words are stored as tuples of signed integer letter ids: ``+i`` is the
positive letter with id ``i``, ``-i`` its inverse.  Id 0 is never used.
The mapping between ids and named letters lives in an :class:`Alphabet`,
one per machine, so the hot loops (reduction, rule application, search)
work on plain int tuples.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

WordT = tuple[int, ...]

Q = "q"  # state letters
A = "a"  # tape letters


class WordError(ValueError):
    pass


@dataclass(frozen=True)
class Letter:
    """Read-only view of one alphabet entry."""

    id: int
    name: str
    kind: str          # Q or A
    group: int         # part index for state letters, tape index for tape letters
    index: int         # position inside its group


class Alphabet:
    """Registry of the letters of one machine.

    Letters are grouped into state parts and tape alphabets; groups are
    pairwise disjoint by construction (every name may be registered once).
    """

    def __init__(self) -> None:
        self._names: list[str] = ["<0>"]
        self._kinds: list[str] = ["<0>"]
        self._groups: list[int] = [0]
        self._index: list[int] = [0]
        self._by_name: dict[str, int] = {}

    def __len__(self) -> int:
        return len(self._names) - 1

    def add(self, name: str, kind: str, group: int, index: int) -> int:
        if not name or " " in name or "^" in name:
            raise WordError(f"bad letter name {name!r}")
        if name in self._by_name:
            raise WordError(f"duplicate letter name {name!r}")
        if kind not in (Q, A):
            raise WordError(f"bad letter kind {kind!r}")
        lid = len(self._names)
        self._names.append(name)
        self._kinds.append(kind)
        self._groups.append(group)
        self._index.append(index)
        self._by_name[name] = lid
        return lid

    def id_of(self, name: str) -> int:
        try:
            return self._by_name[name]
        except KeyError:
            raise WordError(f"unknown letter {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def name(self, lid: int) -> str:
        return self._names[abs(lid)]

    def kind(self, lid: int) -> str:
        return self._kinds[abs(lid)]

    def group(self, lid: int) -> int:
        return self._groups[abs(lid)]

    def letter(self, lid: int) -> Letter:
        i = abs(lid)
        return Letter(i, self._names[i], self._kinds[i], self._groups[i], self._index[i])

    def letters(self) -> Iterator[Letter]:
        for i in range(1, len(self._names)):
            yield self.letter(i)

    # -- token round trip ----------------------------------------------------

    def to_tokens(self, word: Iterable[int]) -> str:
        parts = []
        for x in word:
            n = self._names[abs(x)]
            parts.append(n if x > 0 else n + "^-1")
        return " ".join(parts)

    def from_tokens(self, text: str) -> WordT:
        out = []
        for tok in text.split():
            if tok.endswith("^-1"):
                out.append(-self.id_of(tok[:-3]))
            elif tok.endswith("^1"):
                out.append(self.id_of(tok[:-2]))
            else:
                out.append(self.id_of(tok))
        return tuple(out)


def reduce_word(seq: Iterable[int]) -> WordT:
    """Free reduction: cancel adjacent x, x^-1 pairs until none remain."""
    stack: list[int] = []
    push = stack.append
    pop = stack.pop
    for x in seq:
        if stack and stack[-1] == -x:
            pop()
        else:
            push(x)
    return tuple(stack)


def is_reduced(word: Iterable[int]) -> bool:
    prev = 0
    for x in word:
        if prev == -x:
            return False
        prev = x
    return True


def invert(word: Iterable[int]) -> WordT:
    """Group inverse: reverse the word and flip every sign."""
    return tuple(-x for x in reversed(tuple(word)))


def concat(*words: Iterable[int]) -> WordT:
    out: list[int] = []
    for w in words:
        out.extend(w)
    return reduce_word(out)


def copy_word(word: Iterable[int], renaming: Mapping[int, int]) -> WordT:
    """Letter-by-letter image of ``word`` under an injective letter map.

    The map sends positive ids to positive ids; signs carry over.  Raises on
    letters missing from the map, and rejects non-injective maps up front so
    that copies of distinct words stay distinct.
    """
    seen: dict[int, int] = {}
    for src, dst in renaming.items():
        if dst in seen and seen[dst] != src:
            raise WordError("renaming is not injective")
        seen[dst] = src
    out = []
    for x in word:
        try:
            y = renaming[abs(x)]
        except KeyError:
            raise WordError(f"letter id {abs(x)} missing from renaming") from None
        out.append(y if x > 0 else -y)
    return tuple(out)


def a_length(alphabet: Alphabet, word: Iterable[int]) -> int:
    """Number of tape letters in the word (the paper's |W|_a)."""
    kinds = alphabet._kinds
    return sum(1 for x in word if kinds[abs(x)] == A)
