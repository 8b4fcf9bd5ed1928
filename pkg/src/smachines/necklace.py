"""Two-colored necklaces and the mixture invariant.

A necklace is a cyclic sequence of black and white beads; the J-mixture
counts, for each j <= J, the ordered pairs of distinct white beads whose
clockwise arc from the first to the second contains at least j black
beads.  Equivalently each ordered white pair contributes
min(J, #black on its arc).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

BLACK = "B"
WHITE = "W"


@dataclass(frozen=True)
class Necklace:
    beads: tuple[str, ...]

    def __post_init__(self):
        if any(b not in (BLACK, WHITE) for b in self.beads):
            raise ValueError("beads must be 'B' or 'W'")

    @staticmethod
    def of(s: Iterable[str]) -> "Necklace":
        return Necklace(tuple(s))

    def canonical(self) -> tuple[str, ...]:
        """Lexicographically minimal rotation, for equality as necklaces."""
        if not self.beads:
            return ()
        rots = [self.beads[i:] + self.beads[:i] for i in range(len(self.beads))]
        return min(rots)

    def same_necklace(self, other: "Necklace") -> bool:
        return self.canonical() == other.canonical()

    @property
    def whites(self) -> int:
        return sum(1 for b in self.beads if b == WHITE)

    @property
    def blacks(self) -> int:
        return sum(1 for b in self.beads if b == BLACK)

    def remove(self, position: int) -> "Necklace":
        if not (0 <= position < len(self.beads)):
            raise IndexError(f"bead position {position} out of range")
        return Necklace(self.beads[:position] + self.beads[position + 1:])


def mixture(o: Necklace, J: int) -> int:
    """The J-mixture: sum over ordered white pairs of min(J, blacks on the
    clockwise arc).  O(n^2) with a prefix sum of black beads."""
    if J < 1:
        raise ValueError("J must be at least 1")
    n = len(o.beads)
    if n == 0:
        return 0
    pref = [0]
    for b in o.beads:
        pref.append(pref[-1] + (1 if b == BLACK else 0))
    total_black = pref[-1]
    whites = [i for i, b in enumerate(o.beads) if b == WHITE]
    out = 0
    for i in whites:
        for k in whites:
            if i == k:
                continue
            if k > i:
                blacks = pref[k] - pref[i + 1] if k >= i + 1 else 0
            else:
                blacks = (total_black - pref[i + 1]) + pref[k]
            out += min(J, blacks)
    return out


def mixture_brute(o: Necklace, J: int) -> int:
    """Literal double loop over P_j sets; oracle for the fast version."""
    n = len(o.beads)
    whites = [i for i, b in enumerate(o.beads) if b == WHITE]
    total = 0
    for j in range(1, J + 1):
        for i in whites:
            for k in whites:
                if i == k:
                    continue
                blacks = 0
                p = (i + 1) % n
                while p != k:
                    if o.beads[p] == BLACK:
                        blacks += 1
                    p = (p + 1) % n
                if blacks >= j:
                    total += 1
    return total


def check_triple_removal(o: Necklace, v1: int, v2: int, v3: int, J: int) -> bool:
    """Removal of the middle of three black beads drops the mixture by at
    least m1*m2, when the clockwise arc v1..v3 contains v2 and at most J
    black beads strictly inside."""
    beads = o.beads
    n = len(beads)
    for v in (v1, v2, v3):
        if beads[v] != BLACK:
            raise ValueError("v1, v2, v3 must be black beads")

    def arc(a, b):
        out = []
        p = (a + 1) % n
        while p != b:
            out.append(p)
            p = (p + 1) % n
        return out

    a13 = arc(v1, v3)
    if v2 not in a13:
        raise ValueError("the clockwise arc v1..v3 must contain v2")
    inner_black = sum(1 for p in a13 if beads[p] == BLACK)
    if inner_black > J:
        raise ValueError("arc v1..v3 has more than J black beads inside")
    m1 = sum(1 for p in arc(v1, v2) if beads[p] == WHITE)
    m2 = sum(1 for p in arc(v2, v3) if beads[p] == WHITE)
    return mixture(o.remove(v2), J) <= mixture(o, J) - m1 * m2
