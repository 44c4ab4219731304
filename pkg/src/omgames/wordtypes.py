"""Word values shared by the dynamics engines and the word abstraction."""
from __future__ import annotations

import re
from typing import NamedTuple


class WordError(ValueError):
    pass


def _join(names) -> str:
    names = list(names)
    if all(len(n) == 1 for n in names):
        return "".join(names)
    return ".".join(names)


class SuffixWord(NamedTuple):
    """A finite word, or an eventually periodic one ``letters (cycle)^omega``."""

    letters: tuple
    cycle: tuple = ()

    def __str__(self):
        s = _join(self.letters)
        if self.cycle:
            sep = "." if (s and "." in s) or any(len(n) > 1 for n in self.cycle) else ""
            s = f"{s}{sep}({_join(self.cycle)})" if s else f"({_join(self.cycle)})"
        return s

    def positions(self):
        """Letters of the prefix followed by one unrolled cycle (enough for safety scans)."""
        return self.letters + self.cycle

    def first(self) -> str:
        return (self.letters + self.cycle)[0]

    def tail(self) -> "SuffixWord":
        """The word with its first letter removed."""
        if self.letters:
            if len(self.letters) == 1 and not self.cycle:
                raise WordError("the one-letter word has no proper suffix")
            return SuffixWord(self.letters[1:], self.cycle)
        return SuffixWord((), self.cycle[1:] + self.cycle[:1])

    def proper_suffixes(self) -> list:
        out, w, seen = [], self, {self}
        while True:
            if not w.cycle and len(w.letters) <= 1:
                return out
            w = w.tail()
            if w in seen:
                return out
            seen.add(w)
            out.append(w)


def make_word(letters, cycle=()) -> SuffixWord:
    """Build a word, collapsing repeated consecutive letters and rotating cycles canonically."""
    letters, cycle = list(letters), list(cycle)
    if not letters and not cycle:
        raise WordError("empty word")
    for seq in (letters, cycle):
        for a, b in zip(seq, seq[1:]):
            if a == b:
                raise WordError("consecutive letters must differ")
    if cycle:
        if len(cycle) > 1 and cycle[0] == cycle[-1] or len(cycle) == 1 and letters and letters[-1] == cycle[0]:
            raise WordError("consecutive letters must differ around the cycle")
        # shortest period
        for k in range(1, len(cycle) + 1):
            if len(cycle) % k == 0 and cycle == cycle[:k] * (len(cycle) // k):
                cycle = cycle[:k]
                break
        if len(cycle) == 1:
            # staying in one piece forever is the finite word ending there
            return SuffixWord(tuple(letters + cycle), ())
        # absorb prefix letters that already continue the cycle backwards
        while letters and letters[-1] == cycle[-1]:
            letters.pop()
            cycle = cycle[-1:] + cycle[:-1]
    return SuffixWord(tuple(letters), tuple(cycle))


_CYCLE = re.compile(r"^(?P<pre>[^()]*)(?:\((?P<cyc>[^()]+)\))?$")


def parse_word(text: str) -> SuffixWord:
    text = text.strip()
    m = _CYCLE.match(text)
    if not m:
        raise WordError(f"bad word {text!r}")

    def split(s):
        s = s.strip(".")
        if not s:
            return []
        return s.split(".") if "." in s else list(s)

    return make_word(split(m.group("pre") or ""), split(m.group("cyc") or ""))


class Superword(NamedTuple):
    """Letters are frozensets of piece names; windows are the matching time intervals."""

    letters: tuple
    windows: tuple = ()

    def __str__(self):
        return "".join("{" + ",".join(sorted(s)) + "}" for s in self.letters)

    def word(self) -> tuple:
        return self.letters


def parse_superword(text: str) -> Superword:
    parts = re.findall(r"\{([^{}]*)\}", text)
    if not parts or "".join("{" + p + "}" for p in parts) != text.replace(" ", ""):
        raise WordError(f"bad superword {text!r}")
    letters = tuple(frozenset(x.strip() for x in p.split(",") if x.strip()) for p in parts)
    if any(not s for s in letters):
        raise WordError("superword letters must be nonempty")
    for a, b in zip(letters, letters[1:]):
        if a == b:
            raise WordError("consecutive superword letters must differ")
    return Superword(letters)


def format_word_set(words) -> str:
    return "{" + ",".join(sorted(str(w) for w in words)) + "}"
