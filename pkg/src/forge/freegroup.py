"""Reduced words over a finite alphabet of free generators.

A word reads as a product of letters; applied to a point, the rightmost
letter acts first. Words are ordered length-first, then lexicographically
letter by letter, where a letter ``(g, s)`` compares by generator index and
then by sign with -1 before +1.
"""

from dataclasses import dataclass
from typing import NamedTuple

from .errors import WordCountExceeded

DEFAULT_WORD_CAP = 2_000_000


class Letter(NamedTuple):
    gen: int
    sign: int

    def inverse(self):
        return Letter(self.gen, -self.sign)

    def __str__(self):
        return ("g%d" if self.sign > 0 else "G%d") % self.gen


@dataclass(frozen=True)
class Word:
    alphabet_size: int
    letters: tuple = ()

    def __post_init__(self):
        letters = tuple(Letter(int(g), int(s)) for g, s in self.letters)
        for g, s in letters:
            if not 0 <= g < self.alphabet_size:
                raise ValueError(f"generator {g} outside alphabet of size {self.alphabet_size}")
            if s not in (1, -1):
                raise ValueError(f"bad sign {s}")
        object.__setattr__(self, "letters", letters)

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __mul__(self, other):
        if other.alphabet_size != self.alphabet_size:
            raise ValueError("alphabet mismatch")
        return reduce(Word(self.alphabet_size, self.letters + other.letters))

    def inverse(self):
        return Word(self.alphabet_size, tuple(x.inverse() for x in reversed(self.letters)))

    def is_reduced(self):
        return all(
            not (a.gen == b.gen and a.sign == -b.sign)
            for a, b in zip(self.letters, self.letters[1:])
        )

    def sort_key(self):
        return (len(self.letters), self.letters)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __str__(self):
        return " ".join(map(str, self.letters)) or "e"


def identity_word(k):
    return Word(k, ())


def reduce(w):
    """Free reduction by a single left-to-right stack pass."""
    stack = []
    for x in w.letters:
        if stack and stack[-1].gen == x.gen and stack[-1].sign == -x.sign:
            stack.pop()
        else:
            stack.append(x)
    return Word(w.alphabet_size, tuple(stack))


def signed_letters(k):
    """The 2k letters in canonical order."""
    return [Letter(g, s) for g in range(k) for s in (-1, 1)]


def word_count(k, L):
    """Number of nontrivial reduced words of length 1..L over k generators."""
    return sum(2 * k * (2 * k - 1) ** (l - 1) for l in range(1, L + 1))


def enumerate_words(k, L, cap=DEFAULT_WORD_CAP, include_identity=False):
    """All reduced words of length 1..L, length-then-lexicographic order."""
    if k < 1 or L < 0:
        raise ValueError("need k >= 1 and L >= 0")
    total = word_count(k, L)
    if total > cap:
        raise WordCountExceeded(f"{total} words over {k} generators up to length {L} exceed cap {cap}")
    letters = signed_letters(k)
    out = [Word(k, ())] if include_identity else []
    layer = [()]
    for _ in range(L):
        nxt = []
        # extending each word of the previous layer, in order, by letters in
        # order keeps the new layer lexicographically sorted
        for w in layer:
            for x in letters:
                if w and w[-1].gen == x.gen and w[-1].sign == -x.sign:
                    continue
                nxt.append(w + (x,))
        out.extend(Word(k, w) for w in nxt)
        layer = nxt
    return out


def y_seq(n, rank):
    """a^n b^n over the first two generators (x^n when the rank is 1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if rank >= 2:
        return Word(rank, (Letter(0, 1),) * n + (Letter(1, 1),) * n)
    return Word(rank, (Letter(0, 1),) * n)


def runs(w):
    """Collapse a reduced word into (gen, sign, exponent) runs."""
    out = []
    for x in w.letters:
        if out and out[-1][0] == x.gen and out[-1][1] == x.sign:
            out[-1][2] += 1
        else:
            out.append([x.gen, x.sign, 1])
    return [tuple(r) for r in out]


def parse_word(text, alphabet_size):
    """Parse ``g0 g1 G0`` tokens; ``e`` or an empty string is the identity."""
    letters = []
    for tok in text.split():
        if tok == "e":
            continue
        if len(tok) < 2 or tok[0] not in "gG" or not tok[1:].isdigit():
            raise ValueError(f"bad letter token {tok!r}")
        letters.append(Letter(int(tok[1:]), 1 if tok[0] == "g" else -1))
    return Word(alphabet_size, tuple(letters))


def format_word(w):
    return " ".join(map(str, w.letters))
