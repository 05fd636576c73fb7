"""Branch-indexed permutations of the whole universe and words over them.

A branch is given by a finite bit prefix at least as long as the tower depth.
On the block of node rho the branch permutation acts as the generator of that
level labelled by the branch's first len(rho) bits.
"""

from dataclasses import dataclass

import numpy as np

from .tower import meet_len, node_str, nu_index, parse_node


def as_branch(bits):
    if isinstance(bits, str):
        return parse_node(bits)
    return tuple(int(b) for b in bits)


def _need(tower, nu):
    if len(nu) < tower.depth:
        raise ValueError(f"branch prefix of length {len(nu)} is shorter than tower depth {tower.depth}")


@dataclass(frozen=True)
class BranchWord:
    letters: tuple = ()

    def __post_init__(self):
        letters = tuple((as_branch(b), int(s)) for b, s in self.letters)
        for _, s in letters:
            if s not in (1, -1):
                raise ValueError(f"bad sign {s}")
        object.__setattr__(self, "letters", letters)

    def __len__(self):
        return len(self.letters)

    def branches(self):
        """Distinct branch symbols in order of first appearance."""
        out = []
        for b, _ in self.letters:
            if b not in out:
                out.append(b)
        return out

    def is_reduced(self):
        return all(not (b1 == b2 and s1 == -s2)
                   for (b1, s1), (b2, s2) in zip(self.letters, self.letters[1:]))

    def inverse(self):
        return BranchWord(tuple((b, -s) for b, s in reversed(self.letters)))

    def __str__(self):
        return " ".join(f"b:{node_str(b)}:{'+' if s > 0 else '-'}" for b, s in self.letters)


def parse_branch_word(text):
    letters = []
    for tok in text.split():
        parts = tok.split(":")
        if len(parts) != 3 or parts[0] != "b" or parts[2] not in ("+", "-"):
            raise ValueError(f"bad branch letter {tok!r}, expected b:<bits>:<+|->")
        letters.append((parse_node(parts[1]), 1 if parts[2] == "+" else -1))
    return BranchWord(tuple(letters))


def separation_depth(branches):
    """Least d at which the given distinct branches have pairwise distinct prefixes."""
    branches = list(branches)
    d = 0
    for i in range(len(branches)):
        for j in range(i + 1, len(branches)):
            d = max(d, meet_len(branches[i], branches[j]) + 1)
    return d


def gstar_apply(tower, nu, x):
    nu = as_branch(nu)
    _need(tower, nu)
    lv, loc = tower.locate(int(x))
    return lv.base + int(lv.f[nu_index(nu[:lv.depth])][loc])


def gstar_perm(tower, nu, sign=1):
    """The branch permutation (or its inverse) as an array over global ids."""
    nu = as_branch(nu)
    _need(tower, nu)
    out = np.empty(tower.size, dtype=np.int64)
    for lv in tower.levels:
        t = lv.move(nu_index(nu[:lv.depth]), sign)
        out[lv.base:lv.base + lv.size] = np.asarray(t) + lv.base
    return out


def word_perm(tower, w):
    """Permutation of the universe induced by w; the rightmost letter acts first."""
    out = np.arange(tower.size, dtype=np.int64)
    for nu, s in reversed(w.letters):
        out = gstar_perm(tower, nu, s)[out]
    return out


def eval_word(tower, w, x):
    x = int(x)
    for nu, s in reversed(w.letters):
        nu = as_branch(nu)
        _need(tower, nu)
        lv, loc = tower.locate(x)
        x = lv.base + int(lv.move(nu_index(nu[:lv.depth]), s)[loc])
    return x


@dataclass(frozen=True)
class FixedPointReport:
    per_node: dict
    total: int
    confinement_depth: object  # None for the empty word

    def lines(self):
        out = [f"FIX {node_str(node)} {c}" for node, c in self.per_node.items()]
        cd = "undefined" if self.confinement_depth is None else self.confinement_depth
        out.append(f"FIXED total={self.total} confinement={cd}")
        return out


def fixed_points(tower, w):
    perm = word_perm(tower, w)
    fixed = perm == np.arange(tower.size)
    per_node = {}
    for lv in tower.levels:
        per_node[lv.node] = int(fixed[lv.base:lv.base + lv.size].sum())
    if len(w) == 0:
        depth = None
    else:
        bad = [len(node) for node, c in per_node.items() if c]
        depth = max(bad) + 1 if bad else 0
    return FixedPointReport(per_node, int(fixed.sum()), depth)


def _check_word(tower, w):
    if len(w) == 0:
        raise ValueError("word must be nontrivial")
    if not w.is_reduced():
        raise ValueError("word is not reduced")
    branches = w.branches()
    for b in branches:
        _need(tower, b)
    cut = [b[:tower.depth] for b in branches]
    if len(set(cut)) != len(cut):
        raise ValueError("branch prefixes are not pairwise distinct within the tower depth")
    return branches


def confinement_bound(tower, w):
    return max(len(w), separation_depth(_check_word(tower, w)))


def confinement_check(tower, w):
    """True iff every fixed point of w lies in a block shallower than the bound."""
    bound = confinement_bound(tower, w)
    rep = fixed_points(tower, w)
    return all(c == 0 for node, c in rep.per_node.items() if len(node) >= bound)


def random_branch_word(rng, depth, max_len, nbranches=None, min_len=1):
    """Seeded random reduced word over pairwise distinct branch prefixes of length ``depth``."""
    if nbranches is None:
        nbranches = int(rng.integers(1, max_len + 1))
    nbranches = min(nbranches, 2 ** depth)
    codes = rng.choice(2 ** depth, size=nbranches, replace=False)
    branches = [tuple((int(c) >> (depth - 1 - i)) & 1 for i in range(depth)) for c in codes]
    length = int(rng.integers(min_len, max_len + 1))
    letters = []
    while len(letters) < length:
        b = branches[int(rng.integers(nbranches))]
        s = 1 if rng.integers(2) else -1
        if letters and letters[-1] == (b, -s):
            continue
        letters.append((b, s))
    return BranchWord(tuple(letters))
