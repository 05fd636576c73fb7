"""Canonical shortest generator words between two elements of one block.

A step is ``(gen, sign)``; steps are listed left to right and the rightmost
step acts on the start point first, so ``steps = (s0, s1, s2)`` carries ``a``
to ``s0(s1(s2(a)))``. Among all minimal-length step sequences the
lexicographically least one is returned, comparing steps by generator index
(equivalently nu in node order) and then sign with -1 before +1.
"""

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import Unreachable
from .tower import node_str, nu_of


@dataclass(frozen=True)
class Geodesic:
    steps: tuple
    depth: int = 0

    @property
    def length(self):
        return len(self.steps)

    def labels(self):
        """Generator labels as nu bit tuples."""
        return tuple(nu_of(g, self.depth) for g, _ in self.steps)

    def signs(self):
        return tuple(s for _, s in self.steps)

    def is_reduced(self):
        return all(not (g1 == g2 and s1 == -s2)
                   for (g1, s1), (g2, s2) in zip(self.steps, self.steps[1:]))

    def __str__(self):
        if not self.steps:
            return "e"
        return " ".join(f"{node_str(nu_of(g, self.depth))}:{'+' if s > 0 else '-'}"
                        for g, s in self.steps)


def _moves(level):
    """Move tables in canonical step order with their (gen, sign) labels."""
    out = []
    for g in range(level.ngens):
        out.append(((g, -1), np.asarray(level.finv[g])))
        out.append(((g, 1), np.asarray(level.f[g])))
    return out


def distances_from(level, a):
    """BFS distances from ``a`` in the graph with edges x -> f^(+-1)(x); -1 if unreached."""
    tables = [t for _, t in _moves(level)]
    dist = np.full(level.size, -1, dtype=np.int64)
    dist[a] = 0
    frontier = np.array([a], dtype=np.int64)
    d = 0
    while len(frontier):
        d += 1
        nxt = np.unique(np.concatenate([t[frontier] for t in tables]))
        nxt = nxt[dist[nxt] < 0]
        dist[nxt] = d
        frontier = nxt
    return dist


def apply_steps(level, steps, a):
    x = a
    for g, s in reversed(steps):
        x = int(level.move(g, s)[x])
    return x


def geodesic(level, a, b, dist=None):
    if not (0 <= a < level.size and 0 <= b < level.size):
        raise IndexError("elements must lie in the block")
    if dist is None:
        dist = distances_from(level, a)
    L = int(dist[b])
    if L < 0:
        raise Unreachable(f"{b} is not reachable from {a}")
    moves = _moves(level)
    steps, cur = [], b
    for remaining in range(L, 0, -1):
        # the leftmost step is applied last: undo it from the current end
        for (g, s), _ in moves:
            prev = int(level.move(g, -s)[cur])
            if dist[prev] == remaining - 1:
                steps.append((g, s))
                cur = prev
                break
    return Geodesic(tuple(steps), level.depth)


def geodesics_from(level, a):
    """Canonical geodesics from ``a`` to every element, vectorized over targets.

    Returns (dist, codes) where codes[b, j] is the step code (2*g for sign -1,
    2*g+1 for sign +1) at position j of the geodesic to b, or -1 past its end.
    """
    dist = distances_from(level, a)
    if (dist < 0).any():
        raise Unreachable(f"not every element is reachable from {a}")
    moves = _moves(level)
    inv = [np.asarray(level.move(g, -s)) for (g, s), _ in moves]
    n = level.size
    L = int(dist.max())
    codes = np.full((n, L), -1, dtype=np.int64)
    cur = np.arange(n)
    rem = dist.copy()
    for j in range(L):
        active = rem > 0
        chosen = np.full(n, -1, dtype=np.int64)
        nxt = cur.copy()
        for c, t in enumerate(inv):
            prev = t[cur]
            take = active & (chosen < 0) & (dist[prev] == rem - 1)
            chosen[take] = c
            nxt[take] = prev[take]
        codes[:, j] = chosen
        cur = nxt
        rem = np.where(active, rem - 1, rem)
    return dist, codes


def code_step(code):
    return (code // 2, 1 if code % 2 else -1)


def apply_codes(level, codes, a):
    """Evaluate a batch of code rows at ``a``; rows are padded with -1."""
    moves = [t for _, t in _moves(level)]
    x = np.full(codes.shape[0], a, dtype=np.int64)
    for j in range(codes.shape[1] - 1, -1, -1):
        col = codes[:, j]
        for c in np.unique(col[col >= 0]):
            sel = col == c
            x[sel] = moves[c][x[sel]]
    return x


@dataclass(frozen=True)
class Census:
    histogram: dict
    diameter: int
    pairs: int

    def lines(self, label="-"):
        hist = " ".join(f"{d}:{c}" for d, c in sorted(self.histogram.items()))
        return [f"CENSUS {label} pairs={self.pairs} diameter={self.diameter} hist={hist}"]


def distance_census(level):
    hist = Counter()
    for a in range(level.size):
        dist = distances_from(level, a)
        if (dist < 0).any():
            raise Unreachable(f"not every element is reachable from {a}")
        vals, counts = np.unique(dist, return_counts=True)
        hist.update(dict(zip(vals.tolist(), counts.tolist())))
    return Census(dict(hist), max(hist), level.size ** 2)
