"""Homogeneous subsets for finite colorings of pairs and triples.

Pairs: a greedy pigeonhole chain first; when it falls short of the target
size an exact clique search per color takes over. Triples: the usual
stepping argument reduces to a pair coloring on a chain.
"""

from collections import Counter
from dataclasses import dataclass
from itertools import combinations


@dataclass(frozen=True)
class HomogeneousSubset:
    indices: tuple
    color: object

    def __len__(self):
        return len(self.indices)


def pair_bound(n, colors):
    """floor(log_colors n) - 1, the size aimed for over n items."""
    if n < 1 or colors < 2:
        return n
    e = 0
    while colors ** (e + 1) <= n:
        e += 1
    return max(1, e - 1)


def greedy_chain(n, color_of):
    """Pigeonhole chain: (chain indices, color from each chain point forward)."""
    rest = list(range(n))
    chain, cols = [], []
    while rest:
        x, rest = rest[0], rest[1:]
        chain.append(x)
        if not rest:
            cols.append(None)
            break
        groups = {}
        for y in rest:
            groups.setdefault(color_of(x, y), []).append(y)
        # largest class; ties go to the color seen first
        c = max(groups, key=lambda k: len(groups[k]))
        cols.append(c)
        rest = groups[c]
    return chain, cols


def _clique(n, adj, target):
    """Some clique of size target in the graph (adjacency bitmasks), or None."""
    best = None

    def grow(clique, cand):
        nonlocal best
        if len(clique) == target:
            best = list(clique)
            return True
        if len(clique) + bin(cand).count("1") < target:
            return False
        while cand:
            v = cand.bit_length() - 1
            cand &= ~(1 << v)
            if grow(clique + [v], cand & adj[v]):
                return True
        return False

    grow([], (1 << n) - 1)
    return sorted(best) if best else None


def homogenize_pairs(items, coloring, colors=None, target=None):
    """Monochromatic subset (indices into items) for a pair coloring.

    ``coloring(x, y)`` is called with x before y in item order.
    """
    items = list(items)
    n = len(items)
    if n == 0:
        raise ValueError("items must be nonempty")
    color_of = lambda i, j: coloring(items[i], items[j])
    chain, cols = greedy_chain(n, color_of)
    tally = Counter(c for c in cols if c is not None)
    if tally:
        top = max(tally, key=lambda c: (tally[c], -cols.index(c)))
        pick = [x for x, c in zip(chain, cols) if c == top] + [chain[-1]]
        pick = sorted(set(pick))
        result = HomogeneousSubset(tuple(pick), top)
    else:
        result = HomogeneousSubset((0,), None)
    if colors is None:
        colors = max(2, len({color_of(i, j) for i, j in combinations(range(n), 2)}))
    if target is None:
        target = pair_bound(n, colors)
    if len(result) >= target:
        return result
    palette = sorted({color_of(i, j) for i, j in combinations(range(n), 2)}, key=repr)
    for c in palette:
        adj = [0] * n
        for i, j in combinations(range(n), 2):
            if color_of(i, j) == c:
                adj[i] |= 1 << j
                adj[j] |= 1 << i
        found = _clique(n, adj, target)
        if found:
            return HomogeneousSubset(tuple(found), c)
    return result


def homogenize_triples(items, coloring, colors=None):
    """Monochromatic subset for a triple coloring ``coloring(x, y, z)``, x<y<z."""
    items = list(items)
    n = len(items)
    if n == 0:
        raise ValueError("items must be nonempty")
    if n < 3:
        return HomogeneousSubset(tuple(range(n)), None)
    rest = list(range(n))
    chain = []
    # after each step every later element sees the same colors against
    # every pair of chain elements
    while rest:
        x, rest = rest[0], rest[1:]
        groups = {}
        for y in rest:
            key = tuple(coloring(items[p], items[x], items[y]) for p in chain)
            groups.setdefault(key, []).append(y)
        chain.append(x)
        if not groups:
            break
        best = max(groups, key=lambda k: len(groups[k]))
        rest = groups[best]
    if len(chain) < 3:
        return HomogeneousSubset(tuple(chain), None)
    nxt = {chain[i]: chain[i + 1] for i in range(len(chain) - 1)}
    derived = lambda p, q: coloring(items[p], items[q], items[nxt[q]])
    inner = chain[:-1]
    sub = homogenize_pairs(inner, derived, colors)
    pick = sorted({inner[i] for i in sub.indices} | {chain[-1]})
    return HomogeneousSubset(tuple(pick), sub.color)


def is_homogeneous_pairs(items, coloring, indices, color):
    return all(coloring(items[i], items[j]) == color for i, j in combinations(sorted(indices), 2))


def is_homogeneous_triples(items, coloring, indices, color):
    return all(coloring(items[i], items[j], items[k]) == color
               for i, j, k in combinations(sorted(indices), 3))

