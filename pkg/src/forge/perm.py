"""Small permutation toolkit.

Permutations are image arrays: ``p[i]`` is the image of point ``i``.
Composition is functional, ``compose(p, q)(x) == p(q(x))``.
"""

import numpy as np


def identity(n):
    return np.arange(n, dtype=np.int64)


def as_perm(p):
    arr = np.asarray(p, dtype=np.int64)
    if arr.ndim != 1:
        raise ValueError("permutation must be one-dimensional")
    return arr


def is_perm(p):
    arr = np.asarray(p)
    n = len(arr)
    if n == 0:
        return True
    if arr.min() < 0 or arr.max() >= n:
        return False
    return len(np.unique(arr)) == n


def check_perm(p):
    if not is_perm(p):
        raise ValueError("not a permutation")


def compose(p, q):
    return np.asarray(p)[np.asarray(q)]


def inverse(p):
    p = np.asarray(p)
    inv = np.empty_like(p)
    inv[p] = np.arange(len(p), dtype=p.dtype)
    return inv


def power(p, e):
    p = np.asarray(p)
    if e < 0:
        p, e = inverse(p), -e
    out = np.arange(len(p), dtype=p.dtype)
    base = p
    while e:
        if e & 1:
            out = base[out]
        base = base[base]
        e >>= 1
    return out


def fixed_points(p):
    p = np.asarray(p)
    return np.flatnonzero(p == np.arange(len(p)))


def is_even(p):
    p = np.asarray(p)
    seen = np.zeros(len(p), dtype=bool)
    transpositions = 0
    for i in range(len(p)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = p[j]
            length += 1
        transpositions += length - 1
    return transpositions % 2 == 0


def cycles(p):
    """Cycle decomposition, fixed points omitted."""
    p = np.asarray(p)
    seen = set()
    out = []
    for i in range(len(p)):
        if i in seen or p[i] == i:
            continue
        cyc = [i]
        seen.add(i)
        j = int(p[i])
        while j != i:
            seen.add(j)
            cyc.append(j)
            j = int(p[j])
        out.append(tuple(cyc))
    return out


def fmt_perm(p):
    out = "".join("(%s)" % " ".join(map(str, c)) for c in cycles(p))
    return out or "()"
