"""Plain-text formats for permutations of the universe and ideal generators."""

import numpy as np

from . import perm as P
from .ideal import IdealGenerator
from .tower import node_str, parse_node


def dumps_perm(f):
    f = np.asarray(f)
    lines = [f"PERM {len(f)}"]
    lines += [f"{i} {int(x)}" for i, x in enumerate(f)]
    return "\n".join(lines) + "\n"


def loads_perm(text):
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0][0] != "PERM" or len(lines[0]) != 2:
        raise ValueError("missing PERM header")
    n = int(lines[0][1])
    f = np.full(n, -1, dtype=np.int64)
    for tok in lines[1:]:
        if len(tok) != 2:
            raise ValueError(f"bad line {' '.join(tok)!r}")
        i, j = int(tok[0]), int(tok[1])
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"pair {i} {j} outside 0..{n - 1}")
        if f[i] >= 0:
            raise ValueError(f"point {i} listed twice")
        f[i] = j
    if (f < 0).any() or not P.is_perm(f):
        raise ValueError("permutation file is not a bijection")
    return f


def save_perm(f, path):
    with open(path, "w") as fh:
        fh.write(dumps_perm(f))


def load_perm(path):
    with open(path) as fh:
        return loads_perm(fh.read())


def dumps_gens(gens):
    return "".join(f"GEN {node_str(g.witness)} {' '.join(map(str, sorted(g.v)))}".rstrip() + "\n"
                   for g in gens)


def loads_gens(text):
    gens = []
    for ln in text.splitlines():
        tok = ln.split()
        if not tok:
            continue
        if tok[0] != "GEN" or len(tok) < 2:
            raise ValueError(f"bad generator line {ln!r}")
        gens.append(IdealGenerator(frozenset(int(x) for x in tok[2:]), parse_node(tok[1])))
    return gens
