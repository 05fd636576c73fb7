"""Finite witnesses for the ideal generated by meet-sparse sets.

A set v of global ids has witness branch rho when, for each meet length n,
at most one element of v sits in a block whose node meets rho in exactly n
bits. Membership in the generated ideal is only decided relative to an
explicit finite family of generators plus a finite slack set.
"""

from collections import defaultdict
from dataclasses import dataclass

from .errors import DepthExceeded
from .tower import meet_len, nodes_upto, star_key


@dataclass(frozen=True)
class IdealGenerator:
    v: frozenset
    witness: tuple

    def __post_init__(self):
        object.__setattr__(self, "v", frozenset(int(x) for x in self.v))
        object.__setattr__(self, "witness", tuple(int(b) for b in self.witness))


def meet_classes(tower, v, rho):
    """meet length -> sorted list of (gid, node)."""
    out = defaultdict(list)
    for a in sorted(v):
        node = tower.node_of(a)
        out[meet_len(rho, node)].append((a, node))
    return dict(out)


def verify_witness(tower, v, rho):
    rho = tuple(rho)
    if len(rho) < tower.depth:
        raise ValueError("witness branch shorter than tower depth")
    return all(len(group) <= 1 for group in meet_classes(tower, v, rho).values())


@dataclass(frozen=True)
class AvoidingNode:
    node: tuple
    k: int
    eta: tuple
    bounds: tuple  # n(i) per generator, -1 when its meet class is empty

    def lines(self, tower):
        from .tower import node_str
        blk = tower.block(self.node)
        return [f"AVOID k={self.k} eta={node_str(self.eta)} node={node_str(self.node)} "
                f"bounds={','.join(map(str, self.bounds))} block={blk.start}..{blk.stop - 1}"]


def find_avoiding_node(tower, gens):
    """A node whose block misses every generator set.

    k is least with 2^k above the generator count; eta is the first length-k
    node (in node order) that is not a prefix of any witness; n(i) is the
    largest node length among the elements of v_i in the meet class of eta
    and rho_i. The answer is eta padded with zeros past every n(i).
    """
    gens = list(gens)
    if not gens:
        raise ValueError("need at least one generator")
    k = 0
    while 2 ** k <= len(gens):
        k += 1
    if k > tower.depth:
        raise DepthExceeded(f"need nodes of length {k}, tower depth is {tower.depth}")
    for g in gens:
        if len(g.witness) < max(k, tower.depth):
            raise ValueError("witness branch shorter than tower depth")
    cuts = {g.witness[:k] for g in gens}
    eta = next(x for x in nodes_upto(k) if len(x) == k and x not in cuts)
    bounds = []
    for g in gens:
        ki = meet_len(eta, g.witness)
        lengths = [len(tower.node_of(a)) for a in g.v
                   if meet_len(g.witness, tower.node_of(a)) == ki]
        bounds.append(max(lengths, default=-1))
    L = max([k] + [b + 1 for b in bounds])
    if L > tower.depth:
        raise DepthExceeded(f"the avoiding node needs length {L}, tower depth is {tower.depth}")
    node = eta + (0,) * (L - k)
    return AvoidingNode(node, k, eta, tuple(bounds))


def covered_by(tower, x, gens, slack=()):
    cover = set(int(s) for s in slack)
    for g in gens:
        cover |= g.v
    return set(int(a) for a in x) <= cover


def random_generator(tower, rng, max_node_depth=None, density=0.7):
    """A seeded random witness-valid generator.

    For each meet length n, with probability ``density`` one element is
    placed in a random node of length <= max_node_depth meeting rho in
    exactly n bits.
    """
    if max_node_depth is None:
        max_node_depth = tower.depth
    rho = tuple(int(b) for b in rng.integers(0, 2, size=tower.depth))
    v = set()
    for n in range(max_node_depth + 1):
        if rng.random() >= density:
            continue
        choices = [nd for nd in nodes_upto(max_node_depth) if meet_len(rho, nd) == n]
        if not choices:
            continue
        choices.sort(key=star_key)
        node = choices[int(rng.integers(len(choices)))]
        blk = tower.block(node)
        v.add(int(blk.start + rng.integers(len(blk))))
    return IdealGenerator(frozenset(v), rho)
