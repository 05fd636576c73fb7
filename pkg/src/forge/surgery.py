"""Rewiring the branch permutation of f so that it agrees with f on chosen points.

Given levels B and marker elements a_n, the surgered g equals F1(f) (the
branch permutation named by the code of f) except on three points per level:
g(a_n) = f(a_n) = b_n, g(b_n) = F1(f)(a_n) = e_n and g(c_n) = F1(f)(b_n) = d_n
with c_n = F1(f)^-1(b_n).
"""

import math
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np

from . import perm as P
from .classify import branch_of, classify, escape_candidates, extract_families, b17_candidates
from .errors import (AmbiguousCase, FamilyNotFound, FixedPointViolation, NoCase, NoSpecFound,
                     NotBijective, Unrepresentable)
from .freegroup import enumerate_words
from .geodesic import geodesic
from .gstar import BranchWord, gstar_perm
from .quotient import WordEvaluator
from .tower import comparable, meet_len, node_str, nodes_upto, nu_of, parse_node, star_key


@dataclass
class SurgerySpec:
    B: tuple
    eta1: tuple
    eta2: tuple
    a: dict
    b: dict
    c: dict
    d: dict
    e: dict
    nu: dict
    excluded: tuple = ()
    case: str = None

    def lines(self):
        out = ["SPEC", f"B {' '.join(map(str, self.B)) or '-'}",
               f"ETA1 {node_str(self.eta1)}", f"ETA2 {node_str(self.eta2)}"]
        for n in self.B:
            out.append(f"N {n} a={self.a[n]} b={self.b[n]} c={self.c[n]} d={self.d[n]} "
                       f"e={self.e[n]} nu={node_str(self.nu[n])}")
        if self.excluded:
            out.append(f"EXCLUDED {' '.join(map(str, self.excluded))}")
        if self.case:
            out.append(f"CASE {self.case}")
        out.append("END")
        return out


def parse_spec(text):
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != ["SPEC"] or lines[-1] != ["END"]:
        raise ValueError("spec must start with SPEC and end with END")
    B, eta1, eta2, excluded, case = (), None, None, (), None
    maps = {k: {} for k in "abcden"}
    for tok in lines[1:-1]:
        tag = tok[0]
        if tag == "B":
            B = tuple(int(x) for x in tok[1:] if x != "-")
        elif tag == "ETA1":
            eta1 = parse_node(tok[1])
        elif tag == "ETA2":
            eta2 = parse_node(tok[1])
        elif tag == "N":
            n = int(tok[1])
            for kv in tok[2:]:
                key, val = kv.split("=", 1)
                if key == "nu":
                    maps["n"][n] = parse_node(val)
                elif key in "abcde" and len(key) == 1:
                    maps[key][n] = int(val)
                else:
                    raise ValueError(f"unknown spec field {key}")
        elif tag == "EXCLUDED":
            excluded = tuple(int(x) for x in tok[1:])
        elif tag == "CASE":
            case = tok[1]
        else:
            raise ValueError(f"unknown spec line {tag}")
    if eta1 is None or eta2 is None:
        raise ValueError("spec needs ETA1 and ETA2")
    if set(B) != set(maps["a"]):
        raise ValueError("B and the per-level lines disagree")
    return SurgerySpec(B, eta1, eta2, maps["a"], maps["b"], maps["c"], maps["d"], maps["e"],
                       maps["n"], excluded, case)


def marker_ids(tower, eta1, n):
    lv = tower.level(tuple(eta1[:n]))
    return {lv.base + x for x in lv.a_prime()}


def derive_spec(tower, f, eta1, eta2, B, a):
    """Fill in b, c, d, e and nu; levels where f and F1 agree at a_n are excluded."""
    f = np.asarray(f, dtype=np.int64)
    eta1, eta2 = tuple(eta1), tuple(eta2)
    F1 = gstar_perm(tower, eta1)
    F1inv = P.inverse(F1)
    keep, excluded = [], []
    maps = {k: {} for k in "abcde"}
    nu = {}
    for n in sorted(set(B)):
        an = int(a[n])
        if an not in marker_ids(tower, eta1, n):
            raise ValueError(f"a_{n} = {an} is not a marker element of block {node_str(eta1[:n])}")
        bn = int(f[an])
        if bn == int(F1[an]):
            excluded.append(n)
            continue
        keep.append(n)
        maps["a"][n] = an
        maps["b"][n] = bn
        maps["e"][n] = int(F1[an])
        maps["c"][n] = int(F1inv[bn])
        maps["d"][n] = int(F1[bn])
        nu[n] = tower.node_of(bn)
    return SurgerySpec(tuple(keep), eta1, eta2, maps["a"], maps["b"], maps["c"], maps["d"],
                       maps["e"], nu, tuple(excluded))


def check_spec(tower, f, spec):
    """Clauses on the spec data itself; returns a list of problems."""
    f = np.asarray(f)
    F1 = gstar_perm(tower, spec.eta1)
    out = []
    for n in spec.B:
        a, b, c, d, e = (spec.a[n], spec.b[n], spec.c[n], spec.d[n], spec.e[n])
        if a not in marker_ids(tower, spec.eta1, n):
            out.append(f"a_{n} not a marker element")
        if int(f[a]) != b:
            out.append(f"b_{n} != f(a_{n})")
        if tower.node_of(b) != tuple(spec.nu[n]) or tower.node_of(c) != tuple(spec.nu[n]):
            out.append(f"b_{n} or c_{n} outside the block of nu_{n}")
        if tower.node_of(e) != tuple(spec.eta1[:n]):
            out.append(f"e_{n} outside block of eta1|{n}")
        if int(F1[a]) != e or int(F1[c]) != b or int(F1[b]) != d:
            out.append(f"c_{n}, d_{n} or e_{n} inconsistent with F1")
    return out


def build_g(tower, f, spec):
    problems = check_spec(tower, f, spec)
    if problems:
        raise ValueError("invalid spec: " + "; ".join(problems))
    g = gstar_perm(tower, spec.eta1).copy()
    owner = {}
    for n in spec.B:
        for role in ("a", "b", "c"):
            pt = getattr(spec, role)[n]
            if pt in owner:
                raise NotBijective(f"point {pt} is rewired twice ({owner[pt]} and {role}_{n})",
                                   pair=(owner[pt], f"{role}_{n}"))
            owner[pt] = f"{role}_{n}"
    for n in spec.B:
        g[spec.a[n]] = spec.b[n]
        g[spec.b[n]] = spec.e[n]
        g[spec.c[n]] = spec.d[n]
    if not P.is_perm(g):
        raise NotBijective("rewired map is not a bijection")
    fixed = np.flatnonzero(g == np.arange(len(g)))
    if len(fixed):
        raise FixedPointViolation(f"g fixes {len(fixed)} points", points=fixed.tolist())
    return g


def rewired_points(spec):
    return sorted({getattr(spec, r)[n] for n in spec.B for r in "abc"})


# -- cases ------------------------------------------------------------------


def _geo(tower, f, x):
    lv, loc = tower.locate(int(x))
    return geodesic(lv, loc, int(f[x]) - lv.base)


def case_flags(tower, spec, f):
    f = np.asarray(f)
    B = spec.B
    Ka = True
    for n in B:
        below = [len(spec.nu[m]) for m in B if m < n]
        if not (star_key(spec.eta1[:n]) < star_key(spec.nu[n])
                and meet_len(spec.eta2, spec.nu[n]) > max(below, default=-1)):
            Ka = False
    along = all(tuple(spec.nu[n]) == tuple(spec.eta1[:n]) for n in B)
    Kb = Kc = False
    if along:
        geos = [_geo(tower, f, spec.a[n]) for n in B]
        lens = [g.length for g in geos]
        Kb = all(x < y for x, y in zip(lens, lens[1:]))
        if len(set(lens)) <= 1 and len({g.signs() for g in geos}) <= 1:
            L = lens[0] if lens else 0
            rows = [g.labels() for g in geos]
            Kc = (not B) or any(
                all(not comparable(rows[i][l], rows[j][l]) for i, j in combinations(range(len(B)), 2))
                for l in range(L))
    return {"Ka": Ka, "Kb": Kb, "Kc": Kc}


def detect_case(tower, spec, f):
    flags = case_flags(tower, spec, f)
    tags = [t for t in ("Ka", "Kb", "Kc") if flags[t]]
    if not tags:
        raise NoCase("no clause of the case split holds")
    if len(tags) > 1:
        raise AmbiguousCase(f"several clauses hold: {', '.join(tags)}", tags=tags)
    return tags[0]


def _try(tower, f, eta1, eta2, B, a):
    spec = derive_spec(tower, f, eta1, eta2, B, a)
    if spec.excluded:
        return None
    try:
        g = build_g(tower, f, spec)
    except (NotBijective, FixedPointViolation):
        return None
    return spec, g


def _least_eta2(tower, nu, B):
    for eta2 in nodes_upto(tower.depth):
        if len(eta2) != tower.depth:
            continue
        ok = all(meet_len(eta2, nu[n]) > max((len(nu[m]) for m in B if m < n), default=-1)
                 for n in B)
        if ok:
            return eta2
    return None


def _case_one(tower, f, eta1, report):
    a0 = {n: escape_candidates(tower, f, eta1, n)[0] for n in report.escape_levels}
    B0 = sorted(a0)
    for size in range(len(B0), 0, -1):
        for B in combinations(B0, size):
            nus = {n: tower.node_of(int(f[a0[n]])) for n in B}
            lens = [len(nus[n]) for n in B]
            if any(x >= y for x, y in zip(lens, lens[1:])):
                continue
            eta2 = _least_eta2(tower, nus, B)
            if eta2 is None:
                continue
            got = _try(tower, f, eta1, eta2, B, a0)
            if got:
                return got
    return None


def _case_two_a(tower, f, eta1, report):
    levels = [n for n in range(report.b13, report.horizon + 1) if report.v[n]]
    for size in range(len(levels), 1, -1):
        for B in combinations(levels, size):
            for choice in product(*(report.v[n] for n in B)):
                lens = [report.geos[x].length for x in choice]
                if any(x >= y for x, y in zip(lens, lens[1:])):
                    continue
                got = _try(tower, f, eta1, eta1, B, dict(zip(B, choice)))
                if got:
                    return got
    return None


def _case_kc(tower, f, eta1, report, levels, pools=None):
    sub = report
    if pools is not None:
        sub = _Restricted(report, pools)
    for B, choice, _, _ in b17_candidates(sub, levels):
        got = _try(tower, f, eta1, eta1, B, dict(zip(B, choice)))
        if got:
            return got
    return None


class _Restricted:
    """A report view whose v sets are replaced by the given pools."""

    def __init__(self, report, pools):
        self.v = dict(pools)
        self.geos = report.geos


def pick_g(tower, f, eta1=None):
    """Deterministic choice: Case I, IIA, IIB, then IIC when its flag allows it."""
    f = np.asarray(f, dtype=np.int64)
    if eta1 is None:
        eta1 = branch_of(tower, f)
    report = classify(tower, f, eta1)
    if report.b11:
        raise NoSpecFound("f has fixed points")
    got, case = None, None
    if report.b12:
        got, case = _case_one(tower, f, eta1, report), "I"
    elif report.b14:
        got, case = _case_two_a(tower, f, eta1, report), "IIA"
    elif report.b16:
        levels = [n for n in range(report.b13, report.horizon + 1) if report.v[n]]
        got, case = _case_kc(tower, f, eta1, report, levels), "IIB"
    else:
        try:
            extract_families(tower, f, eta1, report)
        except FamilyNotFound as exc:
            raise NoSpecFound(f"no family at the horizon: {exc}") from exc
        if report.b26p == 1:
            fam = report.families
            got, case = _case_kc(tower, f, eta1, report, list(fam.B), fam.members), "IIC"
    if got is None:
        where = f"case {case}" if case else "no case"
        raise NoSpecFound(f"{where}: the observed levels support no surgery spec")
    spec, g = got
    spec.case = detect_case(tower, spec, f)
    return spec, g


# -- word recovery ----------------------------------------------------------


@dataclass
class RecoveredWord:
    letters: tuple
    exceptional_nodes: tuple
    depth: int
    matches: dict = field(default_factory=dict)

    def word(self):
        return BranchWord(self.letters)

    def lines(self):
        w = str(self.word()) or "e"
        ex = " ".join(node_str(x) for x in self.exceptional_nodes) or "-"
        return [f"RECOVERED {w}", f"EXCEPTIONAL {len(self.exceptional_nodes)} {ex}"]


def recover_word(tower, h, m_max):
    """The branch word of length <= m_max evaluating to h on the deepest blocks."""
    D = tower.depth
    if not 0 <= m_max <= D:
        raise ValueError(f"max length must be between 0 and the tower depth {D}")
    h = np.asarray(h, dtype=np.int64)
    if len(h) != tower.size or not P.is_perm(h):
        raise ValueError("h must be a bijection of the universe")
    k = 2 ** D
    words = [None] + (enumerate_words(k, m_max) if m_max else [])
    matches = {}
    tally = Counter()
    for lv in tower.levels:
        if lv.depth != D:
            continue
        local = h[lv.base:lv.base + lv.size] - lv.base
        if local.min() < 0 or local.max() >= lv.size:
            matches[lv.node] = ()
            continue
        found = []
        if (local == np.arange(lv.size)).all():
            found.append(())
        if m_max:
            perms = WordEvaluator(k, words[1:]).evaluate(lv.f)
            hit = np.flatnonzero((perms == local).all(axis=1))
            found += [tuple(words[1 + i].letters) for i in hit]
        matches[lv.node] = tuple(found)
        tally.update(found)
    if not tally:
        raise Unrepresentable("no word of the allowed length matches any deepest block")
    best = min(tally, key=lambda w: (-tally[w], len(w), w))
    exceptional = tuple(node for node, ws in matches.items() if best not in ws)
    m = len(best)
    if len(exceptional) > math.factorial(m):
        raise Unrepresentable(
            f"{len(exceptional)} exceptional blocks exceed the bound {math.factorial(m)}")
    letters = tuple((nu_of(g, D), s) for g, s in best)
    return RecoveredWord(letters, exceptional, D, matches)
