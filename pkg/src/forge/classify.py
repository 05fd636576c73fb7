"""Permutation codes and the finite classifier of a permutation of the universe.

Every verdict is computed over the built levels only: a flag reports what the
levels 0..depth show, not a limit statement. The classifier follows one
branch eta1 (by default the first ``depth`` bits of the code of f): at level
n it looks at the marker elements of the block eta1|n, where f sends them,
and at the canonical geodesics inside that block.
"""

from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np

from . import perm as P
from .errors import FamilyNotFound, MalformedCode
from .geodesic import geodesic
from .gstar import gstar_perm
from .ramsey import homogenize_pairs
from .tower import comparable, is_prefix, meet_len, node_str, star_key

# -- coding -----------------------------------------------------------------


def code_width(n):
    return max(1, (n - 1).bit_length())


def encode_perm(f):
    f = np.asarray(f, dtype=np.int64)
    if not P.is_perm(f):
        raise ValueError("not a permutation")
    w = code_width(len(f))
    shifts = np.arange(w - 1, -1, -1, dtype=np.int64)
    return ((f[:, None] >> shifts) & 1).astype(np.uint8).ravel()


def decode_perm(code, n):
    code = np.asarray(code)
    w = code_width(n)
    if code.ndim != 1 or len(code) != n * w:
        raise MalformedCode(f"code of length {len(code)}, expected {n * w}")
    if len(code) and not np.isin(code, (0, 1)).all():
        raise MalformedCode("code has non-binary entries")
    weights = 1 << np.arange(w - 1, -1, -1, dtype=np.int64)
    f = code.reshape(n, w).astype(np.int64) @ weights
    if not P.is_perm(f):
        raise MalformedCode("decoded images are not a bijection")
    return f


def encode(tower, f):
    if len(f) != tower.size:
        raise ValueError(f"permutation of {len(f)} points, universe has {tower.size}")
    return encode_perm(f)


def decode(tower, code):
    return decode_perm(code, tower.size)


def code_str(code):
    return "".join(map(str, np.asarray(code).tolist()))


def parse_code(text):
    text = text.strip()
    if set(text) - {"0", "1"}:
        raise MalformedCode("code must consist of 0 and 1")
    return np.array([int(c) for c in text], dtype=np.uint8)


def branch_of(tower, f):
    """First ``depth`` bits of the code of f."""
    code = encode(tower, f)
    if len(code) < tower.depth:
        raise ValueError("code shorter than tower depth")
    return tuple(int(b) for b in code[:tower.depth])


def f1(tower, f):
    return gstar_perm(tower, branch_of(tower, f))


# -- colorings on node data ---------------------------------------------------


def c21(nu1, nu2):
    return len(nu1) < len(nu2)


def c22(nus, i1, i2):
    return nus[i2] in nus[:i1 + 1]


def c31(nu1, nu2, nu3):
    return meet_len(nu2, nu3) > len(nu1)


def c33(nu1, nu2):
    """Bit of nu2 right after its meet with nu1; None when undefined."""
    k = meet_len(nu1, nu2)
    return nu2[k] if k < len(nu2) else None


# -- report -----------------------------------------------------------------


@dataclass
class Families:
    kind: str
    B: tuple
    members: dict  # level -> tuple of gids (a single a_n for the B17 family)
    l_star: int
    signs: tuple
    tuples: dict  # level -> label tuple
    comparability: tuple  # one verdict per l < l_star; None when fewer than two levels
    l_sup: int = 0
    l_dstar: object = None  # B17: index with pairwise incomparable labels
    fraction_witness: dict = field(default_factory=dict)
    bounds: list = field(default_factory=list)  # (stage, level, count, |v_n|, divisor)
    chain: dict = field(default_factory=dict)  # stage name -> levels


@dataclass
class ClassifierReport:
    horizon: int
    eta1: tuple
    fix_count: int
    b11: int
    escape_levels: tuple
    b12: int
    b13: int
    v: dict
    lvals: dict
    geos: dict
    b14: int
    b15: int
    b16: int
    families: Families = None
    b26: int = 0
    b26p: int = 1

    def gates_clear(self):
        return self.b11 == 0 and self.b12 == 0 and self.b14 == 0 and self.b16 == 0

    def lines(self):
        out = [f"CLASSIFY horizon={self.horizon} eta1={node_str(self.eta1)}",
               f"B11 {self.b11} fix={self.fix_count}",
               f"B12 {self.b12} escapes={','.join(map(str, self.escape_levels)) or '-'}",
               f"B13 {self.b13}"]
        for n in sorted(self.v):
            lv = ",".join(map(str, self.lvals[n])) or "-"
            out.append(f"V {n} size={len(self.v[n])} l={lv}")
        out += [f"B14 {self.b14}", f"B15 {self.b15}", f"B16 {self.b16}"]
        fam = self.families
        if fam is not None:
            out.append(f"FAMILY {fam.kind} B={','.join(map(str, fam.B)) or '-'} l_star={fam.l_star} "
                       f"signs={''.join('+' if s > 0 else '-' for s in fam.signs) or '-'}")
            for n in fam.B:
                labels = " ".join(node_str(x) for x in fam.tuples[n])
                out.append(f"  LEVEL {n} members={','.join(map(str, fam.members[n]))} labels={labels}")
            if fam.l_dstar is not None:
                out.append(f"  L_DSTAR {fam.l_dstar}")
            comp = "-" if fam.comparability is None else "".join(
                "T" if c else "F" for c in fam.comparability)
            out.append(f"  COMPARABLE {comp}")
            for n, w in sorted(fam.fraction_witness.items()):
                out.append(f"  FRACTION {n} {w}")
        out += [f"B26 {self.b26}", f"B26P {self.b26p}"]
        return out


def _level_data(tower, f, eta1, n):
    lv = tower.level(eta1[:n])
    aprime = [lv.base + x for x in lv.a_prime()]
    return lv, aprime


def classify(tower, f, eta1=None):
    f = np.asarray(f, dtype=np.int64)
    if len(f) != tower.size or not P.is_perm(f):
        raise ValueError("f must be a bijection of the universe")
    if eta1 is None:
        eta1 = branch_of(tower, f)
    eta1 = tuple(eta1)
    if len(eta1) < tower.depth:
        raise ValueError("eta1 shorter than tower depth")
    D = tower.depth
    fix_count = int((f == np.arange(len(f))).sum())
    b11 = int(fix_count > 0)
    node_pos = tower.node_array()
    escapes, v, lvals, geos = [], {}, {}, {}
    for n in range(D + 1):
        lv, aprime = _level_data(tower, f, eta1, n)
        here = tower.levels.index(lv)
        imgs = f[aprime]
        # blocks at or before eta1|n in node order occupy an initial id range
        if len(aprime) and (node_pos[imgs] > here).any():
            escapes.append(n)
        inside = [a for a in aprime if lv.base <= f[a] < lv.base + lv.size]
        v[n] = tuple(inside)
        ls = []
        for a in inside:
            g = geodesic(lv, a - lv.base, int(f[a]) - lv.base)
            geos[a] = g
            ls.append(g.length)
        lvals[n] = tuple(ls)
    b12 = int(b11 == 0 and bool(escapes))
    b13 = max(escapes) + 1 if escapes else 0
    tail = [n for n in range(b13, D + 1) if v[n]]
    maxima = [max(lvals[n]) for n in tail]
    increasing = len(maxima) >= 2 and all(x < y for x, y in zip(maxima, maxima[1:]))
    b14 = int(b11 == 0 and b12 == 0 and increasing)
    b15 = max(maxima, default=0)
    b16 = 0
    if b11 == 0 and b12 == 0 and b14 == 0 and D >= 1:
        b16 = int(all(_b16_witness(v, geos, m, D) for m in range(D)))
    return ClassifierReport(D, eta1, fix_count, b11, tuple(escapes), b12, b13, v, lvals,
                            geos, b14, b15, b16)


def _b16_witness(v, geos, m, D):
    for n in range(m + 1, D + 1):
        for a1, a2 in combinations(v.get(n, ()), 2):
            g1, g2 = geos[a1], geos[a2]
            for l in range(min(g1.length, g2.length)):
                r1, r2 = g1.labels()[l], g2.labels()[l]
                if r1 != r2 and r1[:m] == r2[:m]:
                    return True
    return False


# -- families ---------------------------------------------------------------


def _comparabilities(rows, L):
    """Per-l verdict of 'earlier label is a prefix of later label', or None if mixed."""
    out = []
    for l in range(L):
        vals = {is_prefix(rows[i][l], rows[j][l]) for i, j in combinations(range(len(rows)), 2)}
        if len(vals) > 1:
            return None
        out.append(vals.pop() if vals else None)
    return tuple(out)


def b17_candidates(report, levels, require_signs=True, max_combos=2_000_000):
    """Yield (B, a-tuple, l_star, l_dstar) in search order.

    Order: larger B first, then lexicographically least B, then least member
    ids. Each candidate has constant geodesic length, constant signs (when
    required), constant prefix verdicts at every index, and labels that are
    pairwise incomparable at the least such index l_dstar.
    """
    for size in range(len(levels), 1, -1):
        for B in combinations(levels, size):
            pools = [report.v[n] for n in B]
            total = 1
            for p in pools:
                total *= len(p)
            if total == 0 or total > max_combos:
                continue
            for choice in product(*pools):
                gs = [report.geos[a] for a in choice]
                L = gs[0].length
                if L == 0 or any(g.length != L for g in gs):
                    continue
                if require_signs and len({g.signs() for g in gs}) > 1:
                    continue
                rows = [g.labels() for g in gs]
                if _comparabilities(rows, L) is None:
                    continue
                for ld in range(L):
                    if all(not comparable(rows[i][ld], rows[j][ld])
                           for i, j in combinations(range(size), 2)):
                        yield B, choice, L, ld
                        break


def _extract_b17(tower, report):
    levels = [n for n in range(report.b13, report.horizon + 1) if report.v[n]]
    for B, choice, L, ld in b17_candidates(report, levels):
        gs = [report.geos[a] for a in choice]
        rows = [g.labels() for g in gs]
        return Families("B17", B, {n: (a,) for n, a in zip(B, choice)}, L, gs[0].signs(),
                        {n: r for n, r in zip(B, rows)}, _comparabilities(rows, L), l_dstar=ld)
    raise FamilyNotFound("no incomparable family among the observed levels")


def _best_subset(levels, color):
    """Largest (then lexicographically least) subset on which ``color`` is constant."""
    if len(levels) > 12:
        h = homogenize_pairs(levels, color)
        return tuple(levels[i] for i in h.indices), h.color
    for size in range(len(levels), 1, -1):
        for sub in combinations(levels, size):
            cols = {color(x, y) for x, y in combinations(sub, 2)}
            if len(cols) == 1:
                return sub, cols.pop()
    return tuple(levels[:1]), None


def _extract_iic(tower, report):
    levels = [n for n in range(report.b13, report.horizon + 1) if report.v[n]]
    if not levels:
        raise FamilyNotFound("no level has marker elements mapped inside their block")
    lens = {n: dict(zip(report.v[n], report.lvals[n])) for n in levels}
    l_sup = max(max(report.lvals[n]) for n in levels)
    nclasses = max(1, l_sup + (1 if any(0 in report.lvals[n] for n in levels) else 0))
    bounds = []
    # stage 1: a length class holding at least |v_n| / classes of each level
    cands = sorted({l for n in levels for l in report.lvals[n]})
    def stage1(L):
        return [n for n in levels
                if Counter(report.lvals[n])[L] * nclasses >= len(report.v[n])]
    top = max(len(stage1(c)) for c in cands)
    L = min(c for c in cands if len(stage1(c)) == top)
    B1 = stage1(L)
    v1 = {n: [a for a in report.v[n] if lens[n][a] == L] for n in B1}
    for n in B1:
        bounds.append(("length", n, len(v1[n]), len(report.v[n]), nclasses))
    # stage 2: a sign vector on at least |v_n| / (classes * 2^L)
    div2 = nclasses * 2 ** L
    sign_cands = sorted({report.geos[a].signs() for n in B1 for a in v1[n]})
    def stage2(s):
        return [n for n in B1
                if sum(report.geos[a].signs() == s for a in v1[n]) * div2 >= len(report.v[n])]
    top = max(len(stage2(s)) for s in sign_cands)
    signs = min(s for s in sign_cands if len(stage2(s)) == top)
    B2 = stage2(signs)
    if not B2:
        raise FamilyNotFound("no level keeps a sign class above the pigeonhole bound")
    v2 = {n: [a for a in v1[n] if report.geos[a].signs() == signs] for n in B2}
    for n in B2:
        bounds.append(("signs", n, len(v2[n]), len(report.v[n]), div2))
    # stage 3: the most common label tuple per level
    tuples, v3 = {}, {}
    for n in B2:
        tally = Counter(report.geos[a].labels() for a in v2[n])
        top = max(tally.values())
        rho = min(t for t, c in tally.items() if c == top)
        tuples[n] = rho
        v3[n] = tuple(a for a in v2[n] if report.geos[a].labels() == rho)
        bounds.append(("labels", n, len(v3[n]), len(report.v[n]), div2 * 2 ** (n * L)))
    for stage, n, count, size, div in bounds:
        assert count * div >= size, (stage, n, count, size, div)
    color = lambda m, n: tuple(is_prefix(tuples[m][l], tuples[n][l]) for l in range(L))
    B3, col = _best_subset(B2, color)
    comp = col if len(B3) >= 2 else None
    members = {n: v3[n] for n in B3}
    fw = {n: -(-len(report.v[n]) // len(members[n])) for n in B3}
    return Families("IIC", tuple(B3), members, L, signs, {n: tuples[n] for n in B3}, comp,
                    l_sup=l_sup, fraction_witness=fw, bounds=bounds,
                    chain={"B1": tuple(B1), "B2": tuple(B2), "B3": tuple(B3)})


def extract_families(tower, f, eta1, report):
    if report.b16 == 1:
        report.families = _extract_b17(tower, report)
    else:
        report.families = _extract_iic(tower, report)
        comp = report.families.comparability
        report.b26 = int(report.gates_clear() and comp is not None and not all(comp))
    report.b26p = 0 if (report.gates_clear() and report.b26 == 0) else 1
    problems = validate_families(tower, f, report)
    if problems:
        raise AssertionError("; ".join(problems))
    return report


def validate_families(tower, f, report):
    """Re-check every stated property of the extracted family; list failures."""
    fam = report.families
    out = []
    f = np.asarray(f)
    for n in fam.B:
        for a in fam.members[n]:
            if a not in report.v[n]:
                out.append(f"{a} not in v_{n}")
                continue
            lv = tower.level(report.eta1[:n])
            g = geodesic(lv, a - lv.base, int(f[a]) - lv.base)
            if g.length != fam.l_star:
                out.append(f"length of {a} is {g.length}, not {fam.l_star}")
            if fam.kind == "IIC" or fam.signs:
                if g.signs() != tuple(fam.signs):
                    out.append(f"signs of {a} differ")
            if g.labels() != tuple(fam.tuples[n]):
                out.append(f"labels of {a} differ")
    if len(fam.B) >= 2:
        for l in range(fam.l_star):
            vals = {is_prefix(fam.tuples[m][l], fam.tuples[n][l]) for m, n in combinations(fam.B, 2)}
            if len(vals) != 1:
                out.append(f"comparability at {l} is not constant")
            elif fam.comparability is not None and vals.pop() != fam.comparability[l]:
                out.append(f"comparability at {l} misreported")
    if fam.kind == "B17":
        ld = fam.l_dstar
        for m, n in combinations(fam.B, 2):
            if comparable(fam.tuples[m][ld], fam.tuples[n][ld]):
                out.append(f"labels at {ld} comparable between levels {m} and {n}")
    for n, w in fam.fraction_witness.items():
        if w * len(fam.members[n]) < len(report.v[n]):
            out.append(f"fraction witness at {n} too small")
    return out


def escape_candidates(tower, f, eta1, n):
    """Marker elements of block eta1|n that f sends to a later block, in id order."""
    f = np.asarray(f)
    lv, aprime = _level_data(tower, f, eta1, n)
    key = star_key(lv.node)
    return [a for a in aprime if star_key(tower.node_of(int(f[a]))) > key]
