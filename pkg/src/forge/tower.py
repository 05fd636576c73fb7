"""The tower of finite blocks, one per node of the binary tree.

Nodes are bit tuples ordered by length and then lexicographically. Each
block is the element table of a finite group; generator ``nu`` of a block of
depth n (``nu`` a bit string of length n, indexed by its binary value) acts
by left multiplication. Global element ids number the blocks consecutively in
node order.
"""

import bisect
from dataclasses import dataclass, field, replace
from itertools import product

import numpy as np

from . import perm as P
from . import quotient
from .errors import ScheduleInfeasible, TowerFormatError
from .freegroup import Word, enumerate_words, word_count, y_seq

PROFILES = ("STRICT", "DEMO", "FLAT")


# -- nodes ------------------------------------------------------------------

def star_key(node):
    return (len(node), tuple(node))


def star_compare(a, b):
    ka, kb = star_key(a), star_key(b)
    return (ka > kb) - (ka < kb)


def nodes_upto(depth):
    out = []
    for n in range(depth + 1):
        out.extend(product((0, 1), repeat=n))
    return out


def node_str(node):
    return "".join(map(str, node)) or "-"


def parse_node(text):
    text = text.strip()
    if text in ("-", ""):
        return ()
    if set(text) - {"0", "1"}:
        raise ValueError(f"bad node {text!r}")
    return tuple(int(c) for c in text)


def nu_index(nu):
    idx = 0
    for b in nu:
        idx = 2 * idx + b
    return idx


def nu_of(index, n):
    return tuple((index >> (n - 1 - i)) & 1 for i in range(n))


def meet_len(a, b):
    k = 0
    for x, y in zip(a, b):
        if x != y:
            break
        k += 1
    return k


def is_prefix(a, b):
    return len(a) <= len(b) and tuple(b[: len(a)]) == tuple(a)


def comparable(a, b):
    return is_prefix(a, b) or is_prefix(b, a)


# -- schedule ---------------------------------------------------------------

@dataclass(frozen=True)
class SizeSchedule:
    profile: str = "DEMO"
    lam: int = 2
    beta: int = 2
    n0: int = 1
    max_size: int = quotient.DEFAULT_CAP
    max_depth: int = 4
    max_words: int = 50_000

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ValueError(f"unknown profile {self.profile}")
        if self.lam < 1:
            raise ValueError("lambda must be >= 1")
        if self.profile == "DEMO" and self.beta < 2:
            raise ValueError("beta must be >= 2 in DEMO")
        if self.n0 < 1:
            raise ValueError("n0 must be >= 1")

    def factor(self, n):
        return 2 ** (n + 7) if self.profile == "STRICT" else self.beta

    def n1(self, n, prior):
        if self.profile == "FLAT":
            return self.n0 * 2 ** n
        return self.lam * self.factor(n) * prior

    def n0_of(self, n, prior):
        if self.profile == "FLAT":
            return self.n0
        return self.n1(n, prior) // 2 ** n

    def aset_size(self, n, prior):
        """Per-generator marker count: at least n0 and at least lam * prior."""
        if self.profile == "FLAT":
            return self.n0
        return max(self.n0_of(n, prior), self.lam * prior, 1)


# -- levels -----------------------------------------------------------------

@dataclass(frozen=True)
class CertInfo:
    method: str
    param: int
    seed: int
    full: object = None


@dataclass(eq=False)
class TowerLevel:
    node: tuple
    size: int
    base: int = 0
    f: tuple = None
    A: tuple = None
    certificate: CertInfo = None
    group: object = None
    n1: int = 0
    n0: int = 0
    _finv: tuple = field(default=None, repr=False)

    @property
    def depth(self):
        return len(self.node)

    @property
    def ngens(self):
        return 2 ** len(self.node)

    @property
    def finv(self):
        if self._finv is None:
            self._finv = tuple(P.inverse(t) for t in self.f)
        return self._finv

    def move(self, gen, sign):
        return self.f[gen] if sign > 0 else self.finv[gen]

    def a_prime(self):
        out = set()
        for a in self.A:
            out.update(a)
        return sorted(out)

    @classmethod
    def from_tables(cls, node, tables, A=None, base=0):
        tables = tuple(np.asarray(t, dtype=np.int64) for t in tables)
        size = len(tables[0]) if tables else 0
        if A is None:
            A = tuple(() for _ in tables)
        return cls(tuple(node), size, base, tables, tuple(tuple(a) for a in A))


@dataclass(eq=False)
class Tower:
    levels: tuple
    depth: int
    schedule: SizeSchedule
    seed: int = 0

    def __post_init__(self):
        self.levels = tuple(self.levels)
        self._by_node = {lv.node: lv for lv in self.levels}
        self._bases = [lv.base for lv in self.levels]

    @property
    def size(self):
        last = self.levels[-1]
        return last.base + last.size

    def level(self, node):
        return self._by_node[tuple(node)]

    def has(self, node):
        return tuple(node) in self._by_node

    def locate(self, gid):
        """(level, local index) of a global element id."""
        if not 0 <= gid < self.size:
            raise IndexError(f"global id {gid} outside universe of size {self.size}")
        i = bisect.bisect_right(self._bases, gid) - 1
        lv = self.levels[i]
        return lv, gid - lv.base

    def node_of(self, gid):
        return self.locate(gid)[0].node

    def block(self, node):
        lv = self.level(node)
        return range(lv.base, lv.base + lv.size)

    def node_array(self):
        """Level position of every global id."""
        out = np.empty(self.size, dtype=np.int64)
        for i, lv in enumerate(self.levels):
            out[lv.base:lv.base + lv.size] = i
        return out


def skeleton_tower(depth, block_size=lambda node: 2):
    """A partition-only tower: blocks without group data, for set bookkeeping."""
    levels, base = [], 0
    for node in nodes_upto(depth):
        size = block_size(node)
        levels.append(TowerLevel(node, size, base))
        base += size
    return Tower(levels, depth, SizeSchedule("FLAT"), 0)


# -- construction -----------------------------------------------------------

def level_seed(seed, node):
    code = (1 << len(node)) | nu_index(node)
    return int(np.random.SeedSequence([int(seed), code]).generate_state(1)[0])


def marker_words(n, count):
    """Consecutive y-words, ``count`` per generator, assigned in nu order."""
    k = 2 ** n
    out, idx = [], 1
    for _ in range(k):
        out.append([y_seq(idx + j, k) for j in range(count)])
        idx += count
    return out


def separation_set(n, markers):
    k = 2 ** n
    lam = enumerate_words(k, n, include_identity=True)
    flat = [y for group in markers for y in group]
    S = set(lam)
    S.update(flat)
    S.update(Word(k, ((g, s),)) for g in range(k) for s in (-1, 1))
    for w in lam:
        for y in flat:
            S.add(w * y)
    return sorted(S, key=Word.sort_key)


def min_block_size(n, markers):
    """Lower bound on a block carrying ``markers`` marker elements at depth n.

    Words of length <= n move no point and move markers off the markers, so
    the radius floor(n/2) balls around distinct markers are disjoint and each
    has exactly one point per reduced word.
    """
    k = 2 ** n
    r = n // 2
    return markers * (1 + word_count(k, r))


def build_level(prior, node, schedule, seed):
    node = tuple(node)
    n = len(node)
    earlier = [lv for lv in prior if star_key(lv.node) < star_key(node)]
    expected = [x for x in nodes_upto(n) if star_key(x) < star_key(node)]
    if sorted(star_key(lv.node) for lv in earlier) != [star_key(x) for x in expected]:
        raise ValueError(f"not all nodes before {node_str(node)} are present")
    total = sum(lv.size for lv in earlier)
    n1 = schedule.n1(n, total)
    n0 = schedule.n0_of(n, total)
    asz = schedule.aset_size(n, total)
    k = 2 ** n
    need = min_block_size(n, k * asz)
    if need > schedule.max_size:
        raise ScheduleInfeasible(
            f"node {node_str(node)}: {k} marker sets of size {asz} force a block of at least "
            f"{need} elements, cap is {schedule.max_size}")
    nwords = (1 + word_count(k, n)) * (1 + k * asz) + 2 * k
    if nwords > schedule.max_words:
        raise ScheduleInfeasible(
            f"node {node_str(node)}: about {nwords} words must be separated, "
            f"word cap is {schedule.max_words}")
    markers = marker_words(n, asz)
    S = separation_set(n, markers)
    lseed = level_seed(seed, node)
    group, cert = quotient.search(k, S, cap=schedule.max_size, seed=lseed)
    tables = tuple(group.left_table(group.gens[i]) for i in range(k))
    A = tuple(tuple(sorted(cert.witness[y] for y in ys)) for ys in markers)
    return TowerLevel(node, group.order, total, tables, A,
                      CertInfo(cert.method, cert.param, cert.seed, cert), group, n1, n0)


def schedule_floor(depth, schedule):
    """Per-node lower bounds on block sizes implied by the schedule alone.

    Every block must hold its markers (see min_block_size) and the identity
    plus the 2k signed generators as distinct elements. Feeding the bounds
    forward gives bounds on the earlier totals, hence on later schedules.
    """
    out, total = [], 0
    for node in nodes_upto(depth):
        n = len(node)
        k = 2 ** n
        floor = max(min_block_size(n, k * schedule.aset_size(n, total)), 1 + 2 * k)
        if schedule.profile != "FLAT":
            floor = max(floor, schedule.lam * total)
        out.append((node, floor))
        total += floor
    return out


def build_tower(depth, schedule, seed=0, progress=None):
    if depth < 0 or depth > schedule.max_depth:
        raise ValueError(f"depth must be in 0..{schedule.max_depth}")
    for node, floor in schedule_floor(depth, schedule):
        if floor > schedule.max_size:
            raise ScheduleInfeasible(
                f"node {node_str(node)}: the schedule forces a block of at least {floor} "
                f"elements, cap is {schedule.max_size}")
    levels = []
    for node in nodes_upto(depth):
        lv = build_level(levels, node, schedule, seed)
        levels.append(lv)
        if progress:
            progress(lv)
    return Tower(levels, depth, schedule, seed)


# -- verification -----------------------------------------------------------

@dataclass
class Violation:
    node: tuple
    check: str
    message: str

    def __str__(self):
        return f"{node_str(self.node)} ({self.check}) {self.message}"


def eval_tables(level, words):
    """Permutations of the block induced by each word (rightmost acts first)."""
    ev = quotient.WordEvaluator(level.ngens, words)
    return ev.evaluate(level.f)


def orbit_tree(tables, start=0):
    """BFS from ``start`` over the tables and their inverses.

    Returns (order, parent, move) where move indexes the list
    [t0, t0^-1, t1, t1^-1, ...].
    """
    moves = []
    for t in tables:
        moves.append(np.asarray(t))
        moves.append(P.inverse(t))
    n = len(moves[0])
    parent = np.full(n, -1, dtype=np.int64)
    move = np.full(n, -1, dtype=np.int64)
    seen = np.zeros(n, dtype=bool)
    seen[start] = True
    order = [np.array([start])]
    frontier = order[0]
    while len(frontier):
        nxt = []
        for c, t in enumerate(moves):
            img = t[frontier]
            fresh = ~seen[img]
            img, src = img[fresh], frontier[fresh]
            img, first = np.unique(img, return_index=True)
            img, src = img, src[first]
            keep = ~seen[img]
            img, src = img[keep], src[keep]
            seen[img] = True
            parent[img] = src
            move[img] = c
            nxt.append(img)
        frontier = np.concatenate(nxt) if nxt else np.array([], dtype=np.int64)
        if len(frontier):
            order.append(frontier)
    return order, parent, move, moves, seen


def is_regular(tables):
    """Exact test that the tables generate a regular permutation group.

    Transitivity plus a transitive centralizer: for each generator image y of
    the base point, the transport map k -> w_k(y) along a BFS tree must be a
    permutation commuting with every generator.
    """
    order, parent, move, moves, seen = orbit_tree(tables)
    if not seen.all():
        return False, "generators are not transitive on the block"
    n = len(seen)
    for t in tables:
        y = int(np.asarray(t)[0])
        tau = np.empty(n, dtype=np.int64)
        tau[order[0]] = y
        for layer in order[1:]:
            src = tau[parent[layer]]
            mv = move[layer]
            vals = np.empty(len(layer), dtype=np.int64)
            for c in np.unique(mv):
                sel = mv == c
                vals[sel] = moves[c][src[sel]]
            tau[layer] = vals
        if not P.is_perm(tau):
            return False, "transport map is not a bijection"
        for t2 in tables:
            t2 = np.asarray(t2)
            if not np.array_equal(tau[t2], t2[tau]):
                return False, "generated group is larger than the block"
    return True, ""


def verify_level(level, context=(), schedule=None):
    """Exhaustive block checks; returns a list of violations (empty if clean)."""
    out = []
    node = level.node
    n = len(node)
    k = 2 ** n

    def bad(check, msg):
        out.append(Violation(node, check, msg))

    if level.f is None or len(level.f) != k:
        bad("a", f"expected {k} generators")
        return out
    size = level.size
    for i, t in enumerate(level.f):
        if len(t) != size or not P.is_perm(t):
            bad("a", f"generator {node_str(nu_of(i, n))} is not a permutation of the block")
            return out
    for i, t in enumerate(level.f):
        fp = P.fixed_points(t)
        if len(fp):
            bad("b", f"generator {node_str(nu_of(i, n))} fixes {len(fp)} points, e.g. {int(fp[0])}")
    if len(level.A) != k:
        bad("c", f"expected {k} marker sets")
        return out
    for i, a in enumerate(level.A):
        if any(not 0 <= x < size for x in a):
            bad("d", f"marker set {node_str(nu_of(i, n))} leaves the block")
            return out
    if schedule is not None:
        total = sum(lv.size for lv in context if star_key(lv.node) < star_key(node))
        n1 = schedule.n1(n, total)
        n0 = schedule.n0_of(n, total)
        if level.n1 != n1 or level.n0 != n0:
            bad("d", f"schedule values n1={level.n1} n0={level.n0}, expected {n1} and {n0}")
        need = schedule.aset_size(n, total)
        for i, a in enumerate(level.A):
            if len(a) < max(n0, need if schedule.profile != "FLAT" else n0):
                bad("d", f"marker set {node_str(nu_of(i, n))} has {len(a)} < {need} elements")
        if schedule.profile != "FLAT" and size < schedule.lam * total:
            bad("d", f"block size {size} below lambda * earlier total {schedule.lam * total}")
    for i in range(k):
        for j in range(i + 1, k):
            common = set(level.A[i]) & set(level.A[j])
            if common:
                bad("e", f"marker sets {node_str(nu_of(i, n))} and {node_str(nu_of(j, n))} "
                         f"share {len(common)} elements")
    if n:
        words = enumerate_words(k, n)
        perms = eval_tables(level, words)
        fixed = perms == np.arange(size)
        aprime = np.array(level.a_prime(), dtype=np.int64)
        marker = np.zeros(size, dtype=bool)
        marker[aprime] = True
        for w, row, fx in zip(words, perms, fixed):
            if fx.any():
                bad("f1", f"word {w} fixes {int(fx.sum())} points, e.g. {int(np.flatnonzero(fx)[0])}")
            if len(aprime):
                hit = marker[row[aprime]]
                if hit.any():
                    bad("f2", f"word {w} maps {int(hit.sum())} marker elements into the markers")
    ok, why = is_regular(level.f)
    if not ok:
        bad("g", why)
    if level.group is not None and ok:
        for i, t in enumerate(level.f):
            if not np.array_equal(level.group.left_table(level.group.gens[i]), t):
                bad("g", f"generator {node_str(nu_of(i, n))} is not left multiplication")
    return out


@dataclass
class TowerReport:
    violations: list
    checked: list

    @property
    def ok(self):
        return not self.violations

    def lines(self, quiet=False):
        out = []
        bynode = {}
        for v in self.violations:
            bynode.setdefault(v.node, []).append(v)
        if not quiet:
            for node in self.checked:
                vs = bynode.get(node, [])
                out.append(f"LEVEL {node_str(node)} {'ok' if not vs else 'FAIL %d' % len(vs)}")
        out.extend(f"VIOLATION {v}" for v in self.violations)
        out.append(f"SUMMARY levels={len(self.checked)} violations={len(self.violations)}")
        return out


def verify_tower(tower):
    violations, checked = [], []
    expected = nodes_upto(tower.depth)
    got = [lv.node for lv in tower.levels]
    if got != expected:
        violations.append(Violation((), "T", "levels are not exactly the nodes up to depth in order"))
    base = 0
    for lv in tower.levels:
        if lv.base != base:
            violations.append(Violation(lv.node, "T", f"base {lv.base}, expected {base}"))
        base = lv.base + lv.size
    for i, lv in enumerate(tower.levels):
        violations.extend(verify_level(lv, tower.levels[:i], tower.schedule))
        checked.append(lv.node)
    return TowerReport(violations, checked)


# -- text format ------------------------------------------------------------

def dumps(tower):
    s = tower.schedule
    head = (f"TOWER v1 depth={tower.depth} profile={s.profile} lambda={s.lam} "
            f"beta={s.beta} seed={tower.seed}")
    if s.profile == "FLAT":
        head += f" n0={s.n0}"
    lines = [head]
    for lv in tower.levels:
        n = len(lv.node)
        lines.append(f"NODE {node_str(lv.node)} size={lv.size} base={lv.base}")
        for i, t in enumerate(lv.f):
            lines.append(f"GEN {node_str(nu_of(i, n))} " + " ".join(map(str, np.asarray(t).tolist())))
        for i, a in enumerate(lv.A):
            lines.append(f"ASET {node_str(nu_of(i, n))} " + " ".join(map(str, sorted(a))))
        c = lv.certificate
        lines.append(f"CERT {c.method} {c.param} {c.seed}")
    return "\n".join(lines) + "\n"


def _kv(tokens):
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise TowerFormatError(f"expected key=value, got {tok!r}")
        key, val = tok.split("=", 1)
        out[key] = val
    return out


def loads(text, max_size=quotient.DEFAULT_CAP):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("TOWER "):
        raise TowerFormatError("missing TOWER header")
    head = lines[0].split()
    if head[1] != "v1":
        raise TowerFormatError(f"unsupported version {head[1]}")
    kv = _kv(head[2:])
    try:
        schedule = SizeSchedule(kv["profile"], int(kv["lambda"]), int(kv["beta"]),
                                int(kv.get("n0", 1)), max_size,
                                max(4, int(kv["depth"])))
        depth, seed = int(kv["depth"]), int(kv["seed"])
    except (KeyError, ValueError) as exc:
        raise TowerFormatError(f"bad header: {exc}") from exc
    levels, cur = [], None
    seen_nodes = set()

    def finish():
        if cur is None:
            return
        n = len(cur["node"])
        k = 2 ** n
        f = [cur["gen"].get(i) for i in range(k)]
        A = [cur["aset"].get(i, ()) for i in range(k)]
        if any(t is None for t in f):
            raise TowerFormatError(f"node {node_str(cur['node'])}: missing GEN lines")
        if cur["cert"] is None:
            raise TowerFormatError(f"node {node_str(cur['node'])}: missing CERT line")
        total = sum(lv.size for lv in levels)
        levels.append(TowerLevel(cur["node"], cur["size"], cur["base"], tuple(f), tuple(A),
                                 cur["cert"], None, schedule.n1(n, total),
                                 schedule.n0_of(n, total)))

    for ln in lines[1:]:
        tok = ln.split()
        tag = tok[0]
        if tag == "NODE":
            finish()
            node = parse_node(tok[1])
            if node in seen_nodes:
                raise TowerFormatError(f"duplicate node {tok[1]}")
            seen_nodes.add(node)
            kvn = _kv(tok[2:])
            cur = {"node": node, "size": int(kvn["size"]), "base": int(kvn["base"]),
                   "gen": {}, "aset": {}, "cert": None}
        elif cur is None:
            raise TowerFormatError(f"{tag} line before any NODE")
        elif tag == "GEN":
            nu = parse_node(tok[1])
            if len(nu) != len(cur["node"]):
                raise TowerFormatError(f"GEN label {tok[1]} has the wrong length")
            arr = np.array([int(x) for x in tok[2:]], dtype=np.int64)
            if len(arr) != cur["size"] or not P.is_perm(arr):
                raise TowerFormatError(f"node {node_str(cur['node'])}: GEN {tok[1]} is not bijective")
            idx = nu_index(nu)
            if idx in cur["gen"]:
                raise TowerFormatError(f"duplicate GEN {tok[1]}")
            cur["gen"][idx] = arr
        elif tag == "ASET":
            nu = parse_node(tok[1])
            if len(nu) != len(cur["node"]):
                raise TowerFormatError(f"ASET label {tok[1]} has the wrong length")
            vals = tuple(int(x) for x in tok[2:])
            if len(set(vals)) != len(vals) or any(not 0 <= x < cur["size"] for x in vals):
                raise TowerFormatError(f"ASET {tok[1]} has repeated or out-of-block entries")
            for other in cur["aset"].values():
                if set(other) & set(vals):
                    raise TowerFormatError(f"node {node_str(cur['node'])}: overlapping ASET lines")
            cur["aset"][nu_index(nu)] = tuple(sorted(vals))
        elif tag == "CERT":
            if len(tok) != 4:
                raise TowerFormatError("CERT needs method, parameter and seed")
            cur["cert"] = CertInfo(tok[1], int(tok[2]), int(tok[3]))
        else:
            raise TowerFormatError(f"unknown line tag {tag}")
    finish()
    if not levels:
        raise TowerFormatError("no levels")
    return Tower(levels, depth, schedule, seed)


def save(tower, path):
    with open(path, "w") as fh:
        fh.write(dumps(tower))


def load(path, max_size=quotient.DEFAULT_CAP):
    with open(path) as fh:
        return loads(fh.read(), max_size)


def with_level(tower, node, **changes):
    """Copy of the tower with one level's fields replaced (for planted defects)."""
    levels = [replace(lv, _finv=None, **changes) if lv.node == tuple(node) else lv
              for lv in tower.levels]
    return Tower(levels, tower.depth, tower.schedule, tower.seed)
