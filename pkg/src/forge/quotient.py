"""Finite quotients of free groups that stay injective on a given word set.

Two strategies share one contract. ``Ball(r)`` acts on the radius-r ball of
the free group and separates every reduced word of length <= r by
construction, at the price of a usually enormous closure. ``Random(m, ...)``
draws degree-m generator images from a seeded stream, improves them by
single-generator resampling, and accepts only after an exhaustive check of the
evaluation map on the requested set. ``search`` tries RANDOM with escalating
degree and falls back to BALL.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import perm as P
from .errors import CapExceeded, SearchExhausted
from .freegroup import Word, enumerate_words, runs, word_count

DEFAULT_CAP = 500_000
_INT_KEY_MAX_DEGREE = 15


def _keys(rows):
    """Order-preserving keys: sorting keys sorts rows lexicographically."""
    rows = np.asarray(rows)
    n, m = rows.shape
    if m <= _INT_KEY_MAX_DEGREE:
        weights = (m ** np.arange(m - 1, -1, -1, dtype=np.int64)).astype(np.int64)
        return rows.astype(np.int64) @ weights
    dt = ">u1" if m <= 256 else ">u2"
    packed = np.ascontiguousarray(rows.astype(dt))
    out = np.empty(n, dtype=object)
    for i in range(n):
        out[i] = packed[i].tobytes()
    return out


@dataclass(eq=False)
class FiniteGroupRep:
    degree: int
    gens: tuple
    elements: np.ndarray
    _sorted_keys: np.ndarray = field(repr=False, default=None)
    _sorted_index: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        keys = _keys(self.elements)
        order = np.argsort(keys, kind="stable")
        self._sorted_keys = keys[order]
        self._sorted_index = order

    @property
    def order(self):
        return len(self.elements)

    def indices_of(self, rows):
        """Element indices of permutation rows; -1 for non-members."""
        rows = np.atleast_2d(np.asarray(rows))
        keys = _keys(rows)
        pos = np.searchsorted(self._sorted_keys, keys)
        pos = np.minimum(pos, len(self._sorted_keys) - 1)
        hit = self._sorted_keys[pos] == keys
        return np.where(hit, self._sorted_index[pos], -1).astype(np.int64)

    def index_of(self, p):
        idx = int(self.indices_of(np.asarray(p)[None, :])[0])
        if idx < 0:
            raise KeyError("permutation is not an element of the group")
        return idx

    def left_table(self, g):
        """Local-index permutation induced by x -> g x."""
        g = np.asarray(g)
        return self.indices_of(g[self.elements])


@dataclass(frozen=True)
class SeparationCertificate:
    separated: tuple
    witness: dict
    method: str
    param: int
    seed: int = 0

    def check(self):
        """Injectivity of the witness map and the identity rule."""
        values = list(self.witness.values())
        if len(set(values)) != len(values):
            return False
        return all((len(w) == 0) == (self.witness[w] == 0) for w in self.separated)


@dataclass(frozen=True)
class Ball:
    r: int


@dataclass(frozen=True)
class Random:
    m: int
    seed: int = 0
    tries: int = 40
    steps: int = 400


class _Seen:
    def __init__(self, keys):
        self.py = keys.dtype == object
        self.store = set(keys.tolist()) if self.py else np.sort(keys)

    def contains(self, keys):
        if self.py:
            return np.array([k in self.store for k in keys], dtype=bool)
        return np.isin(keys, self.store)

    def add(self, keys):
        if self.py:
            self.store.update(keys.tolist())
        else:
            self.store = np.union1d(self.store, keys)


def closure(gens, cap=DEFAULT_CAP, degree=None):
    """Breadth-first closure under the generators and their inverses.

    Identity first, then by BFS layer; inside a layer elements are sorted by
    their image tuples, which makes the table independent of generator order.
    """
    gens = [P.as_perm(g) for g in gens]
    if degree is None:
        if not gens:
            raise ValueError("degree required when there are no generators")
        degree = len(gens[0])
    if any(len(g) != degree for g in gens):
        raise ValueError("generators must share one degree")
    moves = []
    for g in gens:
        moves.append(g)
        moves.append(P.inverse(g))
    ident = np.arange(degree, dtype=np.int64)
    layers = [ident[None, :]]
    seen = _Seen(_keys(layers[0]))
    total = 1
    frontier = layers[0]
    while len(frontier) and moves:
        cand = np.concatenate([g[frontier] for g in moves])
        keys, first = np.unique(_keys(cand), return_index=True)
        fresh = ~seen.contains(keys)
        frontier = cand[first[fresh]]
        total += len(frontier)
        if total > cap:
            raise CapExceeded(f"closure exceeds cap {cap}")
        if len(frontier):
            layers.append(frontier)
            seen.add(keys[fresh])
    elements = np.concatenate(layers)
    dtype = np.uint8 if degree <= 256 else np.uint16
    return FiniteGroupRep(degree, tuple(tuple(int(x) for x in g) for g in gens),
                          elements.astype(dtype))


class WordEvaluator:
    """Evaluates a fixed batch of reduced words under many generator choices."""

    def __init__(self, k, words):
        self.k = k
        self.words = list(words)
        progs = [runs(w) for w in self.words]
        width = max((len(p) for p in progs), default=0)
        ident = 2 * k
        self.codes = np.full((len(progs), width), ident, dtype=np.int64)
        self.exps = np.zeros((len(progs), width), dtype=np.int64)
        for i, prog in enumerate(progs):
            for j, (g, s, e) in enumerate(prog):
                self.codes[i, j] = 2 * g + (0 if s < 0 else 1)
                self.exps[i, j] = e
        self.max_exp = np.zeros(2 * k + 1, dtype=np.int64)
        for c in range(2 * k):
            mask = self.codes == c
            if mask.any():
                self.max_exp[c] = self.exps[mask].max()

    def evaluate(self, gens):
        gens = [P.as_perm(g) for g in gens]
        m = len(gens[0]) if gens else 0
        top = int(self.max_exp.max()) if len(self.max_exp) else 0
        table = np.empty((2 * self.k + 1, top + 1, m), dtype=np.int64)
        table[:] = np.arange(m)
        for g in range(self.k):
            for c, base in ((2 * g, P.inverse(gens[g])), (2 * g + 1, gens[g])):
                cur = np.arange(m)
                for e in range(1, int(self.max_exp[c]) + 1):
                    cur = base[cur]
                    table[c, e] = cur
        out = np.broadcast_to(np.arange(m), (len(self.words), m)).copy()
        # runs are stored left to right; the rightmost acts first
        for j in range(self.codes.shape[1] - 1, -1, -1):
            step = table[self.codes[:, j], self.exps[:, j]]
            out = np.take_along_axis(step, out, axis=1)
        return out


def collision_count(images):
    if not len(images):
        return 0
    _, counts = np.unique(_keys(images), return_counts=True)
    return int((counts * (counts - 1) // 2).sum())


@dataclass(frozen=True)
class BallAction:
    points: tuple
    gens: tuple
    base: int


def ball_action(k, r):
    """Left multiplication on the radius-r ball, completed to permutations.

    Unmatched sources are paired with unmatched targets, both taken in the
    canonical word order, so the result is reproducible.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    points = enumerate_words(k, r, include_identity=True)
    index = {w.letters: i for i, w in enumerate(points)}
    gens = []
    for g in range(k):
        n = len(points)
        img = [-1] * n
        hit = [False] * n
        for i, w in enumerate(points):
            lets = w.letters
            if lets and lets[0].gen == g and lets[0].sign == -1:
                tgt = lets[1:]
            else:
                tgt = ((g, 1),) + lets
            j = index.get(tgt) if len(tgt) <= r else None
            if j is not None:
                img[i] = j
                hit[j] = True
        sources = [i for i in range(n) if img[i] < 0]
        targets = [j for j in range(n) if not hit[j]]
        for i, j in zip(sources, targets):
            img[i] = j
        gens.append(tuple(img))
    return BallAction(tuple(points), tuple(gens), 0)


def _certify(k, words, group, images, method, param, seed):
    idx = group.indices_of(images)
    witness = dict(zip(words, (int(i) for i in idx)))
    cert = SeparationCertificate(tuple(words), witness, method, param, seed)
    if not cert.check():
        raise SearchExhausted("certificate failed exhaustive verification")
    return cert


def _prepare(k, S):
    words = sorted({w for w in S} | {Word(k, ())}, key=Word.sort_key)
    for w in words:
        if w.alphabet_size != k or not w.is_reduced():
            raise ValueError(f"word {w} is not a reduced word over {k} generators")
    return words


def separate(k, S, strategy, cap=DEFAULT_CAP):
    """Finite group plus generator images, injective on S and the identity."""
    words = _prepare(k, S)
    ev = WordEvaluator(k, words)
    if isinstance(strategy, Ball):
        act = ball_action(k, strategy.r)
        gens = [np.array(g) for g in act.gens]
        images = ev.evaluate(gens)
        if collision_count(images):
            raise SearchExhausted(f"BALL({strategy.r}) does not separate the set")
        group = closure(gens, cap)
        return group, _certify(k, words, group, images, "BALL", strategy.r, 0)
    if isinstance(strategy, Random):
        return _random_search(k, words, ev, strategy, cap)
    raise TypeError(f"unknown strategy {strategy!r}")


def _random_search(k, words, ev, strat, cap):
    rng = np.random.default_rng(strat.seed)
    m = strat.m
    for _ in range(strat.tries):
        gens = [rng.permutation(m) for _ in range(k)]
        images = ev.evaluate(gens)
        bad = collision_count(images)
        for _ in range(strat.steps):
            if not bad:
                break
            i = int(rng.integers(k))
            old = gens[i]
            gens[i] = rng.permutation(m)
            trial = ev.evaluate(gens)
            score = collision_count(trial)
            if score <= bad:
                bad, images = score, trial
            else:
                gens[i] = old
        if bad:
            continue
        group = closure(gens, cap)
        return group, _certify(k, words, group, images, "RANDOM", m, strat.seed)
    raise SearchExhausted(f"RANDOM({m}) found no separating map in {strat.tries} tries")


def search(k, S, cap=DEFAULT_CAP, seed=0, max_degree=12, tries=40, steps=400):
    """RANDOM with escalating degree, then BALL over the longest word."""
    words = _prepare(k, S)
    need = len(words)
    m = 2
    while math.factorial(m) < need:
        m += 1
    last = None
    for deg in range(m, max_degree + 1):
        # the closure of random generators is usually A_m or S_m
        if math.factorial(deg) // 2 > cap:
            break
        try:
            return separate(k, words, Random(deg, seed, tries, steps), cap)
        except (SearchExhausted, CapExceeded) as exc:
            last = exc
    r = max(1, max(len(w) for w in words))
    if word_count(k, r) + 1 > cap:
        raise CapExceeded(f"no certified quotient within cap {cap}: {last}; "
                          f"the radius-{r} ball alone exceeds the cap")
    try:
        return separate(k, words, Ball(r), cap)
    except (SearchExhausted, CapExceeded) as exc:
        raise CapExceeded(f"no certified quotient within cap {cap}: {last or exc}") from exc
