import numpy as np
import pytest

from forge.errors import ScheduleInfeasible, TowerFormatError
from forge.freegroup import word_count
from forge.tower import (SizeSchedule, build_tower, dumps, is_regular, level_seed, loads,
                         meet_len, min_block_size, nodes_upto, parse_node, schedule_floor,
                         skeleton_tower, star_compare, verify_level, verify_tower, with_level)


def test_star_order_examples():
    assert star_compare((), (0,)) == -1
    assert star_compare((0,), (1,)) == -1
    assert star_compare((1, 1), (0, 0, 0)) == -1
    assert star_compare((1,), (1,)) == 0


def test_nodes_upto():
    assert nodes_upto(2) == [(), (0,), (1,), (0, 0), (0, 1), (1, 0), (1, 1)]
    assert parse_node("-") == () and parse_node("10") == (1, 0)
    with pytest.raises(ValueError):
        parse_node("12")


def test_meet_len():
    assert meet_len((0, 1, 1), (0, 1, 0)) == 2
    assert meet_len((), (1,)) == 0


def test_depth_zero_builds_one_level():
    tw = build_tower(0, SizeSchedule("DEMO"), seed=1)
    assert len(tw.levels) == 1
    assert verify_tower(tw).ok


def test_flat_tower_layout(flat2):
    assert [lv.node for lv in flat2.levels] == nodes_upto(2)
    base = 0
    for lv in flat2.levels:
        assert lv.base == base
        base += lv.size
    assert flat2.size == base
    for gid in (0, base // 2, base - 1):
        lv, loc = flat2.locate(gid)
        assert lv.base + loc == gid and 0 <= loc < lv.size
    with pytest.raises(IndexError):
        flat2.locate(base)


def test_flat_tower_verifies(flat1):
    rep = verify_tower(flat1)
    assert rep.ok, rep.lines()
    assert rep.lines()[-1] == "SUMMARY levels=3 violations=0"


def test_same_seed_same_bytes(flat1):
    again = build_tower(1, SizeSchedule("FLAT", n0=1), seed=1)
    assert dumps(again) == dumps(flat1)


def test_level_seeds_differ():
    seeds = {level_seed(1, nd) for nd in nodes_upto(3)}
    assert len(seeds) == len(nodes_upto(3))


def test_roundtrip_text(flat1):
    text = dumps(flat1)
    back = loads(text)
    assert dumps(back) == text
    assert verify_tower(back).ok


def _with_fixed_point(lv):
    t = np.array(lv.f[0])
    y = t[0]
    p = int(np.flatnonzero(t == 0)[0])
    t[0], t[p] = 0, y
    return (t,) + tuple(lv.f[1:])


def test_planted_fixed_point(flat1):
    bad = with_level(flat1, (0,), f=_with_fixed_point(flat1.level((0,))), group=None)
    checks = {v.check for v in verify_tower(bad).violations}
    assert "b" in checks and "f1" in checks


def test_planted_shared_markers(flat1):
    lv = flat1.level((1,))
    bad = with_level(flat1, (1,), A=(lv.A[0], lv.A[0]))
    checks = {v.check for v in verify_tower(bad).violations}
    assert "e" in checks


def test_nonregular_tables():
    # the full symmetric group on 3 points acts on the points, not regularly
    ok, why = is_regular([np.array([1, 0, 2]), np.array([1, 2, 0])])
    assert not ok
    ok, _ = is_regular([np.array([1, 2, 0])])
    assert ok
    ok, why = is_regular([np.array([1, 0, 2, 3])])
    assert not ok and "transitive" in why


def test_verify_level_clean_on_every_level(flat1):
    for i, lv in enumerate(flat1.levels):
        assert verify_level(lv, flat1.levels[:i], flat1.schedule) == []


def test_strict_schedule_arithmetic():
    s = SizeSchedule("STRICT", lam=2)
    for n in range(4):
        for prior in (0, 1, 7, 1000):
            n1 = s.n1(n, prior)
            assert n1 == prior * 2 ** (n + 7) * 2
            assert s.aset_size(n, prior) >= n1 // 2 ** n
            assert s.aset_size(n, prior) * 2 ** n >= n1 - 2 ** n + 1


def test_min_block_size_counts_balls():
    assert min_block_size(0, 1) == 1
    assert min_block_size(2, 4) == 4 * (1 + word_count(4, 1))


def test_demo_depth2_infeasible():
    sched = SizeSchedule("DEMO", lam=2, beta=2)
    floors = dict(schedule_floor(2, sched))
    assert max(floors.values()) > sched.max_size
    with pytest.raises(ScheduleInfeasible):
        build_tower(2, sched, seed=1)


def test_strict_depth1_infeasible():
    with pytest.raises(ScheduleInfeasible):
        build_tower(1, SizeSchedule("STRICT"), seed=1)


def test_schedule_validation():
    with pytest.raises(ValueError):
        SizeSchedule("LOOSE")
    with pytest.raises(ValueError):
        SizeSchedule("DEMO", beta=1)
    with pytest.raises(ValueError):
        build_tower(9, SizeSchedule("FLAT"))


def test_skeleton_blocks():
    sk = skeleton_tower(3, lambda nd: 1 + len(nd))
    assert len(sk.levels) == 15
    assert list(sk.block((1, 0))) == list(range(sk.level((1, 0)).base, sk.level((1, 0)).base + 3))


@pytest.mark.parametrize("mutate,msg", [
    (lambda t: t.replace("TOWER v1", "TOWER v9"), "version"),
    (lambda t: t.replace("NODE 0 ", "NODE - ", 1), "duplicate node"),
    (lambda t: "\n".join(l for l in t.splitlines() if not l.startswith("CERT")), "CERT"),
    (lambda t: t.replace("GEN 1 ", "GEN 0 ", 1), "duplicate GEN"),
    (lambda t: t + "BOGUS 1\n", "unknown"),
])
def test_format_errors(flat1, mutate, msg):
    with pytest.raises(TowerFormatError, match=msg):
        loads(mutate(dumps(flat1)))


def test_non_bijective_gen(flat1):
    lines = dumps(flat1).splitlines()
    i = next(j for j, l in enumerate(lines) if l.startswith("GEN 0 "))
    tok = lines[i].split()
    tok[3] = tok[2]
    lines[i] = " ".join(tok)
    with pytest.raises(TowerFormatError, match="bijective"):
        loads("\n".join(lines))
