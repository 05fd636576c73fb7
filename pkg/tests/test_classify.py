import numpy as np
import pytest

from forge.classify import (branch_of, classify, escape_candidates, extract_families, f1,
                            validate_families)
from forge.errors import FamilyNotFound
from forge.geodesic import geodesic
from forge.gstar import gstar_perm
from forge.tower import is_prefix
from planting import (ETA1, base_f, markers, planted_escapes, planted_incomparable,
                      planted_increasing, planted_majority, planted_non_prefix, swap_to)


def test_f1_reads_prefix_only(flat2):
    f = base_f(flat2)
    g = f.copy()
    # swapping two far images leaves the leading code bits alone
    g[[100, 200]] = g[[200, 100]]
    assert branch_of(flat2, f) == branch_of(flat2, g) == ETA1
    assert np.array_equal(f1(flat2, f), f1(flat2, g))
    assert np.array_equal(f1(flat2, f), gstar_perm(flat2, ETA1))


def test_no_fixed_points_for_branch_perm(flat2):
    rep = classify(flat2, gstar_perm(flat2, (1, 1)))
    assert rep.b11 == 0 and rep.fix_count == 0


def test_fixed_point_flag(flat2):
    f = base_f(flat2)
    f = swap_to(f, 400, 400)
    rep = classify(flat2, f, ETA1)
    assert rep.b11 == 1 and rep.b12 == 0 and rep.b14 == 0 and rep.b16 == 0


def test_escapes_every_level(flat2):
    f = planted_escapes(flat2)
    rep = classify(flat2, f)
    assert rep.eta1 == ETA1
    assert rep.escape_levels == (0, 1, 2)
    assert rep.b12 == 1 and rep.b13 == 3
    for n in range(3):
        assert escape_candidates(flat2, f, ETA1, n) == [markers(flat2, ETA1, n)[0]]


def test_constant_shape(flat2):
    f = base_f(flat2)
    rep = classify(flat2, f, ETA1)
    assert rep.escape_levels == () and rep.b14 == 0 and rep.b15 == 1 and rep.b16 == 0
    for n in range(3):
        assert set(rep.v[n]) == set(markers(flat2, ETA1, n))
        assert set(rep.lvals[n]) == {1}
    extract_families(flat2, f, ETA1, rep)
    fam = rep.families
    assert fam.kind == "IIC" and fam.B == (0, 1, 2)
    assert fam.l_star == 1 and fam.signs == (1,)
    assert fam.tuples == {0: ((),), 1: ((0,),), 2: ((0, 0),)}
    assert fam.comparability == (True,)
    for n in fam.B:
        assert set(fam.members[n]) == set(rep.v[n])
    assert rep.b26 == 0 and rep.b26p == 0
    assert validate_families(flat2, f, rep) == []


def test_constant_length_two(flat2):
    f = planted_non_prefix(flat2)
    rep = classify(flat2, f, ETA1)
    assert rep.lvals[1] == (2, 2) and rep.lvals[2] == (2, 2, 2, 2)
    assert rep.b14 == 0 and rep.b15 == 2


def test_majority_fraction(flat2):
    f = planted_majority(flat2)
    rep = classify(flat2, f, ETA1)
    extract_families(flat2, f, ETA1, rep)
    fam = rep.families
    assert fam.signs == (1,)
    assert len(fam.members[2]) == 3 and len(rep.v[2]) == 4
    assert fam.fraction_witness[2] == 2
    assert 2 * len(fam.members[2]) >= len(rep.v[2])
    for stage, n, count, size, div in fam.bounds:
        assert count * div >= size


def test_incomparable_family(flat2):
    f = planted_incomparable(flat2)
    rep = classify(flat2, f, ETA1)
    assert rep.b16 == 1
    extract_families(flat2, f, ETA1, rep)
    fam = rep.families
    assert fam.kind == "B17" and fam.B == (1, 2)
    assert fam.l_star == 1 and fam.l_dstar == 0
    assert fam.tuples == {1: ((1,),), 2: ((0, 0),)}
    a, b = fam.tuples[1][0], fam.tuples[2][0]
    assert not is_prefix(a, b) and not is_prefix(b, a)
    assert validate_families(flat2, f, rep) == []


def test_increasing_lengths(flat2):
    rep = classify(flat2, planted_increasing(flat2), ETA1)
    assert rep.b14 == 1 and rep.b15 == 3
    assert [max(rep.lvals[n]) for n in range(3)] == [1, 2, 3]


def test_non_prefix_family(flat2):
    f = planted_non_prefix(flat2)
    rep = classify(flat2, f, ETA1)
    extract_families(flat2, f, ETA1, rep)
    fam = rep.families
    assert fam.kind == "IIC" and fam.B == (1, 2) and fam.l_star == 2
    assert fam.signs == (1, 1)
    assert fam.tuples == {1: ((1,), (0,)), 2: ((0, 0), (0, 1))}
    assert fam.comparability == (False, True)
    assert rep.b26 == 1 and rep.b26p == 1


def test_classify_deterministic(flat2):
    f = planted_majority(flat2)
    assert classify(flat2, f, ETA1).lines() == classify(flat2, f, ETA1).lines()


def test_family_members_recheck(flat2):
    f = planted_non_prefix(flat2)
    rep = classify(flat2, f, ETA1)
    extract_families(flat2, f, ETA1, rep)
    for n, members in rep.families.members.items():
        lv = flat2.level(ETA1[:n])
        for a in members:
            g = geodesic(lv, a - lv.base, int(f[a]) - lv.base)
            assert g.labels() == rep.families.tuples[n]


def test_no_family_without_inner_markers(flat2):
    rep = classify(flat2, planted_escapes(flat2), ETA1)
    rep.v = {n: () for n in rep.v}
    rep.b13 = 0
    with pytest.raises(FamilyNotFound):
        extract_families(flat2, planted_escapes(flat2), ETA1, rep)


def test_rejects_non_bijection(flat2):
    with pytest.raises(ValueError):
        classify(flat2, np.zeros(flat2.size, dtype=int))
