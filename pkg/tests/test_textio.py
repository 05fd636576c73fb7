import numpy as np
import pytest

from forge.classify import (code_str, code_width, decode, decode_perm, encode, encode_perm,
                            parse_code)
from forge.errors import MalformedCode
from forge.textio import dumps_gens, dumps_perm, loads_gens, loads_perm
from forge.ideal import IdealGenerator


def test_perm_roundtrip():
    f = np.array([2, 0, 1, 3])
    assert np.array_equal(loads_perm(dumps_perm(f)), f)


@pytest.mark.parametrize("text", [
    "PERM 2\n0 1\n",
    "PERM 2\n0 1\n0 0\n",
    "PERM 2\n0 1\n1 1\n",
    "PERM 2\n0 5\n1 0\n",
    "nope\n",
])
def test_perm_rejects(text):
    with pytest.raises(ValueError):
        loads_perm(text)


def test_gens_roundtrip():
    gens = [IdealGenerator(frozenset({4, 1}), (0, 1)), IdealGenerator(frozenset(), (1, 1))]
    assert loads_gens(dumps_gens(gens)) == gens


def test_code_identity_width_two():
    code = encode_perm(np.arange(4))
    assert code_str(code) == "00011011"
    assert code_width(1) == 1 and code_width(5) == 3


def test_code_errors():
    with pytest.raises(MalformedCode):
        decode_perm(parse_code("0001101"), 4)
    with pytest.raises(MalformedCode):
        decode_perm(parse_code("00000000"), 4)
    with pytest.raises(MalformedCode):
        parse_code("0120")


def test_tower_code(flat1):
    rng = np.random.default_rng(0)
    f = rng.permutation(flat1.size)
    assert np.array_equal(decode(flat1, encode(flat1, f)), f)
    with pytest.raises(ValueError):
        encode(flat1, np.arange(5))
