import numpy as np
import pytest

from forge.cli import run
from forge.textio import load_perm, save_perm
from forge.tower import load


@pytest.fixture(scope="module")
def tower_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "t.txt"
    assert run(["build", "--depth", "1", "--profile", "flat", "--seed", "1", "-o", str(path)]) == 0
    return path


def test_build_then_verify(tower_file, capsys):
    before = tower_file.read_bytes()
    assert run(["verify", str(tower_file)]) == 0
    out = capsys.readouterr().out
    assert "SUMMARY levels=3 violations=0" in out
    assert tower_file.read_bytes() == before


def test_build_is_reproducible(tower_file, tmp_path):
    again = tmp_path / "again.txt"
    assert run(["build", "--depth", "1", "--profile", "flat", "--seed", "1", "-o", str(again)]) == 0
    assert again.read_bytes() == tower_file.read_bytes()


def test_build_to_stdout_keeps_stream_clean(capsys):
    assert run(["build", "--depth", "0", "--profile", "flat", "--seed", "1"]) == 0
    cap = capsys.readouterr()
    assert cap.out.startswith("TOWER v1") and "BUILT" not in cap.out
    assert "BUILT depth=0" in cap.err


def test_tampered_file(tower_file, tmp_path, capsys):
    lines = tower_file.read_text().splitlines()
    i = next(j for j, l in enumerate(lines) if l.startswith("ASET 1"))
    j = next(j for j, l in enumerate(lines) if l.startswith("ASET 0") and j > 2)
    lines[i] = "ASET 1 " + lines[j].split(maxsplit=2)[2]
    bad = tmp_path / "bad.txt"
    bad.write_text("\n".join(lines) + "\n")
    assert run(["verify", str(bad)]) == 1
    assert "VIOLATION" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    ["build", "--depth", "-1"],
    ["build"],
    ["build", "--depth", "1", "--profile", "nope"],
    ["nosuch"],
    [],
    ["verify", "/nonexistent/tower.txt"],
])
def test_usage_errors(argv):
    assert run(argv) == 2


def test_infeasible_profile_exit_code(capsys):
    assert run(["build", "--depth", "2", "--profile", "demo", "--lambda", "2", "--beta", "2"]) == 1
    assert "ScheduleInfeasible" in capsys.readouterr().err


def test_geodesic_and_census(tower_file, capsys):
    assert run(["geodesic", str(tower_file), "--node", "-", "--from", "0", "--to", "0"]) == 0
    assert "length=0" in capsys.readouterr().out
    assert run(["census", str(tower_file), "--node", "-"]) == 0
    assert "CENSUS - pairs=9 diameter=1" in capsys.readouterr().out
    assert run(["geodesic", str(tower_file), "--node", "0", "--from", "0", "--to", "999"]) == 2


def test_eval_and_recover(tower_file, tmp_path, capsys):
    perm = tmp_path / "h.txt"
    assert run(["eval", str(tower_file), "--word", "b:0:+ b:1:-", "--census", "-o", str(perm)]) == 0
    assert "CONFINED true bound=2" in capsys.readouterr().out
    # recovery length is capped by the depth, here 1
    assert run(["recover", str(tower_file), "--perm", str(perm)]) == 1
    assert "Unrepresentable" in capsys.readouterr().err
    assert run(["eval", str(tower_file), "--word", "b:1:-", "-o", str(perm)]) == 0
    assert run(["recover", str(tower_file), "--perm", str(perm)]) == 0
    assert "RECOVERED b:1:-" in capsys.readouterr().out


def test_export_and_classify(tower_file, tmp_path, capsys):
    tw = load(str(tower_file))
    gs = tmp_path / "g.txt"
    assert run(["export", str(tower_file), "--what", "gstar", "--branch", "1", "-o", str(gs)]) == 0
    assert len(load_perm(str(gs))) == tw.size
    assert run(["export", str(tower_file), "--what", "code", "--perm", str(gs)]) == 0
    assert "CODE " in capsys.readouterr().out
    assert run(["classify", str(tower_file), "--perm", str(gs), "--eta1", "1"]) == 0
    out = capsys.readouterr().out
    assert "B11 0" in out and "B26P 0" in out
    assert run(["surgery", str(tower_file), "--perm", str(gs), "--pick"]) == 1


def test_ideal(tower_file, tmp_path, capsys):
    gens = tmp_path / "gens.txt"
    gens.write_text("GEN 0 0 5\n")
    assert run(["ideal", str(tower_file), "--gens", str(gens)]) == 0
    assert "AVOID k=1 eta=1 node=1" in capsys.readouterr().out


def test_config_and_report(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("profile = flat\nseed = 1\ndepth = 0\n")
    out = tmp_path / "t.txt"
    rep = tmp_path / "r.txt"
    assert run(["build", "--config", str(cfg), "-o", str(out), "--report", str(rep)]) == 0
    assert "BUILT depth=0" in rep.read_text()
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert run(["build", "--config", str(bad)]) == 2


def test_perm_size_mismatch(tower_file, tmp_path):
    p = tmp_path / "p.txt"
    save_perm(np.arange(4), str(p))
    assert run(["classify", str(tower_file), "--perm", str(p)]) == 2
