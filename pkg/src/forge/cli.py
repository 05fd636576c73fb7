"""Command line entry point.

Exit codes: 0 success, 1 failed verification or unmet request, 2 usage error.
"""

import argparse
import sys

import numpy as np

from . import classify as C
from . import gstar as GS
from . import surgery as S
from . import textio
from . import tower as T
from .errors import ForgeError, TowerFormatError
from .geodesic import distance_census, geodesic
from .ideal import covered_by, find_avoiding_node, verify_witness

CONFIG_KEYS = {
    "depth": int, "profile": str, "lambda": int, "beta": int, "n0": int, "seed": int,
    "max_size": int, "max_words": int, "output": str, "report": str, "quiet": bool,
    "eta1": str, "max_len": int,
}


class UsageError(Exception):
    pass


def _parse_config(path):
    out = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path}: {exc.strerror}") from exc
    with fh:
        for ln in fh:
            ln = ln.split("#", 1)[0].strip()
            if not ln:
                continue
            if "=" not in ln:
                raise UsageError(f"--config: expected key=value, got {ln!r}")
            key, val = (x.strip() for x in ln.split("=", 1))
            key = key.replace("-", "_")
            if key not in CONFIG_KEYS:
                raise UsageError(f"--config: unknown key {key}")
            conv = CONFIG_KEYS[key]
            if conv is bool:
                out[key] = val.lower() in ("1", "true", "yes", "on")
            else:
                try:
                    out[key] = conv(val)
                except ValueError as exc:
                    raise UsageError(f"--config: bad value for {key}: {val}") from exc
    if "lambda" in out:
        out["lam"] = out.pop("lambda")
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    p = _Parser(prog="forge", description="Finite towers of groups and branch permutations.")
    sub = p.add_subparsers(dest="cmd", parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="key=value file; flags win")
        sp.add_argument("--report", help="write report lines to this file")
        sp.add_argument("--quiet", action="store_true", default=None, help="summaries only")
        return sp

    b = common(sub.add_parser("build", help="build a tower"))
    b.add_argument("--depth", type=int)
    b.add_argument("--profile", type=str.upper, default="DEMO")
    b.add_argument("--lambda", dest="lam", type=int, default=2)
    b.add_argument("--beta", type=int, default=2)
    b.add_argument("--n0", type=int, default=1)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--max-size", dest="max_size", type=int, default=T.quotient.DEFAULT_CAP)
    b.add_argument("--max-words", dest="max_words", type=int, default=50_000)
    b.add_argument("-o", "--output", help="tower file (default: standard output)")

    v = common(sub.add_parser("verify", help="exhaustively check a tower file"))
    v.add_argument("tower")

    g = common(sub.add_parser("geodesic", help="canonical geodesic inside one block"))
    g.add_argument("tower")
    g.add_argument("--node", required=True)
    g.add_argument("--from", dest="src", type=int, required=True, help="local index")
    g.add_argument("--to", dest="dst", type=int, required=True, help="local index")

    e = common(sub.add_parser("eval", help="evaluate a branch word"))
    e.add_argument("tower")
    e.add_argument("--word", required=True)
    e.add_argument("--census", action="store_true")
    e.add_argument("--at", type=int, action="append", default=[], help="global id to map")
    e.add_argument("-o", "--output", help="write the word permutation as a PERM file")

    c = common(sub.add_parser("census", help="distance census per block"))
    c.add_argument("tower")
    c.add_argument("--node", action="append", default=[])

    i = common(sub.add_parser("ideal", help="check ideal generators and find an avoiding node"))
    i.add_argument("tower")
    i.add_argument("--gens", required=True)
    i.add_argument("--covers", help="PERM-free id list file: one global id per line")

    k = common(sub.add_parser("classify", help="classifier report for a permutation"))
    k.add_argument("tower")
    k.add_argument("--perm", required=True)
    k.add_argument("--eta1")

    s = common(sub.add_parser("surgery", help="pick or build a surgered permutation"))
    s.add_argument("tower")
    s.add_argument("--perm", required=True)
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--pick", action="store_true")
    mode.add_argument("--spec", help="SPEC file to build from")
    s.add_argument("-o", "--output", help="write g as a PERM file")

    r = common(sub.add_parser("recover", help="recover a branch word from a permutation"))
    r.add_argument("tower")
    r.add_argument("--perm", required=True)
    r.add_argument("--max-len", dest="max_len", type=int, default=None)

    x = common(sub.add_parser("export", help="write derived permutations or the block layout"))
    x.add_argument("tower")
    x.add_argument("--what", choices=["universe", "gstar", "f1", "code"], required=True)
    x.add_argument("--branch")
    x.add_argument("--perm")
    x.add_argument("-o", "--output")
    return p


class _Out:
    def __init__(self, report=None, quiet=False):
        self.lines = []
        self.report = report
        self.quiet = quiet
        self.stream = sys.stdout

    def __call__(self, line, detail=False):
        if detail and self.quiet:
            return
        self.lines.append(line)

    def flush(self):
        text = "\n".join(self.lines) + ("\n" if self.lines else "")
        if self.report:
            with open(self.report, "w") as fh:
                fh.write(text)
        else:
            self.stream.write(text)


def _load_tower(path):
    return T.load(path)


def _cmd_build(a, out):
    if a.depth is None:
        raise UsageError("--depth is required")
    if a.profile not in T.PROFILES:
        raise UsageError(f"--profile must be one of {', '.join(p.lower() for p in T.PROFILES)}")
    if a.depth < 0 or a.depth > 4:
        raise UsageError("--depth must be between 0 and 4")
    if a.lam < 1:
        raise UsageError("--lambda must be >= 1")
    if a.profile == "DEMO" and a.beta < 2:
        raise UsageError("--beta must be >= 2")
    if a.n0 < 1:
        raise UsageError("--n0 must be >= 1")
    sched = T.SizeSchedule(a.profile, a.lam, a.beta, a.n0, a.max_size, 4, a.max_words)
    tw = T.build_tower(a.depth, sched, a.seed,
                       progress=lambda lv: out(f"LEVEL {T.node_str(lv.node)} size={lv.size} "
                                               f"method={lv.certificate.method}({lv.certificate.param})",
                                               detail=True))
    text = T.dumps(tw)
    if a.output and a.output != "-":
        with open(a.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        # keep standard output a clean tower file
        out.stream = sys.stderr
    out(f"BUILT depth={tw.depth} levels={len(tw.levels)} universe={tw.size}")
    return 0


def _cmd_verify(a, out):
    try:
        tw = _load_tower(a.tower)
    except TowerFormatError as exc:
        out(f"VIOLATION format {exc}")
        out("SUMMARY levels=0 violations=1")
        return 1
    rep = T.verify_tower(tw)
    for ln in rep.lines(quiet=a.quiet):
        out(ln)
    return 0 if rep.ok else 1


def _cmd_geodesic(a, out):
    tw = _load_tower(a.tower)
    node = T.parse_node(a.node)
    if not tw.has(node):
        raise UsageError(f"--node {a.node} is not in the tower")
    lv = tw.level(node)
    for flag, val in (("--from", a.src), ("--to", a.dst)):
        if not 0 <= val < lv.size:
            raise UsageError(f"{flag} {val} outside the block (size {lv.size})")
    g = geodesic(lv, a.src, a.dst)
    out(f"GEODESIC node={T.node_str(node)} from={a.src} to={a.dst} length={g.length}")
    out(f"STEPS {g}")
    return 0


def _parse_word(text):
    try:
        return GS.parse_branch_word(text)
    except ValueError as exc:
        raise UsageError(f"--word: {exc}") from exc


def _cmd_eval(a, out):
    tw = _load_tower(a.tower)
    w = _parse_word(a.word)
    perm = GS.word_perm(tw, w)
    out(f"WORD {w or 'e'}")
    for x in a.at:
        if not 0 <= x < tw.size:
            raise UsageError(f"--at {x} outside the universe")
        out(f"IMAGE {x} {int(perm[x])}")
    code = 0
    if a.census:
        rep = GS.fixed_points(tw, w)
        for ln in rep.lines():
            out(ln, detail=ln.startswith("FIX "))
        if len(w) and w.is_reduced():
            try:
                ok = GS.confinement_check(tw, w)
                out(f"CONFINED {str(ok).lower()} bound={GS.confinement_bound(tw, w)}")
                code = 0 if ok else 1
            except ValueError as exc:
                out(f"CONFINED n/a {exc}")
    if a.output:
        textio.save_perm(perm, a.output)
    return code


def _cmd_census(a, out):
    tw = _load_tower(a.tower)
    nodes = [T.parse_node(x) for x in a.node] or [lv.node for lv in tw.levels]
    for node in nodes:
        if not tw.has(node):
            raise UsageError(f"--node {T.node_str(node)} is not in the tower")
        for ln in distance_census(tw.level(node)).lines(T.node_str(node)):
            out(ln)
    return 0


def _cmd_ideal(a, out):
    tw = _load_tower(a.tower)
    with open(a.gens) as fh:
        gens = textio.loads_gens(fh.read())
    if not gens:
        raise UsageError("--gens lists no generators")
    valid = True
    for idx, g in enumerate(gens):
        ok = verify_witness(tw, g.v, g.witness)
        valid &= ok
        out(f"WITNESS {idx} rho={T.node_str(g.witness)} size={len(g.v)} {'valid' if ok else 'invalid'}")
    res = find_avoiding_node(tw, gens)
    for ln in res.lines(tw):
        out(ln)
    if a.covers:
        with open(a.covers) as fh:
            xs = [int(t) for t in fh.read().split()]
        out(f"COVERED {str(covered_by(tw, xs, gens)).lower()}")
    return 0 if valid else 1


def _load_perm_for(tw, path):
    f = textio.load_perm(path)
    if len(f) != tw.size:
        raise UsageError(f"--perm has {len(f)} points, universe has {tw.size}")
    return f


def _cmd_classify(a, out):
    tw = _load_tower(a.tower)
    f = _load_perm_for(tw, a.perm)
    eta1 = T.parse_node(a.eta1) if a.eta1 else None
    if eta1 is not None and len(eta1) < tw.depth:
        raise UsageError("--eta1 is shorter than the tower depth")
    rep = C.classify(tw, f, eta1)
    try:
        C.extract_families(tw, f, rep.eta1, rep)
    except ForgeError as exc:
        out(f"FAMILY none {exc}")
    for ln in rep.lines():
        out(ln)
    return 0


def _cmd_surgery(a, out):
    tw = _load_tower(a.tower)
    f = _load_perm_for(tw, a.perm)
    if a.spec:
        with open(a.spec) as fh:
            spec = S.parse_spec(fh.read())
        g = S.build_g(tw, f, spec)
        spec.case = S.detect_case(tw, spec, f)
    else:
        spec, g = S.pick_g(tw, f)
    for ln in spec.lines():
        out(ln)
    diff = int((g != GS.gstar_perm(tw, spec.eta1)).sum())
    out(f"G diff={diff} fixed={int((g == np.arange(len(g))).sum())}")
    if a.output:
        textio.save_perm(g, a.output)
    return 0


def _cmd_recover(a, out):
    tw = _load_tower(a.tower)
    h = _load_perm_for(tw, a.perm)
    m = tw.depth if a.max_len is None else a.max_len
    if not 0 <= m <= tw.depth:
        raise UsageError(f"--max-len must be between 0 and the tower depth {tw.depth}")
    for ln in S.recover_word(tw, h, m).lines():
        out(ln)
    return 0


def _cmd_export(a, out):
    tw = _load_tower(a.tower)
    if a.what == "universe":
        for lv in tw.levels:
            out(f"BLOCK {T.node_str(lv.node)} base={lv.base} size={lv.size}")
        return 0
    if a.what == "gstar":
        if not a.branch:
            raise UsageError("--branch is required for --what gstar")
        perm = GS.gstar_perm(tw, T.parse_node(a.branch))
    else:
        if not a.perm:
            raise UsageError(f"--perm is required for --what {a.what}")
        f = _load_perm_for(tw, a.perm)
        if a.what == "code":
            out(f"CODE {C.code_str(C.encode(tw, f))}")
            out(f"BRANCH {T.node_str(C.branch_of(tw, f))}")
            return 0
        perm = C.f1(tw, f)
    if a.output:
        textio.save_perm(perm, a.output)
        out(f"WROTE {a.output} points={len(perm)}")
    else:
        out(textio.dumps_perm(perm).rstrip("\n"))
    return 0


COMMANDS = {
    "build": _cmd_build, "verify": _cmd_verify, "geodesic": _cmd_geodesic, "eval": _cmd_eval,
    "census": _cmd_census, "ideal": _cmd_ideal, "classify": _cmd_classify,
    "surgery": _cmd_surgery, "recover": _cmd_recover, "export": _cmd_export,
}


def run(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        if "--config" in argv:
            i = argv.index("--config")
            if i + 1 >= len(argv):
                raise UsageError("--config needs a path")
            cfg = _parse_config(argv[i + 1])
            cmd = argv[0] if argv else None
            if cmd in parser._subparsers._group_actions[0].choices:
                parser._subparsers._group_actions[0].choices[cmd].set_defaults(**cfg)
        a = parser.parse_args(argv)
        if a.cmd is None:
            raise UsageError("a subcommand is required")
        out = _Out(a.report, bool(a.quiet))
        code = COMMANDS[a.cmd](a, out)
        out.flush()
        return code
    except UsageError as exc:
        sys.stderr.write(f"forge: usage error: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"forge: {exc}\n")
        return 2
    except (ForgeError, ValueError) as exc:
        sys.stderr.write(f"forge: {type(exc).__name__}: {exc}\n")
        return 1


def main():
    sys.exit(run())
