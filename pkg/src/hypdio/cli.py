"""Command-line front end: one operation per invocation, JSON/CSV outputs carrying the resolved config."""
from __future__ import annotations

import argparse
import csv
import dataclasses
import inspect
import io
import json
import math
import sys
from fractions import Fraction

import mpmath
import numpy as np

from . import dio, games
from .geometry import INF, GeometryError, HPoint, PoincareBall, RegularTree, UpperHalfPlane, identity_audit
from .groups import (GroupError, Mobius, ResourceError, attracting_fixed_point, build_group, enumerate_orbit,
                     orbital_counts, poincare, poincare_exponent)
from .partition import (CylinderStructure, StructureError, build_group_structure, extract_regular_substructure,
                        validate_structure, verify_ahlfors)
from .shadows import convergence_classify, shadow_lemma_audit
from .surd import GOLDEN, SQRT2, Surd

EXIT_UNKNOWN, EXIT_INVALID, EXIT_RESOURCE = 2, 3, 4
SAMPLING = {"audit-space", "shadows audit", "partition verify", "game run", "game convert"}


class InvalidParams(ValueError):
    pass


# ------------------------------------------------------------------ serialisation

def plain(v):
    """JSON-ready copy of library values."""
    if v is INF:
        return "inf"
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return v
    if isinstance(v, float):
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, mpmath.mpf):
        return plain(float(v))
    if isinstance(v, mpmath.mpc):
        return [plain(float(v.real)), plain(float(v.imag))]
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, np.generic):
        return plain(v.item())
    if isinstance(v, np.ndarray):
        return [plain(x) for x in v.tolist()]
    if isinstance(v, Surd):
        return repr(v)
    if isinstance(v, HPoint):
        return {"x": plain(v.x), "y": plain(v.y)}
    if isinstance(v, games.LogRadius):
        return {"log": v.log}
    if dataclasses.is_dataclass(v) and not isinstance(v, type):
        return {f.name: plain(getattr(v, f.name)) for f in dataclasses.fields(v)}
    if isinstance(v, dict):
        return {str(k): plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, set)):
        return [plain(x) for x in v]
    return repr(v)


def emit_json(cfg, result, path):
    text = json.dumps({"config": plain(cfg), "result": plain(result)}, indent=1, sort_keys=True) + "\n"
    _write(text, path)


def emit_csv(cfg, header, rows, path):
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(plain(cfg), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([plain(x) for x in r])
    _write(buf.getvalue(), path)


def _write(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ------------------------------------------------------------------ parsing helpers

def parse_number(s):
    """Boundary points and real numbers: inf, golden, sqrt2, liouville:N, lacunary:N, p/q, decimals."""
    if s is None:
        return None
    t = str(s).strip().lower()
    if t in ("inf", "infinity", "oo"):
        return INF
    if t == "golden":
        return GOLDEN
    if t == "sqrt2":
        return SQRT2
    if t.startswith("liouville:"):
        return dio.liouville_constant(int(t.split(":")[1]))
    if t.startswith("lacunary:"):
        return dio.cubic_lacunary(int(t.split(":")[1]))
    try:
        return Fraction(t)
    except (ValueError, ZeroDivisionError):
        raise InvalidParams(f"cannot parse number {s!r}")


def int_list(s):
    if isinstance(s, list):
        return [int(x) for x in s]
    return [int(x) for x in str(s).split(",") if x.strip()]


def float_list(s):
    if isinstance(s, list):
        return [float(x) for x in s]
    return [float(x) for x in str(s).split(",") if x.strip()]


def num_list(s):
    if isinstance(s, list):
        return [parse_number(str(x)) for x in s]
    return [parse_number(x) for x in str(s).split(",") if x.strip()]


def group_from(cfg):
    kw = {}
    kind = cfg["kind"]
    if cfg.get("q") is not None:
        kw["q"] = cfg["q"]
    if cfg.get("f") is not None:
        kw["f"] = cfg["f"]
    if cfg.get("nmax") is not None:
        kw["nmax"] = cfg["nmax"]
    if cfg.get("depth_gens") is not None:
        kw["depth"] = cfg["depth_gens"]
    if cfg.get("pairs"):
        kw["pairs"] = json.loads(cfg["pairs"]) if isinstance(cfg["pairs"], str) else cfg["pairs"]
    return build_group(kind, **kw)


def space_from(cfg):
    m = cfg["model"]
    if m == "uhp":
        return UpperHalfPlane()
    if m == "ball":
        return PoincareBall(cfg["dim"])
    if m == "tree":
        return RegularTree(cfg["q"])
    raise InvalidParams(f"unknown model {m!r}")


def _filter_kw(fn, kw):
    sig = inspect.signature(fn).parameters
    return {k: v for k, v in kw.items() if k in sig and v is not None}


# ------------------------------------------------------------------ commands

def cmd_audit_space(cfg):
    sp = space_from(cfg)
    rep = identity_audit(sp, cfg["samples"], cfg["seed"], quadruples=cfg["quadruples"])
    emit_json(cfg, rep, cfg["out"])


def cmd_group_build(cfg):
    g = group_from(cfg)
    emit_json(cfg, g.summary(), cfg["out"])


def cmd_group_orbit(cfg):
    g = group_from(cfg)
    rows = []
    for p in enumerate_orbit(g, max_word=cfg["max_word"], max_distance=cfg["max_distance"], budget=cfg["budget"]):
        rows.append((" ".join(map(str, p.word)) if isinstance(p.word, tuple) else p.word, p.word_length,
                     repr(float(p.distance))))
    emit_csv(cfg, ["word", "word_length", "distance"], rows, cfg["out"])


def cmd_group_counts(cfg):
    g = group_from(cfg)
    sel = cfg["selector"]
    if sel == "f_xi":
        res = orbital_counts(g, "f_xi", R=float_list(cfg["ts"]), metametric=cfg["metametric"])
    else:
        ts = float_list(cfg["ts"]) if sel == "fG" else int_list(cfg["ts"])
        res = orbital_counts(g, sel, ts, max_word=cfg["max_word"])
    emit_json(cfg, {"selector": sel, "counts": res}, cfg["out"])


def cmd_group_poincare(cfg):
    g = group_from(cfg)
    out = {"s": cfg["s"], "partial_sum": poincare(g, cfg["s"], max_word=cfg["max_word"])}
    if g.kind == "tree" or cfg["ts"]:
        est = poincare_exponent(g, ts=float_list(cfg["ts"]) if cfg["ts"] else None, max_word=cfg["max_word"])
        out["exponent"] = est
    emit_json(cfg, out, cfg["out"])


def cmd_shadows_audit(cfg):
    g = group_from(cfg)
    kw = {"sigma": cfg["sigma"], "max_word": cfg["max_word"], "seed": cfg["seed"], "eps": cfg["eps"],
          "samples": cfg["samples"], "max_pairs": cfg["max_pairs"]}
    from . import shadows
    fn = {"intersecting": shadows.intersecting_audit, "bounded_distortion": shadows.bounded_distortion_audit,
          "big_shadows": shadows.big_shadows_audit, "diameter": shadows.diameter_audit}.get(cfg["lemma"])
    if fn is None:
        raise InvalidParams(f"unknown lemma {cfg['lemma']!r}")
    rep = shadow_lemma_audit(g.space, g, cfg["lemma"], **_filter_kw(fn, kw))
    emit_json(cfg, rep.as_json() if hasattr(rep, "as_json") else rep, cfg["out"])


def cmd_shadows_classify(cfg):
    g = group_from(cfg)
    if g.kind not in ("sl2z", "schottky", "vwazero"):
        raise InvalidParams("classify follows periodic words in upper half plane groups")
    w = int_list(cfg["word"])
    if not w:
        raise InvalidParams("empty word")
    n = cfg["repeat"] * len(w)
    full = (w * cfg["repeat"])[:n]
    with mpmath.workdps(cfg["dps"]):
        L = g.mp_letters(cfg["dps"])

        def elt(word):
            e = Mobius(mpmath.mpf(1), mpmath.mpf(0), mpmath.mpf(0), mpmath.mpf(1))
            for i in word:
                e = e @ L[i]
            return e
        xi = attracting_fixed_point(elt(w))
        sp = g.space
        o = HPoint(mpmath.mpf(0), mpmath.mpf(1))
        seq = [elt(full[:k])(o) for k in range(n + 1)]
        rep = convergence_classify(sp, seq, xi, sigma=cfg["sigma"], starts_at_o=True)
    emit_json(cfg, {"xi": xi, "report": rep}, cfg["out"])


def structure_from(cfg):
    if cfg["structure"] == "cylinder":
        return CylinderStructure(cfg["k"]), {}
    g = group_from(cfg | {"kind": cfg["structure"]})
    return build_group_structure(g, s_fraction=cfg["s_fraction"])


def _s_value(cfg, ps):
    if cfg["s"] is not None:
        return Fraction(cfg["s"]) if cfg["structure"] == "cylinder" else float(Fraction(cfg["s"]))
    return getattr(ps, "s", 1)


def cmd_partition_validate(cfg):
    ps, info = structure_from(cfg)
    emit_json(cfg, {"structure": ps.describe(), "report": validate_structure(ps, cfg["depth"]).as_json()},
              cfg["out"])


def cmd_partition_extract(cfg):
    ps, info = structure_from(cfg)
    ex, rep, fails = extract_regular_substructure(ps, _s_value(cfg, ps), depth=cfg["depth"],
                                                  check_thick_depth=min(cfg["depth"], 4))
    masses = {" ".join(map(str, w)): ex.mass(w) for w in ex.expand(min(cfg["depth"], 3))}
    emit_json(cfg, {"report": rep, "failures": fails, "masses_sample": masses}, cfg["out"])


def cmd_partition_verify(cfg):
    ps, info = structure_from(cfg)
    ex, rep, fails = extract_regular_substructure(ps, _s_value(cfg, ps), depth=min(cfg["depth"], 3),
                                                  check_thick_depth=2)
    a = verify_ahlfors(ex, samples=cfg["samples"], seed=cfg["seed"])
    emit_json(cfg, {"extraction": rep, "ahlfors": a.as_json()}, cfg["out"])


def cmd_partition_build(cfg):
    g = group_from(cfg | {"kind": cfg["structure"]})
    ps, info = build_group_structure(g, s_fraction=cfg["s_fraction"])
    emit_json(cfg, {"structure": ps.describe(), "info": info}, cfg["out"])


BOBS = {"random": lambda cfg: games.RandomBob(), "greedy": lambda cfg: games.GreedyBob(),
        "shrink-left": lambda cfg: games.ShrinkLeftBob(), "halving": lambda cfg: games.HalvingBob(),
        "scripted": lambda cfg: games.ScriptedBob(int_list(cfg["script"] or "0"))}


def _alice(cfg, params):
    kind = cfg["alice"]
    if kind == "auto":
        kind = "potential-ba" if params.variant == "h_potential" else "dummy"
    if kind == "dummy":
        return games.DummyAlice()
    if kind == "scripted":
        return games.ScriptedAlice(int_list(cfg["script"] or "0"))
    if kind == "single-ball":
        return games.ExtensionAlice()
    if kind == "potential-ba":
        if params.variant != "h_potential":
            raise InvalidParams("potential-ba plays the h-potential game")
        al = games.AlicePotentialBA(build_group("sl2z"), INF, params.beta, params.c, 1.0, max_word=cfg["max_word"])
        grid = [Fraction(1, 2) * params.beta ** n for n in range(params.rounds + 1)]
        le = al.legality_epsilon(grid)
        al.eps = math.exp(le) if math.isfinite(le) else 1.0
        return al
    raise InvalidParams(f"unknown alice {kind!r}")


def cmd_game_run(cfg):
    variant = cfg["variant"].replace("-", "_")
    p = games.GameParams(variant, games.fr(cfg["beta"]), None if cfg["alpha"] is None else games.fr(cfg["alpha"]),
                         cfg["c"], rounds=cfg["rounds"])
    if cfg["bob"] not in BOBS:
        raise InvalidParams(f"unknown bob {cfg['bob']!r}")
    tr = games.run_game(p, games.IntervalArena(), _alice(cfg, p), BOBS[cfg["bob"]](cfg),
                        start=(Fraction(1, 2), Fraction(1, 2)), seed=cfg["seed"])
    tr.notes["config"] = plain(cfg)
    if cfg["transcript"]:
        _write(tr.dumps() + "\n", cfg["transcript"])
    emit_json(cfg, {"outcome": tr.outcome, "default_reason": tr.default_reason, "violation": tr.violation,
                    "moves": len(tr.moves)}, cfg["out"])


def cmd_game_replay(cfg):
    if not cfg["transcript"]:
        raise InvalidParams("--transcript is required")
    try:
        with open(cfg["transcript"], encoding="utf-8") as fh:
            tr = games.Transcript.from_json(json.load(fh))
    except (OSError, json.JSONDecodeError, KeyError) as e:
        raise InvalidParams(f"unreadable transcript: {e}")
    ok, outcome, viol = games.replay(tr)
    emit_json(cfg, {"valid": ok, "outcome": outcome, "violation": viol}, cfg["out"])


def cmd_game_convert(cfg):
    if cfg["bob"] not in BOBS:
        raise InvalidParams(f"unknown bob {cfg['bob']!r}")
    bob = BOBS[cfg["bob"]](cfg)
    if cfg["kind"] == "potential-to-absolute":
        r = games.conversion_experiment(games.fr(cfg["beta"]), rounds=cfg["rounds"], qmax=cfg["qmax"], bob=bob,
                                        seed=cfg["seed"])
        tr = r.pop("transcript")
        res = r
    elif cfg["kind"] == "modified-to-absolute":
        p = games.GameParams("absolute", games.fr(cfg["beta"]), rounds=cfg["rounds"])
        al = games.ModifiedToAbsolute(games.dummy_positional(p.beta / 2))
        tr = games.run_game(p, games.IntervalArena(), al, bob, start=(Fraction(1, 2), Fraction(1, 2)),
                            seed=cfg["seed"])
        res = {"outcome": tr.outcome, "violation": tr.violation, "default_reason": tr.default_reason,
               "ladder": al.ladder}
    else:
        raise InvalidParams(f"unknown conversion {cfg['kind']!r}")
    if cfg["transcript"]:
        _write(tr.dumps() + "\n", cfg["transcript"])
    emit_json(cfg, res, cfg["out"])


def _xi_eta(cfg):
    return parse_number(cfg["xi"]), parse_number(cfg["eta"])


def cmd_dio_dirichlet(cfg):
    g = group_from(cfg)
    xi, eta = _xi_eta(cfg)
    ws = dio.dirichlet_witnesses(g, xi, eta, C=cfg["C"], cap=cfg["cap"])
    emit_json(cfg, {"count": len(ws), "witnesses": ws}, cfg["out"])


def cmd_dio_ba(cfg):
    if cfg["classical"]:
        r = dio.cf_oracle(parse_number(cfg["eta"]), Q=cfg["Q"])
        res = {"min_q2": r.min_q2, "argmin": r.argmin, "tail_min": r.tail_min, "exhaustive": r.exhaustive,
               "quotients": r.quotients[:20]}
    else:
        g = group_from(cfg)
        xi, eta = _xi_eta(cfg)
        res = dio.ba_epsilon(g, xi, eta, cap=cfg["cap"])
    emit_json(cfg, res, cfg["out"])


def cmd_dio_omega(cfg):
    g = group_from(cfg)
    xi, eta = _xi_eta(cfg)
    caps = num_list(cfg["caps"]) if cfg["caps"] else [10 ** 3, 10 ** 5]
    caps = [int(c) for c in caps]
    emit_json(cfg, dio.omega_estimate(g, xi, eta, caps=caps, d_min=cfg["d_min"]), cfg["out"])


def cmd_dio_ford(cfg):
    reps = dio.ford_sweep(cfg["qmax"], cfg["bound"], cfg["cap"])
    rows = [(r.p_over_q, repr(float(r.ratio)), r.argmin_word_length, r.found_within_cap) for r in reps]
    emit_csv(cfg, ["p_over_q", "ratio", "argmin_word_length", "found_within_cap"], rows, cfg["out"])


def cmd_dio_content(cfg):
    if cfg["kind"] != "tree":
        raise InvalidParams("the command line content estimator covers tree cylinders")
    rep = dio.hausdorff_content({"kind": "tree", "q": cfg["q"], "depth": cfg["depth"]}, cfg["s"])
    emit_json(cfg, rep, cfg["out"])


def cmd_dio_pxi(cfg):
    g = group_from(cfg)
    res = dio.p_xi_estimate(g, parse_number(cfg["xi"]) if g.kind != "tree" else None, s=cfg["s"],
                            scales=range(1, cfg["scales"] + 1) if g.kind == "tree" else None)
    emit_json(cfg, res, cfg["out"])


def cmd_dio_jarnik(cfg):
    if cfg["mode"] == "q_xi":
        val = dio.q_xi(lambda s: s, Fraction(cfg["c"]), Fraction(cfg["delta"]))
    elif cfg["mode"] == "velani_hill":
        val = dio.velani_hill(float(Fraction(cfg["delta"])), float(Fraction(cfg["delta_xi"])), float(Fraction(cfg["c"])))
    else:
        raise InvalidParams(f"unknown jarnik mode {cfg['mode']!r}")
    emit_json(cfg, {"mode": cfg["mode"], "value": val}, cfg["out"])


def cmd_dio_khinchin(cfg):
    g = group_from(cfg)
    xi = parse_number(cfg["xi"])
    Phi = dio.RateFunction("power", c=cfg["c"])
    delta = cfg["delta"]
    if delta is None:
        if g.kind == "tree":
            delta = math.log(g.params["q"])
        else:
            from .partition import estimate_delta
            delta = estimate_delta(g)[0].delta
    meas = dio.MeasureModel("power_law", delta=delta)
    res = dio.khinchin_series(g, xi, Phi, cfg["K"], meas, mode=cfg["mode"],
                              caps=tuple(float_list(cfg["caps"])), max_word=cfg["max_word"])
    emit_json(cfg, res, cfg["out"])


# ------------------------------------------------------------------ parser

def _group_opts(p, kind="sl2z"):
    p.add_argument("--kind", default=kind, help="sl2z | tree | schottky | block | vwazero")
    p.add_argument("--q", type=int, default=None, help="tree valence minus one")
    p.add_argument("--f", default=None, help="block table: 2^n | 4^n | 2^ceil(n^2/2)")
    p.add_argument("--nmax", type=int, default=None)
    p.add_argument("--depth-gens", type=int, default=None, help="generator pairs of the vwazero group")
    p.add_argument("--pairs", default=None, help="schottky (angle, half-width) pairs as JSON")


def _structure_opts(p):
    p.add_argument("--structure", default="cylinder", help="cylinder | schottky | tree")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--s", default=None, help="dimension parameter (default: 1 for cylinder, built s otherwise)")
    p.add_argument("--s-fraction", type=float, default=0.5)
    p.add_argument("--depth", type=int, default=6)
    for opt in ("--q", "--f", "--nmax", "--depth-gens", "--pairs"):
        p.add_argument(opt, default=None)


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        bad_cmd = "argument command" in message or "argument sub" in message or "required: command" in message \
            or "required: sub" in message
        sys.exit(EXIT_UNKNOWN if bad_cmd else EXIT_INVALID)


def build_parser():
    top = Parser(prog="hypdio", description=__doc__)
    cmds = top.add_subparsers(dest="command", metavar="command", parser_class=Parser)
    cmds.required = True
    leaves = {}

    def leaf(parent, name, fn, path, help_=None):
        p = parent.add_parser(name, help=help_)
        p.add_argument("--config", default=None, help="JSON file of option values (flags override)")
        p.add_argument("--explain", action="store_true", help="print the resolved config and exit")
        p.add_argument("--out", default=None, help="output path (stdout when omitted)")
        p.add_argument("--seed", type=int, default=None)
        p.set_defaults(func=fn, path=path)
        leaves[path] = p
        return p

    def group_cmd(name, help_):
        p = cmds.add_parser(name, help=help_)
        sub = p.add_subparsers(dest="sub", metavar="sub", parser_class=Parser)
        sub.required = True
        return sub

    p = leaf(cmds, "audit-space", cmd_audit_space, "audit-space", "identity and hyperbolicity defects")
    p.add_argument("--model", default="uhp", help="uhp | ball | tree")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--quadruples", type=int, default=None)

    g = group_cmd("group", "group construction, orbits, counting, Poincare series")
    p = leaf(g, "build", cmd_group_build, "group build")
    _group_opts(p)
    p = leaf(g, "orbit", cmd_group_orbit, "group orbit")
    _group_opts(p)
    p.add_argument("--max-word", type=int, default=None)
    p.add_argument("--max-distance", type=float, default=None)
    p.add_argument("--budget", type=int, default=3_000_000)
    p = leaf(g, "counts", cmd_group_counts, "group counts")
    _group_opts(p)
    p.add_argument("--selector", default="fG", help="fG | f_xi | f_block")
    p.add_argument("--ts", default="1,2,3,4,5", help="comma separated radii / scales")
    p.add_argument("--max-word", type=int, default=None)
    p.add_argument("--metametric", default="exact", help="f_xi: exact | euclidean")
    p = leaf(g, "poincare", cmd_group_poincare, "group poincare")
    _group_opts(p)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--max-word", type=int, default=8)
    p.add_argument("--ts", default=None)

    s = group_cmd("shadows", "shadow lemma audits and convergence classification")
    p = leaf(s, "audit", cmd_shadows_audit, "shadows audit")
    _group_opts(p, "schottky")
    p.add_argument("--lemma", default="intersecting", help="intersecting | bounded_distortion | big_shadows | diameter")
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--max-word", type=int, default=4)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--max-pairs", type=int, default=None)
    p = leaf(s, "classify", cmd_shadows_classify, "shadows classify")
    _group_opts(p, "schottky")
    p.add_argument("--word", default="0", help="letter indices of a periodic word, comma separated")
    p.add_argument("--repeat", type=int, default=8)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--dps", type=int, default=60)

    pt = group_cmd("partition", "partition structures, extraction, Ahlfors checks")
    for name, fn in (("validate", cmd_partition_validate), ("extract", cmd_partition_extract),
                     ("verify", cmd_partition_verify), ("build", cmd_partition_build)):
        p = leaf(pt, name, fn, f"partition {name}")
        _structure_opts(p)
        if name == "verify":
            p.add_argument("--samples", type=int, default=1000)
        if name == "build":
            p.set_defaults(structure="schottky")

    gm = group_cmd("game", "run, replay and convert games")
    p = leaf(gm, "run", cmd_game_run, "game run")
    p.add_argument("--variant", default="absolute", help="schmidt | absolute | modified-absolute | h-absolute | h-potential")
    p.add_argument("--beta", default="1/4")
    p.add_argument("--alpha", default=None)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--rounds", type=int, default=20)
    p.add_argument("--alice", default="auto", help="auto | dummy | scripted | single-ball | potential-ba")
    p.add_argument("--bob", default="random", help="random | greedy | shrink-left | halving | scripted")
    p.add_argument("--script", default=None)
    p.add_argument("--max-word", type=int, default=8)
    p.add_argument("--transcript", default=None)
    p = leaf(gm, "replay", cmd_game_replay, "game replay")
    p.add_argument("--transcript", default=None)
    p = leaf(gm, "convert", cmd_game_convert, "game convert")
    p.add_argument("--kind", default="potential-to-absolute", help="potential-to-absolute | modified-to-absolute")
    p.add_argument("--beta", default="1/4")
    p.add_argument("--rounds", type=int, default=30)
    p.add_argument("--qmax", type=int, default=1000)
    p.add_argument("--bob", default="random")
    p.add_argument("--script", default=None)
    p.add_argument("--transcript", default=None)

    d = group_cmd("dio", "Diophantine scans, exponents, contents, Jarnik and Khinchin")
    for name, fn in (("dirichlet", cmd_dio_dirichlet), ("ba", cmd_dio_ba), ("omega", cmd_dio_omega),
                     ("ford", cmd_dio_ford), ("content", cmd_dio_content), ("pxi", cmd_dio_pxi),
                     ("jarnik", cmd_dio_jarnik), ("khinchin", cmd_dio_khinchin)):
        p = leaf(d, name, fn, f"dio {name}")
        if name in ("dirichlet", "ba", "omega", "pxi", "khinchin"):
            _group_opts(p, {"pxi": "tree", "khinchin": "schottky"}.get(name, "sl2z"))
            p.add_argument("--xi", default="inf")
            p.add_argument("--eta", default="golden")
        if name == "dirichlet":
            p.add_argument("--C", type=float, default=1.0)
            p.add_argument("--cap", type=int, default=100)
        if name == "ba":
            p.add_argument("--cap", type=int, default=10)
            p.add_argument("--classical", action="store_true", help="continued fraction oracle instead of an orbit scan")
            p.add_argument("--Q", type=int, default=10 ** 5)
        if name == "omega":
            p.add_argument("--caps", default=None)
            p.add_argument("--d-min", type=float, default=20.0)
        if name == "ford":
            p.add_argument("--qmax", type=int, default=20)
            p.add_argument("--bound", type=int, default=1)
            p.add_argument("--cap", type=int, default=20)
        if name == "content":
            p.add_argument("--kind", default="tree")
            p.add_argument("--q", type=int, default=2)
            p.add_argument("--depth", type=int, default=0)
            p.add_argument("--s", type=float, default=math.log(2))
        if name == "pxi":
            p.add_argument("--s", type=float, default=0.35)
            p.add_argument("--scales", type=int, default=18)
            p.set_defaults(q=2)
        if name == "jarnik":
            p.add_argument("--mode", default="q_xi", help="q_xi | velani_hill")
            p.add_argument("--c", default="1")
            p.add_argument("--delta", default="1")
            p.add_argument("--delta-xi", default="1/2")
        if name == "khinchin":
            p.add_argument("--c", type=float, default=0.5)
            p.add_argument("--K", type=float, default=2.0)
            p.add_argument("--mode", default="divergent_form", help="divergent_form | convergent_form | integral_reduction")
            p.add_argument("--caps", default="8,16,32")
            p.add_argument("--delta", type=float, default=None)
            p.add_argument("--max-word", type=int, default=None)
    return top, leaves


def resolve(argv):
    top, leaves = build_parser()
    args = top.parse_args(argv)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise InvalidParams(f"unreadable config {args.config}: {e}")
        p = leaves[args.path]
        known = {a.dest for a in p._actions}
        unknown = sorted(set(file_cfg) - known)
        if unknown:
            raise InvalidParams(f"unknown config keys {unknown}")
        p.set_defaults(**{k.replace("-", "_"): v for k, v in file_cfg.items()})
        args = top.parse_args(argv)
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "explain", "config")}
    cfg["command"] = cfg.pop("path")
    cfg.pop("sub", None)
    return args, cfg


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        args, cfg = resolve(argv)
        if args.explain:
            sys.stdout.write(json.dumps(plain(cfg), indent=1, sort_keys=True) + "\n")
            return 0
        if cfg["command"] in SAMPLING and cfg.get("seed") is None:
            raise InvalidParams(f"{cfg['command']} samples randomly: --seed is required")
        args.func(cfg)
        return 0
    except ResourceError as e:
        sys.stderr.write(f"resource cap exceeded: {e}\n")
        return EXIT_RESOURCE
    except (InvalidParams, GeometryError, GroupError, StructureError, games.GameError, dio.DioError,
            ValueError, KeyError, TypeError) as e:
        sys.stderr.write(f"invalid parameters: {e}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
