"""Batch driver: describe groups, run verification suites, emit
deterministic JSON certificates, and replay them.

A certificate records the run configuration and every verdict; runs
with identical configuration (including the seed) produce
byte-identical certificates, and `replay` re-runs a certificate's
configuration and compares the outcome against the recorded one.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict

import numpy as np

from . import congruence as cg
from .groups import SEED_GRAMMAR, LevelGroup, SeedError, parse_seed
from .k1 import K1Context
from .zeta import (
    ZetaInstance,
    check_abelian_congruence,
    check_interpolation,
    check_j_compatibility,
    check_k_independence,
    check_table_k_independence,
    read_delta_table,
)

CERT_FORMAT = "padiclog-certificate/1"

MAX_LEVEL = 4
MAX_PREC = 6


def _plain(x):
    """JSON-safe copy: numpy scalars to ints, tuples to lists,
    non-string dict keys to strings."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    return x


def _verdict_row(v: cg.Verdict) -> dict:
    d = asdict(v)
    return {
        "name": d["name"],
        "group": d["group"],
        "j": d["j"],
        "m": d["m"],
        "passed": d["passed"],
        "witness": _plain(d["witness"]),
        "detail": d["detail"],
    }


def _load_seed(spec: str):
    """The group argument is either literal seed text or a path to a
    seed file."""
    if os.path.exists(spec) and os.path.isfile(spec):
        with open(spec) as fh:
            return parse_seed(fh.read())
    return parse_seed(spec)


# --------------------------------------------------------------------
# suites


def run_additive(cfg: dict) -> list:
    level = LevelGroup(_load_seed(cfg["group"]), cfg["j"])
    return [cg.verify_additive_iso(level, cfg["prec"], bound=cfg["bound"])]


def run_k1(cfg: dict) -> list:
    level = LevelGroup(_load_seed(cfg["group"]), cfg["j"])
    m, n, seed = cfg["prec"], cfg["samples"], cfg["seed"]
    return [
        cg.verify_log_laws(level, m, n, seed),
        cg.verify_integral_log(level, m, n, seed),
        cg.verify_log_relation(level, m, max(n // 4, 1), seed, bound=cfg["bound"]),
    ]


def run_congruence(cfg: dict) -> list:
    level = LevelGroup(_load_seed(cfg["group"]), cfg["j"])
    m, n, seed = cfg["prec"], cfg["samples"], cfg["seed"]
    out = [cg.verify_theorem1_samples(level, m, n, seed, bound=cfg["bound"])]
    kctx = K1Context(level, m, cfg["bound"])
    label = level.seed.label
    for which in ("M1", "M2", "M3", "M4", "A1", "A2", "A3"):
        try:
            if which.startswith("M"):
                _, v = cg.broken_tuple_M(kctx, which, seed=seed)
            else:
                _, v = cg.broken_tuple_A(kctx, which)
            ok = (not v.passed) and v.name == which and v.witness is not None
            out.append(
                cg.Verdict(
                    f"control-{which}", label, level.j, m, ok, v.witness,
                    "constructed violation tripped the check with a witness",
                )
            )
        except ValueError as e:
            out.append(
                cg.Verdict(
                    f"control-{which}", label, level.j, m, False,
                    {"error": str(e)}, "no violation could be constructed",
                )
            )
    return out


def run_zeta(cfg: dict) -> list:
    sigma = tuple(cfg["sigma"])
    inst = ZetaInstance(cfg["p"], cfg["cond"], cfg["j"], cfg["k"], sigma)
    out = []
    if cfg["j"] >= 1:
        lower = ZetaInstance(cfg["p"], cfg["cond"], cfg["j"] - 1, cfg["k"], sigma)
        out.append(check_j_compatibility(inst, lower))
    out.append(check_k_independence(inst, cfg["kprime"]))
    out.append(check_interpolation(inst))
    out.append(check_abelian_congruence(inst))
    if cfg["kprime"] != cfg["k"]:
        out.append(check_abelian_congruence(inst, cfg["kprime"]))
    if "table" in cfg:
        with open(cfg["table"]) as fh:
            table = read_delta_table(fh.read())
        out.append(check_table_k_independence(table, cfg["k"], cfg["kprime"]))
    return out


SUITES = {
    "additive": run_additive,
    "k1": run_k1,
    "congruence": run_congruence,
    "zeta": run_zeta,
}


# --------------------------------------------------------------------
# certificates


def make_certificate(cfg: dict, verdicts: list) -> dict:
    rows = [_verdict_row(v) for v in verdicts]
    return {
        "format": CERT_FORMAT,
        "config": cfg,
        "passed": all(r["passed"] for r in rows),
        "verdicts": rows,
    }


def render_report(cert: dict, stream) -> None:
    cfg = cert["config"]
    print(f"suite: {cfg['suite']}", file=stream)
    for r in cert["verdicts"]:
        mark = "PASS" if r["passed"] else "FAIL"
        line = f"  [{mark}] {r['name']} ({r['group']}, j={r['j']}, m={r['m']})"
        if r["detail"]:
            line += f": {r['detail']}"
        print(line, file=stream)
        if not r["passed"] and r["witness"] is not None:
            print(f"         witness: {json.dumps(r['witness'])}", file=stream)
    print("result:", "PASS" if cert["passed"] else "FAIL", file=stream)


def write_certificate(cert: dict, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(json.dumps(cert, indent=2))
        fh.write("\n")


def execute(cfg: dict, out: str | None, stream=sys.stdout) -> int:
    verdicts = SUITES[cfg["suite"]](cfg)
    cert = make_certificate(cfg, verdicts)
    render_report(cert, stream)
    if out:
        write_certificate(cert, out)
        print(f"certificate written to {out}", file=stream)
    return 0 if cert["passed"] else 1


# --------------------------------------------------------------------
# argument parsing


def _add_group_args(sp, with_samples: bool) -> None:
    sp.add_argument(
        "--group", required=True,
        help="seed text like 'cyclic:9' or a path to a seed file",
    )
    sp.add_argument("--j", type=int, default=1, help="tower level (default 1)")
    sp.add_argument(
        "--prec", type=int, default=3, help="coefficient precision m (default 3)"
    )
    sp.add_argument(
        "--bound", type=int, default=729,
        help="largest allowed carrier ring (default 729)",
    )
    if with_samples:
        sp.add_argument(
            "--samples", type=int, default=24, help="sample count (default 24)"
        )
        sp.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="padiclog",
        description=__doc__.splitlines()[0],
    )
    sub = ap.add_subparsers(dest="command", required=True)

    gp = sub.add_parser("group", help="inspect group seeds")
    gsub = gp.add_subparsers(dest="group_command", required=True)
    gd = gsub.add_parser(
        "describe", help="print structural facts about a seed at a level",
        epilog=SEED_GRAMMAR,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    gd.add_argument("--group", required=True, help="seed text or seed file path")
    gd.add_argument("--j", type=int, default=0, help="tower level (default 0)")

    vp_ = sub.add_parser("verify", help="run a verification suite")
    vsub = vp_.add_subparsers(dest="suite", required=True)

    va = vsub.add_parser("additive", help="additive isomorphism certificate")
    _add_group_args(va, with_samples=False)
    vk = vsub.add_parser("k1", help="logarithm laws and the log relation")
    _add_group_args(vk, with_samples=True)
    vc = vsub.add_parser(
        "congruence", help="theta containment plus negative controls"
    )
    _add_group_args(vc, with_samples=True)

    vz = vsub.add_parser("zeta", help="L-value approximants and congruences")
    vz.add_argument("--p", type=int, default=3, help="odd prime (default 3)")
    vz.add_argument(
        "--cond", type=int, default=1, help="prime-to-p conductor (default 1)"
    )
    vz.add_argument("--j", type=int, default=1, help="level (default 1)")
    vz.add_argument("--k", type=int, default=4, help="even weight (default 4)")
    vz.add_argument(
        "--kprime", type=int, default=16, help="second even weight (default 16)"
    )
    vz.add_argument(
        "--sigma", default="",
        help="extra primes to remove, comma separated (p and cond primes are automatic)",
    )
    vz.add_argument(
        "--table", default=None,
        help="also check an imported value table for weight independence",
    )

    for sp in (va, vk, vc, vz):
        sp.add_argument("--out", default=None, help="write the JSON certificate here")

    rp = sub.add_parser("replay", help="re-verify a certificate")
    rp.add_argument("certificate", help="path to a certificate JSON file")

    return ap


def _config_from_args(ns) -> dict:
    if ns.suite == "zeta":
        try:
            sigma = tuple(int(s) for s in ns.sigma.split(",") if s.strip())
        except ValueError:
            raise SystemExit(f"bad --sigma value {ns.sigma!r}")
        cfg = {
            "suite": "zeta",
            "p": ns.p,
            "cond": ns.cond,
            "j": ns.j,
            "k": ns.k,
            "kprime": ns.kprime,
            "sigma": list(sigma),
        }
        if ns.table:
            cfg["table"] = ns.table
        return cfg
    cfg = {
        "suite": ns.suite,
        "group": ns.group,
        "j": ns.j,
        "prec": ns.prec,
        "bound": ns.bound,
    }
    if hasattr(ns, "samples"):
        cfg["samples"] = ns.samples
        cfg["seed"] = ns.seed
    return cfg


def _validate(cfg: dict, ap: argparse.ArgumentParser) -> None:
    if cfg["j"] < 0 or cfg["j"] > MAX_LEVEL:
        ap.error(f"level j must be in 0..{MAX_LEVEL}")
    if cfg["suite"] == "zeta":
        for key in ("k", "kprime"):
            if cfg[key] <= 0 or cfg[key] % 2 or cfg[key] > 64:
                ap.error(f"--{key} must be even, positive, and at most 64")
    else:
        if not 1 <= cfg["prec"] <= MAX_PREC:
            ap.error(f"--prec must be in 1..{MAX_PREC}")
        if cfg.get("samples", 1) < 1:
            ap.error("--samples must be positive")


def describe_group(ns) -> int:
    seed = _load_seed(ns.group)
    level = LevelGroup(seed, ns.j)
    G = level.group
    lines = [
        f"seed: {seed.label}",
        f"p = {level.p}, torsion exponent e = {level.e}, level j = {level.j}",
        f"level group order {G.n} "
        f"(H of order {level.nH} by a cyclic p-part of order {level.r})",
        f"abelian: {G.is_abelian()}, exponent {G.exponent()}",
        f"conjugacy classes: {len(G.conjugacy_classes()[1])}",
        f"central subgroup Z_j of order {len(level.Zj)}",
        f"shared quotient order {level.G.n} with "
        f"{len(level.G.subgroups())} subgroups",
        f"abelianization order {level.ab.n}, exponent {level.ab.exponent()}",
    ]
    print("\n".join(lines))
    return 0


def replay(path: str, stream=sys.stdout) -> int:
    with open(path) as fh:
        cert = json.load(fh)
    if cert.get("format") != CERT_FORMAT:
        print(f"unrecognized certificate format {cert.get('format')!r}", file=stream)
        return 1
    cfg = cert["config"]
    verdicts = SUITES[cfg["suite"]](cfg)
    fresh = make_certificate(cfg, verdicts)
    if fresh["verdicts"] != cert["verdicts"]:
        print("MISMATCH: recomputed verdicts differ from the certificate", file=stream)
        for old, new in zip(cert["verdicts"], fresh["verdicts"]):
            if old != new:
                print(f"  first difference at {old['name']}", file=stream)
                break
        return 1
    render_report(fresh, stream)
    print("replay: certificate verified", file=stream)
    return 0 if fresh["passed"] else 1


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    try:
        if ns.command == "group":
            return describe_group(ns)
        if ns.command == "replay":
            return replay(ns.certificate)
        cfg = _config_from_args(ns)
        _validate(cfg, ap)
        return execute(cfg, ns.out)
    except (SeedError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
