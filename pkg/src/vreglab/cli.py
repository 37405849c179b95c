"""Command line front end: scans, tables and the acceptance suite."""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import finite_torus
from .character_lab import FilteredCharacter, gl_signature_character, howe_jumps
from .errors import CapExceededError, VregError
from .fields import prime_power
from .finite_torus import TwistedTorus, density_report
from .orbit_sums import henniart_test, predicted_table
from .root_datum import (
    RootDatum,
    build_root_datum,
    load_datum,
    twist_from_spec,
    weyl_group,
    WeylTwist,
)
from .signs import building_point, depth_parity, e_tilde, epsilon_ram_character

EXIT_FALSIFIED = 1
EXIT_ERROR = 2


# --------------------------------------------------------------------------
# argument helpers


def parse_q_values(q_args, q_range) -> list[int]:
    values = set()
    for item in q_args or []:
        for part in str(item).split(","):
            if part.strip():
                values.add(int(part))
    if q_range:
        lo, hi = (int(x) for x in q_range.split("-"))
        for q in range(lo, hi + 1):
            try:
                prime_power(q)
            except VregError:
                continue
            values.add(q)
    for q in values:
        prime_power(q)
    return sorted(values)


def expand_families(names) -> list[str]:
    """``GL(2-8)`` expands to GL(2), ..., GL(8)."""
    out = []
    for name in names or []:
        m = re.fullmatch(r"\s*([A-Za-z]+)\((\d+)-(\d+)\)\s*", name)
        if m:
            out.extend(f"{m.group(1)}({k})" for k in range(int(m.group(2)), int(m.group(3)) + 1))
        else:
            out.append(name)
    return out


def datum_from_args(args, family: str | None = None) -> RootDatum:
    if args.datum_json:
        return load_datum(args.datum_json)
    fam = family or (expand_families(args.family) or ["GL(2)"])[0]
    return build_root_datum(fam)


def subset_from_arg(arg: str | None):
    if arg in (None, "full"):
        return None
    if arg == "empty":
        return ()
    with open(arg) as fh:
        return tuple(json.load(fh))


def group_from_arg(arg: str | None):
    if arg in (None, "centralizer"):
        return None
    with open(arg) as fh:
        return tuple(tuple(tuple(r) for r in m) for m in json.load(fh))


def character_from_arg(t: TwistedTorus, args) -> FilteredCharacter:
    if args.gl_signature:
        chain_s, jumps_s, depth_s = args.gl_signature.split(":")
        chain = tuple(int(x) for x in chain_s.split(",") if x)
        jumps = tuple(int(x) for x in jumps_s.split(",") if x)
        return gl_signature_character(t, chain, jumps, int(depth_s))
    if not args.character:
        raise VregError("a character is required (--character or --gl-signature)")
    text = args.character
    if os.path.exists(text):
        with open(text) as fh:
            text = fh.read()
    return FilteredCharacter.from_json(t, text)


def emit(args, payload, rows=None, header=None):
    """Write JSON payload or CSV rows to --out (or stdout)."""
    if args.format == "csv" and rows is not None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        text = buf.getvalue()
    else:
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _single_q(args) -> int:
    qs = parse_q_values(args.q, args.q_range)
    if len(qs) != 1:
        raise VregError("this command needs exactly one q")
    return qs[0]


# --------------------------------------------------------------------------
# commands


def cmd_torus_info(args) -> int:
    datum = datum_from_args(args)
    twist = twist_from_spec(datum, args.twist)
    subset = subset_from_arg(args.subset)
    reports = []
    for q in parse_q_values(args.q, args.q_range):
        t = TwistedTorus(datum, twist, q)
        entry = {"family": datum.name, "twist": twist.label, "twist_order": t.twist_order, "q": q,
                 "order": t.order, "det": abs(t.det), "invariants": list(t.orders),
                 "split_rank": t.split_rank, "orbits": t.orbit_report.counts()}
        try:
            rep = density_report(t, subset, args.cap)
            num, den = rep.ratio_pair()
            entry.update(nvreg=rep.nvreg, ratio_num=num, ratio_den=den, star=rep.star_holds)
        except CapExceededError as exc:
            entry["density"] = f"cap exceeded: {exc}"
        reports.append(entry)
    emit(args, reports[0] if len(reports) == 1 else reports)
    return 0


def _scan_cell(cell):
    family_json, family, twist_matrix, label, q, subset, threshold, cap = cell
    datum = RootDatum.from_json(family_json, name=family)
    t = TwistedTorus(datum, WeylTwist(twist_matrix, label), q)
    try:
        rep = density_report(t, subset, cap)
    except CapExceededError:
        return (family, label, q, t.order, "", "", "", "cap_exceeded")
    num, den = rep.ratio_pair()
    return (family, label, q, t.order, rep.nvreg, num, den, str(rep.exceeds(threshold)).lower())


def _threshold(spec: str, datum: RootDatum) -> Fraction:
    m = re.fullmatch(r"\s*(\d+(?:/\d+)?)\s*(n?)\s*", spec)
    if not m:
        raise VregError(f"cannot parse threshold {spec!r}")
    value = Fraction(m.group(1))
    return value * datum.rank if m.group(2) else value


def cmd_scan_star(args) -> int:
    families = expand_families(args.family) if not args.datum_json else [None]
    qs = parse_q_values(args.q, args.q_range)
    subset = subset_from_arg(args.subset)
    cap = args.cap
    cells = []
    for fam in families:
        datum = datum_from_args(args, fam)
        if args.twist == "all":
            group = weyl_group(datum)
            twists = [(group.matrices[c[0]], f"class:{k}") for k, c in enumerate(group.conjugacy_classes())]
        else:
            tw = twist_from_spec(datum, args.twist)
            twists = [(tw.matrix, args.twist)]
        thr = _threshold(args.threshold, datum)
        payload = datum.to_json()
        for matrix, label in twists:
            for q in qs:
                cells.append((payload, datum.name, matrix, label, q, subset, thr, cap))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_scan_cell, cells, chunksize=1))
    else:
        rows = [_scan_cell(c) for c in cells]
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    minimal = {}
    for fam, label, q, *_rest, star in rows:
        key = f"{fam} {label}"
        minimal.setdefault(key, None)
        if star == "true" and minimal[key] is None:
            minimal[key] = q
    header = ["family", "twist_class", "q", "order", "nvreg", "ratio_num", "ratio_den", "star"]
    payload = {"rows": [dict(zip(header, r)) for r in rows], "minimal_q": minimal}
    emit(args, payload, rows, header)
    if args.format == "csv" and not args.out:
        for key in sorted(minimal):
            print(f"minimal passing q for {key}: {minimal[key]}", file=sys.stderr)
    return 0


def _torus_and_character(args):
    datum = datum_from_args(args)
    twist = twist_from_spec(datum, args.twist)
    t = TwistedTorus(datum, twist, _single_q(args))
    return t, character_from_arg(t, args)


def cmd_howe(args) -> int:
    _, theta = _torus_and_character(args)
    emit(args, howe_jumps(theta).to_json())
    return 0


def cmd_epsilon(args) -> int:
    t, theta = _torus_and_character(args)
    x = building_point(t.datum, args.point)
    howe = howe_jumps(theta)
    eps = epsilon_ram_character(howe, t, x)
    parity = depth_parity(howe, t, x).r_value % 2
    subset = subset_from_arg(args.subset)
    r = args.r if args.r else max(howe.depth, 1)
    rows = []
    for g in sorted(finite_torus.vreg_locus(t, subset)):
        rows.append((" ".join(map(str, g.exponents)), eps.value(g), e_tilde(t, x, r, g, subset), parity))
    header = ["gamma_exponents", "eps_ram", "e_tilde", "parity"]
    payload = {"character": eps.to_json(), "parity": parity,
               "rows": [dict(zip(header, row)) for row in rows]}
    emit(args, payload, rows, header)
    return 0


def cmd_henniart(args) -> int:
    datum = datum_from_args(args)
    twist = twist_from_spec(datum, args.twist)
    t = TwistedTorus(datum, twist, _single_q(args))
    report = henniart_test(t, group_from_arg(args.group), args.depth, args.mode, args.trials,
                           args.seed, subset_from_arg(args.subset), args.jobs)
    emit(args, report.to_json())
    return 0 if report.ok else EXIT_FALSIFIED


def cmd_predict(args) -> int:
    t, theta = _torus_and_character(args)
    x = building_point(t.datum, args.point)
    table = predicted_table(theta, x, group_from_arg(args.group), subset_from_arg(args.subset))
    rows = []
    for exps, value in table.to_rows():
        terms = ";".join(f"{e}:{c}" for e, c in value.terms.items())
        z = complex(value)
        rows.append((" ".join(map(str, exps)), value.N, terms, f"{z.real:.12g}", f"{z.imag:.12g}"))
    header = ["gamma_exponents", "N", "terms", "re", "im"]
    payload = {"sign": table.sign, "star_holds": table.star_holds,
               "rows": [dict(zip(header, row)) for row in rows]}
    emit(args, payload, rows, header)
    return 0


def cmd_acceptance(args) -> int:
    from .acceptance import run_all

    failed = 0
    for result in run_all(only=args.only):
        print(result.line())
        failed += not result.passed
    return EXIT_FALSIFIED if failed else 0


COMMANDS = {
    "torus-info": cmd_torus_info,
    "scan-star": cmd_scan_star,
    "howe": cmd_howe,
    "epsilon": cmd_epsilon,
    "henniart": cmd_henniart,
    "predict": cmd_predict,
    "acceptance": cmd_acceptance,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--family", action="append", help="built-in datum, e.g. GL(4), G2, GL(2-8)")
    common.add_argument("--datum-json", help="root datum JSON file")
    common.add_argument("--twist", default="coxeter",
                        help="coxeter, id, Weyl word 1,2,1, perm:1,2,0, class:K (scan-star also: all)")
    common.add_argument("--q", action="append", help="prime power(s), comma separated")
    common.add_argument("--q-range", help="inclusive range lo-hi; non prime powers skipped")
    common.add_argument("--depth", type=int, default=1)
    common.add_argument("--subset", default="full", help="full, empty or a JSON list of root indices")
    common.add_argument("--group", default="centralizer", help="centralizer or JSON list of matrices")
    common.add_argument("--mode", choices=("exhaustive", "random"), default="exhaustive")
    common.add_argument("--trials", type=int, default=100)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--cap", type=int, default=None)
    common.add_argument("--out")
    common.add_argument("--format", choices=("csv", "json"), default="json")
    common.add_argument("--character", help="character JSON (inline or file)")
    common.add_argument("--gl-signature", help="GL(n) Coxeter character as chain:jumps:depth, e.g. 1,3:2:2")
    common.add_argument("--point", default="origin", help="building point preset")
    common.add_argument("--r", type=int, default=None, help="level for e_tilde (default: depth)")
    common.add_argument("--threshold", default="2", help="density threshold, e.g. 2 or 2n")

    parser = argparse.ArgumentParser(prog="vreglab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "acceptance":
            p.add_argument("--only", type=int, action="append", help="criterion number(s)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.cap is None and os.environ.get("VREGLAB_CAP"):
        args.cap = int(os.environ["VREGLAB_CAP"])
    if args.cap is not None and args.cap <= 0:
        print("error: cap must be positive", file=sys.stderr)
        return EXIT_ERROR
    try:
        return COMMANDS[args.command](args)
    except (VregError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
