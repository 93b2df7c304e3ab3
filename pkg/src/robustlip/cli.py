"""Command-line front end.

Subcommands: solve, duals, cones, verify, farkas, slater, gen, report.
All numeric output is exact rational text; --json switches to JSON with
sorted keys.  Exit codes: 0 success, 1 verification inconsistency, 2 usage.
Caps default to 4096 selections / 12 pieces; ROBUST_LIP_CAP overrides the
selection cap, flags override both.
"""

from __future__ import annotations

import argparse
import json
import sys

from .cones import (Caps, DEFAULT_PIECE_CAP, VARIANTS, build_cone, member,
                    union_contains, union_convex_decide)
from .duals import (K_RANGE, diagram_check, dual_value, lip_dual_value,
                    primal_value, verify_dual_certificate)
from .model import (ExtValue, gen_random, load_instance, save_instance)
from .rationals import parse_rat, rat_str
from .verify import (FARKAS_VARIANTS, SLATER_CONDS, default_objectives,
                     farkas_check, hypothesis_report, slater_check, theorem_check)

_THEOREM_CHOICES = ("2.1", "C2.4", "C6.5",
                    *(f"4.1:{i}" for i in range(1, 6)),
                    *(f"4.2:{i}" for i in (6, 7)))


def _parse_objective(text: str, dim: int):
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != dim:
        raise SystemExit(f"error: objective needs {dim} entries, got {len(parts)}")
    try:
        return tuple(parse_rat(p) for p in parts)
    except ValueError as exc:
        raise SystemExit(f"error: {exc}")


def _caps(args) -> Caps:
    return Caps.from_env(selections=args.selection_cap, pieces=args.piece_cap)


def _emit(args, payload: dict, text_lines):
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def _xv(v: ExtValue) -> str:
    return str(v)


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    c = _parse_objective(args.c, inst.dim)
    value, point = primal_value(inst, c)
    payload = {"schema": "robustlip.solve/1", "value": value.to_json(),
               "point": [rat_str(v) for v in point] if point else None}
    where = f" at x = ({', '.join(rat_str(v) for v in point)})" if point else ""
    _emit(args, payload, [f"value {value}{where}"])
    return 0


def cmd_duals(args) -> int:
    inst = load_instance(args.instance)
    c = _parse_objective(args.c, inst.dim)
    caps = _caps(args)
    ks = list(K_RANGE) if args.k == "all" else [int(args.k)]
    routes = ("cone", "direct") if args.route == "both" else (args.route,)
    primal, _ = primal_value(inst, c)
    rows = []
    payload = {"schema": "robustlip.duals/1", "primal": primal.to_json(), "duals": []}
    for k in ks:
        entry = {"k": k}
        line = [f"RLID{k}"]
        for route in routes:
            out = dual_value(inst, c, k, route, caps)
            entry[route] = out.to_json()
            cert = ""
            if out.value.is_finite and verify_dual_certificate(inst, c, out):
                cert = " (attained, certificate verified)"
            line.append(f"{route}: {out.value}{cert}")
        payload["duals"].append(entry)
        rows.append("  ".join(line))
    rows.append(f"primal  {primal}")
    _emit(args, payload, rows)
    return 0


def cmd_cones(args) -> int:
    inst = load_instance(args.instance)
    caps = _caps(args)
    cone = build_cone(inst, args.variant, caps)
    payload = cone.to_json()
    lines = [f"{args.variant}: {len(cone.pieces)} piece(s) in Q^{cone.dim}"]
    for i, p in enumerate(cone.pieces):
        lines.append(f"  piece {i}: " + "; ".join(
            "(" + ", ".join(rat_str(v) for v in g) + ")" for g in p.generators))
    rc = 0
    if args.check == "convexity":
        verdict = union_convex_decide(cone, caps)
        payload["verdict"] = verdict.tag
        payload["witness"] = ([rat_str(v) for v in verdict.witness]
                              if verdict.witness else None)
        lines.append(f"convexity: {verdict.tag}")
        if verdict.witness:
            lines.append("  witness: (" + ", ".join(rat_str(v) for v in verdict.witness) + ")")
    elif args.check == "containment":
        if not args.other:
            raise SystemExit("error: --check containment needs --other")
        other = build_cone(inst, args.other, caps)
        ok, witness = union_contains(cone, other, caps)
        payload["contained_in"] = {"other": args.other, "holds": ok,
                                   "witness": [rat_str(v) for v in witness] if witness else None}
        lines.append(f"{args.variant} subset of {args.other}: {ok}")
        if witness:
            lines.append("  witness: (" + ", ".join(rat_str(v) for v in witness) + ")")
    _emit(args, payload, lines)
    return rc


def _theorem_reports(inst, name, args, caps):
    samples = default_objectives(inst, args.c_samples)
    if name == "2.1":
        return [theorem_check(inst, "M1", samples, caps, label="2.1")]
    if name == "C2.4":
        return [theorem_check(inst, "M1", samples, caps)]
    if name == "C6.5":
        return [theorem_check(inst, v, samples, caps) for v in ("E1", "E2", "E3")]
    fam, num = name.split(":")
    return [theorem_check(inst, int(num), samples, caps)]


def cmd_verify(args) -> int:
    inst = load_instance(args.instance)
    caps = _caps(args)
    reports = _theorem_reports(inst, args.theorem, args, caps)
    payload = {"schema": "robustlip.verify/1",
               "reports": [r.to_json() for r in reports]}
    lines = []
    for r in reports:
        lines.append(f"theorem {r.theorem_id} on {r.variant}: {r.verdict.tag}; "
                     f"consistent: {r.consistent}")
        if r.exhibit:
            lines.append(
                f"  gap objective c = ({', '.join(rat_str(v) for v in r.exhibit.c)}):"
                f" primal {r.exhibit.primal} vs dual {r.exhibit.dual}"
                f" (level {rat_str(r.exhibit.level)})")
        for row in r.rows:
            lines.append(
                f"  c=({', '.join(rat_str(v) for v in row.c)}) "
                f"primal={row.primal} dual={row.dual}"
                + ("" if row.ok else "  INCONSISTENT"))
    _emit(args, payload, lines)
    return 0 if all(r.consistent for r in reports) else 1


def cmd_farkas(args) -> int:
    inst = load_instance(args.instance)
    caps = _caps(args)
    c = _parse_objective(args.c, inst.dim)
    s = parse_rat(args.s)
    rep = farkas_check(inst, args.variant, c, s, caps)
    lines = [f"farkas {rep.variant} at c=({', '.join(rat_str(v) for v in c)}), "
             f"s={rat_str(s)}",
             f"  alpha (primal bound): {rep.alpha}",
             f"  beta (certificate side): {rep.beta}",
             f"  expected equivalent: {rep.expected_equivalent}",
             f"  consistent: {rep.consistent}"]
    _emit(args, rep.to_json(), lines)
    return 0 if rep.consistent else 1


def cmd_slater(args) -> int:
    inst = load_instance(args.instance)
    rep = slater_check(inst, args.cond, _caps(args))
    lines = [f"slater {rep.cond}: {'holds' if rep.holds else 'fails'}"]
    for label, data in rep.witnesses:
        if data is not None:
            lines.append(f"  {label}: x = (" + ", ".join(rat_str(v) for v in data) + ")")
    for label, data in rep.failures:
        lines.append(f"  fails at {label}")
    _emit(args, rep.to_json(), lines)
    return 0


def cmd_gen(args) -> int:
    inst = gen_random(args.seed, force_feasible=args.force_feasible)
    save_instance(inst, args.out)
    print(f"wrote {args.out} (dim={inst.dim}, |T|={len(inst.index)})")
    return 0


def cmd_report(args) -> int:
    inst = load_instance(args.instance)
    caps = _caps(args)
    objectives = default_objectives(inst, 4)
    if args.c:
        objectives = [_parse_objective(args.c, inst.dim)] + objectives[:3]
    lines = ["# Robust LP duality dossier", ""]
    lines.append(f"dim = {inst.dim}, |T| = {len(inst.index)}, "
                 f"points = {sum(len(inst.sets[t].points) for t in inst.index)}")
    lines.append("")
    lines.append("## Cones")
    lines.append("")
    lines.append("| variant | pieces | verdict |")
    lines.append("|---|---|---|")
    payload = {"schema": "robustlip.report/1", "cones": {}, "objectives": [],
               "theorems": [], "slater": {}, "hypothesis": None}
    for name in ("N1", "N2", "N3", "N6"):
        cone = build_cone(inst, name, caps)
        verdict = union_convex_decide(cone, caps)
        payload["cones"][name] = {"pieces": len(cone.pieces), "verdict": verdict.tag}
        lines.append(f"| {name} | {len(cone.pieces)} | {verdict.tag} |")
    lines.append("")
    lines.append("## Duals and diagram")
    lines.append("")
    lines.append("| c | primal | " + " | ".join(f"RLID{k}" for k in K_RANGE) +
                 " | edges |")
    lines.append("|" + "---|" * 12)
    ok = True
    for c in objectives:
        rep = diagram_check(inst, c, caps)
        ok = ok and rep.all_pass
        payload["objectives"].append(rep.to_json())
        lines.append("| (" + ", ".join(rat_str(v) for v in c) + f") | {rep.primal} | "
                     + " | ".join(str(rep.duals[k].value) for k in K_RANGE)
                     + f" | {'pass' if rep.all_pass else 'FAIL'} |")
    lines.append("")
    lines.append("## Theorems")
    lines.append("")
    variants = [1, 2, 3, 6, 7]
    if inst.all_singleton():
        variants += ["E1", "E2", "E3"]
    for v in variants:
        rep = theorem_check(inst, v, default_objectives(inst, args.c_samples), caps)
        ok = ok and rep.consistent
        payload["theorems"].append(rep.to_json())
        lines.append(f"- {rep.theorem_id} ({rep.variant}): {rep.verdict.tag}, "
                     f"consistent: {rep.consistent}")
    lines.append("")
    lines.append("## Slater conditions")
    lines.append("")
    for cond in SLATER_CONDS:
        rep = slater_check(inst, cond, caps)
        payload["slater"][cond] = rep.to_json()
        lines.append(f"- ({cond}): {'holds' if rep.holds else 'fails'}")
    lines.append("")
    lines.append("## Hypothesis report")
    lines.append("")
    hrep = hypothesis_report(inst, caps)
    ok = ok and hrep.consistent
    payload["hypothesis"] = hrep.to_json()
    for row in hrep.rows:
        lines.append(f"- {row.hypothesis}: {row.status}"
                     + (f" [{row.verdict}]" if row.verdict else ""))
    lines.append("")
    lines.append(f"overall consistency: {'PASS' if ok else 'FAIL'}")
    _emit(args, payload, lines)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rlip",
        description="Exact robust linear semi-infinite programming duality workbench")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit JSON")
    common.add_argument("--selection-cap", type=int, default=None,
                        help="cap on selection enumeration (default 4096; "
                             "ROBUST_LIP_CAP overrides)")
    common.add_argument("--piece-cap", type=int, default=None,
                        help=f"cap on pieces in convexity checks (default {DEFAULT_PIECE_CAP})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="primal value and optimizer")
    p.add_argument("--instance", required=True)
    p.add_argument("--c", required=True, help='objective, e.g. "-1,2/3"')
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("duals", parents=[common], help="dual values and certificates")
    p.add_argument("--instance", required=True)
    p.add_argument("--c", required=True)
    p.add_argument("--k", default="all", choices=[str(k) for k in K_RANGE] + ["all"])
    p.add_argument("--route", default="cone", choices=["cone", "direct", "both"])
    p.set_defaults(func=cmd_duals)

    p = sub.add_parser("cones", parents=[common], help="cone dump and verdicts")
    p.add_argument("--instance", required=True)
    p.add_argument("--variant", required=True, choices=list(VARIANTS))
    p.add_argument("--check", choices=["convexity", "containment"])
    p.add_argument("--other", choices=list(VARIANTS))
    p.set_defaults(func=cmd_cones)

    p = sub.add_parser("verify", parents=[common], help="theorem verification")
    p.add_argument("--instance", required=True)
    p.add_argument("--theorem", required=True, choices=list(_THEOREM_CHOICES))
    p.add_argument("--c-samples", type=int, default=16)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("farkas", parents=[common], help="Farkas-type equivalences")
    p.add_argument("--instance", required=True)
    p.add_argument("--variant", required=True, choices=list(FARKAS_VARIANTS))
    p.add_argument("--c", required=True)
    p.add_argument("--s", required=True)
    p.set_defaults(func=cmd_farkas)

    p = sub.add_parser("slater", parents=[common], help="Slater-type conditions")
    p.add_argument("--instance", required=True)
    p.add_argument("--cond", required=True, choices=list(SLATER_CONDS))
    p.set_defaults(func=cmd_slater)

    p = sub.add_parser("gen", parents=[common], help="random instance generation")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--force-feasible", action="store_true")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("report", parents=[common], help="full markdown dossier")
    p.add_argument("--instance", required=True)
    p.add_argument("--c", help="extra objective to include")
    p.add_argument("--c-samples", type=int, default=16)
    p.set_defaults(func=cmd_report)
    return parser


def _join_value_flags(argv):
    """Let --c and --s take leading-dash values given as separate tokens."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in ("--c", "--s"):
            try:
                out.append(f"{tok}={next(it)}")
            except StopIteration:
                out.append(tok)
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = parser.parse_args(_join_value_flags(argv))
    try:
        return args.func(args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
