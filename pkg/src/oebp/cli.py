"""Command-line entry point.

Exit codes: 0 success, 2 usage or precondition error, 3 solver budget
exceeded, 4 claim or weight verification failure.  Summary lines are
space-separated ``key=value`` pairs.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import adversary, experiments
from .bounds import WEIGHT_IDS, WeightFn, check_alg_bin_weights, check_opt_bin_weights
from .core import (
    OEBPError,
    dumps,
    format_rational,
    load_instance,
    load_packing,
    parse_rational,
    save_instance,
    save_packing,
)
from .exact import DEFAULT_MAX_ITEMS, BudgetExceeded, SolveBudget, optimal_packing
from .greedy import ALGORITHMS, WfRule, run

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_CLAIM = 0, 2, 3, 4


class ClaimFailure(Exception):
    pass


def _rational(text: str):
    try:
        return parse_rational(text)
    except OEBPError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _grid(text: str):
    return [_rational(p) for p in text.split(",") if p.strip()]


def _params(text: str) -> dict:
    out = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        key, sep, value = part.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected key=value, got {part!r}")
        out[key.strip()] = value.strip()
    return out


def _summary(**fields) -> str:
    return " ".join(f"{k}={v}" for k, v in fields.items())


def _write(path: str | Path, text: str):
    Path(path).write_text(text)


def _claims_path(instance_path: Path) -> Path:
    return instance_path.with_name(instance_path.stem + ".claims.json")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="oebp", description="Open-end bin packing toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="emit a lower-bound construction")
    g.add_argument("case", choices=sorted(adversary.GENERATORS))
    g.add_argument("--beta", type=_rational)
    g.add_argument("--n", type=int)
    g.add_argument("--m", type=int)
    g.add_argument("--t", type=int)
    g.add_argument("--k", type=int)
    g.add_argument("--which", type=int, choices=(1, 2))
    g.add_argument("--kind", choices=("reciprocal", "complement"))
    g.add_argument("--out", help="instance path (default <case>.json)")

    k = sub.add_parser("pack", help="run a greedy algorithm")
    k.add_argument("--alg", required=True, choices=ALGORITHMS)
    k.add_argument("--in", dest="inp", required=True)
    k.add_argument("--wf-rule", default=WfRule.MIN_TOTAL.value, choices=[r.value for r in WfRule])
    k.add_argument("--out")
    k.add_argument("--trace", help="write the per-item decision trace as JSON lines")

    o = sub.add_parser("opt", help="exact optimum by branch and bound")
    o.add_argument("--in", dest="inp", required=True)
    o.add_argument("--max-n", type=int, default=DEFAULT_MAX_ITEMS)
    o.add_argument("--node-limit", type=int)
    o.add_argument("--out")

    for name, text in (("poc", "clustered vs global optimum"),
                       ("batch", "batched vs global optimum")):
        c = sub.add_parser(name, help=text)
        c.add_argument("--in", dest="inp", required=True)
        c.add_argument("--mode", default="exact", choices=experiments.MODES)
        c.add_argument("--claims", help="sidecar with certificates (default <stem>.claims.json)")
        c.add_argument("--max-n", type=int, default=DEFAULT_MAX_ITEMS)
        c.add_argument("--out", help="write the report JSON here")

    s = sub.add_parser("sweep", help="measure lower-bound ratios over a beta grid")
    s.add_argument("--alg", required=True, choices=experiments.SWEEP_ALGORITHMS)
    s.add_argument("--beta-grid", required=True, type=_grid)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int)
    s.add_argument("--out", required=True, help="CSV path")
    s.add_argument("--json", help="also write the rows as JSON")

    v = sub.add_parser("verify", help="check weights of a packing or the claims of a case")
    v.add_argument("--in", dest="inp", required=True)
    v.add_argument("--packing")
    v.add_argument("--claims")
    v.add_argument("--weights", choices=WEIGHT_IDS)
    v.add_argument("--params", type=_params, default={})
    bound = v.add_mutually_exclusive_group()
    bound.add_argument("--cap", type=_rational)
    bound.add_argument("--floor", type=_rational)
    v.add_argument("--non-strict", action="store_true", help="flag only weights above the cap")
    v.add_argument("--exceptions", type=int, default=0)
    return p


def cmd_generate(args) -> int:
    params = {"beta": args.beta, "N": args.n, "M": args.m, "t": args.t, "k": args.k,
              "which": args.which, "kind": args.kind}
    case = adversary.generate(args.case, **params)
    out = Path(args.out or f"{args.case}.json")
    claims = _claims_path(out)
    _write(out, save_instance(case.instance))
    _write(claims, case.claims_json())
    print(_summary(case=case.name, items=len(case.instance.items),
                   claimed_alg_bins=case.claimed_alg_bins,
                   claimed_cert_bins=case.claimed_cert_bins,
                   claimed_ratio=format_rational(case.claimed_ratio),
                   instance=out, claims=claims))
    return EXIT_OK


def cmd_pack(args) -> int:
    inst = load_instance(Path(args.inp).read_text())
    packing, trace = run(args.alg, inst, args.wf_rule)
    if args.out:
        _write(args.out, save_packing(packing))
    if args.trace:
        _write(args.trace, trace.to_jsonl())
    print(_summary(alg=args.alg, bins=len(packing)))
    return EXIT_OK


def cmd_opt(args) -> int:
    inst = load_instance(Path(args.inp).read_text())
    res = optimal_packing(inst, SolveBudget(args.max_n, args.node_limit))
    if args.out:
        _write(args.out, save_packing(res.packing))
    print(_summary(bins=res.bins, status="optimal" if res.proven_optimal else "incumbent",
                   nodes=res.nodes))
    return EXIT_OK


def _load_claims(args, inst):
    path = Path(args.claims) if args.claims else _claims_path(Path(args.inp))
    if not path.exists():
        if args.claims:
            raise OEBPError(f"claims file {path} not found")
        return None
    return adversary.case_from_claims(inst, json.loads(path.read_text()))


def _cmd_grouped(args, fn) -> int:
    inst = load_instance(Path(args.inp).read_text())
    case = _load_claims(args, inst)
    report = fn(inst, args.mode,
                case.certificate if case else None,
                case.cluster_certificates if case else None,
                SolveBudget(args.max_n))
    if args.out:
        _write(args.out, dumps(report.to_dict()))
    print(_summary(sum=report.sum_clustered, global_cost=report.global_cost,
                   ratio=format_rational(report.ratio), mode=report.solver_mode,
                   global_proven=str(report.global_proven).lower(), status=report.status))
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args) -> int:
    rows = experiments.sweep_beta(args.alg, args.beta_grid, args.n, args.m)
    _write(args.out, experiments.rows_to_csv(rows))
    if args.json:
        _write(args.json, experiments.rows_to_json(rows))
    print(_summary(rows=len(rows), errors=sum(1 for r in rows if r.error), out=args.out))
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = load_instance(Path(args.inp).read_text())
    if args.weights is None:
        if not args.claims:
            raise OEBPError("verify needs --weights (with --packing) or --claims")
        case = adversary.case_from_claims(inst, json.loads(Path(args.claims).read_text()))
        try:
            row = experiments.measure_ratio(case)
        except experiments.ClaimMismatch as exc:
            raise ClaimFailure(str(exc)) from None
        print(_summary(case=case.name, alg_bins=row.alg_bins, reference_bins=row.reference_bins,
                       ratio=format_rational(row.measured_ratio), passed="true"))
        return EXIT_OK
    if not args.packing:
        raise OEBPError("--weights needs --packing")
    if (args.cap is None) == (args.floor is None):
        raise OEBPError("exactly one of --cap or --floor is required")
    packing = load_packing(Path(args.packing).read_text(), inst)
    fn = WeightFn.parse(args.weights, args.params)
    if args.cap is not None:
        report = check_opt_bin_weights(packing, fn, args.cap, strict=not args.non_strict)
    else:
        report = check_alg_bin_weights(packing, fn, args.floor, args.exceptions)
    print(dumps(report.to_dict()), end="")
    print(_summary(weights=fn.id, mode=report.mode, flagged=len(report.flagged),
                   passed=str(report.passed).lower()))
    return EXIT_OK if report.passed else EXIT_CLAIM


COMMANDS = {
    "generate": cmd_generate,
    "pack": cmd_pack,
    "opt": cmd_opt,
    "poc": lambda a: _cmd_grouped(a, experiments.run_clustered),
    "batch": lambda a: _cmd_grouped(a, experiments.run_batched),
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ClaimFailure, experiments.ClaimMismatch) as exc:
        print(f"claim failed: {exc}", file=sys.stderr)
        return EXIT_CLAIM
    except experiments.ClusterAssumptionError as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OEBPError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
