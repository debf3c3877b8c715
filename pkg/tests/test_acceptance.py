"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line with its runtime.  Run
directly (``python3 tests/test_acceptance.py``) for just the summary lines.
"""
import sys
import time
from fractions import Fraction as F
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oebp import adversary as A  # noqa: E402
from oebp.bounds import (  # noqa: E402
    WeightFn,
    check_alg_bin_weights,
    check_opt_bin_weights,
    min_poc_bound,
    r1,
    r2,
)
from oebp.core import Variant, packing_valid, t_of_beta  # noqa: E402
from oebp.exact import identical_optimum, items_per_bin, naive_optimal, optimal_packing, optimum  # noqa: E402
from oebp.experiments import random_clustered_instance, random_instance, run_batched, run_clustered  # noqa: E402
from oebp.greedy import WfRule, bins_of, first_fit, next_fit, nfd, run, worst_fit  # noqa: E402
from oebp.core import DomainError  # noqa: E402

MAX, MIN = Variant.MAX, Variant.MIN
BETAS = [F(1, 4), F(1, 3), F(9, 20), F(1, 2), F(1)]


def check(cond, message):
    if not cond:
        raise AssertionError(message)


# -- criteria --------------------------------------------------------------------

def c01_ffd_general():
    case = A.gen_ffd_lower(100)
    bins = bins_of("ffd", case.instance)
    ratio = F(bins, len(case.certificate))
    check(packing_valid(case.certificate, case.instance), "certificate invalid")
    check((bins, len(case.certificate)) == (298, 200), f"FFD {bins}, certificate {len(case.certificate)}")
    check(ratio == F(149, 100), f"ratio {ratio}")
    return f"FFD 298 / certificate 200 = {ratio}", 1


def c02_nfd_parametric():
    got = []
    for t in range(4):
        N = 5
        case = A.gen_nfd_lower(t, N)
        bins = bins_of("nfd", case.instance)
        check(bins == N + (t + 1) * N - 1, f"t={t}: NFD {bins}")
        check(packing_valid(case.certificate, case.instance), f"t={t}: certificate invalid")
        got.append(bins)
    return f"NFD bins {got}", 1


def c03_ff_parametric():
    parts, N, worst = [], 50, 0.0
    for beta in (F(1, 4), F(1, 3), F(9, 20), F(1, 2)):
        start = time.perf_counter()
        case = A.gen_ff_lower(beta, N)
        bins = bins_of("ff", case.instance)
        check(packing_valid(case.certificate, case.instance), f"beta={beta}: certificate invalid")
        ratio = F(bins, len(case.certificate))
        check(ratio >= r1(beta) - F(1, N), f"beta={beta}: ratio {ratio} < r1 - 1/N")
        worst = max(worst, time.perf_counter() - start)
        parts.append(f"{beta}:{ratio}")
    check(worst < 5, f"slowest point {worst:.2f}s")
    return "ratios " + " ".join(parts), 20


def c04_nf_wf_trace():
    beta, N = F(3, 4), 10
    case = A.gen_nf_lower(beta, N, 40)
    inst = case.instance
    nf = next_fit(inst)[0]
    wf1 = worst_fit(inst, WfRule.MIN_TOTAL)[0]
    wf2 = worst_fit(inst, WfRule.MIN_TOTAL_EXCL_MAX)[0]
    check(len(nf) == len(wf1) == len(wf2) == 10, f"bins {len(nf)}, {len(wf1)}, {len(wf2)}")
    check(nf == wf1 == wf2, "packings differ")
    cap = int(N / (1 + beta)) + 2
    check(packing_valid(case.certificate, inst), "certificate invalid")
    check(len(case.certificate) <= cap, f"certificate {len(case.certificate)} > {cap}")
    return f"NF = WF = 10 bins, certificate {len(case.certificate)} <= {cap}", 1


def c05_af():
    got = []
    for t in (0, 1, 2):
        N, M = 2, 5
        case = A.gen_af_lower(t, N, M)
        bins = bins_of("ff", case.instance)
        check(bins == (t + 2) * N * M - (t + 1) * N, f"t={t}: FF {bins}")
        got.append(bins)
    return f"FF bins {got}", 1


def c06_poc():
    case = A.gen_poc_lower(10)
    inst = case.instance
    costs = {}
    for label, sub in inst.clusters().items():
        if len(sub.items) <= 16:
            res = optimal_packing(sub)
            check(res.proven_optimal, f"cluster {label} unproven")
            costs[label] = res.bins
        else:
            costs[label] = identical_optimum(len(sub.items), sub.items[0].size)
    total = sum(costs.values())
    report = run_clustered(inst, "exact", case.certificate)
    check(report.sum_clustered == total == 290, f"sum {report.sum_clustered} / {total}")
    check(report.global_cost == 110 and report.global_proven, f"global {report.global_cost}")
    check(report.ratio == F(29, 11), f"ratio {report.ratio}")
    return f"sum 290 / global 110 = {report.ratio}", 10


def c07_poc_parametric():
    M, parts = 20, []
    for beta in (F(1, 2), F(3, 8), F(1, 4)):
        t = t_of_beta(beta)
        case = A.gen_poc_param_lower(beta, M, 1)
        report = run_clustered(case.instance, "exact", case.certificate)
        formula = F(2 * (t + 3) * M - 2 * (t + 1), (t + 2) * (M + 1))
        check(report.sum_clustered == case.claimed_alg_bins, f"beta={beta}: claim mismatch")
        check(report.ratio == formula, f"beta={beta}: {report.ratio} != {formula}")
        parts.append(f"{beta}:{report.ratio}")
    for beta in (F(9, 20), F(3, 5), F(7, 10)):
        t = t_of_beta(beta)
        case = A.gen_poc_param_lower(beta, M, 2)
        report = run_clustered(case.instance, "exact", case.certificate)
        p = case.params
        residue = M + 1 + p["r"]
        count = 2 * (M + p["q"]) + (-(-residue // items_per_bin(F(1, M))) - 2)
        exact = F(count, (t + 1) * M)
        check(report.sum_clustered == count, f"beta={beta}: clustered {report.sum_clustered} != {count}")
        check(report.ratio == exact, f"beta={beta}: ratio {report.ratio}")
        lower, limit = A.poc_param_finite_bound(beta, M), 2 + 2 * t * beta / (t + 1)
        check(lower <= report.ratio < limit, f"beta={beta}: {report.ratio} outside [{lower}, {limit})")
        parts.append(f"{beta}:{report.ratio}")
    return "ratios " + " ".join(parts), 10


def c08_min_poc():
    case = A.gen_min_poc_lower(10)
    inst = case.instance
    for label, sub in inst.clusters().items():
        check(len(naive_optimal(sub)) == 2, f"cluster {label} optimum is not 2")
    report = run_clustered(inst, "exact", case.certificate)
    for kind, kw, alg, cert in (("reciprocal", {"t": 2}, 40, 23), ("complement", {"k": 5}, 120, 64)):
        c = A.gen_min_poc_param_lower(kind, 5, **kw)
        one = next(iter(c.instance.clusters().values()))
        check(len(naive_optimal(one)) == 2, f"{kind}: cluster optimum is not 2")
        got = sum(optimum(s) for s in c.instance.clusters().values())
        check((got, len(c.certificate)) == (alg, cert), f"{kind}: {got} / {len(c.certificate)}")
        check(packing_valid(c.certificate, c.instance), f"{kind}: certificate invalid")
    check(report.sum_clustered == 40, f"clustered {report.sum_clustered}")
    # A bin holding a large item holds one other item at most, so the global
    # optimum is the best split of the larges into pairs and (large, small) bins.
    larges, smalls, cap = 2 * 10, 4 * 2 * 10, items_per_bin(F(2, 100))
    global_opt = min(p + (larges - 2 * p) + -(-max(0, smalls - (larges - 2 * p)) // cap)
                     for p in range(larges // 2 + 1))
    check(global_opt == len(case.certificate), f"certificate {len(case.certificate)} not optimal")
    check(report.global_cost == 11,
          f"global optimum is {global_opt}, not 11: the smalls total 16/N and do not fit one "
          f"bin (ratio {report.ratio} != 40/11)")
    return f"clustered 40 / global {report.global_cost}; parametric counts 40/23 and 120/64", 5


def c09_property_suites():
    counts = dict(unclustered=0, clustered=0, batched=0)

    def greedy_checks(inst):
        opt = optimum(inst)
        beta, t = inst.beta, t_of_beta(inst.beta)
        for name in ("nf", "wf", "ff", "nfd", "ffd"):
            check(bins_of(name, inst) >= opt, f"{name} beat OPT on {inst.sizes}")
        if inst.variant is MAX:
            ff = bins_of("ff", inst)
            check(ff <= r1(beta) * opt + 3, f"FF r1 bound {inst.sizes}")
            check(ff <= (1 + beta) * opt + 1, f"FF (1+beta) bound {inst.sizes}")
        check(bins_of("nfd", inst) <= (1 + F(1, t + 1)) * opt + 2, f"NFD bound {inst.sizes}")
        counts["unclustered"] += 1

    for seed in range(8000):
        variant = MAX if seed < 6000 else MIN
        beta = BETAS[seed % 5]
        g = 2 + (seed * 7) % 39
        try:
            inst = random_instance(1 + seed % 10, beta, g, seed, variant=variant)
        except DomainError:
            g = 40
            inst = random_instance(1 + seed % 10, beta, g, seed, variant=variant)
        greedy_checks(inst)

    for seed in range(2000):
        variant = MAX if seed < 1000 else MIN
        beta = BETAS[seed % 5]
        inst = None
        for k in (2 + seed % 2, 2, 1):
            try:
                inst = random_clustered_instance(k, beta, 2 + (seed * 11) % 39, seed, variant, 10,
                                                 retries=100)
                break
            except DomainError:
                continue
        if inst is None:
            inst = random_clustered_instance(1, beta, 40, seed, variant, 10)
        total = sum(optimum(s) for s in inst.clusters().values())
        opt = optimum(inst)
        if variant is MAX:
            check(total <= 3 * opt, f"clustered 3 OPT bound {inst}")
            check(total <= r2(beta) * opt, f"clustered r2 bound {inst}")
        else:
            check(total <= 4 * opt, f"min clustered 4 OPT bound {inst}")
        counts["clustered"] += 1

    for seed in range(1000):
        beta = BETAS[seed % 5]
        try:
            inst = random_instance(1 + seed % 10, beta, 2 + (seed * 13) % 39, seed,
                                   clustered=1 + seed % 4)
        except DomainError:
            inst = random_instance(1 + seed % 10, beta, 40, seed, clustered=1 + seed % 4)
        report = run_batched(inst)
        ell, t = len(inst.clusters()), t_of_beta(beta)
        check(report.sum_clustered <= 2 * report.global_cost + ell, f"batched 2 OPT + l {inst}")
        if beta < 1:
            check(report.sum_clustered <= (1 + F(1, t + 1)) * report.global_cost + 2 * ell,
                  f"batched parametric bound {inst}")
        counts["batched"] += 1
    n = sum(counts.values())
    check(n >= 10_000, f"only {n} instances")
    return f"{n} instances, zero violations ({counts})", 600


def _generated_cases():
    cases = [A.gen_nf_lower(F(3, 4), 10, 40)]
    cases += [A.gen_af_lower(t, 2, 5) for t in (0, 1, 2)]
    cases += [A.gen_ff_lower(b, 25) for b in (F(1, 4), F(1, 3), F(9, 20), F(1, 2))]
    cases += [A.gen_nfd_lower(t, 5) for t in range(4)]
    cases += [A.gen_ffd_lower(30), A.gen_ffd_param_lower(2, 10), A.gen_ffd_param_lower(3, 8)]
    cases += [A.gen_batched_lower(1, 3), A.gen_batched_lower(0, 4), A.gen_poc_lower(10)]
    cases += [A.gen_poc_param_lower(b, 20, 1) for b in (F(1, 2), F(3, 8), F(1, 4))]
    cases += [A.gen_poc_param_lower(b, 20, 2) for b in (F(9, 20), F(3, 5), F(7, 10))]
    cases += [A.gen_min_poc_lower(10), A.gen_min_poc_param_lower("reciprocal", 5, t=2)]
    cases += [A.gen_min_poc_param_lower("complement", N, k=k) for N, k in ((5, 5), (6, 7))]
    return cases


def c10_weight_checks():
    opt_checks = alg_checks = 0
    for case in _generated_cases():
        inst, cert = case.instance, case.certificate
        beta = inst.beta
        t = t_of_beta(beta)
        if inst.variant is MAX:
            pairs = [(WeightFn("ff_w", beta=beta), r1(beta)),
                     (WeightFn("nfd_w", t=t), 1 + F(1, t + 1)),
                     (WeightFn("ffd_w"), F(3, 2)),
                     (WeightFn("poc_max_w"), F(3, 2))]
            if beta < 1:
                pairs.append((WeightFn("poc_param_w", beta=beta), r2(beta) / 2))
            for fn, cap in pairs:
                rep = check_opt_bin_weights(cert, fn, cap, strict=True)
                check(rep.passed, f"{case.name} {case.params}: {fn.id} over {cap}")
                opt_checks += 1
            ff = check_alg_bin_weights(first_fit(inst)[0], WeightFn("ff_w", beta=beta), 1, 3)
            nd = check_alg_bin_weights(nfd(inst)[0], WeightFn("nfd_w", t=t), 1, 2)
            check(ff.passed, f"{case.name}: FF has {ff.exception_count} light bins")
            check(nd.passed, f"{case.name}: NFD has {nd.exception_count} light bins")
            alg_checks += 2
            if inst.is_clustered:
                fns = [WeightFn("poc_max_w")]
                if beta < 1:
                    fns.append(WeightFn("poc_param_w", beta=beta))
                for sub in inst.clusters().values():
                    for fn in fns:
                        rep = check_alg_bin_weights(run("ff", sub)[0], fn, F(1, 2), 2)
                        check(rep.passed, f"{case.name}: cluster FF packing light under {fn.id}")
                        alg_checks += 1
        elif case.params.get("kind") == "complement":
            k = case.params["k"]
            rep = check_opt_bin_weights(cert, WeightFn("min_poc_w", k=k), F(2 * (k + 1), k + 3),
                                        strict=False)
            check(rep.passed, f"{case.name} k={k}: min_poc_w over cap")
            opt_checks += 1
    return f"{opt_checks} certificate checks, {alg_checks} algorithm checks, zero violations", 60


def c11_oracle_equivalence():
    done = 0
    for seed in range(1000):
        variant = MAX if seed % 2 else MIN
        beta = BETAS[seed % 5]
        try:
            inst = random_instance(1 + seed % 8, beta, 2 + (seed * 17) % 39, seed, variant=variant)
        except DomainError:
            inst = random_instance(1 + seed % 8, beta, 40, seed, variant=variant)
        a, b = optimal_packing(inst).bins, len(naive_optimal(inst))
        check(a == b, f"seed {seed}: branch and bound {a}, enumeration {b}")
        done += 1
    return f"{done} instances, zero discrepancies", 60


def c12_bound_values():
    check((r1(F(1, 2)), r1(F(1, 3)), r1(F(1, 4))) == (F(3, 2), F(4, 3), F(5, 4)), "r1 values")
    check((r2(F(1)), r2(F(0))) == (3, 2), "r2 endpoints")
    for t in range(1, 10):
        b = F(t + 1, t * (t + 2))
        left = 2 + F(2, t + 2)
        check(r2(b) == left and r2(b - F(1, 10**9)) == left, f"r2 continuity at t={t}")
    check(min_poc_bound(F(4, 5)).value == 3 and min_poc_bound(F(1, 3)).value == F(8, 3),
          "min_poc_bound values")
    return "r1, r2 and min_poc_bound values exact", 1


CRITERIA = [c01_ffd_general, c02_nfd_parametric, c03_ff_parametric, c04_nf_wf_trace, c05_af,
            c06_poc, c07_poc_parametric, c08_min_poc, c09_property_suites, c10_weight_checks,
            c11_oracle_equivalence, c12_bound_values]


def evaluate(fn):
    start = time.perf_counter()
    try:
        detail, limit = fn()
        elapsed = time.perf_counter() - start
        ok = elapsed < limit
        if not ok:
            detail += f"; runtime above {limit}s"
    except AssertionError as exc:
        ok, detail = False, str(exc)
        elapsed = time.perf_counter() - start
    number = int(fn.__name__[1:3])
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d} [{elapsed:7.2f}s] {detail}"
    return ok, line


@pytest.mark.parametrize("fn", CRITERIA, ids=[f.__name__ for f in CRITERIA])
def test_criterion(fn, capsys):
    ok, line = evaluate(fn)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(fn) for fn in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
