"""Clustered and batched evaluation, ratio measurement, random instances, sweeps."""
from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import adversary
from .adversary import AdversarialCase
from .bounds import BoundValue, known_bound, min_poc_bound, r2
from .core import (
    Bin,
    DomainError,
    Instance,
    OEBPError,
    Packing,
    Variant,
    bin_valid,
    format_rational,
    packing_valid,
    t_of_beta,
)
from .exact import (
    SolveBudget,
    identical_optimum,
    items_per_bin,
    lower_bound,
    optimal_packing,
)
from .greedy import ffd, first_fit, nfd, run

F = Fraction
MODES = ("exact", "certificate", "greedy-upper")


class ClusterAssumptionError(OEBPError):
    """A cluster fits into a single bin, so the two-bins-per-cluster premise fails."""


class ClaimMismatch(OEBPError):
    """A generator's claimed count disagrees with what was measured."""


@dataclass
class PocReport:
    cluster_costs: dict[int, int]
    global_cost: int
    solver_mode: str
    global_proven: bool = False
    warnings: list[str] = field(default_factory=list)

    @property
    def per_cluster(self) -> list[int]:
        return list(self.cluster_costs.values())

    @property
    def sum_clustered(self) -> int:
        return sum(self.cluster_costs.values())

    @property
    def ratio(self) -> Fraction:
        return F(self.sum_clustered, self.global_cost)

    @property
    def status(self) -> str:
        return "warning" if self.warnings else "ok"

    def to_dict(self) -> dict:
        return {
            "solver_mode": self.solver_mode,
            "per_cluster": {str(c): v for c, v in self.cluster_costs.items()},
            "sum_clustered": self.sum_clustered,
            "global_cost": self.global_cost,
            "global_proven": self.global_proven,
            "ratio": format_rational(self.ratio),
            "status": self.status,
            "warnings": self.warnings,
        }


def _all_same(inst: Instance) -> bool:
    sizes = inst.sizes
    return all(s == sizes[0] for s in sizes)


def _greedy_upper(inst: Instance) -> int:
    # FF for max-OEBP; for min-OEBP the decreasing order behaves better
    return len((first_fit if inst.variant is Variant.MAX else nfd)(inst)[0])


def _exact_cost(inst: Instance, budget: SolveBudget, what: str, warnings: list[str]
                ) -> tuple[int, bool]:
    """Optimum when it can be established, else an upper bound plus a warning."""
    if len(inst.items) <= budget.max_items:
        res = optimal_packing(inst, budget)
        if not res.proven_optimal:
            warnings.append(f"{what}: node limit reached, using incumbent {res.bins}")
        return res.bins, res.proven_optimal
    if _all_same(inst):
        return identical_optimum(len(inst.items), inst.items[0].size), True
    bins = len(ffd(inst)[0])
    if bins == lower_bound(inst):
        return bins, True
    warnings.append(f"{what}: {len(inst.items)} items exceeds the solver budget, "
                    f"using FFD upper bound {bins}")
    return bins, False


def _packing_cost(p: Packing, inst: Instance, what: str) -> int:
    if not packing_valid(p, inst):
        raise DomainError(f"{what}: supplied certificate is not a valid packing")
    return len(p)


def _evaluate(instance: Instance, mode: str, certificate: Packing | None,
              cluster_certificates: dict[int, Packing] | None, budget: SolveBudget | None,
              require_two: bool) -> PocReport:
    if mode not in MODES:
        raise DomainError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")
    if not instance.is_clustered:
        raise DomainError("every item needs a cluster label")
    budget = budget or SolveBudget()
    warnings: list[str] = []
    costs: dict[int, int] = {}
    for label, sub in sorted(instance.clusters().items()):
        what = f"cluster {label}"
        if require_two and bin_valid(Bin(tuple(it.id for it in sub.items), tuple(sub.sizes)),
                                     sub.variant):
            raise ClusterAssumptionError(
                f"{what} fits into a single bin; every cluster must need at least two bins")
        if mode == "exact":
            costs[label], _ = _exact_cost(sub, budget, what, warnings)
        elif mode == "certificate":
            if not cluster_certificates or label not in cluster_certificates:
                raise DomainError(f"{what}: certificate mode needs a per-cluster certificate")
            costs[label] = _packing_cost(cluster_certificates[label], sub, what)
        else:
            costs[label] = _greedy_upper(sub)

    whole = Instance(instance.variant, instance.items, instance.beta)
    proven = False
    if mode == "exact" and (len(whole.items) <= budget.max_items or certificate is None):
        global_cost, proven = _exact_cost(whole, budget, "global", warnings)
    elif certificate is not None:
        global_cost = _packing_cost(certificate, whole, "global")
        proven = global_cost == lower_bound(whole)
    elif mode == "certificate":
        raise DomainError("certificate mode needs a global certificate")
    else:
        global_cost = _greedy_upper(whole)
    return PocReport(costs, global_cost, mode, proven, warnings)


def run_clustered(instance: Instance, mode: str = "exact", certificate: Packing | None = None,
                  cluster_certificates: dict[int, Packing] | None = None,
                  budget: SolveBudget | None = None) -> PocReport:
    """Clustered cost (clusters never share bins) against the global cost.

    A cluster that fits into one bin violates the premise and is rejected;
    this check is exact for any cluster size.  In exact mode clusters beyond
    the solver budget fall back to the identical-size formula, then to an
    FFD bound with a warning.  A supplied global certificate stands in for
    the global optimum when the instance is too large to solve.
    """
    return _evaluate(instance, mode, certificate, cluster_certificates, budget, True)


def run_batched(instance: Instance, mode: str = "exact", certificate: Packing | None = None,
                batch_certificates: dict[int, Packing] | None = None,
                budget: SolveBudget | None = None) -> PocReport:
    """Like :func:`run_clustered` with batch labels and no minimum per batch."""
    return _evaluate(instance, mode, certificate, batch_certificates, budget, False)


# -- ratio measurement ---------------------------------------------------------

@dataclass
class SweepRow:
    beta: Fraction
    algorithm: str
    variant: str
    n: int
    alg_bins: int | None = None
    reference_bins: int | None = None
    theory: BoundValue = field(default_factory=BoundValue.unknown)
    error: str = ""

    @property
    def measured_ratio(self) -> Fraction | None:
        if self.alg_bins is None or not self.reference_bins:
            return None
        return F(self.alg_bins, self.reference_bins)

    def to_dict(self) -> dict:
        ratio = self.measured_ratio
        return {
            "beta": format_rational(self.beta),
            "algorithm": self.algorithm,
            "variant": self.variant,
            "n": self.n,
            "alg_bins": "" if self.alg_bins is None else self.alg_bins,
            "reference_bins": "" if self.reference_bins is None else self.reference_bins,
            "measured_ratio": "" if ratio is None else format_rational(ratio),
            "theory_kind": self.theory.kind,
            "theory_value": self.theory.text(),
            "error": self.error,
        }


CSV_COLUMNS = ("beta", "algorithm", "variant", "n", "alg_bins", "reference_bins",
               "measured_ratio", "theory_kind", "theory_value", "error")


def _theory(algorithm: str, inst: Instance) -> BoundValue:
    if algorithm == "clustered-opt":
        if inst.variant is Variant.MAX:
            return BoundValue.tight(r2(inst.beta))
        return min_poc_bound(inst.beta)
    if algorithm == "batched-opt":
        return BoundValue.unknown()
    return known_bound("wf" if algorithm == "wf-excl" else algorithm, inst.variant, inst.beta)


def measure_ratio(case: AdversarialCase, algorithm: str | None = None,
                  budget: SolveBudget | None = None) -> SweepRow:
    """Run the case's target algorithm and compare with its claims.

    Any disagreement with the claimed algorithm cost or certificate size
    raises :class:`ClaimMismatch`.  ``algorithm`` overrides the target for
    cases that serve several algorithms (the Worst Fit rules share the NF
    construction); the claim is still checked.
    """
    inst = case.instance
    alg = algorithm or case.target_algorithm
    if not packing_valid(case.certificate, inst):
        raise ClaimMismatch(f"{case.name}: certificate packing is invalid")
    if len(case.certificate) != case.claimed_cert_bins:
        raise ClaimMismatch(f"{case.name}: certificate has {len(case.certificate)} bins, "
                            f"claimed {case.claimed_cert_bins}")
    if alg == "clustered-opt":
        got = run_clustered(inst, "exact", case.certificate, budget=budget).sum_clustered
    elif alg == "batched-opt":
        got = run_batched(inst, "exact", case.certificate, budget=budget).sum_clustered
    else:
        got = len(run(alg, inst)[0])
    if got != case.claimed_alg_bins:
        raise ClaimMismatch(f"{case.name}: {alg} used {got} bins, claimed {case.claimed_alg_bins}")
    return SweepRow(inst.beta, alg, inst.variant.value, len(inst.items), got,
                    case.claimed_cert_bins, _theory(alg, inst))


# -- random instances ----------------------------------------------------------
# random.Random (Mersenne Twister) is seeded with an integer, which fixes the
# stream across platforms and Python 3 releases.

def _admissible(beta: Fraction, granularity: int) -> list[Fraction]:
    if granularity < 2:
        raise DomainError(f"granularity must be at least 2, got {granularity}")
    sizes = [F(i, granularity) for i in range(1, granularity + 1) if F(i, granularity) <= beta]
    if not sizes:
        raise DomainError(f"no size i/{granularity} lies in (0, {format_rational(beta)}]")
    return sizes


def random_instance(n: int, beta, granularity: int, seed: int,
                    clustered: int | None = None, variant: Variant | str = Variant.MAX
                    ) -> Instance:
    """n sizes drawn uniformly from {i/g} within (0, beta]; labels uniform if clustered."""
    beta = F(beta)
    sizes = _admissible(beta, granularity)
    rng = random.Random(seed)
    picked = [rng.choice(sizes) for _ in range(n)]
    labels = [rng.randrange(clustered) for _ in range(n)] if clustered else None
    return Instance.from_sizes(picked, variant, beta, labels)


def random_clustered_instance(clusters: int, beta, granularity: int, seed: int,
                              variant: Variant | str = Variant.MAX, max_items: int = 10,
                              retries: int = 1000) -> Instance:
    """Clustered instance in which no cluster fits into a single bin.

    Each cluster draws items until it stops being a valid single bin; a draw
    that exceeds ``max_items`` overall is discarded and resampled.
    """
    beta, variant = F(beta), Variant(variant)
    sizes = _admissible(beta, granularity)
    # the fewest items a cluster can have is one more than a bin holds of the largest size
    fewest = items_per_bin(sizes[-1]) + 1
    if clusters * fewest > max_items:
        raise DomainError(f"{clusters} clusters need at least {clusters * fewest} items, "
                          f"above max_items={max_items}")
    rng = random.Random(seed)
    for _ in range(retries):
        picked, labels = [], []
        for c in range(clusters):
            group: list[Fraction] = []
            total = F(0)
            # a group is a valid single bin while total minus its largest/smallest is below 1
            while not group or total - (max(group) if variant is Variant.MAX else min(group)) < 1:
                s = rng.choice(sizes)
                group.append(s)
                total += s
                if len(picked) + len(group) > max_items:
                    break
            picked += group
            labels += [c] * len(group)
        if len(picked) <= max_items:
            return Instance.from_sizes(picked, variant, beta, labels)
    raise DomainError(f"no clustered instance within {max_items} items after {retries} tries")


# -- sweeps --------------------------------------------------------------------

SWEEP_ALGORITHMS = ("nf", "wf", "af", "ff", "nfd", "ffd", "poc")


def case_for(algorithm: str, beta, N: int, M: int | None = None) -> AdversarialCase:
    """The lower-bound construction that targets ``algorithm`` at ``beta``."""
    beta = F(beta)
    t = t_of_beta(beta)
    if algorithm in ("nf", "wf"):
        if M is None:
            M = max(2 * N + 1, int(1 / beta) + 1)
        return adversary.gen_nf_lower(beta, N, M)
    if algorithm == "af":
        return adversary.gen_af_lower(t, N, M or max(2, t + 1, N))
    if algorithm == "ff":
        return adversary.gen_ff_lower(beta, N)
    if algorithm == "nfd":
        return adversary.gen_nfd_lower(t, N)
    if algorithm == "ffd":
        if beta == 1:
            return adversary.gen_ffd_lower(N)
        if (1 / beta).denominator != 1:
            raise DomainError(f"ffd sweep needs beta = 1 or 1/t, got {format_rational(beta)}")
        return adversary.gen_ffd_param_lower(int(1 / beta), N)
    if algorithm == "poc":
        if beta == 1:
            return adversary.gen_poc_lower(N)
        which = 1 if beta < F(t + 1, t * (t + 2)) else 2
        return adversary.gen_poc_param_lower(beta, M or N, which)
    raise DomainError(f"unknown sweep algorithm {algorithm!r}")


def sweep_beta(algorithm: str, beta_grid, N: int, M: int | None = None,
               budget: SolveBudget | None = None) -> list[SweepRow]:
    rows = []
    for beta in beta_grid:
        beta = F(beta)
        try:
            if not 0 < beta <= 1:
                raise DomainError(f"beta={format_rational(beta)} outside (0, 1]")
            case = case_for(algorithm, beta, N, M)
            row = measure_ratio(case, None if algorithm in ("af", "poc") else algorithm,
                                budget=budget)
            # the grid point may differ from the construction's own beta
            row.beta, row.algorithm = beta, algorithm
            if algorithm == "af":
                row.theory = known_bound("af", Variant.MAX, beta)
        except (OEBPError, AssertionError) as exc:
            row = SweepRow(beta, algorithm, "max", 0, error=str(exc))
        rows.append(row)
    rows.sort(key=lambda r: (r.beta, r.algorithm))
    return rows


def rows_to_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.to_dict())
    return buf.getvalue()


def rows_to_json(rows: list[SweepRow]) -> str:
    return json.dumps([r.to_dict() for r in rows], separators=(",", ":")) + "\n"
