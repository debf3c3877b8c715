"""Lower-bound constructions.

Each generator returns the instance in its adversarial arrival order, an
explicit certificate packing, and the bin counts the construction claims.
Certificates are checked for validity here; algorithm costs are not, so
tests can compare the claim against an actual run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .core import (
    ONE,
    DomainError,
    Instance,
    Item,
    Packing,
    Variant,
    dumps,
    format_rational,
    packing_valid,
    t_of_beta,
)
from .exact import items_per_bin

F = Fraction


class PreconditionError(DomainError):
    """Generator parameters violate the construction's requirements."""


def _require(cond: bool, message: str):
    if not cond:
        raise PreconditionError(message)


@dataclass(frozen=True)
class AdversarialCase:
    name: str
    instance: Instance
    certificate: Packing
    claimed_alg_bins: int
    claimed_cert_bins: int
    target_algorithm: str
    asymptotic_ratio: Fraction | None = None
    params: dict = field(default_factory=dict)
    cluster_certificates: dict[int, Packing] | None = None

    @property
    def claimed_ratio(self) -> Fraction:
        return F(self.claimed_alg_bins, self.claimed_cert_bins)

    @property
    def clustered(self) -> bool:
        return self.cluster_certificates is not None

    def claims_dict(self) -> dict:
        out = {
            "case": self.name,
            "params": {k: format_rational(v) if isinstance(v, F) else v
                       for k, v in self.params.items()},
            "target_algorithm": self.target_algorithm,
            "claimed_alg_bins": self.claimed_alg_bins,
            "claimed_cert_bins": self.claimed_cert_bins,
            "claimed_ratio": format_rational(self.claimed_ratio),
            "certificate": {"bins": self.certificate.ids()},
        }
        if self.asymptotic_ratio is not None:
            out["asymptotic_ratio"] = format_rational(self.asymptotic_ratio)
        if self.cluster_certificates is not None:
            out["cluster_certificates"] = {
                str(c): {"bins": p.ids()} for c, p in self.cluster_certificates.items()
            }
        return out

    def claims_json(self) -> str:
        return dumps(self.claims_dict())


class _Builder:
    """Accumulates items in arrival order and hands back their ids."""

    def __init__(self):
        self.items: list[Item] = []

    def add(self, size, count: int = 1, cluster: int | None = None) -> list[int]:
        start = len(self.items)
        size = F(size)
        self.items.extend(Item(start + i, size, cluster) for i in range(count))
        return list(range(start, start + count))

    def instance(self, variant: Variant, beta) -> Instance:
        return Instance(variant, tuple(self.items), F(beta))


def _chunks(ids: list[int], size: int) -> list[list[int]]:
    return [ids[i:i + size] for i in range(0, len(ids), size)]


def _case(name, inst: Instance, groups, alg_bins: int, target: str, asymptotic=None,
          params=None, cluster_groups: dict[int, list[list[int]]] | None = None
          ) -> AdversarialCase:
    cert = Packing.from_ids(inst, [g for g in groups if g])
    if not packing_valid(cert, inst):
        raise AssertionError(f"{name}: certificate packing is invalid")
    cluster_certs = None
    if cluster_groups is not None:
        subs = inst.clusters()
        cluster_certs = {}
        for c, gs in cluster_groups.items():
            p = Packing.from_ids(subs[c], gs)
            if not packing_valid(p, subs[c]):
                raise AssertionError(f"{name}: certificate for cluster {c} is invalid")
            cluster_certs[c] = p
    return AdversarialCase(name, inst, cert, alg_bins, len(cert), target,
                           None if asymptotic is None else F(asymptotic),
                           dict(params or {}), cluster_certs)


def _int(value, name: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or int(value) != value:
        raise PreconditionError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise PreconditionError(f"{name} must be at least {minimum}, got {value}")
    return value


def _beta_lt_one(beta) -> Fraction:
    beta = F(beta)
    _require(0 < beta < 1, f"beta must lie in (0, 1), got {format_rational(beta)}")
    return beta


# -- greedy lower bounds -------------------------------------------------------

def gen_nf_lower(beta, N: int, M: int) -> AdversarialCase:
    """Large items of size beta, each followed by M+1 items of (1-beta)/M."""
    beta = _beta_lt_one(beta)
    N, M = _int(N, "N", 1), _int(M, "M", 1)
    _require(M > 2 * N, f"M > 2N is required (M={M}, N={N})")
    _require(M > 1 / beta, f"M > 1/beta is required (M={M}, 1/beta={format_rational(1 / beta)})")
    pairs = math.floor(beta * N / (1 + beta))
    _require(pairs >= 1, f"N={N} is too small: floor(beta*N/(1+beta)) must be positive")
    eps = (1 - beta) / M
    b = _Builder()
    large, small = [], []
    for _ in range(N):
        large += b.add(beta)
        small += b.add(eps, M + 1)
    inst = b.instance(Variant.MAX, beta)

    groups = [large[2 * i:2 * i + 2] for i in range(pairs)]
    groups += [[x] for x in large[2 * pairs:]]
    single_cap = math.ceil(M / (1 - beta)) - 1
    pos = 0
    for g in groups:
        take = M - 1 if len(g) == 2 else single_cap
        g += small[pos:pos + take]
        pos += take
    groups.append(small[pos:])
    return _case("nf-lower", inst, groups, N, "nf", 1 + beta,
                 {"beta": beta, "N": N, "M": M})


def gen_af_lower(t: int, N: int, M: int) -> AdversarialCase:
    """All items of size 1/M, then the items of size 1/(t+1)."""
    t, N, M = _int(t, "t", 0), _int(N, "N", 1), _int(M, "M", 2)
    _require(M >= t + 1, f"M >= t+1 is required so small items are not larger (M={M}, t={t})")
    b = _Builder()
    small = b.add(F(1, M), (t + 1) * N * M * (M - 1))
    large = b.add(F(1, t + 1), (t + 1) * N * M)
    inst = b.instance(Variant.MAX, F(1, t + 1))
    groups = [[x] + s for x, s in zip(large, _chunks(small, M - 1))]
    return _case("af-lower", inst, groups, (t + 2) * N * M - (t + 1) * N, "ff",
                 F(t + 2, t + 1), {"t": t, "N": N, "M": M})


def ff_gamma(beta) -> Fraction:
    beta = F(beta)
    t = t_of_beta(beta)
    if t % 2:
        return (2 - (t - 1) * beta) / (t + 3)
    return (2 - t * beta) / (t + 2)


def gen_ff_lower(beta, N: int) -> AdversarialCase:
    """Tiny items first, then 2N batches of beta-items followed by gamma-items."""
    beta = _beta_lt_one(beta)
    N = _int(N, "N", 1)
    t = t_of_beta(beta)
    _require(N > t * t, f"N > t^2 is required (N={N}, t={t})")
    gamma = ff_gamma(beta)
    delta = F(1, N)
    _require(delta <= gamma, f"N={N} too small: 1/N must not exceed gamma={format_rational(gamma)}")
    k = math.ceil(N * (1 - gamma)) - 1
    b = _Builder()
    if t % 2:
        tiny = b.add(delta, k * N * (t + 1))
        per_beta = per_gamma = (t + 1) // 2
        alg = k * (t + 1) + 2 * N
    else:
        tiny = b.add(delta, k * N * t + 2 * N * (N - 1))
        per_beta, per_gamma = (t + 2) // 2, t // 2
        alg = k * t + 4 * N - 2
    betas, gammas = [], []
    for _ in range(2 * N):
        betas += b.add(beta, per_beta)
        gammas += b.add(gamma, per_gamma)
    inst = b.instance(Variant.MAX, beta)

    mixed = len(gammas)
    groups = [[betas[i], gammas[i]] + tiny[i * k:(i + 1) * k] for i in range(mixed)]
    rest = tiny[mixed * k:]
    for i, chunk in enumerate(_chunks(rest, N - 1)):
        groups.append([betas[mixed + i]] + chunk)
    return _case("ff-lower", inst, groups, alg, "ff", None,
                 {"beta": beta, "N": N, "t": t, "gamma": gamma, "k": k})


def gen_nfd_lower(t: int, N: int) -> AdversarialCase:
    t, N = _int(t, "t", 0), _int(N, "N", 2)
    m = N * (t + 1)
    b = _Builder()
    large = b.add(F(1, t + 1), m)
    small = b.add(F(1, m), m * (m - 1))
    inst = b.instance(Variant.MAX, F(1, t + 1))
    groups = [[x] + s for x, s in zip(large, _chunks(small, m - 1))]
    return _case("nfd-lower", inst, groups, N + (t + 1) * N - 1, "nfd",
                 1 + F(1, t + 1), {"t": t, "N": N})


def gen_ffd_lower(N: int) -> AdversarialCase:
    N = _int(N, "N")
    _require(N > 10, f"N > 10 is required, got {N}")
    b = _Builder()
    large = b.add(1 - F(1, N), 2 * N)
    small = b.add(F(1, N), 2 * N * (N - 1))
    inst = b.instance(Variant.MAX, ONE)
    groups = [[x] + s for x, s in zip(large, _chunks(small, N - 1))]
    return _case("ffd-lower", inst, groups, 3 * N - 2, "ffd", F(3, 2), {"N": N})


def gen_ffd_param_lower(t: int, N: int) -> AdversarialCase:
    t, N = _int(t, "t", 1), _int(N, "N", 2)
    _require(N > t, f"N > t is required so that 1/N fits below beta = 1/t (N={N}, t={t})")
    b = _Builder()
    large = b.add(F(1, t) - F(1, t * N), (t + 1) * N)
    small = b.add(F(1, N), N * (N - 1) * (t + 1))
    inst = b.instance(Variant.MAX, F(1, t))
    groups = [[x] + s for x, s in zip(large, _chunks(small, N - 1))]
    return _case("ffd-param-lower", inst, groups, N + (N - 1) * (t + 1), "ffd",
                 F(t + 2, t + 1), {"t": t, "N": N})


def gen_batched_lower(t: int, N: int) -> AdversarialCase:
    """Two batches: one of 1/(t+1) items, one of 1/N items.  Batch labels are cluster labels."""
    t, N = _int(t, "t", 0), _int(N, "N", 2)
    _require(N >= t + 1, f"N >= t+1 is required (N={N}, t={t})")
    b = _Builder()
    large = b.add(F(1, t + 1), N * N * (t + 1), cluster=0)
    small = b.add(F(1, N), N * N * (N - 1) * (t + 1), cluster=1)
    inst = b.instance(Variant.MAX, F(1, t + 1))
    groups = [[x] + s for x, s in zip(large, _chunks(small, N - 1))]
    per_batch = {0: _chunks(large, t + 1), 1: _chunks(small, N)}
    return _case("batched-lower", inst, groups, N * N + N * (N - 1) * (t + 1), "batched-opt",
                 1 + F(1, t + 1), {"t": t, "N": N}, per_batch)


# -- price of clustering -------------------------------------------------------

def gen_poc_lower(N: int) -> AdversarialCase:
    N = _int(N, "N")
    _require(N > 2, f"N > 2 is required, got {N}")
    b = _Builder()
    ones = b.add(ONE, N * (N + 1), cluster=0)
    per_cluster = {0: [[x] for x in ones]}
    small = []
    for c in range(1, N * (N - 1) + 1):
        ids = b.add(F(1, N), N + 1, cluster=c)
        small += ids
        per_cluster[c] = [ids[:N], ids[N:]]
    inst = b.instance(Variant.MAX, ONE)
    groups = [[x] + s for x, s in zip(ones, _chunks(small, N - 1))]
    return _case("poc-lower", inst, groups, 3 * N * N - N, "clustered-opt", F(3),
                 {"N": N}, per_cluster)


def gen_poc_param_lower(beta, M: int, which: int) -> AdversarialCase:
    beta = _beta_lt_one(beta)
    M = _int(M, "M")
    t = t_of_beta(beta)
    b = _Builder()
    per_cluster: dict[int, list[list[int]]] = {}
    if which == 1:
        _require(M >= max(2, t + 1), f"M >= max(2, t+1) is required (M={M}, t={t})")
        smalls, larges = [], []
        c = 0
        for _ in range((t + 2) * (M - 1)):
            ids = b.add(F(1, M), M + 1, cluster=c)
            per_cluster[c] = [ids[:M], ids[M:]]
            smalls += ids
            c += 1
        for _ in range(M + 1):
            ids = b.add(F(1, t + 1), t + 2, cluster=c)
            per_cluster[c] = [ids[:t + 1], ids[t + 1:]]
            larges += ids
            c += 1
        inst = b.instance(Variant.MAX, beta)
        groups = [[x] + s for x, s in zip(larges, _chunks(smalls, M - 1))]
        return _case("poc-param-lower", inst, groups, 2 * (t + 3) * M - 2 * (t + 1),
                     "clustered-opt", F(2 * (t + 3), t + 2),
                     {"beta": beta, "M": M, "which": 1, "t": t}, per_cluster)
    if which != 2:
        raise PreconditionError(f"which must be 1 or 2, got {which!r}")
    _require(M > 3, f"M > 3 is required, got {M}")
    _require(F(1, M) <= beta, f"1/M <= beta is required (M={M})")
    s = math.ceil(M * (1 - t * beta))
    rem = (t + 1) * (M * M - M) - M * s
    _require(rem >= M + 1, f"M={M} leaves too few small items for a small-only cluster")
    q, r = divmod(rem, M + 1)
    cap = items_per_bin(F(1, M))
    larges, smalls = [], []
    for c in range(M):
        big = b.add(beta, t + 1, cluster=c)
        little = b.add(F(1, M), s, cluster=c)
        per_cluster[c] = [big, little]
        larges += big
        smalls += little
    for j in range(q):
        c = M + j
        ids = b.add(F(1, M), M + 1 + (r if j == 0 else 0), cluster=c)
        per_cluster[c] = _chunks(ids, cap)
        smalls += ids
    inst = b.instance(Variant.MAX, beta)
    clustered = sum(len(g) for g in per_cluster.values())
    groups = [[x] + chunk for x, chunk in zip(larges, _chunks(smalls, M - 1))]
    return _case("poc-param-lower", inst, groups, clustered, "clustered-opt",
                 2 + 2 * t * beta / (t + 1),
                 {"beta": beta, "M": M, "which": 2, "t": t, "s": s, "q": q, "r": r},
                 per_cluster)


def poc_param_finite_bound(beta, M: int) -> Fraction:
    """Finite-M lower bound on the clustered/global ratio of the second construction."""
    beta = F(beta)
    t = t_of_beta(beta)
    clustered = F(2 * (M * M * (1 + t * (1 + beta)) - M * (t + 2) - 1), M + 1)
    return clustered / ((t + 1) * M)


def gen_min_poc_lower(N: int) -> AdversarialCase:
    """2N clusters of one item 1 - 1/N^2 surrounded by four items of 2/N^2.

    The certificate pairs the large items and packs the small items as densely
    as min-OEBP allows, so its bin count is reported as built.
    """
    N = _int(N, "N", 2)
    # at N = 2 three small items already reach total - min = 1, so a cluster needs three bins
    _require(N >= 3, f"N >= 3 is required for two bins per cluster, got {N}")
    small_size, large_size = F(2, N * N), 1 - F(1, N * N)
    b = _Builder()
    per_cluster = {}
    larges, smalls = [], []
    for c in range(2 * N):
        s1 = b.add(small_size, 2, cluster=c)
        big = b.add(large_size, 1, cluster=c)
        s2 = b.add(small_size, 2, cluster=c)
        per_cluster[c] = [big + s1[:1], s1[1:] + s2]
        larges += big
        smalls += s1 + s2
    inst = b.instance(Variant.MIN, ONE)
    groups = _chunks(larges, 2) + _chunks(smalls, items_per_bin(small_size))
    return _case("min-poc-lower", inst, groups, 4 * N, "clustered-opt", F(4), {"N": N},
                 per_cluster)


def gen_min_poc_param_lower(kind: str, N: int, t: int | None = None, k: int | None = None
                            ) -> AdversarialCase:
    N = _int(N, "N", 2)
    b = _Builder()
    per_cluster = {}
    if kind == "reciprocal":
        t = _int(t, "t", 1)
        _require(N * (t + 2) > (t + 1) * (t + 3),
                 f"N > (t+1)(t+3)/(t+2) is required so small items are the smallest (N={N}, t={t})")
        large = F(1, t + 1) - F(1, (t + 2) * N)
        larges, smalls = [], []
        for c in range((t + 2) * N):
            big = b.add(large, t + 1, cluster=c)
            little = b.add(F(1, N), 2, cluster=c)
            per_cluster[c] = [big, little]
            larges += big
            smalls += little
        inst = b.instance(Variant.MIN, F(1, t + 1))
        groups = _chunks(larges, t + 2) + _chunks(smalls, N)
        return _case("min-poc-param-lower", inst, groups, 2 * (t + 2) * N, "clustered-opt",
                     F(2 * (t + 2), t + 1), {"kind": kind, "t": t, "N": N}, per_cluster)
    if kind != "complement":
        raise PreconditionError(f"kind must be 'reciprocal' or 'complement', got {kind!r}")
    k = _int(k, "k", 5)
    _require(2 * N > k, f"2N > k is required for a positive medium size (N={N}, k={k})")
    beta = 1 - F(1, k)
    medium = F(1, k) - F(1, 2 * N)
    larges, mediums, smalls = [], [], []
    for c in range(2 * (k + 1) * N):
        big = b.add(beta, 1, cluster=c)
        mid = b.add(medium, 1, cluster=c)
        little = b.add(F(1, N), 2, cluster=c)
        per_cluster[c] = [big, mid + little]
        larges += big
        mediums += mid
        smalls += little
    inst = b.instance(Variant.MIN, beta)
    groups = _chunks(larges, 2) + _chunks(mediums, k + 1) + _chunks(smalls, N)
    return _case("min-poc-param-lower", inst, groups, 4 * (k + 1) * N, "clustered-opt",
                 F(4 * (k + 1), k + 3), {"kind": kind, "k": k, "N": N}, per_cluster)


# -- registry ------------------------------------------------------------------

def _min_poc_param(N, t=None, k=None, kind=None):
    if kind is None:
        kind = "complement" if k is not None else "reciprocal"
    return gen_min_poc_param_lower(kind, N, t=t, k=k)


GENERATORS = {
    "nf-lower": (gen_nf_lower, ("beta", "N", "M")),
    "af-lower": (gen_af_lower, ("t", "N", "M")),
    "ff-lower": (gen_ff_lower, ("beta", "N")),
    "nfd-lower": (gen_nfd_lower, ("t", "N")),
    "ffd-lower": (gen_ffd_lower, ("N",)),
    "ffd-param-lower": (gen_ffd_param_lower, ("t", "N")),
    "batched-lower": (gen_batched_lower, ("t", "N")),
    "poc-lower": (gen_poc_lower, ("N",)),
    "poc-param-lower": (gen_poc_param_lower, ("beta", "M", "which")),
    "min-poc-lower": (gen_min_poc_lower, ("N",)),
    "min-poc-param-lower": (_min_poc_param, ("N", "t", "k", "kind")),
}


def generate(name: str, **params) -> AdversarialCase:
    """Build a registered case by name; unknown or missing parameters are errors."""
    if name not in GENERATORS:
        raise PreconditionError(f"unknown case {name!r}; expected one of {', '.join(GENERATORS)}")
    fn, names = GENERATORS[name]
    given = {k: v for k, v in params.items() if v is not None}
    extra = set(given) - set(names)
    if extra:
        raise PreconditionError(f"{name} does not take {', '.join(sorted(extra))}")
    if name != "min-poc-param-lower":
        missing = [p for p in names if p not in given]
        if missing:
            raise PreconditionError(f"{name} needs {', '.join(missing)}")
    elif "N" not in given:
        raise PreconditionError(f"{name} needs N")
    return fn(**given)


def case_from_claims(instance: Instance, claims: dict) -> AdversarialCase:
    """Rebuild a case from an instance file and its claims sidecar."""
    try:
        cert = Packing.from_ids(instance, claims["certificate"]["bins"])
        cluster_certs = None
        if "cluster_certificates" in claims:
            subs = instance.clusters()
            cluster_certs = {int(c): Packing.from_ids(subs[int(c)], v["bins"])
                             for c, v in claims["cluster_certificates"].items()}
        asym = claims.get("asymptotic_ratio")
        return AdversarialCase(
            claims["case"], instance, cert, int(claims["claimed_alg_bins"]),
            int(claims["claimed_cert_bins"]), claims["target_algorithm"],
            None if asym is None else F(asym), dict(claims.get("params", {})), cluster_certs)
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"malformed claims sidecar: {exc}") from None
