"""Closed-form ratio functions, weight functions and per-bin weight checkers."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .core import (
    DomainError,
    Packing,
    StructuralError,
    Variant,
    bin_valid,
    format_rational,
    t_of_beta,
)

F = Fraction


# -- bound values --------------------------------------------------------------

@dataclass(frozen=True)
class BoundValue:
    kind: str  # "tight" | "interval" | "unknown"
    lower: Fraction | None = None
    upper: Fraction | None = None

    def __post_init__(self):
        if self.kind == "interval" and self.lower > self.upper:
            raise DomainError(f"interval [{self.lower}, {self.upper}] is empty")

    @classmethod
    def tight(cls, value) -> "BoundValue":
        value = F(value)
        return cls("tight", value, value)

    @classmethod
    def interval(cls, lower, upper) -> "BoundValue":
        return cls("interval", F(lower), F(upper))

    @classmethod
    def unknown(cls) -> "BoundValue":
        return cls("unknown")

    @property
    def value(self) -> Fraction | None:
        return self.lower if self.kind == "tight" else None

    def text(self) -> str:
        if self.kind == "tight":
            return format_rational(self.lower)
        if self.kind == "interval":
            return f"[{format_rational(self.lower)},{format_rational(self.upper)}]"
        return ""

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "tight":
            out["value"] = format_rational(self.lower)
        elif self.kind == "interval":
            out["lower"] = format_rational(self.lower)
            out["upper"] = format_rational(self.upper)
        return out


def _beta(beta, lo_open=True, allow_zero=False) -> Fraction:
    beta = F(beta)
    if beta > 1 or beta < 0 or (beta == 0 and not allow_zero):
        raise DomainError(f"beta={beta} outside {'[0' if allow_zero else '(0'}, 1]")
    return beta


def _r1_excess(x: Fraction, t: int) -> Fraction:
    if t % 2 == 0:
        return (4 + t * t * x) / F((t + 2) ** 2)
    return (4 + (t * t - 1) * x) / F((t + 1) * (t + 3))


def r1(beta) -> Fraction:
    """First Fit ratio for max-OEBP with sizes in (0, beta]."""
    beta = _beta(beta)
    if beta == 1:
        return F(2)
    return 1 + _r1_excess(beta, t_of_beta(beta))


def r2(beta) -> Fraction:
    """Price of clustering for max-OEBP with sizes in (0, beta]."""
    beta = _beta(beta, allow_zero=True)
    if beta == 1:
        return F(3)
    if beta == 0:
        return F(2)
    t = t_of_beta(beta)
    if beta < F(t + 1, t * (t + 2)):
        return F(2 * (t + 3), t + 2)
    return 2 + 2 * t * beta / (t + 1)


def min_poc_bound(beta) -> BoundValue:
    """Price of clustering for min-OEBP: tight where resolved, else an interval."""
    beta = _beta(beta)
    if beta == 1:
        return BoundValue.tight(4)
    if F(1, 2) <= beta <= F(4, 5):
        return BoundValue.tight(3)
    k = 1 / (1 - beta)
    if k.denominator == 1 and k >= 5:
        k = int(k)
        return BoundValue.tight(F(4 * (k + 1), k + 3))
    q = 1 / beta
    if q.denominator == 1:
        return BoundValue.tight(F(2 * (q + 1), q))
    t = t_of_beta(beta)
    lower = F(2 * (t + 2), t + 1)
    if beta > F(4, 5):
        # largest k >= 5 with 1 - 1/k <= beta
        k = int(1 / (1 - beta))
        lower = max(lower, F(4 * (k + 1), k + 3))
    return BoundValue.interval(lower, 4)


_MIN_LITERATURE = {"nf": None, "wf": None, "ff": None}


def known_bound(algorithm: str, variant: Variant | str, beta, open_interval: bool = False
                ) -> BoundValue:
    """Known asymptotic ratio of a greedy algorithm for sizes in (0, beta].

    ``open_interval`` marks inputs with sizes strictly below ``beta``; it only
    matters for FFD under max-OEBP with ``beta = 1/t``.
    """
    variant = Variant(variant)
    beta = _beta(beta)
    t = t_of_beta(beta)
    if algorithm not in ("nf", "wf", "af", "ff", "nfd", "ffd"):
        raise DomainError(f"unknown algorithm {algorithm!r}")
    if variant is Variant.MAX:
        if algorithm in ("nf", "wf", "af"):
            return BoundValue.tight(1 + beta)
        if algorithm == "ff":
            return BoundValue.tight(r1(beta))
        if algorithm == "nfd":
            return BoundValue.tight(1 + F(1, t + 1))
        # ffd
        if open_interval and (1 / beta).denominator == 1:
            q = int(1 / beta)
            return BoundValue.tight(1 + F(1, q + 1))
        if beta == 1:
            return BoundValue.tight(F(3, 2))
        if beta == F(1, 2):
            return BoundValue.tight(F(4, 3))
        return BoundValue.unknown()

    # min-OEBP: values from the earlier greedy analysis, general case and beta = 1/k
    q = 1 / beta
    if q.denominator != 1:
        if algorithm in ("nfd", "ffd") and beta >= F(1, 3):
            return BoundValue.tight(F(71, 60))
        return BoundValue.unknown()
    k = int(q)
    if algorithm == "nf":
        return BoundValue.tight(4 if k == 1 else F(k + 1, k - 1))
    if algorithm == "wf":
        return BoundValue.tight(3 if k == 1 else F(k + 1, k - 1))
    if algorithm == "ff":
        return BoundValue.tight(F(k + 1, k))
    if algorithm in ("nfd", "ffd"):
        if k <= 3:
            return BoundValue.tight(F(71, 60))
        c = 1 if k % 2 else 2
        return BoundValue.tight(1 + F(1, k + 2) - F(c, k * (k + 1) * (k + 2)))
    return BoundValue.unknown()


# -- weight functions ----------------------------------------------------------

WEIGHT_IDS = ("ff_w", "nfd_w", "ffd_w", "ffd_half_w1", "ffd_half_w2", "batched_w",
              "poc_max_w", "poc_param_w", "min_poc_w")


@dataclass(frozen=True)
class WeightFn:
    """A piecewise weight function with its parameters.

    ``beta`` (when given) caps the domain; ``t`` is derived from it unless
    supplied directly.  ``theta`` is only used by ``ffd_half_w2`` and ``k``
    only by ``min_poc_w``.
    """

    id: str
    t: int | None = None
    beta: Fraction | None = None
    theta: Fraction | None = None
    k: int | None = None

    def __post_init__(self):
        if self.id not in WEIGHT_IDS:
            raise DomainError(f"unknown weight function {self.id!r}")
        if self.beta is not None:
            object.__setattr__(self, "beta", _beta(self.beta))
            if self.t is None:
                object.__setattr__(self, "t", t_of_beta(self.beta))
        if self.theta is not None:
            object.__setattr__(self, "theta", F(self.theta))
        needs_t = self.id in ("ff_w", "nfd_w", "batched_w", "poc_param_w")
        if needs_t and self.t is None:
            raise DomainError(f"{self.id} needs t or beta")
        if self.id == "poc_param_w" and self.t < 1:
            raise DomainError("poc_param_w needs t >= 1 (beta < 1)")
        if self.id == "ffd_half_w2" and not (self.theta is not None and F(1, 6) < self.theta < F(1, 4)):
            raise DomainError("ffd_half_w2 needs theta in (1/6, 1/4)")
        if self.id == "min_poc_w" and (self.k is None or self.k < 5):
            raise DomainError("min_poc_w needs an integer k >= 5")

    @classmethod
    def parse(cls, fn_id: str, params: dict) -> "WeightFn":
        kw = {}
        for key, raw in params.items():
            if key in ("t", "k"):
                kw[key] = int(raw)
            elif key in ("beta", "theta"):
                from .core import parse_rational
                kw[key] = parse_rational(raw, key)
            else:
                raise DomainError(f"unknown weight parameter {key!r}")
        return cls(fn_id, **kw)

    def domain(self) -> tuple[Fraction, Fraction, bool]:
        """(low, high, high_inclusive); the low end is exclusive except where noted."""
        fid = self.id
        if fid == "ffd_half_w1":
            return F(1, 4), F(1, 2), True
        if fid == "ffd_half_w2":
            return F(1, 6), F(1, 2), True
        if fid == "poc_param_w":
            hi, incl = F(1, self.t), False
        elif fid == "min_poc_w":
            hi, incl = F(self.k - 1, self.k), True
        elif fid in ("ffd_w", "poc_max_w"):
            hi, incl = F(1), True
        else:
            hi, incl = (F(1, self.t) if self.t else F(1)), self.t == 0
            if self.beta is None and self.t:
                incl = False
        if self.beta is not None and (self.beta < hi or (self.beta == hi and incl)):
            hi, incl = self.beta, True
        return F(0), hi, incl

    def __call__(self, x) -> Fraction:
        return weight(x, self)


def _check_domain(x: Fraction, fn: WeightFn):
    lo, hi, incl = fn.domain()
    low_ok = x >= lo if fn.id in ("ffd_half_w1", "ffd_half_w2") else x > lo
    high_ok = x <= hi if incl else x < hi
    if not (low_ok and high_ok):
        lb = "[" if fn.id in ("ffd_half_w1", "ffd_half_w2") else "("
        rb = "]" if incl else ")"
        raise DomainError(f"{fn.id}: x={x} outside {lb}{lo}, {hi}{rb}")


def weight(x, fn: WeightFn) -> Fraction:
    x = F(x)
    _check_domain(x, fn)
    fid, t = fn.id, fn.t
    if fid == "ff_w":
        return x if x < F(1, t + 1) else _r1_excess(x, t)
    if fid in ("nfd_w", "batched_w"):
        return x if x < F(1, t + 1) else F(1, t + 1)
    if fid == "ffd_w":
        return x if x < F(1, 2) else F(1, 2)
    if fid == "poc_max_w":
        return x if x <= F(1, 2) else F(1, 2)
    if fid == "ffd_half_w1":
        return F(1, 3)
    if fid == "ffd_half_w2":
        if x >= F(1, 2) - fn.theta:
            return F(1, 3)
        if x >= F(1, 4):
            return F(1, 4)
        if x >= F(1, 5):
            return F(1, 5)
        return F(1, 6)
    if fid == "poc_param_w":
        if x < F(1, t + 2):
            return x
        if x < F(t + 1, t * (t + 2)):
            return F(1, t + 2)
        return x * t / (t + 1)
    # min_poc_w
    k = fn.k
    if x <= F(1, k):
        return F(2 * k, k + 3) * x
    if x <= F(2, k + 3):
        return F(2, k + 3)
    if x <= F(k + 1, k + 3):
        return x
    return F(k + 1, k + 3)


# -- checkers ------------------------------------------------------------------

@dataclass
class WeightReport:
    bin_weights: list[Fraction]
    threshold: Fraction
    mode: str
    flagged: list[int] = field(default_factory=list)
    allowed_exceptions: int = 0
    passed: bool = True

    @property
    def exception_count(self) -> int:
        return len(self.flagged)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "threshold": format_rational(self.threshold),
            "bin_weights": [format_rational(w) for w in self.bin_weights],
            "flagged_bins": self.flagged,
            "exception_count": self.exception_count,
            "allowed_exceptions": self.allowed_exceptions,
            "passed": self.passed,
        }


def bin_weights(packing: Packing, fn: WeightFn) -> list[Fraction]:
    out = []
    for j, b in enumerate(packing.bins):
        if not len(b) or not bin_valid(b, packing.variant):
            raise StructuralError(f"bin {j} is not a valid {packing.variant.value}-OEBP bin")
        out.append(sum((weight(s, fn) for s in b.sizes), F(0)))
    return out


def check_opt_bin_weights(packing: Packing, fn: WeightFn, cap, strict: bool = True
                          ) -> WeightReport:
    """Flag bins whose weight reaches ``cap`` (or exceeds it when not strict)."""
    cap = F(cap)
    weights = bin_weights(packing, fn)
    flagged = [j for j, w in enumerate(weights) if (w >= cap if strict else w > cap)]
    return WeightReport(weights, cap, "cap-strict" if strict else "cap", flagged, 0,
                        not flagged)


def check_alg_bin_weights(packing: Packing, fn: WeightFn, floor, allowed_exceptions: int
                          ) -> WeightReport:
    """Count bins whose weight is below ``floor``; pass iff at most ``allowed_exceptions``."""
    floor = F(floor)
    weights = bin_weights(packing, fn)
    flagged = [j for j, w in enumerate(weights) if w < floor]
    return WeightReport(weights, floor, "floor", flagged, allowed_exceptions,
                        len(flagged) <= allowed_exceptions)


def check_alg_total_weight(packing: Packing, fn: WeightFn, floor, allowed_deficit) -> WeightReport:
    """Pass iff the total weight is at least ``floor * bins - allowed_deficit``.

    This is the aggregate form of the algorithm-side argument: individual
    bins may fall short as long as the shortfall summed over the packing
    stays within the additive constant.
    """
    floor, allowed_deficit = F(floor), F(allowed_deficit)
    weights = bin_weights(packing, fn)
    flagged = [j for j, w in enumerate(weights) if w < floor]
    ok = sum(weights, F(0)) >= floor * len(weights) - allowed_deficit
    return WeightReport(weights, floor, "total", flagged, int(allowed_deficit), ok)
