"""Exact-rational domain types and the two open-end validity predicates.

A bin is valid for max-OEBP when its total size minus its largest item is
strictly below 1, and for min-OEBP when its total minus its smallest item is
strictly below 1.  All sizes are :class:`fractions.Fraction` so that the
boundary cases (a bin of three halves, say) are decided exactly.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

ONE = Fraction(1)

_RATIONAL_RE = re.compile(r"^\s*(\d+)\s*(?:/\s*(\d+)\s*)?$")


class OEBPError(ValueError):
    """Base class for all errors raised by this package."""


class DomainError(OEBPError):
    """An argument lies outside the mathematical domain of an operation."""


class StructuralError(OEBPError):
    """A packing does not partition the items of its instance."""


class ParseError(OEBPError):
    """Malformed instance/packing text.  ``field`` names the offending key."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class Variant(str, Enum):
    MAX = "max"
    MIN = "min"


def parse_rational(text: str | int | Fraction, what: str = "value") -> Fraction:
    """Parse ``"p/q"`` or ``"p"``.  Decimal strings are rejected on purpose."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, bool):
        raise ParseError(f"{what}: expected a rational, got {text!r}", what)
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ParseError(f"{what}: expected a 'p/q' string, got {text!r}", what)
    m = _RATIONAL_RE.match(text)
    if m is None:
        raise ParseError(f"{what}: {text!r} is not of the form 'p/q'", what)
    num, den = int(m.group(1)), int(m.group(2) or 1)
    if den == 0:
        raise ParseError(f"{what}: zero denominator in {text!r}", what)
    return Fraction(num, den)


def parse_size(text: str | int | Fraction, what: str = "size") -> Fraction:
    value = parse_rational(text, what)
    if not 0 < value <= 1:
        raise ParseError(f"{what}: {value} is outside (0, 1]", what)
    return value


def format_rational(value: Fraction | int) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def t_of_beta(beta: Fraction) -> int:
    """Return ceil(1/beta) - 1, so that beta lies in [1/(t+1), 1/t)."""
    beta = Fraction(beta)
    if not 0 < beta <= 1:
        raise DomainError(f"beta={beta} must lie in (0, 1]")
    return math.ceil(1 / beta) - 1


def common_scale(sizes: Iterable[Fraction]) -> tuple[list[int], int]:
    """Rescale sizes to integers over the lcm of their denominators.

    Returns ``(numerators, scale)`` with ``size == numerator / scale``.  The
    packers and the solver run on these integers; comparisons stay exact.
    """
    sizes = list(sizes)
    scale = 1
    for s in sizes:
        scale = math.lcm(scale, s.denominator)
    return [s.numerator * (scale // s.denominator) for s in sizes], scale


def excluded_total(total, largest, smallest, variant: Variant):
    return total - (largest if variant is Variant.MAX else smallest)


@dataclass(frozen=True)
class Item:
    id: int
    size: Fraction
    cluster: int | None = None

    def __post_init__(self):
        if isinstance(self.id, bool) or not isinstance(self.id, int) or self.id < 0:
            raise DomainError(f"item id must be a nonnegative integer, got {self.id!r}")
        object.__setattr__(self, "size", Fraction(self.size))
        if not 0 < self.size <= 1:
            raise DomainError(f"item {self.id}: size {self.size} outside (0, 1]")
        if self.cluster is not None and (not isinstance(self.cluster, int) or self.cluster < 0):
            raise DomainError(f"item {self.id}: cluster label must be a nonnegative integer")


@dataclass(frozen=True)
class Instance:
    variant: Variant
    items: tuple[Item, ...]
    beta: Fraction = ONE

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "items", tuple(self.items))
        object.__setattr__(self, "beta", Fraction(self.beta))
        if not 0 < self.beta <= 1:
            raise DomainError(f"beta={self.beta} must lie in (0, 1]")
        seen = set()
        for it in self.items:
            if it.id in seen:
                raise DomainError(f"duplicate item id {it.id}")
            seen.add(it.id)
            if it.size > self.beta:
                raise DomainError(f"item {it.id}: size {it.size} exceeds beta={self.beta}")
        labelled = {it.cluster is not None for it in self.items}
        if len(labelled) > 1:
            raise DomainError("cluster labels must be present on every item or on none")

    @classmethod
    def from_sizes(cls, sizes: Sequence, variant: Variant | str = Variant.MAX,
                   beta=ONE, clusters: Sequence[int] | None = None) -> "Instance":
        sizes = [parse_size(s) if isinstance(s, str) else Fraction(s) for s in sizes]
        labels = list(clusters) if clusters is not None else [None] * len(sizes)
        if len(labels) != len(sizes):
            raise DomainError("one cluster label per item is required")
        items = tuple(Item(i, s, c) for i, (s, c) in enumerate(zip(sizes, labels)))
        return cls(Variant(variant), items, Fraction(beta))

    def __len__(self):
        return len(self.items)

    @property
    def sizes(self) -> list[Fraction]:
        return [it.size for it in self.items]

    @cached_property
    def by_id(self) -> dict[int, Item]:
        return {it.id: it for it in self.items}

    @property
    def is_clustered(self) -> bool:
        return bool(self.items) and self.items[0].cluster is not None

    def clusters(self) -> dict[int, "Instance"]:
        """Sub-instances keyed by cluster label, in order of first appearance."""
        if not self.is_clustered:
            raise DomainError("instance carries no cluster labels")
        groups: dict[int, list[Item]] = {}
        for it in self.items:
            groups.setdefault(it.cluster, []).append(it)
        return {c: Instance(self.variant, tuple(g), self.beta) for c, g in groups.items()}

    def subset(self, ids: Iterable[int]) -> "Instance":
        ids = set(ids)
        return Instance(self.variant, tuple(it for it in self.items if it.id in ids), self.beta)


@dataclass(frozen=True)
class Bin:
    item_ids: tuple[int, ...]
    sizes: tuple[Fraction, ...]
    total: Fraction = field(init=False)
    largest: Fraction = field(init=False)
    smallest: Fraction = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "item_ids", tuple(self.item_ids))
        object.__setattr__(self, "sizes", tuple(Fraction(s) for s in self.sizes))
        if len(self.item_ids) != len(self.sizes):
            raise DomainError("bin needs exactly one size per item id")
        object.__setattr__(self, "total", sum(self.sizes, Fraction(0)))
        object.__setattr__(self, "largest", max(self.sizes, default=Fraction(0)))
        object.__setattr__(self, "smallest", min(self.sizes, default=Fraction(0)))

    @classmethod
    def of(cls, *sizes) -> "Bin":
        """Anonymous bin from sizes, ids 0..k-1.  Handy in tests and examples."""
        sizes = [parse_size(s) if isinstance(s, str) else Fraction(s) for s in sizes]
        return cls(tuple(range(len(sizes))), tuple(sizes))

    def __len__(self):
        return len(self.item_ids)

    def excluded_total(self, variant: Variant) -> Fraction:
        return excluded_total(self.total, self.largest, self.smallest, Variant(variant))


@dataclass(frozen=True)
class Packing:
    bins: tuple[Bin, ...]
    variant: Variant

    def __post_init__(self):
        object.__setattr__(self, "bins", tuple(self.bins))
        object.__setattr__(self, "variant", Variant(self.variant))

    @classmethod
    def from_ids(cls, instance: Instance, groups: Iterable[Iterable[int]]) -> "Packing":
        bins = []
        for group in groups:
            ids = tuple(group)
            try:
                sizes = tuple(instance.by_id[i].size for i in ids)
            except KeyError as exc:
                raise StructuralError(f"unknown item id {exc.args[0]} in packing") from None
            bins.append(Bin(ids, sizes))
        return cls(tuple(bins), instance.variant)

    def __len__(self):
        return len(self.bins)

    def __iter__(self):
        return iter(self.bins)

    def ids(self) -> list[list[int]]:
        return [list(b.item_ids) for b in self.bins]


def bin_valid(bin: Bin, variant: Variant) -> bool:
    if not len(bin):
        raise DomainError("validity of an empty bin is undefined")
    return bin.excluded_total(variant) < 1


def fits(bin: Bin, size, variant: Variant) -> bool:
    """True iff ``bin`` plus one more item of ``size`` is a valid bin."""
    size = Fraction(size)
    if not 0 < size <= 1:
        raise DomainError(f"size {size} outside (0, 1]")
    if not len(bin):
        return True
    total = bin.total + size
    if Variant(variant) is Variant.MAX:
        return total - max(bin.largest, size) < 1
    return total - min(bin.smallest, size) < 1


def packing_valid(packing: Packing, instance: Instance) -> bool:
    """Check that ``packing`` is a feasible solution for ``instance``.

    Raises :class:`StructuralError` when the bins do not partition the item
    ids exactly; returns False for capacity violations or empty bins.
    """
    seen: set[int] = set()
    for b in packing.bins:
        for i in b.item_ids:
            if i not in instance.by_id:
                raise StructuralError(f"unknown item id {i} in packing")
            if i in seen:
                raise StructuralError(f"item {i} packed more than once")
            seen.add(i)
    missing = set(instance.by_id) - seen
    if missing:
        raise StructuralError(f"items not packed: {sorted(missing)[:10]}")
    variant = instance.variant
    for b in packing.bins:
        if not len(b):
            return False
        if tuple(instance.by_id[i].size for i in b.item_ids) != b.sizes:
            raise StructuralError("bin sizes disagree with the instance")
        if not bin_valid(b, variant):
            return False
    return True


# -- serialization -----------------------------------------------------------

def instance_to_dict(instance: Instance) -> dict:
    out: dict = {"variant": instance.variant.value}
    if instance.beta != 1:
        out["beta"] = format_rational(instance.beta)
    items = []
    for it in instance.items:
        row = {"id": it.id, "size": format_rational(it.size)}
        if it.cluster is not None:
            row["cluster"] = it.cluster
        items.append(row)
    out["items"] = items
    return out


def instance_from_dict(data: dict) -> Instance:
    if not isinstance(data, dict):
        raise ParseError("instance must be a JSON object", "")
    try:
        variant = Variant(data.get("variant"))
    except ValueError:
        raise ParseError(f"variant must be 'max' or 'min', got {data.get('variant')!r}",
                         "variant") from None
    beta = parse_size(data["beta"], "beta") if "beta" in data else ONE
    rows = data.get("items")
    if not isinstance(rows, list):
        raise ParseError("items must be a list", "items")
    items = []
    seen = set()
    for k, row in enumerate(rows):
        where = f"items[{k}]"
        if not isinstance(row, dict) or "id" not in row or "size" not in row:
            raise ParseError(f"{where}: needs 'id' and 'size'", where)
        iid = row["id"]
        if isinstance(iid, bool) or not isinstance(iid, int) or iid < 0:
            raise ParseError(f"{where}.id: expected a nonnegative integer", f"{where}.id")
        if iid in seen:
            raise ParseError(f"{where}.id: duplicate id {iid}", f"{where}.id")
        seen.add(iid)
        size = parse_size(row["size"], f"{where}.size")
        if size > beta:
            raise ParseError(f"{where}.size: {size} exceeds beta={beta}", f"{where}.size")
        cluster = row.get("cluster")
        if cluster is not None and (isinstance(cluster, bool) or not isinstance(cluster, int)
                                    or cluster < 0):
            raise ParseError(f"{where}.cluster: expected a nonnegative integer",
                             f"{where}.cluster")
        items.append(Item(iid, size, cluster))
    try:
        return Instance(variant, tuple(items), beta)
    except DomainError as exc:
        raise ParseError(str(exc), "items") from None


def dumps(data) -> str:
    return json.dumps(data, separators=(",", ":")) + "\n"


def save_instance(instance: Instance) -> str:
    return dumps(instance_to_dict(instance))


def load_instance(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}", "") from None
    return instance_from_dict(data)


def save_packing(packing: Packing) -> str:
    return dumps({"bins": packing.ids()})


def load_packing(text: str, instance: Instance) -> Packing:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}", "") from None
    bins = data.get("bins") if isinstance(data, dict) else None
    if not isinstance(bins, list) or not all(isinstance(b, list) for b in bins):
        raise ParseError("packing needs a 'bins' list of id lists", "bins")
    return Packing.from_ids(instance, bins)
