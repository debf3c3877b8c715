"""Greedy packers for max-OEBP and min-OEBP.

Every packer consumes ``instance.items`` in order (the Decreasing variants
sort first, breaking size ties by ascending id) and returns the packing
together with a per-item decision trace.  Bin choice ties always go to the
lowest bin index.

Internally sizes are rescaled to integers over a common denominator, which
keeps arithmetic exact and fast enough for the ten-thousand-item
constructions used by the lower-bound generators.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Sequence

from .core import (
    Bin,
    DomainError,
    Instance,
    Item,
    OEBPError,
    Packing,
    Variant,
    common_scale,
)


class WfRule(str, Enum):
    MIN_TOTAL = "min-total"
    MIN_TOTAL_EXCL_MAX = "min-total-excl-max"


class ContractError(OEBPError):
    """A bin chooser picked a bin the item does not fit into."""


@dataclass(frozen=True)
class Decision:
    item_id: int
    bin_index: int
    opened: bool


class PackTrace(tuple):
    """Sequence of :class:`Decision` records, one per packed item."""

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps({"item": d.item_id, "bin": d.bin_index, "opened": d.opened}) + "\n"
            for d in self
        )

    @classmethod
    def from_jsonl(cls, text: str) -> "PackTrace":
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        return cls(Decision(r["item"], r["bin"], r["opened"]) for r in rows)

    def replay(self, instance: Instance) -> Packing:
        groups: list[list[int]] = []
        for d in self:
            if d.opened:
                if d.bin_index != len(groups):
                    raise OEBPError(f"trace opens bin {d.bin_index} out of order")
                groups.append([])
            groups[d.bin_index].append(d.item_id)
        return Packing.from_ids(instance, groups)


class OpenBin:
    """Mutable bin state seen by choosers.  Integer fields are scaled sizes."""

    __slots__ = ("ids", "total", "largest", "smallest", "scale")

    def __init__(self, scale: int):
        self.ids: list[int] = []
        self.total = 0
        self.largest = 0
        self.smallest = 0
        self.scale = scale

    def add(self, item_id: int, s: int):
        if not self.ids:
            self.largest = self.smallest = s
        else:
            if s > self.largest:
                self.largest = s
            if s < self.smallest:
                self.smallest = s
        self.ids.append(item_id)
        self.total += s

    def fits(self, s: int, variant: Variant) -> bool:
        if not self.ids:
            return True
        if variant is Variant.MAX:
            return self.total + s - max(self.largest, s) < self.scale
        return self.total + s - min(self.smallest, s) < self.scale

    def excl_max_after(self, s: int) -> int:
        return self.total + s - max(self.largest, s)

    @property
    def total_size(self) -> Fraction:
        return Fraction(self.total, self.scale)

    @property
    def largest_size(self) -> Fraction:
        return Fraction(self.largest, self.scale)

    @property
    def smallest_size(self) -> Fraction:
        return Fraction(self.smallest, self.scale)


Chooser = Callable[[Sequence[int], Sequence[OpenBin], Item], int]


def _prepare(items: Sequence[Item]):
    scaled, scale = common_scale(it.size for it in items)
    return [(it, s) for it, s in zip(items, scaled)], scale


def _finish(instance: Instance, bins: list[OpenBin], trace: list[Decision]):
    by_id = instance.by_id
    packing = Packing(
        tuple(Bin(tuple(b.ids), tuple(by_id[i].size for i in b.ids)) for b in bins),
        instance.variant,
    )
    return packing, PackTrace(trace)


def sorted_items(instance: Instance) -> list[Item]:
    return sorted(instance.items, key=lambda it: (-it.size, it.id))


def next_fit(instance: Instance):
    variant = instance.variant
    seq, scale = _prepare(instance.items)
    bins: list[OpenBin] = []
    trace = []
    for it, s in seq:
        opened = not bins or not bins[-1].fits(s, variant)
        if opened:
            bins.append(OpenBin(scale))
        bins[-1].add(it.id, s)
        trace.append(Decision(it.id, len(bins) - 1, opened))
    return _finish(instance, bins, trace)


def any_fit(instance: Instance, chooser: Chooser, items: Sequence[Item] | None = None):
    """Generic Any Fit: a new bin is opened only when no open bin accepts the item.

    ``chooser(feasible, bins, item)`` receives the feasible bin indices in
    increasing order and must return one of them.
    """
    variant = instance.variant
    seq, scale = _prepare(instance.items if items is None else items)
    bins: list[OpenBin] = []
    trace = []
    for it, s in seq:
        feasible = [j for j, b in enumerate(bins) if b.fits(s, variant)]
        if feasible:
            j = chooser(feasible, bins, it)
            if j not in feasible:
                raise ContractError(f"chooser picked bin {j} for item {it.id}; "
                                    f"feasible bins are {feasible}")
            opened = False
        else:
            bins.append(OpenBin(scale))
            j, opened = len(bins) - 1, True
        bins[j].add(it.id, s)
        trace.append(Decision(it.id, j, opened))
    return _finish(instance, bins, trace)


def lowest_index(feasible, bins, item):
    return feasible[0]


def min_total(feasible, bins, item):
    return min(feasible, key=lambda j: (bins[j].total, j))


def worst_fit(instance: Instance, rule: WfRule | str = WfRule.MIN_TOTAL):
    rule = WfRule(rule)
    if rule is WfRule.MIN_TOTAL:
        return any_fit(instance, min_total)
    if instance.variant is not Variant.MAX:
        raise DomainError("the min-total-excl-max Worst Fit rule is defined for max-OEBP only")
    scaled = dict(zip((it.id for it in instance.items),
                      common_scale(it.size for it in instance.items)[0]))

    def excl_max(feasible, bins, item):
        s = scaled[item.id]
        return min(feasible, key=lambda j: (bins[j].excl_max_after(s), j))

    return any_fit(instance, excl_max)


class _MaxSlackTree:
    """Segment tree over bin slacks for max-OEBP First Fit.

    An item of scaled size s fits a bin iff the bin's total is below 1, or
    ``(total - largest) + s < 1``.  Storing ``slack = 1 - (total - largest)``
    (or +inf while total < 1) reduces First Fit to "leftmost slack > s".
    """

    def __init__(self, capacity: int):
        size = 1
        while size < max(capacity, 1):
            size *= 2
        self.size = size
        self.tree = [-1] * (2 * size)

    def set(self, j: int, value: int):
        k = j + self.size
        tree = self.tree
        tree[k] = value
        k //= 2
        while k:
            v = tree[2 * k] if tree[2 * k] >= tree[2 * k + 1] else tree[2 * k + 1]
            if tree[k] == v:
                break
            tree[k] = v
            k //= 2

    def leftmost_above(self, s: int) -> int:
        tree = self.tree
        if tree[1] <= s:
            return -1
        k = 1
        while k < self.size:
            k = 2 * k if tree[2 * k] > s else 2 * k + 1
        return k - self.size


def _first_fit_items(instance: Instance, items: Sequence[Item]):
    variant = instance.variant
    if variant is Variant.MIN:
        return any_fit(instance, lowest_index, items)
    seq, scale = _prepare(items)
    inf = scale + 1
    tree = _MaxSlackTree(len(seq))
    bins: list[OpenBin] = []
    trace = []
    for it, s in seq:
        j = tree.leftmost_above(s)
        opened = j < 0
        if opened:
            bins.append(OpenBin(scale))
            j = len(bins) - 1
        b = bins[j]
        b.add(it.id, s)
        tree.set(j, inf if b.total < scale else scale - (b.total - b.largest))
        trace.append(Decision(it.id, j, opened))
    return _finish(instance, bins, trace)


def first_fit(instance: Instance):
    return _first_fit_items(instance, instance.items)


def ffd(instance: Instance):
    return _first_fit_items(instance, sorted_items(instance))


def nfd(instance: Instance):
    """Next Fit Decreasing with the prefix rule.

    Items are sorted non-increasingly; a bin keeps receiving items while its
    total before the addition is below 1, and is closed for good as soon as
    its total reaches 1.
    """
    seq, scale = _prepare(sorted_items(instance))
    bins: list[OpenBin] = []
    trace = []
    for it, s in seq:
        opened = not bins or bins[-1].total >= scale
        if opened:
            bins.append(OpenBin(scale))
        bins[-1].add(it.id, s)
        trace.append(Decision(it.id, len(bins) - 1, opened))
    return _finish(instance, bins, trace)


ALGORITHMS = ("nf", "wf", "af", "ff", "nfd", "ffd")


def run(name: str, instance: Instance, wf_rule: WfRule | str = WfRule.MIN_TOTAL):
    """Dispatch by short algorithm id.  ``af`` means Any Fit with lowest index."""
    if name == "nf":
        return next_fit(instance)
    if name == "wf":
        return worst_fit(instance, wf_rule)
    if name == "wf-excl":
        return worst_fit(instance, WfRule.MIN_TOTAL_EXCL_MAX)
    if name in ("ff", "af"):
        return first_fit(instance)
    if name == "nfd":
        return nfd(instance)
    if name == "ffd":
        return ffd(instance)
    raise DomainError(f"unknown algorithm {name!r}; expected one of {', '.join(ALGORITHMS)}")


def bins_of(name: str, instance: Instance, **kw) -> int:
    return len(run(name, instance, **kw)[0])

