"""Exact optimum for small instances.

:func:`optimal_packing` is a depth-first branch-and-bound; :func:`naive_optimal`
enumerates set partitions and exists only as an independent oracle for it.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction

from .core import Instance, OEBPError, Packing, Variant, common_scale
from .greedy import ffd, sorted_items

DEFAULT_MAX_ITEMS = int(os.environ.get("OEBP_MAX_ITEMS", "16"))
NAIVE_MAX_ITEMS = 10


class BudgetExceeded(OEBPError):
    """The instance is larger than the solver is allowed to handle."""


@dataclass(frozen=True)
class SolveBudget:
    max_items: int = DEFAULT_MAX_ITEMS
    node_limit: int | None = None


@dataclass(frozen=True)
class SolveResult:
    packing: Packing
    proven_optimal: bool
    nodes: int

    @property
    def bins(self) -> int:
        return len(self.packing)


def items_per_bin(size: Fraction) -> int:
    """Most copies of one size that fit in a bin: the largest c with (c-1)*size < 1."""
    return math.ceil(1 / Fraction(size))


def identical_optimum(count: int, size: Fraction) -> int:
    # Both variants exclude one copy, so the bound is the same.
    if count == 0:
        return 0
    return -(-count // items_per_bin(size))


def lower_bound(instance: Instance) -> int:
    """Cheap valid lower bound on the optimum.

    Every valid bin has total below 1 + (its largest item), giving
    floor(S / (1 + max size)) + 1.  Items of size 1 never share a bin under
    max-OEBP with each other, and never share at all under min-OEBP.
    """
    if not instance.items:
        return 0
    sizes = instance.sizes
    by_size = math.floor(sum(sizes) / (1 + max(sizes))) + 1
    ones = sum(1 for s in sizes if s == 1)
    if instance.variant is Variant.MIN:
        rest = [s for s in sizes if s != 1]
        ones += (math.floor(sum(rest) / (1 + max(rest))) + 1) if rest else 0
    return max(by_size, ones)


def optimal_packing(instance: Instance, budget: SolveBudget | None = None) -> SolveResult:
    """Minimum-bin packing by branch and bound.

    Items are taken in non-increasing size order and each is tried in every
    open bin it fits (bins in identical states are tried once), then in one
    new bin.  A node is cut when the open bins plus the fewest new bins that
    could absorb the remaining size reaches the incumbent.  The FFD packing
    seeds the incumbent.
    """
    budget = budget or SolveBudget()
    n = len(instance.items)
    if n > budget.max_items:
        raise BudgetExceeded(f"{n} items exceeds the solver budget of {budget.max_items}")
    if n == 0:
        return SolveResult(Packing((), instance.variant), True, 0)

    order = sorted_items(instance)
    sizes, one = common_scale(it.size for it in order)
    is_max = instance.variant is Variant.MAX
    suffix = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + sizes[i]

    seed = ffd(instance)[0]
    best_count = len(seed)
    best_assign: list[int] | None = None
    floor = lower_bound(instance)

    totals: list[int] = []
    largest: list[int] = []
    smallest: list[int] = []
    assign = [0] * n
    nodes = 0
    aborted = False

    def bound(i: int) -> int:
        k = len(totals)
        if i == n:
            return k
        rest, head = suffix[i], sizes[i]
        room = 0
        for j in range(k):
            if is_max:
                room += one - (totals[j] - largest[j])
            else:
                room += max(0, one - totals[j] + head)
        if rest <= room:
            return k
        return k + -(-(rest - room) // (one + head))

    def search(i: int):
        nonlocal best_count, best_assign, nodes, aborted
        nodes += 1
        if budget.node_limit is not None and nodes > budget.node_limit:
            aborted = True
            return
        if i == n:
            if len(totals) < best_count:
                best_count = len(totals)
                best_assign = assign.copy()
            return
        if bound(i) >= best_count:
            return
        s = sizes[i]
        start = assign[i - 1] if i and sizes[i - 1] == s else 0
        tried = set()
        for j in range(start, len(totals)):
            state = (totals[j], largest[j], smallest[j])
            if state in tried:
                continue
            tried.add(state)
            t = totals[j] + s
            # s is never larger than an earlier item, so it becomes the bin minimum
            excl = t - largest[j] if is_max else t - s
            if excl >= one:
                continue
            old_small = smallest[j]
            totals[j], smallest[j] = t, s
            assign[i] = j
            search(i + 1)
            totals[j], smallest[j] = t - s, old_small
            if aborted or best_count <= floor:
                return
        if len(totals) + 1 < best_count and not aborted:
            totals.append(s)
            largest.append(s)
            smallest.append(s)
            assign[i] = len(totals) - 1
            search(i + 1)
            totals.pop()
            largest.pop()
            smallest.pop()

    if best_count > floor:
        search(0)

    if best_assign is None:
        packing = seed
    else:
        groups: list[list[int]] = [[] for _ in range(best_count)]
        for it, j in zip(order, best_assign):
            groups[j].append(it.id)
        packing = Packing.from_ids(instance, groups)
    return SolveResult(packing, not aborted, nodes)


def optimum(instance: Instance, budget: SolveBudget | None = None) -> int:
    return optimal_packing(instance, budget).bins


def naive_optimal(instance: Instance) -> Packing:
    """Minimum-cardinality valid set partition by plain enumeration.

    Walks restricted growth strings in arrival order.  A block that has
    become invalid can never become valid again by adding items, so such
    branches are dropped; nothing else is pruned.
    """
    items = instance.items
    n = len(items)
    if n > NAIVE_MAX_ITEMS:
        raise BudgetExceeded(f"naive enumeration is limited to {NAIVE_MAX_ITEMS} items")
    if n == 0:
        return Packing((), instance.variant)
    is_max = instance.variant is Variant.MAX
    blocks: list[list[Fraction]] = []
    labels = [0] * n
    best: list[int] | None = None
    best_k = n + 1

    def ok(block):
        return sum(block) - (max(block) if is_max else min(block)) < 1

    def walk(i: int):
        nonlocal best, best_k
        if i == n:
            if len(blocks) < best_k:
                best_k, best = len(blocks), labels.copy()
            return
        size = items[i].size
        for j in range(len(blocks) + 1):
            if j == len(blocks):
                blocks.append([size])
            else:
                blocks[j].append(size)
            if ok(blocks[j]):
                labels[i] = j
                walk(i + 1)
            if j == len(blocks) - 1 and len(blocks[j]) == 1:
                blocks.pop()
            else:
                blocks[j].pop()

    walk(0)
    groups: list[list[int]] = [[] for _ in range(best_k)]
    for it, j in zip(items, best):
        groups[j].append(it.id)
    return Packing.from_ids(instance, groups)
