from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from strategies import instances
from oebp.core import DomainError, Instance, Variant, packing_valid
from oebp.greedy import (
    ContractError,
    PackTrace,
    WfRule,
    any_fit,
    bins_of,
    ffd,
    first_fit,
    lowest_index,
    min_total,
    next_fit,
    nfd,
    run,
    worst_fit,
)

MAX, MIN = Variant.MAX, Variant.MIN


def sizes_of(packing):
    return [list(b.sizes) for b in packing]


def nf_trap_small():
    # beta = 3/4, M = 4, N = 2: each large item followed by M+1 items of (1-beta)/M
    eps = F(1, 16)
    return Instance.from_sizes(([F(3, 4)] + [eps] * 5) * 2, MAX, F(3, 4))


def test_next_fit_examples():
    assert len(next_fit(Instance.from_sizes([1, 1]))[0]) == 2
    p, _ = next_fit(nf_trap_small())
    assert sizes_of(p) == [[F(3, 4)] + [F(1, 16)] * 5] * 2
    p, _ = next_fit(Instance.from_sizes([F(2, 5), F(2, 5), F(9, 10)], MIN))
    assert sizes_of(p) == [[F(2, 5), F(2, 5)], [F(9, 10)]]


def test_worst_fit_examples():
    inst = nf_trap_small()
    nf = next_fit(inst)[0].ids()
    assert worst_fit(inst, WfRule.MIN_TOTAL)[0].ids() == nf
    assert worst_fit(inst, WfRule.MIN_TOTAL_EXCL_MAX)[0].ids() == nf
    p, trace = worst_fit(Instance.from_sizes([1, 1, F(1, 100)]), WfRule.MIN_TOTAL)
    assert p.ids() == [[0, 2], [1]]
    assert trace[2].bin_index == 0 and not trace[2].opened
    assert len(worst_fit(Instance.from_sizes([F(9, 10), F(2, 5), F(2, 5)], MIN))[0]) == 2


def test_worst_fit_excl_max_rejects_min_oebp():
    with pytest.raises(DomainError):
        worst_fit(Instance.from_sizes([F(1, 2)], MIN), WfRule.MIN_TOTAL_EXCL_MAX)


def test_worst_fit_excl_max_differs_from_min_total():
    # both totals are 1; excluding the largest, bin 1 ends lower (1/10 vs 1/5)
    inst = Instance.from_sizes([F(1, 10), F(9, 10), 1, F(1, 10)])
    assert worst_fit(inst, WfRule.MIN_TOTAL)[0].ids() == [[0, 1, 3], [2]]
    assert worst_fit(inst, WfRule.MIN_TOTAL_EXCL_MAX)[0].ids() == [[0, 1], [2, 3]]


def test_first_fit_examples():
    p, _ = first_fit(Instance.from_sizes([1, F(1, 2), F(3, 5)]))
    assert sizes_of(p) == [[1, F(1, 2)], [F(3, 5)]]
    assert len(first_fit(Instance.from_sizes([F(7, 20)] * 3 + [F(1, 4)]))[0]) == 1
    assert len(first_fit(Instance.from_sizes([F(9, 10), F(2, 5), F(2, 5)], MIN))[0]) == 2


def test_any_fit_examples():
    inst = Instance.from_sizes([F(1, 2)] * 3)
    for chooser in (lowest_index, min_total, lambda feasible, bins, item: feasible[-1]):
        assert len(any_fit(inst, chooser)[0]) == 2


def test_any_fit_rejects_infeasible_choice():
    inst = Instance.from_sizes([1, 1, F(1, 2)])
    with pytest.raises(ContractError):
        any_fit(inst, lambda feasible, bins, item: 5)


def test_nfd_examples():
    p, _ = nfd(Instance.from_sizes([F(9, 10), F(1, 20), F(1, 20), F(1, 20)]))
    assert sizes_of(p) == [[F(9, 10), F(1, 20), F(1, 20)], [F(1, 20)]]
    assert len(nfd(Instance.from_sizes([F(1, 3)]))[0]) == 1


def test_nfd_uses_literal_prefix_rule():
    # max-OEBP would still accept the 1/10 into the first bin, the prefix rule does not
    p, _ = nfd(Instance.from_sizes([F(1, 2), F(1, 2), F(1, 10)]))
    assert sizes_of(p) == [[F(1, 2), F(1, 2)], [F(1, 10)]]


def test_ffd_examples():
    p, _ = ffd(Instance.from_sizes([1, 1, F(1, 2)]))
    assert sizes_of(p) == [[1, F(1, 2)], [1]]


def test_ties_sorted_by_id():
    inst = Instance.from_sizes([F(1, 4), F(1, 2), F(1, 4), F(1, 2)])
    order = [d.item_id for d in nfd(inst)[1]]
    assert order == [1, 3, 0, 2]


def test_run_dispatch():
    inst = Instance.from_sizes([F(1, 2)] * 5)
    assert bins_of("af", inst) == bins_of("ff", inst)
    assert run("wf-excl", inst)[0] == worst_fit(inst, WfRule.MIN_TOTAL_EXCL_MAX)[0]
    with pytest.raises(DomainError):
        run("bf", inst)


@given(instances(max_size=12))
def test_algorithms_match_reference_implementations(inst):
    sizes, v = inst.sizes, inst.variant.value
    assert sizes_of(next_fit(inst)[0]) == oracles.next_fit(sizes, v)
    assert sizes_of(first_fit(inst)[0]) == oracles.first_fit(sizes, v)
    assert sizes_of(worst_fit(inst)[0]) == oracles.worst_fit(sizes, v)
    if inst.variant is MAX:
        assert sizes_of(worst_fit(inst, WfRule.MIN_TOTAL_EXCL_MAX)[0]) == \
            oracles.worst_fit(sizes, v, "min-total-excl-max")
    assert sizes_of(nfd(inst)[0]) == oracles.nfd(sizes)
    assert sizes_of(ffd(inst)[0]) == oracles.ffd(sizes, v)


@given(instances(max_size=14))
def test_outputs_valid_and_traces_replay(inst):
    for name in ("nf", "wf", "ff", "nfd", "ffd"):
        packing, trace = run(name, inst)
        assert packing_valid(packing, inst)
        assert trace.replay(inst) == packing
        assert PackTrace.from_jsonl(trace.to_jsonl()) == trace
        assert run(name, inst) == (packing, trace)


@given(instances(max_size=14, variant=MAX))
def test_any_fit_family_fills_all_but_last_bin(inst):
    for name in ("nf", "wf", "wf-excl", "ff"):
        packing = run(name, inst)[0]
        assert all(b.total >= 1 for b in packing.bins[:-1])


@given(instances(max_size=14))
def test_decreasing_fills_all_but_last_bin(inst):
    for name in ("nfd", "ffd"):
        packing = run(name, inst)[0]
        assert all(b.total >= 1 for b in packing.bins[:-1])


@given(instances(max_size=14, variant=MIN))
def test_ffd_equals_nfd_for_min_oebp(inst):
    assert ffd(inst)[0] == nfd(inst)[0]


@given(instances(max_size=10), st.sampled_from(["lowest", "min-total"]))
def test_any_fit_choosers_reproduce_named_algorithms(inst, which):
    if which == "lowest":
        assert any_fit(inst, lowest_index)[0] == first_fit(inst)[0]
    else:
        assert any_fit(inst, min_total)[0] == worst_fit(inst)[0]


def test_first_fit_scales_to_large_inputs():
    inst = Instance.from_sizes([F(1, 100)] * 20000 + [F(99, 100)] * 200)
    p, _ = first_fit(inst)
    assert packing_valid(p, inst)
