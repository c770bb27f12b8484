import random

import numpy as np
import pytest
from hypothesis import given, settings

import oracles
from ergops.catalog import (
    ERGODIC_NOT_STRONG_4,
    PERIOD_TWO_STABLE_8,
    PERIODIC_COVER_OP_6,
    RESIDUAL_DEGREE_TWO_8,
    STRONG_NOT_QUASIGROUP_4,
    line_partition,
)
from ergops.core import cyclic_group, elements_of, is_quasigroup, mask_of, skew_square_op, xor_op
from ergops.errors import (
    AlphabetTooLarge,
    InconclusiveWithinBound,
    NotErgodic,
    NotStable,
    NotStronglyErgodic,
    StateBudgetExceeded,
)
from ergops.graph import is_ergodic, one_step_matrix
from ergops.partitions import Partition, enumerate_stable_partitions, is_finer, is_stable_partition, iterate, partition_period
from ergops.product import tensor_ops
from ergops.residue import (
    HSequence,
    build_monoid,
    definitional_strong_ergodicity,
    first_residue,
    is_augmenting,
    is_strongly_ergodic,
    non_residual_witness,
    residue_chain,
    rows_to_bool,
    strong_connectability,
    transfer_matrix,
    witness_profiles,
)
from generators import block_constant, block_respecting, up_ops

HALVES = Partition.from_sets(4, [[0, 1], [2, 3]])


def as_oracle(p):
    return oracles.as_family(p.to_lists())


# --- transfer matrices and sequences -------------------------------------------

def test_transfer_matrix_examples():
    perm = rows_to_bool(transfer_matrix(cyclic_group(3), 1 << 1), 3)
    assert (perm.sum(axis=0) == 1).all() and (perm.sum(axis=1) == 1).all()
    op = STRONG_NOT_QUASIGROUP_4
    np.testing.assert_array_equal(rows_to_bool(transfer_matrix(op, op.full), 4), one_step_matrix(op))
    rows = transfer_matrix(ERGODIC_NOT_STRONG_4, mask_of([0, 1]))
    assert [elements_of(int(r)) for r in rows] == [[2], [3], [1], [0]]


def test_h_sequences():
    with pytest.raises(ValueError):
        HSequence(ERGODIC_NOT_STRONG_4, HALVES, (mask_of([0, 2]),))
    seq = HSequence(ERGODIC_NOT_STRONG_4, HALVES, (mask_of([0, 1]),))
    per = partition_period(ERGODIC_NOT_STRONG_4, HALVES)
    assert seq.repeatable == (per == 1)
    assert seq.act(1) == mask_of([2])


def test_augmenting_examples():
    op = cyclic_group(3)
    shift = HSequence(op, Partition.singletons(3), (1 << 1,))
    assert shift.repeatable and not is_augmenting(op, Partition.singletons(3), shift)
    assert is_augmenting(op, Partition.singletons(3), shift.power(3))
    op = skew_square_op(2)
    H = Partition.from_sets(4, line_partition(2, 0))
    short = HSequence(op, H, (H.blocks[0],))
    assert not short.repeatable and not is_augmenting(op, H, short)


@settings(max_examples=40)
@given(up_ops(max_q=5))
def test_some_power_of_a_repeatable_sequence_is_augmenting(op):
    if not is_ergodic(op):
        return
    for H in enumerate_stable_partitions(op):
        per = partition_period(op, H)
        its = [iterate(op, H, i).as_partition() for i in range(per)]
        blocks = tuple(its[i].blocks[i % len(its[i])] for i in range(per))
        seq = HSequence(op, H, blocks)
        # the sequence's matrix contains a permutation, whose order bounds the search
        assert any(is_augmenting(op, H, seq.power(l)) for l in range(1, 13))


# --- monoid ----------------------------------------------------------------------

def test_monoid_examples():
    m = build_monoid(xor_op(), Partition.singletons(2))
    assert m.period == 1 and len(m.phases[0]) == 2
    m = build_monoid(STRONG_NOT_QUASIGROUP_4, Partition.trivial(4))
    assert len(m.generators[0]) == 1
    m = build_monoid(ERGODIC_NOT_STRONG_4, HALVES)
    for mat in m.reflexive():
        for x in range(4):
            assert int(mat[x]) & ~(1 << x) & HALVES.block_of(x) == 0
    with pytest.raises(StateBudgetExceeded):
        build_monoid(RESIDUAL_DEGREE_TWO_8, Partition.from_sets(8, [[0, 1, 2, 3], [4, 5, 6, 7]]), budget=2)


@settings(max_examples=30)
@given(up_ops(max_q=5))
def test_reflexive_matrices_are_closed_under_products(op):
    if not is_ergodic(op):
        return
    for H in enumerate_stable_partitions(op):
        m = build_monoid(op, H)
        refl = m.reflexive()
        have = {r.tobytes() for r in m.phases[0]}
        from ergops import kernels
        prods = kernels.compose(refl[:8], refl[:8])
        for row in prods:
            assert row.tobytes() in have
            assert all(int(row[a]) >> a & 1 for a in range(op.q))


# --- first residues --------------------------------------------------------------

def test_first_residue_examples():
    assert first_residue(ERGODIC_NOT_STRONG_4, HALVES) == Partition.singletons(4)
    for op in (ERGODIC_NOT_STRONG_4, STRONG_NOT_QUASIGROUP_4, PERIODIC_COVER_OP_6):
        full = Partition.trivial(op.q)
        assert first_residue(op, full) == full
    op = skew_square_op(3)
    for H in enumerate_stable_partitions(op):
        assert first_residue(op, H) == H


def test_first_residue_rejects_bad_inputs():
    with pytest.raises(NotErgodic):
        first_residue(PERIOD_TWO_STABLE_8, Partition.from_sets(8, [[0, 2], [1, 3], [4, 5], [6, 7]]))
    with pytest.raises(NotStable):
        first_residue(ERGODIC_NOT_STRONG_4, Partition.from_sets(4, [[0, 2], [1, 3]]))


def test_literal_residue_on_a_non_ergodic_table():
    # the literal definition still applies; the library refuses such inputs
    t = oracles.rows(PERIOD_TWO_STABLE_8)
    H = oracles.as_family([[0, 2], [1, 3], [4, 5], [6, 7]])
    assert oracles.periodic_period(t, H) == 2
    assert oracles.first_residue(t, H) == oracles.as_family([[0], [1], [2], [3], [4, 5], [6, 7]])


@settings(max_examples=40)
@given(up_ops(max_q=5))
def test_first_residue_matches_literal_definition(op):
    if not is_ergodic(op):
        return
    t = oracles.rows(op)
    for H in enumerate_stable_partitions(op):
        assert as_oracle(first_residue(op, H)) == oracles.first_residue(t, as_oracle(H))


def _structured(seed, count, shapes):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        k, s = rng.choice(shapes)
        op = (block_constant if rng.random() < 0.6 else block_respecting)(rng, k, s)
        if is_ergodic(op):
            out.append(op)
    return out


def test_first_residue_matches_literal_definition_on_structured_tables():
    degrees = set()
    for op in _structured(3, 25, [(2, 2), (2, 3), (3, 2)]):
        t = oracles.rows(op)
        for H in enumerate_stable_partitions(op):
            K = first_residue(op, H)
            assert as_oracle(K) == oracles.first_residue(t, as_oracle(H))
            degrees.add(K != H)
    assert degrees == {True, False}


def _chains(ops):
    for op in ops:
        for H in enumerate_stable_partitions(op):
            yield op, H, residue_chain(op, H)


GOLDEN_ERGODIC = [ERGODIC_NOT_STRONG_4, STRONG_NOT_QUASIGROUP_4, PERIODIC_COVER_OP_6, RESIDUAL_DEGREE_TWO_8]


@pytest.mark.parametrize("op", GOLDEN_ERGODIC, ids=lambda op: f"q{op.q}-{op.digest[:6]}")
def test_residue_laws(op):
    for _, H, chain in _chains([op]):
        K = chain.partitions[min(1, chain.degree)]
        assert is_finer(K, H) and is_stable_partition(op, K)
        assert H.norm % K.norm == 0
        for a, b in zip(chain.partitions, chain.partitions[1:]):
            assert is_finer(b, a) and a != b
        assert first_residue(op, chain.residue) == chain.residue
        for l in range(2 * partition_period(op, H) + 1):
            assert iterate(op, K, l) == first_residue(op, iterate(op, H, l).as_partition())


@settings(max_examples=25)
@given(up_ops(max_q=5))
def test_residue_laws_on_random_tables(op):
    if not is_ergodic(op):
        return
    test_residue_laws(op)


def test_residue_chain_examples():
    chain = residue_chain(ERGODIC_NOT_STRONG_4, HALVES)
    assert chain.degree == 1 and chain.residue == Partition.singletons(4)
    assert chain.to_json() == {
        "partition": [[0, 1], [2, 3]],
        "first_residue": [[0], [1], [2], [3]],
        "chain": [[[0, 1], [2, 3]], [[0], [1], [2], [3]]],
        "degree": 1,
    }
    assert residue_chain(xor_op(), Partition.singletons(2)).degree == 0
    assert residue_chain(ERGODIC_NOT_STRONG_4, Partition.trivial(4)).degree <= 2


def test_residual_degree_two():
    H = Partition.from_sets(8, [[0, 1, 2, 3], [4, 5, 6, 7]])
    chain = residue_chain(RESIDUAL_DEGREE_TWO_8, H)
    assert [p.to_lists() for p in chain.partitions] == [
        [[0, 1, 2, 3], [4, 5, 6, 7]],
        [[0, 1], [2, 3], [4, 5], [6, 7]],
        [[0], [1], [2], [3], [4], [5], [6], [7]],
    ]
    t = oracles.rows(RESIDUAL_DEGREE_TWO_8)
    for a, b in zip(chain.partitions, chain.partitions[1:]):
        assert oracles.first_residue(t, as_oracle(a)) == as_oracle(b)


# --- strong ergodicity -----------------------------------------------------------

def test_strong_ergodicity_examples():
    assert is_strongly_ergodic(STRONG_NOT_QUASIGROUP_4)
    assert not is_strongly_ergodic(ERGODIC_NOT_STRONG_4)
    assert not is_strongly_ergodic(PERIODIC_COVER_OP_6)
    assert not is_strongly_ergodic(RESIDUAL_DEGREE_TWO_8)
    assert not is_strongly_ergodic(PERIOD_TWO_STABLE_8)
    assert non_residual_witness(ERGODIC_NOT_STRONG_4) == HALVES


def test_definitional_examples():
    assert definitional_strong_ergodicity(xor_op(), length_bound=8)
    assert definitional_strong_ergodicity(STRONG_NOT_QUASIGROUP_4, length_bound=32)
    profiles = witness_profiles(ERGODIC_NOT_STRONG_4, length_bound=32)
    assert any(p.partition == HALVES and p.first is None for p in profiles)
    assert not definitional_strong_ergodicity(ERGODIC_NOT_STRONG_4, length_bound=32)
    with pytest.raises(AlphabetTooLarge):
        definitional_strong_ergodicity(PERIODIC_COVER_OP_6)
    with pytest.raises(InconclusiveWithinBound):
        witness_profiles(STRONG_NOT_QUASIGROUP_4, length_bound=1)


def test_witness_profiles_match_explicit_sequences():
    op = STRONG_NOT_QUASIGROUP_4
    t = oracles.rows(op)
    window = range(1, 25)
    for p in witness_profiles(op):
        want = oracles.good_lengths(t, as_oracle(p.partition), p.x, window)
        end = p.cycle_start + p.cycle_length
        got = [n for n in window
               if n in p.good or (n >= end and (p.cycle_start + (n - p.cycle_start) % p.cycle_length) in p.good)]
        assert got == want


def test_strong_connectability():
    assert strong_connectability(STRONG_NOT_QUASIGROUP_4) == 5
    t = oracles.rows(STRONG_NOT_QUASIGROUP_4)
    window = list(range(1, 25))
    worst = 0
    for H in oracles.stable_partitions(t):
        for x in range(4):
            good = set(oracles.good_lengths(t, H, x, window))
            d = min(d for d in window if all(n in good for n in range(d, 25)))
            worst = max(worst, d)
    assert worst == 5
    for op in (xor_op(), cyclic_group(3), cyclic_group(4), skew_square_op(2)):
        assert strong_connectability(op) == 1
    with pytest.raises(NotStronglyErgodic):
        strong_connectability(ERGODIC_NOT_STRONG_4)


def test_strong_connectability_of_products():
    op = tensor_ops([STRONG_NOT_QUASIGROUP_4, xor_op()])
    assert strong_connectability(op, max_q=8) >= max(strong_connectability(STRONG_NOT_QUASIGROUP_4),
                                                     strong_connectability(xor_op()))


def test_explicit_sequences_agree_on_small_tables():
    for op in (STRONG_NOT_QUASIGROUP_4, ERGODIC_NOT_STRONG_4, xor_op(), cyclic_group(3)):
        assert oracles.strongly_ergodic_by_sequences(oracles.rows(op), 6) == is_strongly_ergodic(op)


@settings(max_examples=60)
@given(up_ops(max_q=4))
def test_residue_test_matches_definition(op):
    assert is_strongly_ergodic(op) == definitional_strong_ergodicity(op)


def test_residue_test_matches_definition_on_structured_tables():
    for op in _structured(9, 30, [(2, 2)]):
        assert is_strongly_ergodic(op) == definitional_strong_ergodicity(op)


@settings(max_examples=30)
@given(up_ops(max_q=4))
def test_quasigroups_are_strongly_ergodic(op):
    if is_quasigroup(op):
        assert is_strongly_ergodic(op)
