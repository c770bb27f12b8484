import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from ergops.catalog import (
    ERGODIC_NOT_STRONG_4,
    PERIOD_TWO_STABLE_8,
    PERIODIC_COVER_6,
    PERIODIC_COVER_OP_6,
    RESIDUAL_DEGREE_TWO_8,
    STRONG_NOT_QUASIGROUP_4,
    UNBALANCED_PERIODIC_4,
    UNSTABLE_WEDGE_8,
    line_partition,
)
from ergops.core import BinaryOperation, cyclic_group, set_product, skew_square_op, xor_op
from ergops.errors import IterationBudgetExceeded, NotACover, NotErgodic, NotStronglyErgodic
from ergops.graph import is_ergodic
from ergops.partitions import (
    Partition,
    SubsetFamily,
    cover_components,
    cover_orbit_analysis,
    enumerate_periodic_partitions,
    enumerate_set_partitions,
    enumerate_stable_partitions,
    enumerate_stable_partitions_closure,
    enumerate_stable_partitions_exhaustive,
    generated_partition,
    is_finer,
    is_periodic_partition,
    is_stable_partition,
    iterate,
    orbit,
    partition_period,
    step,
    wedge,
)
from ergops.product import tensor_ops
from generators import block_constant, covers, random_up, up_ops


def P(q, *blocks):
    return Partition.from_sets(q, blocks)


def as_oracle(family):
    return oracles.as_family(family.to_lists())


# --- families ----------------------------------------------------------------

def test_partition_validation():
    with pytest.raises(ValueError):
        Partition.from_sets(3, [[0, 1], [1, 2]])
    with pytest.raises(ValueError):
        Partition.from_sets(3, [[0, 1]])
    assert P(4, [2, 3], [0, 1]).to_lists() == [[0, 1], [2, 3]]
    assert Partition.from_labels([5, 5, 1, 1]) == P(4, [0, 1], [2, 3])
    assert P(4, [0, 1], [2, 3]).is_balanced and not P(4, [0, 1], [2], [3]).is_balanced
    assert P(6, [0, 1, 2], [3, 4, 5]).norm == 3


@pytest.mark.parametrize("q, bell", [(1, 1), (2, 2), (3, 5), (4, 15), (5, 52), (6, 203), (7, 877)])
def test_set_partition_counts(q, bell):
    parts = list(enumerate_set_partitions(q))
    assert len(parts) == bell
    assert len(set(parts)) == bell


def test_is_finer_examples():
    assert is_finer(Partition.singletons(4), P(4, [0, 1], [2, 3]))
    assert is_finer(P(4, [0, 1], [2, 3]), Partition.trivial(4))
    assert not is_finer(SubsetFamily.from_sets(4, [[0, 1]]), P(4, [0, 2], [1, 3]))


def test_cover_components_examples():
    H = P(4, [0, 1], [2, 3])
    assert cover_components(H) == H
    assert cover_components(SubsetFamily.from_sets(6, PERIODIC_COVER_6)) == P(6, [0, 1, 2], [3, 4, 5])
    assert cover_components(SubsetFamily.from_sets(4, [[0, 1], [1, 2], [2, 3]])) == Partition.trivial(4)
    with pytest.raises(NotACover):
        cover_components(SubsetFamily.from_sets(4, [[0, 1]]))


# --- dynamics ----------------------------------------------------------------

@given(up_ops())
def test_step_fixes_the_whole_alphabet(op):
    assert step(op, Partition.trivial(op.q)) == Partition.trivial(op.q)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_lines_rotate_under_the_skew_square(n):
    op = skew_square_op(n)
    for slope in range(n):
        here = P(n * n, *line_partition(n, slope))
        assert step(op, here) == P(n * n, *line_partition(n, slope + 1))
    orb = orbit(op, P(n * n, *line_partition(n, 0)))
    assert (orb.preperiod, orb.cycle_length) == (0, n)


def test_periodic_cover_is_a_fixed_point():
    A = SubsetFamily.from_sets(6, PERIODIC_COVER_6)
    assert step(PERIODIC_COVER_OP_6, A) == A


def test_periodicity_examples():
    assert is_periodic_partition(xor_op(), Partition.trivial(2)) == (True, 1)
    H = P(4, [0, 1], [2], [3])
    assert is_periodic_partition(UNBALANCED_PERIODIC_4, H) == (True, 2)
    assert iterate(UNBALANCED_PERIODIC_4, H, 2) == H
    assert not is_stable_partition(UNBALANCED_PERIODIC_4, H)
    assert is_periodic_partition(PERIOD_TWO_STABLE_8, P(8, [0, 2], [1, 3], [4, 5], [6, 7])) == (True, 2)
    assert is_stable_partition(ERGODIC_NOT_STRONG_4, P(4, [0, 1], [2, 3]))
    assert is_stable_partition(xor_op(), Partition.singletons(2))
    assert partition_period(xor_op(), Partition.singletons(2)) == 1


def test_orbit_budget_is_enforced():
    H = P(9, *line_partition(3, 0))
    with pytest.raises(IterationBudgetExceeded):
        orbit(skew_square_op(3), H, max_iter=2)


@given(up_ops(max_q=5), st.data())
def test_orbits_match_the_oracle(op, data):
    q = op.q
    labels = data.draw(st.lists(st.integers(0, q - 1), min_size=q, max_size=q))
    H = Partition.from_labels(labels)
    orb = orbit(op, H)
    t = oracles.rows(op)
    fam = as_oracle(H)
    for n in range(orb.preperiod + orb.cycle_length + 2):
        assert as_oracle(orb.at(n)) == fam
        fam = oracles.family_step(t, fam)
    ok, per = is_periodic_partition(op, H)
    assert per == oracles.periodic_period(t, as_oracle(H))


def test_non_periodic_partition_has_a_preperiod():
    H = P(4, [0, 2], [1, 3])
    assert not is_periodic_partition(ERGODIC_NOT_STRONG_4, H)[0]
    orb = orbit(ERGODIC_NOT_STRONG_4, H)
    assert orb.preperiod > 0
    assert is_periodic_partition(ERGODIC_NOT_STRONG_4, orb.at(orb.preperiod))[0]


# --- stable partitions ---------------------------------------------------------

def test_enumeration_examples():
    assert enumerate_stable_partitions(xor_op()) == [Partition.singletons(2), Partition.trivial(2)]
    found = enumerate_stable_partitions(ERGODIC_NOT_STRONG_4)
    assert P(4, [0, 1], [2, 3]) in found and Partition.singletons(4) in found
    assert P(8, [0, 2], [1, 3], [4, 5], [6, 7]) in enumerate_stable_partitions(PERIOD_TWO_STABLE_8)
    with pytest.raises(NotErgodic):
        enumerate_stable_partitions_closure(PERIOD_TWO_STABLE_8)


@settings(max_examples=40)
@given(up_ops(max_q=5))
def test_stable_partitions_match_the_oracle(op):
    want = set(oracles.stable_partitions(oracles.rows(op)))
    assert {as_oracle(p) for p in enumerate_stable_partitions_exhaustive(op)} == want
    if is_ergodic(op):
        assert {as_oracle(p) for p in enumerate_stable_partitions_closure(op)} == want


def test_closure_matches_exhaustive_on_structured_tables():
    rng = random.Random(11)
    checked = 0
    for _ in range(40):
        op = block_constant(rng, rng.choice([2, 3]), rng.choice([2, 3]))
        if not is_ergodic(op):
            continue
        checked += 1
        assert enumerate_stable_partitions_closure(op) == enumerate_stable_partitions_exhaustive(op)
    assert checked >= 10


@settings(max_examples=40)
@given(up_ops(max_q=6))
def test_periodic_iterates_keep_size_and_period(op):
    for H in enumerate_periodic_partitions(op):
        per = partition_period(op, H)
        current = H
        for _ in range(per):
            current = step(op, current)
            assert current.is_partition and len(current) == len(H)
            assert partition_period(op, current) == per
            if H.is_balanced:
                assert current.as_partition().norm == H.norm
        assert current == H


@settings(max_examples=40)
@given(up_ops(max_q=6))
def test_ergodic_periodic_partitions_are_balanced(op):
    if is_ergodic(op):
        assert all(H.is_balanced for H in enumerate_periodic_partitions(op))


@given(up_ops(max_q=6), st.data())
def test_step_sizes_never_shrink(op, data):
    sets = data.draw(covers(op.q))
    F = SubsetFamily(op.q, sets)
    G = step(op, F)
    assert G.min_size >= F.min_size
    assert G.max_size >= F.max_size


@settings(max_examples=40)
@given(up_ops(max_q=6))
def test_one_right_factor_suffices_for_periodic_partitions(op):
    for H in enumerate_periodic_partitions(op):
        nxt = step(op, H)
        for right in H.blocks:
            assert SubsetFamily(op.q, (set_product(op, left, right) for left in H.blocks)) == nxt


def _coset_partitions(op, subgroups):
    out = []
    for sub in subgroups:
        out.append(Partition(op.q, {sum(1 << op(g, h) for h in sub) for g in range(op.q)}))
    return sorted(out, key=lambda p: (p.max_size, p.members))


def test_periodic_partitions_of_groups_are_cosets():
    z4 = cyclic_group(4)
    assert enumerate_periodic_partitions(z4) == _coset_partitions(z4, [[0], [0, 2], [0, 1, 2, 3]])
    klein = tensor_ops([xor_op(), xor_op()])
    subgroups = [[0], [0, 1], [0, 2], [0, 3], [0, 1, 2, 3]]
    assert enumerate_periodic_partitions(klein) == _coset_partitions(klein, subgroups)


def test_wedge_examples():
    H = P(4, [0, 1], [2, 3])
    assert wedge(H, Partition.trivial(4)) == H
    H1 = P(8, [0, 1], [2, 3], [4, 5], [6, 7])
    H2 = P(8, [0, 2], [1, 3], [4, 5], [6, 7])
    assert is_periodic_partition(UNSTABLE_WEDGE_8, H1) == (True, 1)
    assert is_periodic_partition(UNSTABLE_WEDGE_8, H2) == (True, 2)
    W = wedge(H1, H2)
    assert W == P(8, [0], [1], [2], [3], [4, 5], [6, 7])
    assert is_periodic_partition(UNSTABLE_WEDGE_8, W)[0] and not W.is_balanced


@settings(max_examples=30)
@given(up_ops(max_q=6))
def test_wedge_of_stable_partitions_is_stable_for_ergodic_ops(op):
    if not is_ergodic(op):
        return
    stable = enumerate_stable_partitions(op)
    for a in stable:
        for b in stable:
            assert is_stable_partition(op, wedge(a, b))


# --- generated partitions ---------------------------------------------------------

def test_generated_partition_examples():
    H = P(4, [0, 1], [2, 3])
    assert generated_partition(ERGODIC_NOT_STRONG_4, H) == H
    assert generated_partition(xor_op(), SubsetFamily.from_sets(2, [[0, 1]])) == Partition.trivial(2)
    A = SubsetFamily.from_sets(8, [[0, 1], [2, 3]])
    assert generated_partition(UNSTABLE_WEDGE_8, A) == P(8, [0, 1], [2, 3], [4], [5], [6], [7])
    with pytest.raises(NotErgodic):
        generated_partition(UNSTABLE_WEDGE_8, A, stable=True)


def test_no_finest_stable_coarsening_without_ergodicity():
    A = SubsetFamily.from_sets(8, [[0, 1], [2, 3]])
    coarser = [H for H in enumerate_stable_partitions(UNSTABLE_WEDGE_8) if is_finer(A, H)]
    assert coarser
    assert not any(all(is_finer(H, other) for other in coarser) for H in coarser)


@settings(max_examples=60)
@given(up_ops(max_q=6), st.data())
def test_closure_and_wedge_generate_the_same_partition(op, data):
    if not is_ergodic(op):
        return
    A = SubsetFamily(op.q, data.draw(covers(op.q)))
    by_closure = generated_partition(op, A, method="closure")
    assert by_closure == generated_partition(op, A, method="wedge")
    assert is_stable_partition(op, by_closure) and is_finer(A, by_closure)


def test_generated_partitions_on_larger_structured_tables():
    rng = random.Random(5)
    for _ in range(15):
        op = block_constant(rng, 2, 4)
        if not is_ergodic(op):
            continue
        for _ in range(5):
            A = SubsetFamily(8, [rng.randrange(1, 256) for _ in range(2)] + [255 ^ 1, 1])
            assert generated_partition(op, A, method="closure") == generated_partition(op, A, method="wedge")


@settings(max_examples=60)
@given(up_ops(max_q=6), st.data())
def test_generation_commutes_with_stepping(op, data):
    """Experimental check that stepping a cover and generating commute."""
    if not is_ergodic(op):
        return
    A = SubsetFamily(op.q, data.draw(covers(op.q)))
    G = generated_partition(op, A)
    An = A
    for n in range(1, 6):
        An = step(op, An)
        assert generated_partition(op, An) == iterate(op, G, n), f"counterexample n={n} A={A.to_lists()}"


# --- cover orbits ------------------------------------------------------------

def test_cover_orbit_of_a_stable_partition():
    H = P(4, [0, 1], [2, 3])
    rep = cover_orbit_analysis(STRONG_NOT_QUASIGROUP_4, Partition.trivial(4))
    assert rep.witness == 1
    per = partition_period(ERGODIC_NOT_STRONG_4, H)
    rep = cover_orbit_analysis(ERGODIC_NOT_STRONG_4, H, require_strong=False)
    assert rep.generated == H and rep.witness == per


def test_nested_covers_are_fixed_points_even_for_groups():
    # a singleton next to the whole alphabet survives every step, so the cover
    # never collapses to the partition it generates
    for sets in ([[0], [0, 1], [1]], [[0], [0, 1]]):
        A = SubsetFamily.from_sets(2, sets)
        assert step(xor_op(), A) == A
        rep = cover_orbit_analysis(xor_op(), A)
        assert rep.generated == Partition.trivial(2)
        assert rep.witness is None
    A = SubsetFamily.from_sets(2, [[0], [1]])
    assert cover_orbit_analysis(xor_op(), A).witness == 1


@given(up_ops(max_q=5))
def test_family_of_all_subsets_is_fixed(op):
    everything = SubsetFamily(op.q, range(1, op.full + 1))
    assert step(op, everything) == everything


def test_cover_orbit_fails_without_strong_ergodicity():
    A = SubsetFamily.from_sets(6, PERIODIC_COVER_6)
    with pytest.raises(NotStronglyErgodic):
        cover_orbit_analysis(PERIODIC_COVER_OP_6, A)
    rep = cover_orbit_analysis(PERIODIC_COVER_OP_6, A, require_strong=False)
    assert rep.witness is None
    assert rep.generated == P(6, [0, 1, 2], [3, 4, 5])
    assert rep.components_commute
    assert not rep.periodic_iterate_is_stable


def test_residual_degree_two_table_generates_a_fine_partition():
    A = SubsetFamily.from_sets(8, [[0, 1], [2, 3], [4, 5], [6, 7]])
    H = generated_partition(RESIDUAL_DEGREE_TWO_8, A)
    assert is_stable_partition(RESIDUAL_DEGREE_TWO_8, H) and is_finer(A, H)
