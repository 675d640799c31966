import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from nonlocal_toys.lp import find_feasible_point
from nonlocal_toys.pairwise import (
    ASSIGNMENTS,
    CHSH_PATTERNS,
    CROSS_PAIRS,
    OUTCOME_PAIRS,
    PAIRS,
    PR_BOX_TABLES,
    UNIFORM_PAIR,
    InconsistentState,
    InvalidState,
    Obs,
    Party,
    PairwiseState,
    chsh,
    correlator,
    deterministic_state,
    from_global,
    fully_correlated_state,
    joint_observable,
    joint_observable_marginals,
    lhv_feasibility,
    marginal,
    mix_states,
    pair_key,
    pr_box_state,
    product_state,
    validate,
)
from nonlocal_toys.prob import BadWeights, Dist

import oracles
from states import EXTRA_STATES, VERTEX_STATES, box_state, correlated, frustrated_state, random_state

HALF = F(1, 2)
A1, A2, B1, B2 = Obs


# PR-box tables, transcribed cell by cell: rows B_j = +1/-1, columns A_i = +1/-1.
PR_TABLES = {
    (A1, B1): {(1, 1): HALF, (-1, 1): 0, (1, -1): 0, (-1, -1): HALF},
    (A2, B1): {(1, 1): HALF, (-1, 1): 0, (1, -1): 0, (-1, -1): HALF},
    (A1, B2): {(1, 1): HALF, (-1, 1): 0, (1, -1): 0, (-1, -1): HALF},
    (A2, B2): {(1, 1): 0, (-1, 1): HALF, (1, -1): HALF, (-1, -1): 0},
}


def test_observables():
    assert len(Obs) == 4
    assert [o.party for o in Obs] == [Party.ALICE, Party.ALICE, Party.BOB, Party.BOB]
    assert len(PAIRS) == 6
    assert pair_key(B2, A1) == (A1, B2)


def test_pr_box_tables_cell_by_cell():
    s = pr_box_state()
    for k, cells in PR_TABLES.items():
        for op, p in cells.items():
            assert s.prob(*k, *op) == p
            assert PR_BOX_TABLES[k][op] == p
    assert s.prob(A1, B1, 1, 1) == HALF
    assert s.prob(A1, B1, 1, -1) == 0


def test_pr_box_local_tables_uniform():
    s = pr_box_state()
    assert s.table(A1, A2) == UNIFORM_PAIR
    assert s.table(B1, B2) == UNIFORM_PAIR


def test_pr_box_with_other_local_joint():
    s = pr_box_state(alice_local=correlated(1))
    assert validate(s).ok
    assert chsh(s).value == 4


def test_pr_box_rejects_local_joint_with_bad_marginals():
    with pytest.raises(InvalidState):
        pr_box_state(alice_local={(1, 1): F(3, 4), (-1, -1): F(1, 4)})


def test_validate_pr_box_and_product():
    assert validate(pr_box_state()).ok
    assert validate(product_state()).ok
    assert not validate(pr_box_state()).failures


def test_validate_flags_no_signaling_violation():
    tables = product_state().tables
    # A1 marginal 3/4 on +1 through (A1, B2), 1/2 everywhere else.
    tables[(A1, B2)] = {(1, 1): F(3, 8), (1, -1): F(3, 8), (-1, 1): F(1, 8), (-1, -1): F(1, 8)}
    rep = validate(PairwiseState(tables))
    assert not rep.ok
    kinds = {c.kind for c in rep.failures}
    assert "no-signaling" in kinds
    ns = [c for c in rep.failures if c.kind == "no-signaling"]
    assert any("A1" in c.subject and "B1" in c.subject and "B2" in c.subject for c in ns)


def test_validate_flags_normalization_and_local_marginal():
    tables = product_state().tables
    tables[(A1, A2)] = {(1, 1): F(1, 2), (1, -1): F(1, 2), (-1, 1): 0, (-1, -1): F(1, 2)}
    rep = validate(PairwiseState(tables))
    kinds = {c.kind for c in rep.failures}
    assert "normalization" in kinds
    assert "local-marginal" in kinds


def test_constructor_reorders_reversed_keys():
    s = pr_box_state()
    tables = s.tables
    rev = {(b, a): {(y, x): p for (x, y), p in t.items()} for (a, b), t in tables.items()}
    assert PairwiseState(rev) == s


def test_marginals():
    assert marginal(pr_box_state(), A1) == Dist.uniform([-1, 1])
    det = deterministic_state((1, 1, 1, 1))
    assert marginal(det, A2) == Dist.point(1)
    biased = product_state({B2: F(3, 4)})
    assert marginal(biased, B2) == Dist({1: F(3, 4), -1: F(1, 4)})


def test_marginal_inconsistent():
    tables = product_state().tables
    tables[(A1, B2)] = {(1, 1): F(3, 8), (1, -1): F(3, 8), (-1, 1): F(1, 8), (-1, -1): F(1, 8)}
    with pytest.raises(InconsistentState):
        marginal(PairwiseState(tables), A1)


def test_correlators():
    s = pr_box_state()
    assert correlator(s, A1, B1) == 1
    assert correlator(s, A2, B2) == -1
    assert correlator(product_state(), A1, B1) == 0


def test_chsh_patterns():
    assert len(set(CHSH_PATTERNS)) == 8
    assert CHSH_PATTERNS[0] == (1, 1, 1, -1)
    assert all(p.count(-1) in (1, 3) for p in CHSH_PATTERNS)


def test_chsh_pr_box():
    res = chsh(pr_box_state())
    # Oracle: S = E11 + E12 + E21 - E22 from the PR-box correlators.
    e = {k: sum(a * b * p for (a, b), p in t.items()) for k, t in PR_TABLES.items()}
    assert e[(A1, B1)] + e[(A1, B2)] + e[(A2, B1)] - e[(A2, B2)] == 4
    assert res.value == 4
    assert res.pattern == (1, 1, 1, -1)


def test_chsh_uniform_product():
    assert chsh(product_state()).value == 0


@pytest.mark.parametrize("v", ASSIGNMENTS)
def test_chsh_vertices_classical(v):
    assert chsh(deterministic_state(v)).value <= 2


def test_chsh_all_plus_attains_two():
    assert chsh(deterministic_state((1, 1, 1, 1))).value == 2


def test_chsh_relabeling_invariant():
    for s in EXTRA_STATES[:8]:
        assert chsh(s).value == 4


def test_joint_observable_pr_box():
    c = joint_observable(pr_box_state(), Party.ALICE)
    assert c == Dist.uniform(range(4))
    ma, mb = joint_observable_marginals(c)
    assert ma == mb == Dist.uniform([-1, 1])


def test_joint_observable_deterministic():
    c = joint_observable(deterministic_state((1, -1, 1, 1)), Party.ALICE)
    assert c == Dist.point(2)


@pytest.mark.parametrize("s", VERTEX_STATES[:4] + EXTRA_STATES + [product_state({A1: F(1, 3), B2: F(5, 7)})])
def test_joint_observable_marginals_exact(s):
    for party, (x, y) in ((Party.ALICE, (A1, A2)), (Party.BOB, (B1, B2))):
        mx, my = joint_observable_marginals(joint_observable(s, party))
        assert mx == marginal(s, x)
        assert my == marginal(s, y)


def test_lhv_pr_box_infeasible():
    v = lhv_feasibility(pr_box_state())
    assert not v.feasible
    assert v.chsh_witness.value == 4
    assert v.describe() == "INFEASIBLE; CHSH witness 4/1 > 2"


def test_lhv_product_uniform_witness():
    v = lhv_feasibility(product_state())
    assert v.feasible
    assert v.witness == Dist.uniform(ASSIGNMENTS)


def test_lhv_fully_correlated():
    v = lhv_feasibility(fully_correlated_state())
    assert v.feasible
    assert v.witness == Dist({(1, 1, 1, 1): HALF, (-1, -1, -1, -1): HALF})


def test_lhv_frustrated_has_no_chsh_witness():
    s = frustrated_state()
    assert validate(s).ok
    assert chsh(s).value == 2
    v = lhv_feasibility(s)
    assert not v.feasible
    assert v.chsh_witness is None
    assert v.describe() == "INFEASIBLE; no CHSH witness"


def test_lhv_rejects_invalid_state():
    tables = product_state().tables
    tables[(A1, A2)] = {(1, 1): 1, (-1, -1): 1}
    with pytest.raises(InvalidState):
        lhv_feasibility(PairwiseState(tables))


def test_lhv_agrees_with_basis_enumeration():
    rng = random.Random(11)
    corpus = [pr_box_state(), product_state(), frustrated_state()] + [random_state(rng) for _ in range(25)]
    seen = set()
    for s in corpus:
        tables = {(x.name, y.name): s.table(x, y) for x, y in PAIRS}
        oracle = oracles.brute_force_feasible(tables)
        verdict = lhv_feasibility(s)
        assert verdict.feasible == (oracle is not None)
        if oracle is not None:
            assert from_global(Dist(dict(zip(ASSIGNMENTS, oracle)))) == s
        seen.add(verdict.feasible)
    assert seen == {True, False}


def test_mix_states_identity_and_errors():
    s = pr_box_state()
    assert mix_states([(F(1), s)]) == s
    with pytest.raises(BadWeights):
        mix_states([(HALF, s)])


def test_mix_pr_and_anti_pr():
    anti = box_state({(A1, B1): -1, (A1, B2): 1, (A2, B1): 1, (A2, B2): 1})
    m = mix_states([(HALF, pr_box_state()), (HALF, anti)])
    assert validate(m).ok
    # Tablewise average: the two blocks that flip sign cancel, the others stay.
    assert correlator(m, A1, B1) == 0
    assert correlator(m, A2, B2) == 0
    assert correlator(m, A1, B2) == 1
    assert correlator(m, A2, B1) == 1
    assert chsh(m).value == 2


def test_mix_pr_and_negated_pr():
    neg = box_state({(A1, B1): -1, (A1, B2): -1, (A2, B1): -1, (A2, B2): 1})
    m = mix_states([(HALF, pr_box_state()), (HALF, neg)])
    assert all(correlator(m, a, b) == 0 for a, b in CROSS_PAIRS)
    assert m == product_state()


def test_mixture_of_feasible_is_feasible():
    s = mix_states([(F(1, 3), product_state()), (F(2, 3), fully_correlated_state())])
    assert lhv_feasibility(s).feasible


states_strategy = st.builds(lambda seed: random_state(random.Random(seed)), st.integers(0, 10**9))


@settings(max_examples=40, deadline=None)
@given(states_strategy, states_strategy, st.integers(1, 20), st.integers(1, 20))
def test_mix_preserves_validity(s, t, i, j):
    m = mix_states([(F(i, i + j), s), (F(j, i + j), t)])
    assert validate(m).ok


@settings(max_examples=60, deadline=None)
@given(states_strategy)
def test_lhv_chsh_dichotomy(s):
    v = lhv_feasibility(s)
    value = chsh(s).value
    if v.feasible:
        assert value <= 2
        assert from_global(v.witness) == s
    if value > 2:
        assert not v.feasible


def test_simplex_small_systems():
    # x + y = 1, x - y = 0 -> (1/2, 1/2)
    assert find_feasible_point([[1, 1], [1, -1]], [1, 0]) == [HALF, HALF]
    # x + y = 1, x + y = 2 -> infeasible
    assert find_feasible_point([[1, 1], [1, 1]], [1, 2]) is None
    # x - y = -1 needs y >= 1
    x = find_feasible_point([[1, -1]], [-1])
    assert x is not None and x[0] - x[1] == -1 and min(x) >= 0
    # redundant rows
    assert find_feasible_point([[1, 1], [2, 2]], [1, 2]) is not None


def test_tables_cover_all_cells():
    for k in PAIRS:
        assert set(pr_box_state().table(*k)) == set(OUTCOME_PAIRS)
    assert set(PR_TABLES) == set(CROSS_PAIRS)
