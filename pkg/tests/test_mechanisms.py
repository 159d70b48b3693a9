import math
from fractions import Fraction
from itertools import combinations

import pytest

from oracles import evaluate_by_enumeration, view_for
from secsig.core import (
    Knowledge,
    MechanismPolicy,
    ScenarioSpec,
    ScenarioMismatch,
    SecsigError,
    UtilityMode,
    validate_instance,
)
from secsig.evaluate import exact_evaluate
from secsig.instances import (
    RandomFamily,
    negatively_correlated,
    random_instance,
)
from secsig.mechanisms import (
    BestSoFarTable,
    E_RATIONAL,
    Selector,
    adaptive_elementary,
    best_so_far_mechanism,
    dynkin,
    elementary,
    first_opt,
    growing_pareto,
    nested_lp_mechanism,
    pareto_mechanism,
    sample_floor_inv_e,
    sample_floor_inv_sqrt3,
    shrinking_pareto,
    simple_secretary,
    trivial,
)

F = Fraction
CARD = UtilityMode.CARDINAL
ORD = UtilityMode.ORDINAL

SEC = ScenarioSpec(Knowledge.SECRETARY, False, CARD, CARD)
BASIC = ScenarioSpec(Knowledge.BASIC, False, CARD, CARD)
BASIC_D = ScenarioSpec(Knowledge.BASIC, True, CARD, CARD)
SEC_D_ORD = ScenarioSpec(Knowledge.SECRETARY, True, ORD, ORD)


def hire_prob_given_set(inst, policy, subset_ids, t, knowledge=Knowledge.SECRETARY):
    """P[HIRE at round t | this arrival set], by enumerating subset orders."""
    from itertools import permutations

    from secsig.core import Action, SenderView, Signal

    cands = {c.id: c for c in inst.candidates}
    total = F(0)
    orders = list(permutations(subset_ids))
    prior = inst if knowledge is Knowledge.BASIC else None
    for order in orders:
        reach = F(1)
        for r in range(1, t + 1):
            view = SenderView(round=r, arrived=tuple(cands[i] for i in order[:r]),
                              past_signals=(Signal.NOT,) * (r - 1),
                              past_actions=(Action.REJECTED,) * (r - 1),
                              knowledge=knowledge, prior_instance=prior)
            q = policy(view)
            if r == t:
                total += reach * q
            else:
                reach *= 1 - q
    return total / len(orders)


class TestParetoMechanism:
    def test_fig1_branches(self, fig1):
        mech = pareto_mechanism(fig1, CARD)
        weights = sorted(w for w, _ in mech.branches)
        assert weights == [F(1, 2), F(1, 2)]
        rep = exact_evaluate(fig1, mech, BASIC)
        assert rep.sender_eu == 9 and rep.receiver_eu == 9

    def test_singleton(self):
        inst = validate_instance([(5, 7)])
        mech = pareto_mechanism(inst, CARD)
        assert len(mech.branches) == 1
        rep = exact_evaluate(inst, mech, BASIC)
        assert rep.hire_round_pmf == (1,)


class TestGrowingPareto:
    def test_sample_phase_never_signals(self):
        inst = random_instance(5, 21, RandomFamily.UNIFORM_GRID)
        mech = growing_pareto(5, 2)
        policy = mech.branches[0][1]
        for t in (1, 2):
            for subset in combinations(range(5), t):
                assert hire_prob_given_set(inst, policy, subset, t) == 0

    def test_round3_probability_matches_enumeration(self):
        # every 3-subset gives exactly 1/3 at n=4, s=2
        inst = random_instance(4, 22, RandomFamily.UNIFORM_GRID)
        policy = growing_pareto(4, 2).branches[0][1]
        for subset in combinations(range(4), 3):
            assert hire_prob_given_set(inst, policy, subset, 3) == F(1, 3)

    def test_reach_last_round_probability(self):
        # P[NOT through n-1] = s/(n-1) = 2/3 at n=4, s=2
        inst = random_instance(4, 23, RandomFamily.UNIFORM_GRID)
        rep = exact_evaluate(inst, growing_pareto(4, 2), SEC)
        assert rep.hire_round_pmf[3] == F(2, 3)
        assert sum(rep.hire_round_pmf) == 1

    def test_history_independence_exhaustive(self):
        # P[HIRE at t | arrival set] identical across all equal-size sets
        for n, s in ((5, 2), (6, 3)):
            inst = random_instance(n, 24 + n, RandomFamily.UNIFORM_GRID)
            policy = growing_pareto(n, s).branches[0][1]
            for t in range(s + 1, n):
                probs = {hire_prob_given_set(inst, policy, sub, t)
                         for sub in combinations(range(n), t)}
                assert probs == {F(s, t * (t - 1))}

    def test_sample_size_bounds(self):
        with pytest.raises(SecsigError):
            growing_pareto(5, 0)
        with pytest.raises(SecsigError):
            growing_pareto(5, 5)

    def test_default_sample_sizes(self):
        assert sample_floor_inv_sqrt3(1000) == 577
        assert sample_floor_inv_e(10) == 3
        assert sample_floor_inv_e(1000) == 367


class TestShrinkingPareto:
    def test_fig1_round1(self, fig1):
        policy = shrinking_pareto(fig1, CARD).branches[0][1]
        total = sum(policy(view_for(fig1, BASIC_D, (p,), 1)) for p in range(8))
        assert total == 1  # someone is picked; each arrives first w.p. 1/8
        rep = exact_evaluate(fig1, shrinking_pareto(fig1, CARD), BASIC_D)
        assert rep.hire_round_pmf[0] == F(1, 8)

    def test_singleton(self):
        inst = validate_instance([(5, 7)])
        policy = shrinking_pareto(inst, CARD).branches[0][1]
        assert policy(view_for(inst, BASIC_D, (0,), 1)) == 1

    def test_two_candidates(self):
        inst = validate_instance([(0, 1), (2, 0)])
        rep = exact_evaluate(inst, shrinking_pareto(inst, CARD), BASIC_D)
        assert rep.hire_round_pmf[0] == F(1, 2)


class TestElementary:
    def test_success_probabilities(self):
        inst = negatively_correlated(3, 5)
        rep = exact_evaluate(inst, elementary(inst), ScenarioSpec(Knowledge.BASIC, False, ORD, ORD))
        assert rep.sender_success == F(2, 3)
        assert rep.receiver_success == F(1, 3)  # 1/n both from the coin and the wait

    def test_receiver_branch_weight(self):
        inst = negatively_correlated(4, 5)
        mech = elementary(inst)
        assert sorted(w for w, _ in mech.branches) == [F(1, 4), F(3, 4)]

    def test_singleton(self):
        inst = validate_instance([(5, 7)])
        rep = exact_evaluate(inst, elementary(inst), BASIC)
        assert rep.hire_round_pmf == (1,)


class TestAdaptiveElementary:
    @pytest.mark.parametrize("n,expect", [(2, F(1, 2)), (3, F(2, 3)), (5, F(4, 5))])
    def test_success_closed_form(self, n, expect):
        inst = negatively_correlated(n, 6)
        rep = exact_evaluate(inst, adaptive_elementary(inst),
                             ScenarioSpec(Knowledge.BASIC, True, ORD, ORD))
        assert rep.sender_success == expect

    def test_n3_matches_order_enumeration(self):
        inst = negatively_correlated(3, 6)
        oracle = evaluate_by_enumeration(inst, adaptive_elementary(inst),
                                         ScenarioSpec(Knowledge.BASIC, True, ORD, ORD))
        assert oracle["sender_success"] == F(2, 3)


class TestDynkin:
    def test_selector_best_success_n4(self):
        # enumeration over 24 orders: (s/n) * sum_{t>s} 1/(t-1) = 11/24
        inst = negatively_correlated(4, 7)
        pol = dynkin(4, 1, Selector.SENDER_VALUES)
        mech = MechanismPolicy(name="dynkin", knowledge=Knowledge.SECRETARY,
                               branches=((F(1), pol),))
        oracle = evaluate_by_enumeration(inst, mech, SEC)
        assert oracle["sender_success"] == F(11, 24)

    def test_forced_last_round(self):
        inst = negatively_correlated(2, 7)
        pol = dynkin(2, 1, Selector.SENDER_VALUES)
        mech = MechanismPolicy(name="dynkin", knowledge=Knowledge.SECRETARY,
                               branches=((F(1), pol),))
        rep = exact_evaluate(inst, mech, SEC)
        assert rep.sender_success == F(1, 2)


class TestSimpleSecretary:
    def test_structure(self):
        mech = simple_secretary(10)
        assert mech.param("s") == 3
        w_r = mech.branches[0][0]
        assert w_r == E_RATIONAL / 10
        assert abs(float(w_r) - math.e / 10) < 1e-12
        assert sum(w for w, _ in mech.branches) == 1

    def test_requires_three_candidates(self):
        with pytest.raises(SecsigError):
            simple_secretary(2)

    def test_signal_camouflage(self):
        # both branches produce P[HIRE at t | set] = s/(t(t-1)): the receiver
        # cannot tell which variant runs
        for n in (5, 6, 7):
            inst = negatively_correlated(n, 8 + n)
            s = sample_floor_inv_e(n)
            for selector in Selector:
                pol = dynkin(n, s, selector)
                for t in range(s + 1, n):
                    probs = {hire_prob_given_set(inst, pol, sub, t)
                             for sub in combinations(range(n), t)}
                    assert probs == {F(s, t * (t - 1))}, (n, selector, t)


class TestFirstOpt:
    def test_success_n6(self):
        inst = negatively_correlated(6, 9)
        rep = exact_evaluate(inst, first_opt(6, 3), SEC_D_ORD)
        assert rep.sender_success == F(3, 10)

    def test_forced_round2(self):
        inst = negatively_correlated(2, 9)
        rep = exact_evaluate(inst, first_opt(2, 1), SEC_D_ORD)
        assert rep.sender_success == F(1, 2)

    def test_symmetry_on_reversed_rankings(self):
        for n in (5, 6, 7):
            inst = negatively_correlated(n, 10 + n)
            rep = exact_evaluate(inst, first_opt(n), SEC_D_ORD)
            assert rep.sender_success == rep.receiver_success


class TestTrivial:
    def test_values(self, fig1):
        rep = exact_evaluate(fig1, trivial(8), BASIC)
        assert rep.sender_success == F(1, 8)
        assert rep.sender_eu == F(11, 2)  # mean sender value
        assert rep.hire_round_pmf == tuple([F(1, 8)] * 8)

    def test_singleton(self):
        inst = validate_instance([(5, 7)])
        rep = exact_evaluate(inst, trivial(1), BASIC)
        assert rep.hire_round_pmf == (1,)


class TestNestedMechanism:
    def test_singleton_remaining_hires(self):
        inst = validate_instance([(2, 5), (3, 1)])
        policy = nested_lp_mechanism(inst, CARD).branches[0][1]
        assert policy(view_for(inst, BASIC_D, (0, 1), 2)) == 1
        assert policy(view_for(inst, BASIC_D, (1, 0), 2)) == 1

    def test_equal_rho_waits_for_best(self):
        inst = validate_instance([(1, 3), (1, 6), (1, 9)])
        policy = nested_lp_mechanism(inst, CARD).branches[0][1]
        assert policy(view_for(inst, BASIC_D, (2, 0, 1), 1)) == 1  # best arrives first
        assert policy(view_for(inst, BASIC_D, (0, 1, 2), 1)) == 0
        assert policy(view_for(inst, BASIC_D, (1, 2, 0), 2)) == 1  # best remaining


class TestBestSoFar:
    def test_all_ones_after_sample_equals_first_opt(self):
        # identical signal distributions on every on-path view
        n = 5
        inst = negatively_correlated(n, 11)
        s = n // 2
        table = BestSoFarTable.symmetric(
            [F(0)] * s + [F(1)] * (n - 1 - s))
        bsf = best_so_far_mechanism(n, table).branches[0][1]
        fo = first_opt(n, s).branches[0][1]
        from itertools import permutations
        for perm in permutations(range(n)):
            for t in range(1, n + 1):
                v = view_for(inst, SEC_D_ORD, perm, t)
                assert bsf(v) == fo(v)

    def test_table_validation(self):
        with pytest.raises(SecsigError):
            BestSoFarTable.symmetric([F(2)])
        with pytest.raises(SecsigError):
            best_so_far_mechanism(5, BestSoFarTable.symmetric([F(1)] * 2))


class TestKnowledgeFirewall:
    def test_basic_mechanism_rejected_in_secretary_scenario(self, fig1):
        mech = pareto_mechanism(fig1, CARD)
        with pytest.raises(ScenarioMismatch):
            exact_evaluate(fig1, mech, SEC)
        with pytest.raises(TypeError):
            exact_evaluate(fig1, shrinking_pareto(fig1, CARD), SEC)

    def test_secretary_mechanism_fine_in_basic_scenario(self, fig1):
        exact_evaluate(fig1, trivial(8), BASIC)


class TestSignalUniqueness:
    def test_every_mechanism_hires_exactly_once(self):
        # pmf over hire rounds sums to exactly 1 (at most one HIRE obeyed,
        # exactly one by the last round)
        for n in (3, 4, 5, 6):
            inst = random_instance(n, 600 + n, RandomFamily.UNIFORM_GRID)
            nc = negatively_correlated(n, 600 + n)
            mechs = [
                (inst, pareto_mechanism(inst, CARD), BASIC),
                (inst, growing_pareto(n, max(1, n // 2)), SEC),
                (inst, shrinking_pareto(inst, CARD), BASIC_D),
                (inst, elementary(inst), BASIC),
                (inst, adaptive_elementary(inst), BASIC_D),
                (inst, trivial(n), SEC),
                (nc, first_opt(n), SEC_D_ORD),
                (inst, nested_lp_mechanism(inst, CARD), BASIC_D),
            ]
            if n >= 3:
                mechs.append((inst, simple_secretary(n), SEC))
            for pool, mech, sc in mechs:
                rep = exact_evaluate(pool, mech, sc)
                assert sum(rep.hire_round_pmf) == 1, mech.name

    def test_round_n_mass_left_raises(self):
        inst = validate_instance([(1, 1), (2, 2)])
        never = MechanismPolicy(name="never", knowledge=Knowledge.SECRETARY,
                                branches=((F(1), lambda v: F(0)),))
        with pytest.raises(SecsigError):
            exact_evaluate(inst, never, SEC)
