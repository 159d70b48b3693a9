from fractions import Fraction

import pytest

from oracles import (
    best_response_by_strategy_enumeration,
    best_response_by_tree,
    evaluate_by_enumeration,
)
from secsig.core import (
    Knowledge,
    MechanismPolicy,
    ScenarioSpec,
    SecsigError,
    TooLarge,
    UtilityMode,
    ZeroBenchmark,
    validate_instance,
)
from secsig.evaluate import (
    approximation_ratio,
    benchmark_value,
    best_so_far_dp,
    check_persuasive,
    exact_evaluate,
    incentive_constraint_search,
)
from secsig.instances import (
    RandomFamily,
    instance_I,
    negatively_correlated,
    random_instance,
)
from secsig.mechanisms import (
    Selector,
    adaptive_elementary,
    dynkin,
    first_opt,
    growing_pareto,
    nested_lp_mechanism,
    pareto_mechanism,
    sample_floor_inv_e,
    shrinking_pareto,
    simple_secretary,
    trivial,
)

F = Fraction
CARD = UtilityMode.CARDINAL
ORD = UtilityMode.ORDINAL
BASIC = ScenarioSpec(Knowledge.BASIC, False, CARD, CARD)
BASIC_D = ScenarioSpec(Knowledge.BASIC, True, CARD, CARD)
SEC = ScenarioSpec(Knowledge.SECRETARY, False, CARD, CARD)
SEC_D_ORD = ScenarioSpec(Knowledge.SECRETARY, True, ORD, ORD)


class TestExactEvaluate:
    def test_fig1_pareto(self, fig1):
        rep = exact_evaluate(fig1, pareto_mechanism(fig1, CARD), BASIC)
        assert rep.sender_eu == 9 and rep.receiver_eu == 9

    def test_trivial_mean(self, fig1):
        rep = exact_evaluate(fig1, trivial(8), BASIC)
        assert rep.sender_eu == F(11, 2)

    def test_adaptive_n5(self):
        inst = negatively_correlated(5, 3)
        rep = exact_evaluate(inst, adaptive_elementary(inst),
                             ScenarioSpec(Knowledge.BASIC, True, ORD, ORD))
        assert rep.sender_success == F(4, 5)

    def test_cap(self):
        inst = random_instance(9, 1, RandomFamily.UNIFORM_GRID)
        with pytest.raises(TooLarge):
            exact_evaluate(inst, trivial(9), SEC)

    def test_matches_order_enumeration(self):
        for seed in (1, 2, 3):
            inst = random_instance(5, seed, RandomFamily.UNIFORM_GRID)
            cases = [
                (shrinking_pareto(inst, CARD), BASIC_D),
                (growing_pareto(5, 2), SEC),
                (simple_secretary(5), SEC),
                (adaptive_elementary(inst), BASIC_D),
                (nested_lp_mechanism(inst, CARD), BASIC_D),
            ]
            for mech, sc in cases:
                fast = exact_evaluate(inst, mech, sc)
                slow = evaluate_by_enumeration(inst, mech, sc)
                assert fast.sender_success == slow["sender_success"], mech.name
                assert fast.sender_eu == slow["sender_eu"], mech.name
                assert fast.receiver_success == slow["receiver_success"], mech.name
                assert fast.receiver_eu == slow["receiver_eu"], mech.name
                assert fast.hire_round_pmf == slow["pmf"], mech.name


class TestCheckPersuasive:
    def test_trivial_everywhere(self, fig1):
        for knowledge in Knowledge:
            for disclosure in (False, True):
                for receiver in (CARD, ORD):
                    sc = ScenarioSpec(knowledge, disclosure, CARD, receiver)
                    rep = check_persuasive(fig1, trivial(8), sc)
                    assert rep.persuasive, (knowledge, disclosure, receiver)

    def test_fig1_pareto_persuasive(self, fig1):
        rep = check_persuasive(fig1, pareto_mechanism(fig1, CARD), BASIC)
        assert rep.persuasive
        assert rep.v_obedient == rep.v_best_response == 9

    def test_deterministic_target_counterexample(self):
        inst = validate_instance([(0, 1), (2, 0)])
        mech = MechanismPolicy(
            name="always-target", knowledge=Knowledge.BASIC,
            branches=((F(1), lambda v: F(1) if v.current.id == 0 else F(0)),),
        )
        rep = check_persuasive(inst, mech, BASIC)
        assert not rep.persuasive
        assert rep.v_obedient == 0
        # the receiver can read the signal and always secure the rho=2
        # candidate, which strictly beats hiring round 1 unconditionally
        assert rep.v_best_response == 2
        assert rep.violations

    def test_best_response_dominance_and_engine_against_oracles(self):
        inst = random_instance(4, 14, RandomFamily.UNIFORM_GRID)
        nc = negatively_correlated(4, 14)
        no_disc = [
            (inst, growing_pareto(4, 2), SEC),
            (inst, trivial(4), SEC),
            (inst, simple_secretary(4), ScenarioSpec(Knowledge.SECRETARY, False, ORD, ORD)),
        ]
        for pool, mech, sc in no_disc:
            rep = check_persuasive(pool, mech, sc)
            assert rep.v_best_response >= rep.v_obedient
            assert rep.v_best_response == best_response_by_strategy_enumeration(pool, mech, sc)
        s4 = max(1, sample_floor_inv_e(4))
        coin = MechanismPolicy(
            name="coin-mix", knowledge=Knowledge.SECRETARY,
            branches=((F(1, 2), dynkin(4, s4, Selector.SENDER_VALUES)),
                      (F(1, 2), dynkin(4, s4, Selector.RECEIVER_VALUES))),
        )
        with_disc = [
            (inst, shrinking_pareto(inst, CARD), BASIC_D),
            (inst, nested_lp_mechanism(inst, CARD), BASIC_D),
            (nc, first_opt(4), SEC_D_ORD),
            (nc, coin, SEC_D_ORD),
            (inst, trivial(4), ScenarioSpec(Knowledge.SECRETARY, True, CARD, CARD)),
        ]
        for pool, mech, sc in with_disc:
            rep = check_persuasive(pool, mech, sc)
            best, obed = best_response_by_tree(pool, mech, sc)
            assert rep.v_best_response == best, mech.name
            assert rep.v_obedient == obed, mech.name

    def test_coin_mix_disclosure_flagged(self):
        nc = negatively_correlated(5, 7)
        s = sample_floor_inv_e(5)
        coin = MechanismPolicy(
            name="coin-mix", knowledge=Knowledge.SECRETARY,
            branches=((F(1, 2), dynkin(5, s, Selector.SENDER_VALUES)),
                      (F(1, 2), dynkin(5, s, Selector.RECEIVER_VALUES))),
        )
        rep = check_persuasive(nc, coin, SEC_D_ORD)
        assert not rep.persuasive
        assert rep.violations
        # without disclosure the same mix cannot be told apart
        rep2 = check_persuasive(nc, coin, ScenarioSpec(Knowledge.SECRETARY, False, ORD, ORD))
        assert rep2.persuasive

    def test_indifference_reported_separately(self, fig1):
        rep = check_persuasive(fig1, trivial(8), BASIC)
        assert rep.persuasive
        assert rep.indifferent  # uniform recommendation leaves the receiver indifferent

    def test_report_invariant(self):
        with pytest.raises(SecsigError):
            from secsig.evaluate import PersuasivenessReport

            PersuasivenessReport(persuasive=True, v_obedient=F(2),
                                 v_best_response=F(1), violations=())


class TestBestSoFarDP:
    def test_n6_values(self):
        t6 = best_so_far_dp(6)
        assert t6.u[3] == F(1, 3)
        assert t6.v[3] == F(4, 15)
        assert t6.u[1] == t6.v[1] == F(3, 10)
        assert t6.threshold == 4

    def test_n5_values(self):
        t5 = best_so_far_dp(5)
        assert t5.u[1] == t5.v[1] == F(3, 10)
        assert t5.u[4] == F(1, 2) and t5.v[4] == 0

    def test_base_cases(self):
        for n in (2, 3, 4, 8):
            t = best_so_far_dp(n)
            assert t.v[n - 1] == 0 and t.u[n - 1] == F(1, 2)
            for i in range(n):
                assert t.u[i] == max(F(i + 1, 2 * n), t.v[i])


class TestApproximationRatio:
    def test_trivial_vs_benchmark(self, fig1):
        # mean sender value over the optimum: (11/2) / 9
        assert approximation_ratio(fig1, trivial(8), BASIC) == F(11, 18)

    def test_pareto_is_one(self, fig1):
        assert approximation_ratio(fig1, pareto_mechanism(fig1, CARD), BASIC) == 1

    def test_first_opt_vs_ordinal_benchmark(self):
        inst = negatively_correlated(6, 4)
        ratio = approximation_ratio(inst, first_opt(6, 3), SEC_D_ORD)
        assert benchmark_value(inst, ORD, ORD) == F(5, 6)
        assert ratio == F(9, 25)

    def test_zero_benchmark(self):
        inst = validate_instance([(1, 0), (2, 0)])
        with pytest.raises(ZeroBenchmark):
            approximation_ratio(inst, trivial(2), BASIC)


class TestIncentiveSearch:
    def test_collapse_to_uniform_value(self):
        for n in (4, 5):
            best, table = incentive_constraint_search(n, grid_resolution=4)
            assert best == F(1, n)
            assert table["policy"] == "always-recommend"

    def test_ratio_against_benchmark(self):
        from secsig.pareto import pareto_procedure

        for n in (4, 5):
            best, _ = incentive_constraint_search(n, grid_resolution=3)
            opt = pareto_procedure(instance_I(n), ORD).opt_value
            assert opt == F(1, 2)
            assert best / opt == F(2, n)

    def test_benchmark_on_construction(self):
        # the two-pool construction's benchmark splits evenly between the
        # sender-only and receiver-only candidates
        from secsig.pareto import solve_benchmark_lp

        sol = solve_benchmark_lp(instance_I(5), ORD)
        assert sol.objective == F(1, 2)
