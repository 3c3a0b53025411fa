from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from truthlab.characterize import Region, classify_region
from truthlab.core import (BOTH, EMPTY, ITEM1, ITEM2, Allocation, ConfigurationError, Grid,
                           InfeasibleOutcome, Scenario, offline_opt, run, welfare)
from truthlab.mechanisms import (BrRule, Coin, Kind, MechanismSpec, Threshold, ThresholdTables,
                                 bundling_allocate, catalog, constant_with_complement, dumps_spec,
                                 evaluate, greedy_allocate, loads_spec, offline_vcg,
                                 per_item_highest_allocate, randomized_baseline,
                                 stochastic_arrival_mechanism, discount_mechanism,
                                 threshold_outcome, threshold_spec, vcg_ish_allocate)

from conftest import V, valuations

ONE, TWO = Scenario.ONE_ITEM, Scenario.TWO_ITEMS


def split(v_bundle, w_bundle):
    return Allocation(v_bundle, w_bundle)


class TestGreedy:
    def test_loser_takes_item2(self):
        assert greedy_allocate(V(3, 5), V(4, 2), TWO) == split(ITEM2, ITEM1)

    def test_winner_marginal_beats_w2(self):
        assert greedy_allocate(V(5, 9), V(3, 1), TWO) == split(BOTH, EMPTY)

    def test_tie_favors_v(self):
        assert greedy_allocate(V(0, 0), V(0, 0), ONE) == split(ITEM1, EMPTY)


class TestPerItemHighest:
    def test_split(self):
        assert per_item_highest_allocate(V(3, 5), V(4, 2), TWO) == split(ITEM2, ITEM1)

    def test_sweep(self):
        assert per_item_highest_allocate(V(5, 5), V(1, 1), TWO) == split(BOTH, EMPTY)

    def test_one_item(self):
        assert per_item_highest_allocate(V(2, 9), V(3, 0), ONE) == split(EMPTY, ITEM1)


class TestBundling:
    def test_global_max_one_item(self):
        assert bundling_allocate(V(F(1, 10), 10), V(5, 0), ONE) == split(ITEM1, EMPTY)

    def test_global_max_two_items(self):
        assert bundling_allocate(V(F(1, 10), 10), V(5, 0), TWO) == split(BOTH, EMPTY)

    def test_zero_tie(self):
        assert bundling_allocate(V(0, 0), V(0, 0), TWO) == split(BOTH, EMPTY)


class TestVcgIsh:
    def test_hindsight_split(self):
        assert vcg_ish_allocate(V(3, 5), V(4, 2), TWO) == split(ITEM2, ITEM1)

    def test_keeps_item1(self):
        assert vcg_ish_allocate(V(4, 3), V(2, 10), TWO) == split(ITEM1, ITEM2)

    def test_item2_joins_item1(self):
        assert vcg_ish_allocate(V(5, 9), V(4, 0), TWO) == split(BOTH, EMPTY)


class TestOfflineVcg:
    def test_second_price(self):
        out = offline_vcg(V(3, 0), V(2, 0), ONE)
        assert out.bundle("V") == ITEM1 and out.payment_v == 2

    def test_difference_prices(self):
        out = offline_vcg(V(6, 1), V(4, 2), TWO)
        assert out.allocation == split(ITEM1, ITEM2)
        assert (out.payment_v, out.payment_w) == (2, 0)

    def test_clamped_at_zero(self):
        out = offline_vcg(V(3, 5), V(4, 2), TWO)
        assert out.allocation == split(ITEM2, ITEM1)
        assert (out.payment_v, out.payment_w) == (0, 0)

    @given(valuations, valuations, st.sampled_from(list(Scenario)))
    def test_welfare_optimal(self, v, w, s):
        assert welfare(offline_vcg(v, w, s).allocation, v, w) == offline_opt(v, w, s)


class TestDiscount:
    def test_winner_buys_item2_posted(self):
        out = discount_mechanism(V(3, 10), V(2, 5), TWO, charge="posted")
        assert out.allocation == split(BOTH, EMPTY) and out.payment_v == 6

    def test_both_decline(self):
        out = discount_mechanism(V(0, 100), V(2, 101), TWO)
        assert out.allocation == split(EMPTY, ITEM1)
        assert (out.payment_v, out.payment_w) == (0, 0)

    def test_item1_alone_pays_other_bid(self):
        out = discount_mechanism(V(3, 10), V(2, 5), ONE)
        assert out.allocation == split(ITEM1, EMPTY) and out.payment_v == 2

    @given(valuations, valuations)
    def test_at_most_one_buyer(self, v, w):
        out = discount_mechanism(v, w, TWO)
        assert out.allocation.is_feasible(TWO)


class TestThreshold:
    t = Threshold(2, 5)

    def test_top_right(self):
        assert threshold_outcome(self.t, V(3, 9), TWO) == (BOTH, 5)

    def test_bottom_left(self):
        assert threshold_outcome(self.t, V(1, 3), TWO) == (EMPTY, 0)

    def test_bottom_right(self):
        assert threshold_outcome(self.t, V(6, 7), TWO) == (ITEM1, 2)

    def test_top_left(self):
        assert threshold_outcome(self.t, V(1, 7), TWO) == (ITEM2, 5)

    def test_both_when_equal(self):
        t = Threshold(3, 3, BrRule.BOTH_WHEN_EQUAL)
        assert threshold_outcome(t, V(4, 1), TWO) == (BOTH, 3)

    def test_both_when_equal_needs_equal_thresholds(self):
        tables = ThresholdTables(pi_default=Threshold(2, 5, BrRule.BOTH_WHEN_EQUAL),
                                 phi_default=Threshold(9, 9))
        with pytest.raises(ConfigurationError):
            threshold_spec(tables)

    @given(valuations)
    def test_agrees_with_regions(self, v):
        bundle, _ = threshold_outcome(self.t, v, TWO)
        expected = {Region.BL: EMPTY, Region.BR: ITEM1, Region.TL: ITEM2, Region.TR: BOTH}
        region = classify_region(v, 2, 5)
        if region is not Region.BOUNDARY:
            assert bundle == expected[region]

    def test_conflict_carries_profile(self):
        free = Threshold(0, 0, BrRule.BOTH_WHEN_EQUAL)
        m = threshold_spec(ThresholdTables(pi_default=free, phi_default=free))
        with pytest.raises(InfeasibleOutcome) as err:
            run(m, V(1, 1), V(1, 1), TWO)
        assert err.value.profile == (V(1, 1), V(1, 1), TWO)

    def test_constant_fixture_gives_w_the_rest(self):
        g = Grid.of([0, 1, 2, 3, 5, 6, 9])
        m = constant_with_complement(self.t, g)
        for v, w in g.profiles():
            out = run(m, v, w, TWO)
            assert out.bundle("V").code | out.bundle("W").code == 3
            assert out.payment_w == 0


class TestStochastic:
    half = F(1, 2)

    def test_winner_buys_item2_posted(self):
        out = stochastic_arrival_mechanism(self.half, V(3, 8), V(2, 5), TWO, charge="posted")
        assert out.allocation == split(BOTH, EMPTY) and out.payment_v == F(11, 2)

    def test_item1_price(self):
        out = stochastic_arrival_mechanism(self.half, V(3, 8), V(2, 5), ONE)
        assert out.allocation == split(ITEM1, EMPTY) and out.payment_v == F(5, 2)

    def test_item1_unallocated(self):
        out = stochastic_arrival_mechanism(self.half, V(1, 10), V(1, 10), TWO)
        assert out.allocation == split(ITEM2, EMPTY) and out.payment_v == 10

    def test_p_zero_refused(self):
        with pytest.raises(ConfigurationError):
            stochastic_arrival_mechanism(F(0), V(1, 1), V(1, 1), ONE)


class TestRandomized:
    def test_random_bidder_takes_all(self):
        out = randomized_baseline(Kind.RANDOM_BIDDER, Coin.V, V(3, 5), V(9, 9), TWO)
        assert out.allocation == split(BOTH, EMPTY)
        assert welfare(out.allocation, V(3, 5), V(9, 9)) == 5

    def test_random_item_second_price(self):
        out = randomized_baseline(Kind.RANDOM_ITEM, Coin.ITEM2, V(0, 5), V(0, 2), TWO)
        assert out.allocation == split(ITEM2, EMPTY) and out.payment_v == 2

    def test_random_item_absent(self):
        out = randomized_baseline(Kind.RANDOM_ITEM, Coin.ITEM2, V(0, 5), V(0, 2), ONE)
        assert out.allocation == split(EMPTY, EMPTY)

    def test_illegal_coin(self):
        with pytest.raises(ConfigurationError):
            randomized_baseline(Kind.RANDOM_ITEM, Coin.V, V(0, 5), V(0, 2), ONE)

    def test_unrealized_coin_refused(self):
        with pytest.raises(ConfigurationError):
            evaluate(catalog("random_bidder"), V(0, 5), V(0, 2), ONE)


class TestCatalog:
    def test_unknown(self):
        with pytest.raises(ConfigurationError):
            catalog("nope")

    @pytest.mark.parametrize("name", ["greedy", "per_item_highest", "bundling", "vcg_ish",
                                      "discount"])
    @settings(max_examples=60)
    @given(v=valuations, w=valuations)
    def test_item1_never_revised(self, name, v, w):
        m = catalog(name)
        one, two = evaluate(m, v, w, ONE), evaluate(m, v, w, TWO)
        assert one.allocation.item1_holder() == two.allocation.item1_holder()
        assert one.allocation.is_feasible(ONE) and two.allocation.is_feasible(TWO)

    @settings(max_examples=60)
    @given(v=valuations, w=valuations, p=st.fractions(min_value=F(1, 10), max_value=1,
                                                      max_denominator=10))
    def test_stochastic_item1_never_revised(self, v, w, p):
        m = catalog("stochastic", p=p)
        one, two = evaluate(m, v, w, ONE), evaluate(m, v, w, TWO)
        assert one.allocation.item1_holder() == two.allocation.item1_holder()

    def test_offline_vcg_is_a_hindsight_benchmark(self):
        m = catalog("offline_vcg")
        v, w = V(3, 9), V(2, 0)
        assert evaluate(m, v, w, ONE).allocation.item1_holder() == "V"
        assert evaluate(m, v, w, TWO).allocation.item1_holder() == "W"

    @given(valuations, valuations, st.sampled_from(list(Scenario)))
    def test_greedy_half_optimal(self, v, w, s):
        assert 2 * welfare(greedy_allocate(v, w, s), v, w) >= offline_opt(v, w, s)


class TestSpecFiles:
    def test_round_trip_catalog(self):
        m = catalog("stochastic", p=F(1, 3))
        assert loads_spec(dumps_spec(m)) == m

    def test_round_trip_thresholds(self):
        m = constant_with_complement(Threshold(2, 5), Grid.of([0, 2, 5, 9]))
        back = loads_spec(dumps_spec(m))
        g = Grid.of([0, 2, 5, 9])
        for v, w in g.profiles():
            for s in Scenario:
                assert evaluate(back, v, w, s) == evaluate(m, v, w, s)

    def test_error_names_line(self):
        with pytest.raises(ConfigurationError, match=":3:"):
            loads_spec("kind = threshold\n[pi]\n1 2 -> x 3\n")

    def test_unknown_kind(self):
        with pytest.raises(ConfigurationError):
            loads_spec("kind = auction\n")
