import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from truthlab.core import BOTH, EMPTY, ITEM1, ITEM2, Allocation, Bundle, Grid, Scenario
from truthlab.mechanisms import Threshold, catalog, threshold_outcome
from truthlab.payments import (brute_force_payments_exist, build_bundle_graph, check_prices,
                               check_witness, payments_exist, payments_report, priced_mechanism)
from truthlab.verify import check_dsic, check_ir

from conftest import V

ONE, TWO = Scenario.ONE_ITEM, Scenario.TWO_ITEMS


def nothing(v, w, s):
    return Allocation(EMPTY, EMPTY)


def threshold_rule(t):
    """V faces ``t`` regardless of W; W gets nothing."""
    def rule(v, w, s):
        b, _ = threshold_outcome(t, v, s)
        return Allocation(b, EMPTY)
    return rule


class TestBundleGraph:
    def test_constant_empty(self):
        g = build_bundle_graph(nothing, "V", V(0, 0), TWO, Grid.of([0, 1]))
        assert g.nodes == [EMPTY] and g.edges == {}

    def test_threshold_regions(self):
        g = build_bundle_graph(threshold_rule(Threshold(2, 5)), "V", V(0, 0), TWO,
                               Grid.of([0, 1, 3, 6, 9]))
        assert set(g.nodes) == {EMPTY, ITEM1, ITEM2, BOTH}

    def test_bundling_membership(self):
        g = build_bundle_graph(catalog("bundling"), "V", V(5, 0), ONE, Grid.of([F(1, 10), 4, 5, 10]))
        assert g.nodes == [EMPTY, ITEM1]
        assert V(F(1, 10), 10) in g.members[ITEM1]


class TestPaymentsExist:
    def test_greedy_infeasible(self):
        g = Grid.of([0, 1, 2, 3, 4, 8])
        cert = payments_exist(catalog("greedy"), "V", V(3, 4), TWO, g)
        assert not cert.feasible
        assert cert.cycle_sum < 0
        assert check_witness(catalog("greedy"), cert, "V", V(3, 4), TWO)

    def test_threshold_prices(self):
        g = Grid.of([0, 1, 3, 6, 9])
        cert = payments_exist(threshold_rule(Threshold(2, 5)), "V", V(0, 0), TWO, g)
        assert cert.feasible
        assert cert.prices[ITEM1] <= 3 and cert.prices[ITEM1] >= 1

    def test_threshold_prices_on_canonical_grid(self):
        g = Grid.of([0, 1, 2, 3, 5, 6, 9])
        cert = payments_exist(threshold_rule(Threshold(2, 5)), "V", V(0, 0), TWO, g)
        assert cert.feasible
        assert (cert.prices[ITEM1], cert.prices[ITEM2], cert.prices[BOTH]) == (2, 5, 5)

    def test_constant_empty(self):
        cert = payments_exist(nothing, "V", V(0, 0), TWO, Grid.of([0, 1]))
        assert cert.feasible and cert.prices == {EMPTY: 0}

    def test_tampered_witness_rejected(self):
        g = Grid.of([0, 1, 2, 3, 4, 8])
        cert = payments_exist(catalog("greedy"), "V", V(3, 4), TWO, g)
        cert.witness = list(reversed(cert.witness))
        assert not check_witness(catalog("greedy"), cert, "V", V(3, 4), TWO)

    def test_prices_pass_verifier(self):
        g = Grid.of([0, 1, 3])
        rule = catalog("greedy")
        for bidder, opp, s, cert in payments_report(rule, g, bidders=("V",)):
            if not cert.feasible:
                continue
            m = priced_mechanism(rule, bidder, opp, s, g, cert.prices)
            assert check_dsic(m, g, bidders=(bidder,), scenarios=(s,), opponents=[opp]) == []
            assert check_ir(m, g, bidders=(bidder,), scenarios=(s,), opponents=[opp]) == []

    def test_infeasibility_survives_supergrid(self):
        small, big = Grid.of([0, 1, 2, 3, 4, 8]), Grid.of([0, 1, 2, 3, 4, 5, 8, 9])
        rule = catalog("greedy")
        assert not payments_exist(rule, "V", V(3, 4), TWO, small).feasible
        assert not payments_exist(rule, "V", V(3, 4), TWO, big).feasible

    @pytest.mark.parametrize("pi1,pi2", [(1, 2), (F(1, 2), 3), (0, 1), (2, 2)])
    def test_item1_price_is_pi1(self, pi1, pi2):
        g = Grid.of([0, F(1, 2), 1, 2, 3, 4])
        vals = [x for x in g.values if x < pi1]
        cert = payments_exist(threshold_rule(Threshold(pi1, pi2)), "V", V(0, 0), ONE, g)
        assert cert.feasible
        lo = max(vals, default=F(0))
        assert lo <= cert.prices[ITEM1] <= pi1


MICRO = [Grid.of(x) for x in ([0, 1], [0, 2], [0, 1, 2], [1, 3], [0, F(1, 2), 2])]


def all_rules(g):
    """Every deterministic single-bidder rule on a 2-value grid, one scenario."""
    types = g.types("V")
    for bundles in itertools.product((EMPTY, ITEM1, ITEM2, BOTH), repeat=len(types)):
        table = dict(zip(types, bundles))
        yield lambda v, w, s, table=table: Allocation(table[v], EMPTY)


class TestBruteForceAgreement:
    @pytest.mark.parametrize("g", MICRO[:2], ids=str)
    def test_every_rule(self, g):
        for rule in all_rules(g):
            cert = payments_exist(rule, "V", V(0, 0), TWO, g)
            brute = brute_force_payments_exist(rule, "V", V(0, 0), TWO, g)
            assert cert.feasible == (brute is not None)
            if cert.feasible:
                assert check_prices(rule, cert.prices, "V", V(0, 0), TWO, g)
            else:
                assert check_witness(rule, cert, "V", V(0, 0), TWO)

    @settings(max_examples=80, deadline=None)
    @given(st.sampled_from(MICRO), st.data())
    def test_random_rules(self, g, data):
        types = g.types("V")
        table = {t: data.draw(st.sampled_from([EMPTY, ITEM1, ITEM2, BOTH])) for t in types}
        rule = lambda v, w, s: Allocation(table[v], EMPTY)  # noqa: E731
        cert = payments_exist(rule, "V", V(0, 0), TWO, g)
        assert cert.feasible == (brute_force_payments_exist(rule, "V", V(0, 0), TWO, g) is not None)

    @pytest.mark.parametrize("name", ["greedy", "per_item_highest", "bundling", "vcg_ish"])
    def test_catalog_rules(self, name):
        g = Grid.of([0, 1, 2])
        for bidder, opp, s, cert in payments_report(catalog(name), g):
            brute = brute_force_payments_exist(catalog(name), bidder, opp, s, g)
            assert cert.feasible == (brute is not None), (bidder, opp, s)
