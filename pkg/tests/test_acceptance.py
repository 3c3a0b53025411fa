"""Acceptance criteria 1-9.  Each test records a PASS/FAIL line that is
repeated in the pytest terminal summary."""
import time
from fractions import Fraction as F

from truthlab.characterize import (CORRUPTIONS, FIXTURE_GRID, LEMMAS, canonical_fixture,
                                   corrupted_fixture, lemma_suite)
from truthlab.core import Grid, Scenario, offline_opt, welfare
from truthlab.impossibility import SearchSpace, canonical, enumerate_solutions, replay_removal, search_best
from truthlab.mechanisms import catalog, evaluate
from truthlab.payments import brute_force_payments_exist, check_witness, payments_exist, payments_report
from truthlab.verify import (ViolationKind, check_consistency, check_dsic, check_ir, expected_ratio,
                             replay, replay_ratio, worst_case_ratio)

from conftest import Criterion, V

ONE, TWO = Scenario.ONE_ITEM, Scenario.TWO_ITEMS
DISCOUNT_GRID = Grid.of([0, F(1, 2), 1, 2, 3, 5, 10, 100, 101])
PROBE_GRID = Grid.of([0, F(1, 512), F(1, 64), F(1, 16), F(1, 8), F(1, 2), 1, 8])
STOCHASTIC_GRID = Grid.of([0, 1, 2, F(5, 2), 3, 4, 5, 8, 10])
TEST_GRIDS = [
    Grid.of([0]),
    Grid.of([0, 1, 2, 3]),
    Grid.of([0, 1, 2, 3, 4, 8]),
    Grid.of([F(9, 10), 1]),
    Grid.of([0, F(1, 10), 4, 5, 10]),
    Grid.of([0, 2, 100, 101]),
    Grid.of([0, F(1, 3), 1, 7], v2=[0, 5], w1=[1, 2]),
]


def test_criterion_1_discount_truthful():
    with Criterion(1, "discount mechanism DSIC and IR on the 9-value grid") as c:
        m = catalog("discount")
        start = time.perf_counter()
        dsic, ir = check_dsic(m, DISCOUNT_GRID), check_ir(m, DISCOUNT_GRID)
        elapsed = time.perf_counter() - start
        c.note(f"DSIC {len(dsic)}, IR {len(ir)}, {elapsed:.1f}s")
        assert dsic == [] and ir == []
        assert elapsed < 120


def test_criterion_2_discount_unbounded():
    with Criterion(2, "discount ratio >= 51 at v=(0,100), w=(2,101) and grows with the grid") as c:
        m = catalog("discount")
        rep = worst_case_ratio(m, DISCOUNT_GRID)
        c.note(f"ratio {rep.ratio} at {rep.witness[0]}, {rep.witness[1]}")
        assert rep.ratio >= 51
        assert rep.witness == (V(0, 100), V(2, 101), TWO)
        assert (rep.achieved, rep.opt) == (2, 102)
        assert replay_ratio(m, rep)
        bigger = worst_case_ratio(m, Grid.of([*DISCOUNT_GRID.values, 1000, 1001]))
        c.note(f"with 1000, 1001: {bigger.ratio}")
        assert bigger.ratio > rep.ratio


def test_criterion_3_greedy():
    with Criterion(3, "greedy keeps OPT/2 and admits no truthful payments") as c:
        m = catalog("greedy")
        for g in TEST_GRIDS + [DISCOUNT_GRID]:
            for v, w in g.profiles():
                for s in Scenario:
                    assert 2 * welfare(evaluate(m, v, w, s).allocation, v, w) >= offline_opt(v, w, s)
        g = Grid.of([0, 1, 2, 3, 4, 8])
        cert = payments_exist(m, "V", V(3, 4), TWO, g)
        c.note(f"payments at w=(3,4): {'feasible' if cert.feasible else 'infeasible'}, "
               f"cycle sum {cert.cycle_sum}")
        assert not cert.feasible
        assert check_witness(m, cert, "V", V(3, 4), TWO)


def test_criterion_4_offline_vcg():
    with Criterion(4, "offline VCG is DSIC, IR and exactly optimal") as c:
        m = catalog("offline_vcg")
        for g in TEST_GRIDS:
            assert check_dsic(m, g) == [] and check_ir(m, g) == []
            assert worst_case_ratio(m, g).ratio == 1
        c.note(f"{len(TEST_GRIDS)} grids")


def test_criterion_5_lemma_suite():
    with Criterion(5, "canonical fixture passes; each corruption fails its own lemma") as c:
        rep = lemma_suite(canonical_fixture(), FIXTURE_GRID, 10, bidders=("V",))
        assert all(rep.status(lem) == "pass" for lem in LEMMAS)
        for kind, lemma in CORRUPTIONS.items():
            m = corrupted_fixture(kind)
            bad = lemma_suite(m, FIXTURE_GRID, 10, bidders=("V",))
            c.note(f"{kind} -> {sorted(bad.failed_lemmas())}")
            assert bad.failed_lemmas() == {lemma}
            for f in bad.failures():
                conf = f.confirmation
                assert conf.kind is ViolationKind.DSIC and conf.gain > 0 and replay(m, conf)
        # the inverted fixture has pi1=3, pi2=1 at w=(3,9)
        conf = lemma_suite(corrupted_fixture("inverted"), FIXTURE_GRID, 10,
                           bidders=("V",)).failures("L7")[0].confirmation
        assert conf.true_valuation == V(2, 0) and conf.gain == F(3 - 1, 2)


def test_criterion_6_probe_search():
    with Criterion(6, "no threshold mechanism within H=4 on the probe grid") as c:
        space = SearchSpace(PROBE_GRID)
        start = time.perf_counter()
        cert = search_best(space, 4)
        elapsed = time.perf_counter() - start
        c.note(f"{elapsed:.0f}s, best ratio {cert.best_ratio}")
        assert elapsed < 600
        assert all(replay_removal(space, r, 4) for r in cert.log)
        for m in (cert.best_mechanism, cert.accepted_mechanism):
            if m is not None:
                assert check_dsic(m, PROBE_GRID) == [] and check_ir(m, PROBE_GRID) == []
                assert check_consistency(m, PROBE_GRID) == []
        assert worst_case_ratio(cert.best_mechanism, PROBE_GRID).ratio == cert.best_ratio
        c.note(f"{len(cert.log)} rejections replayed")
        assert cert.impossible, "the grid admits a mechanism with ratio " + str(cert.best_ratio)


def test_criterion_7_stochastic_arrival():
    with Criterion(7, "stochastic arrival at p=1/2: truthful per scenario, expected ratio <= 2") as c:
        m = catalog("stochastic", p=F(1, 2))
        dsic, ir = check_dsic(m, STOCHASTIC_GRID), check_ir(m, STOCHASTIC_GRID)
        rep = expected_ratio(m, STOCHASTIC_GRID)
        c.note(f"DSIC {len(dsic)}, IR {len(ir)}, ratio {rep.ratio}")
        assert dsic == [] and ir == []
        assert rep.ratio <= 2


def test_criterion_8_random_baselines():
    with Criterion(8, "random bidder and random item within 2 in expectation") as c:
        worst = {}
        for name in ("random_bidder", "random_item"):
            m = catalog(name)
            worst[name] = max(expected_ratio(m, g).ratio for g in TEST_GRIDS + [STOCHASTIC_GRID])
            assert worst[name] <= 2
        c.note(", ".join(f"{k} {v}" for k, v in worst.items()))


MICRO_GRIDS = [Grid.of([0, 1]), Grid.of([0, 1, 2]), Grid.of([1, 3]), Grid.of([0, F(1, 2), 2])]


def test_criterion_9_oracles():
    with Criterion(9, "payments agree with brute force; pruning keeps the accepted set") as c:
        checked = 0
        for g in MICRO_GRIDS:
            for name in ("greedy", "per_item_highest", "bundling", "vcg_ish", "discount"):
                for bidder, opp, s, cert in payments_report(catalog(name), g):
                    brute = brute_force_payments_exist(catalog(name), bidder, opp, s, g)
                    assert cert.feasible == (brute is not None), (name, bidder, opp, s)
                    checked += 1
        c.note(f"{checked} payment problems")
        for values, H in (([0, 1], 2), ([1, 2], 2), ([0, 1, 2], 1)):
            g = Grid.of(values)
            full = SearchSpace(g, prune_order=False, prune_br=False)
            pruned = set(enumerate_solutions(SearchSpace(g), H))
            assert pruned == {canonical(full, t) for t in enumerate_solutions(full, H)}
        c.note("pruning sound on 3 micro cases")
