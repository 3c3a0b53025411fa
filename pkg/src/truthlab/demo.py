"""Short narrated runs of the library, used by ``truthlab demo`` and demos/."""
from __future__ import annotations

import sys
from fractions import Fraction

from .characterize import (CORRUPTIONS, FIXTURE_GRID, LEMMAS, SNEpsilonProbe, canonical_fixture,
                           constancy_probe, corrupted_fixture, lemma_suite)
from .core import Grid, Scenario, Valuation
from .impossibility import SearchSpace, search_best
from .mechanisms import Threshold, catalog, constant_with_complement, threshold_outcome
from .payments import check_witness, payments_exist
from .verify import check_consistency, check_dsic, check_ir, expected_ratio, worst_case_ratio


def discount(out):
    g = Grid.of([0, 2, 100, 101])
    m = catalog("discount")
    out.write("The discount mechanism prices item 2 off the winner's item-1 surplus.\n")
    bad = check_dsic(m, g) + check_ir(m, g) + check_consistency(m, g)
    out.write(f"  violations on {[str(x) for x in g.values]}: {len(bad)}\n")
    rep = worst_case_ratio(m, g)
    out.write(f"  but its worst ratio is {rep}\n")
    big = Grid.of([*g.values, 1000, 1001])
    out.write(f"  and adding 1000, 1001 to the grid pushes it to {worst_case_ratio(m, big).ratio}\n")
    return 0


def greedy(out):
    g = Grid.of([0, 1, 2, 3, 4, 8])
    m = catalog("greedy")
    out.write(f"Greedy keeps half the optimum: worst ratio {worst_case_ratio(m, g).ratio}.\n")
    w = Valuation(3, 4)
    cert = payments_exist(m, "V", w, Scenario.TWO_ITEMS, g)
    out.write(f"No prices make it truthful for V facing w={w}:\n  {cert}\n")
    out.write(f"  witness re-derived from raw values: {check_witness(m, cert, 'V', w, Scenario.TWO_ITEMS)}\n")
    return 0


def lemmas(out):
    g = FIXTURE_GRID
    rep = lemma_suite(canonical_fixture(g), g, 10, bidders=("V",))
    out.write("Constant thresholds pi1=2, pi2=5 for V, W takes the rest:\n")
    out.write("  " + " ".join(f"{lem}={rep.status(lem)}" for lem in LEMMAS) + "\n")
    for kind, target in CORRUPTIONS.items():
        bad = lemma_suite(corrupted_fixture(kind, g), g, 10, bidders=("V",))
        out.write(f"{kind} (aimed at {target}) breaks {sorted(bad.failed_lemmas())}:\n"
                  f"  {bad.failures()[0].confirmation}\n")
    return 0


def stochastic(out):
    g = Grid.of([0, 1, 2, Fraction(5, 2), 3, 4, 5, 8, 10])
    m = catalog("stochastic", p=Fraction(1, 2))
    bad = check_dsic(m, g) + check_ir(m, g)
    out.write(f"Stochastic arrival, p=1/2: {len(bad)} violations, "
              f"expected ratio {expected_ratio(m, g).ratio}\n")
    for name in ("random_bidder", "random_item"):
        out.write(f"  {name}: expected ratio {expected_ratio(catalog(name), g).ratio}\n")
    return 0


def search(out):
    g = Grid.of([0, 1, 2])
    for H in (1, 2):
        cert = search_best(SearchSpace(g), H)
        verdict = "none within H" if cert.impossible else "found one within H"
        out.write(f"Threshold mechanisms on {{0,1,2}} at H={H}: {verdict}; best ratio {cert.best_ratio}\n")
    return 0


def probe(out):
    g = Grid.of([0, Fraction(1, 512), Fraction(1, 64), Fraction(1, 16), Fraction(1, 8),
                 Fraction(1, 2), 1, 8])
    m = constant_with_complement(Threshold(Fraction(1, 32), Fraction(1, 4)), g)
    p = constancy_probe(m, SNEpsilonProbe(8, Fraction(1, 8), 4), g)
    out.write("Constant thresholds pi1=1/32, pi2=1/4 along w1 in (0, 1/8), w2 = 8, H=4:\n")
    for c in p.checks:
        out.write(f"  {c.name}: {c.status}\n")
    out.write(f"  candidate ratios {' and '.join(str(r) for r in p.candidate_ratios)}; "
              f"{p.ratio_witness}\n")
    return 0


def region_map(out):
    t = Threshold(2, 5)
    out.write("V's bundles facing pi1=2, pi2=5 (rows v2 high to low, columns v1):\n")
    vals = [0, 1, 2, 3, 5, 6, 9]
    for v2 in reversed(vals):
        cells = []
        for v1 in vals:
            b, _ = threshold_outcome(t, Valuation(v1, v2), Scenario.TWO_ITEMS)
            cells.append(f"{str(b):>6}")
        out.write(f"  {v2:>2} |" + "".join(cells) + "\n")
    return 0


DEMOS = {
    "discount": discount,
    "greedy": greedy,
    "lemmas": lemmas,
    "probe": probe,
    "regions": region_map,
    "stochastic": stochastic,
    "search": search,
}


def run(name: str, out=sys.stdout) -> int:
    if name == "list":
        out.write("demos: " + " ".join(DEMOS) + "\n")
        return 0
    if name not in DEMOS:
        out.write(f"unknown demo {name!r}; choose from {' '.join(DEMOS)}\n")
        return 2
    return DEMOS[name](out)
