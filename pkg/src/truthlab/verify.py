"""Brute-force checks of truthfulness, individual rationality, sequential
consistency and welfare approximation over finite grids.

Every failure is reported with a concrete witness that can be replayed
through :mod:`truthlab.core`.
"""
from __future__ import annotations

import csv
import enum
import functools
import io
import os
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .core import (Grid, Outcome, Scenario, Valuation, bundle_value, offline_opt, utility,
                   welfare)
from .mechanisms import MechanismSpec, evaluate

SCENARIOS = (Scenario.ONE_ITEM, Scenario.TWO_ITEMS)


class ViolationKind(enum.Enum):
    DSIC = "DSIC"
    IR = "IR"
    CONSISTENCY = "Consistency"
    FEASIBILITY = "Feasibility"


@dataclass(frozen=True)
class ViolationReport:
    kind: ViolationKind
    bidder: str
    true_valuation: Valuation
    opponent: Valuation
    scenario: Scenario
    utility_truth: Fraction
    utility_deviation: Fraction | None = None
    misreport: Valuation | None = None
    detail: str = ""

    @property
    def gain(self) -> Fraction | None:
        if self.utility_deviation is None:
            return None
        return self.utility_deviation - self.utility_truth

    def sort_key(self):
        mis = (self.misreport.v1, self.misreport.v2) if self.misreport else (-1, -1)
        return (self.kind.value, self.bidder, self.scenario.value,
                self.opponent.v1, self.opponent.v2,
                self.true_valuation.v1, self.true_valuation.v2, *mis)

    def profile(self, valuation: Valuation | None = None) -> tuple[Valuation, Valuation]:
        own = self.true_valuation if valuation is None else valuation
        return (own, self.opponent) if self.bidder == "V" else (self.opponent, own)

    def __str__(self):
        head = (f"{self.kind.value} bidder={self.bidder} true={self.true_valuation} "
                f"opp={self.opponent} {self.scenario}")
        if self.kind is ViolationKind.DSIC:
            return (f"{head} misreport={self.misreport} u_truth={self.utility_truth} "
                    f"u_dev={self.utility_deviation}")
        if self.kind is ViolationKind.IR:
            return f"{head} u_truth={self.utility_truth}"
        return f"{head} {self.detail}"


@functools.total_ordering
class _Unbounded:
    """Ratio of positive optimum to zero welfare; larger than every rational."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __gt__(self, other):
        return other is not self

    def __hash__(self):
        return hash("Unbounded")

    def __repr__(self):
        return "Unbounded"

    __str__ = __repr__


UNBOUNDED = _Unbounded()


def ratio_of(opt: Fraction, achieved: Fraction):
    """OPT / welfare with 0/0 = 1 and x/0 = Unbounded."""
    if achieved == 0:
        return Fraction(1) if opt == 0 else UNBOUNDED
    return opt / achieved


@dataclass(frozen=True)
class RatioReport:
    ratio: object              # Fraction or UNBOUNDED
    witness: tuple | None      # (v, w, scenario) or (v, w, None) for mixed expectations
    H: Fraction | None = None
    opt: Fraction | None = None
    achieved: Fraction | None = None

    @property
    def within(self) -> bool | None:
        if self.H is None:
            return None
        return not (self.ratio > self.H)

    def __str__(self):
        if self.witness is None:
            return f"ratio={self.ratio}"
        v, w, s = self.witness
        tail = f" H={self.H}" if self.H is not None else ""
        return (f"ratio={self.ratio} witness v={v} w={w} {s if s else 'expected'} "
                f"opt={self.opt} welfare={self.achieved}{tail}")


# ---------------------------------------------------------------------------
# outcome tables
# ---------------------------------------------------------------------------

def _outcomes(m: MechanismSpec, g: Grid, scenarios=SCENARIOS) -> dict:
    return {(v, w, s): evaluate(m, v, w, s, strict=False)
            for v, w in g.profiles() for s in scenarios}


def _jobs(jobs: int | None) -> int:
    if jobs is None:
        jobs = int(os.environ.get("TRUTHLAB_JOBS", "1") or 1)
    return max(1, jobs)


def _pmap(fn, tasks: list, jobs: int | None):
    jobs = _jobs(jobs)
    if jobs == 1 or len(tasks) < 2:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def _own_and_opp(g: Grid, bidder: str):
    return g.types(bidder), g.types("W" if bidder == "V" else "V")


def _key(bidder, own, opp, s):
    return (own, opp, s) if bidder == "V" else (opp, own, s)


def _dsic_ir_task(args):
    m, g, bidder, s, opps, do_dsic, do_ir = args
    own_types, _ = _own_and_opp(g, bidder)
    found = []
    for opp in opps:
        outs = {t: evaluate(m, *_key(bidder, t, opp, s)[:2], s, strict=False) for t in own_types}
        menu = defaultdict(list)
        for t in own_types:
            out = outs[t]
            menu[(out.bundle(bidder), out.payment(bidder))].append(t)
        for t in own_types:
            out = outs[t]
            u_truth = utility(t, out.bundle(bidder), out.payment(bidder))
            if do_ir and u_truth < 0:
                found.append(ViolationReport(ViolationKind.IR, bidder, t, opp, s, u_truth))
            if not do_dsic:
                continue
            for (bundle, pay), reporters in menu.items():
                u_dev = bundle_value(t, bundle) - pay
                if u_dev > u_truth:
                    found.extend(ViolationReport(ViolationKind.DSIC, bidder, t, opp, s, u_truth,
                                                 u_dev, misreport=r) for r in reporters)
    return found


def _check(m, g, bidders, scenarios, opponents, jobs, dsic, ir):
    tasks = []
    for spec in m.realizations():
        for bidder in bidders:
            opps = list(opponents) if opponents is not None else _own_and_opp(g, bidder)[1]
            for s in scenarios:
                chunk = max(1, len(opps) // max(1, 4 * _jobs(jobs)))
                for i in range(0, len(opps), chunk):
                    tasks.append((spec, g, bidder, s, opps[i:i + chunk], dsic, ir))
    found = [r for part in _pmap(_dsic_ir_task, tasks, jobs) for r in part]
    return sorted(found, key=ViolationReport.sort_key)


def check_dsic(m: MechanismSpec, g: Grid, *, bidders=("V", "W"), scenarios=SCENARIOS,
               opponents: Iterable[Valuation] | None = None,
               jobs: int | None = None) -> list[ViolationReport]:
    """Every (true type, misreport) pair on the grid with a strict utility gain.

    Randomized specs without a realized coin are checked once per coin
    (universal truthfulness).  An empty list means truthful on the grid.
    """
    return _check(m, g, bidders, scenarios, opponents, jobs, True, False)


def check_ir(m: MechanismSpec, g: Grid, *, bidders=("V", "W"), scenarios=SCENARIOS,
             opponents: Iterable[Valuation] | None = None,
             jobs: int | None = None) -> list[ViolationReport]:
    return _check(m, g, bidders, scenarios, opponents, jobs, False, True)


def check_consistency(m: MechanismSpec, g: Grid) -> list[ViolationReport]:
    """Item 1 must go to the same bidder whether or not item 2 arrives, and
    no outcome may hand an item to both bidders."""
    found = []
    for spec in m.realizations():
        for v, w in g.profiles():
            outs = {s: evaluate(spec, v, w, s, strict=False) for s in SCENARIOS}
            for s, out in outs.items():
                if not out.allocation.is_feasible(s):
                    found.append(ViolationReport(ViolationKind.FEASIBILITY, "V", v, w, s, Fraction(0),
                                                 detail=f"infeasible {out.allocation} ({spec})"))
            one, two = (outs[s].allocation.item1_holder() for s in SCENARIOS)
            if one != two:
                found.append(ViolationReport(
                    ViolationKind.CONSISTENCY, "V", v, w, Scenario.TWO_ITEMS, Fraction(0),
                    detail=f"item 1 to {one} with one item but to {two} with two ({spec})"))
    return sorted(found, key=ViolationReport.sort_key)


def replay(m: MechanismSpec, r: ViolationReport) -> bool:
    """Recompute a violation from scratch and confirm it."""
    spec = m
    v, w = r.profile()
    out = evaluate(spec, v, w, r.scenario, strict=False)
    u_truth = utility(r.true_valuation, out.bundle(r.bidder), out.payment(r.bidder))
    if r.kind is ViolationKind.IR:
        return u_truth == r.utility_truth and u_truth < 0
    if r.kind is ViolationKind.DSIC:
        dv, dw = r.profile(r.misreport)
        dev = evaluate(spec, dv, dw, r.scenario, strict=False)
        u_dev = utility(r.true_valuation, dev.bundle(r.bidder), dev.payment(r.bidder))
        return u_truth == r.utility_truth and u_dev == r.utility_deviation and u_dev > u_truth
    if r.kind is ViolationKind.FEASIBILITY:
        return not out.allocation.is_feasible(r.scenario)
    one = evaluate(spec, v, w, Scenario.ONE_ITEM, strict=False).allocation.item1_holder()
    two = evaluate(spec, v, w, Scenario.TWO_ITEMS, strict=False).allocation.item1_holder()
    return one != two


# ---------------------------------------------------------------------------
# approximation
# ---------------------------------------------------------------------------

def worst_case_ratio(m: MechanismSpec, g: Grid, H=None, scenarios=SCENARIOS) -> RatioReport:
    """Max of OPT / welfare over grid profiles and arrival scenarios."""
    if m.is_randomized and m.coin is None:
        raise ValueError("worst_case_ratio needs a deterministic mechanism; use expected_ratio")
    best = None
    for v, w in g.profiles():
        for s in scenarios:
            out = evaluate(m, v, w, s, strict=False)
            opt = offline_opt(v, w, s)
            got = welfare(out.allocation, v, w)
            r = ratio_of(opt, got)
            if best is None or r > best.ratio:
                best = RatioReport(r, (v, w, s), H, opt, got)
    return best


def expected_ratio(m: MechanismSpec, g: Grid, arrival_prob=None, H=None) -> RatioReport:
    """Max over profiles of E[OPT] / E[welfare] with exact expectations.

    The coin of a randomized spec is uniform.  With ``arrival_prob`` item 2
    arrives with that probability; without it (and for non-stochastic
    specs) each scenario is taken adversarially.  A stochastic-arrival spec
    defaults to its own ``p``.
    """
    if arrival_prob is None and m.p is not None:
        arrival_prob = m.p
    q = None if arrival_prob is None else Fraction(arrival_prob)
    specs = m.realizations()
    best = None
    for v, w in g.profiles():
        per_s = {}
        for s in SCENARIOS:
            total = sum((welfare(evaluate(sp, v, w, s, strict=False).allocation, v, w) for sp in specs),
                        Fraction(0))
            per_s[s] = (offline_opt(v, w, s), total / len(specs))
        if q is None:
            cases = [(opt, got, s) for s, (opt, got) in per_s.items()]
        else:
            (o1, g1), (o2, g2) = per_s[Scenario.ONE_ITEM], per_s[Scenario.TWO_ITEMS]
            cases = [((1 - q) * o1 + q * o2, (1 - q) * g1 + q * g2, None)]
        for opt, got, s in cases:
            r = ratio_of(opt, got)
            if best is None or r > best.ratio:
                best = RatioReport(r, (v, w, s), H, opt, got)
    return best


def replay_ratio(m: MechanismSpec, report: RatioReport) -> bool:
    v, w, s = report.witness
    out = evaluate(m, v, w, s, strict=False)
    opt, got = offline_opt(v, w, s), welfare(out.allocation, v, w)
    return opt == report.opt and got == report.achieved and ratio_of(opt, got) == report.ratio


# ---------------------------------------------------------------------------
# report output
# ---------------------------------------------------------------------------

VIOLATION_FIELDS = ["kind", "bidder", "scenario", "v1", "v2", "w1", "w2", "true1", "true2",
                    "report1", "report2", "utility_truth", "utility_deviation", "detail"]


def violations_to_csv(reports: Iterable[ViolationReport]) -> str:
    """One self-contained row per violation: the full profile plus the misreport."""
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(VIOLATION_FIELDS)
    for r in reports:
        v, w = r.profile()
        mis = r.misreport
        out.writerow([r.kind.value, r.bidder, r.scenario.value, v.v1, v.v2, w.v1, w.v2,
                      r.true_valuation.v1, r.true_valuation.v2,
                      mis.v1 if mis else "", mis.v2 if mis else "",
                      r.utility_truth, "" if r.utility_deviation is None else r.utility_deviation,
                      r.detail])
    return buf.getvalue()


def ratio_to_csv(reports: Iterable[tuple[str, RatioReport]]) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["mechanism", "ratio", "v1", "v2", "w1", "w2", "scenario", "opt", "welfare", "H"])
    for name, r in reports:
        v, w, s = r.witness
        out.writerow([name, r.ratio, v.v1, v.v2, w.v1, w.v2, s.value if s else "expected",
                      r.opt, r.achieved, "" if r.H is None else r.H])
    return buf.getvalue()
