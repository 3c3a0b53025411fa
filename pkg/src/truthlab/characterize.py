"""Threshold structure of a mechanism, checked lemma by lemma on a grid.

Thresholds recovered from a finite grid are intervals: with ``lo`` the
largest value that is not allocated and ``hi`` the smallest that is, the
true threshold lies in ``[lo, hi]``.  Every comparison below is made
against the whole interval, so a check only fails when it fails for every
threshold consistent with the grid.  Points whose region depends on where
in the interval the threshold sits are treated as boundary points and
skipped.
"""
from __future__ import annotations

import csv
import enum
import functools
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .core import (BOTH, EMPTY, ITEM1, ITEM2, Allocation, Bundle, ConfigurationError, Grid, Outcome,
                   Scenario, Valuation, bundle_value, offline_opt, rational, welfare)
from .mechanisms import (MechanismSpec, Threshold, constant_with_complement, evaluate, tabulate,
                         threshold_outcome)
from .verify import SCENARIOS, RatioReport, ViolationKind, ViolationReport, _pmap, ratio_of


class Region(enum.Enum):
    BL = "BL"
    BR = "BR"
    TL = "TL"
    TR = "TR"
    BOUNDARY = "Boundary"


def classify_region(v: Valuation, pi1, pi2) -> Region:
    pi1, pi2 = rational(pi1), rational(pi2)
    if pi1 < 0 or pi2 < 0:
        raise ConfigurationError("thresholds must be nonnegative")
    if v.v1 == pi1:
        return Region.BOUNDARY
    if v.v1 < pi1:
        if v.v2 == pi2:
            return Region.BOUNDARY
        return Region.TL if v.v2 > pi2 else Region.BL
    up, right = v.v2 - pi2, v.v1 - pi1
    if up == right:
        return Region.BOUNDARY
    return Region.TR if up > right else Region.BR


# ---------------------------------------------------------------------------
# threshold extraction
# ---------------------------------------------------------------------------

@functools.total_ordering
class _AboveGrid:
    """Threshold beyond every grid value."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __hash__(self):
        return hash("AboveGrid")

    def __repr__(self):
        return "AboveGrid"


ABOVE_GRID = _AboveGrid()


@dataclass(frozen=True)
class Interval:
    """A threshold known to lie in ``[lo, hi]``; ``hi=None`` means above the grid."""

    lo: Fraction
    hi: Fraction | None

    @property
    def representative(self):
        return ABOVE_GRID if self.hi is None else (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        x = rational(x)
        return self.lo <= x and (self.hi is None or x <= self.hi)

    def overlaps(self, other: "Interval") -> bool:
        return ((self.hi is None or other.lo <= self.hi)
                and (other.hi is None or self.lo <= other.hi))

    def __str__(self):
        return f"[{self.lo}, {'above' if self.hi is None else self.hi}]"


@dataclass(frozen=True)
class ThresholdEstimate:
    pi1: Interval
    pi2: Interval
    strip_payment: Fraction | None = None   # price paid for item 2 left of pi1

    @property
    def first(self):
        return self.pi1.representative

    @property
    def second(self):
        return self.pi2.representative

    def __str__(self):
        return f"pi1={self.first} in {self.pi1}, pi2={self.second} in {self.pi2}"


@dataclass(frozen=True)
class NotThresholdForm:
    stage: str                                 # "item1" or "item2"
    witness: tuple[Valuation, Valuation]       # allocated, not allocated
    rows: tuple = ()                           # every offending row value

    def __str__(self):
        a, b = self.witness
        return f"not threshold form ({self.stage}): {a} allocated but {b} not"


class _View:
    """Outcomes of one bidder against one fixed opponent report."""

    def __init__(self, m: MechanismSpec, bidder: str, opp: Valuation, g: Grid):
        self.m, self.bidder, self.opp, self.g = m, bidder, opp, g
        self.types = g.types(bidder)
        self.out = {}
        for s in SCENARIOS:
            for t in self.types:
                self.out[t, s] = evaluate(m, *self.profile(t), s, strict=False)

    def profile(self, t: Valuation) -> tuple[Valuation, Valuation]:
        return (t, self.opp) if self.bidder == "V" else (self.opp, t)

    def bundle(self, t, s=Scenario.TWO_ITEMS):
        return self.out[t, s].bundle(self.bidder)

    def pay(self, t, s=Scenario.TWO_ITEMS):
        return self.out[t, s].payment(self.bidder)

    def utility(self, t, report, s=Scenario.TWO_ITEMS):
        return bundle_value(t, self.bundle(report, s)) - self.pay(report, s)

    def dsic_report(self, t, report, s=Scenario.TWO_ITEMS) -> ViolationReport | None:
        u, d = self.utility(t, t, s), self.utility(t, report, s)
        if d > u:
            return ViolationReport(ViolationKind.DSIC, self.bidder, t, self.opp, s, u, d, misreport=report)
        return None

    def ir_report(self, t, s=Scenario.TWO_ITEMS) -> ViolationReport | None:
        u = self.utility(t, t, s)
        return ViolationReport(ViolationKind.IR, self.bidder, t, self.opp, s, u) if u < 0 else None

    def ratio(self, t, s) -> RatioReport:
        v, w = self.profile(t)
        opt = offline_opt(v, w, s)
        got = welfare(self.out[t, s].allocation, v, w)
        return RatioReport(ratio_of(opt, got), (v, w, s), None, opt, got)


def _cut(view: _View, members, allocated, axis: str, other: str, stage: str):
    """Interval of a one-dimensional cut along ``axis`` over ``members``, or
    NotThresholdForm when allocation varies along ``other`` or is not
    upward closed along ``axis``."""
    by_row: dict[Fraction, set] = {}
    for t in members:
        by_row.setdefault(getattr(t, axis), set()).add(allocated(t))
    mixed = sorted(x for x, seen in by_row.items() if len(seen) > 1)
    if mixed:
        x = mixed[-1]
        row = sorted((t for t in members if getattr(t, axis) == x), key=lambda t: getattr(t, other))
        yes = [t for t in row if allocated(t)][-1]
        no = next(t for t in row if not allocated(t))
        return NotThresholdForm(stage, (yes, no), tuple(mixed))
    yes = sorted(x for x, seen in by_row.items() if True in seen)
    no = sorted(x for x, seen in by_row.items() if False in seen)
    if yes and no and no[-1] > yes[0]:
        a = next(t for t in members if getattr(t, axis) == yes[0])
        b = next(t for t in members if getattr(t, axis) == no[-1])
        return NotThresholdForm(stage, (a, b), (yes[0], no[-1]))
    lo = no[-1] if no else Fraction(0)
    hi = yes[0] if yes else None
    return Interval(lo, hi)


def _extract(view: _View):
    item1 = _cut(view, view.types, lambda t: view.bundle(t, Scenario.ONE_ITEM).has_item1,
                 "v1", "v2", "item1")
    if isinstance(item1, NotThresholdForm):
        return item1
    strip = [t for t in view.types if not view.bundle(t, Scenario.ONE_ITEM).has_item1]
    strip_pay = None
    if strip:
        item2 = _cut(view, strip, lambda t: view.bundle(t).has_item2, "v2", "v1", "item2")
        if isinstance(item2, NotThresholdForm):
            return item2
        payers = [view.pay(t) for t in strip if view.bundle(t).has_item2]
        strip_pay = payers[0] if payers and len(set(payers)) == 1 else None
    else:
        # nobody is left of pi1: read pi2 off the price of the full bundle
        prices = sorted({view.pay(t) for t in view.types if view.bundle(t) == BOTH})
        item2 = Interval(prices[0], prices[-1]) if prices else Interval(Fraction(0), None)
    return ThresholdEstimate(item1, item2, strip_pay)


def extract_thresholds(m: MechanismSpec, bidder: str, opponent_val: Valuation, g: Grid):
    """Recover ``(pi1, pi2)`` faced by ``bidder`` at ``opponent_val``."""
    return _extract(_View(m, bidder, opponent_val, g))


def certain_region(v: Valuation, est: ThresholdEstimate) -> Region:
    """Region of ``v`` if it is the same for every threshold in the
    estimate's intervals, else Boundary."""
    p1, p2 = est.pi1, est.pi2
    if p1.hi is not None and v.v1 > p1.hi:
        if p2.hi is None:
            return Region.BR
        if v.v2 - p2.hi > v.v1 - p1.lo:
            return Region.TR
        if v.v2 - p2.lo < v.v1 - p1.hi:
            return Region.BR
        return Region.BOUNDARY
    if v.v1 < p1.lo:
        if v.v2 < p2.lo:
            return Region.BL
        if p2.hi is not None and v.v2 > p2.hi:
            return Region.TL
    return Region.BOUNDARY


# ---------------------------------------------------------------------------
# lemma suite
# ---------------------------------------------------------------------------

LEMMAS = ("L1", "L2", "L3", "L4", "L5", "L6", "L7", "L8", "C1")
NEEDS_POSITIVE_W1 = {"L4", "L5", "L6", "L7", "L8", "C1"}


@dataclass(frozen=True)
class LemmaResult:
    lemma: str
    bidder: str
    opponent: Valuation
    status: str                       # pass, fail, n/a
    witness: str = ""
    confirmation: object = None       # ViolationReport or RatioReport

    def line(self) -> str:
        tail = f" witness: {self.witness}" if self.witness else ""
        conf = f" confirmed: {self.confirmation}" if self.confirmation is not None else ""
        return f"{self.lemma} bidder={self.bidder} opp={self.opponent} {self.status}{tail}{conf}"


@dataclass
class LemmaReport:
    H: Fraction
    results: list = field(default_factory=list)

    def status(self, lemma: str) -> str:
        """Aggregate: fail if any point fails, pass if any passes, else n/a."""
        seen = {r.status for r in self.results if r.lemma == lemma}
        if "fail" in seen:
            return "fail"
        return "pass" if "pass" in seen else "n/a"

    def failures(self, lemma: str | None = None) -> list[LemmaResult]:
        return [r for r in self.results if r.status == "fail" and (lemma is None or r.lemma == lemma)]

    def failed_lemmas(self) -> set[str]:
        return {r.lemma for r in self.failures()}

    def text(self) -> str:
        head = [f"# lemma report H={self.H}"]
        head += [f"{lem} {self.status(lem)}" for lem in LEMMAS]
        return "\n".join(head + [r.line() for r in self.results]) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["lemma", "bidder", "opp1", "opp2", "status", "witness", "confirmation"])
        for r in self.results:
            wr.writerow([r.lemma, r.bidder, r.opponent.v1, r.opponent.v2, r.status, r.witness,
                         "" if r.confirmation is None else str(r.confirmation)])
        return buf.getvalue()


def _confirm(view: _View, H, involve=()) -> object:
    """An executable witness for a structural failure at this opponent point:
    a DSIC or IR violation (preferring ones that involve ``involve``), or a
    profile whose ratio exceeds H."""
    involve = set(involve)
    for s in SCENARIOS:
        for t in view.types:
            r = view.ir_report(t, s)
            if r is not None and (not involve or t in involve):
                return r
    found = []
    for s in SCENARIOS:
        menu = {}
        for t in view.types:
            menu.setdefault((view.bundle(t, s), view.pay(t, s)), t)
        for t in view.types:
            for rep in menu.values():
                r = view.dsic_report(t, rep, s)
                if r is not None:
                    found.append(r)
                    break
    for r in found:
        if r.true_valuation in involve or r.misreport in involve:
            return r
    if found:
        return found[0]
    if H is not None:
        worst = max((view.ratio(t, s) for s in SCENARIOS for t in view.types), key=lambda r: r.ratio)
        if worst.ratio > H:
            return RatioReport(worst.ratio, worst.witness, H, worst.opt, worst.achieved)
    return None


def _lemmas_at(view: _View, H) -> list[LemmaResult]:
    b, opp = view.bidder, view.opp
    res = []

    def add(lemma, status, witness="", conf=None):
        res.append(LemmaResult(lemma, b, opp, status, witness, conf))

    def fail(lemma, witness, involve=(), conf=None):
        add(lemma, "fail", witness, conf if conf is not None else _confirm(view, H, involve))

    est = _extract(view)
    positive = opp.v1 > 0
    if isinstance(est, NotThresholdForm):
        lemma = "L1" if est.stage == "item1" else "L2"
        fail(lemma, str(est), est.witness)
        for lem in LEMMAS:
            if lem != lemma and not (lem in NEEDS_POSITIVE_W1 and not positive):
                add(lem, "n/a", "threshold form not established")
        return res
    add("L1", "pass", str(est.pi1))
    p1, p2 = est.pi1, est.pi2
    one, two = Scenario.ONE_ITEM, Scenario.TWO_ITEMS

    # L2: constant item-2 price on the strip, inside the pi2 interval
    strip = [t for t in view.types if not view.bundle(t, one).has_item1]
    payers = [t for t in strip if view.bundle(t) == ITEM2]
    bad = _payment_check(view, payers, p2, two)
    if bad is not None:
        fail("L2", bad[0], conf=bad[1])
    else:
        add("L2", "pass" if payers else "n/a", str(p2))

    # L3: constant price for item 1 alone, per scenario, inside the pi1 interval
    l3 = None
    for s in SCENARIOS:
        alone = [t for t in view.types if view.bundle(t, s) == ITEM1]
        l3 = l3 or _payment_check(view, alone, p1, s)
    if l3 is not None:
        fail("L3", l3[0], conf=l3[1])
    else:
        add("L3", "pass", str(p1))

    if not positive:
        return res

    # L4: item 1 always allocated and the one-item outcome is H-approximate
    worst = None
    for t in view.types:
        r = view.ratio(t, one)
        if r.ratio > H and (worst is None or r.ratio > worst.ratio):
            worst = r
    if worst is not None:
        fail("L4", f"one-item ratio {worst.ratio} at v={worst.witness[0]} w={worst.witness[1]}",
             conf=RatioReport(worst.ratio, worst.witness, H, worst.opt, worst.achieved))
    else:
        add("L4", "pass")

    # L5: pi2 below the top of the grid
    if strip:
        top = max(t.v2 for t in strip)
        missing = [t for t in strip if t.v2 == top and not view.bundle(t).has_item2]
        if missing:
            fail("L5", f"{missing[0]} on the strip gets no item 2", missing)
        else:
            add("L5", "pass")
    else:
        add("L5", "n/a", "empty strip")

    # L6: top-right gets both items at the strip price
    tr = [t for t in view.types if certain_region(t, est) is Region.TR]
    l6 = _check_tr(view, tr, est)
    if l6 is not None:
        fail("L6", l6[0], l6[2], conf=l6[1])
    else:
        add("L6", "pass" if tr else "n/a")

    # L7: pi2 >= pi1
    if p2.hi is not None and p1.hi is not None and p2.hi < p1.lo:
        w7 = _l7_witness(view, est)
        fail("L7", f"pi2 in {p2} below pi1 in {p1}", conf=w7)
    else:
        add("L7", "pass")

    # L8: bottom-right gets item 1 alone at pi1 when pi2 > pi1
    br = [t for t in view.types if certain_region(t, est) is Region.BR]
    if p1.hi is not None and p2.lo > p1.hi:
        wrong = [t for t in br if view.bundle(t) != ITEM1]
        if wrong:
            fail("L8", f"{wrong[0]} in B_R gets {view.bundle(wrong[0])}",
                 conf=_l8_witness(view, wrong))
        else:
            add("L8", "pass" if br else "n/a")
    else:
        add("L8", "n/a", "pi2 > pi1 not certain")

    # C1: the region table (the pi2 > pi1 refinement in B_R is L8's)
    expect = {Region.BL: lambda x: x == EMPTY, Region.TL: lambda x: x == ITEM2,
              Region.BR: lambda x: x.has_item1, Region.TR: lambda x: x == BOTH}
    wrong = [(t, reg) for t in view.types
             if (reg := certain_region(t, est)) in expect and not expect[reg](view.bundle(t))]
    if wrong:
        t, reg = wrong[0]
        fail("C1", f"{t} in {reg.value} gets {view.bundle(t)}", [t])
    else:
        add("C1", "pass")
    return res


def _payment_check(view: _View, payers, interval: Interval, s: Scenario):
    """Payers of one bundle must pay one price lying in ``interval``.
    Returns (description, witness) on failure."""
    if not payers:
        return None
    by_price = sorted(payers, key=lambda t: (view.pay(t, s), t))
    cheap, dear = by_price[0], by_price[-1]
    if view.pay(cheap, s) != view.pay(dear, s):
        return (f"{dear} pays {view.pay(dear, s)} but {cheap} pays {view.pay(cheap, s)} for "
                f"{view.bundle(dear, s)}", view.dsic_report(dear, cheap, s))
    price = view.pay(cheap, s)
    if interval.contains(price):
        return None
    bundle = view.bundle(cheap, s)
    if interval.hi is not None and price > interval.hi:
        # a payer at the cheap end of the interval is charged above value
        poorest = min(payers, key=lambda t: (bundle_value(t, bundle), t))
        return (f"price {price} above threshold {interval}", view.ir_report(poorest, s))
    # price below the threshold: the richest non-recipient buys in
    others = [t for t in view.types if view.bundle(t, s) != bundle]
    for t in sorted(others, key=lambda t: -bundle_value(t, bundle)):
        r = view.dsic_report(t, cheap, s)
        if r is not None:
            return (f"price {price} below threshold {interval}", r)
    return (f"price {price} below threshold {interval}", None)


def _check_tr(view: _View, tr, est: ThresholdEstimate):
    for t in tr:
        if view.bundle(t) != BOTH:
            return (f"{t} in T_R gets {view.bundle(t)}", None, [t])
    if not tr:
        return None
    tl = [t for t in view.types if view.bundle(t) == ITEM2 and not view.bundle(t, Scenario.ONE_ITEM).has_item1]
    ref = est.strip_payment
    for t in tr:
        pay = view.pay(t)
        if ref is not None and pay != ref:
            if pay > ref:
                cheap = min(tl, key=lambda x: (view.pay(x), x))
                return (f"{t} in T_R pays {pay}, T_L pays {ref}", view.dsic_report(t, cheap), [t])
            for x in tl:
                r = view.dsic_report(x, t)
                if r is not None:
                    return (f"{t} in T_R pays {pay}, T_L pays {ref}", r, [t])
            return (f"{t} in T_R pays {pay}, T_L pays {ref}", None, [t])
        if ref is None and not est.pi2.contains(pay):
            return (f"{t} in T_R pays {pay} outside {est.pi2}", None, [t])
    return None


def _l7_witness(view: _View, est: ThresholdEstimate):
    """A type just left of pi1 with no value for item 2 buys into the
    both-items bundle, which is priced at pi2 < pi1."""
    lo1 = est.pi1.lo
    both = [t for t in view.types if view.bundle(t) == BOTH]
    if not both:
        return None
    cheapest = min(both, key=lambda t: (view.pay(t), t))
    for t in sorted(view.types, key=lambda t: (-t.v1, t.v2)):
        if t.v1 <= lo1 and not view.bundle(t, Scenario.ONE_ITEM).has_item1:
            r = view.dsic_report(t, cheapest)
            if r is not None:
                return r
    return None


def _l8_witness(view: _View, wrong):
    """A bottom-right type handed both items prefers the item-1-alone price,
    or, when it pays above its value, the empty bundle."""
    for target in (ITEM1, EMPTY):
        dest = [t for t in view.types if view.bundle(t) == target]
        for t in sorted(wrong, key=lambda t: (view.utility(t, t), t)):
            for a in dest:
                r = view.dsic_report(t, a)
                if r is not None:
                    return r
    return view.ir_report(min(wrong, key=lambda t: (view.utility(t, t), t)))


def _suite_task(args):
    m, g, bidder, opps, H = args
    out = []
    for opp in opps:
        out.extend(_lemmas_at(_View(m, bidder, opp, g), H))
    return out


def lemma_suite(m: MechanismSpec, g: Grid, H, *, bidders=("V", "W"), opponents=None,
                jobs: int | None = None) -> LemmaReport:
    """Run L1-L8 and the region table C1 at every opponent point.

    Lemmas that need a positive opponent item-1 value are skipped where it is
    zero rather than failed.
    """
    H = rational(H)
    tasks = []
    for b in bidders:
        opps = list(opponents) if opponents is not None else g.types("W" if b == "V" else "V")
        for opp in opps:
            tasks.append((m, g, b, [opp], H))
    results = [r for part in _pmap(_suite_task, tasks, jobs) for r in part]
    return LemmaReport(H, results)


# ---------------------------------------------------------------------------
# the S_{N,eps} constancy probe
# ---------------------------------------------------------------------------

@dataclass
class ProbeCheck:
    name: str
    hypothesis: str
    status: str
    witness: str = ""
    confirmation: object = None

    def line(self) -> str:
        tail = f" witness: {self.witness}" if self.witness else ""
        conf = f" confirmed: {self.confirmation}" if self.confirmation is not None else ""
        return f"{self.name} [{self.hypothesis}] {self.status}{tail}{conf}"


@dataclass
class SNEpsilonProbe:
    N: Fraction
    eps: Fraction
    H: Fraction
    w_samples: list = field(default_factory=list)
    observed: dict = field(default_factory=dict)       # w -> ThresholdEstimate
    constants: dict = field(default_factory=dict)      # c_N, c_1N, c_2N
    frozen_alloc: dict = field(default_factory=dict)   # v -> (f1, f2)
    checks: list = field(default_factory=list)
    candidate_ratios: tuple = ()
    ratio_witness: RatioReport | None = None

    def __post_init__(self):
        self.N, self.eps, self.H = rational(self.N), rational(self.eps), rational(self.H)
        if self.H <= 0 or self.eps <= 0:
            raise ConfigurationError("H and eps must be positive")
        if self.N < self.H:
            raise ConfigurationError(f"probe needs N >= H (N={self.N}, H={self.H})")
        if self.eps >= 1 / self.H:
            raise ConfigurationError(f"probe needs eps < 1/H (eps={self.eps}, H={self.H})")

    def in_segment(self, w: Valuation) -> bool:
        return 0 < w.v1 < self.eps and w.v2 == self.N

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def status(self, name: str) -> str:
        return next((c.status for c in self.checks if c.name == name), "n/a")

    def text(self) -> str:
        lines = [f"# probe N={self.N} eps={self.eps} H={self.H}",
                 "samples = " + " ".join(str(w) for w in self.w_samples)]
        for w in self.w_samples:
            lines.append(f"observed {w}: {self.observed.get(w)}")
        for k, c in self.constants.items():
            lines.append(f"{k} = {c}")
        for v, f in sorted(self.frozen_alloc.items()):
            lines.append(f"frozen {v}: f1={f[0]} f2={f[1]}")
        lines += [c.line() for c in self.checks]
        if self.candidate_ratios:
            lines.append("candidate_ratios = " + " ".join(str(r) for r in self.candidate_ratios))
        if self.ratio_witness is not None:
            lines.append(f"ratio_witness: {self.ratio_witness}")
        return "\n".join(lines) + "\n"


def _exact_sqrt(x: Fraction) -> Fraction | None:
    n, d = math.isqrt(x.numerator), math.isqrt(x.denominator)
    return Fraction(n, d) if n * n == x.numerator and d * d == x.denominator else None


def constancy_probe(m: MechanismSpec, probe: SNEpsilonProbe, g: Grid) -> SNEpsilonProbe:
    """Check the thresholds V faces along the segment ``0 < w1 < eps, w2 = N``."""
    N, eps, H = probe.N, probe.eps, probe.H
    samples = [w for w in g.types("W") if probe.in_segment(w)]
    if not samples:
        raise ConfigurationError("grid has no W type with 0 < w1 < eps and w2 = N")
    probe.w_samples = samples
    views = {w: _View(m, "V", w, g) for w in samples}
    ests = {w: _extract(views[w]) for w in samples}
    probe.observed = ests
    checks = probe.checks = []
    one, two = Scenario.ONE_ITEM, Scenario.TWO_ITEMS

    broken = [w for w in samples if isinstance(ests[w], NotThresholdForm)]
    if broken:
        w = broken[0]
        checks.append(ProbeCheck("threshold-form", "-", "fail", str(ests[w]),
                                 _confirm(views[w], H, ests[w].witness)))
        return probe

    # L9: pi1 < H eps, and item 2 is always sold to someone when v1 < H eps
    fail9 = None
    for w in samples:
        view = views[w]
        for t in view.types:
            if t.v1 >= H * eps and not view.bundle(t, one).has_item1:
                fail9 = (f"v={t} unallocated at w={w} though v1 >= H*eps", view.ratio(t, one))
                break
        if fail9:
            break
    checks.append(ProbeCheck("L9 pi1 < H*eps", "N >= H", "fail" if fail9 else "pass",
                             *(fail9 or ("", None))))
    fail9b = None
    for w in samples:
        view = views[w]
        for t in view.types:
            if t.v1 < H * eps and not _item2_sold(view.out[t, two].allocation):
                fail9b = (f"item 2 unsold at v={t} w={w}", view.ratio(t, two))
                break
        if fail9b:
            break
    checks.append(ProbeCheck("L9 item 2 sold", "N >= H", "fail" if fail9b else "pass",
                             *(fail9b or ("", None))))

    # Lemmas 10 and 11: constant difference, constant thresholds
    def diff(e: ThresholdEstimate):
        if e.pi1.hi is None or e.pi2.hi is None:
            return None
        return Interval(e.pi2.lo - e.pi1.hi, e.pi2.hi - e.pi1.lo)

    def constant(get, name, hyp, key):
        vals = [(w, get(ests[w])) for w in samples]
        for (wa, a), (wb, b) in zip(vals, vals[1:]):
            if a is None or b is None or not a.overlaps(b):
                conf = _confirm_pair(views[wa], views[wb], H)
                checks.append(ProbeCheck(name, hyp, "fail", f"w={wa}: {a} vs w={wb}: {b}", conf))
                return
        reps = [x for _, x in vals]
        common = Interval(max(x.lo for x in reps), min(x.hi for x in reps)) if all(
            x.hi is not None for x in reps) else reps[0]
        probe.constants[key] = common.representative
        checks.append(ProbeCheck(name, hyp, "pass", f"{key} in {common}"))

    constant(diff, "L10 pi2 - pi1 constant", "N >= H", "c_N")
    constant(lambda e: e.pi1, "L11 pi1 constant", "N >= H", "c_1N")
    constant(lambda e: e.pi2, "L11 pi2 constant", "N >= H", "c_2N")

    # pi2 > pi1 along the segment once N >= 2H
    if N >= 2 * H:
        bad = [w for w in samples if ests[w].pi2.hi is not None and ests[w].pi1.hi is not None
               and ests[w].pi2.hi <= ests[w].pi1.lo]
        if bad:
            w = bad[0]
            checks.append(ProbeCheck("pi2 > pi1", "N >= 2H", "fail", f"w={w}: {ests[w]}",
                                     _confirm(views[w], H)))
        else:
            checks.append(ProbeCheck("pi2 > pi1", "N >= 2H", "pass"))
    else:
        checks.append(ProbeCheck("pi2 > pi1", "N >= 2H", "n/a", f"N={N} < 2H"))

    # frozen allocations and W's complement, over v1 < H eps
    region = [v for v in g.types("V") if v.v1 < H * eps]
    frozen, moved, not_complement = {}, None, None
    for v in region:
        seen = {(views[w].bundle(v).has_item1, views[w].bundle(v).has_item2) for w in samples}
        if len(seen) > 1 and moved is None:
            moved = v
        frozen[v] = tuple(int(x) for x in min(seen))
        for w in samples:
            a = views[w].out[v, two].allocation
            if not_complement is None and (a.bundle_w.has_item1 == a.bundle_v.has_item1
                                           or a.bundle_w.has_item2 == a.bundle_v.has_item2):
                not_complement = (v, w)
    probe.frozen_alloc = frozen
    if moved is not None:
        checks.append(ProbeCheck("frozen allocation", "N >= H", "fail",
                                 f"V's bundle at v={moved} changes along the segment",
                                 _confirm_pair(views[samples[0]], views[samples[-1]], H)))
    else:
        checks.append(ProbeCheck("frozen allocation", "N >= H", "pass"))
    if not_complement is not None:
        v, w = not_complement
        checks.append(ProbeCheck("W gets the complement", "N >= H", "fail", f"v={v} w={w}",
                                 _confirm(views[w], H, [v])))
    else:
        checks.append(ProbeCheck("W gets the complement", "N >= H", "pass"))

    # the final contradiction: v1 = eps/H^(3/2) against w1 = eps/H^3 and w1 = eps/2
    root = _exact_sqrt(H)
    if root is None:
        checks.append(ProbeCheck("ratio witnesses", "H a rational square", "n/a",
                                 f"H^(3/2) irrational for H={H}"))
        return probe
    h32 = H * root
    v1 = eps / h32
    lo_w1, hi_w1 = eps / H ** 3, eps / 2
    probe.candidate_ratios = (v1 / lo_w1, hi_w1 / v1)
    v, wl, wh = Valuation(v1, 0), Valuation(lo_w1, N), Valuation(hi_w1, N)
    on_grid = v in g.types("V") and wl in samples and wh in samples
    if not on_grid:
        checks.append(ProbeCheck("ratio witnesses", "points on grid", "n/a",
                                 f"need v={v}, w={wl}, w={wh} on the grid"))
        return probe
    reports = [views[w].ratio(v, one) for w in (wl, wh)]
    worst = max(reports, key=lambda r: r.ratio)
    probe.ratio_witness = RatioReport(worst.ratio, worst.witness, H, worst.opt, worst.achieved)
    status = "fail" if worst.ratio > H else "pass"
    checks.append(ProbeCheck("ratio witnesses", "constancy", status,
                             f"ratios {reports[0].ratio} and {reports[1].ratio}",
                             probe.ratio_witness if status == "fail" else None))
    return probe


def _item2_sold(a) -> bool:
    return a.bundle_v.has_item2 or a.bundle_w.has_item2


def _confirm_pair(va: _View, vb: _View, H):
    """Witness for a change between two segment points: W moving between
    them, or anything wrong at either point."""
    g, m = va.g, va.m
    wa, wb = va.opp, vb.opp
    for v in g.types("V"):
        wv = _View(m, "W", v, g)
        for s in SCENARIOS:
            for t, rep in ((wa, wb), (wb, wa)):
                r = wv.dsic_report(t, rep, s)
                if r is not None:
                    return r
    return _confirm(va, H) or _confirm(vb, H)


# ---------------------------------------------------------------------------
# shipped fixtures
# ---------------------------------------------------------------------------

FIXTURE_PI = Threshold(2, 5)
FIXTURE_GRID = Grid.of([0, 1, 2, 3, 5, 6, 9])
INVERTED_AT = Valuation(3, 9)
CORRUPTIONS = {"inverted": "L7", "overcharge_tr": "L6", "both_in_br": "L8"}


def canonical_fixture(g: Grid = FIXTURE_GRID) -> MechanismSpec:
    """V faces pi1=2, pi2=5 at every opponent report; W takes the rest for free."""
    return constant_with_complement(FIXTURE_PI, g, name="fixture[pi1=2, pi2=5]")


def corrupted_fixture(kind: str, g: Grid = FIXTURE_GRID) -> MechanismSpec:
    """The canonical fixture with one lemma deliberately broken.

    ``inverted``: at w=(3,9) V faces pi1=3 > pi2=1 (W still gets the rest).
    ``overcharge_tr``: V pays one more than pi2 in T_R.
    ``both_in_br``: B_R receives both items at pi2 although pi2 > pi1.
    """
    pi1, pi2 = FIXTURE_PI.first, FIXTURE_PI.second

    def inverted(v, w, s, out):
        if w != INVERTED_AT:
            return out
        b, p = threshold_outcome(Threshold(3, 1), v, s)
        rest = Bundle(not b.has_item1, not b.has_item2 and s is Scenario.TWO_ITEMS)
        return Outcome(Allocation(b, rest), p, Fraction(0))

    def overcharge_tr(v, w, s, out):
        if s is Scenario.TWO_ITEMS and classify_region(v, pi1, pi2) is Region.TR:
            return Outcome(out.allocation, out.payment_v + 1, out.payment_w)
        return out

    def both_in_br(v, w, s, out):
        if s is Scenario.TWO_ITEMS and classify_region(v, pi1, pi2) is Region.BR:
            return Outcome(Allocation(BOTH, EMPTY), pi2, Fraction(0))
        return out

    transforms = {"inverted": inverted, "overcharge_tr": overcharge_tr, "both_in_br": both_in_br}
    if kind not in transforms:
        raise ConfigurationError(f"unknown corruption {kind!r}; choose from {', '.join(transforms)}")
    return tabulate(canonical_fixture(g), g, transforms[kind], name=f"fixture[{kind}]")


__all__ = [
    "ABOVE_GRID", "CORRUPTIONS", "FIXTURE_GRID", "FIXTURE_PI", "INVERTED_AT", "LEMMAS", "Interval", "LemmaReport", "LemmaResult", "NotThresholdForm", "ProbeCheck",
    "Region", "SNEpsilonProbe", "ThresholdEstimate", "canonical_fixture", "certain_region", "classify_region", "corrupted_fixture", "constancy_probe", "extract_thresholds", "lemma_suite",
]
