"""Exhaustive search over threshold-form mechanisms on a finite grid.

A candidate fixes, for every opponent grid point, the thresholds the other
bidder faces: ``X[w]`` for V and ``Y[v]`` for W.  Under the structural
pruning each choice is DSIC and IR on its own, so a candidate is accepted
iff every profile ``(v, w)`` is feasible and H-approximate.  That is a
binary constraint between ``X[w]`` and ``Y[v]``, which lets the search run
as arc consistency plus backtracking while still accounting for every one
of the (astronomically many) candidates: each pruned value is charged the
product of the other domain sizes at the moment it is removed.
"""
from __future__ import annotations

import hashlib
import itertools
import multiprocessing
import os
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import ConfigurationError, Grid, Scenario, Valuation, offline_opt
from .mechanisms import (BrRule, Kind, MechanismSpec, Threshold, ThresholdTables, dumps_spec,
                         evaluate, threshold_outcome, threshold_spec)
from .verify import (ViolationKind, check_consistency, check_dsic, check_ir, ratio_of,
                     worst_case_ratio)

DEFAULT_BUDGET = 10 ** 8
SCENARIOS = (Scenario.ONE_ITEM, Scenario.TWO_ITEMS)
REASONS = ("feasibility", "IR", "DSIC", "ratio", "accepted", "unexplored")


class BudgetExceeded(ConfigurationError):
    def __init__(self, size: int, budget: int):
        super().__init__(f"search space has {size} candidates, budget is {budget}")
        self.size = size
        self.budget = budget


# ---------------------------------------------------------------------------
# search space
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SearchSpace:
    grid: Grid
    scenarios: tuple = SCENARIOS
    prune_order: bool = True   # pi2 >= pi1 whenever pi1 is on the grid
    prune_br: bool = True      # both items in B_R only when pi1 == pi2
    budget: int = DEFAULT_BUDGET

    @property
    def above(self) -> Fraction:
        return self.grid.top() + 1

    def cuts(self, axis: str) -> list[Fraction]:
        """Zero, midpoints of consecutive grid values, and the above-grid sentinel."""
        vals = self.grid.axis(axis)
        mids = [(a + b) / 2 for a, b in zip(vals, vals[1:])]
        return sorted({Fraction(0), *mids, self.above})

    def admits(self, bidder: str, c: Threshold) -> bool:
        """Whether choice ``c`` survives pruning.  A rule only fires when the
        grid holds the type that refutes the choice, so pruning never removes
        a candidate the verifier would accept."""
        finite = c.first != self.above
        if self.prune_order and finite and c.second < c.first and self._order_witness(bidder, c):
            return False
        if self.prune_br and c.br_rule is BrRule.BOTH_WHEN_EQUAL:
            if not finite:
                return False   # nobody is right of the cut, so the rule is inert
            if c.second > c.first and self._br_witness(bidder, c):
                return False
        return True

    def _order_witness(self, bidder: str, c: Threshold) -> Valuation | None:
        """A type left of the item-1 cut, right of pi2, valuing item 1 most,
        who would gain by claiming both items at pi2."""
        types = self.grid.types(bidder)
        buys_both = any(t.v1 >= c.first and t.v2 - c.second >= t.v1 - c.first for t in types)
        if not buys_both:
            return None
        return next((t for t in types if c.second < t.v1 < c.first and t.v2 < t.v1), None)

    def _br_witness(self, bidder: str, c: Threshold) -> Valuation | None:
        """A type handed both items at pi2 that is worth less than pi2."""
        return next((t for t in self.grid.types(bidder)
                     if t.v1 >= c.first and max(t.v1, t.v2) < c.second), None)

    def choices(self, bidder: str) -> list[Threshold]:
        a1, a2 = ("v1", "v2") if bidder == "V" else ("w1", "w2")
        out = []
        for first in self.cuts(a1):
            for second in self.cuts(a2):
                for rule in BrRule:
                    c = Threshold(first, second, rule)
                    if self.admits(bidder, c):
                        out.append(c)
        return out

    def variables(self) -> list[tuple[str, Valuation]]:
        """``("V", w)`` is V's thresholds at W-report ``w``; ``("W", v)`` likewise."""
        return ([("V", w) for w in self.grid.types("W")]
                + [("W", v) for v in self.grid.types("V")])

    def size(self) -> int:
        nv, nw = len(self.choices("V")), len(self.choices("W"))
        return nv ** len(self.grid.types("W")) * nw ** len(self.grid.types("V"))


def tables_from(pi, phi) -> ThresholdTables:
    return ThresholdTables(pi=dict(pi), phi=dict(phi))


def enumerate_candidates(space: SearchSpace):
    """Every candidate of the (pruned) space in a fixed order: V's tables by
    ascending W-report, then W's tables by ascending V-report, each ranging
    over ``choices`` in order.  Refuses up front if the space exceeds the
    budget."""
    size = space.size()
    if size > space.budget:
        raise BudgetExceeded(size, space.budget)
    ws, vs = space.grid.types("W"), space.grid.types("V")
    cv, cw = space.choices("V"), space.choices("W")
    return (tables_from(zip(ws, combo[:len(ws)]), zip(vs, combo[len(ws):]))
            for combo in itertools.product(*([cv] * len(ws) + [cw] * len(vs))))


# ---------------------------------------------------------------------------
# single-candidate evaluation through the verifier
# ---------------------------------------------------------------------------

@dataclass
class Verdict:
    accepted: bool
    reason: str | None = None
    witness: object = None
    ratio: object = None


def evaluate_candidate(t: ThresholdTables, g: Grid, H, scenarios=SCENARIOS) -> Verdict:
    """Feasibility, IR, DSIC, ratio; the first failure short-circuits."""
    m = threshold_spec(t)
    bad = check_consistency(m, g)
    if tuple(scenarios) != SCENARIOS:
        # consistency across scenarios is moot when only one is in play
        bad = [r for r in bad if r.kind is ViolationKind.FEASIBILITY and r.scenario in scenarios]
    if bad:
        return Verdict(False, "feasibility", bad[0])
    for reason, check in (("IR", check_ir), ("DSIC", check_dsic)):
        found = check(m, g, scenarios=scenarios, jobs=1)
        if found:
            return Verdict(False, reason, found[0])
    rep = worst_case_ratio(m, g, H, scenarios)
    if rep.ratio > Fraction(H):
        return Verdict(False, "ratio", rep, rep.ratio)
    return Verdict(True, ratio=rep.ratio, witness=rep)


# ---------------------------------------------------------------------------
# constraint tables
# ---------------------------------------------------------------------------

def _bundle_codes(space: SearchSpace, bidder: str) -> np.ndarray:
    """codes[c, t]: bundle code of own type t under choice c with two items."""
    choices = space.choices(bidder)
    types = space.grid.types(bidder)
    codes = np.zeros((len(choices), len(types)), dtype=np.int8)
    for i, c in enumerate(choices):
        for j, t in enumerate(types):
            b, _ = threshold_outcome(c, t, Scenario.TWO_ITEMS)
            one, _ = threshold_outcome(c, t, Scenario.ONE_ITEM)
            assert one.has_item1 == b.has_item1
            codes[i, j] = b.code
    return codes


def _code_value(val: Valuation, code: int) -> Fraction:
    vals = [x for bit, x in ((1, val.v1), (2, val.v2)) if code & bit]
    return max(vals, default=Fraction(0))


def _pair_ratios(space: SearchSpace):
    """ratio[v, w, cv, cw] over the chosen scenarios, or None when the pair
    hands an item to both bidders."""
    vs, ws = space.grid.types("V"), space.grid.types("W")
    two = Scenario.TWO_ITEMS in space.scenarios
    one = Scenario.ONE_ITEM in space.scenarios
    table = {}
    for i, v in enumerate(vs):
        for j, w in enumerate(ws):
            opt1, opt2 = offline_opt(v, w, Scenario.ONE_ITEM), offline_opt(v, w, Scenario.TWO_ITEMS)
            for cv in range(4):
                for cw in range(4):
                    mask = 3 if two else 1
                    if cv & cw & mask:
                        table[i, j, cv, cw] = None
                        continue
                    r = Fraction(1)
                    if one:
                        got = v.v1 if cv & 1 else (w.v1 if cw & 1 else Fraction(0))
                        r = ratio_of(opt1, got)
                    if two:
                        r = max(r, ratio_of(opt2, _code_value(v, cv) + _code_value(w, cw)))
                    table[i, j, cv, cw] = r
    return table


@dataclass
class _Tables:
    """Dense pair data: rank[v, w, a, b] of the ratio when V uses choice a at
    w and W uses choice b at v; ``levels`` lists the ratio value per rank and
    infeasible pairs carry rank ``len(levels)``."""

    levels: list
    rank: np.ndarray
    unary_v: list     # per V choice: None or (reason, ViolationReport)
    unary_w: list


def _raw_spec(tables: ThresholdTables) -> MechanismSpec:
    # no structure check: unpruned choices are exactly what the verifier must refute
    return MechanismSpec(Kind.THRESHOLD_FORM, tables=tables)


def _unary(space: SearchSpace, bidder: str) -> list:
    """Verify each choice on its own: the bidder's outcome depends only on
    their thresholds, so one opponent point suffices."""
    out = []
    g = space.grid
    other = space.choices("W" if bidder == "V" else "V")[0]
    opp = g.types("W" if bidder == "V" else "V")[0]
    for c in space.choices(bidder):
        if bidder == "V":
            m = _raw_spec(ThresholdTables(pi_default=c, phi_default=other))
        else:
            m = _raw_spec(ThresholdTables(pi_default=other, phi_default=c))
        verdict = None
        for reason, check in (("IR", check_ir), ("DSIC", check_dsic)):
            found = check(m, g, bidders=(bidder,), scenarios=space.scenarios, opponents=[opp], jobs=1)
            if found:
                verdict = (reason, found[0], m)
                break
        out.append(verdict)
    return out


def build_tables(space: SearchSpace) -> _Tables:
    pr = _pair_ratios(space)
    levels = sorted({r for r in pr.values() if r is not None})
    index = {r: k for k, r in enumerate(levels)}
    small = np.full((len(space.grid.types("V")), len(space.grid.types("W")), 4, 4),
                    len(levels), dtype=np.int32)
    for key, r in pr.items():
        if r is not None:
            small[key] = index[r]
    bv, bw = _bundle_codes(space, "V"), _bundle_codes(space, "W")
    nv, nw = small.shape[:2]
    vi = np.arange(nv)[:, None, None, None]
    wi = np.arange(nw)[None, :, None, None]
    # V's choice a sits at opponent w; it decides the bundle of type v
    rank = small[vi, wi, bv.T[:, None, :, None], bw.T[None, :, None, :]]
    return _Tables(levels, rank, _unary(space, "V"), _unary(space, "W"))


# ---------------------------------------------------------------------------
# arc consistency with exact accounting
# ---------------------------------------------------------------------------

@dataclass
class Tally:
    counts: dict = field(default_factory=lambda: {r: 0 for r in REASONS})

    def add(self, reason: str, n: int):
        self.counts[reason] += n

    def merge(self, other: "Tally"):
        for r, n in other.counts.items():
            self.counts[r] += n

    @property
    def total(self) -> int:
        return sum(self.counts.values())


@dataclass(frozen=True)
class Removal:
    """Value ``choice`` of variable ``var`` was dropped: at ``profile`` no
    remaining choice ``partner_domain`` of the partner variable works."""

    var: tuple
    choice: Threshold
    reason: str
    count: int
    profile: tuple | None = None
    partner: tuple | None = None
    partner_domain: tuple = ()
    unary: object = None

    def line(self) -> str:
        bidder, opp = self.var
        where = "" if self.profile is None else f" at v={self.profile[0]} w={self.profile[1]}"
        return f"remove {bidder}@{opp} [{self.choice}] {self.reason} {self.count}{where}"


class _State:
    def __init__(self, dv: np.ndarray, dw: np.ndarray):
        self.dv = dv        # (nW, Dv) V's domains, one row per W-report
        self.dw = dw        # (nV, Dw)

    def copy(self):
        return _State(self.dv.copy(), self.dw.copy())

    def sizes(self) -> list[int]:
        return [int(x) for x in self.dv.sum(1)] + [int(x) for x in self.dw.sum(1)]


class _Solver:
    def __init__(self, space: SearchSpace, tables: _Tables, level: int, record: bool):
        self.space = space
        self.t = tables
        self.ok = tables.rank <= level
        self.feas = tables.rank < len(tables.levels)
        self.record = record
        self.cv, self.cw = space.choices("V"), space.choices("W")
        self.ws, self.vs = space.grid.types("W"), space.grid.types("V")
        self.log: list[Removal] = []
        self.tally = Tally()
        self.nodes = 0

    # one removal, charged against the current product
    def _remove(self, st, sizes, prod, idx, val, reason, **extra):
        nW = len(self.ws)
        others = prod[0] // sizes[idx]
        prod[0] -= others
        sizes[idx] -= 1
        if idx < nW:
            st.dv[idx, val] = False
            var, choice = ("V", self.ws[idx]), self.cv[val]
        else:
            st.dw[idx - nW, val] = False
            var, choice = ("W", self.vs[idx - nW]), self.cw[val]
        self.tally.add(reason, others)
        if self.record:
            self.log.append(Removal(var, choice, reason, others, **extra))

    def unary(self, st, sizes, prod):
        nW = len(self.ws)
        for idx in range(len(sizes)):
            bidder_v = idx < nW
            row = st.dv[idx] if bidder_v else st.dw[idx - nW]
            verdicts = self.t.unary_v if bidder_v else self.t.unary_w
            for val in np.flatnonzero(row):
                if verdicts[val] is not None:
                    reason, report, _ = verdicts[val]
                    self._remove(st, sizes, prod, idx, int(val), reason, unary=report)

    def propagate(self, st, sizes, prod) -> bool:
        """Arc consistency to a fixpoint; False on a domain wipe-out."""
        nW = len(self.ws)
        while True:
            changed = False
            # V's choice a at w needs, for every v, some live W choice b at v
            sup_v = (self.ok & st.dw[:, None, None, :]).any(3)     # (nV, nW, Dv)
            keep_v = sup_v.all(0) & st.dv
            for j, a in zip(*np.nonzero(st.dv & ~keep_v)):
                i = int(np.flatnonzero(~sup_v[:, j, a])[0])
                self._drop(st, sizes, prod, j, int(a), i, partner_is_w=True)
                changed = True
            sup_w = (self.ok & st.dv[None, :, :, None]).any(2)     # (nV, nW, Dw)
            keep_w = sup_w.all(1) & st.dw
            for i, b in zip(*np.nonzero(st.dw & ~keep_w)):
                j = int(np.flatnonzero(~sup_w[i, :, b])[0])
                self._drop(st, sizes, prod, nW + i, int(b), j, partner_is_w=False)
                changed = True
            if prod[0] == 0:
                return False
            if not changed:
                return True

    def _drop(self, st, sizes, prod, idx, val, partner_pos, partner_is_w):
        nW = len(self.ws)
        if partner_is_w:
            j, i = idx, partner_pos
            dom = st.dw[i]
            feas_support = (self.feas[i, j, val, :] & dom).any()
            partner = ("W", self.vs[i])
            pdom = tuple(self.cw[k] for k in np.flatnonzero(dom))
        else:
            i, j = idx - nW, partner_pos
            dom = st.dv[j]
            feas_support = (self.feas[i, j, :, val] & dom).any()
            partner = ("V", self.ws[j])
            pdom = tuple(self.cv[k] for k in np.flatnonzero(dom))
        reason = "ratio" if feas_support else "feasibility"
        self._remove(st, sizes, prod, idx, val, reason,
                     profile=(self.vs[i], self.ws[j]), partner=partner,
                     partner_domain=pdom if self.record else ())

    def solution(self, st) -> ThresholdTables:
        pi = {w: self.cv[int(np.flatnonzero(st.dv[j])[0])] for j, w in enumerate(self.ws)}
        phi = {v: self.cw[int(np.flatnonzero(st.dw[i])[0])] for i, v in enumerate(self.vs)}
        return ThresholdTables(pi=pi, phi=phi)

    def branch_var(self, sizes):
        open_ = [(s, k) for k, s in enumerate(sizes) if s > 1]
        return min(open_)[1] if open_ else None

    def _assign(self, st, idx, val):
        nW = len(self.ws)
        c = st.copy()
        if idx < nW:
            c.dv[idx, :] = False
            c.dv[idx, val] = True
        else:
            c.dw[idx - nW, :] = False
            c.dw[idx - nW, val] = True
        return c

    def _values(self, st, idx):
        nW = len(self.ws)
        row = st.dv[idx] if idx < nW else st.dw[idx - nW]
        return [int(x) for x in np.flatnonzero(row)]

    def search(self, st, *, all_solutions=False, limit=None):
        """Depth-first search from a propagated state.  Returns the list of
        solutions found (at most one unless ``all_solutions``)."""
        self.nodes += 1
        if limit is not None and self.nodes > limit:
            raise BudgetExceeded(self.nodes, limit)
        sizes = st.sizes()
        prod = [_prod(sizes)]
        if not self.propagate(st, sizes, prod):
            return []
        idx = self.branch_var(sizes)
        if idx is None:
            self.tally.add("accepted", 1)
            return [self.solution(st)]
        found = []
        vals = self._values(st, idx)
        share = prod[0] // len(vals)
        for k, val in enumerate(vals):
            found += self.search(self._assign(st, idx, val), all_solutions=all_solutions,
                                 limit=limit)
            if found and not all_solutions:
                self.tally.add("unexplored", share * (len(vals) - k - 1))
                break
        return found


def _prod(sizes) -> int:
    out = 1
    for s in sizes:
        out *= s
    return out


def _root(space: SearchSpace, solver: _Solver):
    st = _State(np.ones((len(solver.ws), len(solver.cv)), dtype=bool),
                np.ones((len(solver.vs), len(solver.cw)), dtype=bool))
    sizes = st.sizes()
    prod = [_prod(sizes)]
    solver.unary(st, sizes, prod)
    return st


# ---------------------------------------------------------------------------
# parallel root split
# ---------------------------------------------------------------------------

_WORK = {}


def _branch_task(k):
    space, tables, level, record, st, idx, val, limit = _WORK["args"](k)
    solver = _Solver(space, tables, level, record)
    found = solver.search(solver._assign(st, idx, val), limit=limit)
    return found, solver.tally, solver.log, solver.nodes


def _run(space: SearchSpace, tables: _Tables, level: int, record: bool, jobs: int | None,
         limit: int | None):
    """Search the whole space at one ratio level.  The root is propagated
    once, then its branches are searched independently (possibly in worker
    processes) and merged in branch order, so results do not depend on the
    number of workers."""
    solver = _Solver(space, tables, level, record)
    st = _root(space, solver)
    sizes = st.sizes()
    prod = [_prod(sizes)]
    if not solver.propagate(st, sizes, prod):
        return None, solver.tally, solver.log, solver.nodes
    idx = solver.branch_var(sizes)
    if idx is None:
        solver.tally.add("accepted", 1)
        return solver.solution(st), solver.tally, solver.log, solver.nodes
    vals = solver._values(st, idx)
    share = prod[0] // len(vals)
    args = lambda k: (space, tables, level, record, st, idx, vals[k], limit)  # noqa: E731
    jobs = _jobs(jobs)
    if jobs > 1 and len(vals) > 1:
        _WORK["args"] = args
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(min(jobs, len(vals))) as pool:
            results = pool.map(_branch_task, range(len(vals)))
        _WORK.clear()
    else:
        _WORK["args"] = args
        results = []
        for k in range(len(vals)):
            results.append(_branch_task(k))
            if results[-1][0]:
                break
        _WORK.clear()
    tally, log, nodes, best = solver.tally, solver.log, solver.nodes, None
    for k, (found, t, lg, n) in enumerate(results):
        if best is not None:
            break
        tally.merge(t)
        log.extend(lg)
        nodes += n
        if found:
            best = found[0]
            tally.add("unexplored", share * (len(vals) - k - 1))
    return best, tally, log, nodes


def _jobs(jobs: int | None) -> int:
    if jobs is None:
        jobs = int(os.environ.get("TRUTHLAB_JOBS", "1") or 1)
    return max(1, jobs)


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

@dataclass
class ImpossibilityCertificate:
    grid: Grid
    H: Fraction
    scenarios: tuple
    total: int
    tally: dict
    best_ratio: object
    best_mechanism: MechanismSpec | None
    accepted_mechanism: MechanismSpec | None
    digest: str
    log: list = field(default_factory=list)
    nodes: int = 0

    @property
    def impossible(self) -> bool:
        return self.accepted_mechanism is None

    def text(self) -> str:
        lines = [
            "# truthlab impossibility certificate",
            f"grid = {' '.join(str(x) for x in self.grid.values)}",
        ]
        for ax in ("v1", "v2", "w1", "w2"):
            if getattr(self.grid, ax) is not None:
                lines.append(f"grid.{ax} = {' '.join(str(x) for x in self.grid.axis(ax))}")
        lines += [
            f"H = {self.H}",
            f"scenarios = {' '.join(s.value for s in self.scenarios)}",
            f"total = {self.total}",
        ]
        lines += [f"rejected.{r} = {self.tally[r]}" for r in REASONS[:4]]
        lines += [f"{r} = {self.tally[r]}" for r in REASONS[4:]]
        lines.append(f"verdict = {'no candidate within H' if self.impossible else 'candidate within H found'}")
        lines.append(f"best_ratio = {self.best_ratio}")
        lines.append(f"digest = {self.digest}")
        if self.best_mechanism is not None:
            lines.append("[best_mechanism]")
            lines.append(dumps_spec(self.best_mechanism).rstrip("\n"))
        return "\n".join(lines) + "\n"

    def log_text(self) -> str:
        return "".join(r.line() + "\n" for r in self.log)


def _digest(space, H, log, found) -> str:
    h = hashlib.sha256()
    h.update(f"H={H};total={space.size()}\n".encode())
    for r in log:
        h.update((r.line() + "\n").encode())
    h.update(f"found={found is not None}\n".encode())
    return h.hexdigest()


def search_best(space: SearchSpace, H, *, jobs: int | None = None,
                node_limit: int | None = None, tables: _Tables | None = None) -> ImpossibilityCertificate:
    """Exhaust the space at level ``H`` and, separately, find the smallest
    worst-case ratio any feasible, DSIC, IR candidate attains."""
    H = Fraction(H)
    if H <= 0:
        raise ConfigurationError("H must be positive")
    tables = tables or build_tables(space)
    levels = tables.levels
    level_h = sum(1 for r in levels if r <= H) - 1
    found, tally, log, nodes = _run(space, tables, level_h, True, jobs, node_limit)
    total = space.size()
    if sum(tally.counts.values()) != total:
        raise AssertionError("search accounting does not cover the space")
    # best ratio: smallest level whose constraint system is satisfiable
    lo, hi, best = 0, len(levels) - 1, None
    top_found, *_ = _run(space, tables, hi, False, jobs, node_limit)
    if top_found is not None:
        best = (hi, top_found)
        while lo < hi:
            mid = (lo + hi) // 2
            sol, *_ = _run(space, tables, mid, False, jobs, node_limit)
            if sol is not None:
                hi, best = mid, (mid, sol)
            else:
                lo = mid + 1
    best_ratio = levels[best[0]] if best else None
    best_mech = threshold_spec(best[1], name="best") if best else None
    accepted = threshold_spec(found, name="accepted") if found is not None else None
    return ImpossibilityCertificate(space.grid, H, tuple(space.scenarios), total, dict(tally.counts),
                                    best_ratio, best_mech, accepted, _digest(space, H, log, found),
                                    log, nodes)


def enumerate_solutions(space: SearchSpace, H, tables: _Tables | None = None) -> list[ThresholdTables]:
    """Every accepted candidate (micro-grids only)."""
    tables = tables or build_tables(space)
    level = sum(1 for r in tables.levels if r <= Fraction(H)) - 1
    solver = _Solver(space, tables, level, False)
    st = _root(space, solver)
    return solver.search(st, all_solutions=True, limit=space.budget)


def canonical(space: SearchSpace, t: ThresholdTables) -> ThresholdTables:
    """Drop the bottom-right rule where no grid type lies right of the item-1
    threshold: such choices behave identically on the grid."""
    def norm(c: Threshold) -> Threshold:
        if c.first == space.above and c.br_rule is not BrRule.ITEM1_ONLY:
            return Threshold(c.first, c.second)
        return c
    return ThresholdTables(pi={k: norm(c) for k, c in t.pi.items()},
                           phi={k: norm(c) for k, c in t.phi.items()})


def replay_removal(space: SearchSpace, r: Removal, H) -> bool:
    """Re-derive a rejection through the mechanism evaluator: for unary
    rejections the stored verifier report must replay; for pair rejections
    every partner choice must clash with the removed choice at the stored
    profile (an item handed to both bidders, or welfare below OPT/H)."""
    from .verify import replay
    if r.unary is not None:
        bidder, opp = r.var
        other = Threshold(space.above, space.above)
        tables = (ThresholdTables(pi_default=r.choice, phi_default=other) if bidder == "V"
                  else ThresholdTables(pi_default=other, phi_default=r.choice))
        return replay(_raw_spec(tables), r.unary)
    v, w = r.profile
    H = Fraction(H)
    for c in r.partner_domain:
        pi, phi = ({w: r.choice}, {v: c}) if r.var[0] == "V" else ({w: c}, {v: r.choice})
        m = _raw_spec(ThresholdTables(pi=pi, phi=phi))
        bad = False
        for s in space.scenarios:
            out = evaluate(m, v, w, s, strict=False)
            if not out.allocation.is_feasible(s) or (
                    r.reason == "ratio" and
                    ratio_of(offline_opt(v, w, s), _welfare(out, v, w)) > H):
                bad = True
        if not bad:
            return False
    return True


def _welfare(out, v, w):
    from .core import welfare
    return welfare(out.allocation, v, w)

