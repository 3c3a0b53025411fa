"""Does *any* payment rule make a given allocation rule truthful and IR?

For one bidder, a fixed opponent report and a fixed arrival scenario, the
rule induces a menu of bundles.  Truthfulness with payments amounts to a
system of difference constraints on bundle prices,

    p(S) - p(T) <= value_t(S) - value_t(T)   for every type t assigned S,

plus ``p(S) <= value_t(S)`` for IR, with the empty bundle priced 0.  The
system is feasible iff the constraint graph has no negative cycle
(Bellman-Ford).  Infeasibility comes with the cycle as a witness.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .core import (EMPTY, Allocation, Bundle, Grid, Outcome, Scenario, Valuation,
                   bundle_value)
from .mechanisms import Kind, MechanismSpec, allocation_rule

Rule = Callable[[Valuation, Valuation, Scenario], Allocation]


def as_rule(rule) -> Rule:
    if isinstance(rule, MechanismSpec):
        return allocation_rule(rule)
    return rule


def _own_bundle(rule: Rule, bidder: str, own: Valuation, opp: Valuation, s: Scenario) -> Bundle:
    a = rule(own, opp, s) if bidder == "V" else rule(opp, own, s)
    return a.bundle(bidder)


@dataclass
class BundleGraph:
    bidder: str
    opponent: Valuation
    scenario: Scenario
    nodes: list                      # bundles; EMPTY first
    members: dict                    # bundle -> types assigned it
    edges: dict = field(default_factory=dict)    # (S, T) -> (weight, type)
    ir_caps: dict = field(default_factory=dict)  # S -> (cap, type)


def build_bundle_graph(rule, bidder: str, opponent_val: Valuation, s: Scenario,
                       g: Grid) -> BundleGraph:
    rule = as_rule(rule)
    members: dict[Bundle, list[Valuation]] = {}
    for t in g.types(bidder):
        members.setdefault(_own_bundle(rule, bidder, t, opponent_val, s), []).append(t)
    nodes = [EMPTY] + sorted(b for b in members if b != EMPTY)
    graph = BundleGraph(bidder, opponent_val, s, nodes, members)
    for S, types in members.items():
        cap_t = min(types, key=lambda t: (bundle_value(t, S), t))
        graph.ir_caps[S] = (bundle_value(cap_t, S), cap_t)
        for T in nodes:
            if T == S:
                continue
            best = min(types, key=lambda t: (bundle_value(t, S) - bundle_value(t, T), t))
            graph.edges[(S, T)] = (bundle_value(best, S) - bundle_value(best, T), best)
    return graph


@dataclass(frozen=True)
class Constraint:
    """``p(assigned) - p(alternative) <= value_t(assigned) - value_t(alternative)``."""

    type_: Valuation
    assigned: Bundle
    alternative: Bundle
    bound: Fraction
    ir: bool = False

    def __str__(self):
        tag = " (IR)" if self.ir else ""
        return f"t={self.type_}: p{self.assigned} - p{self.alternative} <= {self.bound}{tag}"


@dataclass
class PaymentCertificate:
    feasible: bool
    prices: dict | None = None
    witness: list | None = None     # list of Constraint around a negative cycle
    ir_conflict: bool = False
    graph: BundleGraph | None = None

    @property
    def cycle_sum(self) -> Fraction | None:
        if self.witness is None:
            return None
        return sum((c.bound for c in self.witness), Fraction(0))

    def __str__(self):
        if self.feasible:
            body = ", ".join(f"p{b}={p}" for b, p in sorted(self.prices.items()))
            return f"feasible: {body}"
        kind = "IR conflict" if self.ir_conflict else "negative cycle"
        chain = "; ".join(str(c) for c in self.witness)
        return f"infeasible ({kind}, sum {self.cycle_sum}): {chain}"


def _constraint_edges(graph: BundleGraph) -> list[Constraint]:
    """Tightest constraint per ordered pair; IR merged into the edge from EMPTY."""
    out = []
    for (S, T), (bound, t) in graph.edges.items():
        out.append(Constraint(t, S, T, bound))
    for S, (cap, t) in graph.ir_caps.items():
        if S == EMPTY:
            continue
        existing = graph.edges.get((S, EMPTY))
        if existing is None or cap < existing[0]:
            out.append(Constraint(t, S, EMPTY, cap, ir=True))
    return out


def payments_exist(rule, bidder: str, opponent_val: Valuation, s: Scenario,
                   g: Grid) -> PaymentCertificate:
    """Decide payment existence for one bidder at one opponent report.

    Feasible certificates carry the largest feasible prices (shortest-path
    distances from the empty bundle).
    """
    graph = build_bundle_graph(rule, bidder, opponent_val, s, g)
    constraints = _constraint_edges(graph)
    # p(S) <= p(T) + bound  is an edge T -> S
    dist = {b: (Fraction(0) if b == EMPTY else None) for b in graph.nodes}
    pred: dict[Bundle, Constraint] = {}
    n = len(graph.nodes)
    for _ in range(n):
        changed = None
        for c in constraints:
            src, dst = c.alternative, c.assigned
            if dist[src] is None:
                continue
            cand = dist[src] + c.bound
            if dist[dst] is None or cand < dist[dst]:
                dist[dst] = cand
                pred[dst] = c
                changed = dst
        if changed is None:
            prices = {b: d for b, d in dist.items()}
            return PaymentCertificate(True, prices=prices, graph=graph)
    # still relaxing after n rounds: walk predecessors back onto the cycle
    node = changed
    for _ in range(n):
        node = pred[node].alternative
    cycle, cur = [], node
    while True:
        c = pred[cur]
        cycle.append(c)
        cur = c.alternative
        if cur == node:
            break
    cycle.reverse()
    return PaymentCertificate(False, witness=cycle, ir_conflict=any(c.ir for c in cycle),
                              graph=graph)


def check_witness(rule, cert: PaymentCertificate, bidder: str, opponent_val: Valuation,
                  s: Scenario) -> bool:
    """Independently re-derive every inequality of a negative-cycle witness
    from raw valuations and confirm the sum is strictly negative."""
    if cert.feasible or not cert.witness:
        return False
    rule = as_rule(rule)
    total = Fraction(0)
    for i, c in enumerate(cert.witness):
        nxt = cert.witness[(i + 1) % len(cert.witness)]
        if c.assigned != nxt.alternative:
            return False
        if _own_bundle(rule, bidder, c.type_, opponent_val, s) != c.assigned:
            return False
        expect = bundle_value(c.type_, c.assigned) - (Fraction(0) if c.ir else
                                                      bundle_value(c.type_, c.alternative))
        if c.ir and c.alternative != EMPTY:
            return False
        if expect != c.bound:
            return False
        total += c.bound
    return total < 0


def check_prices(rule, prices: dict, bidder: str, opponent_val: Valuation, s: Scenario,
                 g: Grid) -> bool:
    """Every grid type's bundle is utility-maximizing over the menu (ties
    allowed) and yields nonnegative utility."""
    rule = as_rule(rule)
    menu = dict(prices)
    menu.setdefault(EMPTY, Fraction(0))
    for t in g.types(bidder):
        S = _own_bundle(rule, bidder, t, opponent_val, s)
        if S not in menu:
            return False
        u = bundle_value(t, S) - menu[S]
        if u < 0:
            return False
        if any(bundle_value(t, T) - p > u for T, p in menu.items()):
            return False
    return True


def brute_force_payments_exist(rule, bidder: str, opponent_val: Valuation, s: Scenario,
                               g: Grid, max_combinations: int = 2_000_000) -> dict | None:
    """Exhaustive search over prices on a fine lattice.

    Difference constraints with weights in ``(1/L)Z`` are feasible iff they
    have a solution in ``(1/L)Z``, and any solution can be shifted to lie
    within ``[-n*top, top]``; so enumerating that lattice window decides
    feasibility exactly.  Intended for micro-grids.
    """
    rule = as_rule(rule)
    realized = sorted({_own_bundle(rule, bidder, t, opponent_val, s) for t in g.types(bidder)})
    priced = [b for b in realized if b != EMPTY]
    vals = g.all_values()
    lcm = 1
    for x in vals:
        lcm = lcm * x.denominator // math.gcd(lcm, x.denominator)
    top = int(vals[-1] * lcm)
    lo = -len(realized) * top
    lattice = [Fraction(k, lcm) for k in range(lo, top + 1)]
    if len(lattice) ** len(priced) > max_combinations:
        raise ValueError("micro-grid too large for brute-force price enumeration")
    for combo in itertools.product(lattice, repeat=len(priced)):
        prices = dict(zip(priced, combo))
        if EMPTY in realized:
            prices[EMPTY] = Fraction(0)
        if check_prices(rule, prices, bidder, opponent_val, s, g):
            return prices
    return None


def payments_report(rule, g: Grid, bidders=("V", "W"),
                    scenarios=(Scenario.ONE_ITEM, Scenario.TWO_ITEMS)) -> list:
    """Certificates for every (bidder, opponent grid point, scenario)."""
    out = []
    for bidder in bidders:
        for opp in g.types("W" if bidder == "V" else "V"):
            for s in scenarios:
                out.append((bidder, opp, s, payments_exist(rule, bidder, opp, s, g)))
    return out


def priced_mechanism(rule, bidder: str, opponent_val: Valuation, s: Scenario, g: Grid,
                     prices: dict) -> MechanismSpec:
    """Table mechanism pairing the rule with ``prices`` for one bidder at one
    opponent report; everything else pays nothing.  Used to replay a feasible
    certificate through the verifier."""
    rule = as_rule(rule)
    table = {}
    for v, w in g.profiles():
        for sc in (Scenario.ONE_ITEM, Scenario.TWO_ITEMS):
            a = rule(v, w, sc)
            pay = {"V": Fraction(0), "W": Fraction(0)}
            opp = w if bidder == "V" else v
            if opp == opponent_val and sc is s:
                pay[bidder] = prices.get(a.bundle(bidder), Fraction(0))
            table[(v, w, sc)] = Outcome(a, pay["V"], pay["W"])
    return MechanismSpec(Kind.TABLE, table=table, name="priced-rule")


def format_certificate(bidder: str, opp: Valuation, s: Scenario, cert: PaymentCertificate) -> str:
    return f"bidder={bidder} opp={opp} {s}: {cert}"
