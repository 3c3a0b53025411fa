"""The mechanism catalog: allocation rules, posted-price mechanisms,
threshold-form mechanisms and the randomized baselines.

Tie convention used everywhere: ties go to bidder V, then to item 1.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Mapping

from .core import (BOTH, EMPTY, ITEM1, ITEM2, Allocation, Bundle, ConfigurationError,
                   InfeasibleOutcome, Outcome, Scenario, Valuation, format_rational,
                   rational)

ZERO = Fraction(0)


class Kind(enum.Enum):
    GREEDY = "greedy"
    PER_ITEM_HIGHEST = "per_item_highest"
    BUNDLING = "bundling"
    VCG_ISH = "vcg_ish"
    DISCOUNT = "discount"
    OFFLINE_VCG = "offline_vcg"
    THRESHOLD_FORM = "threshold"
    STOCHASTIC_ARRIVAL = "stochastic"
    RANDOM_BIDDER = "random_bidder"
    RANDOM_ITEM = "random_item"
    TABLE = "table"


RANDOMIZED = (Kind.RANDOM_BIDDER, Kind.RANDOM_ITEM)


class TiePolicy(enum.Enum):
    ALLOCATE = "allocate"   # a type exactly on a threshold is allocated
    WITHHOLD = "withhold"


class BrRule(enum.Enum):
    ITEM1_ONLY = "item1"
    BOTH_WHEN_EQUAL = "both"


class Coin(enum.Enum):
    V = "V"
    W = "W"
    ITEM1 = "item1"
    ITEM2 = "item2"


LEGAL_COINS = {Kind.RANDOM_BIDDER: (Coin.V, Coin.W), Kind.RANDOM_ITEM: (Coin.ITEM1, Coin.ITEM2)}


@dataclass(frozen=True, order=True)
class Threshold:
    """Prices a bidder faces at one opponent report.

    ``first`` is the item-1 threshold, ``second`` the item-2 threshold.  The
    bottom-right rule only matters when the two are equal.
    """

    first: Fraction
    second: Fraction
    br_rule: BrRule = BrRule.ITEM1_ONLY

    def __post_init__(self):
        object.__setattr__(self, "first", rational(self.first))
        object.__setattr__(self, "second", rational(self.second))
        if self.first < 0 or self.second < 0:
            raise ConfigurationError(f"negative threshold {self}")

    def __str__(self):
        tail = " both" if self.br_rule is BrRule.BOTH_WHEN_EQUAL else ""
        return f"{self.first} {self.second}{tail}"


def threshold_outcome(t: Threshold, own: Valuation, s: Scenario,
                      tie: TiePolicy = TiePolicy.ALLOCATE) -> tuple[Bundle, Fraction]:
    """Bundle and payment of a bidder facing thresholds ``t``.

    Left of the item-1 threshold the bidder buys item 2 at ``second`` if it
    clears that price; right of it they keep item 1 at ``first`` or, above the
    45-degree line through the threshold corner, both items at ``second``.
    """
    if tie is TiePolicy.ALLOCATE:
        ge = Fraction.__ge__
    else:
        ge = Fraction.__gt__
    right = ge(own.v1, t.first)
    if s is Scenario.ONE_ITEM:
        return (ITEM1, t.first) if right else (EMPTY, ZERO)
    if not right:
        return (ITEM2, t.second) if ge(own.v2, t.second) else (EMPTY, ZERO)
    if ge(own.v2 - t.second, own.v1 - t.first) or t.br_rule is BrRule.BOTH_WHEN_EQUAL:
        return BOTH, t.second
    return ITEM1, t.first


@dataclass(frozen=True)
class ThresholdTables:
    """Per-opponent thresholds for both bidders.

    ``pi`` maps W's report to V's thresholds, ``phi`` maps V's report to W's.
    Missing keys fall back to ``pi_default`` / ``phi_default``.
    """

    pi: Mapping[Valuation, Threshold] = field(default_factory=dict)
    phi: Mapping[Valuation, Threshold] = field(default_factory=dict)
    tie_policy: TiePolicy = TiePolicy.ALLOCATE
    pi_default: Threshold | None = None
    phi_default: Threshold | None = None

    def __hash__(self):
        return hash((tuple(sorted(self.pi.items())), tuple(sorted(self.phi.items())),
                     self.tie_policy, self.pi_default, self.phi_default))

    def for_v(self, w: Valuation) -> Threshold:
        t = self.pi.get(w, self.pi_default)
        if t is None:
            raise ConfigurationError(f"no V thresholds for opponent report {w}")
        return t

    def for_w(self, v: Valuation) -> Threshold:
        t = self.phi.get(v, self.phi_default)
        if t is None:
            raise ConfigurationError(f"no W thresholds for opponent report {v}")
        return t

    def check_structure(self) -> None:
        """B_R must get item 1 alone whenever pi2 > pi1."""
        for t in [*self.pi.values(), *self.phi.values(), self.pi_default, self.phi_default]:
            if t is not None and t.br_rule is BrRule.BOTH_WHEN_EQUAL and t.second > t.first:
                raise ConfigurationError(f"bottom-right both-items rule needs pi2 <= pi1: {t}")


@dataclass(frozen=True)
class MechanismSpec:
    kind: Kind
    tables: ThresholdTables | None = None
    p: Fraction | None = None
    coin: Coin | None = None
    table: Mapping | None = None
    charge: str = "threshold"
    name: str = ""

    def __post_init__(self):
        k = self.kind
        if k is Kind.THRESHOLD_FORM and self.tables is None:
            raise ConfigurationError("threshold mechanism needs ThresholdTables")
        if k is Kind.STOCHASTIC_ARRIVAL:
            if self.p is None:
                raise ConfigurationError("stochastic-arrival mechanism needs an arrival probability p")
            p = rational(self.p)
            object.__setattr__(self, "p", p)
            if not 0 < p <= 1:
                raise ConfigurationError(f"arrival probability must lie in (0, 1], got {p}")
        if k in RANDOMIZED and self.coin is not None and self.coin not in LEGAL_COINS[k]:
            raise ConfigurationError(f"coin {self.coin} is not legal for {k.value}")
        if k is Kind.TABLE and self.table is None:
            raise ConfigurationError("table mechanism needs an outcome table")
        if self.charge not in ("threshold", "posted"):
            raise ConfigurationError(f"unknown charge rule {self.charge!r}")

    def __hash__(self):
        return hash((self.kind, self.tables, self.p, self.coin, self.charge, self.name))

    def __str__(self):
        if self.name:
            return self.name
        extra = []
        if self.p is not None:
            extra.append(f"p={self.p}")
        if self.coin is not None:
            extra.append(f"coin={self.coin.value}")
        if self.charge != "threshold":
            extra.append(f"charge={self.charge}")
        return self.kind.value + (f"[{', '.join(extra)}]" if extra else "")

    @property
    def is_randomized(self) -> bool:
        return self.kind in RANDOMIZED

    def with_coin(self, coin: Coin) -> "MechanismSpec":
        return replace(self, coin=coin)

    def realizations(self) -> list["MechanismSpec"]:
        """Deterministic mechanisms this spec mixes over (itself if deterministic)."""
        if self.kind in RANDOMIZED and self.coin is None:
            return [self.with_coin(c) for c in LEGAL_COINS[self.kind]]
        return [self]


def catalog(name: str, *, p=None, coin=None) -> MechanismSpec:
    try:
        kind = Kind(name)
    except ValueError:
        raise ConfigurationError(f"unknown mechanism {name!r}; choose from "
                                 f"{', '.join(k.value for k in Kind)}") from None
    if kind in (Kind.THRESHOLD_FORM, Kind.TABLE):
        raise ConfigurationError(f"{name} mechanisms must be loaded from a spec file")
    return MechanismSpec(kind, p=p, coin=Coin(coin) if isinstance(coin, str) else coin)


# ---------------------------------------------------------------------------
# allocation rules
# ---------------------------------------------------------------------------

def _alloc(v_items, w_items) -> Allocation:
    return Allocation(Bundle(1 in v_items, 2 in v_items), Bundle(1 in w_items, 2 in w_items))


def _split(item1: str, item2: str | None) -> Allocation:
    v_items = {i for i, who in ((1, item1), (2, item2)) if who == "V"}
    w_items = {i for i, who in ((1, item1), (2, item2)) if who == "W"}
    return _alloc(v_items, w_items)


def greedy_allocate(v: Valuation, w: Valuation, s: Scenario) -> Allocation:
    """Each arriving item goes to the higher marginal value.

    The item-1 winner's marginal for item 2 is ``max(val2 - val1, 0)``, the
    loser's is their full item-2 value.
    """
    first = "V" if v.v1 >= w.v1 else "W"
    if s is Scenario.ONE_ITEM:
        return _split(first, None)
    if first == "V":
        mv, mw = max(v.v2 - v.v1, ZERO), w.v2
    else:
        mv, mw = v.v2, max(w.v2 - w.v1, ZERO)
    return _split(first, "V" if mv >= mw else "W")


def per_item_highest_allocate(v: Valuation, w: Valuation, s: Scenario) -> Allocation:
    first = "V" if v.v1 >= w.v1 else "W"
    if s is Scenario.ONE_ITEM:
        return _split(first, None)
    return _split(first, "V" if v.v2 >= w.v2 else "W")


def bundling_allocate(v: Valuation, w: Valuation, s: Scenario) -> Allocation:
    """All arrived items to whoever placed the highest of the four bids."""
    winner = "V" if max(v.v1, v.v2) >= max(w.v1, w.v2) else "W"
    return _split(winner, None if s is Scenario.ONE_ITEM else winner)


def vcg_ish_allocate(v: Valuation, w: Valuation, s: Scenario) -> Allocation:
    """Item 1 to the higher item-1 bid; item 2 to whoever holds it in the
    hindsight welfare-optimal matching.  Item 1 is never revoked, so the
    item-2 recipient may end up with both items."""
    first = "V" if v.v1 >= w.v1 else "W"
    if s is Scenario.ONE_ITEM:
        return _split(first, None)
    second = "W" if v.v1 + w.v2 >= w.v1 + v.v2 else "V"
    return _split(first, second)


def _per_item_second_price(a: Allocation, v: Valuation, w: Valuation) -> Outcome:
    pv = (w.v1 if a.bundle_v.has_item1 else ZERO) + (w.v2 if a.bundle_v.has_item2 else ZERO)
    pw = (v.v1 if a.bundle_w.has_item1 else ZERO) + (v.v2 if a.bundle_w.has_item2 else ZERO)
    return Outcome(a, pv, pw)


def _bundling_outcome(v: Valuation, w: Valuation, s: Scenario) -> Outcome:
    a = bundling_allocate(v, w, s)
    bids = [v.v1, w.v1] if s is Scenario.ONE_ITEM else [v.v1, v.v2, w.v1, w.v2]
    second = sorted(bids, reverse=True)[1]
    if a.bundle_v:
        return Outcome(a, second, ZERO)
    return Outcome(a, ZERO, second)


# ---------------------------------------------------------------------------
# mechanisms with payments
# ---------------------------------------------------------------------------

def offline_vcg(v: Valuation, w: Valuation, s: Scenario) -> Outcome:
    """VCG with hindsight knowledge of the supply (not sequentially consistent)."""
    if s is Scenario.ONE_ITEM:
        if v.v1 >= w.v1:
            return Outcome(_split("V", None), w.v1, ZERO)
        return Outcome(_split("W", None), ZERO, v.v1)
    if v.v1 + w.v2 >= v.v2 + w.v1:
        return Outcome(_split("V", "W"), max(ZERO, w.v1 - w.v2), max(ZERO, v.v2 - v.v1))
    return Outcome(_split("W", "V"), max(ZERO, w.v2 - w.v1), max(ZERO, v.v1 - v.v2))


def _posted_second_item(v, w, first, price_v, price_w, base_v, base_w, charge):
    """Offer item 2 to the item-1 loser first, then to the winner.

    ``base_*`` is the bidder's item-1 surplus discount folded into the posted
    price.  Under ``charge="threshold"`` the item-2 winner pays the posted
    price net of that discount; under ``"posted"`` they pay it in full.
    """
    order = ("W", "V") if first == "V" else ("V", "W")
    for bidder in order:
        value = v.v2 if bidder == "V" else w.v2
        price = price_v if bidder == "V" else price_w
        if value >= price:
            pay = price if charge == "posted" else price - (base_v if bidder == "V" else base_w)
            return bidder, pay
    return None, ZERO


def _assemble(first, second, pay_second, item1_price_v, item1_price_w) -> Outcome:
    a = _split(first, second)
    pays = {"V": ZERO, "W": ZERO}
    if second is not None:
        pays[second] = pay_second
    if first is not None and first != second:
        pays[first] = item1_price_v if first == "V" else item1_price_w
    return Outcome(a, pays["V"], pays["W"])


def discount_mechanism(v: Valuation, w: Valuation, s: Scenario, charge: str = "threshold") -> Outcome:
    """Item 1 to the higher item-1 bid, then item 2 posted to each bidder at
    ``max(opp1, opp2) + (own1 - opp1)^+``.  A bidder left holding only item 1
    pays the other bidder's item-1 bid."""
    first = "V" if v.v1 >= w.v1 else "W"
    if s is Scenario.ONE_ITEM:
        return _assemble(first, None, ZERO, w.v1, v.v1)
    disc_v = max(v.v1 - w.v1, ZERO)
    disc_w = max(w.v1 - v.v1, ZERO)
    price_v = max(w.v1, w.v2) + disc_v
    price_w = max(v.v1, v.v2) + disc_w
    second, pay = _posted_second_item(v, w, first, price_v, price_w, disc_v, disc_w, charge)
    return _assemble(first, second, pay, w.v1, v.v1)


def stochastic_arrival_mechanism(p: Fraction, v: Valuation, w: Valuation, s: Scenario,
                                 charge: str = "threshold") -> Outcome:
    """Deterministic mechanism for item 2 arriving with known probability ``p``."""
    p = rational(p)
    if p <= 0 or p > 1:
        raise ConfigurationError(f"arrival probability must lie in (0, 1], got {p}")
    bar_v = max(w.v1, p * w.v2)   # V's item-1 price
    bar_w = max(v.v1, p * v.v2)
    if v.v1 >= bar_v:
        first = "V"
    elif w.v1 >= bar_w:
        first = "W"
    else:
        first = None
    if s is Scenario.ONE_ITEM:
        return _assemble(first, None, ZERO, bar_v, bar_w)
    disc_v = max(v.v1 - bar_v, ZERO) if first == "V" else ZERO
    disc_w = max(w.v1 - bar_w, ZERO) if first == "W" else ZERO
    price_v = max(w.v1 / p, w.v2) + disc_v
    price_w = max(v.v1 / p, v.v2) + disc_w
    second, pay = _posted_second_item(v, w, first or "W", price_v, price_w, disc_v, disc_w, charge)
    return _assemble(first, second, pay, bar_v, bar_w)


def threshold_mechanism(t: ThresholdTables, v: Valuation, w: Valuation, s: Scenario,
                        strict: bool = True) -> Outcome:
    """Each bidder's outcome comes from their own thresholds; an item awarded
    to both raises unless ``strict`` is off (verification wants the raw
    outcome so it can report the conflict)."""
    bv, pv = threshold_outcome(t.for_v(w), v, s, t.tie_policy)
    bw, pw = threshold_outcome(t.for_w(v), w, s, t.tie_policy)
    if strict and bv.code & bw.code:
        raise InfeasibleOutcome(f"thresholds award an item to both bidders at v={v}, w={w}, {s}",
                                profile=(v, w, s))
    return Outcome(Allocation(bv, bw), pv, pw)


def randomized_baseline(kind: Kind, coin: Coin, v: Valuation, w: Valuation, s: Scenario) -> Outcome:
    if coin not in LEGAL_COINS.get(kind, ()):
        raise ConfigurationError(f"coin {coin} is not legal for {kind}")
    if kind is Kind.RANDOM_BIDDER:
        # a bidder who gets everything whatever they report can only be charged a constant
        who = coin.value
        return Outcome(_split(who, None if s is Scenario.ONE_ITEM else who))
    if coin is Coin.ITEM2 and s is Scenario.ONE_ITEM:
        return Outcome(Allocation())
    if coin is Coin.ITEM1:
        if v.v1 >= w.v1:
            return Outcome(_split("V", None), w.v1, ZERO)
        return Outcome(_split("W", None), ZERO, v.v1)
    if v.v2 >= w.v2:
        return Outcome(_alloc({2}, set()), w.v2, ZERO)
    return Outcome(_alloc(set(), {2}), ZERO, v.v2)


_ALLOCATION_ONLY = {
    Kind.GREEDY: greedy_allocate,
    Kind.PER_ITEM_HIGHEST: per_item_highest_allocate,
    Kind.VCG_ISH: vcg_ish_allocate,
}


def allocation_rule(m: MechanismSpec):
    """The allocation function of ``m`` as ``(v, w, s) -> Allocation``."""
    if m.kind in _ALLOCATION_ONLY:
        return _ALLOCATION_ONLY[m.kind]
    if m.kind is Kind.BUNDLING:
        return bundling_allocate
    return lambda v, w, s: evaluate(m, v, w, s).allocation


def evaluate(m: MechanismSpec, v: Valuation, w: Valuation, s: Scenario,
             strict: bool = True) -> Outcome:
    """Outcome of ``m`` without the feasibility guard applied by ``core.run``.

    With ``strict=False`` threshold mechanisms return conflicting
    allocations instead of raising.
    """
    k = m.kind
    if k in _ALLOCATION_ONLY:
        return _per_item_second_price(_ALLOCATION_ONLY[k](v, w, s), v, w)
    if k is Kind.BUNDLING:
        return _bundling_outcome(v, w, s)
    if k is Kind.DISCOUNT:
        return discount_mechanism(v, w, s, m.charge)
    if k is Kind.OFFLINE_VCG:
        return offline_vcg(v, w, s)
    if k is Kind.THRESHOLD_FORM:
        return threshold_mechanism(m.tables, v, w, s, strict)
    if k is Kind.STOCHASTIC_ARRIVAL:
        return stochastic_arrival_mechanism(m.p, v, w, s, m.charge)
    if k in RANDOMIZED:
        if m.coin is None:
            raise ConfigurationError(f"{k.value} needs a realized coin to be run deterministically")
        return randomized_baseline(k, m.coin, v, w, s)
    if k is Kind.TABLE:
        try:
            return m.table[(v, w, s)]
        except KeyError:
            raise ConfigurationError(f"table mechanism has no entry for v={v}, w={w}, {s}") from None
    raise ConfigurationError(f"unsupported mechanism kind {k}")


# ---------------------------------------------------------------------------
# fixtures and table helpers
# ---------------------------------------------------------------------------

def threshold_spec(tables: ThresholdTables, name: str = "") -> MechanismSpec:
    tables.check_structure()
    return MechanismSpec(Kind.THRESHOLD_FORM, tables=tables, name=name)


def constant_with_complement(pi: Threshold, grid, name: str = "") -> MechanismSpec:
    """V faces the same thresholds everywhere; W receives whatever V does not
    get, for free.  Built from W thresholds that are either 0 or above the grid."""
    above = grid.top() + 1
    phi = {}
    for v in grid.types("V"):
        left_v, _ = threshold_outcome(pi, v, Scenario.TWO_ITEMS)
        take1 = not left_v.has_item1
        take2 = not left_v.has_item2
        first = ZERO if take1 else above
        second = ZERO if take2 else above
        rule = BrRule.BOTH_WHEN_EQUAL if take1 and take2 else BrRule.ITEM1_ONLY
        phi[v] = Threshold(first, second, rule)
    tables = ThresholdTables(pi={}, phi=phi, pi_default=pi)
    return threshold_spec(tables, name=name or f"threshold[pi1={pi.first}, pi2={pi.second}]")


def tabulate(m: MechanismSpec, grid, transform=None, name: str = "") -> MechanismSpec:
    """Materialize ``m`` on every grid profile as a Table mechanism.

    ``transform(v, w, s, outcome) -> outcome`` may tamper with entries,
    which is how corrupted fixtures are produced.
    """
    table = {}
    for v, w in grid.profiles():
        for s in Scenario:
            out = evaluate(m, v, w, s)
            if transform is not None:
                out = transform(v, w, s, out)
            table[(v, w, s)] = out
    return MechanismSpec(Kind.TABLE, table=table, name=name or f"table({m})")


# ---------------------------------------------------------------------------
# spec files
# ---------------------------------------------------------------------------

def _threshold_row(tokens, where) -> tuple[Valuation, Threshold]:
    if "->" not in tokens:
        raise ConfigurationError(f"{where}: expected 'a b -> t1 t2 [both]'")
    i = tokens.index("->")
    lhs, rhs = tokens[:i], tokens[i + 1:]
    if len(lhs) != 2 or len(rhs) not in (2, 3):
        raise ConfigurationError(f"{where}: expected 'a b -> t1 t2 [both]'")
    rule = BrRule.ITEM1_ONLY
    if len(rhs) == 3:
        if rhs[2] != "both":
            raise ConfigurationError(f"{where}: unknown bottom-right rule {rhs[2]!r}")
        rule = BrRule.BOTH_WHEN_EQUAL
    try:
        key = Valuation(rational(lhs[0]), rational(lhs[1]))
        return key, Threshold(rational(rhs[0]), rational(rhs[1]), rule)
    except (ConfigurationError, TypeError) as exc:
        raise ConfigurationError(f"{where}: {exc}") from exc


def loads_spec(text: str, source: str = "<spec>") -> MechanismSpec:
    """Parse a mechanism spec file.

    ``key = value`` lines set ``kind``, ``p``, ``coin``, ``charge``,
    ``tie_policy``, ``pi_default`` and ``phi_default``; ``[pi]`` and
    ``[phi]`` sections hold threshold rows ``a b -> t1 t2 [both]``.
    """
    keys: dict[str, tuple[str, int]] = {}
    rows = {"pi": {}, "phi": {}}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        where = f"{source}:{lineno}"
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in rows:
                raise ConfigurationError(f"{where}: unknown section [{section}]")
            continue
        if section is None:
            if "=" not in line:
                raise ConfigurationError(f"{where}: expected 'key = value'")
            k, val = (x.strip() for x in line.split("=", 1))
            keys[k] = (val, lineno)
        else:
            key, t = _threshold_row(line.split(), where)
            rows[section][key] = t
    if "kind" not in keys:
        raise ConfigurationError(f"{source}: missing 'kind = ...'")

    def get(name, conv=str):
        if name not in keys:
            return None
        val, lineno = keys[name]
        try:
            return conv(val)
        except (ValueError, ConfigurationError, TypeError) as exc:
            raise ConfigurationError(f"{source}:{lineno}: bad value for {name}: {val!r}") from exc

    def default(name):
        val = get(name)
        if val is None:
            return None
        parts = val.split()
        if len(parts) not in (2, 3):
            raise ConfigurationError(f"{source}:{keys[name][1]}: {name} needs two thresholds")
        rule = BrRule.BOTH_WHEN_EQUAL if len(parts) == 3 and parts[2] == "both" else BrRule.ITEM1_ONLY
        return Threshold(rational(parts[0]), rational(parts[1]), rule)

    kind = get("kind", Kind)
    if kind is Kind.TABLE:
        raise ConfigurationError(f"{source}: table mechanisms cannot be loaded from spec files")
    if kind is Kind.THRESHOLD_FORM:
        tables = ThresholdTables(pi=rows["pi"], phi=rows["phi"],
                                 tie_policy=get("tie_policy", TiePolicy) or TiePolicy.ALLOCATE,
                                 pi_default=default("pi_default"), phi_default=default("phi_default"))
        try:
            tables.check_structure()
        except ConfigurationError as exc:
            raise ConfigurationError(f"{source}: {exc}") from exc
        return MechanismSpec(kind, tables=tables)
    try:
        return MechanismSpec(kind, p=get("p", rational), coin=get("coin", Coin),
                             charge=get("charge") or "threshold")
    except ConfigurationError as exc:
        raise ConfigurationError(f"{source}: {exc}") from exc


def load_spec(path: str | Path) -> MechanismSpec:
    return loads_spec(Path(path).read_text(), source=str(path))


def dumps_spec(m: MechanismSpec) -> str:
    if m.kind is Kind.TABLE:
        raise ConfigurationError("table mechanisms have no spec-file form")
    lines = [f"kind = {m.kind.value}"]
    if m.p is not None:
        lines.append(f"p = {format_rational(m.p)}")
    if m.coin is not None:
        lines.append(f"coin = {m.coin.value}")
    if m.charge != "threshold":
        lines.append(f"charge = {m.charge}")
    t = m.tables
    if t is not None:
        lines.append(f"tie_policy = {t.tie_policy.value}")
        if t.pi_default is not None:
            lines.append(f"pi_default = {t.pi_default}")
        if t.phi_default is not None:
            lines.append(f"phi_default = {t.phi_default}")
        for section, rows in (("pi", t.pi), ("phi", t.phi)):
            if rows:
                lines.append(f"[{section}]")
                lines.extend(f"{k.v1} {k.v2} -> {th}" for k, th in sorted(rows.items()))
    return "\n".join(lines) + "\n"
