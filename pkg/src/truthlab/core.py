"""Exact-rational domain model for the two-bidder, two-item online-supply auction.

Item 1 always arrives; item 2 may or may not.  Bidders ``V`` and ``W`` are
unit-demand.  Everything here is built on :class:`fractions.Fraction`, so no
floating point value ever enters a welfare, payment or utility computation.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Union

__all__ = [
    "Rational", "rational", "format_rational", "parse_rational",
    "Valuation", "Scenario", "Bundle", "Allocation", "Outcome", "Grid",
    "ConfigurationError", "InfeasibleOutcome",
    "EMPTY", "ITEM1", "ITEM2", "BOTH", "BUNDLES",
    "welfare", "offline_opt", "utility", "bundle_value", "run",
    "load_grid", "dump_grid",
]

Rational = Fraction
RationalLike = Union[int, str, Fraction]


class ConfigurationError(ValueError):
    """Raised for invalid mechanism specs, grids or probe parameters."""


class InfeasibleOutcome(RuntimeError):
    """An allocation awards the same item to both bidders (or an absent item)."""

    def __init__(self, message, profile=None):
        super().__init__(message)
        self.profile = profile


def rational(x: RationalLike) -> Fraction:
    """Coerce ints, ``"num/den"`` strings and Fractions; floats are refused."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigurationError(f"not a rational: {x!r}") from exc
    raise TypeError(f"refusing to build a rational from {type(x).__name__}")


def format_rational(r: Fraction) -> str:
    # Fraction.__str__ already omits a unit denominator
    return str(r)


def parse_rational(text: str) -> Fraction:
    return rational(text)


@dataclass(frozen=True, order=True)
class Valuation:
    """A bidder's values for item 1 and item 2."""

    v1: Fraction
    v2: Fraction

    def __post_init__(self):
        object.__setattr__(self, "v1", rational(self.v1))
        object.__setattr__(self, "v2", rational(self.v2))
        if self.v1 < 0 or self.v2 < 0:
            raise ConfigurationError(f"negative valuation {self}")

    def __iter__(self):
        return iter((self.v1, self.v2))

    def __str__(self):
        return f"({self.v1},{self.v2})"

    @classmethod
    def of(cls, pair) -> "Valuation":
        if isinstance(pair, Valuation):
            return pair
        a, b = pair
        return cls(rational(a), rational(b))


class Scenario(enum.Enum):
    ONE_ITEM = "OneItem"
    TWO_ITEMS = "TwoItems"

    def __str__(self):
        return self.value


@dataclass(frozen=True, order=True)
class Bundle:
    has_item1: bool = False
    has_item2: bool = False

    @property
    def code(self) -> int:
        return int(self.has_item1) | (int(self.has_item2) << 1)

    @classmethod
    def from_code(cls, code: int) -> "Bundle":
        return BUNDLES[code]

    def __bool__(self):
        return self.has_item1 or self.has_item2

    def __str__(self):
        items = [str(i) for i, h in ((1, self.has_item1), (2, self.has_item2)) if h]
        return "{" + ",".join(items) + "}" if items else "{}"


EMPTY = Bundle(False, False)
ITEM1 = Bundle(True, False)
ITEM2 = Bundle(False, True)
BOTH = Bundle(True, True)
BUNDLES = (EMPTY, ITEM1, ITEM2, BOTH)


@dataclass(frozen=True)
class Allocation:
    """Bundles for V and W.  Feasibility is checked, not enforced, so that
    verification code can represent and report broken mechanisms."""

    bundle_v: Bundle = EMPTY
    bundle_w: Bundle = EMPTY

    def is_feasible(self, scenario: Scenario | None = None) -> bool:
        if self.bundle_v.code & self.bundle_w.code:
            return False
        if scenario is Scenario.ONE_ITEM and (self.bundle_v.has_item2 or self.bundle_w.has_item2):
            return False
        return True

    def bundle(self, bidder: str) -> Bundle:
        return self.bundle_v if bidder == "V" else self.bundle_w

    def item1_holder(self) -> str | None:
        if self.bundle_v.has_item1 and self.bundle_w.has_item1:
            return "both"
        if self.bundle_v.has_item1:
            return "V"
        if self.bundle_w.has_item1:
            return "W"
        return None

    def __str__(self):
        return f"V:{self.bundle_v} W:{self.bundle_w}"


@dataclass(frozen=True)
class Outcome:
    allocation: Allocation
    payment_v: Fraction = Fraction(0)
    payment_w: Fraction = Fraction(0)

    def payment(self, bidder: str) -> Fraction:
        return self.payment_v if bidder == "V" else self.payment_w

    def bundle(self, bidder: str) -> Bundle:
        return self.allocation.bundle(bidder)

    def __str__(self):
        a = self.allocation
        return f"V:{a.bundle_v} pays {self.payment_v}; W:{a.bundle_w} pays {self.payment_w}"


def bundle_value(val: Valuation, bundle: Bundle) -> Fraction:
    """Unit-demand value: the best single item in the bundle."""
    best = Fraction(0)
    if bundle.has_item1:
        best = val.v1
    if bundle.has_item2 and val.v2 > best:
        best = val.v2
    return best


def welfare(a: Allocation, v: Valuation, w: Valuation) -> Fraction:
    return bundle_value(v, a.bundle_v) + bundle_value(w, a.bundle_w)


def utility(bidder_valuation: Valuation, bundle: Bundle, payment: Fraction) -> Fraction:
    return bundle_value(bidder_valuation, bundle) - payment


def feasible_allocations(scenario: Scenario) -> Iterator[Allocation]:
    """Every allocation consistent with the arrived items (free disposal allowed)."""
    bundles = (EMPTY, ITEM1) if scenario is Scenario.ONE_ITEM else BUNDLES
    for bv, bw in itertools.product(bundles, repeat=2):
        a = Allocation(bv, bw)
        if a.is_feasible(scenario):
            yield a


def offline_opt(v: Valuation, w: Valuation, s: Scenario) -> Fraction:
    """Maximum-weight matching of bidders to the arrived items."""
    if s is Scenario.ONE_ITEM:
        return max(v.v1, w.v1)
    return max(v.v1 + w.v2, w.v1 + v.v2)


@dataclass(frozen=True)
class Grid:
    """Finite discretisation of the type space.

    ``values`` is shared by all four coordinates unless an axis override is
    given (``v1``, ``v2`` for bidder V's item values, ``w1``, ``w2`` for W's).
    """

    values: tuple
    v1: tuple | None = None
    v2: tuple | None = None
    w1: tuple | None = None
    w2: tuple | None = None

    def __post_init__(self):
        for name in ("values", "v1", "v2", "w1", "w2"):
            axis = getattr(self, name)
            if axis is None:
                continue
            axis = tuple(rational(x) for x in axis)
            if not axis:
                raise ConfigurationError(f"grid axis {name} is empty")
            if any(x < 0 for x in axis):
                raise ConfigurationError(f"grid axis {name} has a negative value")
            if any(a >= b for a, b in zip(axis, axis[1:])):
                raise ConfigurationError(f"grid axis {name} is not strictly increasing")
            object.__setattr__(self, name, axis)

    @classmethod
    def of(cls, values: Iterable[RationalLike], **axes) -> "Grid":
        vals = sorted({rational(x) for x in values})
        axes = {k: tuple(sorted({rational(x) for x in a})) for k, a in axes.items() if a is not None}
        return cls(tuple(vals), **axes)

    def axis(self, name: str) -> tuple:
        override = getattr(self, name)
        return self.values if override is None else override

    def types(self, bidder: str) -> list[Valuation]:
        """All grid valuations of one bidder, in lexicographic order."""
        a, b = ("v1", "v2") if bidder == "V" else ("w1", "w2")
        return [Valuation(x, y) for x in self.axis(a) for y in self.axis(b)]

    def profiles(self) -> Iterator[tuple[Valuation, Valuation]]:
        ws = self.types("W")
        for v in self.types("V"):
            for w in ws:
                yield v, w

    def all_values(self) -> list[Fraction]:
        vals = set(self.values)
        for name in ("v1", "v2", "w1", "w2"):
            vals.update(self.axis(name))
        return sorted(vals)

    def top(self) -> Fraction:
        return self.all_values()[-1]

    def is_subgrid_of(self, other: "Grid") -> bool:
        return all(set(self.axis(n)) <= set(other.axis(n)) for n in ("v1", "v2", "w1", "w2"))

    def __len__(self):
        return len(self.values)


def load_grid(path: str | Path) -> Grid:
    """Read a grid file: one rational per line, ``#`` starts a comment.

    Errors carry the offending line number.
    """
    values = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            values.append(rational(text))
        except (ConfigurationError, TypeError) as exc:
            raise ConfigurationError(f"{path}:{lineno}: not a rational: {text!r}") from exc
        if values[-1] < 0:
            raise ConfigurationError(f"{path}:{lineno}: negative grid value {text}")
    if not values:
        raise ConfigurationError(f"{path}: grid file has no values")
    return Grid.of(values)


def dump_grid(grid: Grid) -> str:
    return "".join(f"{format_rational(x)}\n" for x in grid.values)


def run(m, v: Valuation, w: Valuation, s: Scenario) -> Outcome:
    """Run mechanism spec ``m`` at a profile; raises on infeasible outcomes."""
    from .mechanisms import evaluate

    out = evaluate(m, Valuation.of(v), Valuation.of(w), s)
    if not out.allocation.is_feasible(s):
        raise InfeasibleOutcome(f"{m} produced infeasible {out.allocation} at v={v}, w={w}, {s}",
                                profile=(v, w, s))
    return out
