from fractions import Fraction

import pytest
from hypothesis import strategies as st

from truthlab.core import Grid, Valuation

F = Fraction


def V(a, b):
    return Valuation(F(a), F(b))


small_rationals = st.fractions(min_value=0, max_value=20, max_denominator=6)
valuations = st.builds(Valuation, small_rationals, small_rationals)


@pytest.fixture
def tiny_grid():
    return Grid.of([0, 1, 2, 3])


@pytest.fixture
def discount_grid():
    return Grid.of([0, F(1, 2), 1, 2, 3, 5, 10, 100, 101])


CRITERIA = {}


class Criterion:
    """Records one acceptance criterion as PASS or FAIL, whatever raised."""

    def __init__(self, number: int, title: str):
        self.number, self.title, self.notes = number, title, []

    def note(self, text: str):
        self.notes.append(text)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        ok = exc_type is None
        if not ok and exc_type is not AssertionError:
            self.notes.append(f"{exc_type.__name__}: {exc}")
        CRITERIA[self.number] = (ok, self.title, "; ".join(self.notes))
        print(_criterion_line(self.number))
        return False


def _criterion_line(n: int) -> str:
    ok, title, notes = CRITERIA[n]
    tail = f" ({notes})" if notes else ""
    return f"criterion {n}: {'PASS' if ok else 'FAIL'} {title}{tail}"


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        terminalreporter.write_line(_criterion_line(n))
