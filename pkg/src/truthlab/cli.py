"""Batch runner: ``truthlab <command> --mech ... --grid ...``.

Exit codes: 0 clean, 1 violations or an impossibility finding, 2 bad
configuration.  Reports go to stdout, or to files under ``--out``.
"""
from __future__ import annotations

import argparse
import datetime
import os
import sys
from pathlib import Path

from . import characterize, impossibility, payments, verify
from .core import ConfigurationError, Grid, Scenario, load_grid, parse_rational
from .mechanisms import Kind, MechanismSpec, catalog, load_spec

EXIT_CLEAN, EXIT_FINDING, EXIT_CONFIG = 0, 1, 2


def _grid(text: str) -> Grid:
    """A grid file path, or inline comma-separated rationals."""
    if text is None:
        raise ConfigurationError("--grid is required")
    if Path(text).exists():
        return load_grid(text)
    try:
        return Grid.of(parse_rational(x) for x in text.split(",") if x.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigurationError(f"--grid {text!r} is neither a file nor a list of rationals") from exc


def _mech(args) -> MechanismSpec:
    if args.mech is None:
        raise ConfigurationError("--mech is required")
    if Path(args.mech).exists():
        m = load_spec(args.mech)
        if args.p is not None and m.kind is Kind.STOCHASTIC_ARRIVAL:
            m = MechanismSpec(m.kind, p=args.p, charge=m.charge, name=m.name)
        return m
    return catalog(args.mech, p=args.p)


def _rational(text: str):
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from None


class _Out:
    """Collects named report files; prints them when no ``--out`` is given."""

    def __init__(self, args):
        self.dir = Path(args.out) if args.out else None
        self.stamp = not args.no_timestamp
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)

    def header(self) -> str:
        if not self.stamp:
            return ""
        now = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
        return f"# generated {now}\n"

    def write(self, name: str, body: str, csv: bool = False):
        text = body if csv else self.header() + body
        if self.dir is None:
            sys.stdout.write(text)
        else:
            (self.dir / name).write_text(text)


def cmd_verify(args) -> int:
    m, g = _mech(args), _grid(args.grid)
    found = (verify.check_dsic(m, g, jobs=args.jobs) + verify.check_ir(m, g, jobs=args.jobs)
             + verify.check_consistency(m, g))
    counts = {k: sum(1 for r in found if r.kind is k) for k in verify.ViolationKind}
    lines = [f"mechanism = {m}", f"grid = {' '.join(str(x) for x in g.values)}"]
    lines += [f"{k.value} = {n}" for k, n in counts.items()]
    lines += [str(r) for r in found[:args.limit]]
    out = _Out(args)
    out.write("verify.txt", "\n".join(lines) + "\n")
    if args.out:
        out.write("violations.csv", verify.violations_to_csv(found), csv=True)
    return EXIT_FINDING if found else EXIT_CLEAN


def cmd_ratio(args) -> int:
    m, g = _mech(args), _grid(args.grid)
    if m.is_randomized or m.kind is Kind.STOCHASTIC_ARRIVAL:
        rep = verify.expected_ratio(m, g, H=args.H)
    else:
        rep = verify.worst_case_ratio(m, g, H=args.H)
    _Out(args).write("ratio.csv", verify.ratio_to_csv([(str(m), rep)]), csv=True)
    return EXIT_FINDING if rep.within is False else EXIT_CLEAN


def cmd_payments(args) -> int:
    m, g = _mech(args), _grid(args.grid)
    certs = payments.payments_report(m, g)
    lines = [payments.format_certificate(b, opp, s, c) for b, opp, s, c in certs]
    bad = sum(1 for *_, c in certs if not c.feasible)
    lines.insert(0, f"infeasible = {bad} of {len(certs)}")
    _Out(args).write("payments.txt", "\n".join(lines) + "\n")
    return EXIT_FINDING if bad else EXIT_CLEAN


def cmd_lemmas(args) -> int:
    m, g = _mech(args), _grid(args.grid)
    rep = characterize.lemma_suite(m, g, _need(args.H, "--H"), jobs=args.jobs)
    out = _Out(args)
    out.write("lemmas.txt", rep.text())
    if args.out:
        out.write("lemmas.csv", rep.to_csv(), csv=True)
    return EXIT_FINDING if rep.failures() else EXIT_CLEAN


def cmd_probe(args) -> int:
    m, g = _mech(args), _grid(args.grid)
    probe = characterize.SNEpsilonProbe(_need(args.N, "--N"), _need(args.eps, "--eps"),
                                        _need(args.H, "--H"))
    characterize.constancy_probe(m, probe, g)
    _Out(args).write("probe.txt", probe.text())
    return EXIT_CLEAN if probe.passed else EXIT_FINDING


def cmd_search(args) -> int:
    g = _grid(args.grid)
    scen = (Scenario.ONE_ITEM,) if args.one_item_only else impossibility.SCENARIOS
    space = impossibility.SearchSpace(g, scenarios=scen, budget=args.budget)
    cert = impossibility.search_best(space, _need(args.H, "--H"), jobs=args.jobs,
                                     node_limit=args.budget)
    out = _Out(args)
    out.write("certificate.txt", cert.text())
    if args.log:
        out.write("rejections.log", cert.log_text(), csv=True)
    return EXIT_FINDING if cert.impossible else EXIT_CLEAN


def cmd_demo(args) -> int:
    from . import demo
    return demo.run(args.name, sys.stdout)


def _need(value, flag):
    if value is None:
        raise ConfigurationError(f"{flag} is required for this command")
    if value <= 0:
        raise ConfigurationError(f"{flag} must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="truthlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mech", help="catalog name or spec file")
    common.add_argument("--grid", help="grid file or comma-separated rationals")
    common.add_argument("--H", type=_rational)
    common.add_argument("--N", type=_rational)
    common.add_argument("--eps", type=_rational)
    common.add_argument("--p", type=_rational, help="arrival probability for stochastic")
    common.add_argument("--budget", type=int, default=impossibility.DEFAULT_BUDGET)
    common.add_argument("--jobs", type=int, default=int(os.environ.get("TRUTHLAB_JOBS", "1") or 1))
    common.add_argument("--out", help="directory for report files")
    common.add_argument("--no-timestamp", action="store_true")
    for name, fn, help_ in (
            ("verify", cmd_verify, "DSIC, IR and consistency report"),
            ("ratio", cmd_ratio, "worst-case (or expected) welfare ratio as CSV"),
            ("payments", cmd_payments, "payment existence per opponent report"),
            ("lemmas", cmd_lemmas, "threshold lemma suite"),
            ("probe", cmd_probe, "constancy probe on the S_{N,eps} segment"),
            ("search", cmd_search, "exhaustive threshold-mechanism search"),
    ):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(fn=fn)
        if name == "verify":
            sp.add_argument("--limit", type=int, default=50, help="violations listed in the text report")
        if name == "search":
            sp.add_argument("--log", action="store_true", help="also dump the rejection log")
            sp.add_argument("--one-item-only", action="store_true")
    dp = sub.add_parser("demo", help="narrated walk-through")
    dp.add_argument("name", nargs="?", default="list")
    dp.set_defaults(fn=cmd_demo)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_CLEAN
    try:
        return args.fn(args)
    except (ConfigurationError, FileNotFoundError) as exc:
        print(f"truthlab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
