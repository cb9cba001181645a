"""Command-line front end.

Exit codes: 0 success or PASS, 1 audit FAIL or a proven bound exceeded,
2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import corpus, reproduce
from .audit import (
    SCHEMA_VERSION,
    DeviationSpace,
    DeviationSpaceTooLarge,
    approximation_ratio,
    audit_group_strategyproof,
    audit_report_to_dict,
    audit_reports_to_csv,
    audit_strategyproof,
    ratio_report_to_dict,
    within_sqrt3_bound,
)
from .mechanisms import Mechanism, MechanismError
from .model import (
    InformationSetting,
    InstanceFormatError,
    InvalidInstanceError,
    UtilityClass,
    expected_welfare,
    format_rational,
    instance_to_dict,
    load_instance,
    optimal_choice,
)
from .search import (
    SearchConfig,
    conjecture_result_to_dict,
    conjecture_scan,
    search_result_to_dict,
    worst_case_search,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def within_proven_bound(mechanism: str, report) -> bool | None:
    """Whether a ratio respects the mechanism's proven bound; None if no bound is known."""
    if report.unbounded:
        return False if mechanism in _BOUNDS or mechanism == "proportional" else None
    if mechanism == "proportional":
        return within_sqrt3_bound(report.optimal_welfare, report.mechanism_welfare)
    bound = _BOUNDS.get(mechanism)
    return None if bound is None else report.ratio <= bound


_BOUNDS = {
    "middle": Fraction(2),
    "km-middle": Fraction(2),
    "mirror": Fraction(4, 3),
    "rd:optimal": Fraction(3, 2),
}


def _load(source: str):
    if corpus.is_corpus_name(source):
        try:
            return corpus.resolve(source).instance, source
        except KeyError as exc:
            raise UsageError(f"unknown corpus instance {exc}") from None
    path = Path(source)
    if not path.exists():
        raise UsageError(f"no such instance file or corpus name: {source!r}")
    try:
        return load_instance(path), path.stem
    except InstanceFormatError as exc:
        raise UsageError(f"{source}: {exc}") from None


def _mechanism(spec: str) -> Mechanism:
    try:
        return Mechanism.parse(spec)
    except MechanismError as exc:
        raise UsageError(str(exc)) from None


def _run(mechanism: Mechanism, instance):
    try:
        return mechanism(instance)
    except MechanismError as exc:
        raise UsageError(str(exc)) from None


def _emit(args, text: str) -> None:
    if args.output:
        Path(args.output).write_text(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _json(data) -> str:
    return json.dumps(data, indent=2)


def _decimal(value) -> str:
    return "unbounded" if value is None else f"{value:.6f}"


def _lottery_rows(lottery) -> list:
    return [
        {"probability": format_rational(p),
         "placements": [{"facility": j, "location": format_rational(y)} for j, y in o.placements]}
        for p, o in lottery
    ]


def cmd_eval(args) -> int:
    instance, name = _load(args.instance)
    mech = _mechanism(args.mechanism)
    lottery = _run(mech, instance)
    welfare = expected_welfare(instance, lottery)
    if args.format == "json":
        _emit(args, _json({
            "schema_version": SCHEMA_VERSION, "mechanism": mech.name, "instance_id": name,
            "lottery": _lottery_rows(lottery), "expected_welfare": format_rational(welfare),
        }))
    else:
        lines = [f"mechanism {mech.name} on {name}"]
        for p, o in lottery:
            where = ", ".join(f"facility {j} @ {y}" for j, y in o.placements)
            lines.append(f"  {p}: {where}")
        lines.append(f"expected welfare {welfare}")
        _emit(args, "\n".join(lines))
    return EXIT_OK


def cmd_opt(args) -> int:
    instance, name = _load(args.instance)
    outcome, welfare = optimal_choice(instance)
    if args.format == "json":
        _emit(args, _json({
            "schema_version": SCHEMA_VERSION, "instance_id": name,
            "placements": [{"facility": j, "location": format_rational(y)} for j, y in outcome.placements],
            "optimal_welfare": format_rational(welfare),
        }))
    else:
        where = ", ".join(f"facility {j} @ {y}" for j, y in outcome.placements)
        _emit(args, f"optimal on {name}: {where}\noptimal welfare {welfare}")
    return EXIT_OK


def cmd_audit(args) -> int:
    instance, name = _load(args.instance)
    mech = _mechanism(args.mechanism)
    _run(mech, instance)
    space = DeviationSpace(args.setting, args.grid, not args.grid_only, args.max_deviations)
    try:
        if args.group:
            report = audit_group_strategyproof(mech, instance, space, args.max_coalition)
        else:
            report = audit_strategyproof(mech, instance, space)
    except DeviationSpaceTooLarge as exc:
        raise UsageError(str(exc)) from None
    if args.format == "csv":
        _emit(args, audit_reports_to_csv([(report, mech.name, name)]))
    elif args.format == "json":
        _emit(args, _json(audit_report_to_dict(report, mech.name, name)))
    else:
        lines = [f"{report.verdict.value.upper()}: {mech.name} on {name}, setting {report.setting.value}, "
                 f"{report.deviations_checked} deviations checked"]
        if report.passed:
            lines.append("no profitable misreport in the searched space")
        for v in report.violations[: args.show]:
            reports = ", ".join(f"x={a.position} approve={sorted(a.approvals)}" for a in v.misreports)
            gains = ", ".join(f"{b} -> {a}" for b, a in zip(v.truthful_utilities, v.deviant_utilities))
            lines.append(f"  agents {list(v.coalition)} report [{reports}]: utility {gains}")
        if len(report.violations) > args.show:
            lines.append(f"  ... {len(report.violations) - args.show} more")
        _emit(args, "\n".join(lines))
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_ratio(args) -> int:
    instance, name = _load(args.instance)
    mech = _mechanism(args.mechanism)
    _run(mech, instance)
    report = approximation_ratio(mech, instance)
    ok = within_proven_bound(mech.name, report)
    if args.format == "json":
        data = ratio_report_to_dict(report, mech.name)
        data["instance_id"] = name
        data["within_proven_bound"] = ok
        _emit(args, _json(data))
    else:
        _emit(args, "inf" if report.unbounded else str(report.ratio))
    return EXIT_FAIL if ok is False else EXIT_OK


def _search_config(args, mechanism: str) -> SearchConfig:
    return SearchConfig(
        mechanism=mechanism, n_agents=args.n, iterations=args.iters, restarts=args.restarts,
        seed=args.seed, grid=args.grid, m=args.m, k=args.k,
        utility_class=UtilityClass(args.utility_class), workers=args.workers,
    )


def cmd_search(args) -> int:
    mech = _mechanism(args.mechanism)
    result = worst_case_search(_search_config(args, mech.name))
    ok = within_proven_bound(mech.name, result.report)
    data = search_result_to_dict(result)
    data["within_proven_bound"] = ok
    if args.format == "json":
        _emit(args, _json(data))
    else:
        _emit(args, f"max ratio {data['max_ratio']} ({_decimal(data['max_ratio_decimal'])}) "
                    f"after {result.evaluations} evaluations\nwitness {_json(instance_to_dict(result.instance))}")
    return EXIT_FAIL if ok is False else EXIT_OK


def cmd_conjecture(args) -> int:
    args.m, args.k, args.utility_class = 2, 1, "sum"
    result = conjecture_scan(_search_config(args, "rd:proportional"))
    data = conjecture_result_to_dict(result)
    if args.format == "json":
        _emit(args, _json(data))
    else:
        lines = [f"rd:proportional max ratio {data['max_ratio']} ({_decimal(data['max_ratio_decimal'])})"
                 + ("  ABOVE 3/2" if result.exceeds else "")]
        for ref in data["references"]:
            flag = "  ABOVE 3/2" if ref["exceeds_conjecture"] else ""
            lines.append(f"  {ref['name']}: {ref['ratio']} ({ref['ratio_decimal']:.6f}){flag}")
        lines.append(f"witness {_json(data['witness_instance'])}")
        _emit(args, "\n".join(lines))
    return EXIT_OK


def cmd_reproduce(args) -> int:
    try:
        checks = reproduce.checks_for(args.name)
    except (KeyError, ValueError) as exc:
        raise UsageError(f"unknown or malformed corpus name {args.name!r} ({exc})") from None
    if args.format == "json":
        _emit(args, _json({"schema_version": SCHEMA_VERSION, "name": args.name,
                           "checks": reproduce.checks_to_rows(checks)}))
    else:
        _emit(args, reproduce.format_table(checks))
    return EXIT_OK if all(c.ok for c in checks) else EXIT_FAIL


def _setting(text: str) -> InformationSetting:
    try:
        return InformationSetting(text.replace("-", "_"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown setting {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hetfl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats=("text", "json")):
        p.add_argument("--format", choices=formats, default="text")
        p.add_argument("--output", "-o", help="write the report here instead of stdout")

    p = sub.add_parser("eval", help="run a mechanism and print its lottery")
    p.add_argument("--mechanism", required=True)
    p.add_argument("--instance", required=True, help="instance JSON file or corpus name")
    common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("opt", help="optimal outcome and welfare")
    p.add_argument("--instance", required=True)
    common(p)
    p.set_defaults(func=cmd_opt)

    p = sub.add_parser("audit", help="search for profitable misreports")
    p.add_argument("--mechanism", required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--setting", type=_setting, default=InformationSetting.GENERAL)
    p.add_argument("--grid", type=int, default=4, help="misreport positions on multiples of 1/grid")
    p.add_argument("--grid-only", action="store_true", help="do not add the true positions to the grid")
    p.add_argument("--group", action="store_true", help="audit coalitions")
    p.add_argument("--max-coalition", type=int, default=2)
    p.add_argument("--max-deviations", type=int, default=2_000_000)
    p.add_argument("--show", type=int, default=10, help="violations listed in text output")
    common(p, ("text", "json", "csv"))
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("ratio", help="approximation ratio on one instance")
    p.add_argument("--mechanism", required=True)
    p.add_argument("--instance", required=True)
    common(p)
    p.set_defaults(func=cmd_ratio)

    for name, func, helptext in (
        ("search", cmd_search, "hill-climb for high-ratio instances"),
        ("conjecture", cmd_conjecture, "search against proportional tie-breaking RD"),
    ):
        p = sub.add_parser(name, help=helptext)
        if name == "search":
            p.add_argument("--mechanism", required=True)
            p.add_argument("--m", type=int, default=2)
            p.add_argument("--k", type=int, default=1)
            p.add_argument("--utility-class", choices=[u.value for u in UtilityClass], default="sum")
        p.add_argument("--n", type=int, default=4, help="agents per instance")
        p.add_argument("--grid", type=int, default=100)
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--iters", type=int, default=10_000, help="ratio evaluations in total")
        p.add_argument("--restarts", type=int, default=4)
        p.add_argument("--workers", type=int, default=None, help="processes (default: FM_THREADS or 1)")
        common(p)
        p.set_defaults(func=func)

    p = sub.add_parser("reproduce", help="expected-vs-computed table for a corpus instance")
    p.add_argument("name", help=", ".join(corpus.REPRODUCIBLE))
    common(p)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, InvalidInstanceError, ValueError) as exc:
        print(f"hetfl {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
