"""Run every scenario and compare (or refresh) the checked-in expected reports.

    python3 scripts/run_scenarios.py            # compare, exit 1 on mismatch
    python3 scripts/run_scenarios.py --update   # rewrite scenarios/expected/*.txt
"""
import argparse
import sys
from pathlib import Path

from ineqcert.certcore import format_report
from ineqcert.cli import evaluate
from ineqcert.config import load_config
from ineqcert.reports import compare_reports, parse_report

ROOT = Path(__file__).resolve().parents[1]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--scenarios", type=Path, default=ROOT / "scenarios")
    parser.add_argument("--update", action="store_true")
    args = parser.parse_args(argv)
    expected_dir = args.scenarios / "expected"
    expected_dir.mkdir(exist_ok=True)
    failures = 0
    for path in sorted(args.scenarios.glob("*.toml")):
        cfg = load_config(path)
        outcome = evaluate(cfg)
        text = format_report(outcome.report)
        target = expected_dir / f"{cfg.name}.txt"
        if args.update:
            target.write_text(text)
            print(f"{cfg.name}: exit {outcome.code} (written)")
            continue
        problems = compare_reports(parse_report(target.read_text()), parse_report(text))
        if outcome.code != cfg.expect_exit:
            problems.append(f"exit code {outcome.code} != expected {cfg.expect_exit}")
        status = "ok" if not problems else "MISMATCH"
        print(f"{cfg.name}: exit {outcome.code} {status}")
        for p in problems:
            print(f"    {p}")
        failures += bool(problems)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
