"""Command-line front end.

    ineqcert certify  --config scenarios/damped_quadratic_certify.toml --out out/ex1
    ineqcert sweep    --config scenarios/design_exponential.toml --param design.epsilon --values 0.1,0.5,0.9
    ineqcert batch    --dir scenarios --out out/batch

Exit codes: 0 certified/verified/pass, 1 not certified/infeasible/violated,
2 usage, configuration or runtime error.
"""
from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import families
from .certcore import GridSpec, check_trajectory_bound, format_report, verify_certificate
from .config import ScenarioConfig, apply_cli_overrides, load_config, with_override
from .discrete import DiscreteCertificate, DiscreteProblem, verify_discrete_certificate
from .errors import IneqCertError
from .functions import fmt
from .odesim import (
    IntegratorOptions,
    Status,
    blowup_oracle_cubic,
    blowup_oracle_quadratic_lower,
    check_comparison,
    cubic_blowup_time,
    integrate,
    integrate_comparison,
    integrate_system,
    quadratic_blowup_time,
)

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2
DISSIPATIVITY_TOL = 1e-9
SUBCOMMANDS = ("certify", "simulate", "design", "discrete", "compare", "blowup")

DESIGNERS = {
    "exponential_decay": families.design_exponential_decay,
    "small_data_rate": families.small_data_decay_rate,
    "power_decay": families.design_power_decay,
    "forced_power_decay": families.design_forced_power_decay,
    "bounded_growth": families.design_bounded_growth,
    "decaying_coefficient": families.check_decaying_coefficient,
}
DESIGN_ARGS = {
    "exponential_decay": ("k", "c0", "p", "epsilon"),
    "small_data_rate": ("c0", "p", "u0_norm", "k"),
    "power_decay": ("c1", "q1", "c0", "p", "epsilon"),
    "forced_power_decay": ("c0", "c2", "p", "q1", "q2", "nu", "c1"),
    "bounded_growth": ("c1", "c2", "m1", "m2", "p", "g0"),
    "decaying_coefficient": ("alpha0", "lam", "k", "kprime", "nu_beta", "gamma"),
}


@dataclass
class Outcome:
    """Result of one scenario: exit code, report fields and CSV files to write."""

    code: int
    report: dict
    files: dict = field(default_factory=dict)
    # one-line summary used by sweeps: feasibility, metric, bound at horizon, radius
    feasible: Optional[bool] = None
    metric: float = math.nan
    bound_at_horizon: float = math.nan
    u0_radius: float = math.nan


def _options(cfg: ScenarioConfig, horizon: float, t0: float = 0.0) -> IntegratorOptions:
    opts = IntegratorOptions(rtol=cfg.numerics.rtol, atol=cfg.numerics.atol)
    return opts.with_samples(np.linspace(t0, t0 + horizon, cfg.numerics.samples))


def _grid(cfg: ScenarioConfig) -> GridSpec:
    return GridSpec(cfg.numerics.grid, cfg.numerics.spacing)


def _slack_csv(report) -> str:
    lines = ["t,mu,inv_mu,slack"]
    lines += [",".join(fmt(x) for x in row) for row in report.slack_rows()]
    return "\n".join(lines) + "\n"


def _csv(lines) -> str:
    return "\n".join(lines) + "\n"


def _bound_fields(prefix: str, check) -> dict:
    return {
        f"{prefix}_max_violation": check.max_violation,
        f"{prefix}_first_violation_time": check.first_violation_time,
        f"{prefix}_passed": check.passed,
        f"{prefix}_tol": check.tol,
    }


# ---------------------------------------------------------------------------
# scenario kinds


def run_certify(cfg: ScenarioConfig) -> Outcome:
    problem, mu = cfg.built["problem"], cfg.built["majorant"]
    rep = verify_certificate(problem, mu, _grid(cfg), cfg.numerics.tolerance)
    fields = {"scenario": cfg.name, "kind": cfg.kind, **rep.summary()}
    traj = integrate_comparison(problem, opts=_options(cfg, problem.horizon))
    check = check_trajectory_bound(traj, mu, cfg.numerics.bound_tol)
    fields["trajectory_status"] = traj.status.value
    fields["trajectory_final_time"] = traj.final_time
    fields.update(_bound_fields("trajectory_bound", check))
    ok = rep.verified and check.passed
    fields["result"] = "pass" if ok else "fail"
    return Outcome(
        EXIT_PASS if ok else EXIT_FAIL, fields,
        {"slack.csv": _slack_csv(rep), "trajectory.csv": traj.to_csv()},
        feasible=rep.verified, metric=rep.min_slack,
        bound_at_horizon=1.0 / float(mu.value(problem.horizon)), u0_radius=1.0 / float(mu.value(0.0)),
    )


def run_simulate(cfg: ScenarioConfig) -> Outcome:
    system = cfg.built["system"]
    horizon = cfg.numerics.horizon
    traj = integrate_system(system, horizon, _options(cfg, horizon))
    fields = {
        "scenario": cfg.name,
        "kind": cfg.kind,
        "dimension": system.dim,
        "status": traj.status.value,
        "final_time": traj.final_time,
        "final_norm": float(traj.norms[-1]),
        "max_norm": float(np.max(traj.norms)),
        "tb_estimate": traj.tb_estimate,
        "steps": traj.n_steps,
        "rejected": traj.n_rejected,
    }
    threshold = cfg.block("system").get("threshold")
    if threshold is not None:
        over = np.nonzero(traj.norms > threshold)[0]
        fields["threshold"] = float(threshold)
        fields["threshold_first_exceeded"] = float(traj.times[over[0]]) if over.size else None
    ok = traj.status is Status.COMPLETED
    if system.gamma is not None:
        excess = system.dissipativity_excess(horizon, seed=cfg.numerics.seed)
        fields["dissipativity_excess"] = excess
        ok = ok and excess <= DISSIPATIVITY_TOL
    mu = cfg.built.get("majorant")
    if mu is not None:
        check = check_trajectory_bound(traj, mu, cfg.numerics.bound_tol)
        fields["bound"] = mu.bound_formula()
        fields.update(_bound_fields("bound", check))
        ok = ok and check.passed
    fields["result"] = "pass" if ok else "fail"
    return Outcome(EXIT_PASS if ok else EXIT_FAIL, fields, {"trajectory.csv": traj.to_csv()},
                   feasible=ok, metric=fields["max_norm"], bound_at_horizon=fields["final_norm"])


def run_design(cfg: ScenarioConfig) -> Outcome:
    spec = cfg.block("design")
    family = spec["family"]
    args = [float(spec[k]) for k in DESIGN_ARGS[family]]
    design = DESIGNERS[family](*args)
    fields = {"scenario": cfg.name, "kind": cfg.kind, "family": family}
    fields.update({k: float(spec[k]) for k in DESIGN_ARGS[family]})
    fields["feasible"] = design.feasible
    if not design.feasible:
        fields["failed_condition"] = design.condition
        fields["detail"] = design.detail
        fields["residual"] = design.residual
        fields["result"] = "fail"
        return Outcome(EXIT_FAIL, fields, feasible=False, metric=design.residual)
    for name, value in vars(design).items():
        if name not in fields:
            fields[name] = value
    horizon = cfg.numerics.horizon
    radius = getattr(design, "u0_radius", math.nan)
    if not math.isnan(radius):
        fields["u0_radius"] = radius
    problem, mu = design.to_certificate(horizon)
    rep = verify_certificate(problem, mu, _grid(cfg), cfg.numerics.tolerance)
    fields["bound"] = mu.bound_formula()
    fields["bound_at_horizon"] = 1.0 / float(mu.value(horizon))
    fields["certificate_verified"] = rep.verified
    fields["min_slack"] = rep.min_slack
    fields["argmin_time"] = rep.argmin_time
    fields["verdict"] = rep.verdict.value
    fields["result"] = "pass" if rep.verified else "fail"
    return Outcome(EXIT_PASS if rep.verified else EXIT_FAIL, fields, {"slack.csv": _slack_csv(rep)},
                   feasible=rep.verified, metric=rep.min_slack,
                   bound_at_horizon=fields["bound_at_horizon"], u0_radius=radius)


def run_discrete(cfg: ScenarioConfig) -> Outcome:
    spec = cfg.block("discrete")
    N = int(spec["N"])
    if "mu" in spec:
        mu = np.asarray(spec["mu"], dtype=float)
    else:
        mu = float(spec["mu0"]) * float(spec["mu_ratio"]) ** np.arange(N + 1)
    problem = DiscreteProblem(N, spec["h"], spec["gamma"], spec.get("beta", 0.0),
                              cfg.built["alpha"], float(spec["g0"]))
    rep = verify_discrete_certificate(problem, DiscreteCertificate(mu), cfg.numerics.tolerance)
    ok = rep.verified and bool(rep.bound_holds)
    fields = {
        "scenario": cfg.name,
        "kind": cfg.kind,
        "N": N,
        "verified": rep.verified,
        "initial_ok": rep.initial_ok,
        "min_slack": rep.min_slack,
        "bound_holds": rep.bound_holds,
        "max_excess": rep.max_excess,
        "g_N": float(rep.g[-1]),
        "inv_mu_N": float(1.0 / mu[-1]),
        "result": "pass" if ok else "fail",
    }
    return Outcome(EXIT_PASS if ok else EXIT_FAIL, fields, {"trajectory.csv": _csv(rep.csv_lines())},
                   feasible=rep.verified, metric=rep.min_slack, bound_at_horizon=float(1.0 / mu[-1]),
                   u0_radius=float(1.0 / mu[0]))


def run_compare(cfg: ScenarioConfig) -> Outcome:
    spec = cfg.block("compare")
    f, g = cfg.built["f"], cfg.built["g"]
    horizon = cfg.numerics.horizon
    opts = _options(cfg, horizon)
    verdict = check_comparison(f.rhs, g.rhs, float(spec["phi0"]), float(spec["psi0"]), horizon, opts=opts)
    fields = {
        "scenario": cfg.name,
        "kind": cfg.kind,
        "holds": verdict.holds,
        "max_gap_violation": verdict.max_gap_violation,
        "tol": verdict.tol,
        "hypothesis_excess": verdict.hypothesis_excess,
        "status": verdict.trajectory.status.value,
        "final_time": verdict.trajectory.final_time,
        "result": "pass" if verdict.holds else "fail",
    }
    return Outcome(EXIT_PASS if verdict.holds else EXIT_FAIL, fields,
                   {"trajectory.csv": verdict.trajectory.to_csv()},
                   feasible=verdict.holds, metric=verdict.max_gap_violation)


def run_blowup(cfg: ScenarioConfig) -> Outcome:
    spec = cfg.block("blowup")
    model = spec.get("model", "cubic")
    c, u0 = float(spec["c"]), float(spec["u0"])
    tb_tol = float(spec.get("tb_tol", 1e-3))
    if model == "cubic":
        tb_oracle = cubic_blowup_time(c, u0)
        rhs = lambda t, x: c * x ** 3  # noqa: E731
        oracle = lambda t: blowup_oracle_cubic(c, u0, t)  # noqa: E731
    else:
        tb_oracle = quadratic_blowup_time(u0, c)
        rhs = lambda t, x: c * x ** 2  # noqa: E731
        oracle = lambda t: blowup_oracle_quadratic_lower(u0, c, t)  # noqa: E731
    horizon = cfg.numerics.horizon
    probe = 0.75 * tb_oracle
    samples = [s for s in np.linspace(0.0, horizon, cfg.numerics.samples) if s < probe] + [probe]
    opts = IntegratorOptions(rtol=cfg.numerics.rtol, atol=cfg.numerics.atol).with_samples(samples)
    traj = integrate(rhs, [u0], 0.0, horizon, opts)
    fields = {
        "scenario": cfg.name,
        "kind": cfg.kind,
        "model": model,
        "c": c,
        "u0": u0,
        "status": traj.status.value,
        "tb_estimate": traj.tb_estimate,
        "tb_oracle": tb_oracle,
    }
    ok = traj.status is Status.BLOWUP and abs(traj.tb_estimate - tb_oracle) <= tb_tol
    fields["tb_abs_error"] = abs(traj.tb_estimate - tb_oracle) if traj.tb_estimate is not None else None
    fields["tb_tol"] = tb_tol
    hit = np.nonzero(traj.times == probe)[0]
    if hit.size:
        value = float(traj.states[hit[0], 0])
        fields["probe_time"] = probe
        fields["probe_value"] = value
        fields["probe_oracle"] = oracle(probe)
        fields["probe_rel_error"] = abs(value - oracle(probe)) / abs(oracle(probe))
    fields["result"] = "pass" if ok else "fail"
    return Outcome(EXIT_PASS if ok else EXIT_FAIL, fields, {"trajectory.csv": traj.to_csv()},
                   feasible=ok, metric=fields["tb_abs_error"] if fields["tb_abs_error"] is not None else math.nan)


RUNNERS = {
    "certify": run_certify,
    "simulate": run_simulate,
    "design": run_design,
    "discrete": run_discrete,
    "compare": run_compare,
    "blowup": run_blowup,
}


def evaluate(cfg: ScenarioConfig) -> Outcome:
    """Run a scenario in memory; module errors become an exit-2 outcome."""
    try:
        return RUNNERS[cfg.kind](cfg)
    except IneqCertError as exc:
        return Outcome(EXIT_ERROR, {"scenario": cfg.name, "kind": cfg.kind,
                                    "error": f"{type(exc).__name__}: {exc}", "result": "error"})


def write_outputs(outcome: Outcome, out_dir: Path):
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.txt").write_text(format_report(outcome.report))
    for name, text in outcome.files.items():
        (out_dir / name).write_text(text)


def run_scenario(cfg: ScenarioConfig, out_dir=None) -> Outcome:
    """Run and write report.txt plus the kind's CSV files into ``out_dir``."""
    outcome = evaluate(cfg)
    target = Path(out_dir or cfg.out_dir or Path("out") / cfg.name)
    write_outputs(outcome, target)
    return outcome


# ---------------------------------------------------------------------------
# sweep and batch

SWEEP_HEADER = "parameter,value,feasible,metric,bound_at_horizon,u0_radius,exit_code"


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    return fmt(x) if not (isinstance(x, float) and math.isnan(x)) else ""


def sweep(cfg: ScenarioConfig, parameter: str, values) -> list[str]:
    """One summary row per value of the dotted ``parameter``."""
    rows = [SWEEP_HEADER]
    for value in values:
        try:
            outcome = evaluate(with_override(cfg, parameter, value))
        except IneqCertError as exc:
            if type(exc).__name__ == "UnknownParameter":
                raise
            outcome = Outcome(EXIT_ERROR, {"error": str(exc)})
        rows.append(",".join([
            parameter, fmt(value), _cell(outcome.feasible), _cell(outcome.metric),
            _cell(outcome.bound_at_horizon), _cell(outcome.u0_radius), str(outcome.code),
        ]))
    return rows


def _batch_worker(args):
    path, out_root = args
    try:
        cfg = load_config(path)
    except IneqCertError as exc:
        return Path(path).stem, "", EXIT_ERROR, 0, str(exc)
    outcome = run_scenario(cfg, Path(out_root) / cfg.name)
    return cfg.name, cfg.kind, outcome.code, cfg.expect_exit, outcome.report.get("error", "")


def batch(directory, out_root, workers: Optional[int] = None) -> list[tuple]:
    """Run every *.toml in ``directory``, one worker process per scenario."""
    paths = sorted(str(p) for p in Path(directory).glob("*.toml"))
    jobs = [(p, str(out_root)) for p in paths]
    if workers == 1 or len(jobs) <= 1:
        return [_batch_worker(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_batch_worker, jobs))


# ---------------------------------------------------------------------------
# argument parsing


def _parse_values(text: str) -> list[float]:
    text = text.strip()
    if not text:
        return []
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--values expects comma-separated numbers, got {text!r}")


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("--seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ineqcert", description="Certify bounds for nonlinear evolution problems.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="scenario TOML file")
        p.add_argument("--out", help="output directory (default: output.directory or out/<name>)")
        p.add_argument("--seed", type=_seed)
        p.add_argument("--grid", type=int, help="number of certificate grid points")
        p.add_argument("--horizon", type=float)
        p.add_argument("--quiet", action="store_true", help="do not print the report")

    for name in SUBCOMMANDS:
        common(sub.add_parser(name, help=f"run a {name} scenario"))
    sw = sub.add_parser("sweep", help="vary one scalar config field and summarize")
    common(sw)
    sw.add_argument("--param", required=True, help="dotted field path, e.g. design.epsilon")
    sw.add_argument("--values", required=True, type=_parse_values, help="comma-separated numbers")
    bt = sub.add_parser("batch", help="run every scenario in a directory")
    common(bt, config_required=False)
    bt.add_argument("--dir", required=True, help="directory of scenario TOML files")
    bt.add_argument("--workers", type=int, default=None)
    return parser


def _load(args) -> ScenarioConfig:
    cfg = load_config(args.config)
    if any(v is not None for v in (args.seed, args.grid, args.horizon)):
        cfg = apply_cli_overrides(cfg, seed=args.seed, grid=args.grid, horizon=args.horizon)
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_PASS
    try:
        if args.command == "batch":
            out_root = Path(args.out or "out/batch")
            results = batch(args.dir, out_root, args.workers)
            lines = ["scenario,kind,exit_code,expect_exit,match,error"]
            all_match = True
            for name, kind, code, expect, err in results:
                match = code == expect
                all_match &= match
                lines.append(f"{name},{kind},{code},{expect},{'true' if match else 'false'},{err.replace(',', ';')}")
            out_root.mkdir(parents=True, exist_ok=True)
            (out_root / "summary.csv").write_text(_csv(lines))
            if not args.quiet:
                print(_csv(lines), end="")
            return EXIT_PASS if all_match else EXIT_FAIL
        cfg = _load(args)
        if args.command == "sweep":
            rows = sweep(cfg, args.param, args.values)
            out = Path(args.out or cfg.out_dir or Path("out") / cfg.name)
            out.mkdir(parents=True, exist_ok=True)
            (out / "summary.csv").write_text(_csv(rows))
            if not args.quiet:
                print(_csv(rows), end="")
            return EXIT_PASS
        if cfg.kind != args.command:
            print(f"error: scenario {cfg.name!r} has kind {cfg.kind!r}, not {args.command!r}", file=sys.stderr)
            return EXIT_ERROR
        outcome = run_scenario(cfg, args.out)
        if not args.quiet:
            print(format_report(outcome.report), end="")
        if outcome.code == EXIT_ERROR:
            print(f"error: {outcome.report.get('error')}", file=sys.stderr)
        return outcome.code
    except IneqCertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
