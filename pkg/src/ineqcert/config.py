"""Scenario configuration: TOML files parsed into validated objects.

Grammar (see README for worked examples)::

    name = "example"              # required string
    kind = "certify"              # certify | simulate | design | discrete | compare | blowup
    expect_exit = 0               # optional, used by batch runs

    [problem]   gamma, alpha, beta, g0           (certify)
    [system]    A, u0, F, b, gamma               (simulate)
    [majorant]  family + parameters              (certify, optional for simulate)
    [design]    family + parameters              (design)
    [discrete]  N, h, gamma, beta, alpha, g0, mu (discrete)
    [compare]   f, g, phi0, psi0                 (compare)
    [blowup]    model, c, u0                     (blowup)
    [numerics]  horizon, grid, spacing, seed, rtol, atol, tolerance, bound_tol, samples
    [output]    directory

Time functions are inline tables ``{ kind = "...", ... }`` or bare numbers
(constants). There is no expression language.
"""
from __future__ import annotations

import copy
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError, IneqCertError, UnknownParameter
from .functions import (
    ZERO,
    ZERO_ALPHA,
    Constant,
    CustomMajorant,
    Exponential,
    ExponentialMajorant,
    Polynomial,
    PowerDecay,
    PowerLaw,
    PowerMajorant,
    Product,
    ScaledPower,
    ShiftedInversePowerMajorant,
    Sinusoid,
    Sum,
    Tabulated,
    TimeScaledPower,
)

KINDS = ("certify", "simulate", "design", "discrete", "compare", "blowup")
REQUIRED_BLOCKS = {
    "certify": ("problem", "majorant"),
    "simulate": ("system",),
    "design": ("design",),
    "discrete": ("discrete",),
    "compare": ("compare",),
    "blowup": ("blowup",),
}
DESIGN_FAMILIES = (
    "exponential_decay",
    "small_data_rate",
    "power_decay",
    "forced_power_decay",
    "bounded_growth",
    "decaying_coefficient",
)


@dataclass(frozen=True)
class Numerics:
    horizon: float = 100.0
    grid: int = 2001
    spacing: str = "uniform"
    seed: int = 0
    rtol: float = 1e-10
    atol: float = 1e-12
    tolerance: float = 0.0
    bound_tol: float = 1e-9
    samples: int = 501


@dataclass
class ScenarioConfig:
    """A parsed scenario. ``raw`` keeps the TOML tree for sweeps and overrides."""

    name: str
    kind: str
    raw: dict
    numerics: Numerics
    out_dir: Optional[str] = None
    expect_exit: int = 0
    source: Optional[Path] = None
    built: dict = field(default_factory=dict)

    def block(self, name: str) -> dict:
        return self.raw.get(name, {})


# ---------------------------------------------------------------------------
# field helpers


def _fail(path: str, message: str):
    raise ConfigError(f"{path}: {message}")


def _number(table: dict, key: str, path: str, default: Any = None, required: bool = True) -> float:
    if key not in table:
        if required and default is None:
            _fail(f"{path}.{key}", "missing required number")
        return default
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(f"{path}.{key}", f"expected a number, got {value!r}")
    return float(value)


def _int(table: dict, key: str, path: str, default: Optional[int] = None) -> int:
    if key not in table:
        if default is None:
            _fail(f"{path}.{key}", "missing required integer")
        return default
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(f"{path}.{key}", f"expected an integer, got {value!r}")
    return value


def _table(table: dict, key: str, path: str) -> dict:
    value = table.get(key)
    if not isinstance(value, dict):
        _fail(f"{path}.{key}", "missing or not a table")
    return value


# ---------------------------------------------------------------------------
# builders


def build_time_function(spec, path: str):
    """Number -> Constant; table with ``kind`` -> the named TimeFunction."""
    if spec is None:
        return ZERO
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return Constant(float(spec))
    if not isinstance(spec, dict) or "kind" not in spec:
        _fail(path, f"expected a number or a table with 'kind', got {spec!r}")
    kind = spec["kind"]
    try:
        if kind == "constant":
            return Constant(_number(spec, "c", path))
        if kind == "power_decay":
            return PowerDecay(_number(spec, "c", path), _number(spec, "q", path))
        if kind == "exponential":
            return Exponential(_number(spec, "c", path), _number(spec, "k", path))
        if kind == "polynomial":
            return Polynomial(tuple(float(c) for c in spec.get("coeffs", [])))
        if kind == "sinusoid":
            return Sinusoid(_number(spec, "a", path), _number(spec, "omega", path, 1.0),
                            _number(spec, "phase", path, 0.0))
        if kind == "tabulated":
            return Tabulated(tuple(spec.get("knots", [])), tuple(spec.get("values", [])))
        if kind in ("sum", "product"):
            terms = spec.get("terms")
            if not isinstance(terms, list) or not terms:
                _fail(f"{path}.terms", "expected a non-empty array of time functions")
            parts = tuple(build_time_function(t, f"{path}.terms[{i}]") for i, t in enumerate(terms))
            return Sum(parts) if kind == "sum" else Product(parts)
    except ConfigError:
        raise
    except IneqCertError as exc:
        _fail(path, str(exc))
    _fail(f"{path}.kind", f"unknown time function kind {kind!r}")


def build_nonlinearity(spec, path: str):
    if spec is None or spec == 0:
        return ZERO_ALPHA
    if not isinstance(spec, dict) or "kind" not in spec:
        _fail(path, f"expected a table with 'kind', got {spec!r}")
    kind = spec["kind"]
    try:
        if kind == "zero":
            return ZERO_ALPHA
        if kind == "power_law":
            return PowerLaw(_number(spec, "c0", path), _number(spec, "p", path))
        if kind == "time_scaled_power":
            return TimeScaledPower(_number(spec, "c2", path), _number(spec, "m2", path), _number(spec, "p", path))
        if kind == "scaled_power":
            coef = build_time_function(spec.get("coefficient"), f"{path}.coefficient")
            return ScaledPower(coef, _number(spec, "p", path), bool(spec.get("monotone", False)))
    except ConfigError:
        raise
    except IneqCertError as exc:
        _fail(path, str(exc))
    _fail(f"{path}.kind", f"unknown nonlinearity kind {kind!r}")


def build_majorant(spec: dict, path: str = "majorant"):
    family = spec.get("family")
    try:
        if family == "exponential":
            return ExponentialMajorant(_number(spec, "lam", path), _number(spec, "b", path))
        if family == "power":
            return PowerMajorant(_number(spec, "lam", path), _number(spec, "nu", path))
        if family == "shifted_inverse_power":
            return ShiftedInversePowerMajorant(_number(spec, "d", path), _number(spec, "lam", path),
                                               _number(spec, "n", path))
        if family == "custom":
            core = build_time_function(spec.get("core"), f"{path}.core")
            if "derivative" in spec:
                return CustomMajorant(core, build_time_function(spec["derivative"], f"{path}.derivative"))
            return CustomMajorant.from_function(core)
    except ConfigError:
        raise
    except IneqCertError as exc:
        _fail(path, str(exc))
    _fail(f"{path}.family", f"unknown majorant family {family!r}")


def build_problem(spec: dict, horizon: float, path: str = "problem"):
    from .certcore import InequalityProblem

    gamma = build_time_function(spec.get("gamma", 0.0), f"{path}.gamma")
    alpha = build_nonlinearity(spec.get("alpha"), f"{path}.alpha")
    beta = build_time_function(spec.get("beta", 0.0), f"{path}.beta")
    g0 = _number(spec, "g0", path)
    if not g0 >= 0:
        _fail(f"{path}.g0", f"must be >= 0 (g(0) is a norm), got {g0}")
    return InequalityProblem(gamma, alpha, beta, g0, horizon)


def _matrix_entries(spec, path: str):
    if not isinstance(spec, list) or not spec or not all(isinstance(r, list) for r in spec):
        _fail(path, "expected a non-empty array of rows")
    width = len(spec[0])
    rows = []
    for i, row in enumerate(spec):
        if len(row) != width:
            _fail(f"{path}[{i}]", f"row has {len(row)} entries, expected {width}")
        rows.append([build_time_function(x, f"{path}[{i}][{j}]") for j, x in enumerate(row)])
    return rows


def _field_fn(entries):
    """Constant array when every entry is a Constant, else a callable t -> array."""
    nested = isinstance(entries[0], list)
    flat = [x for row in entries for x in row] if nested else list(entries)
    if all(isinstance(x, Constant) for x in flat):
        if nested:
            return np.array([[x.c for x in row] for row in entries])
        return np.array([x.c for x in entries])
    if nested:
        return lambda t: np.array([[float(x(t)) for x in row] for row in entries])
    return lambda t: np.array([float(x(t)) for x in entries])


def build_forcing(spec, path: str):
    """F(t, u) from a table: norm_power c*|u|^(p-1)*u, cubic c*u^3, or none."""
    if spec is None:
        return None
    if not isinstance(spec, dict) or "kind" not in spec:
        _fail(path, "expected a table with 'kind'")
    kind = spec["kind"]
    if kind == "none":
        return None
    c = _number(spec, "c", path)
    if kind == "norm_power":
        p = _number(spec, "p", path)
        if not p >= 1:
            _fail(f"{path}.p", f"must be >= 1, got {p}")
        return lambda t, u: c * np.linalg.norm(u) ** (p - 1.0) * u
    if kind == "cubic":
        return lambda t, u: c * u ** 3
    _fail(f"{path}.kind", f"unknown forcing kind {kind!r}")


def build_system(spec: dict, path: str = "system"):
    from .odesim import EvolutionSystem

    u0 = spec.get("u0")
    if not isinstance(u0, list) or not u0:
        _fail(f"{path}.u0", "expected a non-empty array of numbers")
    A = _field_fn(_matrix_entries(spec.get("A"), f"{path}.A"))
    b = None
    if "b" in spec:
        if not isinstance(spec["b"], list):
            _fail(f"{path}.b", "expected an array")
        b = _field_fn([build_time_function(x, f"{path}.b[{i}]") for i, x in enumerate(spec["b"])])
    gamma = build_time_function(spec["gamma"], f"{path}.gamma") if "gamma" in spec else None
    try:
        return EvolutionSystem(A, u0, build_forcing(spec.get("F"), f"{path}.F"), b, gamma)
    except IneqCertError as exc:
        _fail(path, str(exc))


# ---------------------------------------------------------------------------
# validation per kind


def _validate_design(spec: dict):
    family = spec.get("family")
    if family not in DESIGN_FAMILIES:
        _fail("design.family", f"expected one of {', '.join(DESIGN_FAMILIES)}, got {family!r}")
    need = {
        "exponential_decay": ("k", "c0", "p", "epsilon"),
        "small_data_rate": ("c0", "p", "u0_norm", "k"),
        "power_decay": ("c1", "q1", "c0", "p", "epsilon"),
        "forced_power_decay": ("c0", "c2", "p", "q1", "q2", "nu", "c1"),
        "bounded_growth": ("c1", "c2", "m1", "m2", "p", "g0"),
        "decaying_coefficient": ("alpha0", "lam", "k", "kprime", "nu_beta", "gamma"),
    }[family]
    for key in need:
        _number(spec, key, "design")
    if "p" in need and not spec["p"] > 1:
        _fail("design.p", f"condition p > 1 violated, got {spec['p']}")
    if family == "exponential_decay" and not 0 < spec["epsilon"] < spec["k"]:
        _fail("design.epsilon", f"condition 0 < epsilon < k violated, got epsilon={spec['epsilon']}, k={spec['k']}")
    if family == "power_decay" and not 0 < spec["epsilon"] < spec["c1"]:
        _fail("design.epsilon", f"condition 0 < epsilon < c1 violated, got epsilon={spec['epsilon']}, c1={spec['c1']}")
    if family == "decaying_coefficient":
        if not 0 < spec["k"] < spec["gamma"]:
            _fail("design.k", f"condition 0 < k < gamma violated, got k={spec['k']}, gamma={spec['gamma']}")
        if not spec["kprime"] > spec["k"]:
            _fail("design.kprime", f"condition kprime > k violated, got kprime={spec['kprime']}, k={spec['k']}")


def _validate_discrete(spec: dict):
    N = _int(spec, "N", "discrete")
    if N < 0:
        _fail("discrete.N", "must be >= 0")
    for key in ("h", "gamma"):
        if key not in spec:
            _fail(f"discrete.{key}", "missing (number or array)")
    try:
        h = np.broadcast_to(np.asarray(spec["h"], dtype=float), (N,))
        gamma = np.broadcast_to(np.asarray(spec["gamma"], dtype=float), (N,))
        np.broadcast_to(np.asarray(spec.get("beta", 0.0), dtype=float), (N,))
    except (ValueError, TypeError):
        _fail("discrete", f"h, gamma and beta must be numbers or arrays of length N = {N}")
    hg = h * gamma
    bad = np.nonzero(~((h > 0) & (hg > 0) & (hg < 1)))[0]
    if bad.size:
        _fail("discrete.h", f"condition 0 < h_n*gamma_n < 1 violated at n={int(bad[0])} (h*gamma={hg[bad[0]]:g})")
    _number(spec, "g0", "discrete")
    if "mu" in spec:
        mu = spec["mu"]
        if not isinstance(mu, list) or len(mu) != N + 1:
            _fail("discrete.mu", f"expected an array of N+1 = {N + 1} numbers")
        if not all(isinstance(x, (int, float)) and x > 0 for x in mu):
            _fail("discrete.mu", "condition mu_n > 0 violated")
    else:
        if not (_number(spec, "mu0", "discrete") > 0 and _number(spec, "mu_ratio", "discrete") > 0):
            _fail("discrete.mu0", "condition mu0 > 0 and mu_ratio > 0 violated")


def parse_config(data: dict, source: Optional[Path] = None) -> ScenarioConfig:
    """Validate a TOML tree and return a ScenarioConfig. Raises ConfigError."""
    if not isinstance(data.get("name"), str) or not data["name"]:
        _fail("name", "missing or not a string")
    kind = data.get("kind")
    if kind not in KINDS:
        _fail("kind", f"expected one of {', '.join(KINDS)}, got {kind!r}")
    for block in REQUIRED_BLOCKS[kind]:
        if not isinstance(data.get(block), dict):
            _fail(block, f"block required for kind {kind!r} is missing")
    num = data.get("numerics", {})
    numerics = Numerics(
        horizon=_number(num, "horizon", "numerics", Numerics.horizon),
        grid=_int(num, "grid", "numerics", Numerics.grid),
        spacing=str(num.get("spacing", Numerics.spacing)),
        seed=_int(num, "seed", "numerics", Numerics.seed),
        rtol=_number(num, "rtol", "numerics", Numerics.rtol),
        atol=_number(num, "atol", "numerics", Numerics.atol),
        tolerance=_number(num, "tolerance", "numerics", Numerics.tolerance),
        bound_tol=_number(num, "bound_tol", "numerics", Numerics.bound_tol),
        samples=_int(num, "samples", "numerics", Numerics.samples),
    )
    if not numerics.horizon > 0:
        _fail("numerics.horizon", "must be > 0")
    if numerics.grid < 2:
        _fail("numerics.grid", "must be >= 2")
    if numerics.spacing not in ("uniform", "log"):
        _fail("numerics.spacing", "expected 'uniform' or 'log'")
    if numerics.seed < 0:
        _fail("numerics.seed", "must be a nonnegative integer")
    if numerics.samples < 2:
        _fail("numerics.samples", "must be >= 2")
    out_dir = data.get("output", {}).get("directory")
    cfg = ScenarioConfig(data["name"], kind, data, numerics, out_dir,
                         _int(data, "expect_exit", "scenario", 0), source)
    _build(cfg)
    return cfg


def _build(cfg: ScenarioConfig):
    """Construct module objects now so every precondition is checked before dispatch."""
    raw, horizon = cfg.raw, cfg.numerics.horizon
    if cfg.kind == "certify":
        cfg.built["problem"] = build_problem(raw["problem"], horizon)
        cfg.built["majorant"] = build_majorant(raw["majorant"])
    elif cfg.kind == "simulate":
        cfg.built["system"] = build_system(raw["system"])
        if "majorant" in raw:
            cfg.built["majorant"] = build_majorant(raw["majorant"])
    elif cfg.kind == "design":
        _validate_design(raw["design"])
    elif cfg.kind == "discrete":
        _validate_discrete(raw["discrete"])
        cfg.built["alpha"] = build_nonlinearity(raw["discrete"].get("alpha"), "discrete.alpha")
        if not cfg.built["alpha"].monotone_in_g:
            _fail("discrete.alpha", "condition alpha nondecreasing in g violated (declare monotone = true)")
    elif cfg.kind == "compare":
        spec = raw["compare"]
        for side in ("f", "g"):
            table = _table(spec, side, "compare")
            cfg.built[side] = build_problem({**table, "g0": 0.0}, horizon, f"compare.{side}")
        phi0 = _number(spec, "phi0", "compare")
        psi0 = _number(spec, "psi0", "compare")
        if not phi0 <= psi0:
            _fail("compare.psi0", f"condition phi0 <= psi0 violated ({phi0} > {psi0})")
    elif cfg.kind == "blowup":
        spec = raw["blowup"]
        model = spec.get("model", "cubic")
        if model not in ("cubic", "quadratic"):
            _fail("blowup.model", "expected 'cubic' or 'quadratic'")
        c = _number(spec, "c", "blowup")
        u0 = _number(spec, "u0", "blowup")
        if not c > 0:
            _fail("blowup.c", f"must be > 0 for finite-time blow-up, got {c}")
        if not u0 > 0:
            _fail("blowup.u0", f"must be > 0, got {u0}")


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"{path}: file not found")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}")
    return parse_config(data, path)


def with_override(cfg: ScenarioConfig, dotted: str, value) -> ScenarioConfig:
    """Copy of ``cfg`` with the scalar at ``dotted`` (e.g. 'design.epsilon') replaced."""
    data = copy.deepcopy(cfg.raw)
    keys = dotted.split(".")
    node = data
    for key in keys[:-1]:
        if not isinstance(node, dict) or not isinstance(node.get(key), dict):
            raise UnknownParameter(f"{dotted}: no table {key!r} in the config")
        node = node[key]
    leaf = keys[-1]
    current = node.get(leaf) if isinstance(node, dict) else None
    if isinstance(current, bool) or not isinstance(current, (int, float)):
        raise UnknownParameter(f"{dotted}: not a scalar numeric field of the config")
    node[leaf] = int(value) if isinstance(current, int) and float(value).is_integer() else float(value)
    return parse_config(data, cfg.source)


def apply_cli_overrides(cfg: ScenarioConfig, *, seed=None, grid=None, horizon=None) -> ScenarioConfig:
    data = copy.deepcopy(cfg.raw)
    num = data.setdefault("numerics", {})
    if seed is not None:
        num["seed"] = seed
    if grid is not None:
        num["grid"] = grid
    if horizon is not None:
        num["horizon"] = horizon
    out = parse_config(data, cfg.source)
    out.out_dir = cfg.out_dir
    return out
