"""Reading back ``key: value`` reports and comparing them within tolerances."""
from __future__ import annotations

import math

REPORT_RTOL = 1e-6
REPORT_ATOL = 1e-9


def parse_report(text: str) -> dict:
    out = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition(": ")
        out[key] = value
    return out


def _as_number(text: str):
    try:
        return float(text)
    except ValueError:
        return None


def compare_reports(expected: dict, actual: dict, rtol: float = REPORT_RTOL, atol: float = REPORT_ATOL) -> list:
    """Differences between two parsed reports; numbers compare within rtol/atol, text exactly."""
    problems = []
    for key in expected.keys() | actual.keys():
        if key not in actual:
            problems.append(f"missing key {key!r}")
            continue
        if key not in expected:
            problems.append(f"unexpected key {key!r}")
            continue
        a, b = expected[key], actual[key]
        x, y = _as_number(a), _as_number(b)
        if x is not None and y is not None:
            if math.isnan(x) and math.isnan(y):
                continue
            if not math.isclose(x, y, rel_tol=rtol, abs_tol=atol):
                problems.append(f"{key}: expected {a}, got {b}")
        elif a != b:
            problems.append(f"{key}: expected {a!r}, got {b!r}")
    return sorted(problems)
