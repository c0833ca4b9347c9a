"""Shared small helpers: memory budget, slope fits, deterministic output formatting."""
import json
import os

import numpy as np

DEFAULT_MEM_BUDGET_MB = 2048.0


class MemoryBudgetError(MemoryError):
    """Raised when an allocation would exceed the configured memory budget."""


def mem_budget_mb():
    """Memory budget in MB, from PHOTOION_MEM_BUDGET_MB (default 2048)."""
    raw = os.environ.get("PHOTOION_MEM_BUDGET_MB")
    if raw is None:
        return DEFAULT_MEM_BUDGET_MB
    try:
        val = float(raw)
    except ValueError as exc:
        raise ValueError(f"PHOTOION_MEM_BUDGET_MB is not a number: {raw!r}") from exc
    if val <= 0:
        raise ValueError(f"PHOTOION_MEM_BUDGET_MB must be positive, got {val}")
    return val


def check_memory(nbytes, what):
    """Raise MemoryBudgetError if nbytes exceeds the configured budget."""
    budget = mem_budget_mb() * 1e6
    if nbytes > budget:
        raise MemoryBudgetError(
            f"{what} needs {nbytes / 1e6:.1f} MB, over the "
            f"{budget / 1e6:.1f} MB budget (PHOTOION_MEM_BUDGET_MB)"
        )


def loglog_slope(x, y):
    """Least-squares slope of log(y) against log(x).

    Used for scaling-trend checks; both inputs must be positive.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("loglog_slope needs positive data")
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)


def fmt_float(x):
    """Format a float with 17 significant digits (round-trip safe)."""
    return format(float(x), ".17g")


def json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    raise TypeError(f"not JSON serializable: {type(obj)}")


def dump_json(obj, path):
    """Write JSON with sorted keys; floats keep full precision via repr."""
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=json_default)
        fh.write("\n")
