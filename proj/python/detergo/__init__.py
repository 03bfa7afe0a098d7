"""Weighted exponential sums, q-multiplicative sequences and rotation averages."""

import json as _json

from ._detergo import (
    ComputationError,
    InequalityViolation,
    SpecError,
    __version__,
    birkhoff,
    block_sum,
    delta_fit,
    diophantine_type,
    resonance,
    squares_average,
    sup_norm,
    values,
    weighted_sum,
)
from ._detergo import run as _run


def spec(doc):
    """Inline spec text for a dict, passed through unchanged for a string."""
    return doc if isinstance(doc, str) else _json.dumps(doc)


def run(*args):
    """Run a CLI command in-process. JSON reports are decoded."""
    code, out, err = _run([str(a) for a in args])
    if code != 0:
        raise RuntimeError(f"exit {code}: {err.strip()}")
    return _json.loads(out) if out.startswith("{") else out


__all__ = [
    "ComputationError",
    "InequalityViolation",
    "SpecError",
    "__version__",
    "birkhoff",
    "block_sum",
    "delta_fit",
    "diophantine_type",
    "resonance",
    "run",
    "spec",
    "squares_average",
    "sup_norm",
    "values",
    "weighted_sum",
]
