"""JSON report documents.

Exact values never pass through floats: rationals become ``"p/q"`` strings
(``"p"`` when integral) and polynomials become coefficient arrays, lowest
power first.  Documents are dumped with sorted keys so that loading and
re-dumping a document reproduces it byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone

from . import __version__
from .exact import Fraction, Poly
from .identities import IdentityReport
from .montecarlo import McResult

TOOL = "mfcheck"


def exact_value(value):
    if isinstance(value, Poly):
        return [str(c) for c in value.coeffs]
    if isinstance(value, bool):
        raise TypeError("booleans are not exact values")
    if isinstance(value, (int, Fraction)):
        return str(Fraction(value))
    raise TypeError(f"not an exact value: {value!r}")


def _param_value(value):
    if isinstance(value, Fraction):
        return str(value)
    return value


def identity_report_dict(report: IdentityReport) -> dict:
    out = {
        "identity": report.identity_id,
        "params": {k: _param_value(v) for k, v in report.params.items()},
        "lhs": exact_value(report.lhs),
        "rhs": exact_value(report.rhs),
        "verdict": report.verdict,
        "elapsed": round(report.elapsed, 6),
    }
    if report.note:
        out["note"] = report.note
    return out


def _finite_or_none(x: float):
    return x if math.isfinite(x) else None


def mc_result_dict(result: McResult) -> dict:
    return {
        "expr": result.expr,
        "n": result.n,
        "estimate": result.estimate,
        "std_error": result.std_error,
        "samples": result.samples,
        "seed": result.seed,
        "exact": exact_value(result.exact),
        "z_score": _finite_or_none(result.z_score),
        "prng": result.prng,
        "within_tolerance": result.within_tolerance,
    }


@dataclass
class ReportDocument:
    command: list
    results: list
    overall: str = "N/A"
    version: str = __version__
    tool: str = TOOL
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))

    def to_dict(self) -> dict:
        return {
            "tool": self.tool,
            "version": self.version,
            "command": list(self.command),
            "timestamp": self.timestamp,
            "results": self.results,
            "overall": self.overall,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "ReportDocument":
        data = json.loads(text)
        return cls(
            command=data["command"],
            results=data["results"],
            overall=data["overall"],
            version=data["version"],
            tool=data["tool"],
            timestamp=data["timestamp"],
        )


def dumps(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"
