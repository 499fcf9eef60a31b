"""Canonical report serialization.

JSON output has sorted keys and Python's shortest round-trip float repr;
non-finite floats and errored residuals serialize as null. Nothing
time-dependent is written, so identical runs give identical bytes.
"""
import json
import math
from importlib import resources

SCHEMA_FILE = "report_schema.json"


def _clean(x):
    if isinstance(x, float):
        return x if math.isfinite(x) else None
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def report_dict(report):
    return _clean(report.to_dict())


def to_json(report):
    return json.dumps(report_dict(report), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _fmt(v):
    return "error" if v is None else f"{v:.3e}"


def to_text(report):
    d = report_dict(report)
    lines = [
        f"model {d['model']}  seed {d['seed']}  points {d['points']}  modes {d['modes']}  "
        f"amplitude {d['amplitude']}  engine {d['engine_version']}",
        "",
        f"{'check':<34} {'max':>10} {'mean':>10} {'tol':>9}  result",
    ]
    for c in d["checks"]:
        verdict = "PASS" if c["pass"] else "FAIL"
        lines.append(f"{c['name']:<34} {_fmt(c['residual_max']):>10} {_fmt(c['residual_mean']):>10} "
                     f"{c['tolerance']:>9.1e}  {verdict}")
        if c["notes"]:
            lines.append(f"{'':<4}{c['notes']}")
    lines += ["", "sign ledger:"]
    lines += [f"  {k}: {v}" for k, v in sorted(d["sign_ledger"].items())]
    ok = all(c["pass"] for c in d["checks"])
    lines += ["", "ALL CHECKS PASSED" if ok else "SOME CHECKS FAILED"]
    return "\n".join(lines) + "\n"


def emit_report(report, fmt="json"):
    if fmt == "json":
        return to_json(report).encode("utf-8")
    if fmt == "text":
        return to_text(report).encode("utf-8")
    raise ValueError(f"format must be 'json' or 'text', got {fmt!r}")


def load_schema():
    return json.loads(resources.files("gaugekit").joinpath(SCHEMA_FILE).read_text(encoding="utf-8"))
