"""JSON and markdown rendering of personalized reports."""

import json
import math

import numpy as np

REPORT_FORMAT = "report_v1"


def _clean(x):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def report_dict(report):
    """Report as an ordered mapping matching the ``report_v1`` schema."""
    return _clean({
        "format": REPORT_FORMAT,
        "patient_id": report.patient_id,
        "status": report.status,
        "cohort_size": report.cohort_size,
        "risk_index": report.risk_index,
        "risk_group": report.risk_group,
        "factor_weights": [{"factor": n, "weight": w} for n, w in report.factor_weights],
        "hazard_ratios": [
            {"factor": h.name, "hr": h.hr, "ci_low": h.ci_low, "ci_high": h.ci_high, "p": h.p_value}
            for h in report.hazard_ratios
        ],
        "screen": [row.to_dict() for row in report.screen],
        "fit": report.fit,
        "km": {
            "low": report.km_low.to_dict() if report.km_low is not None else None,
            "high": report.km_high.to_dict() if report.km_high is not None else None,
        },
        "cohort": report.cohort,
        "warnings": list(report.warnings),
        "provenance": report.provenance,
    })


def _fmt(x, spec):
    return "n/a" if x is None or not math.isfinite(x) else format(x, spec)


def _weights_table(weights, pairs=2):
    head = "| " + " | ".join(["Factor", "Weight"] * pairs) + " |"
    rule = "|" + "|".join(["---", "---:"] * pairs) + "|"
    lines = [head, rule]
    for i in range(0, len(weights), pairs):
        cells = []
        for name, w in weights[i:i + pairs]:
            cells += [name, f"{w:.3f}"]
        cells += ["", ""] * (pairs - len(weights[i:i + pairs]))
        lines.append("| " + " | ".join(cells) + " |")
    if not weights:
        lines.append("| " + " | ".join(["no weights", ""] + ["", ""] * (pairs - 1)) + " |")
    return lines


def render_markdown(report):
    lines = [f"# Personalized report: {report.patient_id}", ""]
    lines += [
        f"- Status: {report.status}",
        f"- Cohort size: {report.cohort_size}",
        f"- Risk index: {_fmt(report.risk_index, '.3f')}",
        f"- Risk group: {report.risk_group or 'n/a'}",
        "",
        "## Prognostic factor weights",
        "",
    ]
    lines += _weights_table(list(report.factor_weights))
    lines += ["", "## Univariate screen", "", "| Factor | Log-rank p | Direction |", "|---|---:|:---:|"]
    for row in report.screen:
        lines.append(f"| {row.factor_name} | {_fmt(row.logrank_p, '.3f')} | {row.direction or '-'} |")
    if not any(row.significant for row in report.screen):
        lines.append("| no significant factors | | |")
    if report.warnings:
        lines += ["", "## Warnings", ""] + [f"- {w}" for w in report.warnings]
    prov = report.provenance
    lines += [
        "", "## Provenance", "",
        f"- Index SHA-256: {prov.get('index_sha256', 'n/a')}",
        f"- Seed: {prov.get('seed', 'n/a')}",
        f"- Package version: {prov.get('package_version', 'n/a')}",
    ]
    return "\n".join(lines) + "\n"


def render_report(report, format="json"):
    """Serialize a :class:`PersonalizedReport` to UTF-8 bytes.

    Parameters
    ----------
    format : {"json", "markdown"}
        JSON follows the ``report_v1`` schema with a fixed key order;
        markdown lays the weights out in two factor/weight column pairs.
    """
    if format == "json":
        text = json.dumps(report_dict(report), indent=2, allow_nan=False) + "\n"
    elif format in ("markdown", "md"):
        text = render_markdown(report)
    else:
        raise ValueError(f"unknown report format {format!r}")
    return text.encode("utf-8")


def load_report_schema():
    from importlib.resources import files

    return json.loads(files(__package__).joinpath("report_v1.schema.json").read_text("utf-8"))
