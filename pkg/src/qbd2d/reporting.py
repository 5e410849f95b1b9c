"""Deterministic rendering of analysis results as text, JSON or CSV.

Text tables print three significant figures, mirroring how such decay
tables are usually quoted; JSON keeps full precision.  All output is a
pure function of the inputs so identical configurations produce
byte-identical reports.
"""

from __future__ import annotations

import io
import json

__all__ = [
    "analysis_bundle_dict",
    "render_analysis_text",
    "render_analysis_csv",
    "render_json",
    "direction_label",
    "render_verify_text",
    "render_verify_csv",
    "format_sig",
]


def format_sig(value):
    """Three-significant-figure rendering used by the text tables."""
    if value is None:
        return "n/a"
    if value != value:  # NaN
        return "nan"
    return f"{value:.3g}"


def direction_label(c):
    c1, c2 = c
    norm_sq = c1 * c1 + c2 * c2
    label = f"xi_({c1},{c2})"
    if norm_sq != 1:
        label += f"/sqrt({norm_sq})"
    return label


def analysis_bundle_dict(source, profile, extremes, classification, reports):
    """Assemble the analysis bundle as a JSON-ready dictionary."""
    type_class, q1, q2, slopes = classification
    return {
        "model": source,
        "stability": {
            "verdict": profile.stability.value,
            "drift_a1": profile.drift_a1,
            "drift_a2": profile.drift_a2,
            "drift_a12": list(profile.drift_a12),
        },
        "geometry": {
            "theta1_min": extremes[0],
            "theta1_max": extremes[1],
            "theta2_min": extremes[2],
            "theta2_max": extremes[3],
        },
        "coordinate": {
            "theta1_star": profile.theta1_star,
            "theta2_star": profile.theta2_star,
            "theta1_dagger": profile.theta1_dagger,
            "theta2_dagger": profile.theta2_dagger,
            "xi_10": profile.xi_10,
            "xi_01": profile.xi_01,
        },
        "classification": {
            "type_class": type_class.value,
            "q1": list(q1),
            "q2": list(q2),
            "slope_eta2_at_q1": slopes["eta2_at_q1"],
            "slope_eta1_at_q2": slopes["eta1_at_q2"],
            "degenerate": slopes["degenerate"],
        },
        "directions": [report.to_dict() for report in reports],
    }


def _aligned(rows):
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = []
    for row in rows:
        lines.append("  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip())
    return "\n".join(lines)


def render_analysis_text(bundle):
    out = io.StringIO()
    stab = bundle["stability"]
    drift = stab["drift_a12"]
    out.write(
        f"stability: {stab['verdict']}"
        f" (a1={format_sig(stab['drift_a1'])},"
        f" a2={format_sig(stab['drift_a2'])},"
        f" a12=({format_sig(drift[0])}, {format_sig(drift[1])}))\n"
    )
    out.write(f"type: {bundle['classification']['type_class']}\n")
    coord = bundle["coordinate"]
    geo = bundle["geometry"]
    header = ["theta1_max", "theta1*", "theta2_max", "theta2*"]
    values = [
        format_sig(geo["theta1_max"]),
        format_sig(coord["theta1_star"]),
        format_sig(geo["theta2_max"]),
        format_sig(coord["theta2_star"]),
    ]
    for report in bundle["directions"]:
        header.append(direction_label(report["direction"]))
        values.append(format_sig(report["xi_normalized"]))
    out.write(_aligned([header, values]))
    out.write("\n")
    return out.getvalue()


def render_analysis_csv(bundle):
    out = io.StringIO()
    out.write(
        "c1,c2,xi,xi_normalized,theta_c_min,theta_c_max,"
        "theta_dagger_c1,theta_dagger_c2,type_class,regime,binding_constraint\n"
    )
    for report in bundle["directions"]:
        c1, c2 = report["direction"]
        out.write(
            f"{c1},{c2},{report['xi']!r},{report['xi_normalized']!r},"
            f"{report['theta_c_min']!r},{report['theta_c_max']!r},"
            f"{report['theta_dagger_c1']!r},{report['theta_dagger_c2']!r},"
            f"{report['type_class']},{report['regime']},{report['binding_constraint']}\n"
        )
    return out.getvalue()


def render_json(payload):
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def render_verify_text(rows, band):
    out = io.StringIO()
    table = [["direction", "analytic_xi", "fitted_slope", "rel_gap", "status"]]
    for row in rows:
        if row.get("error"):
            table.append([row["label"], "-", "-", "-", f"error: {row['error']}"])
            continue
        table.append(
            [
                row["label"],
                format_sig(row["analytic"]),
                format_sig(row["fitted"]),
                f"{row['rel_gap'] * 100:.1f}%",
                "pass" if row["pass"] else "fail",
            ]
        )
    out.write(_aligned(table))
    out.write(f"\nband: {band * 100:.1f}%\n")
    return out.getvalue()


def render_verify_csv(rows):
    out = io.StringIO()
    out.write("c1,c2,analytic_xi,fitted_slope,rel_gap,status\n")
    for row in rows:
        c1, c2 = row["direction"]
        if row.get("error"):
            out.write(f"{c1},{c2},,,,{row['error']}\n")
            continue
        out.write(
            f"{c1},{c2},{row['analytic']!r},{row['fitted']!r},{row['rel_gap']!r},"
            f"{'pass' if row['pass'] else 'fail'}\n"
        )
    return out.getvalue()
