"""Tabular summaries of simulation reports."""

from __future__ import annotations

from .simulate import SimReport

COLUMNS = ("step", "verdict", "lambda2_relay", "lambda2_union", "action", "cost")


def _cell(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def metrics_report(report: SimReport) -> tuple[str, dict]:
    """Fixed-width table (one row per step) and the summary dict."""
    rows = [[_cell(r[c]) for c in COLUMNS] for r in report.records]
    widths = [max([len(c)] + [len(row[k]) for row in rows]) for k, c in enumerate(COLUMNS)]
    lines = ["  ".join(c.ljust(wd) for c, wd in zip(COLUMNS, widths)).rstrip()]
    lines += ["  ".join(v.ljust(wd) for v, wd in zip(row, widths)).rstrip() for row in rows]
    return "\n".join(lines) + "\n", dict(report.summary)
