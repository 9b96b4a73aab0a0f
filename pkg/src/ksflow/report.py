"""Deterministic CSV and run-report emission.

Same inputs produce byte-identical files: floats use a fixed %.17g format,
rows keep caller order, line endings are LF, and no timestamps appear
anywhere.
"""

from __future__ import annotations

import os


def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(path, columns, rows):
    """rows: iterable of dicts keyed (at least) by `columns`."""
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(fmt(row[c]) for c in columns))
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def verdict_block(verdicts) -> list:
    """key = value lines summarizing monitor verdicts.

    Each verdict is a dict with at least `monitor` and `passed` (or a
    `verdict` string); remaining numeric entries are echoed after the flag.
    """
    lines = []
    for v in verdicts:
        name = v.get("monitor") or v.get("identity") or "check"
        if "verdict" in v:
            flag = v["verdict"]
        else:
            flag = "pass" if v.get("passed") else ("skip" if v.get("skipped") else "fail")
        detail = " ".join(
            f"{k}={fmt(val)}" for k, val in sorted(v.items())
            if k not in ("monitor", "identity", "passed", "skipped", "verdict")
            and isinstance(val, (int, float, bool))
        )
        lines.append(f"{name} = {flag}" + (f"  # {detail}" if detail else ""))
    return lines


def write_run_report(path, config_lines, verdicts, manifest):
    lines = ["# ksflow run report", "", "## config", ""]
    lines += config_lines
    lines += ["", "## verdicts", ""]
    lines += verdict_block(verdicts)
    lines += ["", "## files", ""]
    lines += [os.path.basename(str(p)) for p in manifest]
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def all_passed(verdicts) -> bool:
    for v in verdicts:
        if "verdict" in v:
            if v["verdict"] == "fail":
                return False
        elif not v.get("passed", False) and not v.get("skipped", False):
            return False
    return True
