"""Tabular report emission: detection tables, attack-count tables, phase portraits."""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

REPORT_KINDS = ("aml_detection", "rs_attack", "theory_phase")


def aml_detection_csv(report: dict) -> str:
    """Rows Rules / Model / Rules+Model with alert rate, recall, precision."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["scenario", "alert_rate", "recall", "precision"])
    for label, key in (("Rules", "rules"), ("Model", "model"), ("Rules+Model", "rules+model")):
        row = report[key]
        writer.writerow([label, repr(row["alert_rate"]), repr(row["recall"]), repr(row["precision"])])
    return buf.getvalue()


def rs_attack_csv(counts: dict[str, dict[int, int]], inject_sizes=None) -> str:
    """Rows = generation strategies, columns = injection sizes, cells = affected users."""
    if inject_sizes is None:
        inject_sizes = sorted({n for by_size in counts.values() for n in by_size})
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["generation_strategy"] + [f"{n}_users" for n in inject_sizes])
    for strategy, by_size in counts.items():
        writer.writerow([strategy] + [by_size[n] for n in inject_sizes])
    return buf.getvalue()


def flow_distribution_csv(real_amounts, generated_amounts) -> str:
    """Per-sample totals, per-entry amounts, and counts for real vs generated tensors."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["source", "total_flow", "mean_amount", "n_transactions"])
    for label, batch in (("real", real_amounts), ("generated", generated_amounts)):
        arr = np.asarray(batch)
        for sample in arr:
            nonzero = sample[sample > 0]
            writer.writerow([
                label,
                repr(float(sample.sum())),
                repr(float(nonzero.mean()) if nonzero.size else 0.0),
                int(nonzero.size),
            ])
    return buf.getvalue()


def emit_report(records, kind: str, out_dir) -> Path:
    """Write the table for `kind` under out_dir and return its path."""
    if kind not in REPORT_KINDS:
        raise ValueError(f"unknown report kind {kind!r}; expected one of {REPORT_KINDS}")
    if records is None or (hasattr(records, "__len__") and len(records) == 0):
        raise ValueError("no records to report")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if kind == "aml_detection":
        text = aml_detection_csv(records)
        path = out_dir / "aml_detection.csv"
    elif kind == "rs_attack":
        text = rs_attack_csv(records)
        path = out_dir / "rs_attack.csv"
    else:
        text = records.to_csv()  # a theory.PhasePortrait
        path = out_dir / "theory_phase.csv"
    path.write_text(text)
    return path
