from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any

from qpurify.harness import FidelityTrace, ScenarioResult, SweepSummary

SCHEMA_VERSION = "1"

SWEEP_COLUMNS = ["c1", "strategy", "purify", "n_qubits", "trials", "mean_fidelity", "std_error", "seed"]
TRACE_COLUMNS = ["n", "pipeline", "mean_fidelity", "std_error"]


@dataclass(frozen=True)
class OutputRecord:
    schema_version: str
    generated_at: str
    config: dict
    rows: Any = field(default=None)


def fmt(x: float) -> str:
    return format(float(x), ".10g")


def sig(x: float) -> float:
    """Round to the 10 significant digits every output uses."""
    return float(fmt(x))


def utc_now() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat()


def to_json(data) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False)


def record_to_dict(record: OutputRecord) -> dict:
    return {
        "schemaVersion": record.schema_version,
        "generatedAt": record.generated_at,
        "config": record.config,
        "rows": record.rows,
    }


def load_record(text: str) -> OutputRecord:
    d = json.loads(text)
    return OutputRecord(
        schema_version=d["schemaVersion"],
        generated_at=d["generatedAt"],
        config=d["config"],
        rows=d.get("rows"),
    )


def scenario_rows(result: ScenarioResult) -> dict:
    return {
        "meanFidelity": sig(result.row.mean_fidelity),
        "stdError": sig(result.row.std_error),
        "trials": result.row.trials,
        "seed": result.row.seed,
        "stepCurve": [sig(x) for x in result.step_curve],
        "stepStdError": [sig(x) for x in result.step_std_error],
    }


def run_record(config: dict, result: ScenarioResult, generated_at: str | None = None) -> OutputRecord:
    return OutputRecord(
        schema_version=SCHEMA_VERSION,
        generated_at=generated_at or utc_now(),
        config=config,
        rows=scenario_rows(result),
    )


def envelope(config: dict, columns: list[str], generated_at: str | None = None) -> OutputRecord:
    """Sidecar metadata for CSV outputs."""
    return OutputRecord(
        schema_version=SCHEMA_VERSION,
        generated_at=generated_at or utc_now(),
        config=config,
        rows={"columns": list(columns)},
    )


def _write_csv(columns: list[str], rows: list[list[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buf.getvalue()


def sweep_to_csv(summary: SweepSummary) -> str:
    rows = [
        [
            fmt(r.c1),
            r.strategy,
            "true" if r.purify else "false",
            r.n_qubits,
            r.trials,
            fmt(r.mean_fidelity),
            fmt(r.std_error),
            r.seed,
        ]
        for r in summary.rows
    ]
    return _write_csv(SWEEP_COLUMNS, rows)


def trace_to_csv(trace: FidelityTrace) -> str:
    rows = []
    for pipeline, result in (("purified", trace.purified), ("unpurified", trace.unpurified)):
        for n, (mean, se) in enumerate(zip(result.step_curve, result.step_std_error), start=1):
            rows.append([n, pipeline, fmt(mean), fmt(se)])
    return _write_csv(TRACE_COLUMNS, rows)


def read_csv_rows(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))


def stats_to_dict(n: int, c1: float, probs: dict[int, float], fidelities: dict[int, float]) -> dict:
    rows = [{"M": m, "p_M": sig(probs[m]), "f_M": sig(fidelities[m])} for m in sorted(probs)]
    total = sum(probs.values())
    mean = sum(probs[m] * fidelities[m] for m in probs)
    return {
        "n": n,
        "c1": sig(c1),
        "rows": rows,
        "sum_p": sig(total),
        "mean_fidelity": sig(mean),
        "purifies": bool(mean >= c1 - 1e-12),
    }
