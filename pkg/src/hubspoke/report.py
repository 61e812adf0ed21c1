"""Result tables: clustering sweep summaries and scenario cost comparisons
normalized to the single-DC baseline S0."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Sequence

from .fcm import SweepRow
from .scenarios import ScenarioId, ScenarioResult

COMPARISON_COLUMNS = ["scenario", "trucks", "trucks_ratio", "total_cost", "total_ratio",
                      "pickup_cost", "pickup_ratio", "delivery_cost", "delivery_ratio"]

SWEEP_COLUMNS = ["c", "approx_cost_km", "approx_cost_km_unordered", "fpc"]


class ReportError(ValueError):
    pass


@dataclass(frozen=True)
class ComparisonRow:
    scenario: str
    trucks: int
    trucks_ratio: float
    total_cost: float
    total_ratio: float
    pickup_cost: float
    pickup_ratio: float
    delivery_cost: float
    delivery_ratio: float


@dataclass(frozen=True)
class ScenarioComparison:
    rows: tuple[ComparisonRow, ...]
    baseline_trucks: int
    baseline_cost: float


def compare_scenarios(results: dict) -> ScenarioComparison:
    """Normalize each scenario's trucks and cost buckets against S0."""
    keyed = {ScenarioId(k): v for k, v in results.items()}
    if ScenarioId.S0 not in keyed:
        raise ReportError("missing baseline scenario S0")
    base = keyed[ScenarioId.S0]
    base_trucks = base.trucks_used if base.trucks_used > 0 else 1
    base_cost = base.total_cost if base.total_cost > 0 else 1.0
    rows = []
    for sid in sorted(keyed, key=lambda s: s.value):
        r = keyed[sid]
        rows.append(ComparisonRow(
            scenario=sid.value,
            trucks=r.trucks_used,
            trucks_ratio=r.trucks_used / base_trucks,
            total_cost=r.total_cost,
            total_ratio=r.total_cost / base_cost,
            pickup_cost=r.pickup_cost,
            pickup_ratio=r.pickup_cost / base_cost,
            delivery_cost=r.delivery_cost,
            delivery_ratio=r.delivery_cost / base_cost,
        ))
    return ScenarioComparison(rows=tuple(rows),
                              baseline_trucks=base.trucks_used,
                              baseline_cost=base.total_cost)


def _comparison_cells(comp: ScenarioComparison) -> list[list[str]]:
    out = [COMPARISON_COLUMNS]
    for r in comp.rows:
        out.append([
            r.scenario, str(r.trucks), f"{r.trucks_ratio:.2f}",
            f"{r.total_cost:.2f}", f"{r.total_ratio:.2f}",
            f"{r.pickup_cost:.2f}", f"{r.pickup_ratio:.2f}",
            f"{r.delivery_cost:.2f}", f"{r.delivery_ratio:.2f}",
        ])
    return out


def _sweep_cells(rows: Sequence[SweepRow]) -> list[list[str]]:
    out = [SWEEP_COLUMNS]
    for r in rows:
        out.append([str(r.c), f"{r.approx_cost:.4f}", f"{r.approx_cost / 2:.4f}", f"{r.fpc:.4f}"])
    return out


def _render_cells(cells: list[list[str]], fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerows(cells)
        return buf.getvalue()
    if fmt == "markdown":
        header, *body = cells
        lines = ["| " + " | ".join(header) + " |",
                 "| " + " | ".join("---" for _ in header) + " |"]
        lines += ["| " + " | ".join(row) + " |" for row in body]
        return "\n".join(lines) + "\n"
    if fmt == "json":
        header, *body = cells
        return json.dumps([dict(zip(header, row)) for row in body], indent=2) + "\n"
    raise ReportError(f"unknown format: {fmt}")


def render_comparison(comp: ScenarioComparison, fmt: str = "csv") -> str:
    """Scenario comparison table. Ratios are printed at 2 decimals; use the
    JSON of each ScenarioResult for full-precision absolutes."""
    return _render_cells(_comparison_cells(comp), fmt)


def render_sweep(rows: Sequence[SweepRow], fmt: str = "csv") -> str:
    """Sweep table: both the ordered-pair inter-hub cost (as computed) and
    its halved unordered-pair variant, plus the partition coefficient."""
    return _render_cells(_sweep_cells(rows), fmt)


def parse_markdown_table(text: str) -> list[dict[str, str]]:
    """Inverse of the markdown renderer, for round-trip checking."""
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    header = [c.strip() for c in lines[0].strip("|").split("|")]
    rows = []
    for ln in lines[2:]:
        cells = [c.strip() for c in ln.strip("|").split("|")]
        rows.append(dict(zip(header, cells)))
    return rows
