from types import SimpleNamespace

import pytest

from hubspoke.fcm import SweepRow
from hubspoke.report import (
    COMPARISON_COLUMNS,
    ReportError,
    compare_scenarios,
    parse_markdown_table,
    render_comparison,
    render_sweep,
)


def result(trucks, total, pickup, delivery):
    return SimpleNamespace(trucks_used=trucks, total_cost=total,
                           pickup_cost=pickup, delivery_cost=delivery)


@pytest.fixture()
def results():
    return {
        "S0": result(20, 800.0, 500.0, 300.0),
        "S1": result(24, 1000.0, 650.0, 350.0),
        "S2": result(16, 640.0, 400.0, 240.0),
        "S3": result(14, 560.0, 400.0, 160.0),
    }


def test_baseline_row_ratios_are_one(results):
    comp = compare_scenarios(results)
    s0 = next(r for r in comp.rows if r.scenario == "S0")
    assert s0.trucks_ratio == pytest.approx(1.0)
    assert s0.total_ratio == pytest.approx(1.0)
    assert s0.pickup_ratio + s0.delivery_ratio == pytest.approx(1.0, abs=1e-12)


def test_ratios_match_hand_arithmetic(results):
    comp = compare_scenarios(results)
    by = {r.scenario: r for r in comp.rows}
    assert by["S2"].trucks_ratio == pytest.approx(16 / 20)
    assert by["S2"].total_ratio == pytest.approx(640 / 800)
    assert by["S3"].delivery_ratio == pytest.approx(160 / 800)
    for r in comp.rows:
        assert r.pickup_cost + r.delivery_cost == pytest.approx(r.total_cost, abs=0.01)
        assert r.pickup_ratio + r.delivery_ratio == pytest.approx(r.total_ratio, abs=1e-12)


def test_rows_sorted_by_scenario_id(results):
    comp = compare_scenarios(results)
    assert [r.scenario for r in comp.rows] == ["S0", "S1", "S2", "S3"]


def test_missing_baseline_raises():
    with pytest.raises(ReportError, match="missing baseline scenario S0"):
        compare_scenarios({"S2": result(1, 1.0, 0.5, 0.5)})


def test_ratios_invariant_under_cost_rescaling(results):
    comp = compare_scenarios(results)
    scaled = {k: result(v.trucks_used, v.total_cost * 3.7, v.pickup_cost * 3.7,
                        v.delivery_cost * 3.7) for k, v in results.items()}
    comp2 = compare_scenarios(scaled)
    for a, b in zip(comp.rows, comp2.rows):
        assert b.total_ratio == pytest.approx(a.total_ratio, abs=1e-12)
        assert b.pickup_ratio == pytest.approx(a.pickup_ratio, abs=1e-12)
        assert b.delivery_ratio == pytest.approx(a.delivery_ratio, abs=1e-12)


def test_csv_shape_and_columns(results):
    text = render_comparison(compare_scenarios(results), "csv")
    lines = text.strip().splitlines()
    assert len(lines) == 5
    assert lines[0].split(",") == COMPARISON_COLUMNS
    s2 = lines[3].split(",")
    assert s2[0] == "S2"
    assert s2[2] == "0.80"  # trucks ratio at 2 decimals


def test_render_is_deterministic(results):
    comp = compare_scenarios(results)
    for fmt in ("csv", "markdown", "json"):
        assert render_comparison(comp, fmt) == render_comparison(comp, fmt)


def test_unknown_format(results):
    with pytest.raises(ReportError, match="unknown format"):
        render_comparison(compare_scenarios(results), "xml")


def test_markdown_round_trip(results):
    comp = compare_scenarios(results)
    text = render_comparison(comp, "markdown")
    rows = parse_markdown_table(text)
    assert [r["scenario"] for r in rows] == ["S0", "S1", "S2", "S3"]
    for parsed, row in zip(rows, comp.rows):
        assert float(parsed["total_cost"]) == pytest.approx(row.total_cost, abs=0.005)
        assert float(parsed["trucks_ratio"]) == pytest.approx(row.trucks_ratio, abs=0.005)
    assert set(rows[0]) == set(COMPARISON_COLUMNS)


def test_sweep_table_includes_halved_variant():
    rows = [SweepRow(c=2, approx_cost=400.0, fpc=0.8, clustering=None),
            SweepRow(c=3, approx_cost=220.0, fpc=0.9, clustering=None)]
    text = render_sweep(rows, "csv")
    lines = text.strip().splitlines()
    assert lines[0] == "c,approx_cost_km,approx_cost_km_unordered,fpc"
    assert lines[1] == "2,400.0000,200.0000,0.8000"
    md = parse_markdown_table(render_sweep(rows, "markdown"))
    assert md[1]["approx_cost_km_unordered"] == "110.0000"
