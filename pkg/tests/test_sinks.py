import csv
import json
import logging
import math

import pytest

from adapters.factory import SinkFactory
from adapters.output import CsvTauSink, JsonReportSink, LogReportSink, TableReportSink
from adapters.output.json_sink import load_reports
from core.coeffs import build_hecke_table
from core.errors import EqualPrimes
from core.reports import Outcome, create_error_report, create_report


@pytest.fixture
def reports():
    return [
        create_report("gamma/reflection", 1.0 + 2.0j, 1.0 + 2.0j, 0.0, 1e-11, params={"points": 100}),
        create_report("sieve", 10.0, 11.0, 0.01, 1e-3, params={"p": 2, "q": 3}),
        create_error_report("reciprocity", EqualPrimes("p and q must be distinct", p=3)),
    ]


def test_json_sink_round_trip(tmp_path, reports):
    sink = SinkFactory.create_sink("JsonReportSink", {"path": "out/reports.json", "recip_home": str(tmp_path)})
    sink.emit(reports)
    loaded = load_reports(str(tmp_path / "out" / "reports.json"))
    assert [r.identity for r in loaded] == [r.identity for r in reports]
    assert [r.outcome for r in loaded] == [Outcome.PASS, Outcome.FAIL, Outcome.ERROR]
    assert loaded[1].lhs == reports[1].lhs
    assert loaded[1].budget == reports[1].budget
    assert loaded[2].error["kind"] == "EqualPrimes"
    # budget infinito del report d'errore, NaN dei lati: JSON standard con null
    text = (tmp_path / "out" / "reports.json").read_text()
    assert "NaN" not in text and "Infinity" not in text
    raw = json.loads(text)
    assert raw[2]["budget"] is None
    assert raw[2]["lhs"] == {"re": None, "im": None}
    assert math.isnan(loaded[2].lhs.real)


def test_table_sink_render(tmp_path, reports):
    sink = TableReportSink("table", {"path": str(tmp_path / "table.txt")})
    text = sink.render(reports)
    assert text.splitlines()[0].startswith("identity")
    assert "FAIL" in text and "ERROR" in text
    assert text.rstrip().endswith("1/3 passing")
    sink.emit(reports)
    assert (tmp_path / "table.txt").read_text() == text


def test_log_sink_only_failures(caplog, reports):
    sink = LogReportSink("log", {"only_failures": True})
    with caplog.at_level(logging.INFO, logger="adapters.output.log_sink"):
        sink.emit(reports)
    messages = [r.getMessage() for r in caplog.records]
    assert not any("gamma/reflection" in m for m in messages)
    assert any("sieve" in m for m in messages)
    assert any(r.levelno == logging.ERROR for r in caplog.records)


def test_csv_tau_sink(tmp_path):
    sink = CsvTauSink("csv", {"path": str(tmp_path / "tau.csv")})
    sink.write_table(build_hecke_table(12, 10))
    with open(tmp_path / "tau.csv", newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["n", "tau", "lambda"]
    assert len(rows) == 11
    assert rows[2][:2] == ["2", "-24"]
    table = build_hecke_table(12, 10)
    for row in rows[1:]:
        n = int(row[0])
        assert row[2] == format(float(table.lam[n]), ".17g")
        assert float(row[2]) == float(table.lam[n])


def test_factory_rejects_unknown_or_incomplete_sinks():
    with pytest.raises(ValueError, match="Unknown sink class"):
        SinkFactory.create_sink("LedSink", {})
    with pytest.raises(ValueError):
        SinkFactory.create_sink("JsonReportSink", {})
    assert "CsvTauSink" in SinkFactory.get_available_classes()
    assert isinstance(SinkFactory.create_sink("LogReportSink", {}), LogReportSink)
