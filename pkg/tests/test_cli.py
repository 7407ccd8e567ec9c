import csv
import json
import logging

import numpy as np
import pytest

from zipcr import information_criteria
from zipcr.cli import IngestError, RunConfig, ingest, main, run


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def portfolio_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("sim") / "portfolio.csv"
    assert main(["simulate", "--out", str(path), "--seed", "31"]) == 0
    return path


@pytest.fixture(scope="module")
def both_runs(portfolio_csv, tmp_path_factory):
    outs = []
    for i in range(2):
        out = tmp_path_factory.mktemp(f"run{i}")
        argv = ["run", "--input", str(portfolio_csv), "--model", "both", "--covariates", "group",
                "--categorical", "group", "--out", str(out), "--seed", "5"]
        assert main(argv) == 0
        outs.append(out)
    return outs


def test_ingest_dummy_coding(tmp_path):
    path = write(tmp_path / "d.csv", "time,event,x\n0,1,1\n12.5,0,2\n3.0,1,3\n")
    data = ingest(path, RunConfig(str(path), covariate_columns=["x"], categorical_columns=["x"]))
    assert data.names == ["dx1", "dx2"]
    np.testing.assert_array_equal(data.x_zero, [[1, 0], [0, 1], [0, 0]])


def test_ingest_pre_expanded_rows(tmp_path):
    path = write(tmp_path / "d.csv", "time,event,dx1,dx2\n0,1,1,0\n12.5,0,0,1\n")
    data = ingest(path, RunConfig(str(path), covariate_columns=["dx1", "dx2"]))
    first, second = data[0], data[1]
    assert (first.time, first.event, first.covariates_zero.tolist()) == (0.0, 1, [1.0, 0.0])
    assert (second.time, second.event, second.covariates_zero.tolist()) == (12.5, 0, [0.0, 1.0])


def test_ingest_text_levels_become_dummies(tmp_path):
    path = write(tmp_path / "d.csv", "time,event,segment\n1,1,retail\n2,0,corporate\n3,1,sme\n")
    data = ingest(path, RunConfig(str(path), covariate_columns=["segment"]))
    assert data.names == ["dsegmentcorporate", "dsegmentretail"]
    np.testing.assert_array_equal(data.x_zero[2], [0, 0])


@pytest.mark.parametrize(
    "body, message",
    [
        ("time,event\n1,1\n-2,0\n", "line 3"),
        ("time,event\n1,1\n2,5\n", "line 3"),
        ("time,event\n1,1\n,0\n", "line 3"),
        ("time,event\n1,1\nabc,0\n", "line 3"),
        ("time,event,x\n1,1,\n", "line 2"),
    ],
)
def test_ingest_errors_name_the_line(tmp_path, body, message):
    path = write(tmp_path / "bad.csv", body)
    cols = ["x"] if "x" in body.splitlines()[0] else []
    with pytest.raises(IngestError, match=message):
        ingest(path, RunConfig(str(path), covariate_columns=cols))


def test_ingest_empty_file(tmp_path):
    path = write(tmp_path / "empty.csv", "")
    with pytest.raises(IngestError, match="empty"):
        ingest(path, RunConfig(str(path)))
    header_only = write(tmp_path / "header.csv", "time,event\n")
    with pytest.raises(IngestError, match="no data"):
        ingest(header_only, RunConfig(str(header_only)))


def test_ingest_missing_column(tmp_path):
    path = write(tmp_path / "d.csv", "t,event\n1,1\n")
    with pytest.raises(IngestError, match="time"):
        ingest(path, RunConfig(str(path)))


def test_missing_input_exits_one(tmp_path, caplog):
    missing = tmp_path / "nope.csv"
    with caplog.at_level(logging.ERROR):
        assert main(["run", "--input", str(missing), "--out", str(tmp_path / "o")]) == 1
    assert str(missing) in caplog.text


def test_bad_level_exits_one(portfolio_csv, tmp_path):
    assert main(["run", "--input", str(portfolio_csv), "--level", "1.5", "--out", str(tmp_path)]) == 1


def test_both_mode_reports_and_flags_smaller(both_runs):
    report = json.loads((both_runs[0] / "fit_report.json").read_text())
    assert report["model"] == "both"
    aics = {f["model"]: f["aic"] for f in report["fits"]}
    assert set(aics) == {"zipcr", "zicr"}
    assert report["comparison"]["preferred_by_aic"] == min(aics, key=aics.get)
    assert "<- smaller" in (both_runs[0] / "summary.txt").read_text()


def test_report_fields(both_runs):
    fit = json.loads((both_runs[0] / "fit_report.json").read_text())["fits"][0]
    for key in ("model", "n", "k", "estimates", "std_errors", "ci", "z_ratios", "log_lik", "aic", "bic",
                "converged", "group_outcomes"):
        assert key in fit
    assert fit["k"] == 8 and fit["n"] == 4138
    assert [g["group"] for g in fit["group_outcomes"]] == ["dgroup1=1_dgroup2=0", "dgroup1=0_dgroup2=1", "dgroup1=0_dgroup2=0"]


def test_report_criteria_round_trip(both_runs):
    report = json.loads((both_runs[0] / "fit_report.json").read_text())
    for fit in report["fits"]:
        aic, bic = information_criteria(fit["log_lik"], fit["k"], fit["n"])
        assert float(f"{aic:.10g}") == fit["aic"]
        assert float(f"{bic:.10g}") == fit["bic"]


def test_curve_files_monotone(both_runs):
    files = sorted((both_runs[0] / "curves").glob("*.csv"))
    assert len(files) == 4
    for path in files:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        blocks = {}
        for r in rows:
            blocks.setdefault((r["kind"], r["label"]), []).append((float(r["time"]), float(r["survival"])))
        assert set(blocks) == {("empirical", "kaplan-meier"), ("fitted", "zipcr"), ("fitted", "zicr")}
        for pts in blocks.values():
            t, s = np.array(pts).T
            assert np.all(np.diff(t) > 0)
            assert np.all(np.diff(s) <= 0)


def test_group_outcomes_csv(both_runs):
    with open(both_runs[0] / "group_outcomes.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 6
    for r in rows:
        assert float(r["gamma0"]) + float(r["gamma1"]) < 1


def test_runs_are_byte_identical(both_runs):
    a, b = both_runs
    names = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file() and p.name != "run_metadata.json")
    assert names == sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file() and p.name != "run_metadata.json")
    for rel in names:
        assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel


def test_no_zero_rows_warns(tmp_path):
    rng = np.random.default_rng(3)
    t = np.round(rng.weibull(1.2, 300) * 10, 4)
    d = (t < 15).astype(int)
    t = np.minimum(t, 15)
    body = "time,event\n" + "".join(f"{a},{b}\n" for a, b in zip(t, d))
    path = write(tmp_path / "nz.csv", body)
    out = tmp_path / "out"
    code = run(RunConfig(str(path), output_dir=str(out)))
    assert code in (0, 2)
    report = json.loads((out / "fit_report.json").read_text())
    assert "no zero-time observations" in report["warnings"]


def test_simulate_output_schema(portfolio_csv):
    with open(portfolio_csv, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    assert reader.fieldnames == ["group", "time", "event", "dx1", "dx2"]
    assert len(rows) == 4138
    assert {r["group"] for r in rows} == {"1", "2", "3"}
