import pandas as pd
import pytest

from texprint.evaluation import LearnerSpec, cross_validate
from texprint.reporting import (
    RESULT_COLUMNS,
    accuracy_chart,
    format_ranking,
    prf_chart,
    write_results_csv,
    write_results_json,
)


@pytest.fixture
def reports(clustered_dataset):
    return [
        cross_validate(LearnerSpec("c45"), clustered_dataset, k=4, seed=1),
        cross_validate(LearnerSpec("stump"), clustered_dataset, k=4, seed=1),
    ]


def test_results_csv(tmp_path, reports):
    path = write_results_csv(reports, tmp_path / "results.csv")
    frame = pd.read_csv(path)
    assert list(frame.columns) == RESULT_COLUMNS
    assert frame["classifier"].tolist() == ["J48", "Decision Stump"]
    assert frame.loc[0, "accuracy"] == pytest.approx(1.0)
    again = write_results_csv(reports, tmp_path / "again.csv")
    assert path.read_bytes() == again.read_bytes()


def test_results_json(tmp_path, reports):
    import json

    data = json.loads(write_results_json(reports, tmp_path / "results.json").read_text())
    assert [r["learner"] for r in data["reports"]] == ["c45", "stump"]
    assert set(data["reports"][0]["pooled"]) >= {"precision", "recall", "f_measure", "accuracy"}


def test_charts_are_deterministic_svg(tmp_path, reports):
    first = accuracy_chart(reports, tmp_path / "a" / "accuracy.svg")
    second = accuracy_chart(reports, tmp_path / "b" / "accuracy.svg")
    assert first.read_text().lstrip().startswith("<?xml")
    assert first.read_bytes() == second.read_bytes()
    prf = prf_chart(reports, tmp_path / "prf.svg")
    assert "<svg" in prf.read_text()


def test_format_ranking(reports):
    text = format_ranking(reports)
    assert text.splitlines()[0].startswith("1. J48")
    assert len(text.splitlines()) == 2
