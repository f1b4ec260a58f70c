import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from spiband.curves import Band, SampleMatrix, TimeGrid
from spiband.errors import BandIOError, NonIncreasingGridError, ParseError, RaggedRowsError
from spiband.evaluation import ExperimentReport
from spiband.io import (
    band_svg,
    read_band_json,
    read_report_csv,
    read_sample_csv,
    render_band_svg,
    write_band_json,
    write_report_csv,
    write_report_json,
    write_sample_csv,
)


def test_sample_csv_roundtrip_is_exact(tmp_path, rng):
    rows = -np.sort(-rng.random((7, 5)), axis=1)
    samples = SampleMatrix(TimeGrid([0.5, 1, 2.25, 3, 1e3]), rows)
    path = tmp_path / "s.csv"
    write_sample_csv(samples, path)
    back = read_sample_csv(path, survival=True)
    assert back.grid == samples.grid
    np.testing.assert_array_equal(back.rows, rows)


@pytest.mark.parametrize("text, error", [
    ("1,2\n0.5,0.4\n0.3\n", RaggedRowsError),
    ("1,2\n0.5,abc\n", ParseError),
    ("2,1\n0.5,0.4\n", NonIncreasingGridError),
    ("", ParseError),
    ("1,2\nnan,0.3\n", ParseError),
])
def test_sample_csv_errors(tmp_path, text, error):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(error):
        read_sample_csv(path)


def test_missing_file(tmp_path):
    with pytest.raises(BandIOError):
        read_sample_csv(tmp_path / "nope.csv")


def test_band_json_roundtrip(tmp_path):
    b = Band(TimeGrid([1, 2]), [0.1, 0.05], [0.9, 1 / 3])
    meta = {"method": "olshen", "alpha": 0.05, "seed": 7, "config": {"bootstrap_reps": 10}}
    path = tmp_path / "b.json"
    write_band_json(b, meta, path)
    back, meta_back = read_band_json(path)
    assert back == b
    assert meta_back == meta
    assert set(json.loads(path.read_text())) >= {"grid", "lower", "upper", "method", "alpha"}


def test_band_json_missing_keys(tmp_path):
    path = tmp_path / "b.json"
    path.write_text('{"grid": [1]}')
    with pytest.raises(ParseError):
        read_band_json(path)
    path.write_text("{")
    with pytest.raises(ParseError):
        read_band_json(path)


def test_report_roundtrip(tmp_path):
    rep = ExperimentReport()
    rep.add(0, "gspie", 0.1, 32, 0.9123456789012345, 1 / 3, -12.5)
    rep.add(0, "olshen", 0.1, 32, float("nan"), 0.25, -1.0)
    path = tmp_path / "r.csv"
    write_report_csv(rep, path)
    back = read_report_csv(path)
    assert back.rows[0] == rep.rows[0]
    assert math.isnan(back.rows[1]["observed_coverage"])
    write_report_json(rep, tmp_path / "r.json", {"seed": 1})
    doc = json.loads((tmp_path / "r.json").read_text())
    assert doc["seed"] == 1 and doc["aggregate"][1]["mean_coverage"] is None


def test_svg_is_well_formed(tmp_path):
    b = Band(TimeGrid([1, 2, 3]), [0.5, 0.4, 0.2], [0.9, 0.8, 0.6])
    root = ET.fromstring(band_svg(b, curve=[0.7, 0.6, 0.4]))
    tags = {el.tag.split("}")[1] for el in root.iter()}
    assert {"polygon", "polyline", "text"} <= tags
    render_band_svg(b, tmp_path / "b.svg")
    assert (tmp_path / "b.svg").read_text().startswith("<svg")
    with pytest.raises(RaggedRowsError):
        band_svg(b, curve=[0.5])
