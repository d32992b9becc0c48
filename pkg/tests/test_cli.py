import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from artifact import PolynomialModel, SensorDataset, case_study_path
from artifact.cli import EXIT_GAIN, EXIT_OK, EXIT_PARSE, EXIT_PRECISION, cmd_plan, cmd_run, cmd_spectra, main
from artifact.config import RunConfig, load_config
from artifact.errors import ConfigError, ParseError
from artifact.reports import format_dataset, parse_dataset, polyline_deviation, render_fig2_polylines

CSV = str(case_study_path())
CONF = str(case_study_path("case_study.conf"))


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_parse_case_study_file():
    ds = parse_dataset(CSV)
    assert ds.readings.shape == (5, 6)
    assert ds.readings[0, 0] == 10.28
    assert ds.sensor_ids[0] == "1#"


@pytest.mark.parametrize(
    "text, line",
    [
        ("", 1),
        ("a\n1\n2\n", 1),
        ("a,b\n1,2\n3\n", 3),
        ("a,b\n1,2\n3,x\n", 3),
        ("a,b\n1,2\n", 3),
        ("a,b\n1,2\n3,nan\n", 3),
    ],
)
def test_parse_errors_carry_line(tmp_path, text, line):
    with pytest.raises(ParseError) as info:
        parse_dataset(write(tmp_path, text))
    assert info.value.line == line


@settings(max_examples=40, deadline=None)
@given(arrays(float, st.tuples(st.integers(2, 6), st.integers(2, 5)), elements=st.floats(0, 1e6)))
def test_dataset_round_trip(tmp_path_factory, readings):
    ds = SensorDataset(tuple(f"s{i}" for i in range(readings.shape[1])), readings)
    path = tmp_path_factory.mktemp("rt") / "d.csv"
    path.write_text(format_dataset(ds))
    back = parse_dataset(path)
    assert back.sensor_ids == ds.sensor_ids
    assert back.readings.tolist() == ds.readings.tolist()


def test_config_file_and_overrides(tmp_path):
    cfg = load_config(CONF, {"nu": "0.7"})
    assert cfg.nu == 0.7 and cfg.target_gain == 6.25 and cfg.schedule == (0.01, 0.005, 0.003)


@pytest.mark.parametrize(
    "raw",
    [
        {"bogus": "1"},
        {"target_gain": "2", "distance": "1", "segment": "1", "attenuation": "0.5"},
        {"distance": "1"},
        {"nu": "abc"},
        {"nu": "3"},
    ],
)
def test_config_errors(raw):
    with pytest.raises(ConfigError):
        RunConfig.from_mapping(raw)


def test_config_file_unknown_key_reports_line(tmp_path):
    path = write(tmp_path, "# header\nnu=0.5\nfoo=1\n", "c.conf")
    with pytest.raises(ConfigError, match="line 3"):
        load_config(path)


def test_spectra_bundle():
    bundle = cmd_spectra(RunConfig(omega_max=4.0, omega_points=41))
    (plot,) = bundle.plots
    assert plot.header[:5] == ("omega", "amplitude_0.2", "amplitude_0.5", "amplitude_0.8", "amplitude_1.0")
    rows = np.array([r[:5] for r in plot.rows])
    at_one = rows[np.isclose(rows[:, 0], 1.0)][0]
    assert at_one[1:] == pytest.approx([1.0] * 4)
    above = rows[rows[:, 0] > 1.0]
    below = rows[(rows[:, 0] > 0) & (rows[:, 0] < 1.0)]
    assert np.all(np.diff(above[:, 1:], axis=1) > 0)
    assert np.all(np.diff(below[:, 1:], axis=1) < 0)


def test_plan_from_given_k():
    code, bundle = cmd_plan(RunConfig(k=2.0, target_gain=8.0))
    assert code == EXIT_OK
    rows = dict(bundle.tables[-1].rows)
    assert rows["iterations"] == 3 and rows["planned_gain"] == 8.0


def test_plan_unreachable_gain():
    code, _ = cmd_plan(RunConfig(k=1.0, target_gain=8.0))
    assert code == EXIT_GAIN


def test_run_bundle_contents(tmp_path):
    cfg = load_config(CONF, {"input": CSV, "output": str(tmp_path)})
    code, bundle = cmd_run(cfg)
    assert code == EXIT_OK
    files = bundle.files()
    for name in ("summary.txt", "table_result.csv", "table_passes.csv", "table_verification.csv", "plot_fig2.tsv"):
        assert name in files
    assert "fail" not in files["table_verification.csv"].split()
    result = dict(r.split(",", 1) for r in files["table_result.csv"].splitlines()[1:])
    assert result["status"] == "ok" and result["chosen_h"] == "0.003" and result["iterations"] == "5"


def test_summary_numbers_come_from_files(tmp_path):
    cfg = load_config(CONF, {"input": CSV, "output": str(tmp_path)})
    _, bundle = cmd_run(cfg)
    files = bundle.files()
    summary = files.pop("summary.txt")
    body = "\n".join(files.values())
    numbers = set(re.findall(r"-?\d+\.\d+(?:e-?\d+)?", summary))
    assert numbers
    assert all(n in body for n in numbers)


def test_repeated_runs_are_byte_identical(tmp_path):
    for sub in ("a", "b"):
        assert main(["run", "--config", CONF, "--input", CSV, "--output", str(tmp_path / sub), "-q"]) == EXIT_OK
    a = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert a == sorted(p.name for p in (tmp_path / "b").iterdir())
    for name in a:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_exit_codes(tmp_path):
    out = str(tmp_path / "o")
    assert main(["stats", "--input", CSV, "--output", out, "-q"]) == EXIT_OK
    assert main(["stats", "--output", out, "-q"]) == EXIT_PARSE
    assert main(["run", "--config", CONF, "--input", str(write(tmp_path, "a,b\n1\n")), "--output", out, "-q"]) == EXIT_PARSE
    assert main(["run", "--config", CONF, "--input", CSV, "--target-std", "0.001", "--output", out, "-q"]) == EXIT_PRECISION
    assert main(["run", "--config", CONF, "--input", CSV, "--nu", "0", "--output", out, "-q"]) == EXIT_GAIN
    assert main(["calibrate", "--config", CONF, "--input", CSV, "--output", out, "-q"]) == EXIT_OK
    assert main(["plan", "--config", CONF, "--input", CSV, "--output", out, "-q"]) == EXIT_OK
    assert main(["fit", "--input", CSV, "--output", out, "-q"]) == EXIT_OK


QUAD = PolynomialModel((1.0, -0.5, 2.0))


def test_polylines_converge_as_step_shrinks():
    table = render_fig2_polylines(QUAD, 0.5, [0.04, 0.02, 0.01], window=(0.0, 1.0))
    assert table.header == ("x", "true", "fitted_0.04", "fitted_0.02", "fitted_0.01")
    dev = polyline_deviation(table)
    assert dev[0] > dev[1] > dev[2]


def test_single_step_polyline_columns():
    table = render_fig2_polylines(QUAD, 0.5, [0.1], window=(0.0, 1.0))
    assert table.header == ("x", "true", "fitted")
    assert len(table.rows) == 11


def test_zero_order_polyline_is_the_model():
    table = render_fig2_polylines(QUAD, 0.0, [0.05, 0.1], window=(0.0, 1.0))
    for x, true, *fitted in table.rows:
        assert true == pytest.approx(QUAD(x), rel=1e-12)
        for v in fitted:
            assert v is None or v == pytest.approx(true, rel=1e-12)
