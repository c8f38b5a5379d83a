import csv
import io
import json
import math

import pytest

from halfcavity.cli import EXIT_NOT_CONVERGED, EXIT_OK, EXIT_USAGE, fmt, run


def _csv(text):
    return list(csv.reader(io.StringIO(text)))


def test_amplitude_csv_columns(tmp_path):
    out = tmp_path / "amp.csv"
    assert run(["amplitude", "--gtd", "2", "--phi", "0", "--horizon", "6", "--mesh-per-delay", "16", "-o", str(out)]) == EXIT_OK
    rows = _csv(out.read_text())
    assert rows[0] == ["t_gamma", "re_eps", "im_eps", "abs_eps2", "abs_eps4"]
    first = [float(v) for v in rows[1]]
    assert first == [0.0, 1.0, 0.0, 1.0, 1.0]
    assert float(rows[-1][0]) == pytest.approx(6.0)
    assert b"\r\n" not in out.read_bytes()


def test_amplitude_large_delay_spikes(tmp_path):
    out = tmp_path / "spikes.csv"
    assert run(["amplitude", "--gtd", "20", "--phi", "0", "--horizon", "100", "-o", str(out)]) == EXIT_OK
    rows = [[float(v) for v in r] for r in _csv(out.read_text())[1:]]
    t = [r[0] for r in rows]
    v4 = [r[4] for r in rows]
    for m in (1, 2, 3):
        seg = [i for i, x in enumerate(t) if m * 20 < x < (m + 1) * 20]
        peak = max(seg, key=lambda i: v4[i])
        assert t[peak] == pytest.approx(m * 20 + 2 * m, rel=0.01)


def test_measure_markovian_point(capsys):
    assert run(["measure", "--gtd", "0.05", "--phi", "3.14159"]) == EXIT_OK
    rows = {r[0]: r[3] for r in _csv(capsys.readouterr().out)[1:] if r[0] != "interval"}
    assert float(rows["measure"]) == 0.0
    assert rows["markovian"] == "1"


def test_measure_json_has_meta_and_intervals(tmp_path):
    out = tmp_path / "m.json"
    assert run(["measure", "--gtd", "1", "--phi", "0", "--format", "json", "-o", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert set(doc) == {"meta", "data"}
    assert doc["meta"]["config"]["gtd"] == 1.0
    assert doc["data"]["verdict"] == "non-markovian"
    assert doc["data"]["intervals"]
    assert doc["data"]["measure"] == pytest.approx(sum(iv[2] for iv in doc["data"]["intervals"]))


def test_threshold_listed_phases(capsys):
    assert run(["threshold", "--phi-points", "3", "--list", "0,1.5708,3.14159"]) == EXIT_OK
    rows = _csv(capsys.readouterr().out)
    assert rows[0] == ["phi", "critical_gtd"]
    crit = [float(r[1]) for r in rows[1:]]
    assert crit[0] <= 0.01
    assert crit[1] == pytest.approx(1.4, abs=0.1)
    assert crit[2] >= 0


def test_threshold_points_mismatch_is_usage_error():
    assert run(["threshold", "--phi-points", "2", "--list", "0,1,2"]) == EXIT_USAGE


def test_spectrum_scaled_columns(capsys):
    assert run(["spectrum", "--gtd", "1", "--phi", "3.141592653589793", "--delta-min", "0", "--delta-max", "1", "--points", "2"]) == EXIT_OK
    rows = _csv(capsys.readouterr().out)
    assert rows[0] == ["delta_over_gamma", "j_pi_over_gamma"]
    assert float(rows[1][1]) == pytest.approx(1.0)


def test_sweep_matrix_layout(tmp_path):
    out = tmp_path / "grid.csv"
    code = run(["sweep", "--phi-list", "0,3.141592653589793", "--gtd-list", "0.5,2", "-o", str(out)])
    assert code == EXIT_OK
    rows = _csv(out.read_text())
    assert rows[0][0] == "gtd" and len(rows[0]) == 3
    assert [float(r[0]) for r in rows[1:]] == [0.5, 2.0]


def test_non_converged_exit_code(tmp_path):
    args = ["sweep", "--phi-list", "0.08", "--gtd-list", "30", "--max-horizon", "1000", "-o", str(tmp_path / "x.csv")]
    assert run(args) == EXIT_NOT_CONVERGED
    assert run(args + ["--allow-partial"]) == EXIT_OK


@pytest.mark.parametrize(
    "argv",
    [
        ["measure", "--gtd", "1"],
        ["measure", "--gtd", "1", "--phi", "0", "--bogus"],
        ["sweep", "--gtd-min", "2", "--gtd-max", "1"],
        ["spectrum", "--gtd", "1", "--phi", "0", "--delta-min", "1", "--delta-max", "0"],
        ["amplitude", "--gtd", "1", "--phi", "0", "--horizon", "-3"],
        ["measure", "--gtd", "1", "--phi", "0", "--classify-tol", "0"],
    ],
)
def test_usage_errors(argv):
    assert run(argv) == EXIT_USAGE


def test_unwritable_path():
    assert run(["spectrum", "--gtd", "1", "--phi", "0", "--delta-min", "0", "--delta-max", "1", "-o", "/nonexistent/dir/x.csv"]) == EXIT_USAGE


def test_round_trip_and_determinism(tmp_path):
    argv = ["amplitude", "--gtd", "0.7", "--phi", "1.1", "--horizon", "5", "--mesh-per-delay", "16"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(argv + ["-o", str(a)])
    run(argv + ["-o", str(b)])
    assert a.read_bytes() == b.read_bytes()
    for row in _csv(a.read_text())[1:]:
        for text in row:
            assert fmt(float(text)) == text


def test_sweep_identical_for_any_worker_count(tmp_path):
    base = ["sweep", "--phi-list", "0,1,2", "--gtd-list", "0.5,1.5", "--format", "json"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(base + ["--workers", "1", "-o", str(a)])
    run(base + ["--workers", "2", "-o", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_workers_from_environment(monkeypatch, tmp_path):
    from halfcavity import sweep

    seen = []
    real = sweep._map_static

    def spy(fn, jobs, workers):
        seen.append(workers)
        return real(fn, jobs, 1)

    monkeypatch.setattr(sweep, "_map_static", spy)
    monkeypatch.setenv("HALFCAVITY_WORKERS", "3")
    run(["sweep", "--phi-list", "1", "--gtd-list", "1", "-o", str(tmp_path / "w.csv")])
    assert seen == [3]


def test_fmt_is_exact():
    for x in (0.1, 1 / 3, math.pi, 1e-300, 0.0):
        assert float(fmt(x)) == x
