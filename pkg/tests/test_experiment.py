import math

import numpy as np
import pytest

from uhlmann import cli
from uhlmann import experiment as ex
from uhlmann.experiment import (
    CSV_COLUMNS,
    SweepConfig,
    default_grid,
    exit_code,
    parse_csv,
    report,
    resolve_noise,
    run_sweep,
    state_prep_distance_sweep,
    statistical_distance,
    stream_seed,
)


@pytest.mark.parametrize(
    "p,q,d",
    [((0.25, 0.75), (0.25, 0.75), 0.0), ((1, 0, 0), (0, 0.5, 0.5), 1.0), ((0.6, 0.4), (0.5, 0.5), 0.1)],
)
def test_statistical_distance_examples(p, q, d):
    assert statistical_distance(p, q) == pytest.approx(d, abs=1e-15)


def test_statistical_distance_rejects_bad_input():
    with pytest.raises(ValueError):
        statistical_distance((0.5, 0.4), (0.5, 0.5))
    with pytest.raises(ValueError):
        statistical_distance((1.0,), (0.5, 0.5))
    with pytest.raises(ValueError):
        statistical_distance((1.2, -0.2), (0.5, 0.5))


def test_default_grid():
    g = default_grid()
    assert g.size == 60 and g[0] == 0.01 and g[-1] < 1
    assert np.all(np.diff(g) > 0)


@pytest.mark.parametrize(
    "kw",
    [
        {"temperatures": ()},
        {"temperatures": (0.5, 0.4)},
        {"temperatures": (0.005, 0.5)},
        {"temperatures": (0.5, 1.0)},
        {"shots": 0},
        {"method": "fast"},
        {"j": 1.5},
        {"gateset": "sycamore"},
        {"expectation": "guess"},
    ],
)
def test_sweep_config_validation(kw):
    with pytest.raises(ValueError):
        SweepConfig(**kw)


def test_stream_seeds_are_distinct_and_stable():
    seeds = {stream_seed(0, i, b) for i in range(60) for b in (0, 1)}
    assert len(seeds) == 120
    assert stream_seed(5, 3, 1) == stream_seed(5, 3, 1)


def test_resolve_noise_variants(tmp_path):
    assert resolve_noise(None, "eagle") is None
    assert resolve_noise("none", "eagle") is None
    assert resolve_noise("heron", "heron").gateset == "heron"
    with pytest.raises(OSError):
        resolve_noise(tmp_path / "missing.json", "eagle")


def _half(points=6, **kw):
    return SweepConfig(0.5, tuple(default_grid(points)), **kw)


def test_sweep_is_deterministic_under_seed():
    a = run_sweep(_half(seed=3))
    b = run_sweep(_half(seed=3))
    assert [(r.sx, r.sy, r.counts_x, r.counts_y) for r in a] == [(r.sx, r.sy, r.counts_x, r.counts_y) for r in b]
    c = run_sweep(_half(seed=4))
    assert [r.counts_x for r in a] != [r.counts_x for r in c]
    for r in a:
        assert sum(r.counts_x.values()) == 2024 and sum(r.counts_y.values()) == 2024
        assert -np.pi < r.theta_circuit <= np.pi


def test_per_point_results_independent_of_grid():
    full = run_sweep(_half(12, expectation="exact"))
    part = run_sweep(SweepConfig(0.5, (full[3].T, full[7].T), expectation="exact"))
    assert part[0].sx == full[3].sx and part[1].sy == full[7].sy


def test_point_failure_is_recorded(monkeypatch):
    real = ex.compile_point

    def flaky(t, config, cache=None):
        if t > 0.5:
            raise RuntimeError("simulated backend failure")
        return real(t, config, cache)

    monkeypatch.setattr(ex, "compile_point", flaky)
    recs = run_sweep(_half(4, expectation="exact"))
    assert [r.failed for r in recs] == [False, False, True, True]
    assert "simulated backend failure" in recs[-1].status
    assert math.isnan(recs[-1].sx)
    assert exit_code(recs) == 2
    assert exit_code(recs[:2]) == 0


def test_noiseless_prep_distance_vanishes():
    rows = state_prep_distance_sweep(SweepConfig(1.0, (0.05, 0.3, 0.6, 0.9)))
    assert all(r.arbitrary <= 1e-8 and r.shannon <= 1e-8 for r in rows)


def test_report_csv_round_trip():
    recs = run_sweep(_half(5, expectation="exact"))
    text = report(recs[:1])
    assert len(text.strip().splitlines()) == 2
    rows = parse_csv(report(recs))
    assert list(rows[0]) == list(CSV_COLUMNS)
    for row, r in zip(rows, recs):
        for c in CSV_COLUMNS:
            assert row[c] == getattr(r, c)


def test_report_table_totals_match_csv():
    recs = run_sweep(_half(5, expectation="exact"))
    rows = parse_csv(report(recs))
    table = report(recs, "table").strip().splitlines()
    totals = [int(x) for x in table[-1].split()[2:]]
    assert totals == [sum(r[c] for r in rows) for c in ("gates_prep", "gates_uhlmann", "gates_meas")]
    with pytest.raises(ValueError):
        report([])
    with pytest.raises(ValueError):
        report(recs, "xml")


# -- command line ----------------------------------------------------------------
def test_cli_sweep_csv(capsys):
    code = cli.main(["sweep", "--spin", "half", "--grid", "4", "--exact"])
    assert code == 0
    rows = parse_csv(capsys.readouterr().out)
    assert len(rows) == 4
    assert rows[0]["theta_circuit"] == pytest.approx(np.pi)


def test_cli_sweep_table_to_file(tmp_path):
    out = tmp_path / "sweep.txt"
    assert cli.main(["sweep", "--spin", "half", "--grid", "3", "--shots", "100", "--format", "table", "--out", str(out)]) == 0
    assert "gate totals" in out.read_text()


def test_cli_counts_and_prep_distance(capsys):
    assert cli.main(["counts", "--spin", "half", "--grid", "3", "--method", "naive"]) == 0
    assert capsys.readouterr().out.startswith("block,gate_kind,mean_count")
    assert cli.main(["prep-distance", "--spin", "half", "--grid", "3", "--noise", "eagle"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "T,delta_s_arbitrary,delta_s_shannon" and len(lines) == 4


def test_cli_export_qasm(capsys):
    assert cli.main(["export-qasm", "--spin", "half", "--basis", "Y", "--gateset", "heron"]) == 0
    text = capsys.readouterr().out
    assert text.count("OPENQASM 3.0;") == 1
    assert "c[0] = measure q[0];" in text
    assert "qubit[3] q;" in text


def test_cli_synth_bench(capsys):
    assert cli.main(["synth-bench", "--epsilon", "1e-3"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "epsilon,cx,u3,isa_total,seconds,status"
    assert lines[1].split(",")[0] == "0.001" and lines[1].endswith("ok")


def test_cli_bad_noise_path(capsys, tmp_path):
    assert cli.main(["sweep", "--spin", "half", "--grid", "2", "--noise", str(tmp_path / "nope.json")]) == 1
    assert "error" in capsys.readouterr().err


def test_cli_rejects_unknown_flag():
    with pytest.raises(SystemExit):
        cli.main(["sweep", "--spin", "two"])
