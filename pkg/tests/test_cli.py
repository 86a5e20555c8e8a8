import csv
import json

import numpy as np
import pytest

from fockssh import ConfigError, ScenarioConfig, load_config
from fockssh.cli import main
from fockssh.config import parse_config_text
from fockssh.scenarios import build_table, emit_figure_bundle, render
from fockssh.validation import CheckResult


def read_csv(path):
    lines = [l for l in open(path) if not l.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]


# ---------------------------------------------------------------------------
# config documents


def test_parse_typed_values():
    values = parse_config_text(
        """
        # broken-phase block
        scenario = spectrum_nh
        J1 = 1
        gamma = 0.5     # broken phase
        n_max = none
        gammas = 0.1, 0.2
        n_inits = 10,20
        timestamp = yes
        """
    )
    assert values == {
        "scenario": "spectrum_nh",
        "J1": 1.0,
        "gamma": 0.5,
        "n_max": None,
        "gammas": [0.1, 0.2],
        "n_inits": [10, 20],
        "timestamp": True,
    }


@pytest.mark.parametrize(
    "text, match",
    [
        ("gamma = 0.1\nJ3 = 2\n", r"<config>:2: unknown field 'J3'"),
        ("\n\nsamples = many\n", r"<config>:3: field 'samples' expects int"),
        ("gamma 0.1\n", r"<config>:1: expected 'key = value'"),
    ],
)
def test_parse_errors_name_line_and_field(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config_text(text)


def test_semantic_validation():
    with pytest.raises(ConfigError, match="samples"):
        ScenarioConfig(scenario="evolve", samples=1).validate()
    with pytest.raises(ConfigError, match="nonempty"):
        ScenarioConfig(scenario="stabilization_sweep").validate()
    with pytest.raises(ConfigError, match="scenario"):
        ScenarioConfig(scenario="plot").validate()


def test_load_config_overrides(tmp_path):
    doc = tmp_path / "run.cfg"
    doc.write_text("scenario = evolve\ngamma = 0.15\nt_end = 10\n")
    cfg = load_config(doc, {"gamma": 0.25})
    assert cfg.gamma == 0.25 and cfg.t_end == 10.0 and cfg.scenario == "evolve"
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.cfg")


# ---------------------------------------------------------------------------
# scenarios


def test_spectrum_nh_broken_phase_table():
    table = build_table(ScenarioConfig(scenario="spectrum_nh", gamma=0.5))
    assert table.columns == ["n", "branch", "re_e", "im_e"]
    rows = [r for r in table.rows if r[1] in "+-"]
    imaginary = sorted({n for n, b, re, im in rows if im != 0})
    assert imaginary == [0, 1, 2, 3, 4, 5]
    assert all(abs(im) < 0.5 for _, _, _, im in rows)
    assert table.rows[0] == (0, "bound", 0.0, 0.5)


def test_spectrum_hermitian_single_zero_record():
    table = build_table(ScenarioConfig(scenario="spectrum_hermitian", n_levels=51))
    assert [r[1] for r in table.rows].count("zero") == 1
    assert len(table.rows) == 103
    assert table.rows[-1][2] == pytest.approx(-0.2 * np.sqrt(51))


def test_evolve_time_series_contract():
    cfg = ScenarioConfig(scenario="evolve", gamma=0.15, init_n=10, init_spin="up", t_end=80, samples=161)
    table = build_table(cfg)
    assert table.columns[:4] == ["t", "mean_n", "entropy", "p_bound"]
    assert table.columns[-1] == "entropy_ln2"
    assert all(c.startswith("p_mode_") for c in table.columns[4:-1])
    mean_n = np.array([r[1] for r in table.rows])
    s = np.array([r[2] for r in table.rows])
    assert mean_n[0] == pytest.approx(10.0)
    peaks = lambda x: np.sum((x[1:-1] > x[:-2]) & (x[1:-1] >= x[2:]))
    assert peaks(mean_n) >= 3 and peaks(s) >= 3
    np.testing.assert_allclose([r[-1] for r in table.rows], s / np.log(2))
    assert table.config.n_max == 448  # resolved default echoed


def test_evolve_oracle_matches_analytic_output():
    base = dict(scenario="evolve", gamma=0.25, init_n=4, init_spin="down", t_end=20, samples=11, n_max=300)
    a = build_table(ScenarioConfig(**base))
    b = build_table(ScenarioConfig(propagator="oracle", **base))
    np.testing.assert_allclose(np.array([r[1:3] for r in a.rows]), np.array([r[1:3] for r in b.rows]), atol=1e-9)


def test_coherent_initial_state():
    table = build_table(ScenarioConfig(scenario="evolve", gamma=0.3, init="coherent", t_end=5, samples=3))
    np.testing.assert_allclose([r[1] for r in table.rows], 25.0, rtol=1e-10)
    np.testing.assert_allclose([r[3] for r in table.rows], 1.0, atol=1e-12)


def test_sweep_table_marks_unreached():
    cfg = ScenarioConfig(scenario="stabilization_sweep", gammas=[0.2], n_inits=[10], init_spin="up")
    assert build_table(cfg).rows == [(0.2, 10, pytest.approx(float("nan"), nan_ok=True), 0)]


def test_render_is_deterministic_and_echoes_config():
    cfg = ScenarioConfig(scenario="eigenstate_entropy", gammas=[0.1, 0.3], n_levels=2)
    text = render(build_table(cfg))
    assert text == render(build_table(cfg))
    assert "#: gammas = 0.1, 0.3" in text
    assert "generated" not in text
    assert "generated" in render(build_table(cfg), timestamp=True)


def test_json_output_round_trip(tmp_path):
    cfg = ScenarioConfig(scenario="zero_mode", J1=0.1, J2=0.2, format="json")
    path = tmp_path / "z.json"
    path.write_text(render(build_table(cfg), "json"))
    doc = json.loads(path.read_text())
    assert doc["columns"] == ["n", "p"]
    assert doc["rows"][0][1] == pytest.approx(np.exp(-0.25))
    again = load_config(path)
    assert again.n_max == 128 and again.J1 == 0.1


# ---------------------------------------------------------------------------
# command line


def test_cli_spectrum_and_echo_rerun(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["spectrum", "--kind", "nh", "--gamma", "0.5", "--n-levels", "10", "--output", str(out)]) == 0
    out2 = tmp_path / "s2.csv"
    assert main(["spectrum", "--config", str(out), "--output", str(out2)]) == 0
    assert read_csv(out) == read_csv(out2)


def test_cli_evolve_rerun_is_byte_identical(tmp_path, capsys):
    args = ["evolve", "--gamma", "0.15", "--init-n", "10", "--init-spin", "up", "--t-end", "20", "--samples", "21"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    assert capsys.readouterr().out == first
    a = tmp_path / "a.csv"
    assert main(args + ["--output", str(a)]) == 0
    c = tmp_path / "c.csv"
    assert main(["evolve", "--config", str(a), "--output", str(c)]) == 0
    assert read_csv(a) == read_csv(c)


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["evolve", "--gamma", "abc"]) == 1
    assert "expects float" in capsys.readouterr().err
    assert main(["evolve", "--bogus", "1"]) == 1
    assert main(["evolve", "--n-max", "20", "--init-n", "50"]) == 2
    assert "scenario evolve" in capsys.readouterr().err
    bad = tmp_path / "bad.cfg"
    bad.write_text("gamma = 0.1\nsamples = x\n")
    assert main(["evolve", "--config", str(bad)]) == 1
    assert "bad.cfg:2" in capsys.readouterr().err


def test_cli_sweep_and_entropy(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["sweep-tau", "--gammas", "0.2", "--n-inits", "10", "--output", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["gamma", "n_init", "tau", "reached"]
    assert rows[0][3] == "1" and 40 < float(rows[0][2]) < 80
    out = tmp_path / "e.csv"
    assert main(["entropy", "--gammas", "0.1,0.4,0.6", "--n-levels", "4", "--output", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["gamma", "n", "branch", "entropy", "entropy_ln2"]
    assert len(rows) == 2 * 4 * 3 - 2  # the EP at gamma=0.4, n=3 is skipped
    assert "exceptional points skipped" in out.read_text()


def test_cli_validate_failure_maps_to_exit_3(monkeypatch, capsys):
    import fockssh.validation as validation

    bad = CheckResult("fake", "forced failure", 1.0, 0.0, False)
    monkeypatch.setattr(validation, "run_all", lambda selection=None: [(1, "forced", [bad])])
    assert main(["validate"]) == 3
    out = capsys.readouterr().out
    assert "[FAIL] fake" in out and "SOME CHECKS FAILED" in out


def test_figure_bundle_fig2(tmp_path):
    files = emit_figure_bundle("fig2", tmp_path)
    assert [f.name for f in files] == [f"fig2_{p}.csv" for p in "abcde"]
    header, rows = read_csv(tmp_path / "fig2_c.csv")
    assert header == ["site", "p_left", "p_right"]
    header, rows = read_csv(tmp_path / "fig2_e.csv")
    p = np.array([float(r[1]) for r in rows])
    assert int(np.argmax(p)) in (15, 16)
    # panel a sweeps J1/J2 and flags edge modes only below the transition
    header, rows = read_csv(tmp_path / "fig2_a.csv")
    edge_ratios = {float(r[0]) for r in rows if r[2] == "edge"}
    assert edge_ratios and max(edge_ratios) < 1.0


def test_figure_bundle_figA1(tmp_path):
    (path,) = emit_figure_bundle("figA1", tmp_path)
    header, rows = read_csv(path)
    assert header == ["gamma", "n", "branch", "entropy", "entropy_ln2"]
    assert {int(r[1]) for r in rows} == set(range(6))
