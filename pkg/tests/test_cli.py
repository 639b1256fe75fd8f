import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from attenuation import cli
from attenuation.config import parse_config, parse_config_text, parse_grid
from attenuation.errors import ParseError, UnresolvedName
from attenuation.output import csv_text, emit_csv, format_value, parse_value, read_csv, svg_chart
from attenuation.report import ExperimentReport


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# ------------------------------------------------------------ config


def test_shipped_figure1_config():
    cfg = parse_config("figure1")
    specs = sorted(d.canonical() for d in cfg.densities.values())
    assert specs == ["normal(0,1)", "normal(0,1.5)"]
    assert cfg.experiment("imprecise").noise.name == "normal(0,1.5)"
    assert cfg.grids["signals"].size == 25


def test_empty_config_lists_required_sections():
    with pytest.raises(ParseError) as info:
        parse_config_text("", "empty.cfg")
    msg = str(info.value)
    assert "[densities]" in msg and "[experiments]" in msg


def test_undefined_density_named():
    text = "[densities]\nn = normal(0,1)\n[experiments]\ne = n, missing\n"
    with pytest.raises(UnresolvedName) as info:
        parse_config_text(text, "bad.cfg")
    assert "'missing'" in str(info.value) and "bad.cfg:4" in str(info.value)


def test_all_problems_collected_with_lines():
    text = ("[densities]\nn = normal(0,-1)\nm = normal(0,1)\n[experiments]\ne = m\n"
            "[grids]\ns = linear(1,0,5)\n[tolerances]\nrel_tol = abc\n[outputs]\nformat = png\n")
    with pytest.raises(ParseError) as info:
        parse_config_text(text, "multi.cfg")
    problems = info.value.problems
    assert len(problems) == 5
    assert [p.split(":")[1] for p in problems] == ["2", "5", "7", "9", "11"]


@pytest.mark.parametrize("text,expected", [
    ("linear(0, 1, 3)", [0.0, 0.5, 1.0]),
    ("log(1, 100, 3)", [1.0, 10.0, 100.0]),
    ("-1, 0, 2.5", [-1.0, 0.0, 2.5]),
])
def test_parse_grid(text, expected):
    np.testing.assert_allclose(parse_grid(text), expected, rtol=1e-15)


@pytest.mark.parametrize("text", ["", "1, 1", "3, 2", "linear(0,1)"])
def test_parse_grid_rejects(text):
    with pytest.raises((ValueError, ParseError)):
        parse_grid(text)


# ------------------------------------------------------------ CSV and SVG


@settings(max_examples=200, deadline=None)
@given(st.floats(allow_nan=False))
def test_float_round_trip_bit_exact(v):
    assert parse_value(format_value(v)) == v
    assert math.copysign(1.0, parse_value(format_value(v))) == math.copysign(1.0, v)


def test_csv_round_trip(tmp_path):
    rows = [(0.1, 1 / 3, True, "ok"), (-1e-300, math.inf, False, "degenerate"), (2.0, math.pi, True, "a,b")]
    rep = ExperimentReport("t", {}, ("s", "posterior_mean", "pass", "status"), rows=rows)
    header, back = read_csv(emit_csv(rep, tmp_path / "t.csv"))
    assert header == list(rep.columns)
    assert back == [list(r) for r in rows]
    assert (tmp_path / "t.csv").read_text().endswith("\n")


def test_csv_nan_token():
    assert csv_text(("a",), [(math.nan,)]) == "a\nnan\n"
    assert math.isnan(parse_value("nan"))


def test_empty_svg_has_axes_only():
    svg = svg_chart([], title="empty")
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert "<polyline" not in svg and "<rect" in svg


def test_svg_deterministic():
    x = np.linspace(-3, 3, 31)
    series = [("a", x, np.exp(-x ** 2)), ("b", x, np.exp(-x ** 2 / 2))]
    assert svg_chart(series, hlines=(0.0,)) == svg_chart(series, hlines=(0.0,))


# ------------------------------------------------------------ commands and exit codes


def test_check_precision_verdicts(capsys, tmp_path):
    code, out, _ = run(capsys, "check-precision", "--a", "normal(0,1.5)", "--b", "normal(0,1)")
    assert code == 0 and "LessPrecise" in out
    prof = tmp_path / "p.csv"
    code, out, _ = run(capsys, "check-precision", "--tilde", "doubleexponential(0,1)", "--eps", "normal(0,1)",
                       "--profile", str(prof))
    assert "Incomparable" in out and "ratio decreasing on" in out
    header, rows = read_csv(prof)
    assert header == ["x", "log_ratio", "slope"] and len(rows) == 4096


def test_posterior_command(capsys):
    code, out, _ = run(capsys, "posterior", "--prior", "normal(0,1)", "--noise", "normal(0,1)", "--signal", "2")
    assert code == 0 and "= 1" in out


def test_sweep_columns(capsys, tmp_path):
    code, _, _ = run(capsys, "sweep", "--prior", "normal(0,1)", "--noise", "logistic(0,1)", "--grid",
                     "linear(-2,2,5)", "--out", str(tmp_path))
    header, rows = read_csv(tmp_path / "sweep.csv")
    assert code == 0 and header == ["s", "posterior_mean", "Z", "status"] and len(rows) == 5


def test_average_with_monte_carlo(capsys):
    code, out, _ = run(capsys, "average", "--prior", "normal(0,1)", "--noise", "normal(0,1)", "--believed",
                       "normal(0,0.5)", "--state", "2", "--draws", "20000", "--seed", "4")
    assert code == 0 and "= 1.59999999" in out and "Monte Carlo" in out


def test_compare_confidence_writes_columns(capsys, tmp_path):
    code, _, _ = run(capsys, "compare-confidence", "--prior", "normal(0,1)", "--noise", "normal(0,1)",
                     "--believed-a", "normal(0,0.5)", "--believed-b", "normal(0,1)", "--states", "0, 2",
                     "--out", str(tmp_path))
    header, rows = read_csv(tmp_path / "compare_confidence.csv")
    assert code == 0 and header == ["x", "value_A", "value_B", "margin", "pass"]
    assert rows[1][1] == pytest.approx(1.6, abs=1e-6)


def test_precondition_failure_exit_one(capsys):
    code, _, err = run(capsys, "compare-prior", "--prior-a", "normal(0,1)", "--prior-b", "normal(0,2)",
                       "--noise", "normal(0,1)", "--states", "1")
    assert code == 1 and "failed" in err


def test_counterexample_commands(capsys):
    code, out, _ = run(capsys, "counterexample", "--eps", "normal(0,1)", "--tilde", "doubleexponential(0,1)")
    assert code == 0 and "settled" in out
    code, _, _ = run(capsys, "counterexample", "--eps", "normal(0,1)", "--tilde", "normal(0,2)")
    assert code == 1


def test_config_errors_exit_two(capsys, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("")
    assert run(capsys, "verify", "--config", str(bad))[0] == 2
    assert run(capsys, "posterior", "--prior", "normal(0,-1)", "--noise", "normal(0,1)", "--signal", "0")[0] == 2
    assert run(capsys, "posterior", "--prior", "normal(0,1)", "--noise", "normal(1,1)", "--signal", "0")[0] == 2
    assert run(capsys, "verify", "--suite", "nope")[0] == 2


def test_numerical_failure_exit_three(capsys):
    code, _, err = run(capsys, "posterior", "--prior", "normal(0,1)", "--noise", "normal(0,1)", "--signal", "1000")
    assert code == 3 and "numerical failure" in err


def test_plot_figure1(capsys, tmp_path):
    code, _, _ = run(capsys, "plot", "--config", "figure1", "--out", str(tmp_path))
    assert code == 0
    svg = (tmp_path / "densities.svg").read_text()
    assert svg.count("<polyline") == 2
    assert (tmp_path / "posterior_means.svg").read_text().count("<polyline") == 2


def test_figure1_density_peaks(D):
    # the more precise density sits higher at 0
    assert D("normal(0,1)").pdf(0.0) > D("normal(0,1.5)").pdf(0.0)


def test_verify_deterministic_outputs(capsys, tmp_path):
    args = ("verify", "--config", "figure1", "--suite", "betweenness,attenuation,duality", "--format", "both")
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        assert run(capsys, *args, "--out", str(d))[0] == 0
        outs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    assert outs[0] == outs[1]
    assert "summary.csv" in outs[0] and any(n.endswith(".svg") for n in outs[0])
