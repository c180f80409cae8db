"""Experiment-harness plumbing: spec validation, config round-trips,
deterministic CSV emission, sweep layout, presets, and CLI exit codes.

Solver correctness is tested elsewhere; here the oracles are the emitted
artifacts themselves (byte equality, parse-back equality, layout).
"""

import math
import os

import numpy as np
import pytest

from chdd.cli import main as cli_main
from chdd.core import Params
from chdd.harness import (
    AMPLITUDE_DN_COMPLEX,
    AMPLITUDE_DN_REAL,
    AMPLITUDE_EXPONENT,
    AMPLITUDE_NN,
    ExperimentSpec,
    SpecError,
    build_geometry,
    config_text,
    curve_csv,
    emit_plot_script,
    parse_config,
    preset_specs,
    run,
    run_preset,
    scaled_traces,
    series_csv,
    spec_from_config,
    spec_from_report,
    sweep,
    table_amplitude,
    table_csv,
)

QUICK_DN = dict(method="dn", domain=(0.0, 1.0), breakpoints=(0.5,),
                theta=0.3, h=1 / 32, delta_t=1e-3)


# ----------------------------------------------------------------- validation

def test_spec_validation_rejects_bad_fields():
    for kw in (dict(method="fish"), dict(dimension=3), dict(tol=0.0),
               dict(theta=1.0), dict(h=-1.0), dict(epsilon=0.0),
               dict(max_iter=0), dict(initial_state="sine"),
               dict(method="dn", breakpoints=(0.3, 0.6)),
               dict(method="nn", breakpoints=None, n_subdomains=1),
               dict(dimension=2, domain=(0.0, 1.0)),
               dict(dimension=2, domain=(0.0, 1.0, 0.0, 1.0), h_y=None)):
        with pytest.raises(SpecError):
            ExperimentSpec(**kw)


def test_spec_defaults_match_contract():
    spec = ExperimentSpec()
    assert spec.epsilon == 0.01
    assert spec.tol == 1e-6
    assert spec.max_iter == 500


# -------------------------------------------------------------- config files

def test_config_round_trip_1d():
    spec = ExperimentSpec(**QUICK_DN, seed=11, amplitude=3.5)
    back = spec_from_config(parse_config(config_text(spec)))
    assert back == spec


def test_config_round_trip_2d_and_none_fields():
    spec = ExperimentSpec(method="nn", dimension=2,
                          domain=(0.0, 4.0, 0.0, 1.0), n_subdomains=4,
                          h=1 / 16, h_y=1 / 16, delta_t=1e-6, theta=0.25)
    back = spec_from_config(parse_config(config_text(spec)))
    assert back == spec
    assert back.breakpoints is None
    assert back.amplitude is None


def test_config_rejects_unknown_keys():
    with pytest.raises(SpecError):
        spec_from_config({"method": "dn", "thETA": "0.5"})


def test_config_comments_and_blank_lines():
    cfg = parse_config("# a comment\n\nmethod = nn  # trailing\n n_subdomains = 4\n")
    assert cfg == {"method": "nn", "n_subdomains": "4"}


def test_report_metadata_round_trips():
    spec = ExperimentSpec(**QUICK_DN, seed=4)
    text = curve_csv(run(spec))
    assert spec_from_report(text) == spec


# ---------------------------------------------------------------- csv output

def test_curve_csv_deterministic_modulo_walltime():
    spec = ExperimentSpec(**QUICK_DN, seed=9)
    a = curve_csv(run(spec)).splitlines()
    b = curve_csv(run(spec)).splitlines()
    strip = lambda lines: [ln for ln in lines if "walltime" not in ln]
    assert strip(a) == strip(b)
    assert any("walltime_s" in ln for ln in a)


def test_curve_csv_layout_and_precision():
    rep = run(ExperimentSpec(**QUICK_DN))
    lines = curve_csv(rep).splitlines()
    header = [ln for ln in lines if not ln.startswith("#")][0]
    assert header.split(",")[:2] == ["k", "error"]
    assert "\r" not in curve_csv(rep)
    first = [ln for ln in lines if not ln.startswith("#")][1]
    k, err = first.split(",")[:2]
    assert k == "1"
    # 17 significant digits: value survives a text round trip exactly
    assert float(err) == rep.errors[0]


def test_iteration_count_semantics():
    rep = run(ExperimentSpec(**QUICK_DN))
    assert rep.converged
    assert rep.iterations == len(rep.errors)
    assert rep.errors[-1] <= 1e-6 < rep.errors[-2]


def test_table_csv_layout_and_max_iter_entries():
    spec = ExperimentSpec(**QUICK_DN, max_iter=3)
    rows = sweep(spec, {"theta": [0.5, 0.1]})
    text = table_csv(rows, spec)
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    assert body[0] == "h,theta_or_sd,dt,iters"
    assert len(body) == 3
    assert body[1].endswith(",2")       # theta=0.5 converges immediately
    assert body[2].endswith(",3+")      # theta=0.1 cannot finish in 3
    assert rows[1]["iters"] == "3+"


def test_sweep_empty_grid_gives_header_only_csv():
    spec = ExperimentSpec(**QUICK_DN)
    rows = sweep(spec, {"h": []})
    text = table_csv(rows, spec)
    assert [ln for ln in text.splitlines() if not ln.startswith("#")] == \
        ["h,theta_or_sd,dt,iters"]


def test_series_csv_for_monodomain():
    spec = ExperimentSpec(method="monodomain", domain=(0.0, 1.0), h=1 / 32,
                          delta_t=1e-3, steps=5, seed=2)
    rep = run(spec)
    body = [ln for ln in series_csv(rep).splitlines() if not ln.startswith("#")]
    assert body[0] == "step,mass,energy"
    assert len(body) == 7               # header + steps+1 states
    assert rep.series["energy"].size == 6


# -------------------------------------------------------------- plot scripts

def test_plot_script_refuses_without_bounds():
    # many-subdomain runs in the complex-root regime carry no bound columns
    spec = ExperimentSpec(method="nn", domain=(0.0, 2.0), n_subdomains=4,
                          h=1 / 32, delta_t=1e-6, theta=0.25)
    rep = run(spec)
    assert not rep.bounds
    with pytest.raises(SpecError):
        emit_plot_script(rep, "x.csv")


def test_plot_script_references_csv_and_bounds():
    rep = run(ExperimentSpec(**dict(QUICK_DN, theta=0.5), tol=1e-12))
    assert "bound_alpha" in rep.bounds
    script = emit_plot_script(rep, "curve.csv")
    assert "curve.csv" in script and "logscale" in script


# ------------------------------------------------------- amplitude convention

def test_table_amplitude_regimes_and_growth():
    real = Params(0.01, 1e-3)
    cplx = Params(0.01, 1e-6)
    h = 1 / 64
    assert table_amplitude(h, real) == AMPLITUDE_DN_REAL * h ** -AMPLITUDE_EXPONENT
    assert table_amplitude(h, cplx) == AMPLITUDE_DN_COMPLEX * h ** -AMPLITUDE_EXPONENT
    assert table_amplitude(h, real, "nn") == AMPLITUDE_NN * h ** -AMPLITUDE_EXPONENT
    assert table_amplitude(h / 4, real) > table_amplitude(h, real)


def test_scaled_traces_start_exactly_at_amplitude():
    spec = ExperimentSpec(**QUICK_DN, seed=5)
    _, dec = build_geometry(spec)
    tr, amp = scaled_traces(dec, spec)
    assert math.isclose(np.max(np.abs(tr.g)), amp, rel_tol=1e-15)
    rep = run(spec)
    assert math.isclose(rep.errors[0], amp, rel_tol=1e-12)


def test_default_seed_first_error_equals_amplitude():
    # the count calibration rests on this: with the preset seed the first
    # glued iterate's max error coincides with the trace amplitude
    for dt in (1e-6, 1e-3):
        for h in (1 / 64, 1 / 256):
            rep = run(ExperimentSpec(**dict(QUICK_DN, h=h, delta_t=dt)))
            assert math.isclose(rep.errors[0], rep.amplitude, rel_tol=1e-12)
    nn = ExperimentSpec(method="nn", domain=(0.0, 20.0), n_subdomains=8,
                        h=1 / 64, delta_t=1e-3, theta=0.25)
    rep = run(nn)
    assert math.isclose(rep.errors[0], rep.amplitude, rel_tol=1e-12)


# -------------------------------------------------------------------- presets

def test_preset_names_resolve():
    for name in ("table1", "table2", "table3", "table4", "table5", "table6",
                 "fig-dn", "fig-nn-32sd", "fig-nn-64sd", "mono-demo"):
        thing, vary = preset_specs(name)
        assert thing is not None
    with pytest.raises(SpecError):
        preset_specs("table99")


def test_table1_preset_shape():
    spec, vary = preset_specs("table1")
    assert spec.method == "dn" and spec.domain == (0.0, 1.0)
    assert len(vary["theta"]) == 9 and len(vary["h"]) == 4 and len(vary["delta_t"]) == 2


def test_mono_demo_preset_writes_mass_energy(tmp_path):
    code, files = run_preset("mono-demo", str(tmp_path))
    assert code == 0 and len(files) == 2
    for f in files:
        head = open(f).read()
        assert "step,mass,energy" in head


def test_fig_nn_preset_writes_bounds_and_script(tmp_path):
    code, files = run_preset("fig-nn-32sd", str(tmp_path))
    assert code == 0
    csvs = [f for f in files if f.endswith(".csv")]
    gps = [f for f in files if f.endswith(".gp")]
    assert len(csvs) == 1 and len(gps) == 1
    text = open(csvs[0]).read()
    assert "bound_alpha" in text and "bound_beta" in text


# ------------------------------------------------------------------------ cli

def test_cli_single_run_exit_zero(tmp_path):
    code = cli_main(["dn", "--domain", "0,1", "--split", "0.5",
                     "--theta", "0.5", "--h", "0.03125", "--dt", "1e-3",
                     "--out", str(tmp_path)])
    assert code == 0
    assert os.path.exists(tmp_path / "dn-run.csv")


def test_cli_nonconvergence_exit_one(tmp_path):
    code = cli_main(["dn", "--theta", "0.1", "--max-iter", "3",
                     "--out", str(tmp_path)])
    assert code == 1


def test_cli_invalid_spec_exit_two(tmp_path, capsys):
    assert cli_main(["dn", "--theta", "1.5", "--out", str(tmp_path)]) == 2
    assert cli_main(["nn", "--sd", "1", "--out", str(tmp_path)]) == 2
    assert cli_main(["--out", str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err


def test_cli_config_file_with_overrides(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("method = dn\ndomain = 0,1\nbreakpoints = 0.5\n"
                   "theta = 0.4\nh = 0.03125\ndelta_t = 0.001\n")
    code = cli_main(["dn", "--config", str(cfg), "--theta", "0.5",
                     "--out", str(tmp_path)])
    assert code == 0
    spec = spec_from_report(open(tmp_path / "dn-run.csv").read())
    assert spec.theta == 0.5            # flag wins over file
    assert spec.h == 0.03125            # file wins over default
