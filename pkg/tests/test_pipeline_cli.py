"""Pipeline orchestration, artifact writing, and the command line."""

import csv
import hashlib
import json
import logging
import shutil
import subprocess
from pathlib import Path

import numpy as np
import pytest
from helpers import make_region

from spcgrowth import (
    ContinuityMode,
    ParameterError,
    StateError,
    benchmark_check,
    build_dataset,
    emit_plot_data,
    logistic_inverse,
    run_fit_stage,
    serialize_dataset,
    write_outputs,
)
from spcgrowth.cli import main
from spcgrowth.pipeline import PipelineConfig, _config_sha256, add_bootstrap
from spcgrowth.report import plot_data_files, render_report_json, render_report_text


def write_panel(path: Path, regions) -> Path:
    path.write_text(serialize_dataset(build_dataset(regions)), encoding="utf-8")
    return path


def flat_panel(path: Path) -> Path:
    # hovers around one level; never crosses any interior threshold
    values = [0.30, 0.31, 0.29, 0.30, 0.32, 0.31]
    return write_panel(path, [make_region("Flatland", values)])


class TestPipelineConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"seed": -1},
            {"n_bootstrap": 0},
            {"n_validation": 0},
            {"k_sigma_list": (2,)},
            {"bandwidth": -1.0},
            {"bandwidth": "wide"},
            {"continuity_modes": ("cultural",)},
        ],
    )
    def test_invalid_values_rejected(self, kwargs):
        with pytest.raises(ParameterError):
            PipelineConfig(input_path="panel.csv", **kwargs)

    def test_k_sigma_list_is_deduplicated_and_sorted(self):
        config = PipelineConfig(input_path="panel.csv", k_sigma_list=(3, 1, 3))
        assert config.k_sigma_list == (1, 3)

    def test_modes_are_deduplicated_and_ordered(self):
        config = PipelineConfig(
            input_path="panel.csv",
            continuity_modes=(
                ContinuityMode.INSTITUTIONAL,
                ContinuityMode.CULTURAL,
                ContinuityMode.INSTITUTIONAL,
            ),
        )
        assert config.continuity_modes == (
            ContinuityMode.CULTURAL,
            ContinuityMode.INSTITUTIONAL,
        )

    def test_config_digest_ignores_paths_but_not_settings(self):
        base = PipelineConfig(input_path="a.csv", seed=1)
        moved = PipelineConfig(input_path="b.csv", seed=1, output_dir="out")
        reseeded = PipelineConfig(input_path="a.csv", seed=2)
        assert _config_sha256(base) == _config_sha256(moved)
        assert _config_sha256(base) != _config_sha256(reseeded)


class TestFitStage:
    def test_bundle_is_incomplete_without_inference(self, fit_bundle, tmp_path):
        assert not fit_bundle.complete
        with pytest.raises(StateError):
            write_outputs(fit_bundle, tmp_path / "out")
        with pytest.raises(StateError):
            emit_plot_data(fit_bundle, tmp_path / "out")

    def test_input_digest_matches_the_file_bytes(self, fit_bundle, noisy_panel_path):
        digest = hashlib.sha256(Path(noisy_panel_path).read_bytes()).hexdigest()
        assert fit_bundle.provenance.input_sha256 == digest

    def test_all_regions_of_the_synthetic_panel_anchor(self, fit_bundle):
        assert len(fit_bundle.aligned.regions) == 12
        assert fit_bundle.aligned.discarded == ()


class TestFullPipeline:
    def test_bundle_is_complete(self, full_bundle):
        assert full_bundle.complete
        assert full_bundle.validation is not None
        assert full_bundle.ensemble is not None
        assert full_bundle.durations is not None
        assert {ts.k_sigma for ts in full_bundle.timescales} == {1, 3}
        assert {c.mode for c in full_bundle.continuity} == set(ContinuityMode)

    def test_stage_seeds_are_distinct_streams(self, full_bundle):
        assert full_bundle.validation.seed != full_bundle.ensemble.seed

    def test_timescale_lookup(self, full_bundle):
        assert full_bundle.timescale(3).k_sigma == 3
        assert full_bundle.timescale(1).k_sigma == 1
        with pytest.raises(KeyError):
            full_bundle.timescale(5)

    def test_bootstrap_does_not_depend_on_the_validation_stage(
        self, full_bundle, noisy_panel_path
    ):
        config = PipelineConfig(
            input_path=str(noisy_panel_path), seed=0, n_bootstrap=150, n_validation=25
        )
        direct = add_bootstrap(run_fit_stage(config))
        assert direct.ensemble == full_bundle.ensemble

    def test_rerun_writes_byte_identical_outputs(self, noisy_panel_path, tmp_path):
        from spcgrowth import run_pipeline

        outputs = []
        for name in ("one", "two"):
            config = PipelineConfig(
                input_path=str(noisy_panel_path),
                seed=3,
                n_bootstrap=25,
                n_validation=5,
                output_dir=str(tmp_path / name),
            )
            run_pipeline(config)
            outputs.append(tmp_path / name)
        first = sorted(p.relative_to(outputs[0]) for p in outputs[0].rglob("*") if p.is_file())
        second = sorted(p.relative_to(outputs[1]) for p in outputs[1].rglob("*") if p.is_file())
        assert first == second
        for rel in first:
            assert (outputs[0] / rel).read_bytes() == (outputs[1] / rel).read_bytes()


class TestBenchmarkCheck:
    def test_series_sampled_from_the_fitted_curve_has_zero_divergence(
        self, full_bundle, tmp_path
    ):
        from spcgrowth import logistic_eval

        params = full_bundle.full_fit.params
        # the construction below re-anchors consistently only when the
        # fitted curve crosses the threshold within one century before 0
        tstar = logistic_inverse(params, full_bundle.threshold.spc1_0)
        assert -100 <= tstar < 0

        anchor = -300
        offsets = np.arange(-30, 41) * 100
        scaled = logistic_eval(params, offsets.astype(float))
        lo, hi = full_bundle.dataset.scale_min, full_bundle.dataset.scale_max
        raw = scaled * (hi - lo) + lo
        path = write_panel(
            tmp_path / "curve.csv",
            [make_region("Curveton", list(raw), start=int(anchor + offsets[0]))],
        )

        check = benchmark_check(full_bundle, path)
        assert check.reference_rmse == full_bundle.full_fit.rmse
        assert check.n_anchored == 1
        series = check.series[0]
        assert series.anchored and series.anchor_year == anchor
        assert series.max_abs_residual < 1e-9
        assert series.frac_beyond == 0.0

    def test_non_crossing_series_is_reported_not_rejected(self, full_bundle, tmp_path):
        lo, hi = full_bundle.dataset.scale_min, full_bundle.dataset.scale_max
        # raw values pinned near the lower plateau
        raw = [lo + 0.05 * (hi - lo) + 0.001 * i for i in range(6)]
        path = write_panel(tmp_path / "flat.csv", [make_region("Flatland", raw)])
        check = benchmark_check(full_bundle, path)
        assert check.n_anchored == 0
        series = check.series[0]
        assert not series.anchored
        assert series.anchor_year is None
        assert np.isnan(series.rmse) and np.isnan(series.frac_beyond)

    def test_held_out_region_stays_close_to_the_fit(self, noisy_panel_path, tmp_path):
        from spcgrowth import load_dataset

        ds = load_dataset(noisy_panel_path)
        kept, held = ds.regions[:-1], ds.regions[-1]
        train = write_panel(tmp_path / "train.csv", list(kept))
        held_path = write_panel(tmp_path / "held.csv", [held])
        bundle = run_fit_stage(PipelineConfig(input_path=str(train)))
        check = benchmark_check(bundle, held_path)
        series = check.series[0]
        assert series.anchored
        assert series.rmse < 3 * check.reference_rmse
        assert series.frac_beyond < 0.5


class TestPlotData:
    def test_file_inventory(self, full_bundle):
        files = plot_data_files(full_bundle)
        fixed = {
            "curves.csv",
            "kde.csv",
            "residuals.csv",
            "growth_window.csv",
            "durations.csv",
            "lengths_cultural.csv",
            "lengths_institutional.csv",
        }
        series = {k for k in files if k.startswith("series/")}
        assert set(files) == fixed | series
        assert len(series) == len(full_bundle.aligned.regions)

    def test_residual_rows_cover_every_pooled_point(self, full_bundle):
        t, _ = full_bundle.aligned.pooled()
        rows = list(csv.reader(plot_data_files(full_bundle)["residuals.csv"].splitlines()))
        assert rows[0] == ["nga", "rel_time", "scaled", "predicted", "residual"]
        assert len(rows) - 1 == t.size

    def test_growth_window_rows_pair_crossing_times_with_thresholds(self, full_bundle):
        rows = list(
            csv.reader(plot_data_files(full_bundle)["growth_window.csv"].splitlines())
        )[1:]
        assert len(rows) == 2 * len(full_bundle.timescales)
        for ts in full_bundle.timescales:
            lower = next(r for r in rows if r[0] == str(ts.k_sigma) and r[1] == "lower")
            upper = next(r for r in rows if r[0] == str(ts.k_sigma) and r[1] == "upper")
            assert float(lower[2]) == pytest.approx(ts.t1_mean, abs=1e-6)
            assert float(lower[3]) == pytest.approx(ts.th1, abs=1e-6)
            assert float(upper[2]) == pytest.approx(ts.t2_mean, abs=1e-6)
            assert float(upper[3]) == pytest.approx(ts.th2, abs=1e-6)

    def test_curve_csv_samples_full_and_continuity_fits(self, full_bundle):
        rows = list(csv.reader(plot_data_files(full_bundle)["curves.csv"].splitlines()))[1:]
        names = {r[0] for r in rows}
        assert names == {"full", "cultural", "institutional"}
        assert len(rows) == 3 * 513

    def test_write_outputs_places_reports_next_to_plot_data(self, full_bundle, tmp_path):
        out = tmp_path / "artifacts"
        written = write_outputs(full_bundle, out)
        names = {p.relative_to(out).as_posix() for p in written}
        assert "report.txt" in names and "report.json" in names
        assert "curves.csv" in names and "overview.svg" in names
        text = (out / "report.txt").read_text(encoding="utf-8")
        assert text == render_report_text(full_bundle)
        parsed = json.loads((out / "report.json").read_text(encoding="utf-8"))
        assert parsed["provenance"]["seed"] == 0
        assert (out / "report.json").read_text(encoding="utf-8") == render_report_json(
            full_bundle
        )


@pytest.fixture(autouse=True)
def _clean_cli_state(monkeypatch):
    """Isolate CLI tests from ambient environment and logging handlers."""
    for key in (
        "INPUT", "SEED", "BOOTSTRAP", "VALIDATION", "BANDWIDTH",
        "K_SIGMA", "MODES", "OUT", "REGIONS", "NOISE",
    ):
        monkeypatch.delenv("SPCGROWTH_" + key, raising=False)
    root = logging.getLogger()
    before = list(root.handlers)
    yield
    for handler in root.handlers[:]:
        if handler not in before:
            root.removeHandler(handler)


class TestCli:
    def test_fit_prints_the_report_sections(self, noisy_panel_path, capsys):
        code = main(
            ["fit", "--input", str(noisy_panel_path), "--validation", "5"]
        )
        out = capsys.readouterr().out
        assert code == 0
        assert out.startswith("social complexity growth report")
        assert "[fit]" in out and "[validation]" in out
        assert "[bootstrap]" not in out

    def test_report_writes_every_artifact(self, noisy_panel_path, tmp_path, capsys):
        out_dir = tmp_path / "run"
        code = main(
            [
                "report",
                "--input", str(noisy_panel_path),
                "--out", str(out_dir),
                "--bootstrap", "25",
                "--validation", "5",
            ]
        )
        assert code == 0
        assert f"report written to {out_dir}" in capsys.readouterr().out
        for name in ("report.txt", "report.json", "curves.csv", "growth_window.csv"):
            assert (out_dir / name).is_file()
        assert any((out_dir / "series").iterdir())

    def test_report_requires_an_output_directory(self, noisy_panel_path, capsys):
        assert main(["report", "--input", str(noisy_panel_path)]) == 2

    def test_check_reports_unanchorable_series(self, noisy_panel_path, tmp_path, capsys):
        held = flat_panel(tmp_path / "flat.csv")
        code = main(["check", "--input", str(noisy_panel_path), str(held)])
        out = capsys.readouterr().out
        assert code == 0
        assert "anchored = false" in out
        assert "n.anchored = 0" in out

    def test_missing_input_exits_2_and_writes_nothing(self, tmp_path, capsys):
        out_dir = tmp_path / "should-not-exist"
        code = main(
            ["fit", "--input", str(tmp_path / "absent.csv"), "--out", str(out_dir)]
        )
        assert code == 2
        assert not out_dir.exists()

    def test_unsupported_k_sigma_exits_2(self, noisy_panel_path):
        code = main(
            ["bootstrap", "--input", str(noisy_panel_path), "--k-sigma", "2"]
        )
        assert code == 2

    def test_unimodal_panel_exits_3(self, tmp_path):
        rng = np.random.default_rng(0)
        regions = [
            make_region(f"Mono-{i}", list(rng.normal(0.5, 0.05, 8))) for i in range(3)
        ]
        panel = write_panel(tmp_path / "mono.csv", regions)
        assert main(["fit", "--input", str(panel), "--validation", "2"]) == 3

    def test_environment_supplies_defaults_but_flags_win(
        self, noisy_panel_path, monkeypatch, capsys
    ):
        monkeypatch.setenv("SPCGROWTH_SEED", "9")
        monkeypatch.setenv("SPCGROWTH_VALIDATION", "2")
        main(["fit", "--input", str(noisy_panel_path)])
        assert "seed = 9" in capsys.readouterr().out
        main(["fit", "--input", str(noisy_panel_path), "--seed", "3"])
        assert "seed = 3" in capsys.readouterr().out

    def test_synth_is_deterministic_for_a_seed(self, capsys):
        argv = ["synth", "--regions", "3", "--noise", "0.05", "--seed", "5"]
        main(argv)
        first = capsys.readouterr().out
        main(argv)
        second = capsys.readouterr().out
        assert first == second
        assert first.startswith("NGA,PolID,AbsTime,RelTime,SPC1")

    def test_synth_writes_a_loadable_panel(self, tmp_path, capsys):
        code = main(
            ["synth", "--regions", "2", "--seed", "1", "--out", str(tmp_path)]
        )
        assert code == 0
        target = tmp_path / "synthetic.csv"
        assert target.is_file()
        from spcgrowth import load_dataset

        assert len(load_dataset(target).regions) == 2

    def test_console_script_responds_to_help(self):
        exe = shutil.which("spcgrowth")
        assert exe, "console script not installed"
        proc = subprocess.run(
            [exe, "--help"], capture_output=True, text=True, timeout=60
        )
        assert proc.returncode == 0
        for name in ("fit", "bootstrap", "continuity", "report", "check", "synth"):
            assert name in proc.stdout
