"""Recipe registry, axis parsing, and the command-line workflow."""

import json
import os

import numpy as np
import pytest

from aecomm import cli, figures, metrics
from aecomm.errors import ConfigError, UnknownRecipeError
from aecomm.figures import RecipeContext, available_recipes, derive_seed, run_figure
from aecomm.model import load_checkpoint, save_checkpoint

ALL_RECIPES = [
    "corrections_fig1", "corrections_fig2", "fig10", "fig11", "fig12", "fig13",
    "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9",
    "table4", "table5", "table6",
]


def test_available_recipes_complete_and_sorted():
    assert available_recipes() == ALL_RECIPES


def test_unknown_recipe_lists_alternatives(tmp_path):
    ctx = RecipeContext(out_dir=str(tmp_path))
    with pytest.raises(UnknownRecipeError, match="fig9"):
        run_figure("fig99", ctx)


def test_derive_seed_is_stable_and_tag_sensitive():
    assert derive_seed(1234, "train", "fig4-m8") == derive_seed(1234, "train", "fig4-m8")
    seeds = {derive_seed(1234, "train", t) for t in ("a", "b", "c")}
    assert len(seeds) == 3
    assert all(0 <= s < 2 ** 32 for s in seeds)


def test_eval_blocks_precedence():
    ctx = RecipeContext(out_dir=".")
    assert ctx.eval_blocks == figures.DESK_BLOCKS
    assert RecipeContext(out_dir=".", paper_scale=True).eval_blocks == figures.PAPER_BLOCKS
    # explicit count beats the scale switch
    assert RecipeContext(out_dir=".", paper_scale=True, blocks=777).eval_blocks == 777


def test_trained_model_is_cached(tmp_path):
    ctx = RecipeContext(out_dir=str(tmp_path), epochs=1, train_samples=200)
    a, _ = figures.trained_model(ctx, 4, 1, 10.0, "cache-check")
    b, _ = figures.trained_model(ctx, 4, 1, 10.0, "cache-check")
    assert a is b


def test_matched_rate_report():
    def rec(snr_db, bler):
        return metrics.MetricRecord(
            scheme="onehot", snr_kind="snr_db", snr_db=snr_db, blocks=1000,
            block_errors=int(bler * 1000), bit_errors=0, bler=bler, ber=0.0,
            mse=0.0, bler_ci95=0.0, ber_ci95=0.0, low_confidence=False)

    conventional = {4: [rec(-5.0, 0.2), rec(-3.0, 0.1)],
                    8: [rec(-5.0, 0.4)]}
    rows = [
        {"snr_db": -5.0, "M1": 4, "bler": 0.02},   # 90% reduction
        {"snr_db": -3.0, "M1": 4, "bler": 0.09},   # 10% reduction
        {"snr_db": -5.0, "M1": 16, "bler": 0.5},   # no conventional M=16 curve
        {"snr_db": -1.0, "M1": 8, "bler": 0.5},    # no -1 dB point for M=8
    ]
    report = figures.matched_rate_report(rows, conventional)
    assert [p["M1"] for p in report["points"]] == [4, 4]
    assert report["points"][0]["reduction"] == pytest.approx(0.9)
    assert report["achieves_80pct"] is True
    report = figures.matched_rate_report(rows[1:2], conventional)
    assert report["achieves_80pct"] is False
    assert json.dumps(report)  # manifest-serializable


class TestParseAxis:
    def test_range_inclusive(self):
        pts = cli.parse_axis("-2:10:1")
        assert len(pts) == 13
        assert pts[0] == -2.0 and pts[-1] == 10.0

    def test_fractional_step(self):
        np.testing.assert_allclose(cli.parse_axis("0:1:0.25"),
                                   [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_single_value(self):
        assert cli.parse_axis("3") == [3.0]
        assert cli.parse_axis("-7.5") == [-7.5]

    def test_comma_list(self):
        assert cli.parse_axis("1,2,5") == [1.0, 2.0, 5.0]

    def test_errors(self):
        with pytest.raises(ConfigError, match="start:stop:step"):
            cli.parse_axis("1:2:3:4")
        with pytest.raises(ConfigError, match="positive"):
            cli.parse_axis("0:4:0")
        with pytest.raises(ConfigError, match="below start"):
            cli.parse_axis("5:1:1")
        with pytest.raises(ValueError):
            cli.parse_axis("a:b:c")


class TestTrainingFreeRecipes:
    def test_table4_matches_published_totals(self, tmp_path):
        manifest = run_figure("table4", RecipeContext(out_dir=str(tmp_path)))
        assert manifest["recipe"] == "table4"
        path = tmp_path / manifest["files"]["param_counts"]
        config, rows = metrics.read_csv(path)
        assert config["master_seed"] == "1234"
        totals = {int(r["M"]): int(r["total"]) for r in rows}
        assert totals == {4: 121, 8: 285, 16: 805, 32: 2613, 64: 9301}
        with open(tmp_path / "table4_manifest.json") as fh:
            assert json.load(fh)["files"] == manifest["files"]

    def test_table6_matches_published_rates(self, tmp_path):
        manifest = run_figure("table6", RecipeContext(out_dir=str(tmp_path)))
        _, rows = metrics.read_csv(tmp_path / manifest["files"]["data_rates"])
        got = [(r["scheme"], int(r["M"]), int(r["m"]), float(r["rate_bits_per_use"]))
               for r in rows]
        assert got == [("onehot", 8, 1, 3 / 7), ("gdr", 8, 2, 4 / 7),
                       ("gdr", 8, 3, 5 / 7), ("gdr", 8, 4, 6 / 7),
                       ("gdr", 16, 2, 6 / 7), ("onehot", 64, 1, 6 / 7)]

    def test_fig9_curves_are_exact_and_ordered(self, tmp_path):
        manifest = run_figure("fig9", RecipeContext(out_dir=str(tmp_path)))
        assert set(manifest["files"]) == {
            "m8_order1", "m8_order2", "m8_order3", "m8_order4",
            "m16_order2", "m64_order1", "m64_order2",
        }
        _, rows = metrics.read_csv(tmp_path / manifest["files"]["m8_order1"])
        rates = [float(r["rate_bits_s_hz"]) for r in rows]
        assert len(rates) == 11
        assert all(b >= a for a, b in zip(rates, rates[1:]))
        # closed form at 0 dB for one-hot M=8: log2(1 + 2 * 1 * 3/7)
        assert rates[0] == pytest.approx(np.log2(1 + 6 / 7), rel=1e-12)


def run_cli(*argv):
    return cli.main([str(a) for a in argv])


class TestCliWorkflow:
    def test_figure_list(self, capsys):
        assert run_cli("figure", "--list") == 0
        out = capsys.readouterr().out
        for name in ALL_RECIPES:
            assert f"{name}:" in out

    def test_figure_without_name_fails(self, capsys, tmp_path):
        assert run_cli("figure", "--out-dir", tmp_path) == 2
        err = capsys.readouterr().err
        assert err.startswith("error: ConfigError:") and err.count("\n") == 1

    def test_figure_unknown_recipe_exit_code(self, capsys, tmp_path):
        assert run_cli("figure", "fig99", "--out-dir", tmp_path) == 2
        assert "error: UnknownRecipeError:" in capsys.readouterr().err

    def test_figure_recipe_runs(self, capsys, tmp_path):
        assert run_cli("figure", "table6", "--out-dir", tmp_path) == 0
        assert (tmp_path / "table6_manifest.json").exists()

    def test_train_evaluate_round_trip(self, capsys, tmp_path):
        ckpt = tmp_path / "m4.ckpt"
        trace = tmp_path / "trace.csv"
        code = run_cli("train", "--M", 4, "--epochs", 2, "--train-samples", 400,
                       "--snr-db", 10, "--seed", 0, "--out", ckpt,
                       "--trace-out", trace)
        assert code == 0
        assert "final loss" in capsys.readouterr().out
        _, trace_rows = metrics.read_csv(trace)
        assert [r["epoch"] for r in trace_rows] == ["1", "2"]

        out_a = tmp_path / "a.csv"
        out_b = tmp_path / "b.csv"
        for out in (out_a, out_b):
            code = run_cli("evaluate", "--checkpoint", ckpt, "--ebn0", "-2:10:1",
                           "--blocks", 200, "--seed", 7, "--out", out)
            assert code == 0
        config, rows = metrics.read_csv(out_a)
        assert len(rows) == 13
        assert config["axis"] == "ebn0_db"
        assert [float(r["snr_db"]) for r in rows] == cli.parse_axis("-2:10:1")
        assert list(rows[0]) == list(metrics.EVALUATE_COLUMNS)
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_evaluate_requires_exactly_one_axis(self, capsys, tmp_path):
        ckpt = tmp_path / "m4.ckpt"
        run_cli("train", "--M", 4, "--epochs", 1, "--train-samples", 200,
                "--snr-db", 10, "--seed", 0, "--out", ckpt)
        capsys.readouterr()
        assert run_cli("evaluate", "--checkpoint", ckpt, "--out",
                       tmp_path / "x.csv") == 2
        assert "exactly one of ebn0 or snr" in capsys.readouterr().err
        assert run_cli("evaluate", "--checkpoint", ckpt, "--ebn0", "0", "--snr",
                       "0", "--out", tmp_path / "x.csv") == 2

    def test_missing_checkpoint_is_one_line_error(self, capsys, tmp_path):
        assert run_cli("evaluate", "--checkpoint", tmp_path / "nope.ckpt",
                       "--ebn0", "0") == 2
        err = capsys.readouterr().err
        assert err.startswith("error: FileNotFoundError:")
        assert err.count("\n") == 1

    def test_train_rejects_m_for_onehot(self, capsys, tmp_path):
        assert run_cli("train", "--codebook", "onehot", "--m", 2,
                       "--out", tmp_path / "x.ckpt") == 2
        assert "error: ConfigError: m must be 1" in capsys.readouterr().err

    def test_baseline_sweep(self, capsys, tmp_path):
        out = tmp_path / "base.csv"
        assert run_cli("baseline", "--scheme", "uncoded_bpsk", "--ebn0", "0,4",
                       "--blocks", 2000, "--out", out) == 0
        _, rows = metrics.read_csv(out)
        assert [r["scheme"] for r in rows] == ["uncoded_bpsk"] * 2
        assert float(rows[0]["ber"]) > float(rows[1]["ber"])

    def test_adaptive_subcommand(self, capsys, tmp_path):
        ckpt = tmp_path / "gdr.ckpt"
        run_cli("train", "--codebook", "gdr", "--M", 8, "--m", 4, "--epochs", 2,
                "--train-samples", 400, "--snr-db", 5, "--seed", 0, "--out", ckpt)
        out = tmp_path / "adaptive.csv"
        code = run_cli("adaptive", "--checkpoint", ckpt, "--snr", "-5:5:2",
                       "--threshold", 10.0, "--probes", 1, "--blocks", 500,
                       "--out", out)
        assert code == 0
        _, rows = metrics.read_csv(out)
        assert len(rows) == 6
        assert list(rows[0]) == list(metrics.ADAPTIVE_COLUMNS)
        # a huge threshold admits every entry: full codebook, no outage
        assert {r["M1"] for r in rows} == {"64"}
        assert {r["outage"] for r in rows} == {"0"}

    def test_adaptive_rejects_small_codebook(self, capsys, tmp_path):
        ckpt = tmp_path / "m4.ckpt"
        run_cli("train", "--M", 4, "--epochs", 1, "--train-samples", 200,
                "--snr-db", 10, "--seed", 0, "--out", ckpt)
        capsys.readouterr()
        assert run_cli("adaptive", "--checkpoint", ckpt, "--snr", "0") == 2
        assert "error: DomainError:" in capsys.readouterr().err

    def test_analyze_subcommand(self, model_zoo, capsys, tmp_path):
        model, _ = model_zoo(4, 1, 10.0, seed=2)
        ckpt = tmp_path / "m4.ckpt"
        save_checkpoint(model, str(ckpt))
        out = tmp_path / "analysis.csv"
        assert run_cli("analyze", "--checkpoint", ckpt, "--sigma2", "0.01,0.05",
                       "--samples", 5000, "--out", out) == 0
        _, rows = metrics.read_csv(out)
        assert [float(r["sigma2"]) for r in rows] == [0.01, 0.05]
        # noise term scales linearly with sigma2
        ratio = float(rows[1]["noise_term"]) / float(rows[0]["noise_term"])
        assert ratio == pytest.approx(5.0, rel=1e-9)


class TestConfigFile:
    def write_config(self, tmp_path, payload):
        path = tmp_path / "config.json"
        path.write_text(json.dumps(payload))
        return path

    def test_config_supplies_defaults_and_flags_override(self, capsys, tmp_path):
        ckpt = tmp_path / "m4.ckpt"
        run_cli("train", "--M", 4, "--epochs", 1, "--train-samples", 200,
                "--snr-db", 10, "--seed", 0, "--out", ckpt)
        cfg = self.write_config(tmp_path, {"blocks": 500, "ebn0": "0,4"})
        out = tmp_path / "from_config.csv"
        assert run_cli("evaluate", "--config", cfg, "--checkpoint", ckpt,
                       "--out", out) == 0
        config, rows = metrics.read_csv(out)
        assert len(rows) == 2 and config["blocks"] == "500"

        out2 = tmp_path / "flag_wins.csv"
        assert run_cli("evaluate", "--config", cfg, "--checkpoint", ckpt,
                       "--blocks", 800, "--out", out2) == 0
        config, _ = metrics.read_csv(out2)
        assert config["blocks"] == "800"

    def test_unknown_config_key_names_field(self, capsys, tmp_path):
        cfg = self.write_config(tmp_path, {"bogus": 1})
        assert run_cli("evaluate", "--config", cfg, "--checkpoint", "x",
                       "--ebn0", "0") == 2
        assert "'bogus'" in capsys.readouterr().err

    def test_invalid_json_is_reported(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{nope")
        assert run_cli("evaluate", "--config", path, "--checkpoint", "x",
                       "--ebn0", "0") == 2
        assert "not valid JSON" in capsys.readouterr().err


def test_checkpoint_survives_cli_round_trip(tmp_path, capsys):
    """The CLI-written checkpoint reloads to the same trained weights."""
    ckpt = tmp_path / "gdr16.ckpt"
    run_cli("train", "--codebook", "gdr", "--M", 16, "--m", 2, "--epochs", 2,
            "--train-samples", 400, "--snr-db", 5, "--seed", 3,
            "--selection", "random", "--selection-seed", 11, "--out", ckpt)
    model = load_checkpoint(str(ckpt))
    assert model.codebook.M == 16 and model.codebook.m == 2
    assert model.codebook.selection == "random"
    assert model.codebook.selection_seed == 11
    assert len(model.codebook) == 64
