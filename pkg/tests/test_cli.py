"""End-to-end tests of the dmfc command group through click's test runner."""

import json
import os

import click
import pytest
from click.testing import CliRunner

from app import create_app
from app.cli import COMMANDS
from app.cli.base import default_map_from


@pytest.fixture(scope="module")
def app():
    return create_app("testing")


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


def invoke(app, runner, *args):
    return runner.invoke(app, [str(a) for a in args])


def summary(result):
    assert result.exit_code == 0, result.stderr
    return json.loads(result.stdout.strip().splitlines()[-1])


@pytest.fixture(scope="module")
def model_path(app, runner, data_dir, tmp_path_factory):
    path = tmp_path_factory.mktemp("models") / "model.dmfc"
    summary(invoke(app, runner, "build", "--data", data_dir, "--out", path, "--rank", "auto"))
    return str(path)


class TestSurface:

    @pytest.mark.parametrize("command", [c.name for c in COMMANDS])
    def test_help(self, app, runner, command):
        result = invoke(app, runner, command, "--help")
        assert result.exit_code == 0
        assert "Usage" in result.stdout

    def test_unknown_flag_is_a_usage_error(self, app, runner):
        assert invoke(app, runner, "build", "--no-such-flag").exit_code == 2

    def test_missing_required_flag(self, app, runner):
        assert invoke(app, runner, "sample", "--out", "x").exit_code == 2

    def test_version(self, app, runner):
        result = invoke(app, runner, "--version")
        assert result.exit_code == 0
        assert "dmfc" in result.stdout

    def test_missing_model_is_a_data_error(self, app, runner, tmp_path):
        result = invoke(app, runner, "sample", "--model", tmp_path / "absent.dmfc", "--out", tmp_path / "out")
        assert result.exit_code == 3
        error = json.loads(result.stderr.strip().splitlines()[-1])
        assert error["error"] == "DataError"


class TestPipeline:

    def test_gen_data(self, app, runner, tmp_path):
        out = summary(invoke(app, runner, "gen-data", "--preset", "small", "--out", tmp_path,
                             "--resolution", 0, "--spacing", 2, "--no-held-out"))
        assert out["counts"] == {"train": 12}
        assert os.path.exists(tmp_path / "dataset.json")
        assert os.path.exists(tmp_path / "train" / "joint_000" / "volume.raw")

    def test_build_summary(self, app, runner, data_dir, tmp_path):
        out = summary(invoke(app, runner, "build", "--data", data_dir, "--out", tmp_path / "m.dmfc",
                             "--pose-mode", "sr", "--reference", "template", "--rank", 3))
        assert out["rank"] == 3
        assert out["pose_mode"] == "sr"
        assert out["n_train"] == 12

    def test_mean_sample_is_byte_reproducible(self, app, runner, model_path, tmp_path):
        for name in ("a", "b"):
            summary(invoke(app, runner, "sample", "--model", model_path, "--out", tmp_path / name, "--theta", "0"))
        for filename in ("lollipop1.ply", "lollipop2_surface.ply", "instance.json"):
            assert (tmp_path / "a" / filename).read_bytes() == (tmp_path / "b" / filename).read_bytes()

    def test_sample_along_a_geodesic_with_rendering(self, app, runner, model_path, tmp_path):
        out = summary(invoke(app, runner, "sample", "--model", model_path, "--out", tmp_path,
                             "--pg", 0, "--sd", 2, "--render", "--axis", "y"))
        assert out["theta"][0] == 2.0
        assert os.path.exists(out["drr"])

    def test_sample_from_joint(self, app, runner, model_path, data_dir, tmp_path):
        joint = os.path.join(data_dir, "train", "joint_002")
        out = summary(invoke(app, runner, "sample", "--model", model_path, "--out", tmp_path, "--from-joint", joint))
        assert any(abs(t) > 0 for t in out["theta"])

    def test_conflicting_sample_sources(self, app, runner, model_path, tmp_path):
        result = invoke(app, runner, "sample", "--model", model_path, "--out", tmp_path, "--theta", "1", "--pg", 0)
        assert result.exit_code == 3

    def test_marginalize(self, app, runner, model_path, tmp_path):
        out = summary(invoke(app, runner, "marginalize", "--model", model_path, "--out", tmp_path / "m.dmfc",
                             "--objects", "lollipop1", "--classes", "shape"))
        assert out["objects"] == ["lollipop1"]

    def test_posterior(self, app, runner, model_path, tmp_path):
        records = [{"object": "lollipop2", "landmark": 0, "channel": "intensity", "value": [4.0]}]
        (tmp_path / "obs.json").write_text(json.dumps(records))
        out = summary(invoke(app, runner, "posterior", "--model", model_path, "--observations",
                             tmp_path / "obs.json", "--out", tmp_path / "post.dmfc"))
        assert out["observations"] == 1

    def test_permute(self, app, runner, data_dir, tmp_path):
        out = summary(invoke(app, runner, "permute", "--data", data_dir, "--out", tmp_path / "p.dmfc",
                             "--rank", 4))
        assert out["n_train"] == 144

    def test_fit_to_a_volume(self, app, runner, model_path, data_dir, tmp_path):
        joint = os.path.join(data_dir, "train", "joint_000")
        out = summary(invoke(app, runner, "fit", "--model", model_path, "--observation", joint,
                             "--iterations", 20, "--chains", 2, "--seed", 1, "--out", tmp_path))
        assert "chains" not in out
        assert set(out["intensity_rms"]) == {"lollipop1", "lollipop2", "lollipop3"}
        report = json.loads((tmp_path / "fit_report.json").read_text())
        assert len(report["chains"]) == 2
        assert report["start"] == "geodesic"

    def test_fit_from_the_mean(self, app, runner, model_path, data_dir, tmp_path):
        joint = os.path.join(data_dir, "train", "joint_000")
        summary(invoke(app, runner, "fit", "--model", model_path, "--observation", joint,
                       "--iterations", 20, "--start", "mean", "--out", tmp_path))
        report = json.loads((tmp_path / "fit_report.json").read_text())
        assert report["start"] == "mean"
        assert report["chains"][0]["iterations"] == 20

    def test_unknown_chain_start(self, app, runner, model_path, data_dir, tmp_path):
        joint = os.path.join(data_dir, "train", "joint_000")
        result = invoke(app, runner, "fit", "--model", model_path, "--observation", joint,
                        "--iterations", 5, "--start", "median", "--out", tmp_path)
        assert result.exit_code == 2

    def test_eval_correlations(self, app, runner, model_path, data_dir, tmp_path):
        out = summary(invoke(app, runner, "eval-correlations", "--model", model_path, "--samples", 5,
                             "--data", data_dir, "--out", tmp_path))
        assert set(out["table"]) == {"model", "training", "published_model", "published_training"}
        assert os.path.exists(tmp_path / "correlations.csv")

    def test_eval_specgen(self, app, runner, model_path, data_dir, tmp_path):
        out = summary(invoke(app, runner, "eval-specgen", "--model", model_path, "--data", data_dir,
                             "--samples", 3, "--iterations", 5, "--out", tmp_path))
        assert out["specificity"]["n"] == 3
        assert set(out["generality"]) == {"lollipop1", "lollipop2", "lollipop3"}

    def test_project_drr(self, app, runner, data_dir, tmp_path):
        volume = os.path.join(data_dir, "train", "joint_000", "volume.raw")
        out = summary(invoke(app, runner, "project-drr", "--volume", volume, "--out", tmp_path / "drr.npy"))
        assert out["axis"] == "x"
        assert out["max"] == pytest.approx(1.0)

    def test_train_all(self, app, runner, data_dir, tmp_path):
        out = summary(invoke(app, runner, "train-all", "--data", data_dir, "--out", tmp_path, "--rank", 4))
        assert out["best"] in out["models"]
        assert os.path.exists(tmp_path / "model.dmfc")
        assert os.path.exists(tmp_path / "model_comparison.json")


class TestConfigFile:

    def drr(self, app, runner, data_dir, tmp_path, *extra):
        volume = os.path.join(data_dir, "train", "joint_000", "volume.raw")
        return invoke(app, runner, "--config", tmp_path / "dmfc.json",
                      "project-drr", "--volume", volume, "--out", tmp_path / "drr.npy", *extra)

    def test_config_file_sets_defaults(self, app, runner, data_dir, tmp_path):
        (tmp_path / "dmfc.json").write_text(json.dumps({"project-drr": {"axis": "y"}}))
        assert summary(self.drr(app, runner, data_dir, tmp_path))["axis"] == "y"

    def test_command_line_wins(self, app, runner, data_dir, tmp_path):
        (tmp_path / "dmfc.json").write_text(json.dumps({"project-drr": {"axis": "y"}}))
        assert summary(self.drr(app, runner, data_dir, tmp_path, "--axis", "z"))["axis"] == "z"

    def test_unknown_command_in_config(self, app, runner, data_dir, tmp_path):
        (tmp_path / "dmfc.json").write_text(json.dumps({"no-such-command": {"axis": "y"}}))
        assert self.drr(app, runner, data_dir, tmp_path).exit_code == 3

    def test_default_map_from(self):
        @click.group()
        def group():
            pass

        @group.command("first")
        @click.option("--seed", type=int)
        @click.option("--n-jobs", type=int)
        def first(seed, n_jobs):
            pass

        @group.command("second")
        @click.option("--seed", type=int)
        def second(seed):
            pass

        default_map = default_map_from({"seed": 3, "first": {"n-jobs": 2}, "unused": 1}, group)
        assert default_map == {"first": {"seed": 3, "n_jobs": 2}, "second": {"seed": 3}}
