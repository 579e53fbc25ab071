#!/usr/bin/python
#
# Copyright 2026 The Tidepool Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import os

import pytest

import tidepool.artifacts as a
import tidepool.cli as cli
import tidepool.commands as cmd
import tidepool.config as conf
import tidepool.errors as e
import tidepool.features as f
import tidepool.main as m
import tidepool.plot as p

# A pipeline small enough to run in a couple of seconds.
FAST = ["--seed", "42", "--epochs", "3", "--units", "4", "--layers", "2"]


def run(*args) -> int:
  return m.run_app(cli.parse_flags(["tidepool"] + list(args)))


def data_flags(bars_csv, tweets_csv, workdir):
  return ["--bars", bars_csv, "--tweets", tweets_csv, "--workdir", str(workdir)]


# ----------------------------------------------------------------------------
# Parsing


def test_help_exits_zero(capsys):
  with pytest.raises(SystemExit) as exc:
    cli.parse_flags(["tidepool", "--help"])
  assert exc.value.code == 0
  assert "pipeline" in capsys.readouterr().out

  with pytest.raises(SystemExit) as exc:
    cli.parse_flags(["tidepool", "train", "--help"])
  assert exc.value.code == 0
  assert "(default: 100)" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    [],
    ["fly"],
    ["train", "--epochs", "0"],
    ["train", "--seed", "-3"],
    ["train", "--verbose", "5"],
    ["features", "--train_fraction", "1.5"],
    ["features", "--scaler_mode", "half"],
    ["clean", "--tweets", "/no/such/file.csv"],
    ["plot", "histogram"],
    ["clean", "--ticker", "tsla"],
])
def test_usage_errors_exit_one(argv):
  with pytest.raises(SystemExit) as exc:
    cli.parse_flags(["tidepool"] + argv)
  assert exc.value.code == 1


def test_flags_default_to_none():
  args = vars(cli.parse_flags(["tidepool", "train"]))
  assert args["command"] == "train"
  for key in ["epochs", "seed", "lr", "units", "record_timing", "workdir"]:
    assert args[key] is None, key


def test_parsed_values():
  args = cli.parse_flags([
      "tidepool", "features", "--scaler_mode", "train_only",
      "--train_fraction", "0.75", "--ticker", "TSLA"
  ])
  assert args.scaler_mode == f.ScalerMode.TRAIN_ONLY
  assert args.train_fraction == 0.75
  assert args.ticker == "TSLA"

  args = cli.parse_flags(["tidepool", "plot", "loss"])
  assert args.kind == p.PlotKind.LOSS


# ----------------------------------------------------------------------------
# Running stages


def test_config_echo(tmp_path, capsys):
  cfg_file = tmp_path / "run.yaml"
  cfg_file.write_text("epochs: 9\nlr: 0.01\n")

  assert run("config", "--config", str(cfg_file), "--epochs", "4",
             "--workdir", str(tmp_path)) == 0
  echoed = json.loads(capsys.readouterr().out)
  assert echoed["epochs"] == 4
  assert echoed["lr"] == 0.01
  assert echoed["workdir"] == str(tmp_path)
  assert set(echoed) == set(conf.FIELDS)


def test_bad_config_file_exits_one(tmp_path):
  cfg_file = tmp_path / "run.yaml"
  cfg_file.write_text("epochz: 9\n")
  assert run("config", "--config", str(cfg_file)) == 1


def test_missing_inputs(tmp_path):
  assert run("train", "--seed", "1", "--workdir", str(tmp_path)) == 2
  assert run("sentiment", "--workdir", str(tmp_path)) == 2
  assert run("clean", "--workdir", str(tmp_path)) == 1

  with pytest.raises(e.MissingArtifact) as exc:
    cmd.cmd_eval(conf.RunConfig(workdir=str(tmp_path)))
  assert "model.json" in exc.value.message
  assert "tidepool train" in exc.value.message


def test_train_needs_seed(bars_csv, tweets_csv, tmp_path):
  flags = data_flags(bars_csv, tweets_csv, tmp_path)
  assert run("clean", *flags[2:]) == 0
  assert run("sentiment", "--workdir", str(tmp_path)) == 0
  assert run("features", *flags[:2], "--workdir", str(tmp_path)) == 0
  assert run("train", "--workdir", str(tmp_path)) == 1


def test_features_too_few_rows(tmp_path, tweets_csv):
  bars = tmp_path / "bars.csv"
  bars.write_text("Date,Open,High,Low,Close,Adj Close,Volume\n"
                  "2023-03-01,10,11,9,10,10,100\n"
                  "2023-03-02,10,11,9,10,10,100\n"
                  "2023-03-03,10,11,9,10,10,100\n")
  work = tmp_path / "work"
  assert run("clean", "--tweets", tweets_csv, "--workdir", str(work)) == 0
  assert run("sentiment", "--workdir", str(work)) == 0
  assert run("features", "--bars", str(bars), "--workdir", str(work)) == 2


def test_full_pipeline(bars_csv, tweets_csv, tmp_path, capsys):
  work = tmp_path / "run1"
  assert run("pipeline", *data_flags(bars_csv, tweets_csv, work), *FAST) == 0

  for artifact in [
      a.Artifact.CLEAN, a.Artifact.SENTIMENT, a.Artifact.FEATURES,
      a.Artifact.SCALER, a.Artifact.MODEL, a.Artifact.HISTORY,
      a.Artifact.PREDICTIONS, a.Artifact.REPORT
  ]:
    assert os.path.isfile(a.path_for(str(work), artifact)), artifact

  report = a.read_json(a.path_for(str(work), a.Artifact.REPORT))
  assert report["seed"] == 42
  assert report["n_test"] == 4
  assert report["config"]["epochs"] == 3

  capsys.readouterr()
  assert run("predict", "--bars", bars_csv, "--workdir", str(work)) == 0
  printed = capsys.readouterr().out.strip()
  forecast = a.read_json(a.path_for(str(work), a.Artifact.FORECAST))
  assert printed == "{:.4f}".format(forecast["predicted_close"])
  assert forecast["last_bar_date"] == "2023-03-29"

  for kind in p.PlotKind:
    assert run("plot", kind.value, "--workdir", str(work)) == 0
    assert os.path.isfile(p.output_paths(str(work), kind).svg)


def test_pipeline_is_byte_identical(bars_csv, tweets_csv, tmp_path):
  runs = []
  for name in ["one", "two"]:
    work = tmp_path / name
    assert run("pipeline", *data_flags(bars_csv, tweets_csv, work),
               *FAST) == 0
    runs.append(work)

  for artifact in a.Artifact:
    if artifact == a.Artifact.FORECAST:
      continue
    one = (runs[0] / artifact.value).read_bytes()
    two = (runs[1] / artifact.value).read_bytes()
    assert one == two, artifact

  # Re-running a stage in place overwrites with the same bytes.
  before = (runs[0] / "history.csv").read_bytes()
  assert run("train", "--workdir", str(runs[0]), *FAST) == 0
  assert (runs[0] / "history.csv").read_bytes() == before


def test_numerical_failure_exits_three(monkeypatch, tmp_path):

  def diverge(cfg, file=None):
    raise e.NonFiniteLoss(1, 2, float("nan"))

  monkeypatch.setattr(cmd, "cmd_train", diverge)
  assert run("train", "--seed", "1", "--workdir", str(tmp_path)) == 3


def test_os_errors_exit_two(monkeypatch, tmp_path):

  def unwritable(cfg):
    raise PermissionError(13, "Permission denied", cfg.workdir)

  monkeypatch.setattr(cmd, "cmd_sentiment", unwritable)
  assert run("sentiment", "--workdir", str(tmp_path)) == 2
