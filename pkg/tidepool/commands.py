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
"""The pipeline stages behind each tidepool subcommand.

Each stage reads its inputs from the work directory (or from files named in
the config), writes its artifacts back there under fixed names and raises a
TidepoolError on failure. Exit codes are `tidepool.main`'s business.

"""

import dataclasses
import json
import sys
from typing import IO, Optional

from absl import logging

import tidepool.artifacts as a
import tidepool.config as conf
import tidepool.features as f
import tidepool.ingest as i
import tidepool.net.core as c
import tidepool.net.serialize as ns
import tidepool.plot as p
import tidepool.sentiment as s
import tidepool.textprep as tp
import tidepool.train_eval as te
import tidepool.util as u

Artifact = a.Artifact


def _workdir(cfg: conf.RunConfig) -> str:
  return u.ensure_directory(cfg.workdir)


def _out(cfg: conf.RunConfig, artifact: Artifact) -> str:
  return a.path_for(_workdir(cfg), artifact)


def _in(cfg: conf.RunConfig, artifact: Artifact) -> str:
  return a.require(_workdir(cfg), artifact)


def _wrote(path: str, what: str) -> None:
  logging.info(u.t.green("Wrote {} to {}".format(what, path)))


def cmd_clean(cfg: conf.RunConfig) -> str:
  conf.require(cfg, "tweets")

  tweets = i.load_tweets(cfg.tweets)
  aggs = tp.aggregate_tweets(tweets, cfg.top_k)

  path = _out(cfg, Artifact.CLEAN)
  tp.write_aggregates(aggs, path)
  _wrote(path, "{} daily aggregates from {} tweets".format(
      len(aggs), len(tweets)))
  return path


def cmd_sentiment(cfg: conf.RunConfig) -> str:
  aggs = tp.load_aggregates(_in(cfg, Artifact.CLEAN))
  scorer = s.LexiconScorer(s.load_lexicon(cfg.lexicon), cfg.sentiment_scale)
  scores, failures = s.score_days(aggs, scorer)

  path = _out(cfg, Artifact.SENTIMENT)
  s.write_scores(scores, path)
  _wrote(path, "scores for {} days".format(len(scores)))
  if failures:
    logging.warning(
        u.t.yellow("{} day(s) failed to score and were set uniform.".format(
            len(failures))))
  return path


def cmd_features(cfg: conf.RunConfig) -> str:
  conf.require(cfg, "bars")

  bars = i.load_bars(cfg.bars)
  scores = s.load_scores(_in(cfg, Artifact.SENTIMENT))
  rows, _ = f.build_rows(bars, scores)
  scaler = f.fit_scaler(rows, cfg.scaler_mode, cfg.train_fraction)

  # Fails here, not at train time, if there are too few rows to split.
  f.split(f.transform(rows, scaler, cfg.train_fraction))

  path = _out(cfg, Artifact.FEATURES)
  f.write_rows(rows, path)
  f.save_scaler(scaler, _out(cfg, Artifact.SCALER))
  _wrote(path, "{} feature rows".format(len(rows)))
  return path


def _dataset(cfg: conf.RunConfig):
  rows = f.load_rows(_in(cfg, Artifact.FEATURES))
  scaler = f.load_scaler(_in(cfg, Artifact.SCALER))
  return rows, scaler, f.transform(rows, scaler, cfg.train_fraction)


def cmd_train(cfg: conf.RunConfig, file: Optional[IO[str]] = None) -> str:
  conf.require(cfg, "seed")
  tcfg = cfg.train_config()

  _, _, ds = _dataset(cfg)
  model, history = te.train(ds, tcfg, file=file)
  logging.info("\n" + c.format_summary(c.summary(model, f.TIME_STEPS)))

  path = _out(cfg, Artifact.MODEL)
  ns.save_model(model, path, seed=tcfg.seed)
  te.write_history(history,
                   _out(cfg, Artifact.HISTORY),
                   record_timing=tcfg.record_timing)

  last = history[-1]
  _wrote(
      path, "model after {} epochs (loss {:.4f}, val_loss {:.4f})".format(
          last.epoch, last.train_loss, last.val_loss))
  return path


def cmd_eval(cfg: conf.RunConfig) -> str:
  model, seed = ns.load_model(_in(cfg, Artifact.MODEL))
  rows, scaler, ds = _dataset(cfg)

  report = te.evaluate(model, ds, scaler, rows)
  te.write_predictions(report.series, _out(cfg, Artifact.PREDICTIONS))

  tcfg = dataclasses.replace(cfg.train_config(), seed=seed)
  path = _out(cfg, Artifact.REPORT)
  te.write_report(report, tcfg, path)

  logging.info(
      u.t.green("Test MAE: {:.4f} over {} days".format(report.mae_price,
                                                       len(report.series))))
  for name, r in report.pearson.items():
    logging.info("  pearson({}, Close) = {}".format(
        name, "undefined" if r is None else "{:.4f}".format(r)))

  _wrote(path, "evaluation report")
  return path


def cmd_predict(cfg: conf.RunConfig, file: Optional[IO[str]] = None) -> float:
  conf.require(cfg, "bars")
  file = file or sys.stdout

  model, _ = ns.load_model(_in(cfg, Artifact.MODEL))
  scaler = f.load_scaler(_in(cfg, Artifact.SCALER))
  scores = s.load_scores(_in(cfg, Artifact.SENTIMENT))

  last_date, predictors = f.latest_predictors(i.load_bars(cfg.bars), scores)
  price = te.predict_next(model, predictors, scaler)

  path = _out(cfg, Artifact.FORECAST)
  te.write_forecast(last_date, price, path)
  print("{:.4f}".format(price), file=file)
  _wrote(path, "forecast for the session after {}".format(last_date))
  return price


def cmd_plot(cfg: conf.RunConfig, kind: p.PlotKind) -> p.PlotOutput:
  source = _in(cfg, p.SOURCE[p.PlotKind(kind)])
  return p.plot(kind, source, _workdir(cfg))


def cmd_config(cfg: conf.RunConfig, file: Optional[IO[str]] = None) -> None:
  file = file or sys.stdout
  print(json.dumps(cfg.to_dict(), indent=2, sort_keys=True), file=file)


def cmd_pipeline(cfg: conf.RunConfig, file: Optional[IO[str]] = None) -> None:
  """clean -> sentiment -> features -> train -> eval."""
  conf.require(cfg, "tweets", "bars", "seed")

  cmd_clean(cfg)
  cmd_sentiment(cfg)
  cmd_features(cfg)
  cmd_train(cfg, file=file)
  cmd_eval(cfg)
