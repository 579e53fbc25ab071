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
"""Static SVG line charts of the stage artifacts.

Every chart comes with a CSV of exactly the points it draws. Output is
byte-stable: the SVG id salt is fixed, no creation date is embedded, text
stays text and paths are never simplified. Each plotted line carries a gid so
the series can be found in the SVG.

"""

import datetime
import os
from enum import Enum
from typing import List, NamedTuple, Sequence, Tuple

import matplotlib as mpl

mpl.use('Agg')

import matplotlib.pyplot as plt
import pandas as pd
from absl import logging

import tidepool.artifacts as a
import tidepool.errors as e
import tidepool.sentiment as s
import tidepool.train_eval as te
import tidepool.util as u


class PlotKind(str, Enum):
  LOSS = 'loss'
  PREDICTION = 'prediction'
  SENTIMENT_RATE = 'sentiment_rate'


# Artifact each plot reads.
SOURCE = {
    PlotKind.LOSS: a.Artifact.HISTORY,
    PlotKind.PREDICTION: a.Artifact.PREDICTIONS,
    PlotKind.SENTIMENT_RATE: a.Artifact.SENTIMENT,
}

STYLE = {
    "svg.hashsalt": "tidepool",
    "svg.fonttype": "none",
    "path.simplify": False,
    "figure.figsize": [8.0, 4.5],
    "font.size": 9,
    "axes.grid": True,
    "grid.linewidth": 0.4,
    "lines.linewidth": 1.2,
    "legend.fontsize": 8,
}

Series = NamedTuple("Series", [("gid", str), ("label", str),
                               ("values", List[float])])

Chart = NamedTuple("Chart", [("title", str), ("xlabel", str),
                             ("ylabel", str), ("x", list),
                             ("series", List[Series])])

PlotOutput = NamedTuple("PlotOutput", [("svg", str), ("csv", str)])


def output_paths(out_dir: str, kind: PlotKind) -> PlotOutput:
  base = os.path.join(out_dir, "plot_{}".format(PlotKind(kind).value))
  return PlotOutput(svg=base + ".svg", csv=base + ".csv")


# ----------------------------------------------------------------------------
# Charts


def loss_chart(history: Sequence[te.EpochRecord]) -> Chart:
  return Chart(title="Train loss and test loss",
               xlabel="epoch",
               ylabel="MAE (scaled)",
               x=[r.epoch for r in history],
               series=[
                   Series("train_loss", "train", [r.train_loss for r in history]),
                   Series("val_loss", "test", [r.val_loss for r in history]),
               ])


def prediction_chart(points: Sequence[te.PredictionPoint]) -> Chart:
  return Chart(title="Actual vs predicted",
               xlabel="date",
               ylabel="close",
               x=[p.date for p in points],
               series=[
                   Series("actual", "actual", [p.actual for p in points]),
                   Series("predicted", "predicted",
                          [p.predicted for p in points]),
               ])


def sentiment_rate_chart(
    scores: Sequence[Tuple[datetime.date, s.SentimentScores]]) -> Chart:
  """Daily positive and negative probabilities."""
  return Chart(title="Positive / negative rate",
               xlabel="date",
               ylabel="probability",
               x=[d for d, _ in scores],
               series=[
                   Series("positive", "positive",
                          [sc.positive for _, sc in scores]),
                   Series("negative", "negative",
                          [sc.negative for _, sc in scores]),
               ])


def load_chart(kind: PlotKind, path: str) -> Chart:
  """Reads the source artifact of `kind` and builds its chart."""
  kind = PlotKind(kind)
  if kind == PlotKind.LOSS:
    chart = loss_chart(te.load_history(path))
  elif kind == PlotKind.PREDICTION:
    chart = prediction_chart(te.load_predictions(path))
  else:
    scores = s.load_scores(path)
    chart = sentiment_rate_chart([(d, scores[d]) for d in sorted(scores)])

  if len(chart.x) == 0:
    raise e.EmptySeries(path)
  return chart


# ----------------------------------------------------------------------------
# Output


def _x_value(x):
  return x.isoformat() if isinstance(x, datetime.date) else x


def write_points(chart: Chart, path: str) -> None:
  columns = [chart.xlabel] + [sr.gid for sr in chart.series]
  df = pd.DataFrame([[_x_value(x)] + [sr.values[k] for sr in chart.series]
                     for k, x in enumerate(chart.x)],
                    columns=columns)
  df.to_csv(path,
            index=False,
            float_format=u.FLOAT_FORMAT,
            lineterminator="\n",
            encoding="utf-8")


def render_svg(chart: Chart, path: str) -> None:
  if len(chart.x) == 0:
    raise e.EmptySeries(path)

  with mpl.rc_context(STYLE):
    fig, ax = plt.subplots()
    try:
      for sr in chart.series:
        line, = ax.plot(chart.x, sr.values, label=sr.label)
        line.set_gid(sr.gid)

      ax.set_title(chart.title)
      ax.set_xlabel(chart.xlabel)
      ax.set_ylabel(chart.ylabel)
      ax.legend(loc="best")
      if isinstance(chart.x[0], datetime.date):
        fig.autofmt_xdate()

      fig.savefig(path, format="svg", metadata={"Date": None})
    finally:
      plt.close(fig)


def plot(kind: PlotKind, source: str, out_dir: str) -> PlotOutput:
  """Renders the chart for `kind` from its source artifact into out_dir."""
  chart = load_chart(kind, source)
  out = output_paths(out_dir, kind)
  render_svg(chart, out.svg)
  write_points(chart, out.csv)
  logging.info(u.t.green("Wrote {} ({} points).".format(out.svg,
                                                        len(chart.x))))
  return out
