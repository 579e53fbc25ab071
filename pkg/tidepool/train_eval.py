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
"""Training loop, evaluation in price units, correlation reports and the
history / predictions / report artifacts.

Batches are chronological and the last one may be short. Each batch takes one
Adam step, and every epoch ends with an eval-mode pass over the test split.
Nothing is shuffled; a fixed seed reproduces the whole run bit for bit.

"""

import contextlib
import dataclasses
import datetime
import math
import sys
import time
from dataclasses import dataclass
from typing import IO, Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import tqdm
from absl import logging

import tidepool.artifacts as a
import tidepool.errors as e
import tidepool.features as f
import tidepool.net.adam as adam
import tidepool.net.core as c
import tidepool.net.types as nt
import tidepool.util as u

REPORT_KIND = "tidepool.report"
FORECAST_KIND = "tidepool.forecast"

HISTORY_COLUMNS = ["epoch", "train_loss", "val_loss", "wall_ms"]
PREDICTION_COLUMNS = ["date", "actual", "predicted"]

VERBOSITY = (0, 1, 2)


@dataclass(frozen=True)
class TrainConfig(object):
  """Everything that shapes a training run. Validated on construction."""
  epochs: int = 100
  batch_size: int = 4
  train_fraction: float = f.DEFAULT_TRAIN_FRACTION
  seed: Optional[int] = None
  lr: float = adam.DEFAULT_LR
  beta1: float = adam.DEFAULT_BETA1
  beta2: float = adam.DEFAULT_BETA2
  epsilon: float = adam.DEFAULT_EPSILON
  dropout_rate: float = 0.2
  units: int = nt.DEFAULT_DIMS.units
  layers: int = nt.DEFAULT_DIMS.n_layers
  scaler_mode: f.ScalerMode = f.ScalerMode.FULL
  verbose: int = 0
  record_timing: bool = False

  def __post_init__(self):
    object.__setattr__(self, "scaler_mode", f.ScalerMode(self.scaler_mode))

    problems = []
    if self.epochs < 1:
      problems.append("epochs must be >= 1")
    if self.batch_size < 1:
      problems.append("batch_size must be >= 1")
    if not 0.0 < self.train_fraction < 1.0:
      problems.append("train_fraction must lie in (0, 1)")
    if self.seed is not None and not 0 <= self.seed < 2**64:
      problems.append("seed must be an unsigned 64-bit integer")
    if not self.lr > 0:
      problems.append("lr must be > 0")
    if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
      problems.append("beta1 and beta2 must lie in [0, 1)")
    if not self.epsilon > 0:
      problems.append("epsilon must be > 0")
    if not 0.0 <= self.dropout_rate < 1.0:
      problems.append("dropout_rate must lie in [0, 1)")
    if self.units < 1 or self.layers < 1:
      problems.append("units and layers must be >= 1")
    if self.verbose not in VERBOSITY:
      problems.append("verbose must be one of {}".format(VERBOSITY))

    if problems:
      raise e.UsageError("Invalid training config: {}".format(
          "; ".join(problems)))

  def to_dict(self) -> Dict[str, Any]:
    ret = dataclasses.asdict(self)
    ret["scaler_mode"] = self.scaler_mode.value
    return ret


EpochRecord = NamedTuple("EpochRecord", [("epoch", int),
                                         ("train_loss", float),
                                         ("val_loss", float),
                                         ("wall_ms", float)])

PredictionPoint = NamedTuple("PredictionPoint", [("date", datetime.date),
                                                 ("actual", float),
                                                 ("predicted", float)])

# Correlations are None where a column (or close itself) is constant.
PearsonMap = Dict[str, Optional[float]]

EvalReport = NamedTuple("EvalReport", [("mae_price", float),
                                       ("series", List[PredictionPoint]),
                                       ("pearson", PearsonMap)])

# ----------------------------------------------------------------------------
# Training


def batch_bounds(n: int, batch_size: int) -> List[Tuple[int, int]]:
  """Chronological [start, end) bounds; the final batch may be short.

  >>> batch_bounds(10, 4)
  [(0, 4), (4, 8), (8, 10)]

  """
  return [(s, min(s + batch_size, n)) for s in range(0, n, batch_size)]


def validation_loss(params: nt.ModelParams, ds: f.Dataset) -> float:
  y_hat = c.predict(params, ds.X)
  loss, _ = c.mae_loss(y_hat, ds.y)
  return loss


def _epoch_line(n_batches: int, train_loss: float, val_loss: float,
                wall_ms: float) -> str:
  return ("{b}/{b} - loss: {l:.4f} - val_loss: {v:.4f} - {t}ms/epoch - "
          "{s}ms/step").format(b=n_batches,
                               l=train_loss,
                               v=val_loss,
                               t=int(round(wall_ms)),
                               s=int(round(wall_ms / n_batches)))


def train(ds: f.Dataset,
          cfg: TrainConfig,
          file: Optional[IO[str]] = None
         ) -> Tuple[nt.ModelParams, List[EpochRecord]]:
  """Trains a fresh model on the training split of ds, validating on the test
  split after every epoch.

  The split point comes from cfg.train_fraction. verbose=1 shows a progress
  bar per epoch, verbose=2 prints one summary line per epoch to `file`
  (stdout by default).

  """
  if cfg.seed is None:
    raise e.UsageError("Training needs a seed; pass --seed or set it in the "
                       "config file.")

  file = file or sys.stdout
  full = dataclasses.replace(ds,
                             split_index=f.split_point(len(ds),
                                                       cfg.train_fraction))
  train_ds, test_ds = f.split(full)
  if len(train_ds) == 0:
    raise e.EmptyDataset()
  if len(test_ds) == 0:
    raise e.EmptyTestSet()

  rng = c.new_rng(cfg.seed)
  dims = nt.Dims(n_features=ds.X.shape[2], units=cfg.units, n_layers=cfg.layers)
  params = c.init_params(rng, dims, cfg.dropout_rate)
  state = adam.init_adam(params,
                         lr=cfg.lr,
                         beta1=cfg.beta1,
                         beta2=cfg.beta2,
                         epsilon=cfg.epsilon)

  bounds = batch_bounds(len(train_ds), cfg.batch_size)
  n_batches = len(bounds)

  logging.info(
      "Training on {} samples ({} batches of up to {}), validating on {}.".format(
          len(train_ds), n_batches, cfg.batch_size, len(test_ds)))

  history = []
  progress = u.tqdm_logging() if cfg.verbose == 1 else contextlib.nullcontext()
  with progress:
    for epoch in range(1, cfg.epochs + 1):
      history.append(
          _run_epoch(epoch, params, state, rng, train_ds, test_ds, bounds, cfg,
                     file))

  return params, history


def _run_epoch(epoch: int, params: nt.ModelParams, state: adam.AdamState,
               rng: np.random.Generator, train_ds: f.Dataset,
               test_ds: f.Dataset, bounds: List[Tuple[int, int]],
               cfg: TrainConfig, file: IO[str]) -> EpochRecord:
  """One pass over the training batches plus validation; updates params and
  state in place.

  """
  n_batches = len(bounds)
  start = time.perf_counter()
  bar = None
  if cfg.verbose == 1:
    bar = tqdm.tqdm(total=n_batches,
                    desc="Epoch {}/{}".format(epoch, cfg.epochs),
                    unit="batch",
                    file=file,
                    leave=True)
  elif cfg.verbose == 2:
    print("Epoch {}/{}".format(epoch, cfg.epochs), file=file)

  losses = []
  for idx, (lo, hi) in enumerate(bounds, start=1):
    y_hat, cache = c.model_forward(train_ds.X[lo:hi], params, nt.Mode.TRAIN,
                                   rng)
    loss, dy = c.mae_loss(y_hat, train_ds.y[lo:hi])
    if not math.isfinite(loss):
      if bar is not None:
        bar.close()
      raise e.NonFiniteLoss(epoch, idx, loss)

    grads = c.model_backward(cache, dy, params)
    adam.adam_step(params, grads, state)
    losses.append(loss)

    if bar is not None:
      bar.set_postfix(loss="{:.4f}".format(float(np.mean(losses))))
      bar.update(1)

  train_loss = float(np.mean(losses))
  val_loss = validation_loss(params, test_ds)
  wall_ms = (time.perf_counter() - start) * 1000.0

  if bar is not None:
    bar.set_postfix(loss="{:.4f}".format(train_loss),
                    val_loss="{:.4f}".format(val_loss))
    bar.close()
  elif cfg.verbose == 2:
    print(_epoch_line(n_batches, train_loss, val_loss, wall_ms), file=file)

  if not math.isfinite(val_loss):
    raise e.NonFiniteLoss(epoch, None, val_loss)

  return EpochRecord(epoch, train_loss, val_loss, wall_ms)


# ----------------------------------------------------------------------------
# Evaluation


def _pearson(x: np.ndarray, y: np.ndarray) -> Optional[float]:
  dx = x - x.mean()
  dy = y - y.mean()
  sxx = float(dx @ dx)
  syy = float(dy @ dy)
  if sxx == 0.0 or syy == 0.0:
    return None
  r = float(dx @ dy) / math.sqrt(sxx * syy)
  return max(-1.0, min(1.0, r))


def _pearson_table(mat: np.ndarray, target: np.ndarray) -> PearsonMap:
  ret = {}
  for k, name in enumerate(f.PREDICTORS):
    r = _pearson(mat[:, k], target)
    if r is None:
      logging.warning(
          u.t.yellow(
              "Correlation of '{}' with close is undefined (constant column)."
              .format(name)))
    ret[name] = r
  return ret


def correlation_report(rows: Sequence[f.FeatureRow]) -> PearsonMap:
  """Pearson r of every predictor against close. Constant columns come back
  as None instead of aborting the report.

  """
  if len(rows) < 3:
    raise e.InsufficientData(3, len(rows), "rows")

  return _pearson_table(f.predictor_matrix(rows), f.target_vector(rows))


def evaluate(model: nt.ModelParams,
             ds: f.Dataset,
             scaler: f.ScalerParams,
             rows: Optional[Sequence[f.FeatureRow]] = None) -> EvalReport:
  """Predicts the test split of ds in eval mode and reports the MAE in price
  units.

  Correlations come from `rows` when given. Otherwise they're computed on the
  scaled dataset, which gives the same r: min-max scaling is affine with a
  positive slope.

  """
  if scaler.columns != tuple(f.SCALED_COLUMNS):
    raise e.ScalerMismatch(f.SCALED_COLUMNS, scaler.columns)

  _, test = f.split(ds)
  if len(test) == 0:
    raise e.EmptyTestSet()

  predicted = f.inverse_target(c.predict(model, test.X), scaler)
  actual = f.inverse_target(test.y, scaler)
  mae_price = float(np.abs(predicted - actual).mean())

  series = [
      PredictionPoint(d, float(y), float(p))
      for d, y, p in zip(test.dates, actual, predicted)
  ]

  if rows is not None:
    pearson = correlation_report(rows)
  else:
    pearson = _pearson_table(ds.X[:, -1, :], ds.y)

  return EvalReport(mae_price=mae_price, series=series, pearson=pearson)


def predict_next(model: nt.ModelParams, predictors: np.ndarray,
                 scaler: f.ScalerParams) -> float:
  """Scales one raw predictor vector, runs the model and returns a price."""
  if (scaler.columns != tuple(f.SCALED_COLUMNS) or
      model.dims.n_features != f.N_FEATURES):
    raise e.ScalerMismatch(f.SCALED_COLUMNS, scaler.columns)

  predictors = np.asarray(predictors, dtype=np.float64)
  if predictors.shape != (f.N_FEATURES,):
    raise e.ShapeMismatch("predictors", (f.N_FEATURES,), predictors.shape)

  x = f.scale_predictors(predictors, scaler)
  y_scaled = c.predict(model, x.reshape(1, f.TIME_STEPS, f.N_FEATURES))
  return float(f.inverse_target(y_scaled, scaler)[0])


# ----------------------------------------------------------------------------
# Artifacts


def _to_csv(df: pd.DataFrame, path: str) -> None:
  df.to_csv(path,
            index=False,
            float_format=u.FLOAT_FORMAT,
            lineterminator="\n",
            encoding="utf-8")


def _read_csv(path: str, columns: List[str]) -> pd.DataFrame:
  try:
    df = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
  except pd.errors.EmptyDataError:
    raise e.EmptyFile(path)

  for name in columns:
    if name not in df.columns:
      raise e.MissingColumn(name, path)
  return df


def write_history(history: Sequence[EpochRecord],
                  path: str,
                  record_timing: bool = False) -> None:
  """history.csv; wall_ms is written as 0 unless record_timing is set, which
  keeps the file byte-identical across runs.

  """
  df = pd.DataFrame(
      [[r.epoch, r.train_loss, r.val_loss, r.wall_ms if record_timing else 0]
       for r in history],
      columns=HISTORY_COLUMNS)
  _to_csv(df, path)


def load_history(path: str) -> List[EpochRecord]:
  df = _read_csv(path, HISTORY_COLUMNS)
  ret = []
  for idx, rec in enumerate(df.to_dict(orient="records")):
    try:
      ret.append(
          EpochRecord(int(rec["epoch"]), float(rec["train_loss"]),
                      float(rec["val_loss"]), float(rec["wall_ms"])))
    except ValueError as exc:
      raise e.MalformedRow(idx + 2, str(exc), path)
  return ret


def write_predictions(series: Sequence[PredictionPoint], path: str) -> None:
  df = pd.DataFrame([[p.date.isoformat(), p.actual, p.predicted]
                     for p in series],
                    columns=PREDICTION_COLUMNS)
  _to_csv(df, path)


def load_predictions(path: str) -> List[PredictionPoint]:
  df = _read_csv(path, PREDICTION_COLUMNS)
  ret = []
  for idx, rec in enumerate(df.to_dict(orient="records")):
    try:
      ret.append(
          PredictionPoint(datetime.date.fromisoformat(rec["date"]),
                          float(rec["actual"]), float(rec["predicted"])))
    except ValueError as exc:
      raise e.MalformedRow(idx + 2, str(exc), path)
  return ret


def write_report(report: EvalReport, cfg: TrainConfig, path: str) -> None:
  a.write_json(
      path, REPORT_KIND, {
          "mae_price": report.mae_price,
          "n_test": len(report.series),
          "pearson": report.pearson,
          "config": cfg.to_dict(),
          "seed": cfg.seed,
      })


def write_forecast(date: datetime.date, price: float, path: str) -> None:
  """`date` is the last bar's date; the forecast is for the next session."""
  a.write_json(path, FORECAST_KIND, {
      "last_bar_date": date.isoformat(),
      "predicted_close": price,
  })
