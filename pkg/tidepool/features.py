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
"""Previous-day feature rows, min-max scaling and the train/test split.

Each row pairs one trading day's close (the target) with the previous trading
day's OHLCV bar and that day's sentiment triple. Non-trading days are simply
skipped: sentiment is looked up under the previous bar's date and nothing from
weekends is carried forward.

"""

import datetime
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, NamedTuple, Sequence, Tuple

import numpy as np
import pandas as pd
from absl import logging

import tidepool.artifacts as a
import tidepool.errors as e
import tidepool.ingest as i
import tidepool.sentiment as s
import tidepool.util as u

FeatureRow = NamedTuple("FeatureRow", [("date", datetime.date),
                                       ("prev_open", float),
                                       ("prev_high", float),
                                       ("prev_low", float),
                                       ("prev_close", float),
                                       ("prev_volume", int),
                                       ("negative", float),
                                       ("neutral", float),
                                       ("positive", float),
                                       ("close", float)])

DATE = "Date"
PREDICTORS = [
    "Prev Open", "Prev High", "Prev Low", "Prev Close", "Prev Volume",
    "negative", "neutral", "positive"
]
TARGET = "Close"
SCALED_COLUMNS = PREDICTORS + [TARGET]
CSV_COLUMNS = [DATE] + SCALED_COLUMNS

N_FEATURES = len(PREDICTORS)

# Single-step windows; the tensor layout keeps the time axis anyway.
TIME_STEPS = 1

DEFAULT_TRAIN_FRACTION = 0.8
MIN_SPLIT_SAMPLES = 5

SCALER_KIND = "tidepool.scaler"


class ScalerMode(str, Enum):
  FULL = 'full'
  TRAIN_ONLY = 'train_only'


ScalerParams = NamedTuple("ScalerParams", [("columns", Tuple[str, ...]),
                                           ("mins", Tuple[float, ...]),
                                           ("maxes", Tuple[float, ...]),
                                           ("mode", ScalerMode)])


@dataclass(frozen=True, eq=False)
class Dataset(object):
  """Scaled tensors plus the dates they belong to.

  X has shape (samples, time steps, features) and y shape (samples,). For a
  full dataset `split_index` is where the test segment starts; the train view
  returned by `split` has split_index == len, the test view 0.

  """
  X: np.ndarray
  y: np.ndarray
  dates: Tuple[datetime.date, ...]
  split_index: int

  def __len__(self) -> int:
    return int(self.y.shape[0])


def split_point(n: int, train_fraction: float = DEFAULT_TRAIN_FRACTION) -> int:
  """floor(train_fraction * n), the first test index.

  >>> split_point(99)
  79

  """
  return int(math.floor(train_fraction * n))


# ----------------------------------------------------------------------------
# Rows


def build_rows(
    bars: List[i.DailyBar], scores: Dict[datetime.date, s.SentimentScores]
) -> Tuple[List[FeatureRow], List[datetime.date]]:
  """Pairs each bar with the bar before it.

  Returns the rows plus the list of previous-day dates that had no sentiment
  and were given uniform scores instead.

  """
  if len(bars) < 2:
    raise e.InsufficientData(2, len(bars), "bars")

  rows = []
  missing = []
  for prev, cur in zip(bars, bars[1:]):
    sentiment = scores.get(prev.date)
    if sentiment is None:
      missing.append(prev.date)
      sentiment = s.UNIFORM

    rows.append(
        FeatureRow(date=cur.date,
                   prev_open=prev.open,
                   prev_high=prev.high,
                   prev_low=prev.low,
                   prev_close=prev.close,
                   prev_volume=prev.volume,
                   negative=sentiment.negative,
                   neutral=sentiment.neutral,
                   positive=sentiment.positive,
                   close=cur.close))

  if missing:
    logging.warning(
        u.t.yellow("No sentiment for {} day(s), scored uniform: {}".format(
            len(missing), ", ".join(d.isoformat() for d in missing))))

  return rows, missing


def latest_predictors(
    bars: List[i.DailyBar], scores: Dict[datetime.date, s.SentimentScores]
) -> Tuple[datetime.date, np.ndarray]:
  """Predictor vector for the trading day after the last bar."""
  if not bars:
    raise e.InsufficientData(1, 0, "bars")

  last = bars[-1]
  sentiment = scores.get(last.date)
  if sentiment is None:
    logging.warning(
        u.t.yellow("No sentiment for {}, scored uniform.".format(last.date)))
    sentiment = s.UNIFORM

  vec = np.array([
      last.open, last.high, last.low, last.close, last.volume,
      sentiment.negative, sentiment.neutral, sentiment.positive
  ],
                 dtype=np.float64)
  return last.date, vec


def predictor_matrix(rows: Sequence[FeatureRow]) -> np.ndarray:
  """(n, 8) float64 matrix in PREDICTORS order."""
  return np.array([r[1:1 + N_FEATURES] for r in rows],
                  dtype=np.float64).reshape(len(rows), N_FEATURES)


def target_vector(rows: Sequence[FeatureRow]) -> np.ndarray:
  return np.array([r.close for r in rows], dtype=np.float64)


def _full_matrix(rows: Sequence[FeatureRow]) -> np.ndarray:
  return np.column_stack([predictor_matrix(rows), target_vector(rows)])


# ----------------------------------------------------------------------------
# Scaling


def fit_scaler(rows: Sequence[FeatureRow],
               mode: ScalerMode = ScalerMode.FULL,
               train_fraction: float = DEFAULT_TRAIN_FRACTION) -> ScalerParams:
  """Per-column min/max over every row (FULL) or over the training prefix only
  (TRAIN_ONLY).

  FULL fits before splitting, exactly like fitting a MinMaxScaler on the whole
  frame; the test segment leaks into the scale. TRAIN_ONLY avoids that, at the
  cost of test values possibly falling outside [0, 1].

  """
  if len(rows) == 0:
    raise e.EmptyInput()

  mode = ScalerMode(mode)
  mat = _full_matrix(rows)
  if mode == ScalerMode.TRAIN_ONLY:
    mat = mat[:max(1, split_point(len(rows), train_fraction))]

  return ScalerParams(columns=tuple(SCALED_COLUMNS),
                      mins=tuple(float(v) for v in mat.min(axis=0)),
                      maxes=tuple(float(v) for v in mat.max(axis=0)),
                      mode=mode)


def _check_columns(params: ScalerParams) -> None:
  if list(params.columns) != SCALED_COLUMNS:
    raise e.ColumnMismatch(SCALED_COLUMNS, params.columns)


def _scale(values: np.ndarray, mins: np.ndarray,
           maxes: np.ndarray) -> np.ndarray:
  span = maxes - mins
  degenerate = span == 0
  safe = np.where(degenerate, 1.0, span)
  return np.where(degenerate, 0.0, (values - mins) / safe)


def scale_predictors(predictors: np.ndarray,
                     params: ScalerParams) -> np.ndarray:
  """Scales an (n, 8) or (8,) predictor array with the fitted params."""
  _check_columns(params)
  mins = np.asarray(params.mins[:N_FEATURES])
  maxes = np.asarray(params.maxes[:N_FEATURES])
  return _scale(np.asarray(predictors, dtype=np.float64), mins, maxes)


def transform_target(y: np.ndarray, params: ScalerParams) -> np.ndarray:
  _check_columns(params)
  return _scale(np.asarray(y, dtype=np.float64), params.mins[-1],
                params.maxes[-1])


def inverse_target(y_scaled: np.ndarray, params: ScalerParams) -> np.ndarray:
  """Maps scaled targets back to prices: y = y' * (max - min) + min."""
  _check_columns(params)
  lo, hi = params.mins[-1], params.maxes[-1]
  return np.asarray(y_scaled, dtype=np.float64) * (hi - lo) + lo


def _readonly(arr: np.ndarray) -> np.ndarray:
  arr.setflags(write=False)
  return arr


def transform(rows: Sequence[FeatureRow],
              params: ScalerParams,
              train_fraction: float = DEFAULT_TRAIN_FRACTION) -> Dataset:
  """Scales rows into a Dataset of shape (samples, 1, 8)."""
  _check_columns(params)
  n = len(rows)
  X = scale_predictors(predictor_matrix(rows), params)
  y = transform_target(target_vector(rows), params)

  return Dataset(X=_readonly(X.reshape(n, TIME_STEPS, N_FEATURES)),
                 y=_readonly(y),
                 dates=tuple(r.date for r in rows),
                 split_index=split_point(n, train_fraction))


def split(ds: Dataset) -> Tuple[Dataset, Dataset]:
  """Chronological split at ds.split_index; no shuffling."""
  n = len(ds)
  if n < MIN_SPLIT_SAMPLES:
    raise e.InsufficientData(MIN_SPLIT_SAMPLES, n, "samples")

  k = ds.split_index
  train = Dataset(ds.X[:k], ds.y[:k], ds.dates[:k], k)
  test = Dataset(ds.X[k:], ds.y[k:], ds.dates[k:], 0)
  return train, test


def save_scaler(params: ScalerParams, path: str) -> None:
  a.write_json(
      path, SCALER_KIND, {
          "columns": list(params.columns),
          "mins": list(params.mins),
          "maxes": list(params.maxes),
          "mode": params.mode.value,
      })


def load_scaler(path: str) -> ScalerParams:
  doc = a.read_json(path, SCALER_KIND)
  try:
    params = ScalerParams(columns=tuple(doc["columns"]),
                          mins=tuple(float(v) for v in doc["mins"]),
                          maxes=tuple(float(v) for v in doc["maxes"]),
                          mode=ScalerMode(doc["mode"]))
  except (KeyError, TypeError, ValueError) as exc:
    raise e.MalformedRow(1, "bad scaler document: {}".format(exc), path)

  if not len(params.columns) == len(params.mins) == len(params.maxes):
    raise e.MalformedRow(1, "columns, mins and maxes differ in length", path)
  if any(lo > hi for lo, hi in zip(params.mins, params.maxes)):
    raise e.MalformedRow(1, "a column has min > max", path)

  return params


# ----------------------------------------------------------------------------
# features.csv


def write_rows(rows: Sequence[FeatureRow], path: str) -> None:
  df = pd.DataFrame([[r.date.isoformat(), *r[1:]] for r in rows],
                    columns=CSV_COLUMNS)
  df.to_csv(path,
            index=False,
            float_format=u.FLOAT_FORMAT,
            lineterminator="\n",
            encoding="utf-8")


def load_rows(path: str) -> List[FeatureRow]:
  try:
    df = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
  except pd.errors.EmptyDataError:
    raise e.EmptyFile(path)

  for name in CSV_COLUMNS:
    if name not in df.columns:
      raise e.MissingColumn(name, path)

  rows = []
  for idx, rec in enumerate(df.to_dict(orient="records")):
    try:
      vals = [float(rec[c]) for c in SCALED_COLUMNS]
      if not all(math.isfinite(v) for v in vals):
        raise ValueError("non-finite value")
      rows.append(
          FeatureRow(datetime.date.fromisoformat(rec[DATE]), vals[0], vals[1],
                     vals[2], vals[3], int(vals[4]), vals[5], vals[6],
                     vals[7], vals[8]))
    except ValueError as exc:
      raise e.MalformedRow(idx + 2, str(exc), path)

  return rows
