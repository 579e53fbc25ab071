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
"""
Run configuration: built-in defaults, overridden by a YAML or JSON config
file, overridden in turn by command line flags.
"""

import argparse
import dataclasses
import os
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional

import commentjson
import yaml

import tidepool.errors as e
import tidepool.features as f
import tidepool.ingest as i
import tidepool.sentiment as s
import tidepool.textprep as tp
import tidepool.train_eval as te

WORKDIR_ENV = "TIDEPOOL_WORKDIR"
DEFAULT_WORKDIR = "tidepool_work"

YAML_EXTENSIONS = (".yaml", ".yml")

_TRAIN_DEFAULTS = te.TrainConfig()


@dataclass(frozen=True)
class RunConfig(object):
  """Everything any stage needs. Keys of a config file are these field names;
  flags are the same names with a `--` prefix.

  """
  ticker: Optional[str] = None
  bars: Optional[str] = None
  tweets: Optional[str] = None
  workdir: str = DEFAULT_WORKDIR
  lexicon: Optional[str] = None
  top_k: int = tp.DEFAULT_CAP
  sentiment_scale: float = s.DEFAULT_SCALE

  epochs: int = _TRAIN_DEFAULTS.epochs
  batch_size: int = _TRAIN_DEFAULTS.batch_size
  train_fraction: float = _TRAIN_DEFAULTS.train_fraction
  seed: Optional[int] = None
  lr: float = _TRAIN_DEFAULTS.lr
  beta1: float = _TRAIN_DEFAULTS.beta1
  beta2: float = _TRAIN_DEFAULTS.beta2
  epsilon: float = _TRAIN_DEFAULTS.epsilon
  dropout_rate: float = _TRAIN_DEFAULTS.dropout_rate
  units: int = _TRAIN_DEFAULTS.units
  layers: int = _TRAIN_DEFAULTS.layers
  scaler_mode: f.ScalerMode = _TRAIN_DEFAULTS.scaler_mode
  verbose: int = _TRAIN_DEFAULTS.verbose
  record_timing: bool = _TRAIN_DEFAULTS.record_timing

  def __post_init__(self):
    object.__setattr__(self, "scaler_mode", f.ScalerMode(self.scaler_mode))

    if self.ticker is not None:
      try:
        i.parse_ticker(self.ticker)
      except argparse.ArgumentTypeError as exc:
        raise e.UsageError(str(exc))
    if self.top_k < 1:
      raise e.UsageError("top_k must be >= 1, got {}".format(self.top_k))
    if not self.sentiment_scale > 0:
      raise e.UsageError("sentiment_scale must be > 0, got {}".format(
          self.sentiment_scale))
    if not self.workdir:
      raise e.UsageError("workdir can't be empty")

    # Surfaces bad training settings early, for every stage.
    self.train_config()

  def train_config(self) -> te.TrainConfig:
    names = [fld.name for fld in dataclasses.fields(te.TrainConfig)]
    return te.TrainConfig(**{k: getattr(self, k) for k in names})

  def to_dict(self) -> Dict[str, Any]:
    ret = dataclasses.asdict(self)
    ret["scaler_mode"] = self.scaler_mode.value
    return ret


FIELDS = tuple(fld.name for fld in dataclasses.fields(RunConfig))

_OPTIONAL_FIELDS = {"ticker", "bars", "tweets", "lexicon", "seed"}
_INT_FIELDS = {"top_k", "epochs", "batch_size", "seed", "units", "layers",
               "verbose"}
_FLOAT_FIELDS = {"sentiment_scale", "train_fraction", "lr", "beta1", "beta2",
                 "epsilon", "dropout_rate"}
_BOOL_FIELDS = {"record_timing"}


def _coerce(key: str, value: Any, path: str) -> Any:
  """Checks a config file value against the type of its field."""

  def bad(expected: str):
    return e.UsageError("{}: '{}' must be {}, got {!r}".format(
        path, key, expected, value))

  if value is None:
    if key in _OPTIONAL_FIELDS:
      return None
    raise bad("set")

  if key in _BOOL_FIELDS:
    if not isinstance(value, bool):
      raise bad("true or false")
    return value

  if key in _INT_FIELDS:
    if isinstance(value, bool) or not isinstance(value, int):
      raise bad("an integer")
    return value

  if key in _FLOAT_FIELDS:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
      raise bad("a number")
    return float(value)

  if key == "scaler_mode":
    try:
      return f.ScalerMode(value)
    except ValueError:
      raise bad("one of {}".format([m.value for m in f.ScalerMode]))

  if not isinstance(value, str):
    raise bad("a string")
  return value


def load_config_file(path: str) -> Dict[str, Any]:
  """Returns the raw mapping in a YAML (.yaml / .yml) or JSON config file.
  JSON files may contain comments.

  """
  path = os.path.expanduser(path)
  if not os.path.isfile(path):
    raise e.UsageError("Config file '{}' doesn't exist.".format(path))

  with open(path, encoding="utf-8") as fp:
    if path.endswith(YAML_EXTENSIONS):
      try:
        raw = yaml.load(fp, Loader=yaml.SafeLoader)
      except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = "{}:{}".format(path, mark.line + 1) if mark else path
        raise e.UsageError("{}: invalid YAML: {}".format(
            where, getattr(exc, "problem", exc)))
    else:
      try:
        raw = commentjson.load(fp)
      except (commentjson.JSONLibraryException, ValueError) as exc:
        raise e.UsageError("{}: invalid JSON: {}".format(path, exc))

  if raw is None:
    return {}
  if not isinstance(raw, dict):
    raise e.UsageError("{}: top level must be a mapping of settings".format(
        path))
  return raw


def parse_config(raw: Mapping[str, Any], path: str) -> Dict[str, Any]:
  """Validates keys and value types of a raw config mapping."""
  ret = {}
  for key, value in raw.items():
    if key not in FIELDS:
      raise e.UsageError("{}: unknown config key '{}'".format(path, key))
    ret[key] = _coerce(key, value, path)
  return ret


def resolve(flags: Mapping[str, Any],
            env: Optional[Mapping[str, str]] = None) -> RunConfig:
  """defaults < $TIDEPOOL_WORKDIR < config file < flags.

  `flags` is the parsed argument map; entries that are None weren't passed.
  The `config` entry, if any, names the config file.

  """
  env = os.environ if env is None else env

  values = {}
  if env.get(WORKDIR_ENV):
    values["workdir"] = env[WORKDIR_ENV]

  config_path = flags.get("config")
  if config_path:
    values.update(parse_config(load_config_file(config_path), config_path))

  for key in FIELDS:
    v = flags.get(key)
    if v is not None:
      values[key] = v

  return RunConfig(**values)


def require(cfg: RunConfig, *keys: str) -> None:
  """Raises UsageError unless every named setting is present."""
  missing = [k for k in keys if getattr(cfg, k) is None]
  if missing:
    raise e.UsageError("Missing required setting(s): {}. Pass {} or set {} in "
                       "the config file.".format(
                           ", ".join(missing),
                           " ".join("--{}".format(k) for k in missing),
                           "them" if len(missing) > 1 else "it"))
