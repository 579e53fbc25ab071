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
Utilities shared by the tidepool stages.
"""
import argparse
import contextlib
import os
import sys
from enum import Enum
from typing import IO, Any, List, Optional

import tqdm
from absl import logging
from blessings import Terminal

t = Terminal()

# Decimal encoding used for every float we write to CSV; 17 significant digits
# round-trips any float64.
FLOAT_FORMAT = "%.17g"


def err(s: str) -> None:
  """Prints the supplied string to stderr in red text."""
  sys.stderr.write(t.red(s))


def enum_vals(enum: Enum) -> List[str]:
  """Returns the list of all values for a specific enum."""
  return [v.value for v in enum]


def parse_enum(enum_type: Any, s: str) -> Any:
  """Parses s into a member of enum_type, raising an error argparse knows how
  to report.

  """
  try:
    return enum_type(s)
  except ValueError:
    raise argparse.ArgumentTypeError("'{}' isn't one of {}".format(
        s, enum_vals(enum_type)))


def positive_int(s: str) -> int:
  """argparse type for integers >= 1."""
  try:
    v = int(s)
  except ValueError:
    raise argparse.ArgumentTypeError("'{}' isn't an integer".format(s))
  if v < 1:
    raise argparse.ArgumentTypeError("'{}' must be >= 1".format(s))
  return v


def seed_int(s: str) -> int:
  """argparse type for unsigned 64-bit seeds."""
  try:
    v = int(s)
  except ValueError:
    raise argparse.ArgumentTypeError("seed '{}' isn't an integer".format(s))
  if not 0 <= v < 2**64:
    raise argparse.ArgumentTypeError(
        "seed {} doesn't fit in an unsigned 64-bit integer".format(v))
  return v


def unit_interval(s: str) -> float:
  """argparse type for floats in the open interval (0, 1)."""
  try:
    v = float(s)
  except ValueError:
    raise argparse.ArgumentTypeError("'{}' isn't a number".format(s))
  if not 0.0 < v < 1.0:
    raise argparse.ArgumentTypeError("'{}' must lie in (0, 1)".format(s))
  return v


def validated_file(path: str) -> str:
  """argparse `type=` for an input file that must already exist. Expands `~`."""
  expanded = os.path.expanduser(path)
  if not os.path.isfile(expanded):
    raise argparse.ArgumentTypeError("no such file: '{}'".format(path))
  return expanded


def ensure_directory(path: str) -> str:
  """Creates the directory (and parents) if needed; returns the path."""
  expanded = os.path.expanduser(path)
  os.makedirs(expanded, exist_ok=True)
  return expanded


class TqdmStream(object):
  """Stream that prints log lines with `tqdm.write`, above any live bar."""

  def __init__(self, target: IO[str]):
    self.target = target

  def write(self, text: str) -> None:
    if text.strip():
      tqdm.tqdm.write(text.rstrip("\n"), file=self.target)

  def flush(self) -> None:
    flush = getattr(self.target, "flush", None)
    if flush is not None:
      flush()

  def isatty(self) -> bool:
    return bool(getattr(self.target, "isatty", lambda: False)())


@contextlib.contextmanager
def tqdm_logging(stream: Optional[IO[str]] = None):
  """Routes absl log output through tqdm for the duration of the block and
  yields the stream the previous handler wrote to.

  """
  handler = logging.get_absl_handler()
  previous = handler.python_handler
  handler._python_handler = logging.PythonHandler(
      stream=TqdmStream(stream or sys.stderr))

  # absl only picks up the swapped handler after this call.
  logging.use_python_logging()
  try:
    yield previous.stream
  finally:
    handler._python_handler = previous
