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
"""Exception hierarchy shared by every tidepool stage.

Each exception carries a human readable `message` plus whatever structured
fields the failure has (file, line, column...). `exit_code` is what
`tidepool.main` hands back to the shell.

"""

from typing import Optional


class TidepoolError(Exception):
  """Base class for every error tidepool raises on purpose."""
  exit_code = 1

  def __init__(self, message: str):
    super().__init__(message)
    self.message = message


class UsageError(TidepoolError):
  """Bad flags, bad config files or missing required settings."""
  exit_code = 1


class DataError(TidepoolError):
  """Input files or artifacts that are missing, malformed or inconsistent."""
  exit_code = 2


class NumericalError(TidepoolError):
  """Training or scoring produced a non-finite value."""
  exit_code = 3


def _located(path: Optional[str], line_no: Optional[int], msg: str) -> str:
  if path is None:
    return msg
  if line_no is None:
    return "{}: {}".format(path, msg)
  return "{}:{}: {}".format(path, line_no, msg)


# ----------------------------------------------------------------------------
# ingest


class EmptyFile(DataError):

  def __init__(self, path: str):
    super().__init__(_located(path, None, "file contains no data rows"))
    self.path = path


class MissingColumn(DataError):

  def __init__(self, name: str, path: Optional[str] = None):
    super().__init__(
        _located(path, 1, "missing required column '{}'".format(name)))
    self.name = name
    self.path = path


class MalformedRow(DataError):

  def __init__(self, line_no: int, reason: str, path: Optional[str] = None):
    super().__init__(_located(path, line_no, reason))
    self.line_no = line_no
    self.reason = reason
    self.path = path


class NonMonotonicDates(DataError):

  def __init__(self, line_no: int, path: Optional[str] = None):
    super().__init__(
        _located(path, line_no,
                 "date is not strictly after the previous row's date"))
    self.line_no = line_no
    self.path = path


# ----------------------------------------------------------------------------
# sentiment


class NonFiniteInput(NumericalError):

  def __init__(self, values):
    super().__init__("non-finite logits: {}".format(list(values)))
    self.values = values


class OverlappingTerms(DataError):

  def __init__(self, terms, path: Optional[str] = None):
    super().__init__(
        _located(
            path, None,
            "terms listed as both pos and neg: {}".format(sorted(terms))))
    self.terms = terms


# ----------------------------------------------------------------------------
# features


class InsufficientData(DataError):

  def __init__(self, needed: int, got: int, what: str = "rows"):
    super().__init__("need at least {} {}, got {}".format(needed, what, got))
    self.needed = needed
    self.got = got


class EmptyInput(DataError):

  def __init__(self, what: str = "rows"):
    super().__init__("no {} to fit on".format(what))


class ColumnMismatch(DataError):

  def __init__(self, expected, got):
    super().__init__("column mismatch: expected {}, got {}".format(
        list(expected), list(got)))
    self.expected = expected
    self.got = got


# ----------------------------------------------------------------------------
# net


class ShapeMismatch(DataError):

  def __init__(self, what: str, expected, got):
    super().__init__("{}: expected shape {}, got {}".format(
        what, tuple(expected), tuple(got)))
    self.what = what
    self.expected = expected
    self.got = got


class StaleCache(TidepoolError):
  """The caches handed to backward weren't produced by these parameters."""

  def __init__(self):
    super().__init__("forward caches don't match the supplied parameters")


class EmptyBatch(DataError):

  def __init__(self):
    super().__init__("loss needs at least one sample")


# ----------------------------------------------------------------------------
# train_eval


class EmptyDataset(DataError):

  def __init__(self, what: str = "training split"):
    super().__init__("{} is empty".format(what))


class EmptyTestSet(EmptyDataset):

  def __init__(self):
    super().__init__("test split")


class NonFiniteLoss(NumericalError):

  def __init__(self, epoch: int, batch: Optional[int], loss: float):
    where = "validation" if batch is None else "batch {}".format(batch)
    super().__init__(
        "non-finite loss {} at epoch {}, {}; aborting training".format(
            loss, epoch, where))
    self.epoch = epoch
    self.batch = batch
    self.loss = loss


class ScalerMismatch(DataError):

  def __init__(self, expected, got):
    super().__init__(
        "scaler was fitted on columns {}, but the model expects {}".format(
            list(got), list(expected)))
    self.expected = expected
    self.got = got


# ----------------------------------------------------------------------------
# artifacts / cli


class MissingArtifact(DataError):

  def __init__(self, path: str, hint: Optional[str] = None):
    msg = "missing artifact '{}'".format(path)
    if hint:
      msg += " ({})".format(hint)
    super().__init__(msg)
    self.path = path


class FormatVersionMismatch(DataError):

  def __init__(self, path: str, expected, got):
    super().__init__(
        _located(
            path, None, "format_version {} isn't supported (expected {})".format(
                got, expected)))
    self.path = path
    self.expected = expected
    self.got = got


class EmptySeries(DataError):

  def __init__(self, path: str):
    super().__init__(_located(path, None, "nothing to plot"))
    self.path = path
