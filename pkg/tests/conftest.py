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
"""Configuration for Hypothesis tests, the shared fixture files and frozen
regression values.

"""

import json
import math
import os

import pytest
from hypothesis import Verbosity, settings

settings.register_profile("ci", max_examples=1000)
settings.register_profile("dev", max_examples=10)
settings.register_profile("debug", max_examples=10, verbosity=Verbosity.verbose)
settings.load_profile(os.getenv(u'HYPOTHESIS_PROFILE', 'default'))

FIXTURES = os.path.join(os.path.dirname(__file__), "tidepool", "fixtures")
GOLDEN_FILE = os.path.join(FIXTURES, "golden.json")


@pytest.fixture
def bars_csv():
  """21 trading days of March 2023."""
  return os.path.join(FIXTURES, "bars_month.csv")


@pytest.fixture
def tweets_csv():
  """90 tweets from 2023-02-27 to 2023-03-29; 2023-03-15 has none."""
  return os.path.join(FIXTURES, "tweets_month.csv")


@pytest.fixture
def clean_golden():
  return os.path.join(FIXTURES, "clean_golden.jsonl")


# ----------------------------------------------------------------------------
# Frozen regression values


def pytest_addoption(parser):
  parser.addoption("--update-golden",
                   action="store_true",
                   default=False,
                   help="Record frozen regression values into {}.".format(
                       os.path.relpath(GOLDEN_FILE)))


class Golden(object):
  """Values recorded from an earlier run. Compares floats with a relative
  tolerance and everything else exactly.

  """

  def __init__(self, path: str, update: bool):
    self.path = path
    self.update = update
    self.values = {}
    self.dirty = False
    if os.path.isfile(path):
      with open(path, encoding="utf-8") as f:
        self.values = json.load(f)

  def check(self, key: str, value, rel_tol: float = 1e-9) -> None:
    if self.update:
      self.values[key] = value
      self.dirty = True
      return

    if key not in self.values:
      pytest.skip("no frozen value for '{}'; run pytest --update-golden".format(
          key))

    expected = self.values[key]
    if isinstance(expected, float):
      assert math.isclose(value, expected, rel_tol=rel_tol), (key, value,
                                                               expected)
    else:
      assert value == expected, (key, value, expected)

  def save(self) -> None:
    with open(self.path, "w", encoding="utf-8") as f:
      json.dump(self.values, f, indent=2, sort_keys=True)
      f.write("\n")


@pytest.fixture(scope="session")
def golden(request):
  g = Golden(GOLDEN_FILE, request.config.getoption("--update-golden"))
  yield g
  if g.dirty:
    g.save()
