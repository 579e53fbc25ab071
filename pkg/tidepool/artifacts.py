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
"""Work-directory layout and versioned JSON documents.

Stages talk to each other only through files with fixed names inside one work
directory, so `tidepool train` never needs to be told where `features` put
its output.

"""

import json
import os
from enum import Enum
from typing import Any, Dict, Optional

import tidepool.errors as e


class Artifact(str, Enum):
  CLEAN = 'clean.csv'
  SENTIMENT = 'sentiment.csv'
  FEATURES = 'features.csv'
  MODEL = 'model.json'
  SCALER = 'scaler.json'
  HISTORY = 'history.csv'
  PREDICTIONS = 'predictions.csv'
  REPORT = 'report.json'
  FORECAST = 'forecast.json'


# Bump when a JSON document changes shape; readers refuse anything else.
FORMAT_VERSION = 1

# The stage that produces each artifact, for friendlier errors.
PRODUCED_BY = {
    Artifact.CLEAN: 'clean',
    Artifact.SENTIMENT: 'sentiment',
    Artifact.FEATURES: 'features',
    Artifact.SCALER: 'features',
    Artifact.MODEL: 'train',
    Artifact.HISTORY: 'train',
    Artifact.PREDICTIONS: 'eval',
    Artifact.REPORT: 'eval',
    Artifact.FORECAST: 'predict',
}


def path_for(workdir: str, artifact: Artifact) -> str:
  return os.path.join(workdir, artifact.value)


def require(workdir: str, artifact: Artifact) -> str:
  """Returns the artifact's path, raising MissingArtifact if it isn't there."""
  path = path_for(workdir, artifact)
  if not os.path.isfile(path):
    raise e.MissingArtifact(
        path, "run 'tidepool {}' first".format(PRODUCED_BY[artifact]))
  return path


def write_json(path: str, kind: str, body: Dict[str, Any]) -> None:
  """Writes a JSON document tagged with its kind and the format version.

  Keys are sorted and floats use Python's shortest round-trip repr, so the
  same payload always serializes to the same bytes.

  """
  doc = dict(body)
  doc["kind"] = kind
  doc["format_version"] = FORMAT_VERSION

  with open(path, "w", encoding="utf-8") as f:
    json.dump(doc, f, indent=2, sort_keys=True, allow_nan=False)
    f.write("\n")


def read_json(path: str, kind: Optional[str] = None) -> Dict[str, Any]:
  """Loads a document written by write_json, checking kind and version."""
  if not os.path.isfile(path):
    raise e.MissingArtifact(path)

  try:
    with open(path, encoding="utf-8") as f:
      doc = json.load(f)
  except json.JSONDecodeError as exc:
    raise e.MalformedRow(exc.lineno, "invalid JSON: {}".format(exc.msg), path)

  if not isinstance(doc, dict):
    raise e.MalformedRow(1, "expected a JSON object", path)

  version = doc.get("format_version")
  if version != FORMAT_VERSION:
    raise e.FormatVersionMismatch(path, FORMAT_VERSION, version)

  if kind is not None and doc.get("kind") != kind:
    raise e.MalformedRow(
        1, "expected a '{}' document, found '{}'".format(kind, doc.get("kind")),
        path)

  return doc
