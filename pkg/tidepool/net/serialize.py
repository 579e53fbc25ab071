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
"""model.json reading and writing.

Layout:

  {
    "dims": {"n_features": 8, "units": 100, "n_layers": 3},
    "dropout_rate": 0.2,
    "seed": 42,
    "layers": [{"input": {"W": [[...]], "U": [[...]], "b": [...]},
                "forget": {...}, "cell": {...}, "output": {...}}, ...],
    "dense": {"w": [...], "b": 0.0},
    "kind": "tidepool.model",
    "format_version": 1
  }

Matrices are nested lists in row-major order. Floats go through Python's
shortest round-trip repr, so loading gives back bit-identical arrays.

"""

from typing import Any, Dict, Optional, Tuple

import numpy as np

import tidepool.artifacts as a
import tidepool.errors as e
import tidepool.net.types as nt

MODEL_KIND = "tidepool.model"


def _gate_dict(layer: nt.LstmLayerParams, g: int) -> Dict[str, Any]:
  return {
      "W": layer.W[g].tolist(),
      "U": layer.U[g].tolist(),
      "b": layer.b[g].tolist(),
  }


def model_doc(params: nt.ModelParams, seed: Optional[int]) -> Dict[str, Any]:
  dims = params.dims
  return {
      "dims": dims._asdict(),
      "dropout_rate": params.dropout_rate,
      "seed": seed,
      "layers": [{
          name: _gate_dict(layer, g) for g, name in enumerate(nt.GATES)
      } for layer in params.layers],
      "dense": {
          "w": params.dense_w.tolist(),
          "b": float(params.dense_b[0]),
      },
  }


def save_model(params: nt.ModelParams,
               path: str,
               seed: Optional[int] = None) -> None:
  a.write_json(path, MODEL_KIND, model_doc(params, seed))


def _array(value, shape, what: str, path: str) -> np.ndarray:
  try:
    arr = np.array(value, dtype=np.float64)
  except (TypeError, ValueError):
    raise e.MalformedRow(1, "{} isn't numeric".format(what), path)

  if arr.shape != tuple(shape):
    raise e.ShapeMismatch("{} in {}".format(what, path), shape, arr.shape)
  if not np.all(np.isfinite(arr)):
    raise e.MalformedRow(1, "{} has non-finite entries".format(what), path)
  return arr


def load_model(path: str) -> Tuple[nt.ModelParams, Optional[int]]:
  """Returns (params, seed recorded at training time)."""
  doc = a.read_json(path, MODEL_KIND)

  try:
    dims = nt.Dims(**{k: int(v) for k, v in doc["dims"].items()})
    dropout_rate = float(doc["dropout_rate"])
    seed = doc.get("seed")
    layer_docs = doc["layers"]
    dense = doc["dense"]
  except (KeyError, TypeError, ValueError) as exc:
    raise e.MalformedRow(1, "bad model document: {}".format(exc), path)

  if len(layer_docs) != dims.n_layers:
    raise e.MalformedRow(
        1, "dims say {} layers, found {}".format(dims.n_layers,
                                                 len(layer_docs)), path)
  if not 0.0 <= dropout_rate < 1.0:
    raise e.MalformedRow(1, "dropout_rate {} outside [0, 1)".format(
        dropout_rate), path)

  layers = []
  for idx, ldoc in enumerate(layer_docs):
    in_dim = nt.layer_in_dim(dims, idx)
    try:
      W = np.stack([
          _array(ldoc[g]["W"], (dims.units, in_dim),
                 "layer {} {} W".format(idx, g), path) for g in nt.GATES
      ])
      U = np.stack([
          _array(ldoc[g]["U"], (dims.units, dims.units),
                 "layer {} {} U".format(idx, g), path) for g in nt.GATES
      ])
      b = np.stack([
          _array(ldoc[g]["b"], (dims.units,), "layer {} {} b".format(idx, g),
                 path) for g in nt.GATES
      ])
    except (KeyError, TypeError) as exc:
      raise e.MalformedRow(1, "layer {} is missing {}".format(idx, exc), path)
    layers.append(nt.LstmLayerParams(W, U, b))

  try:
    dense_w = _array(dense["w"], (dims.units,), "dense w", path)
    dense_b = _array([dense["b"]], (1,), "dense b", path)
  except (KeyError, TypeError) as exc:
    raise e.MalformedRow(1, "dense head is missing {}".format(exc), path)

  params = nt.ModelParams(layers=tuple(layers),
                          dense_w=dense_w,
                          dense_b=dense_b,
                          dropout_rate=dropout_rate)
  return params, (None if seed is None else int(seed))
