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
'''types for tidepool.net'''

from enum import Enum
from typing import List, NamedTuple, Tuple

import numpy as np

# Gate order used for the leading axis of every stacked gate tensor.
GATES = ('input', 'forget', 'cell', 'output')
INPUT, FORGET, CELL, OUTPUT = range(len(GATES))
N_GATES = len(GATES)


# ----------------------------------------------------------------------------
class Mode(str, Enum):
  '''forward pass mode; dropout is only active in TRAIN'''
  TRAIN = 'train'
  EVAL = 'eval'


# ----------------------------------------------------------------------------
Dims = NamedTuple("Dims", [("n_features", int), ("units", int),
                           ("n_layers", int)])

DEFAULT_DIMS = Dims(n_features=8, units=100, n_layers=3)


def layer_in_dim(dims: Dims, layer: int) -> int:
  '''input width of the given LSTM layer'''
  return dims.n_features if layer == 0 else dims.units


# ----------------------------------------------------------------------------
class LstmLayerParams(NamedTuple):
  '''one LSTM layer

  W: (4, units, in_dim) input weights, U: (4, units, units) recurrent weights,
  b: (4, units) biases. The leading axis follows GATES.
  '''
  W: np.ndarray
  U: np.ndarray
  b: np.ndarray

  @property
  def units(self) -> int:
    return self.W.shape[1]

  @property
  def in_dim(self) -> int:
    return self.W.shape[2]


class ModelParams(NamedTuple):
  '''stacked LSTM layers, a single-unit dense head and the dropout rate

  dense_b is a length-1 array so that optimizers can update it in place.
  '''
  layers: Tuple[LstmLayerParams, ...]
  dense_w: np.ndarray
  dense_b: np.ndarray
  dropout_rate: float

  @property
  def dims(self) -> Dims:
    return Dims(n_features=self.layers[0].in_dim,
                units=self.layers[0].units,
                n_layers=len(self.layers))


class Gradients(NamedTuple):
  '''mirror of ModelParams, minus the dropout rate'''
  layers: Tuple[LstmLayerParams, ...]
  dense_w: np.ndarray
  dense_b: np.ndarray


def tensors(p) -> List[np.ndarray]:
  '''flat list of every trainable tensor, in a fixed order; works on both
  ModelParams and Gradients'''
  ret = []
  for layer in p.layers:
    ret.extend([layer.W, layer.U, layer.b])
  ret.extend([p.dense_w, p.dense_b])
  return ret


def zeros_like(p) -> Gradients:
  '''all-zero Gradients shaped like p'''
  return Gradients(layers=tuple(
      LstmLayerParams(np.zeros_like(l.W), np.zeros_like(l.U),
                      np.zeros_like(l.b)) for l in p.layers),
                   dense_w=np.zeros_like(p.dense_w),
                   dense_b=np.zeros_like(p.dense_b))


def copy_params(p: ModelParams) -> ModelParams:
  '''deep copy, so in-place updates on the copy leave p untouched'''
  return ModelParams(layers=tuple(
      LstmLayerParams(l.W.copy(), l.U.copy(), l.b.copy()) for l in p.layers),
                     dense_w=p.dense_w.copy(),
                     dense_b=p.dense_b.copy(),
                     dropout_rate=p.dropout_rate)
