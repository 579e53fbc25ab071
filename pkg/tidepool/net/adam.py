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
"""Adam with bias-corrected moment estimates.

The update, per tensor, at step t (starting from 1):

  m = b1 * m + (1 - b1) * g
  v = b2 * v + (1 - b2) * g**2
  theta -= lr * (m / (1 - b1**t)) / (sqrt(v / (1 - b2**t)) + eps)

"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

import tidepool.errors as e
import tidepool.net.types as nt

DEFAULT_LR = 0.001
DEFAULT_BETA1 = 0.9
DEFAULT_BETA2 = 0.999
DEFAULT_EPSILON = 1e-8


@dataclass
class AdamState(object):
  """Moments are kept as flat lists aligned with `nt.tensors(params)`."""
  m: List[np.ndarray]
  v: List[np.ndarray]
  t: int = 0
  lr: float = DEFAULT_LR
  beta1: float = DEFAULT_BETA1
  beta2: float = DEFAULT_BETA2
  epsilon: float = DEFAULT_EPSILON


def init_adam(params,
              lr: float = DEFAULT_LR,
              beta1: float = DEFAULT_BETA1,
              beta2: float = DEFAULT_BETA2,
              epsilon: float = DEFAULT_EPSILON) -> AdamState:
  if not lr > 0:
    raise ValueError("lr must be > 0, got {}".format(lr))
  if not (0.0 <= beta1 < 1.0 and 0.0 <= beta2 < 1.0):
    raise ValueError("betas must lie in [0, 1), got {}, {}".format(
        beta1, beta2))
  if not epsilon > 0:
    raise ValueError("epsilon must be > 0, got {}".format(epsilon))

  ts = nt.tensors(params)
  return AdamState(m=[np.zeros_like(x) for x in ts],
                   v=[np.zeros_like(x) for x in ts],
                   t=0,
                   lr=lr,
                   beta1=beta1,
                   beta2=beta2,
                   epsilon=epsilon)


def adam_update(theta: List[np.ndarray], grads: List[np.ndarray],
                state: AdamState) -> None:
  """Applies one step to a flat list of tensors, in place."""
  if len(theta) != len(grads) or len(theta) != len(state.m):
    raise e.ShapeMismatch("tensor list", (len(state.m),), (len(grads),))

  for k, (x, g) in enumerate(zip(theta, grads)):
    if x.shape != g.shape:
      raise e.ShapeMismatch("gradient {}".format(k), x.shape, g.shape)
    if state.m[k].shape != x.shape:
      raise e.ShapeMismatch("moment {}".format(k), x.shape, state.m[k].shape)

  state.t += 1
  b1, b2 = state.beta1, state.beta2
  c1 = 1.0 - b1**state.t
  c2 = 1.0 - b2**state.t

  for x, g, m, v in zip(theta, grads, state.m, state.v):
    m *= b1
    m += (1.0 - b1) * g
    v *= b2
    v += (1.0 - b2) * g * g
    x -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.epsilon)


def adam_step(params: nt.ModelParams, grads: nt.Gradients,
              state: AdamState) -> Tuple[nt.ModelParams, AdamState]:
  """Updates every parameter tensor in place and returns (params, state)."""
  adam_update(nt.tensors(params), nt.tensors(grads), state)
  return params, state
