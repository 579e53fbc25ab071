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
"""Central finite-difference check of model_backward."""

from typing import NamedTuple, Optional

import numpy as np

import tidepool.net.core as c
import tidepool.net.types as nt

DEFAULT_H = 1e-5

# Entries where both gradients are this small are skipped.
NEGLIGIBLE = 1e-8

GradCheckResult = NamedTuple("GradCheckResult", [("max_rel_error", float),
                                                 ("checked", int),
                                                 ("skipped", int)])


def _objective(X: np.ndarray, params: nt.ModelParams, upstream: np.ndarray,
               mode: nt.Mode, seed: Optional[int]) -> float:
  rng = None if seed is None else c.new_rng(seed)
  y_hat, _ = c.model_forward(X, params, mode, rng)
  return float(upstream @ y_hat)


def gradient_check(X: np.ndarray,
                   params: nt.ModelParams,
                   upstream: np.ndarray,
                   mode: nt.Mode = nt.Mode.EVAL,
                   seed: Optional[int] = None,
                   h: float = DEFAULT_H) -> GradCheckResult:
  """Compares analytic gradients of the linear objective `upstream . y_hat`
  against central differences, for every parameter entry.

  A linear objective has no kinks, unlike MAE, so the comparison is clean
  everywhere. In TRAIN mode the rng is re-seeded for every forward call so all
  evaluations share one set of dropout masks.

  `params` is perturbed in place and restored entry by entry.

  """
  rng = None if seed is None else c.new_rng(seed)
  _, cache = c.model_forward(X, params, mode, rng)
  grads = c.model_backward(cache, upstream, params)

  worst = 0.0
  checked = 0
  skipped = 0
  for theta, g in zip(nt.tensors(params), nt.tensors(grads)):
    flat = theta.reshape(-1)
    gflat = g.reshape(-1)
    for k in range(flat.size):
      orig = flat[k]
      flat[k] = orig + h
      plus = _objective(X, params, upstream, mode, seed)
      flat[k] = orig - h
      minus = _objective(X, params, upstream, mode, seed)
      flat[k] = orig

      numeric = (plus - minus) / (2.0 * h)
      analytic = gflat[k]
      if abs(numeric) < NEGLIGIBLE and abs(analytic) < NEGLIGIBLE:
        skipped += 1
        continue

      rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric))
      worst = max(worst, rel)
      checked += 1

  return GradCheckResult(worst, checked, skipped)
