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
"""Stacked LSTM regressor: forward pass, backpropagation through time and
the MAE loss.

Everything is float64 numpy. Batches are laid out (batch, time, features).
Every LSTM layer starts from zero state; all layers but the last hand their
whole hidden sequence to the next layer, the last one hands its final hidden
state to a single-unit dense head. Dropout sits after every LSTM layer.

Cell equations, with gates stacked along the leading axis of W, U and b:

  i = sigmoid(W_i x + U_i h + b_i)    f = sigmoid(W_f x + U_f h + b_f)
  g = tanh(W_c x + U_c h + b_c)       o = sigmoid(W_o x + U_o h + b_o)
  c' = f * c + i * g                  h' = o * tanh(c')

"""

import hashlib
import math
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

import tidepool.errors as e
from tidepool.net.types import (CELL, FORGET, INPUT, N_GATES, OUTPUT, Dims,
                                Gradients, LstmLayerParams, Mode, ModelParams,
                                layer_in_dim)


def new_rng(seed: int) -> np.random.Generator:
  """The one random stream used for initialization and dropout masks.

  PCG64 is a 128-bit-state permuted congruential generator; seeding it with
  the same unsigned 64-bit integer always reproduces the same stream.

  """
  return np.random.Generator(np.random.PCG64(seed))


def sigmoid(z: np.ndarray) -> np.ndarray:
  # tanh form never overflows.
  return 0.5 * (1.0 + np.tanh(0.5 * z))


# ----------------------------------------------------------------------------
# Initialization


def glorot_bound(fan_in: int, fan_out: int) -> float:
  return math.sqrt(6.0 / (fan_in + fan_out))


def _glorot(rng: np.random.Generator, shape: Tuple[int, ...], fan_in: int,
            fan_out: int) -> np.ndarray:
  a = glorot_bound(fan_in, fan_out)
  return rng.uniform(-a, a, size=shape)


def init_params(rng: np.random.Generator,
                dims: Dims,
                dropout_rate: float = 0.2) -> ModelParams:
  """Glorot-uniform weights, one bound per gate matrix; zero biases except the
  forget gate, which starts at 1.

  """
  if dims.n_layers < 1 or dims.units < 1 or dims.n_features < 1:
    raise ValueError("invalid dims {}".format(dims))
  if not 0.0 <= dropout_rate < 1.0:
    raise ValueError("dropout_rate must lie in [0, 1), got {}".format(
        dropout_rate))

  layers = []
  for idx in range(dims.n_layers):
    in_dim = layer_in_dim(dims, idx)
    W = np.stack([
        _glorot(rng, (dims.units, in_dim), in_dim, dims.units)
        for _ in range(N_GATES)
    ])
    U = np.stack([
        _glorot(rng, (dims.units, dims.units), dims.units, dims.units)
        for _ in range(N_GATES)
    ])
    b = np.zeros((N_GATES, dims.units))
    b[FORGET] = 1.0
    layers.append(LstmLayerParams(W, U, b))

  dense_w = _glorot(rng, (dims.units,), dims.units, 1)
  return ModelParams(layers=tuple(layers),
                     dense_w=dense_w,
                     dense_b=np.zeros(1),
                     dropout_rate=float(dropout_rate))


# ----------------------------------------------------------------------------
# Single cell

CellCache = NamedTuple("CellCache", [("x", np.ndarray), ("h_prev", np.ndarray),
                                     ("c_prev", np.ndarray),
                                     ("i", np.ndarray), ("f", np.ndarray),
                                     ("g", np.ndarray), ("o", np.ndarray),
                                     ("tanh_c", np.ndarray)])


def _check_shape(what: str, arr: np.ndarray, expected: Tuple[int, ...]):
  if arr.shape != tuple(expected):
    raise e.ShapeMismatch(what, expected, arr.shape)


def lstm_cell_forward(
    x: np.ndarray, h_prev: np.ndarray, c_prev: np.ndarray,
    p: LstmLayerParams) -> Tuple[np.ndarray, np.ndarray, CellCache]:
  """One time step for a batch. x is (B, in_dim) and the states (B, units);
  1-D vectors are accepted as a batch of one and come back 1-D.

  """
  squeeze = np.ndim(x) == 1
  x, h_prev, c_prev = (np.atleast_2d(np.asarray(v, dtype=np.float64))
                       for v in (x, h_prev, c_prev))

  batch = x.shape[0]
  _check_shape("x", x, (batch, p.in_dim))
  _check_shape("h_prev", h_prev, (batch, p.units))
  _check_shape("c_prev", c_prev, (batch, p.units))

  z = (np.einsum('bi,gui->bgu', x, p.W) +
       np.einsum('bj,guj->bgu', h_prev, p.U) + p.b[None, :, :])

  i = sigmoid(z[:, INPUT])
  f = sigmoid(z[:, FORGET])
  g = np.tanh(z[:, CELL])
  o = sigmoid(z[:, OUTPUT])

  c = f * c_prev + i * g
  tanh_c = np.tanh(c)
  h = o * tanh_c

  cache = CellCache(x, h_prev, c_prev, i, f, g, o, tanh_c)
  if squeeze:
    return h[0], c[0], cache
  return h, c, cache


def lstm_cell_backward(dh: np.ndarray, dc: np.ndarray, cache: CellCache,
                       p: LstmLayerParams):
  """Reverse of lstm_cell_forward for a batch.

  Returns (dx, dh_prev, dc_prev, dW, dU, db).
  """
  dh = np.atleast_2d(dh)
  dc = np.atleast_2d(dc)

  i, f, g, o, tanh_c = cache.i, cache.f, cache.g, cache.o, cache.tanh_c

  do = dh * tanh_c
  dc_total = dc + dh * o * (1.0 - tanh_c**2)
  di = dc_total * g
  df = dc_total * cache.c_prev
  dg = dc_total * i
  dc_prev = dc_total * f

  dz = np.empty((dh.shape[0], N_GATES, p.units))
  dz[:, INPUT] = di * i * (1.0 - i)
  dz[:, FORGET] = df * f * (1.0 - f)
  dz[:, CELL] = dg * (1.0 - g**2)
  dz[:, OUTPUT] = do * o * (1.0 - o)

  dW = np.einsum('bgu,bi->gui', dz, cache.x)
  dU = np.einsum('bgu,bj->guj', dz, cache.h_prev)
  db = dz.sum(axis=0)
  dx = np.einsum('bgu,gui->bi', dz, p.W)
  dh_prev = np.einsum('bgu,guj->bj', dz, p.U)

  return dx, dh_prev, dc_prev, dW, dU, db


# ----------------------------------------------------------------------------
# Whole layer, whole model


def layer_forward(X: np.ndarray,
                  p: LstmLayerParams) -> Tuple[np.ndarray, List[CellCache]]:
  """Runs a layer over a (B, T, in_dim) sequence from zero state; returns the
  (B, T, units) hidden sequence and one cache per step.

  """
  batch, steps, _ = X.shape
  h = np.zeros((batch, p.units))
  c = np.zeros((batch, p.units))
  H = np.empty((batch, steps, p.units))

  caches = []
  for t in range(steps):
    h, c, cache = lstm_cell_forward(X[:, t, :], h, c, p)
    H[:, t, :] = h
    caches.append(cache)

  return H, caches


def layer_backward(dH: np.ndarray, caches: List[CellCache],
                   p: LstmLayerParams) -> Tuple[np.ndarray, LstmLayerParams]:
  """Backpropagation through time for one layer. dH holds the loss gradient
  with respect to each step's hidden output; returns the gradient with respect
  to the layer input and the parameter gradients.

  """
  batch, steps, _ = dH.shape
  dX = np.empty((batch, steps, p.in_dim))
  dW = np.zeros_like(p.W)
  dU = np.zeros_like(p.U)
  db = np.zeros_like(p.b)

  dh_next = np.zeros((batch, p.units))
  dc_next = np.zeros((batch, p.units))
  for t in reversed(range(steps)):
    dx, dh_next, dc_next, gW, gU, gb = lstm_cell_backward(
        dH[:, t, :] + dh_next, dc_next, caches[t], p)
    dX[:, t, :] = dx
    dW += gW
    dU += gU
    db += gb

  return dX, LstmLayerParams(dW, dU, db)


ForwardCache = NamedTuple("ForwardCache",
                          [("params", ModelParams),
                           ("layer_caches", List[List[CellCache]]),
                           ("masks", List[Optional[np.ndarray]]),
                           ("steps", int), ("head_input", np.ndarray),
                           ("fingerprint", bytes)])


def dropout_mask(rng: np.random.Generator, shape: Tuple[int, ...],
                 rate: float) -> np.ndarray:
  """Inverted dropout: keep with probability 1 - rate, scale kept units by
  1 / (1 - rate) so the expected output is unchanged.

  """
  keep = rng.random(shape) < (1.0 - rate)
  return keep / (1.0 - rate)


def model_forward(X: np.ndarray,
                  params: ModelParams,
                  mode: Mode = Mode.EVAL,
                  rng: Optional[np.random.Generator] = None
                 ) -> Tuple[np.ndarray, ForwardCache]:
  """Predicts one value per sample of a (B, T, features) batch.

  In TRAIN mode each LSTM output gets a fresh dropout mask drawn from rng (one
  independent draw per sample, step and unit). EVAL mode is the identity and
  never touches rng.

  """
  mode = Mode(mode)
  if mode == Mode.TRAIN and rng is None:
    raise ValueError("train mode needs an rng for the dropout masks")

  X = np.asarray(X, dtype=np.float64)
  if X.ndim != 3:
    raise e.ShapeMismatch("X", ("batch", "steps", params.dims.n_features),
                          X.shape)
  batch, steps, width = X.shape
  _check_shape("X", X, (batch, steps, params.dims.n_features))

  use_dropout = mode == Mode.TRAIN and params.dropout_rate > 0.0
  last = len(params.layers) - 1

  out = X
  layer_caches = []
  masks = []
  for idx, layer in enumerate(params.layers):
    H, caches = layer_forward(out, layer)
    layer_caches.append(caches)

    out = H if idx < last else H[:, -1, :]

    mask = None
    if use_dropout:
      mask = dropout_mask(rng, out.shape, params.dropout_rate)
      out = out * mask
    masks.append(mask)

  y_hat = out @ params.dense_w + params.dense_b[0]
  return y_hat, ForwardCache(params, layer_caches, masks, steps, out,
                              fingerprint(params))


def model_backward(cache: ForwardCache, dy: np.ndarray,
                   params: ModelParams) -> Gradients:
  """Exact gradients of a loss with respect to every parameter, given that
  loss's gradient dy with respect to the forward outputs.

  """
  if cache.params is not params and not all(
      a is b for a, b in zip(_arrays(cache.params), _arrays(params))):
    raise e.StaleCache()
  # Adam steps mutate the same arrays, so compare values as well.
  if cache.fingerprint != fingerprint(params):
    raise e.StaleCache()

  dy = np.asarray(dy, dtype=np.float64)
  batch = cache.head_input.shape[0]
  _check_shape("dy", dy, (batch,))

  d_dense_w = cache.head_input.T @ dy
  d_dense_b = np.array([dy.sum()])

  # Gradient flowing into the final layer's (dropped) last hidden state.
  d_out = np.outer(dy, params.dense_w)

  grads = []
  last = len(params.layers) - 1
  for idx in reversed(range(len(params.layers))):
    layer = params.layers[idx]
    mask = cache.masks[idx]
    if mask is not None:
      d_out = d_out * mask

    if idx == last:
      dH = np.zeros((batch, cache.steps, layer.units))
      dH[:, -1, :] = d_out
    else:
      dH = d_out

    d_out, g = layer_backward(dH, cache.layer_caches[idx], layer)
    grads.append(g)

  return Gradients(layers=tuple(reversed(grads)),
                   dense_w=d_dense_w,
                   dense_b=d_dense_b)


def _arrays(p: ModelParams) -> List[np.ndarray]:
  ret = [p.dense_w, p.dense_b]
  for layer in p.layers:
    ret.extend([layer.W, layer.U, layer.b])
  return ret


def fingerprint(p: ModelParams) -> bytes:
  """Digest of every parameter value; changes whenever any entry does."""
  h = hashlib.blake2b(digest_size=16)
  for arr in _arrays(p):
    h.update(np.ascontiguousarray(arr).tobytes())
  return h.digest()


def predict(params: ModelParams, X: np.ndarray) -> np.ndarray:
  """Eval-mode predictions."""
  y_hat, _ = model_forward(X, params, Mode.EVAL)
  return y_hat


# ----------------------------------------------------------------------------
# Loss


def mae_loss(y_hat: np.ndarray, y: np.ndarray) -> Tuple[float, np.ndarray]:
  """Mean absolute error and its (sub)gradient, with sign(0) = 0.

  >>> loss, grad = mae_loss(np.array([1.0, -1.0]), np.zeros(2))
  >>> loss, grad.tolist()
  (1.0, [0.5, -0.5])

  """
  y_hat = np.asarray(y_hat, dtype=np.float64)
  y = np.asarray(y, dtype=np.float64)
  if y_hat.shape != y.shape:
    raise e.ShapeMismatch("y_hat", y.shape, y_hat.shape)

  n = y.size
  if n == 0:
    raise e.EmptyBatch()

  diff = y_hat - y
  return float(np.abs(diff).mean()), np.sign(diff) / n


# ----------------------------------------------------------------------------
# Summary

SummaryRow = NamedTuple("SummaryRow", [("name", str), ("output_shape", tuple),
                                       ("params", int)])


def summary(params: ModelParams, steps: int = 1) -> List[SummaryRow]:
  """Layer table in the usual framework shape: one row per LSTM, dropout and
  the dense head, with trainable parameter counts.

  """
  rows = []
  last = len(params.layers) - 1
  for idx, layer in enumerate(params.layers):
    shape = (None, steps, layer.units) if idx < last else (None, layer.units)
    n = layer.W.size + layer.U.size + layer.b.size
    rows.append(SummaryRow("lstm_{}".format(idx + 1), shape, n))
    rows.append(SummaryRow("dropout_{}".format(idx + 1), shape, 0))

  rows.append(
      SummaryRow("dense", (None, 1), params.dense_w.size + params.dense_b.size))
  return rows


def format_summary(rows: List[SummaryRow]) -> str:
  lines = ["{:<16}{:<20}{:>10}".format("Layer", "Output Shape", "Param #")]
  lines.append("-" * 46)
  for r in rows:
    lines.append("{:<16}{:<20}{:>10}".format(r.name, str(r.output_shape),
                                             r.params))
  lines.append("-" * 46)
  lines.append("Total params: {:,}".format(sum(r.params for r in rows)))
  return "\n".join(lines)
