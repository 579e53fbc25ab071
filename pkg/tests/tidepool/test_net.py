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

import json
import math
import unittest

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given, settings

import tidepool.errors as e
import tidepool.net.adam as adam
import tidepool.net.core as c
import tidepool.net.gradcheck as gc
import tidepool.net.serialize as ser
import tidepool.net.types as nt

SMALL = nt.Dims(n_features=3, units=4, n_layers=2)


def small_model(seed, dims=SMALL, dropout_rate=0.0):
  return c.init_params(c.new_rng(seed), dims, dropout_rate)


def batch(seed, n=3, steps=1, width=3):
  rng = np.random.Generator(np.random.PCG64(seed + 1000))
  return rng.uniform(-1, 1, size=(n, steps, width))


def _sig(z):
  return 1.0 / (1.0 + math.exp(-z))


def oracle_cell(x, h, cst, p):
  """Scalar loops over the cell equations, one unit at a time."""
  units = p.units
  h_new, c_new = [], []
  for u in range(units):
    z = []
    for g in range(nt.N_GATES):
      acc = p.b[g, u]
      acc += sum(p.W[g, u, k] * x[k] for k in range(len(x)))
      acc += sum(p.U[g, u, j] * h[j] for j in range(units))
      z.append(acc)
    i, f, gg, o = _sig(z[0]), _sig(z[1]), math.tanh(z[2]), _sig(z[3])
    cu = f * cst[u] + i * gg
    c_new.append(cu)
    h_new.append(o * math.tanh(cu))
  return h_new, c_new


# ----------------------------------------------------------------------------
# Cell


class CellTestSuite(unittest.TestCase):
  """Tests for a single LSTM step."""

  def setUp(self):
    self.p = small_model(3, nt.Dims(2, 3, 1)).layers[0]

  def test_zero_state_zero_input(self):
    h, cst, _ = c.lstm_cell_forward(np.zeros(2), np.zeros(3), np.zeros(3),
                                    self.p)
    self.assertEqual(h.tolist(), [0.0] * 3)
    self.assertEqual(cst.tolist(), [0.0] * 3)

  def test_matches_scalar_oracle(self):
    rng = np.random.Generator(np.random.PCG64(11))
    for _ in range(20):
      x = rng.uniform(-2, 2, size=2)
      h0 = rng.uniform(-1, 1, size=3)
      c0 = rng.uniform(-1, 1, size=3)
      h, cst, _ = c.lstm_cell_forward(x, h0, c0, self.p)
      want_h, want_c = oracle_cell(x, h0, c0, self.p)
      np.testing.assert_allclose(h, want_h, rtol=0, atol=1e-12)
      np.testing.assert_allclose(cst, want_c, rtol=0, atol=1e-12)

  def test_saturated_gates(self):
    # Every gate pinned open and the candidate pinned at 1: c' = c + 1.
    p = nt.LstmLayerParams(np.zeros((4, 3, 2)), np.zeros((4, 3, 3)),
                           np.full((4, 3), 50.0))
    c0 = np.array([0.0, 0.5, -2.0])
    h, cst, _ = c.lstm_cell_forward(np.ones(2), np.zeros(3), c0, p)
    np.testing.assert_allclose(cst, c0 + 1.0, atol=1e-12)
    np.testing.assert_allclose(h, np.tanh(c0 + 1.0), atol=1e-12)
    self.assertTrue(np.all(np.isfinite(h)))

  def test_extreme_preactivations_stay_finite(self):
    p = nt.LstmLayerParams(np.full((4, 3, 2), 1e6), np.zeros((4, 3, 3)),
                           np.zeros((4, 3)))
    for sign in (1.0, -1.0):
      h, cst, _ = c.lstm_cell_forward(np.full(2, sign), np.zeros(3),
                                      np.zeros(3), p)
      self.assertTrue(np.all(np.isfinite(h)))
      self.assertTrue(np.all(np.abs(h) <= 1.0))

  def test_batch_equals_rows(self):
    rng = np.random.Generator(np.random.PCG64(5))
    x = rng.uniform(-1, 1, size=(4, 2))
    h0 = rng.uniform(-1, 1, size=(4, 3))
    c0 = rng.uniform(-1, 1, size=(4, 3))
    h, cst, _ = c.lstm_cell_forward(x, h0, c0, self.p)
    for r in range(4):
      hr, cr, _ = c.lstm_cell_forward(x[r], h0[r], c0[r], self.p)
      np.testing.assert_allclose(h[r], hr, atol=1e-15)
      np.testing.assert_allclose(cst[r], cr, atol=1e-15)

  def test_shape_mismatch(self):
    with self.assertRaises(e.ShapeMismatch):
      c.lstm_cell_forward(np.zeros(5), np.zeros(3), np.zeros(3), self.p)


def test_init_params():
  params = small_model(0, dropout_rate=0.2)
  assert params.dropout_rate == 0.2
  for idx, layer in enumerate(params.layers):
    in_dim = nt.layer_in_dim(SMALL, idx)
    assert layer.W.shape == (4, 4, in_dim)
    assert layer.U.shape == (4, 4, 4)
    assert layer.b[nt.FORGET].tolist() == [1.0] * 4
    assert not np.any(np.delete(layer.b, nt.FORGET, axis=0))
    assert np.all(np.abs(layer.W) <= c.glorot_bound(in_dim, 4))
  assert params.dense_b.tolist() == [0.0]

  with pytest.raises(ValueError):
    c.init_params(c.new_rng(0), nt.Dims(3, 0, 1))
  with pytest.raises(ValueError):
    c.init_params(c.new_rng(0), SMALL, dropout_rate=1.0)


def test_same_seed_same_model():
  a, b = small_model(9), small_model(9)
  for x, y in zip(nt.tensors(a), nt.tensors(b)):
    assert np.array_equal(x, y)
  assert not np.array_equal(small_model(10).dense_w, a.dense_w)


# ----------------------------------------------------------------------------
# Model forward / backward


def test_forward_shapes_and_errors():
  params = small_model(1)
  y_hat, cache = c.model_forward(batch(1, n=5, steps=2), params)
  assert y_hat.shape == (5,)
  assert cache.head_input.shape == (5, 4)

  with pytest.raises(e.ShapeMismatch):
    c.model_forward(np.zeros((5, 1, 8)), params)
  with pytest.raises(e.ShapeMismatch):
    c.model_forward(np.zeros((5, 3)), params)
  with pytest.raises(ValueError):
    c.model_forward(batch(1), params, nt.Mode.TRAIN)


@pytest.mark.parametrize("mode", [nt.Mode.EVAL, nt.Mode.TRAIN])
@pytest.mark.parametrize("steps", [1, 3])
def test_gradient_check(mode, steps):
  for seed in range(20):
    params = small_model(seed, dropout_rate=0.3)
    X = batch(seed, n=3, steps=steps)
    upstream = np.random.Generator(np.random.PCG64(seed)).normal(size=3)

    dropout_seed = seed if mode == nt.Mode.TRAIN else None
    result = gc.gradient_check(X, params, upstream, mode, dropout_seed)

    assert result.max_rel_error < 1e-4, (seed, result)
    assert result.checked > 0


def test_gradient_check_leaves_params_untouched():
  params = small_model(2)
  before = [x.copy() for x in nt.tensors(params)]
  gc.gradient_check(batch(2), params, np.ones(3))
  for x, y in zip(before, nt.tensors(params)):
    assert np.array_equal(x, y)


def test_zero_upstream_zero_gradients():
  params = small_model(4, dropout_rate=0.5)
  _, cache = c.model_forward(batch(4, steps=2), params, nt.Mode.TRAIN,
                             c.new_rng(4))
  grads = c.model_backward(cache, np.zeros(3), params)

  for g, p in zip(nt.tensors(grads), nt.tensors(params)):
    assert g.shape == p.shape
    assert not np.any(g)


def test_stale_cache():
  params = small_model(5)
  _, cache = c.model_forward(batch(5), params)
  with pytest.raises(e.StaleCache):
    c.model_backward(cache, np.ones(3), nt.copy_params(params))


def test_cache_from_before_an_update_is_stale():
  params = small_model(6)
  X = batch(6)
  _, cache = c.model_forward(X, params)
  grads = c.model_backward(cache, np.ones(3), params)

  # Same array objects, new values.
  adam.adam_step(params, grads, adam.init_adam(params, lr=0.01))
  with pytest.raises(e.StaleCache):
    c.model_backward(cache, np.ones(3), params)

  _, fresh = c.model_forward(X, params)
  c.model_backward(fresh, np.ones(3), params)


def test_dropout_mask_expectation():
  mask = c.dropout_mask(c.new_rng(0), (10000,), 0.2)
  assert set(np.unique(mask).tolist()) == {0.0, 1.25}
  assert abs(mask.mean() - 1.0) < 0.02


def test_dropout_zero_rate_draws_nothing():
  params = small_model(6, dropout_rate=0.0)
  X = batch(6, steps=2)
  rng = c.new_rng(6)
  before = rng.bit_generator.state

  train, _ = c.model_forward(X, params, nt.Mode.TRAIN, rng)
  evaluated, _ = c.model_forward(X, params, nt.Mode.EVAL)

  assert np.array_equal(train, evaluated)
  assert rng.bit_generator.state == before


def test_train_mode_is_seeded():
  params = small_model(7, dropout_rate=0.5)
  X = batch(7, n=16)
  a, _ = c.model_forward(X, params, nt.Mode.TRAIN, c.new_rng(1))
  b, _ = c.model_forward(X, params, nt.Mode.TRAIN, c.new_rng(1))
  d, _ = c.model_forward(X, params, nt.Mode.TRAIN, c.new_rng(2))

  assert np.array_equal(a, b)
  assert not np.array_equal(a, d)
  assert np.array_equal(c.predict(params, X), c.predict(params, X))


# ----------------------------------------------------------------------------
# Loss


class MaeTestSuite(unittest.TestCase):
  """Tests for tidepool.net.core.mae_loss."""

  def test_sign_of_zero(self):
    loss, grad = c.mae_loss(np.array([1.0, 2.0, 3.0]), np.array([1.0, 0.0, 4.0]))
    self.assertAlmostEqual(loss, 1.0)
    self.assertEqual(grad.tolist(), [0.0, 1.0 / 3.0, -1.0 / 3.0])

  def test_errors(self):
    with self.assertRaises(e.EmptyBatch):
      c.mae_loss(np.array([]), np.array([]))
    with self.assertRaises(e.ShapeMismatch):
      c.mae_loss(np.zeros(2), np.zeros(3))

  @given(
      st.lists(st.floats(min_value=-1e3, max_value=1e3),
               min_size=1,
               max_size=20))
  def test_non_negative(self, values):
    y = np.array(values)
    loss, _ = c.mae_loss(y, y[::-1])
    self.assertGreaterEqual(loss, 0.0)
    self.assertEqual(c.mae_loss(y, y)[0], 0.0)


# ----------------------------------------------------------------------------
# Adam


class AdamTestSuite(unittest.TestCase):
  """Tests for tidepool.net.adam."""

  def test_first_step_is_lr(self):
    params = small_model(8)
    before = [x.copy() for x in nt.tensors(params)]
    grads = nt.zeros_like(params)
    for g in nt.tensors(grads):
      g += 0.37
    state = adam.init_adam(params, lr=0.01)
    adam.adam_step(params, grads, state)

    self.assertEqual(state.t, 1)
    for x, y in zip(before, nt.tensors(params)):
      np.testing.assert_allclose(x - y, 0.01, rtol=1e-6)

  def test_constant_gradient_steps_are_bounded(self):
    theta = [np.array([0.0])]
    state = adam.AdamState(m=[np.zeros(1)], v=[np.zeros(1)], lr=0.01)
    prev = None
    for _ in range(20):
      before = float(theta[0][0])
      adam.adam_update(theta, [np.array([2.5])], state)
      step = before - float(theta[0][0])
      self.assertLessEqual(step, 0.01 * (1 + 1e-9))
      if prev is not None:
        self.assertLessEqual(step, prev + 1e-15)
      prev = step

  def test_zero_gradient_is_a_no_op(self):
    params = small_model(8)
    before = [x.copy() for x in nt.tensors(params)]
    state = adam.init_adam(params)
    for _ in range(5):
      adam.adam_step(params, nt.zeros_like(params), state)
    for x, y in zip(before, nt.tensors(params)):
      self.assertTrue(np.array_equal(x, y))

  def test_quadratic_matches_scalar_oracle(self):
    # Minimize 0.5 * x**2, whose gradient is x itself.
    theta = [np.array([1.5, -0.25])]
    state = adam.AdamState(m=[np.zeros(2)], v=[np.zeros(2)], lr=0.1)

    want = [1.5, -0.25]
    m, v = [0.0, 0.0], [0.0, 0.0]
    for t in range(1, 11):
      adam.adam_update(theta, [theta[0].copy()], state)
      for k in range(2):
        g = want[k]
        m[k] = 0.9 * m[k] + (1.0 - 0.9) * g
        v[k] = 0.999 * v[k] + (1.0 - 0.999) * g * g
        mh = m[k] / (1 - 0.9**t)
        vh = v[k] / (1 - 0.999**t)
        want[k] -= 0.1 * mh / (math.sqrt(vh) + 1e-8)

    np.testing.assert_allclose(theta[0], want, rtol=0, atol=1e-12)
    self.assertEqual(state.t, 10)

  def test_shape_errors(self):
    params = small_model(8)
    state = adam.init_adam(params)
    with self.assertRaises(e.ShapeMismatch):
      adam.adam_update(nt.tensors(params), [np.zeros(1)], state)

    grads = nt.tensors(nt.zeros_like(params))
    grads[0] = np.zeros((1, 1))
    with self.assertRaises(e.ShapeMismatch):
      adam.adam_update(nt.tensors(params), grads, state)

  def test_bad_hyperparameters(self):
    params = small_model(8)
    for kwargs in [{"lr": 0.0}, {"beta1": 1.0}, {"epsilon": -1.0}]:
      with self.assertRaises(ValueError):
        adam.init_adam(params, **kwargs)


# ----------------------------------------------------------------------------
# Summary and serialization


def test_summary_counts():
  params = c.init_params(c.new_rng(0), nt.DEFAULT_DIMS)
  rows = c.summary(params)

  assert [r.name for r in rows] == [
      "lstm_1", "dropout_1", "lstm_2", "dropout_2", "lstm_3", "dropout_3",
      "dense"
  ]
  assert [r.params for r in rows] == [43600, 0, 80400, 0, 80400, 0, 101]
  assert rows[0].output_shape == (None, 1, 100)
  assert rows[4].output_shape == (None, 100)

  text = c.format_summary(rows)
  assert text.splitlines()[-1] == "Total params: 204,501"


@settings(max_examples=10, deadline=None)
@given(st.integers(min_value=0, max_value=2**64 - 1))
def test_model_file_is_bit_identical(tmp_path_factory, seed):
  params = small_model(seed % 1000, dropout_rate=0.25)
  path = str(tmp_path_factory.mktemp("model") / "model.json")
  ser.save_model(params, path, seed=seed)

  loaded, got_seed = ser.load_model(path)
  assert got_seed == seed
  assert loaded.dropout_rate == 0.25
  for x, y in zip(nt.tensors(params), nt.tensors(loaded)):
    assert x.shape == y.shape
    assert np.array_equal(x, y)


def test_model_file_errors(tmp_path):
  path = str(tmp_path / "model.json")
  ser.save_model(small_model(0), path)

  with open(path) as f:
    doc = json.load(f)

  doc["dense"]["w"] = doc["dense"]["w"][:-1]
  with open(path, "w") as f:
    json.dump(doc, f)
  with pytest.raises(e.ShapeMismatch):
    ser.load_model(path)

  doc["format_version"] = 2
  with open(path, "w") as f:
    json.dump(doc, f)
  with pytest.raises(e.FormatVersionMismatch):
    ser.load_model(path)

  with pytest.raises(e.MissingArtifact):
    ser.load_model(str(tmp_path / "nope.json"))


def test_seeded_train_mode_output():
  """Constant hidden state, so the output depends on the dropout draws alone."""
  params = c.init_params(c.new_rng(0), nt.Dims(3, 5, 1), dropout_rate=0.2)
  layer = params.layers[0]
  layer.W[:] = 0.0
  layer.U[:] = 0.0
  layer.b[:] = 0.0
  layer.b[nt.CELL] = 1.0
  params.dense_w[:] = [1.0, 2.0, 3.0, 4.0, 5.0]
  params.dense_b[:] = 0.25

  y, cache = c.model_forward(batch(0, n=1), params, nt.Mode.TRAIN,
                             c.new_rng(42))

  # PCG64(42) opens with 0.774, 0.439, 0.859, 0.697, 0.094; only the third
  # reaches the 0.8 keep threshold.
  np.testing.assert_allclose(cache.masks[0], [[1.25, 1.25, 0.0, 1.25, 1.25]],
                             rtol=1e-15)
  h = 0.5 * math.tanh(0.5 * math.tanh(1.0))
  assert math.isclose(y[0], 1.25 * 12.0 * h + 0.25, rel_tol=1e-12)
