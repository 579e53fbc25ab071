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
"""Sentiment scoring of daily tweet aggregates.

A scorer is anything callable as `scorer(text) -> SentimentScores`; it must be
deterministic and safe to call from several threads. The bundled backend is
`LexiconScorer`, which turns weighted lexicon hits into three logits
(negative, neutral, positive) and pushes them through a softmax. Neutral is
the reference class, pinned at logit 0.

"""

import datetime
import math
import os
from typing import Callable, Dict, Iterable, List, NamedTuple, Optional, Tuple

import numpy as np
import pandas as pd
from absl import logging

import tidepool.errors as e
import tidepool.textprep as tp
import tidepool.util as u

SentimentScores = NamedTuple("SentimentScores", [("negative", float),
                                                 ("neutral", float),
                                                 ("positive", float)])

UNIFORM = SentimentScores(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)

# Contract every backend satisfies.
SentimentScorer = Callable[[str], SentimentScores]

Lexicon = NamedTuple("Lexicon", [("positive_terms", Dict[str, float]),
                                 ("negative_terms", Dict[str, float])])

DEFAULT_SCALE = 2.0

POS = "pos"
NEG = "neg"
LEXICON_COLUMNS = ["term", "weight", "polarity"]
BUNDLED_LEXICON = os.path.join(os.path.dirname(__file__), "data",
                               "lexicon.csv")

# sentiment.csv columns.
SCORE_DATE = "date"
SCORE_COLUMNS = [SCORE_DATE, "negative", "neutral", "positive"]

# Tolerance used when validating what a scorer hands back.
SUM_TOLERANCE = 1e-9


def softmax(logits: Iterable[float]) -> np.ndarray:
  """Numerically stable softmax over a short logit vector.

  >>> softmax([0.0, 0.0, 0.0]).tolist() == [1 / 3, 1 / 3, 1 / 3]
  True

  """
  lv = np.asarray(list(logits), dtype=np.float64)
  if not np.all(np.isfinite(lv)):
    raise e.NonFiniteInput(lv.tolist())

  ex = np.exp(lv - lv.max())
  return ex / ex.sum()


# ----------------------------------------------------------------------------
# Lexicon backend


def load_lexicon(path: Optional[str] = None) -> Lexicon:
  """Loads a `term,weight,polarity` file; the bundled finance word list if no
  path is given.

  """
  if path is None:
    path = BUNDLED_LEXICON

  try:
    df = pd.read_csv(path,
                     dtype=str,
                     keep_default_na=False,
                     na_filter=False,
                     encoding="utf-8")
  except pd.errors.EmptyDataError:
    raise e.EmptyFile(path)

  for name in LEXICON_COLUMNS:
    if name not in df.columns:
      raise e.MissingColumn(name, path)

  terms = {POS: {}, NEG: {}}
  for idx, rec in enumerate(df.to_dict(orient="records")):
    line_no = idx + 2
    term = rec["term"].strip()
    polarity = rec["polarity"].strip()

    if term == "" or term != tp.clean_tweet(term).strip() or " " in term:
      raise e.MalformedRow(line_no,
                           "term '{}' isn't a single clean token".format(term),
                           path)
    if polarity not in terms:
      raise e.MalformedRow(
          line_no, "polarity '{}' must be '{}' or '{}'".format(
              polarity, POS, NEG), path)
    try:
      weight = float(rec["weight"])
    except ValueError:
      raise e.MalformedRow(line_no,
                           "weight '{}' isn't a number".format(rec["weight"]),
                           path)
    if not math.isfinite(weight) or weight <= 0:
      raise e.MalformedRow(line_no,
                           "weight must be finite and > 0, got {}".format(
                               rec["weight"]), path)
    if term in terms[polarity]:
      raise e.MalformedRow(line_no, "duplicate term '{}'".format(term), path)

    terms[polarity][term] = weight

  overlap = set(terms[POS]) & set(terms[NEG])
  if overlap:
    raise e.OverlappingTerms(overlap, path)

  return Lexicon(positive_terms=terms[POS], negative_terms=terms[NEG])


def lexicon_score(text: str,
                  lex: Lexicon,
                  scale: float = DEFAULT_SCALE) -> SentimentScores:
  """Scores whitespace-tokenized clean text against the lexicon.

  Hits are summed by weight and divided by sqrt(token count), so long days
  don't drown short ones.

  """
  if not scale > 0:
    raise ValueError("scale must be > 0, got {}".format(scale))

  tokens = text.split()
  n = max(1, len(tokens))
  pos = sum(lex.positive_terms.get(tok, 0.0) for tok in tokens)
  neg = sum(lex.negative_terms.get(tok, 0.0) for tok in tokens)

  norm = scale / math.sqrt(n)
  p = softmax([norm * neg, 0.0, norm * pos])
  return SentimentScores(float(p[0]), float(p[1]), float(p[2]))


class LexiconScorer(object):
  """SentimentScorer backed by a Lexicon. Immutable once built."""

  def __init__(self, lexicon: Lexicon, scale: float = DEFAULT_SCALE):
    if not scale > 0:
      raise ValueError("scale must be > 0, got {}".format(scale))
    self._lexicon = lexicon
    self._scale = scale

  @property
  def scale(self) -> float:
    return self._scale

  def __call__(self, text: str) -> SentimentScores:
    return lexicon_score(text, self._lexicon, self._scale)


# ----------------------------------------------------------------------------
# Scoring days


def _valid(s: SentimentScores) -> bool:
  vals = list(s)
  return (len(vals) == 3 and all(math.isfinite(v) and 0.0 <= v <= 1.0
                                 for v in vals) and
          abs(sum(vals) - 1.0) <= SUM_TOLERANCE)


def score_days(
    aggregates: List[tp.DailyTweetAggregate], scorer: SentimentScorer
) -> Tuple[Dict[datetime.date, SentimentScores], List[Tuple[datetime.date,
                                                             str]]]:
  """Returns (scores by date, failures).

  Days with no text score uniform. A day whose scorer call raises, or returns
  something that isn't a probability triple, is also scored uniform and
  reported in the failure list instead of aborting the whole run.

  """
  seen = set()
  for agg in aggregates:
    if agg.date in seen:
      raise ValueError("duplicate aggregate date {}".format(agg.date))
    seen.add(agg.date)

  scores = {}
  failures = []
  for agg in aggregates:
    if agg.text.strip() == "":
      scores[agg.date] = UNIFORM
      continue

    try:
      s = SentimentScores(*scorer(agg.text))
      if not _valid(s):
        raise ValueError("scorer returned an invalid triple {}".format(
            tuple(s)))
    except Exception as exc:
      reason = "{}: {}".format(type(exc).__name__, exc)
      logging.warning(
          u.t.yellow("Error scoring {}: {}; using uniform scores.".format(
              agg.date, reason)))
      failures.append((agg.date, reason))
      s = UNIFORM

    scores[agg.date] = s

  return scores, failures


def write_scores(scores: Dict[datetime.date, SentimentScores],
                 path: str) -> None:
  df = pd.DataFrame([[d.isoformat(), *scores[d]] for d in sorted(scores)],
                    columns=SCORE_COLUMNS)
  df.to_csv(path,
            index=False,
            float_format=u.FLOAT_FORMAT,
            lineterminator="\n",
            encoding="utf-8")


def load_scores(path: str) -> Dict[datetime.date, SentimentScores]:
  """Reads a sentiment.csv artifact."""
  try:
    df = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
  except pd.errors.EmptyDataError:
    raise e.EmptyFile(path)

  for name in SCORE_COLUMNS:
    if name not in df.columns:
      raise e.MissingColumn(name, path)

  ret = {}
  for idx, rec in enumerate(df.to_dict(orient="records")):
    try:
      d = datetime.date.fromisoformat(rec[SCORE_DATE])
      s = SentimentScores(float(rec["negative"]), float(rec["neutral"]),
                          float(rec["positive"]))
    except ValueError as exc:
      raise e.MalformedRow(idx + 2, str(exc), path)

    if not _valid(s):
      raise e.MalformedRow(idx + 2, "scores {} aren't a probability triple"
                           .format(tuple(s)), path)
    ret[d] = s

  return ret
