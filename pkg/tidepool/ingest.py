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
"""Parsing and validation of daily stock bars and tweet dumps.

Both formats are plain UTF-8 CSV with RFC 4180 quoting. Every cell is read as
a string and converted here, so parsing never depends on the locale and raw
tweet text comes back exactly as it sits in the file.

Line numbers in errors are physical lines with the header on line 1. A record
whose quoted text spans several lines is reported at the line it starts on.

"""

import argparse
import csv
import datetime
import math
import re
from collections import OrderedDict
from typing import Dict, List, NamedTuple, Optional, Tuple

import pandas as pd

import tidepool.errors as e
import tidepool.util as u

# ----------------------------------------------------------------------------
# Types

DailyBar = NamedTuple("DailyBar", [("date", datetime.date), ("open", float),
                                   ("high", float), ("low", float),
                                   ("close", float),
                                   ("adj_close", Optional[float]),
                                   ("volume", int)])

RawTweet = NamedTuple("RawTweet", [("date", datetime.date),
                                   ("raw_content", str), ("retweet_count", int),
                                   ("view_count", int),
                                   ("hashtags", Tuple[str, ...])])

Ticker = NamedTuple("Ticker", [("symbol", str)])

# ----------------------------------------------------------------------------
# Formats

DATE = "Date"
OPEN = "Open"
HIGH = "High"
LOW = "Low"
CLOSE = "Close"
ADJ_CLOSE = "Adj Close"
VOLUME = "Volume"

BAR_COLUMNS = [DATE, OPEN, HIGH, LOW, CLOSE, ADJ_CLOSE, VOLUME]
REQUIRED_BAR_COLUMNS = [DATE, OPEN, HIGH, LOW, CLOSE, VOLUME]

TWEET_DATE = "date"
RAW_CONTENT = "rawContent"
RETWEET_COUNT = "retweetCount"
VIEW_COUNT = "viewCount"
HASHTAGS = "hashtags"

TWEET_COLUMNS = [TWEET_DATE, RAW_CONTENT, RETWEET_COUNT, VIEW_COUNT, HASHTAGS]
REQUIRED_TWEET_COLUMNS = [TWEET_DATE, RAW_CONTENT, RETWEET_COUNT, HASHTAGS]

HASHTAG_SEPARATOR = ";"

_DATE_RE = re.compile(r"\A\d{4}-\d{2}-\d{2}\Z")
_TICKER_RE = re.compile(r"\A[A-Z0-9.]{1,8}\Z")


def parse_ticker(symbol: str) -> Ticker:
  """Validates an exchange symbol like 'AAPL' or 'BRK.B'.

  >>> parse_ticker("TSLA")
  Ticker(symbol='TSLA')

  """
  if not _TICKER_RE.match(symbol or ""):
    raise argparse.ArgumentTypeError(
        "'{}' isn't a valid ticker; expected 1-8 chars of A-Z, 0-9 or '.'".
        format(symbol))
  return Ticker(symbol)


# ----------------------------------------------------------------------------
# Cell parsers. Each raises ValueError with a short reason; the row loops turn
# that into MalformedRow with file and line context.


def _parse_date(s: str) -> datetime.date:
  if not _DATE_RE.match(s.strip()):
    raise ValueError("date '{}' isn't in YYYY-MM-DD format".format(s))
  try:
    return datetime.date.fromisoformat(s.strip())
  except ValueError:
    raise ValueError("'{}' isn't a real calendar date".format(s))


def _parse_price(name: str, s: str) -> float:
  if s.strip() == "":
    raise ValueError("empty {} field".format(name))
  try:
    v = float(s)
  except ValueError:
    raise ValueError("{} '{}' isn't a number".format(name, s))
  if not math.isfinite(v) or v <= 0:
    raise ValueError("{} must be finite and > 0, got {}".format(name, s))
  return v


def _parse_count(name: str, s: str) -> int:
  if s.strip() == "":
    raise ValueError("empty {} field".format(name))
  try:
    v = float(s)
  except ValueError:
    raise ValueError("{} '{}' isn't a number".format(name, s))
  if not math.isfinite(v) or not v.is_integer():
    raise ValueError("{} must be a whole number, got {}".format(name, s))
  if v < 0:
    raise ValueError("{} must be non-negative, got {}".format(name, s))
  return int(v)


def _record_lines(path: str) -> List[int]:
  """Physical line each data record starts on. Records whose field count
  differs from the header's raise MalformedRow.

  """
  lines = []
  with open(path, newline="", encoding="utf-8") as f:
    reader = csv.reader(f)
    header = next(reader, None)
    if header is None:
      return lines

    start = reader.line_num + 1
    for fields in reader:
      # pandas skips blank lines, so they aren't records.
      if fields:
        if len(fields) != len(header):
          raise e.MalformedRow(
              start, "expected {} fields, saw {}".format(len(header),
                                                         len(fields)), path)
        lines.append(start)
      start = reader.line_num + 1

  return lines


def _read_frame(path: str) -> Tuple[pd.DataFrame, List[int]]:
  """Reads every cell as a string; returns the frame and the physical line
  each row starts on.

  """
  try:
    lines = _record_lines(path)
  except csv.Error as exc:
    raise e.MalformedRow(0, str(exc), path)

  try:
    df = pd.read_csv(path,
                     dtype=str,
                     keep_default_na=False,
                     na_filter=False,
                     encoding="utf-8")
  except pd.errors.EmptyDataError:
    raise e.EmptyFile(path)
  except pd.errors.ParserError as exc:
    m = re.search(r"line (\d+)", str(exc))
    raise e.MalformedRow(int(m.group(1)) if m else 0, str(exc), path)

  if len(df) == 0:
    raise e.EmptyFile(path)
  if len(lines) != len(df):
    raise e.MalformedRow(0, "{} records parsed, {} expected".format(
        len(df), len(lines)), path)

  return df, lines


def _check_columns(df: pd.DataFrame, required: List[str], path: str) -> None:
  for name in required:
    if name not in df.columns:
      raise e.MissingColumn(name, path)


# ----------------------------------------------------------------------------
# Bars


def _bar_from_record(rec: Dict[str, str], has_adj: bool) -> DailyBar:
  date = _parse_date(rec[DATE])
  o = _parse_price(OPEN, rec[OPEN])
  h = _parse_price(HIGH, rec[HIGH])
  lo = _parse_price(LOW, rec[LOW])
  c = _parse_price(CLOSE, rec[CLOSE])
  adj = _parse_price(ADJ_CLOSE, rec[ADJ_CLOSE]) if has_adj else None
  vol = _parse_count(VOLUME, rec[VOLUME])

  if lo > h:
    raise ValueError("low {} is above high {}".format(lo, h))
  if not lo <= o <= h:
    raise ValueError("open {} lies outside [low {}, high {}]".format(o, lo, h))
  if not lo <= c <= h:
    raise ValueError("close {} lies outside [low {}, high {}]".format(
        c, lo, h))

  return DailyBar(date, o, h, lo, c, adj, vol)


def load_bars(path: str) -> List[DailyBar]:
  """Loads a Yahoo-style daily bar CSV; returns the bars in date order.

  Rows must already be in strictly increasing date order; we don't sort
  silently, since duplicate or shuffled dates usually mean a bad export.

  """
  df, lines = _read_frame(path)
  _check_columns(df, REQUIRED_BAR_COLUMNS, path)
  has_adj = ADJ_CLOSE in df.columns

  bars = []
  for line_no, rec in zip(lines, df.to_dict(orient="records")):
    try:
      bar = _bar_from_record(rec, has_adj)
    except ValueError as exc:
      raise e.MalformedRow(line_no, str(exc), path)

    if bars and bar.date <= bars[-1].date:
      raise e.NonMonotonicDates(line_no, path)

    bars.append(bar)

  return bars


def write_bars(bars: List[DailyBar], path: str) -> None:
  """Writes bars in the same CSV format load_bars reads. The 'Adj Close' column
  is only written if every bar carries one.

  """
  has_adj = len(bars) > 0 and all(b.adj_close is not None for b in bars)
  columns = BAR_COLUMNS if has_adj else REQUIRED_BAR_COLUMNS

  df = pd.DataFrame(
      [[
          b.date.isoformat(), b.open, b.high, b.low, b.close, b.adj_close,
          b.volume
      ] for b in bars],
      columns=BAR_COLUMNS)

  df[columns].to_csv(path,
                     index=False,
                     float_format=u.FLOAT_FORMAT,
                     lineterminator="\n",
                     encoding="utf-8")


# ----------------------------------------------------------------------------
# Tweets


def _tweet_from_record(rec: Dict[str, str], has_views: bool) -> RawTweet:
  date = _parse_date(rec[TWEET_DATE])
  retweets = _parse_count(RETWEET_COUNT, rec[RETWEET_COUNT])

  views = 0
  if has_views and rec[VIEW_COUNT].strip() != "":
    views = _parse_count(VIEW_COUNT, rec[VIEW_COUNT])

  tags = tuple(
      tag for tag in rec[HASHTAGS].split(HASHTAG_SEPARATOR) if tag.strip())

  return RawTweet(date, rec[RAW_CONTENT], retweets, views, tags)


def load_tweets(path: str) -> List[RawTweet]:
  """Loads a tweet dump, preserving file order. A missing or empty viewCount
  reads as 0; hashtags are split on ';'.

  """
  df, lines = _read_frame(path)
  _check_columns(df, REQUIRED_TWEET_COLUMNS, path)
  has_views = VIEW_COUNT in df.columns

  tweets = []
  for line_no, rec in zip(lines, df.to_dict(orient="records")):
    try:
      tweets.append(_tweet_from_record(rec, has_views))
    except ValueError as exc:
      raise e.MalformedRow(line_no, str(exc), path)

  return tweets


def group_by_date(
    tweets: List[RawTweet]) -> "OrderedDict[datetime.date, List[RawTweet]]":
  """Buckets tweets by calendar day. Days come back in ascending order; inside
  a day the original file order is kept.

  """
  buckets: Dict[datetime.date, List[RawTweet]] = {}
  for tw in tweets:
    buckets.setdefault(tw.date, []).append(tw)

  return OrderedDict((d, buckets[d]) for d in sorted(buckets))
