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
"""Tweet cleaning and per-day aggregation.

The cleaning chain lowercases, drops apostrophes, mentions, hashtags and
links, then turns every remaining character outside [a-z0-9] into one space.
The result is never trimmed and runs of spaces are kept.

"""

import datetime
import re
import unicodedata
from typing import Iterable, List, NamedTuple, Optional

import pandas as pd

import tidepool.errors as e
import tidepool.ingest as i

# Tweets per day kept after the retweet-priority sort.
DEFAULT_CAP = 100

SEPARATOR = " "

_APOSTROPHE = re.compile("'")
_MENTION = re.compile("@[A-Za-z0-9_]+")
_HASHTAG = re.compile("#[A-Za-z0-9_]+")
_URL = re.compile(r"http\S+")
_NOT_ALNUM = re.compile("[^a-z0-9]")

DailyTweetAggregate = NamedTuple("DailyTweetAggregate",
                                 [("date", Optional[datetime.date]),
                                  ("text", str), ("tweet_count", int),
                                  ("total_retweets", int)])

# clean.csv columns.
AGG_DATE = "date"
AGG_TEXT = "previous_day_tweets"
AGG_COUNT = "tweet_count"
AGG_RETWEETS = "total_retweets"
AGG_COLUMNS = [AGG_DATE, AGG_TEXT, AGG_COUNT, AGG_RETWEETS]


def clean_tweet(raw: str) -> str:
  """Returns the cleaned, lowercase [a-z0-9 ] form of a tweet.

  Apostrophes go first so contractions collapse instead of splitting:

  >>> clean_tweet("don't")
  'dont'
  >>> clean_tweet("Up 5%! @bob #tsla")
  'up 5    '

  """
  if not isinstance(raw, str):
    return ""

  temp = raw.lower()
  temp = _APOSTROPHE.sub("", temp)
  temp = _MENTION.sub("", temp)
  temp = _HASHTAG.sub("", temp)
  temp = _URL.sub("", temp)
  return _NOT_ALNUM.sub(" ", temp)


def normalize_unicode(raw: str) -> str:
  """NFKD-normalizes the text. Ligatures and other compatibility characters
  decompose to their plain letters; accents split off as combining marks,
  which clean_tweet later turns into spaces.

  """
  return unicodedata.normalize("NFKD", raw)


def aggregate_day(tweets: List[i.RawTweet],
                  cap: int = DEFAULT_CAP,
                  date: Optional[datetime.date] = None) -> DailyTweetAggregate:
  """Builds the "previous day tweets" text for one day.

  Tweets are ranked by retweet count, most shared first; ties keep their input
  order. The top `cap` are normalized, cleaned and joined with single spaces.

  """
  if cap < 1:
    raise ValueError("cap must be >= 1, got {}".format(cap))

  dates = {tw.date for tw in tweets}
  if len(dates) > 1:
    raise ValueError("aggregate_day got tweets from several days: {}".format(
        sorted(dates)))

  if date is None and tweets:
    date = tweets[0].date

  ranked = sorted(tweets, key=lambda tw: -tw.retweet_count)[:cap]
  text = SEPARATOR.join(
      clean_tweet(normalize_unicode(tw.raw_content)) for tw in ranked)

  return DailyTweetAggregate(date=date,
                             text=text,
                             tweet_count=len(ranked),
                             total_retweets=sum(
                                 tw.retweet_count for tw in ranked))


def aggregate_tweets(tweets: Iterable[i.RawTweet],
                     cap: int = DEFAULT_CAP) -> List[DailyTweetAggregate]:
  """Aggregates every day present in the input, in ascending date order."""
  return [
      aggregate_day(day_tweets, cap=cap, date=d)
      for d, day_tweets in i.group_by_date(list(tweets)).items()
  ]


def write_aggregates(aggs: List[DailyTweetAggregate], path: str) -> None:
  df = pd.DataFrame(
      [[a.date.isoformat(), a.text, a.tweet_count, a.total_retweets]
       for a in aggs],
      columns=AGG_COLUMNS)
  df.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")


def load_aggregates(path: str) -> List[DailyTweetAggregate]:
  """Reads a clean.csv artifact back into aggregates."""
  try:
    df = pd.read_csv(path,
                     dtype=str,
                     keep_default_na=False,
                     na_filter=False,
                     encoding="utf-8")
  except pd.errors.EmptyDataError:
    raise e.EmptyFile(path)

  for name in AGG_COLUMNS:
    if name not in df.columns:
      raise e.MissingColumn(name, path)

  ret = []
  for idx, rec in enumerate(df.to_dict(orient="records")):
    try:
      ret.append(
          DailyTweetAggregate(date=datetime.date.fromisoformat(rec[AGG_DATE]),
                              text=rec[AGG_TEXT],
                              tweet_count=int(rec[AGG_COUNT]),
                              total_retweets=int(rec[AGG_RETWEETS])))
    except ValueError as exc:
      raise e.MalformedRow(idx + 2, str(exc), path)

  return ret
