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
"""Command line parser for the tidepool app.

Every setting flag defaults to None so that `tidepool.config.resolve` can tell
a flag that was passed from one that wasn't; the real defaults live on
`RunConfig` and are quoted in each flag's help.

"""
import sys
from typing import List

from absl.flags import argparse_flags

import tidepool.config as conf
import tidepool.errors as e
import tidepool.features as f
import tidepool.ingest as i
import tidepool.plot as p
import tidepool.train_eval as te
import tidepool.util as u
from tidepool import __version__

_DEFAULTS = conf.RunConfig()


class Parser(argparse_flags.ArgumentParser):
  """Reports usage errors in red and exits with the usage exit code."""

  def error(self, message):
    self.print_usage(sys.stderr)
    u.err("{}: error: {}\n".format(self.prog, message))
    sys.exit(e.UsageError.exit_code)


def _help(text: str, key: str) -> str:
  default = getattr(_DEFAULTS, key)
  if default is None:
    return text
  if hasattr(default, "value"):
    default = default.value
  return "{} (default: {})".format(text, default)


# ----------------------------------------------------------------------------
# Arguments


def config_arg(parser):
  parser.add_argument(
      "--config",
      help="YAML (.yaml/.yml) or JSON config file. Keys are the long flag "
      "names without dashes; flags passed on the command line win.")


def workdir_arg(parser):
  parser.add_argument(
      "--workdir",
      help="Directory every stage reads its inputs from and writes its "
      "artifacts to. (Defaults to ${} or '{}'.)".format(conf.WORKDIR_ENV,
                                                         conf.DEFAULT_WORKDIR))


def ticker_arg(parser):
  parser.add_argument("--ticker",
                      type=lambda s: i.parse_ticker(s).symbol,
                      help="Ticker symbol the data belongs to, e.g. TSLA.")


def tweets_arg(parser):
  parser.add_argument("--tweets",
                      type=u.validated_file,
                      help="Tweets CSV (date, rawContent, retweetCount, "
                      "viewCount, hashtags).")


def bars_arg(parser):
  parser.add_argument("--bars",
                      type=u.validated_file,
                      help="Daily OHLCV CSV (Date, Open, High, Low, Close, "
                      "Adj Close, Volume).")


def top_k_arg(parser):
  parser.add_argument("--top_k",
                      type=u.positive_int,
                      help=_help("Most-retweeted tweets kept per day.",
                                 "top_k"))


def lexicon_arg(parser):
  parser.add_argument(
      "--lexicon",
      type=u.validated_file,
      help="term,weight,polarity CSV. (Defaults to the bundled finance "
      "lexicon.)")


def sentiment_scale_arg(parser):
  parser.add_argument("--sentiment_scale",
                      type=float,
                      help=_help("Logit scale applied to lexicon hits.",
                                 "sentiment_scale"))


def train_fraction_arg(parser):
  parser.add_argument("--train_fraction",
                      type=u.unit_interval,
                      help=_help("Leading share of rows used for training.",
                                 "train_fraction"))


def scaler_mode_arg(parser):
  parser.add_argument(
      "--scaler_mode",
      type=lambda s: u.parse_enum(f.ScalerMode, s),
      metavar="{{{}}}".format(",".join(u.enum_vals(f.ScalerMode))),
      help=_help(
          "Fit min/max scaling on all rows ('full') or on the training rows "
          "only ('train_only').", "scaler_mode"))


def seed_arg(parser):
  parser.add_argument(
      "--seed",
      type=u.seed_int,
      help="Unsigned 64-bit seed for initialization and dropout. Required for "
      "training unless set in the config file.")


def training_args(parser):
  parser.add_argument("--epochs",
                      type=u.positive_int,
                      help=_help("Passes over the training rows.", "epochs"))
  parser.add_argument("--batch_size",
                      type=u.positive_int,
                      help=_help("Rows per Adam step.", "batch_size"))
  parser.add_argument("--lr",
                      type=float,
                      help=_help("Adam learning rate.", "lr"))
  parser.add_argument("--beta1",
                      type=float,
                      help=_help("Adam first-moment decay.", "beta1"))
  parser.add_argument("--beta2",
                      type=float,
                      help=_help("Adam second-moment decay.", "beta2"))
  parser.add_argument("--epsilon",
                      type=float,
                      help=_help("Adam denominator epsilon.", "epsilon"))
  parser.add_argument("--dropout_rate",
                      type=float,
                      help=_help("Dropout after every LSTM layer.",
                                 "dropout_rate"))
  parser.add_argument("--units",
                      type=u.positive_int,
                      help=_help("Units per LSTM layer.", "units"))
  parser.add_argument("--layers",
                      type=u.positive_int,
                      help=_help("Stacked LSTM layers.", "layers"))
  parser.add_argument("--verbose",
                      type=int,
                      choices=list(te.VERBOSITY),
                      help=_help(
                          "0 is silent, 1 shows a progress bar, 2 prints one "
                          "line per epoch.", "verbose"))
  parser.add_argument("--record_timing",
                      action="store_true",
                      default=None,
                      help="Write wall-clock epoch times to history.csv "
                      "instead of 0.")
  seed_arg(parser)


def common_args(parser):
  config_arg(parser)
  workdir_arg(parser)
  ticker_arg(parser)


# ----------------------------------------------------------------------------
# Commands


def _add(base, name: str, help: str):
  parser = base.add_parser(name, help=help, description=help)
  common_args(parser)
  return parser


def clean_parser(base):
  parser = _add(base, "clean",
                "Clean tweets and aggregate them into one text per day.")
  tweets_arg(parser)
  top_k_arg(parser)


def sentiment_parser(base):
  parser = _add(base, "sentiment", "Score each day's tweets.")
  lexicon_arg(parser)
  sentiment_scale_arg(parser)


def features_parser(base):
  parser = _add(
      base, "features",
      "Join bars with sentiment into previous-day rows and fit the scaler.")
  bars_arg(parser)
  train_fraction_arg(parser)
  scaler_mode_arg(parser)


def train_parser(base):
  parser = _add(base, "train", "Train the LSTM on the feature rows.")
  train_fraction_arg(parser)
  training_args(parser)


def eval_parser(base):
  parser = _add(base, "eval",
                "Evaluate the trained model on the test rows, in price units.")
  train_fraction_arg(parser)


def predict_parser(base):
  parser = _add(base, "predict",
                "Forecast the close of the session after the last bar.")
  bars_arg(parser)


def plot_parser(base):
  parser = _add(base, "plot", "Render an SVG chart from a stage artifact.")
  parser.add_argument("kind",
                      type=lambda s: u.parse_enum(p.PlotKind, s),
                      metavar="{{{}}}".format(",".join(u.enum_vals(
                          p.PlotKind))),
                      help="Chart to draw.")


def all_settings(parser):
  tweets_arg(parser)
  top_k_arg(parser)
  lexicon_arg(parser)
  sentiment_scale_arg(parser)
  bars_arg(parser)
  train_fraction_arg(parser)
  scaler_mode_arg(parser)
  training_args(parser)


def config_parser(base):
  parser = _add(base, "config", "Print the resolved configuration as JSON.")
  all_settings(parser)


def pipeline_parser(base):
  parser = _add(base, "pipeline",
                "Run clean, sentiment, features, train and eval in order.")
  all_settings(parser)


def tidepool_parser():
  """Creates and returns the argparse instance for the entire tidepool app."""

  parser = Parser(description="""Sentiment-augmented next-day stock price
  forecasting: tweet cleaning, lexicon sentiment, previous-day features and a
  stacked LSTM.""",
                  prog="tidepool")
  parser.add_argument('--version',
                      action='version',
                      version="%(prog)s {}".format(__version__))

  subparser = parser.add_subparsers(dest="command")
  subparser.required = True

  clean_parser(subparser)
  sentiment_parser(subparser)
  features_parser(subparser)
  train_parser(subparser)
  eval_parser(subparser)
  predict_parser(subparser)
  plot_parser(subparser)
  config_parser(subparser)
  pipeline_parser(subparser)

  return parser


def parse_flags(argv: List[str]):
  """Function required by absl.app.run. Internally generates a parser and returns
  the results of parsing tidepool arguments.

  """
  return tidepool_parser().parse_args(argv[1:])
