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
"""Entry point for tidepool's subcommands."""

from __future__ import absolute_import, division, print_function

import logging as ll
import sys

from absl import app, logging

import tidepool.cli as cli
import tidepool.commands as cmd
import tidepool.config as conf
import tidepool.errors as e
import tidepool.util as u

ll.getLogger('matplotlib').setLevel(ll.WARNING)


def run_app(arg_input) -> int:
  """Main function to run the tidepool app. Accepts a Namespace-type output of
  an argparse argument parser and returns the process exit code.

  """
  args = vars(arg_input)
  command = args["command"]

  try:
    cfg = conf.resolve(args)

    if command == "clean":
      cmd.cmd_clean(cfg)

    elif command == "sentiment":
      cmd.cmd_sentiment(cfg)

    elif command == "features":
      cmd.cmd_features(cfg)

    elif command == "train":
      cmd.cmd_train(cfg)

    elif command == "eval":
      cmd.cmd_eval(cfg)

    elif command == "predict":
      cmd.cmd_predict(cfg)

    elif command == "plot":
      cmd.cmd_plot(cfg, args["kind"])

    elif command == "config":
      cmd.cmd_config(cfg)

    elif command == "pipeline":
      cmd.cmd_pipeline(cfg)

    else:
      u.err("Unknown command: {}\n".format(command))
      return e.UsageError.exit_code

  except e.TidepoolError as err:
    logging.error(u.t.red(err.message))
    return err.exit_code

  except OSError as err:
    # Unreadable inputs, unwritable work directories...
    logging.error(u.t.red(str(err)))
    return e.DataError.exit_code

  return 0


def main():
  logging.use_python_logging()
  try:
    app.run(run_app, flags_parser=cli.parse_flags)
  except KeyboardInterrupt:
    logging.info('Shutting down.')
    sys.exit(1)


if __name__ == '__main__':
  main()
