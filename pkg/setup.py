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

from setuptools import find_packages, setup


def version():
  """Reads __version__ out of the package without importing it."""
  with open('tidepool/__init__.py') as f:
    for line in f:
      if line.startswith('__version__'):
        return line.split('=')[1].strip().strip('"\'')
  return None


def readme():
  try:
    with open('README.md') as f:
      return f.read()
  except Exception:
    return None


REQUIRED_PACKAGES = [
    'absl-py',
    'blessings',
    'commentjson',
    'matplotlib>=3.3',
    'numpy>=1.17',
    'pandas>=1.5',
    'pyyaml',
    'tqdm',
    # This is not a real dependency of ours, but we need it to override the
    # dep that commentjson brings in. Delete once this is merged:
    # https://github.com/vaidik/commentjson/pull/33/files
    'lark-parser>=0.7.1,<0.8.0',
]

setup(name='tidepool',
      version=version(),
      description='Sentiment-augmented next-day stock price forecasting with '
      'a from-scratch LSTM.',
      long_description=readme(),
      long_description_content_type="text/markdown",
      python_requires='>=3.8.0',
      author='Tidepool Team',
      license='Apache-2.0',
      packages=find_packages(exclude=('tests', 'docs')),
      install_requires=REQUIRED_PACKAGES,
      include_package_data=True,
      package_data={'tidepool': ['data/*.csv']},
      entry_points={'console_scripts': ['tidepool = tidepool.main:main']})
