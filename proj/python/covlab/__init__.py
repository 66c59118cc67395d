# Copyright 2026 The covlab Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Python access to the covlab lattice field theory core."""

import json

from ._covlab import (
    CovarianceError,
    ConfigError,
    DiagnosticError,
    DomainError,
    RunConfig,
    causal_query_csv,
    covering_map,
    schlieder_check,
    spin_type,
)
from . import _covlab

__all__ = [
    "CovarianceError",
    "ConfigError",
    "DiagnosticError",
    "DomainError",
    "RunConfig",
    "car_check",
    "causal_query_csv",
    "ccr_check",
    "covering_map",
    "deform",
    "functor_check",
    "recheck_report",
    "run_spinstat",
    "schlieder_check",
    "spin_type",
]


def run_spinstat(config=None):
    """Runs the spin-statistics pipeline and returns report.json as a dict."""
    return json.loads(_covlab.run_spinstat_json(config or RunConfig()))


def recheck_report(report):
    """Empty string if every margin and verdict in `report` is consistent."""
    return _covlab.recheck_report_json(json.dumps(report))


def ccr_check(config=None):
    return json.loads(_covlab.ccr_check_json(config or RunConfig()))


def car_check(config=None):
    return json.loads(_covlab.car_check_json(config or RunConfig()))


def functor_check(config=None):
    return json.loads(_covlab.functor_check_json(config or RunConfig()))


def deform(config=None):
    """Builds and certifies the deformation; returns the clause table."""
    return json.loads(_covlab.deform_json(config or RunConfig()))
