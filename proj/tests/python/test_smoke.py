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
import copy

import numpy as np
import pytest

import covlab


def test_config_round_trip():
    c = covlab.RunConfig.parse("[lattice]\nnt = 101\nnx = 81\n")
    assert c.nt == 101 and c.nx == 81
    with pytest.raises(covlab.ConfigError):
        covlab.RunConfig.parse("[lattice]\nbogus = 1\n")
    with pytest.raises(covlab.ConfigError):
        covlab.RunConfig.parse("[tolerances]\npairing = -1\n")


def test_spinstat_confirmed_and_recheckable():
    report = covlab.run_spinstat()
    assert report["verdict"]["overall"] == "mechanism-confirmed"
    assert covlab.recheck_report(report) == ""
    tampered = copy.deepcopy(report)
    tampered["stages"][3]["margins"][0]["value"] = 1.0
    assert covlab.recheck_report(tampered) != ""


def test_sabotage_fails_at_deformation():
    c = covlab.RunConfig()
    c.sabotage = "shrink-hat"
    cert = covlab.deform(c)
    assert not cert["pass"]
    assert [cl["clause"] for cl in cert["clauses"] if not cl["pass"]] == ["f"]


def test_checks_pass():
    for check in (covlab.ccr_check, covlab.car_check, covlab.functor_check):
        assert check()["pass"]


def test_covering_map_kernel_and_metric():
    eta = np.diag([1.0, -1.0, -1.0, -1.0])
    assert np.array_equal(covlab.covering_map(-np.eye(2, dtype=complex)), np.eye(4))
    rng = np.random.default_rng(3)
    s = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    s /= np.sqrt(np.linalg.det(s))
    lam = covlab.covering_map(s)
    assert np.max(np.abs(lam.T @ eta @ lam - eta)) < 1e-10 * max(1.0, np.abs(lam).max() ** 2)
    assert covlab.spin_type(1, 0) == "half-integer"
    assert covlab.spin_type(1, 1) == "integer"


def test_schlieder_and_causal_queries():
    zero = np.zeros((2, 2), dtype=complex)
    p = np.kron(np.diag([1.0, 0.0]), np.eye(2)).astype(complex)
    assert covlab.schlieder_check(2, 2, p, np.kron(np.eye(2), zero)) == "A2_zero"
    c = covlab.RunConfig()
    c.nt = c.nx = 41
    csv = covlab.causal_query_csv(c, "site p 20 10\n")
    assert csv.startswith("query,j,i,t,x,region,J+,J-,D+,D-,perp\n")
    with pytest.raises(covlab.ConfigError):
        covlab.causal_query_csv(c, "cone p 1\n")
