import json

import numpy as np

from tricenter import verify


def test_report_structure():
    rep = verify.SuiteReport("demo")
    rep.add("ok", [1e-12, 3e-12], 1e-10, [{"i": 0}, {"i": 1}])
    rep.add("bad", [1.0], 1e-10)
    rep.add("known", [1.0], 1e-10, flag=True)
    d = rep.to_dict()
    assert [c["status"] for c in d["checks"]] == ["pass", "fail", "flagged"]
    assert d["checks"][0]["point"] == {"i": 1}
    assert not rep.passed
    json.dumps(d)


def test_nan_residual_fails():
    rep = verify.SuiteReport("demo")
    rep.add("nan", [np.nan, 0.0], 1.0)
    assert not rep.passed


def test_equilibria_suite_passes():
    rep = verify.suite_equilibria(L_values=(1.0,), G_values=(0.8,))
    assert rep.passed, [c.to_dict() for c in rep.checks if not c.passed]


def test_kam_suite_flags_sign_tension():
    rep = verify.suite_kam(np.random.default_rng(0), n_points=5)
    assert rep.passed
    flagged = [c.name for c in rep.checks if c.status == "flagged"]
    assert flagged == ["gradient_identity_first_34_tail"]


def test_normalform_suite_reports_displayed_coefficient_failure():
    rep = verify.suite_normalform(np.random.default_rng(0), grid=2, n_random=20)
    status = {c.name: c.status for c in rep.checks}
    assert status["second_order_identity"] == "fail"
    assert status["second_order_axisymmetric"] == "pass"
    assert all(v == "pass" for k, v in status.items() if k != "second_order_identity")
