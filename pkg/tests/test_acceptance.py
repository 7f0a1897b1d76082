"""The ten desk-scale acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line (shown in the terminal summary).
"""
import pytest

from artifact import validation as val

from conftest import ACCEPTANCE_LINES


def _report(number, res):
    line = f"[criterion {number:2d}] {res.line()}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert res.passed, line


@pytest.fixture(scope="module")
def stresslet_rows():
    return val.stresslet_run(eps=1e-6, nx=60, nz=60, n_gl=16)


def test_c01_recurrence_oracles():
    _report(1, val.suite_recurrences(n_mu=200, n_nu=200, tol=1e-9, max_seconds=60.0))


def test_c02_regularized_quotient():
    _report(2, val.suite_identity_quotient(n=50, n_phi=64, tol=1e-12))


def test_c03_reduction_vs_2d_oracle():
    _report(3, val.suite_theorem_1d(n_targets=20, tol=1e-10))


def test_c04_root_residuals():
    _report(4, val.suite_roots(n=1000, tol=1e-10, newton_frac=0.95))


def test_c05_gate_fidelity():
    _report(5, val.suite_gate(eps=1e-6, nx=60, nz=60, frac=0.99))


def test_c06_estimate_fidelity():
    _report(6, val.suite_estimates(n_targets=500, frac=0.90, slope_tol=0.10))


def test_c07_s3q_tolerance():
    _report(7, val.suite_s3q(eps_list=(1e-4, 1e-6, 1e-8), nx=60, nz=60, n_gl=32, frac10=0.99, max_npan=20))


def test_c08_stresslet_identity(stresslet_rows):
    _report(8, val.suite_stresslet(eps=1e-6, rows=stresslet_rows))


def test_c09_cancellation_flagging(stresslet_rows):
    _report(9, val.suite_flagging(eps=1e-6, rows=stresslet_rows))


def test_c10_npan_log_linear():
    _report(10, val.suite_npan_trend(n=100, eps=1e-8, n_gl=16, r2_min=0.9))
