import math

import pytest

from spotvol.models.exceptions import InvalidParameter
from spotvol.models.results import LemmaReport
from spotvol.utils.kernels import k_constant
from spotvol.utils.lemmas import (
    DEFAULT_ORDERS, Lemma, check_orders, evaluate_lemma, evaluate_named, lemmas, run_lemma_suite
)

def test_targets():
    targets = {lemma.name: lemma.target for lemma in lemmas()}
    assert targets["fejer_mass"] == pytest.approx(2 * math.pi)
    assert targets["fejer_square"] == pytest.approx(4 * math.pi / 3)
    assert targets["fejer_first_derivative"] == pytest.approx(2 * math.pi / 15)
    assert targets["fejer_second_derivative"] == pytest.approx(4 * math.pi / 105)
    assert targets["dirichlet_first_derivative"] == pytest.approx(math.pi / 3)
    assert targets["dirichlet_second_derivative"] == pytest.approx(math.pi / 5)
    assert targets["dirichlet_half_mass"] == pytest.approx(math.pi / 2)
    assert targets["discrete_dirichlet_c0.75"] == pytest.approx(math.pi * (1 + 2 * k_constant(1.5)))
    assert len(targets) == len(lemmas())

def test_check_orders():
    assert check_orders([64, 16, 32]) == (16, 32, 64)
    with pytest.raises(InvalidParameter):
        check_orders([16])
    with pytest.raises(InvalidParameter):
        check_orders([2, 16])

def test_exact_identity_passes():
    row = evaluate_named("fejer_mass", (16, 32))
    assert row.passed
    assert max(row.errors) < 1e-10
    assert row.final_error == row.errors[-1]

def test_wrong_limit_fails():
    row = evaluate_lemma(Lemma("constant_two", 1.0, lambda order: 2.0), (16, 32, 64))
    assert not row.passed
    assert row.errors == (1.0, 1.0, 1.0)
    assert row.tolerances == pytest.approx((10 / 16, 10 / 32, 10 / 64))

def test_converging_sequence_passes():
    row = evaluate_lemma(Lemma("one_over_order", 1.0, lambda order: 1.0 + 1.0 / order), (16, 32, 64))
    assert row.passed
    assert row.slope == pytest.approx(1.0)

def test_unknown_identity():
    with pytest.raises(InvalidParameter):
        evaluate_named("fejer_cube", (16, 32))

def test_suite_passes_at_default_orders():
    report = run_lemma_suite()
    assert isinstance(report, LemmaReport)
    assert [row.orders for row in report.rows] == [DEFAULT_ORDERS] * len(report.rows)
    assert report.failures() == []
    assert report.passed
    assert all(row.slope > 0 for row in report.rows if max(row.errors) >= 1e-10)

def test_suite_rejects_bad_scale():
    with pytest.raises(InvalidParameter):
        run_lemma_suite(scale=0.0)
