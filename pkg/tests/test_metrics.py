import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randrank.bounds import theorem_bounds
from randrank.dense import EPS
from randrank.errors import StructuralError
from randrank.metrics import (
    METRICS,
    Summary,
    TrialRecord,
    backward_error,
    orthogonality_defect,
    percentile,
    rank_reveal_metrics,
    stability_budget,
    summarize,
)
from randrank.randhaar import SeededRng, sample_haar_orthogonal
from randrank.rrr import RurvResult, rurv


def rec(i, value):
    return TrialRecord(trial_index=i, ratio1=value, ratio2=value, norm3=value)


def test_no_mixing_gives_trivial_metrics():
    sigma = np.array([9.0, 7.0, 3.0, 2.0, 1.0])
    res = rurv(np.diag(sigma), SeededRng(0), v=np.eye(5))
    np.testing.assert_allclose(res.r, np.diag(sigma), atol=1e-15)
    m = rank_reveal_metrics(sigma, res, 2)
    assert m.ratio1 == pytest.approx(1.0) and m.ratio2 == pytest.approx(1.0)
    assert m.norm3 == pytest.approx(0.0, abs=1e-15)
    assert not m.flagged


def test_singular_r11_is_flagged():
    sigma = np.array([2.0, 1.0, 1.0])
    r = np.array([[1.0, 1.0, 1.0], [0.0, 0.0, 1.0], [0.0, 0.0, 1.0]])
    m = rank_reveal_metrics(sigma, RurvResult(np.eye(3), r, np.eye(3)), 2)
    assert m.flagged and math.isnan(m.ratio1) and math.isnan(m.norm3)
    assert m.ratio2 == pytest.approx(1.0)


def test_backward_error_cases(gauss):
    a = gauss.standard_normal((100, 100))
    res = rurv(a, SeededRng(1))
    assert backward_error(a, *res) <= 1e-13
    exact = res.u @ res.r @ res.v
    assert backward_error(exact, *res) <= 1e-15
    assert backward_error(np.zeros((3, 3)), np.eye(3), np.zeros((3, 3)), np.eye(3)) == 0.0


def test_backward_error_first_order(gauss):
    a = gauss.standard_normal((60, 60))
    u, r, v = rurv(a, SeededRng(2))
    du = 1e-8 * gauss.standard_normal(u.shape)
    # |du r v| / |a| for orthogonal v, r = u.T a v.T: about 1e-8 * |du|/|u| scale.
    expected = np.linalg.norm(du @ r @ v) / np.linalg.norm(a)
    err = backward_error(a, u + du, r, v)
    assert expected / 3 <= err <= 3 * expected
    assert 1e-9 < err < 1e-6


def test_orthogonality_defect():
    assert orthogonality_defect(np.eye(7)) == 0.0
    assert orthogonality_defect(2 * np.eye(9)) == pytest.approx(3 * math.sqrt(9))
    assert orthogonality_defect(sample_haar_orthogonal(200, SeededRng(3))) <= 10 * 200 * EPS
    with pytest.raises(StructuralError):
        orthogonality_defect(np.ones((2, 3)))


def test_percentile_rule():
    values = list(range(1, 101))
    assert percentile(values, 0.97) == pytest.approx(97.03)
    assert percentile(values, 0.5) == pytest.approx(50.5)
    assert percentile(values, 1.0) == 100
    assert percentile([4.0], 0.97) == 4.0


def test_summary_single_record():
    s = summarize([rec(0, 2.5)])
    for m in s.metrics.values():
        assert m.min == m.q1 == m.median == m.q3 == m.pct == m.max == 2.5


def test_summary_exceed_counts():
    records = [rec(i, float(i + 1)) for i in range(100)]
    bounds = theorem_bounds(40, 80, 0.03)
    s = summarize(records, bounds)
    assert s.metrics["ratio1"].exceed_count == 0  # bound far above 100
    assert s.metrics["norm3"].bound is None  # no gap, so no norm bound
    assert s.metrics["ratio1"].pct == pytest.approx(97.03)


def test_summary_counts_values_above_bound():
    records = [rec(i, v) for i, v in enumerate([1.0, 5.0, 60_000.0, 70_000.0])]
    s = summarize(records, theorem_bounds(750, 1500, 0.03, 1e7))
    assert s.metrics["ratio1"].exceed_count == 2
    assert s.metrics["norm3"].exceed_count == 0


def test_summary_excludes_flagged():
    records = [rec(0, 1.0), rec(1, 2.0), TrialRecord(2, math.nan, 5.0, math.nan, flagged=True)]
    s = summarize(records)
    assert s.n_trials == 3 and s.n_flagged == 1
    assert s.metrics["ratio1"].max == 2.0


def test_summary_empty():
    with pytest.raises(StructuralError):
        summarize([])


def test_summary_round_trip():
    s = summarize([rec(i, float(i)) for i in range(10)], theorem_bounds(40, 80, 0.03, 1e7))
    assert Summary.from_dict(s.to_dict()) == s


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(1e-3, 1e12), min_size=1, max_size=300), st.floats(0.75, 1.0))
def test_summary_order(values, p):
    s = summarize([rec(i, v) for i, v in enumerate(values)], pct=p)
    for name in METRICS:
        m = s.metrics[name]
        assert m.min <= m.q1 <= m.median <= m.q3 <= m.pct <= m.max


def test_stability_budget():
    assert stability_budget(100) == pytest.approx(100 * 100 * EPS)
