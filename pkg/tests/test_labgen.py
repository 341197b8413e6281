import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randrank.dense import jacobi_svd_values
from randrank.errors import ConstraintError
from randrank.labgen import SpectrumSpec, realize_spectrum, synthesize_matrix
from randrank.randhaar import SeededRng


def test_stair_example():
    assert realize_spectrum(SpectrumSpec("stair", 4, 2, 10.0)).tolist() == [10, 10, 1, 1]


def test_logspace_example():
    np.testing.assert_allclose(realize_spectrum(SpectrumSpec("logspace", 3, 1, 1e7)), [1e13, 1e6, 1.0], rtol=1e-14)


def test_logspace_constant_ratio_except_gap():
    n, r, gap = 300, 150, 1e7
    sigma = realize_spectrum(SpectrumSpec("logspace", n, r, gap))
    ratios = sigma[:-1] / sigma[1:]
    assert ratios[r - 1] == pytest.approx(gap, rel=1e-10)
    others = np.delete(ratios, r - 1)
    np.testing.assert_allclose(others, (1e13 / gap) ** (1 / (n - 2)), rtol=1e-10)


def test_logspace_needs_gap_below_top():
    with pytest.raises(ConstraintError):
        realize_spectrum(SpectrumSpec("logspace", 10, 5, 1e14, top=1e13))


@pytest.mark.parametrize("kwargs", [
    dict(kind="flat", n=4, r=2, gap=10.0),
    dict(kind="stair", n=4, r=4, gap=10.0),
    dict(kind="stair", n=4, r=0, gap=10.0),
    dict(kind="stair", n=4, r=2, gap=0.5),
])
def test_spec_validation(kwargs):
    with pytest.raises(ConstraintError):
        SpectrumSpec(**kwargs)


@settings(max_examples=80, deadline=None)
@given(
    kind=st.sampled_from(["stair", "logspace"]),
    n=st.integers(3, 400),
    frac=st.floats(0.01, 0.99),
    log_gap=st.floats(0.0, 12.0),
)
def test_spectrum_shape(kind, n, frac, log_gap):
    r = min(n - 1, max(1, int(frac * n)))
    gap = 10.0 ** log_gap
    sigma = realize_spectrum(SpectrumSpec(kind, n, r, gap))
    assert sigma.size == n and np.all(sigma > 0)
    assert np.all(np.diff(sigma) <= 0)
    assert sigma[-1] == 1.0
    assert sigma[0] == (gap if kind == "stair" else 1e13)
    assert sigma[r - 1] / sigma[r] == pytest.approx(gap, rel=1e-9)


def test_synthesize_ones_is_orthogonal():
    a = synthesize_matrix(np.ones(20), SeededRng(1))
    assert np.linalg.norm(a.T @ a - np.eye(20)) <= 1e-13


def test_synthesize_round_trip():
    np.testing.assert_allclose(jacobi_svd_values(synthesize_matrix([3.0, 2.0, 1.0], SeededRng(2))), [3, 2, 1], rtol=1e-12)


def test_synthesize_wide_range():
    sigma = realize_spectrum(SpectrumSpec("logspace", 100, 50, 1e7))
    got = jacobi_svd_values(synthesize_matrix(sigma, SeededRng(3)))
    assert got[0] == pytest.approx(1e13, rel=1e-12)
    assert got[-1] == pytest.approx(1.0, rel=1e-2)


def test_synthesize_frobenius_identity():
    sigma = np.geomspace(1e3, 1.0, 50)
    a = synthesize_matrix(sigma, SeededRng(4))
    assert np.sum(a * a) == pytest.approx(np.sum(sigma**2), rel=1e-12)


def test_synthesize_streams():
    sigma = np.array([5.0, 4.0, 2.0, 1.0])
    a = synthesize_matrix(sigma, SeededRng(5, (0,)))
    b = synthesize_matrix(sigma, SeededRng(5, (1,)))
    assert not np.allclose(a, b)
    np.testing.assert_allclose(jacobi_svd_values(a), jacobi_svd_values(b), rtol=1e-12)
    assert np.array_equal(a, synthesize_matrix(sigma, SeededRng(5, (0,))))


def test_synthesize_rejects_nonpositive():
    with pytest.raises(ConstraintError):
        synthesize_matrix([1.0, 0.0], SeededRng(0))
