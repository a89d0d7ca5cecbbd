import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptive_mt import DomainError, InsufficientDataError, PValueSample, edf_eval, eqf_eval, modified_eqf_eval

pvals = st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=1, max_size=60)


@pytest.mark.parametrize("t, expected", [(0.5, 2 / 3), (0.05, 0.0), (1.0, 1.0), (0.1, 1 / 3)])
def test_edf_small(t, expected):
    assert edf_eval(PValueSample([0.1, 0.5, 0.9]), t) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize(
    "values, u, expected",
    [([0.1, 0.5, 0.9], 0.5, 0.5), ([0.1, 0.5, 0.9], 1.0, 0.9), ([0.3], 0.7, 0.3), ([0.1, 0.5, 0.9], 1 / 3, 0.1)],
)
def test_eqf_small(values, u, expected):
    assert eqf_eval(PValueSample(values), u) == expected


@pytest.mark.parametrize("values, t, expected", [([0.9, 0.95], 0.5, 0.5), ([0.01, 0.02], 0.5, 0.01)])
def test_modified_eqf(values, t, expected):
    assert modified_eqf_eval(PValueSample(values), t) == expected


def test_modified_eqf_at_zero():
    assert modified_eqf_eval(PValueSample([0.4, 0.7]), 0.0) == 0.0


@pytest.mark.parametrize("bad", [[], [0.2, float("nan")], [0.2, float("inf")], [-0.01], [1.0001]])
def test_rejects_bad_input(bad):
    with pytest.raises((DomainError, InsufficientDataError)):
        PValueSample(bad)


def test_eqf_rejects_zero():
    with pytest.raises(DomainError):
        eqf_eval(PValueSample([0.5]), 0.0)


def test_sample_is_immutable():
    s = PValueSample([0.3, 0.1])
    with pytest.raises(ValueError):
        s.values[0] = 0.5
    assert list(s.sorted) == [0.1, 0.3]


@given(pvals)
def test_sorted_view_is_sorted_copy(values):
    s = PValueSample(values)
    assert np.array_equal(s.sorted, np.sort(values))
    assert np.array_equal(PValueSample(s.sorted).sorted, s.sorted)


@given(pvals, st.floats(0.0, 1.0))
def test_edf_matches_brute_force(values, t):
    s = PValueSample(values)
    assert s.edf(t) == sum(v <= t for v in values) / len(values)


@settings(max_examples=200)
@given(pvals, st.floats(1e-6, 1.0))
def test_eqf_is_generalized_inverse(values, u):
    # brute force inf{x in sample : edf(x) >= u}
    s = PValueSample(values)
    cands = [x for x in sorted(values) if s.edf(x) >= u - 1e-12]
    assert s.eqf(u) == cands[0]
    assert s.modified_eqf(u) <= u
