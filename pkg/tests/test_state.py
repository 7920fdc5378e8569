import numpy as np
import pytest

from sympdefect.state import PhaseState


def test_roundtrip_through_vector():
    st = PhaseState(np.array([1.0, 2.0]), np.array([3.0, 4.0]))
    z = st.to_vector()
    assert np.array_equal(z, [1.0, 2.0, 3.0, 4.0])
    back = PhaseState.from_vector(z)
    assert np.array_equal(back.q, st.q)
    assert np.array_equal(back.p, st.p)


def test_dim_counts_degrees_of_freedom():
    assert PhaseState(np.zeros(3), np.zeros(3)).dim == 3


def test_rejects_mismatched_lengths():
    with pytest.raises(ValueError):
        PhaseState(np.zeros(2), np.zeros(3))


def test_rejects_non_vector_components():
    with pytest.raises(ValueError):
        PhaseState(np.zeros((2, 2)), np.zeros(4))


def test_from_vector_rejects_odd_length():
    with pytest.raises(ValueError):
        PhaseState.from_vector(np.zeros(5))


def test_copy_is_independent():
    st = PhaseState(np.array([1.0]), np.array([2.0]))
    dup = st.copy()
    dup.q[0] = 99.0
    assert st.q[0] == 1.0
