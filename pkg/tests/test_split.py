import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ozemu.errors import InvalidParamsError, NonFiniteEntryError
from ozemu.split import Orientation, ScalingMode, SliceStack, reconstruct, split_matrix

RANGE_2X2 = np.array([[2.0**53, 2.0**53], [2.0**-53, 2.0**-53]])


def residual_bound(stack):
    """Per-element strict bound 2**(exp - k*q), broadcast to the matrix shape."""
    return np.ldexp(
        np.ones(stack.shape),
        stack.exponent_grid() - stack.num_slices * stack.slice_bits,
    )


class TestSplitBasics:
    def test_zero_matrix_single_element(self):
        st_ = split_matrix(np.array([[0.0]]), 4)
        assert st_.exponents.tolist() == [0]
        for s in st_.slices:
            assert not s.any()
        assert np.array_equal(reconstruct(st_), np.zeros((1, 1)))

    def test_zero_rows_get_exponent_zero(self):
        a = np.array([[0.0, 0.0], [1.5, -2.0]])
        st_ = split_matrix(a, 3)
        assert st_.exponents[0] == 0
        assert not st_.slices[0][0].any()

    @pytest.mark.parametrize("q", [1, 4, 7, 10])
    def test_slice_entries_within_range(self, rng, q):
        a = rng.random((8, 8)) * 100 - 50
        st_ = split_matrix(a, 5, q)
        for s in st_.slices:
            assert np.abs(s).max() <= 2**q - 1

    def test_slice_dtype_fits_eight_bits_at_default_width(self, rng):
        st_ = split_matrix(rng.random((3, 3)), 2)
        assert all(s.dtype == np.int8 for s in st_.slices)
        st16 = split_matrix(rng.random((3, 3)), 2, slice_bits=9)
        assert all(s.dtype == np.int16 for s in st16.slices)

    def test_roundtrip_exact_when_mantissa_fits(self, rng):
        # entries in [0.25, 1): at most 54 significant bits below the row
        # exponent, fully captured by 8 slices of 7 bits
        a = (rng.random((6, 6)) * 0.75 + 0.25) * rng.choice([-1.0, 1.0], size=(6, 6))
        st_ = split_matrix(a, 8, 7)
        assert np.array_equal(reconstruct(st_), a)

    def test_single_slice_bound(self, rng):
        a = rng.random((5, 5)) - 0.5
        st_ = split_matrix(a, 1, 7)
        err = np.abs(reconstruct(st_) - a)
        assert (err <= np.ldexp(np.ones((5, 5)), st_.exponent_grid() - 7)).all()

    def test_reconstruct_all_zero_stack(self):
        st_ = split_matrix(np.zeros((3, 4)), 2)
        assert np.array_equal(reconstruct(st_), np.zeros((3, 4)))

    def test_column_scaled_orientation(self, rng):
        a = rng.random((4, 6)) - 0.5
        st_ = split_matrix(a, 8, 7, Orientation.COL_SCALED)
        assert st_.exponents.shape == (6,)
        err = np.abs(reconstruct(st_) - a)
        assert (err < residual_bound(st_)).all()

    def test_terms_sum_to_reconstruction(self, rng):
        a = rng.random((4, 4)) - 0.5
        st_ = split_matrix(a, 4, 7)
        total = sum(st_.term(s) for s in range(1, 5))
        assert np.array_equal(total, reconstruct(st_))

    def test_stack_arrays_frozen(self, rng):
        st_ = split_matrix(rng.random((3, 3)), 2)
        with pytest.raises(ValueError):
            st_.slices[0][0, 0] = 1
        with pytest.raises(ValueError):
            st_.exponents[0] = 1


class TestDynamicRangePathology:
    def test_global_scaling_zeroes_small_row(self):
        st_ = split_matrix(RANGE_2X2, 8, 7, Orientation.ROW_SCALED, ScalingMode.GLOBAL)
        for s in st_.slices:
            assert not s[1].any()
        rec = reconstruct(st_)
        assert np.array_equal(rec[1], np.zeros(2))
        assert np.array_equal(rec[0], RANGE_2X2[0])

    def test_per_vector_scaling_preserves_both_rows(self):
        st_ = split_matrix(RANGE_2X2, 8, 7, Orientation.ROW_SCALED, ScalingMode.PER_VECTOR)
        assert np.array_equal(reconstruct(st_), RANGE_2X2)

    def test_global_mode_uses_one_exponent(self):
        st_ = split_matrix(RANGE_2X2, 2, 7, Orientation.ROW_SCALED, ScalingMode.GLOBAL)
        assert st_.exponents[0] == st_.exponents[1]


class TestValidation:
    def test_rejects_nan(self):
        with pytest.raises(NonFiniteEntryError):
            split_matrix(np.array([[np.nan, 1.0]]), 2)

    def test_rejects_inf(self):
        with pytest.raises(NonFiniteEntryError):
            split_matrix(np.array([[np.inf], [1.0]]), 2)

    @pytest.mark.parametrize("k,q", [(0, 7), (-1, 7), (2, 0), (2, 11)])
    def test_rejects_bad_params(self, k, q):
        with pytest.raises(InvalidParamsError):
            split_matrix(np.ones((2, 2)), k, q)

    def test_rejects_non_2d(self):
        with pytest.raises(InvalidParamsError):
            split_matrix(np.ones(3), 2)

    def test_term_index_out_of_range(self, rng):
        st_ = split_matrix(rng.random((2, 2)), 2)
        with pytest.raises(InvalidParamsError):
            st_.term(3)

    def test_stack_invariant_checks(self):
        with pytest.raises(InvalidParamsError):
            SliceStack(
                orientation=Orientation.ROW_SCALED, num_slices=2, slice_bits=7,
                exponents=np.zeros(2, dtype=np.int64),
                slices=(np.zeros((2, 2), dtype=np.int8),),  # one slice, k=2
                shape=(2, 2),
            )


@given(
    seed=st.integers(0, 2**32 - 1),
    rows=st.integers(1, 8),
    cols=st.integers(1, 8),
    k=st.integers(1, 12),
    q=st.integers(1, 10),
    wild=st.booleans(),
)
@settings(max_examples=80, deadline=None)
def test_residual_strictly_below_bound_and_monotone(seed, rows, cols, k, q, wild):
    rng = np.random.default_rng(seed)
    a = rng.random((rows, cols)) - 0.5
    if wild:
        # widen per-row dynamic range with exact power-of-two scalings
        a = a * np.ldexp(1.0, rng.integers(-40, 41, size=(rows, 1)))
    st_ = split_matrix(a, k, q)
    err = np.abs(reconstruct(st_) - a)
    assert (err < residual_bound(st_)).all()
    err_next = np.abs(reconstruct(split_matrix(a, k + 1, q)) - a)
    assert (err_next <= err).all()
