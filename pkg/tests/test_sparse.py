import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sentilink.sparse import SparseRows


def test_from_triples_sorts_within_rows():
    m = SparseRows.from_triples([1, 0, 1], [2, 1, 0], [3.0, 1.0, 2.0], 2, 3)
    assert m.indptr.tolist() == [0, 1, 3]
    assert m.indices.tolist() == [1, 0, 2]
    assert m.data.tolist() == [1.0, 2.0, 3.0]


def test_duplicate_entry_rejected():
    with pytest.raises(ValueError):
        SparseRows.from_triples([0, 0], [1, 1], [1.0, 1.0], 1, 2)


def test_out_of_range():
    with pytest.raises(IndexError):
        SparseRows.from_triples([0], [5], [1.0], 1, 3)
    with pytest.raises(IndexError):
        SparseRows.from_triples([2], [0], [1.0], 2, 3)


def test_empty_rows_and_take():
    m = SparseRows.from_triples([2], [0], [4.0], 3, 2)
    np.testing.assert_array_equal(m.toarray(), [[0, 0], [0, 0], [4, 0]])
    t = m.take([2, 0, 2])
    np.testing.assert_array_equal(t.toarray(), [[4, 0], [0, 0], [4, 0]])
    assert m.take([]).n_rows == 0


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)),
              elements=st.sampled_from([0.0, 0.0, 1.0, -1.0, 2.5])),
       st.data())
def test_dense_roundtrip_and_take(dense, data):
    m = SparseRows.from_dense(dense)
    np.testing.assert_array_equal(m.toarray(), dense)
    assert m.nnz == np.count_nonzero(dense)
    rows = data.draw(st.lists(st.integers(0, dense.shape[0] - 1), max_size=8))
    np.testing.assert_array_equal(m.take(rows).toarray(), dense[rows].reshape(-1, dense.shape[1]))
