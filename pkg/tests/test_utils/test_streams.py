"""
Tests for the seeded substreams.
"""
import numpy as np
import pytest
from hypothesis import given, strategies as st

from tcups.utils import BLOCK_SIZE, Domain, block_slices, substream


def test_substream_reproducible():
    """Test that the same key gives the same numbers."""
    a = substream(2008, Domain.PHASE, stream=3, block=1).random(16)
    b = substream(2008, Domain.PHASE, stream=3, block=1).random(16)

    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("key", [
    (2009, Domain.PHASE, 3, 1),
    (2008, Domain.COUNTING, 3, 1),
    (2008, Domain.PHASE, 4, 1),
    (2008, Domain.PHASE, 3, 2),
])
def test_substream_keys_independent(key):
    """Test that changing any part of the key changes the stream."""
    reference = substream(2008, Domain.PHASE, stream=3, block=1).random(16)
    seed, domain, stream, block = key
    other = substream(seed, domain, stream=stream, block=block).random(16)

    assert not np.array_equal(reference, other)


@given(total=st.integers(min_value=1, max_value=10 * BLOCK_SIZE), size=st.integers(min_value=1, max_value=2048))
def test_block_slices_cover_total(total, size):
    """Test that blocks are numbered in order and add up to the total."""
    blocks = list(block_slices(total, size))

    assert [index for index, _ in blocks] == list(range(len(blocks)))
    assert sum(n for _, n in blocks) == total
    assert all(n == size for _, n in blocks[:-1])
    assert 1 <= blocks[-1][1] <= size


def test_block_slices_rejects_empty():
    """Test that zero items is an error."""
    with pytest.raises(ValueError):
        list(block_slices(0))
