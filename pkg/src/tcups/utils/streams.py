"""
Deterministic random substreams.

Every stochastic quantity draws from a generator keyed by
``(seed, domain, stream, block)``. Work is cut into fixed-size blocks, so the
numbers a block sees never depend on how many workers processed the run.
"""
from enum import IntEnum
from typing import Iterator, Tuple

import numpy as np

BLOCK_SIZE = 1024


class Domain(IntEnum):
    """Top-level stream domains; never renumber existing members."""
    PHASE = 1
    COUNTING = 2
    BOOTSTRAP = 3
    LANGEVIN = 4
    RAMAN_LINE = 5


def substream(seed: int, domain: Domain, stream: int = 0, block: int = 0) -> np.random.Generator:
    """
    Build the generator for one block of one stream.

    Args:
        seed: User seed (64-bit non-negative integer)
        domain: Which part of the simulation draws from the stream
        stream: Stream index inside the domain (delay index, channel, ...)
        block: Block index inside the stream

    Returns:
        A freshly seeded numpy Generator
    """
    sequence = np.random.SeedSequence(
        entropy=int(seed),
        spawn_key=(int(domain), int(stream), int(block)),
    )
    return np.random.Generator(np.random.PCG64(sequence))


def block_slices(total: int, block_size: int = BLOCK_SIZE) -> Iterator[Tuple[int, int]]:
    """Yield ``(block_index, size)`` pairs covering ``total`` items."""
    if total < 1:
        raise ValueError(f"need at least one item, got {total}")
    n_blocks = -(-total // block_size)
    for index in range(n_blocks):
        yield index, min(block_size, total - index * block_size)
