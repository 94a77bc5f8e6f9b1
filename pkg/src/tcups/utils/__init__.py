"""
Utility modules for concurrent block evaluation and seeded random streams.
"""
from .runner import BlockRunner, run_blocks
from .streams import BLOCK_SIZE, Domain, block_slices, substream

__all__ = [
    'BlockRunner',
    'run_blocks',
    'BLOCK_SIZE',
    'Domain',
    'block_slices',
    'substream'
]
