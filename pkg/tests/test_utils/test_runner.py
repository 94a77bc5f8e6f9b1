"""
Tests for the BlockRunner class.
"""
import asyncio
import threading
import time
from concurrent.futures import ThreadPoolExecutor

import pytest

from tcups.utils import BlockRunner, run_blocks


@pytest.mark.asyncio
async def test_block_runner_preserves_order():
    """Test that results come back in item order even when blocks finish out of order."""
    def slow_square(x):
        time.sleep(0.01 * (5 - x))
        return x * x

    async with BlockRunner(concurrent_limit=4) as runner:
        results = await runner.map(slow_square, range(5))

    assert results == [0, 1, 4, 9, 16]


@pytest.mark.asyncio
async def test_block_runner_concurrency_limit():
    """Test that no more than concurrent_limit blocks run at once."""
    active = 0
    peak = 0
    lock = threading.Lock()

    def track(_):
        nonlocal active, peak
        with lock:
            active += 1
            peak = max(peak, active)
        time.sleep(0.02)
        with lock:
            active -= 1
        return True

    async with BlockRunner(concurrent_limit=2) as runner:
        await runner.map(track, range(8))

    assert 1 <= peak <= 2


@pytest.mark.asyncio
async def test_block_runner_requires_context():
    """Test that map refuses to run outside 'async with'."""
    runner = BlockRunner(concurrent_limit=2)

    with pytest.raises(RuntimeError):
        await runner.map(abs, [1, 2])


@pytest.mark.asyncio
async def test_block_runner_provided_executor_not_shut_down():
    """Test that a caller-provided executor survives the runner."""
    executor = ThreadPoolExecutor(max_workers=2)
    try:
        async with BlockRunner(concurrent_limit=2, executor=executor) as runner:
            assert await runner.map(abs, [-1, -2]) == [1, 2]
        assert executor.submit(abs, -3).result() == 3
    finally:
        executor.shutdown(wait=True)


@pytest.mark.asyncio
async def test_block_runner_propagates_errors():
    """Test that an exception in one block reaches the caller."""
    def boom(x):
        if x == 2:
            raise ValueError("bad block")
        return x

    async with BlockRunner(concurrent_limit=3) as runner:
        with pytest.raises(ValueError, match="bad block"):
            await runner.map(boom, range(4))


def test_block_runner_invalid_limit():
    """Test that a non-positive concurrency limit is rejected."""
    with pytest.raises(ValueError):
        BlockRunner(concurrent_limit=0)


def test_run_blocks_same_result_for_any_worker_count():
    """Test that the synchronous front end is independent of the worker count."""
    items = list(range(10))
    serial = run_blocks(lambda x: x ** 3, items, workers=1)
    parallel = run_blocks(lambda x: x ** 3, items, workers=4)

    assert serial == parallel == [x ** 3 for x in items]


def test_run_blocks_empty():
    """Test that no items gives no results."""
    assert run_blocks(abs, [], workers=3) == []


def test_run_blocks_single_worker_inside_event_loop():
    """Test that one worker runs inline, so it works inside a running loop."""
    async def outer():
        return run_blocks(abs, [-1, -2], workers=1)

    assert asyncio.run(outer()) == [1, 2]
