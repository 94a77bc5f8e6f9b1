"""
Block runner for CPU-bound simulation work with a concurrency limit.
"""
import asyncio
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Iterable, List, Optional, Sequence

logger = logging.getLogger(__name__)


class BlockRunner:
    def __init__(
        self,
        concurrent_limit: int = 1,
        executor: Optional[ThreadPoolExecutor] = None
    ):
        """
        Initialize the block runner.

        Args:
            concurrent_limit: Maximum number of blocks evaluated at once
            executor: Optional executor to use. If not provided, one will be created.
        """
        if concurrent_limit < 1:
            raise ValueError(f"concurrent_limit must be >= 1, got {concurrent_limit}")
        self.concurrent_limit = concurrent_limit
        self._provided_executor = executor
        self._executor: Optional[ThreadPoolExecutor] = None
        self._semaphore: Optional[asyncio.Semaphore] = None

    async def __aenter__(self):
        """Set up the worker threads."""
        if self._provided_executor:
            self._executor = self._provided_executor
        else:
            self._executor = ThreadPoolExecutor(max_workers=self.concurrent_limit)
        self._semaphore = asyncio.Semaphore(self.concurrent_limit)
        return self

    async def __aexit__(self, exc_type, exc_val, exc_tb):
        """Shut down the worker threads."""
        if self._executor and not self._provided_executor:
            self._executor.shutdown(wait=True)
        self._executor = None

    async def _run_one(self, fn: Callable[..., Any], item: Any) -> Any:
        loop = asyncio.get_running_loop()
        async with self._semaphore:  # Limit concurrent blocks
            return await loop.run_in_executor(self._executor, fn, item)

    async def map(self, fn: Callable[[Any], Any], items: Iterable[Any]) -> List[Any]:
        """
        Evaluate ``fn`` on every item concurrently.

        Args:
            fn: Pure function of one item
            items: Work items (block descriptors, delays, ...)

        Returns:
            Results in the order of ``items``, whatever order the blocks finished in
        """
        if self._executor is None:
            raise RuntimeError("BlockRunner must be entered with 'async with' before use")
        tasks = [self._run_one(fn, item) for item in items]
        return list(await asyncio.gather(*tasks))


def run_blocks(fn: Callable[[Any], Any], items: Sequence[Any], workers: int = 1) -> List[Any]:
    """
    Synchronous front end of :class:`BlockRunner`.

    With one worker the items are evaluated inline; otherwise a private event
    loop drives the thread pool. Results always come back in item order.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]

    async def _gather() -> List[Any]:
        async with BlockRunner(concurrent_limit=workers) as runner:
            return await runner.map(fn, items)

    logger.debug(f"Running {len(items)} blocks on {workers} workers")
    return asyncio.run(_gather())
