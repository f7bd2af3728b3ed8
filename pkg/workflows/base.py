"""
Base class for workflow stages.

Numerical kernels are synchronous; stages hand them to a thread pool capped
by Config.THREADS so that independent runs can proceed concurrently.
"""
import asyncio
import logging
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from functools import partial
from typing import Any, Callable, Optional

from config import Config

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

Emit = Callable[[str], None]

_executor: Optional[ThreadPoolExecutor] = None
_executor_threads = 0


def get_executor() -> ThreadPoolExecutor:
    """Shared worker pool, rebuilt when the thread cap changes."""
    global _executor, _executor_threads
    if _executor is None or _executor_threads != Config.THREADS:
        if _executor is not None:
            _executor.shutdown(wait=False)
        _executor = ThreadPoolExecutor(max_workers=Config.THREADS, thread_name_prefix="solver")
        _executor_threads = Config.THREADS
    return _executor


def _silent(message: str) -> None:
    logger.debug(message)


class BaseStage(ABC):
    """Abstract base class for all workflow stages."""

    def __init__(self, name: str):
        self.name = name

    async def execute(self, *args, **kwargs) -> Any:
        """
        Execute the stage with logging and error propagation.

        Every exception is logged and re-raised unchanged so that the CLI can
        map it to its exit code.
        """
        try:
            logger.info(f"Stage {self.name} started with args: {args} kwargs: {kwargs}")
            result = await self._run(*args, **kwargs)
            logger.info(f"Stage {self.name} completed successfully")
            return result
        except Exception as e:
            logger.error(f"Stage {self.name} failed: {str(e)}")
            raise e

    async def offload(self, fn: Callable[..., Any], *args, **kwargs) -> Any:
        """Run a blocking numerical call on the worker pool."""
        loop = asyncio.get_running_loop()
        return await loop.run_in_executor(get_executor(), partial(fn, *args, **kwargs))

    @abstractmethod
    async def _run(self, *args, **kwargs) -> Any:
        """Implementation of the stage logic."""
        pass
