import asyncio

from concurrent.futures import Executor
from functools import partial
from typing import Any, Callable, TypeVar

def truncate_string(string: str, max_length: int = 2048, replace_value: str = '...') -> str:
    """Shortens string to a specified length."""

    if max_length <= 0:
        raise ValueError("Max length cannot be less or equal to 0")

    str_len = len(string)
    replace_val_len = len(replace_value)

    # If it's longer than the allowed length
    if str_len > max_length:

        # If replace value is longer or equal to string length
        if max_length < replace_val_len:
            return string[:max_length]

        return string[:max_length - len(replace_value)] + replace_value

    # If it's not, can just return the original string
    return string

function_return_value = TypeVar("function_return_value")
async def run_in_executor(
    func: Callable[..., function_return_value],
    *args: Any,
    executor: Executor | None = None,
    **kwargs: Any
) -> function_return_value:
    """Runs the specified function in executor.

    Can be used to run blocking code. The function and its arguments must be
    picklable when the executor is a process pool."""
    return await asyncio.get_running_loop().run_in_executor(
        executor,
        partial(func, *args, **kwargs)
    )
