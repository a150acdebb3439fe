import logging
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Any, Callable, Generator, List, Optional, Sequence, Tuple, TypeVar

from tqdm import tqdm

logger = logging.getLogger(__name__)

T = TypeVar('T')


def resolve_n_jobs(n_jobs: Optional[int]) -> int:
    """
    Maps the `n_jobs` argument accepted throughout the package to a number of worker threads.
    `None` and 1 mean serial execution, -1 means one worker per CPU.
    """
    if n_jobs is None:
        return 1
    if n_jobs == -1:
        return os.cpu_count() or 1
    if n_jobs < 1:
        raise ValueError(f"n_jobs must be a positive integer or -1, got {n_jobs}")
    return n_jobs


def chunk(values: Sequence[T], chunksize: int) -> Generator[Tuple[int, Sequence[T]], None, None]:
    """
    Yield successive (start index, chunk) pairs of length `chunksize` from `values`.
    """
    if chunksize < 1:
        raise ValueError(f"chunksize must be positive, got {chunksize}")
    for i in range(0, len(values), chunksize):
        yield i, values[i:i + chunksize]


def parallel_map(fn: Callable[[T], Any],
                 items: Sequence[T],
                 n_jobs: Optional[int] = 1,
                 chunksize: int = 1,
                 progress: bool = False,
                 desc: Optional[str] = None) -> List[Any]:
    """
    Apply `fn` to every item, optionally on a thread pool. Results are returned in the order of `items`
    regardless of the order in which the workers finish, so that the output does not depend on `n_jobs`.

    Parameters
    ----------
    fn
        Function applied to each item. Any randomness must be derived from the item itself.
    items
        Sequence of inputs.
    n_jobs
        Number of worker threads, see :py:func:`resolve_n_jobs`.
    chunksize
        Number of items submitted to a worker at once.
    progress
        Whether to display a progress bar.
    desc
        Progress bar description.

    Returns
    -------
    List of results, one per item.
    """
    n_workers = resolve_n_jobs(n_jobs)
    n_items = len(items)
    if n_workers == 1 or n_items <= 1:
        return [fn(item) for item in tqdm(items, disable=not progress, desc=desc)]

    def run_chunk(values: Sequence[T]) -> List[Any]:
        return [fn(value) for value in values]

    results = [None] * n_items  # type: List[Any]
    logger.debug('Running %d tasks on %d threads', n_items, n_workers)
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        futures = {pool.submit(run_chunk, values): start for start, values in chunk(items, chunksize)}
        with tqdm(total=n_items, disable=not progress, desc=desc) as pbar:
            for future in as_completed(futures):
                start = futures[future]
                chunk_result = future.result()
                results[start:start + len(chunk_result)] = chunk_result
                pbar.update(len(chunk_result))
    return results
