"""Ordered fan-out of independent tasks over a process pool."""

import logging
from multiprocessing import Pool
from typing import Callable, Iterable, List, Optional, Sequence, TypeVar

from tqdm import tqdm

from trimlab.exceptions import ExperimentInterrupted

logger = logging.getLogger(__name__)

Task = TypeVar("Task")
Result = TypeVar("Result")


def map_ordered(
    func: Callable[[Task], Result],
    tasks: Sequence[Task],
    workers: int = 1,
    progress: bool = False,
    desc: Optional[str] = None,
) -> List[Result]:
    """Apply `func` to every task and return results in task order.

    Results depend only on the tasks, never on the number of workers or on
    completion order. With a single worker, tasks run in-process.

    Args:
        func: Picklable, module-level function.
        tasks: Task payloads.
        workers: Number of worker processes.
        progress: Show a progress bar on standard error.
        desc: Progress bar label.

    Returns:
        One result per task, in task order.

    Raises:
        trimlab.exceptions.ExperimentInterrupted: The run was interrupted;
            `report` holds the results completed so far, in task order.
    """
    results: List[Result] = []
    bar = tqdm(total=len(tasks), desc=desc, disable=not progress, ncols=100)
    try:
        if workers <= 1 or len(tasks) <= 1:
            iterator: Iterable[Result] = (func(task) for task in tasks)
            for result in iterator:
                results.append(result)
                bar.update(1)
        else:
            with Pool(processes=min(workers, len(tasks))) as pool:
                for result in pool.imap(func, tasks):
                    results.append(result)
                    bar.update(1)
    except KeyboardInterrupt as exc:
        logger.warning(
            f"Interrupted after {len(results)} of {len(tasks)} tasks; "
            "returning partial results."
        )
        raise ExperimentInterrupted(
            f"interrupted after {len(results)} of {len(tasks)} tasks",
            report=results,
        ) from exc
    finally:
        bar.close()
    logger.debug(f"Completed {len(results)} tasks on {workers} worker(s).")
    return results
