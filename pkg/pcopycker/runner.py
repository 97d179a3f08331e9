"""
This modules implements a parallel task runner

Tasks are argument-less callables (usually :func:`functools.partial` objects over module-level functions). They are
split into contiguous chunks, one process per chunk, and their results are merged back by task index, so the outcome
does not depend on the number of processes nor on the order in which they finish.
"""

import logging
import multiprocessing
import queue
import sys
import threading
import warnings
from pickle import PicklingError

from pcopycker.excinfo import FrozenExcInfo
from pcopycker.exceptions import InvalidArgument, SerializationWarning
from pcopycker.result import ResultCollector, TaskState


__author__ = "PcoPycker developers"

logger = logging.getLogger(__name__)


class ParallelRunner:
    """
    A parallel task runner

    :param process_number: number of processes to use for running the tasks, 1 runs everything in this process
    """
    result_collector_class = ResultCollector

    class Process(multiprocessing.Process):
        """
        Runs a chunk of tasks and reports every result

        :param index: index of the chunk
        :param tasks: list of (task index, task) to run in order
        :param results_queue: a queue where to put the results once done
        :param task_done_notifier: semaphore to acquire to notify from end of task
        :param kwargs: additional arguments to pass to the process
        """
        def __init__(self, index: int, tasks: list, results_queue: queue.Queue,
                     task_done_notifier: threading.Semaphore, **kwargs):
            super().__init__(**kwargs)
            self.index = index
            self.tasks = tasks
            self.results_queue = results_queue
            self.task_done = task_done_notifier

        def run(self) -> None:
            """ Runs the tasks and notifies of every result """
            try:
                for task_index, task in self.tasks:
                    # noinspection PyBroadException
                    try:
                        result = task()
                    except Exception:
                        self.results_queue.put((TaskState.error, task_index, FrozenExcInfo(sys.exc_info())))
                        continue

                    try:
                        self.results_queue.put((TaskState.success, task_index, result))
                    except (PicklingError, TypeError, AttributeError) as exc:
                        self.results_queue.put((TaskState.serialization_failure, task_index, repr(exc)))
            finally:
                self.task_done.release()

    def __init__(self, process_number: int = 1, *, result_collector_class=None):
        if int(process_number) != process_number or process_number < 1:
            raise InvalidArgument("The number of processes must be a positive integer, got {}".format(process_number))
        self.process_number = int(process_number)

        if result_collector_class is not None:
            self.result_collector_class = result_collector_class

    def __repr__(self):
        return "ParallelRunner(process_number={})".format(self.process_number)

    def collect_tasks(self, tasks: list) -> list:
        """
        split all tasks into contiguous chunks to be executed on multiple processes

        :param tasks: tasks that need to be run
        :return: list of chunks, each a list of (task index, task)
        """
        indexed = list(enumerate(tasks))
        chunk_number = min(self.process_number, len(indexed))
        bounds = [round(position * len(indexed) / chunk_number) for position in range(chunk_number + 1)]
        return [indexed[start:stop] for start, stop in zip(bounds[:-1], bounds[1:]) if stop > start]

    def run(self, tasks) -> list:
        """
        Runs every task, one process per chunk of tasks when more than one process is allowed

        :param tasks: iterable of argument-less callables
        :return: the task results, in task order
        :raise WorkerError: if a task raised in a worker process
        """
        tasks = list(tasks)
        if self.process_number <= 1 or len(tasks) <= 1:
            return [task() for task in tasks]

        processes = []
        resource_manager = multiprocessing.Manager()
        try:
            results_queue = resource_manager.Queue()
            tasks_running = resource_manager.BoundedSemaphore(self.process_number)

            results_collector = self.result_collector_class(result_queue=results_queue, tasks=tasks)
            results_collector.start()

            for index, chunk in enumerate(self.collect_tasks(tasks)):
                tasks_running.acquire()
                process = self.Process(index, chunk, results_queue, tasks_running)
                try:
                    process.start()
                except (PicklingError, TypeError, AttributeError) as exc:
                    tasks_running.release()
                    warnings.warn("Serialization error: {} on chunk {}, running it locally".format(exc, index),
                                  SerializationWarning)
                    self.run_locally(chunk, results_collector)
                else:
                    logger.debug("started process for chunk %d of %d tasks", index, len(chunk))
                    processes.append(process)

            for process in processes:
                process.join()

            results_queue.join()
            results_collector.end_collection()
            results_collector.join()
        finally:
            resource_manager.shutdown()

        return results_collector.results()

    @staticmethod
    def run_locally(chunk: list, results_collector: ResultCollector) -> None:
        """
        Runs a chunk of tasks in this process, recording results and failures like a worker would

        :param chunk: list of (task index, task)
        :param results_collector: the collector of the current run
        """
        for task_index, task in chunk:
            # noinspection PyBroadException
            try:
                results_collector.add_result(task_index, task())
            except Exception:
                results_collector.add_error(task_index, FrozenExcInfo(sys.exc_info()))
