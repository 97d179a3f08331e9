"""
Results handler for the multiprocessing runner
"""

import enum
import logging
import queue
import sys
import threading
import warnings

from pcopycker.excinfo import FrozenExcInfo
from pcopycker.exceptions import SerializationWarning, WorkerError


__author__ = "PcoPycker developers"

logger = logging.getLogger(__name__)


class TaskState(enum.Enum):
    """
    Represents all possible outcomes of a task
    """
    success = "success"
    error = "errors"
    serialization_failure = "Serialization failure"


class ResultCollector(threading.Thread):
    """
    Results handler. Given a report queue, will gather the task results in task order

    :param result_queue: queue from which to get the results
    :param tasks: list of tasks that are currently run, used to rerun locally those whose result could not be sent
    """
    def __init__(self, *, result_queue: queue.Queue, tasks):
        super().__init__(daemon=True)
        self.result_queue = result_queue
        self.tasks = tasks
        self.cleanup = False
        self.outcomes = {}
        self.errors = {}

    def end_collection(self) -> None:
        """ Tells the thread that is it time to end """
        self.cleanup = True

    def add_result(self, index: int, value) -> None:
        """
        registers the result of a task

        :param index: index of the task
        :param value: value returned by the task
        """
        self.outcomes[index] = value

    def add_error(self, index: int, exc_info) -> None:
        """
        registers a task as failed

        :param index: index of the task
        :param exc_info: frozen execution information of the failure
        """
        logger.debug("task %d failed in a worker: %s", index, exc_info)
        self.errors[index] = exc_info

    def results(self) -> list:
        """
        The task results in task order

        :return: list with one result per task
        :raise WorkerError: if a task failed or produced no result
        """
        if self.errors:
            index = min(self.errors)
            raise WorkerError("Task {} failed: {}".format(index, self.errors[index]), self.errors[index].traceback)
        missing = [index for index in range(len(self.tasks)) if index not in self.outcomes]
        if missing:
            raise WorkerError("Tasks {} produced no result".format(missing))
        return [self.outcomes[index] for index in range(len(self.tasks))]

    def run(self) -> None:
        """
        processes entries in the queue until told to stop
        """
        while not self.cleanup:
            try:
                state, index, additional_info = self.result_queue.get(timeout=0.1)
            except queue.Empty:
                continue

            self.result_queue.task_done()

            if state == TaskState.serialization_failure:
                warnings.warn("Serialization error: {} on task {}".format(additional_info, index),
                              SerializationWarning)
                # noinspection PyBroadException
                try:
                    self.add_result(index, self.tasks[index]())
                except Exception:
                    self.add_error(index, FrozenExcInfo(sys.exc_info()))
            elif state == TaskState.success:
                self.add_result(index, additional_info)
            elif state == TaskState.error:
                self.add_error(index, additional_info)
            else:
                raise Exception("This is not a valid task state :", state)
