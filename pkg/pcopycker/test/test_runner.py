#!/usr/bin/env python3

"""
Tests specifics to the use of multiprocessing for PcoPycker
"""


import functools
import os
import unittest

from pcopycker.exceptions import InvalidArgument, SerializationWarning, WorkerError
from pcopycker.runner import ParallelRunner
from pcopycker.test import NUMBER_OF_PROCESS
from pcopycker.test.test_samples import tasks


__author__ = "PcoPycker developers"


class ParallelRunnerTests(unittest.TestCase):
    """
    Tests related to the multiprocessing part of the framework
    """
    def setUp(self):
        self.runner = ParallelRunner(NUMBER_OF_PROCESS)

    def test_results_in_task_order(self):
        jobs = [functools.partial(tasks.square, value) for value in range(13)]
        self.assertEqual(self.runner.run(jobs), [value * value for value in range(13)])
        self.assertEqual(ParallelRunner().run(jobs), [value * value for value in range(13)])

    def test_isolation(self):
        pids = self.runner.run([tasks.process_id] * 8)
        self.assertNotIn(os.getpid(), pids)
        self.assertGreater(len(set(pids)), 1)

    def test_single_process_runs_locally(self):
        self.assertEqual(ParallelRunner(1).run([tasks.process_id] * 3), [os.getpid()] * 3)

    def test_no_task(self):
        self.assertEqual(self.runner.run([]), [])

    def test_failure_is_reported(self):
        jobs = [functools.partial(tasks.fail, value) for value in range(6)]
        with self.assertRaises(WorkerError) as context:
            self.runner.run(jobs)
        self.assertIn("ZeroDivisionError", str(context.exception))
        self.assertIn("task 3 cannot be run", context.exception.remote_traceback)

    def test_unpicklable_results_are_computed_locally(self):
        with self.assertWarns(SerializationWarning):
            results = self.runner.run([tasks.lock, tasks.lock])
        self.assertTrue(all(hasattr(result, "acquire") for result in results))

    def test_failure_of_a_local_rerun_is_reported(self):
        with self.assertRaises(WorkerError) as context, self.assertWarns(SerializationWarning):
            self.runner.run([tasks.lock_or_fail, tasks.lock_or_fail])
        self.assertIn("ValueError", str(context.exception))
        self.assertIn("no lock outside of a worker", context.exception.remote_traceback)

    def test_invalid_process_number(self):
        for process_number in (0, -2, 1.5):
            with self.subTest(process_number=process_number), self.assertRaises(InvalidArgument):
                ParallelRunner(process_number)


class CollectTasksTests(unittest.TestCase):
    def test_contiguous_chunks(self):
        chunks = ParallelRunner(4).collect_tasks(list("abcdefghij"))
        self.assertEqual(len(chunks), 4)
        self.assertEqual([index for chunk in chunks for index, _ in chunk], list(range(10)))
        self.assertLessEqual(max(map(len, chunks)) - min(map(len, chunks)), 1)

    def test_more_processes_than_tasks(self):
        chunks = ParallelRunner(8).collect_tasks(["a", "b", "c"])
        self.assertEqual(chunks, [[(0, "a")], [(1, "b")], [(2, "c")]])


if __name__ == "__main__":
    unittest.main()
