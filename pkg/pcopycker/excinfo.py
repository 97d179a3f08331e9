"""
Serializable execution information of a task that failed in a worker process

Tracebacks cannot be pickled, so the parts needed to report the failure in the parent process are frozen
into plain strings before being put on the results queue.
"""

import traceback


__author__ = "PcoPycker developers"


class FrozenExcInfo:
    """
    Execution information that can be serialized

    :param exc_info: original execution information, as returned by sys.exc_info()
    """
    def __init__(self, exc_info):
        exc_type, exc_value, exc_traceback = exc_info
        self.__type_name = exc_type.__name__ if exc_type is not None else "Exception"
        self.__message = str(exc_value)
        self.__traceback = "".join(traceback.format_exception(exc_type, exc_value, exc_traceback))

    @property
    def type_name(self) -> str:
        """ name of the exception class """
        return self.__type_name

    @property
    def message(self) -> str:
        """ message of the exception """
        return self.__message

    @property
    def traceback(self) -> str:
        """ formatted traceback, as printed by the worker """
        return self.__traceback

    def __str__(self):
        return "{}: {}".format(self.type_name, self.message)
