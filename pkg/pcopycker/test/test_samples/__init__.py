"""
Sample inputs of the tests: CSV files and module-level tasks for the parallel runner
"""

__author__ = "PcoPycker developers"
