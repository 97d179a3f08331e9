"""
Reading samples and writing results

Samples are CSV files with one observation per row. Results are JSON documents for programs and long-format CSV
tables for plots and spreadsheets, both written with enough digits to restore every float exactly.
"""

import datetime
import json
import logging
import math
import os
import re

import numpy as np
import pandas as pd

from pcopycker.exceptions import DataFormatError
from pcopycker.kde import Sample


__author__ = "PcoPycker developers"

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"
TIMESTAMP_FORMAT = "%Y%m%dT%H%M%S"


def _parse_row(row: list, number: int) -> list:
    values = []
    for cell in row:
        try:
            value = float(cell)
        except ValueError:
            raise DataFormatError("non-numeric cell {!r}".format(cell.strip()), number) from None
        if not math.isfinite(value):
            raise DataFormatError("non-finite value {!r}".format(cell.strip()), number)
        values.append(value)
    return values


def ingest_csv(path: str) -> Sample:
    """
    Reads one observation per row

    A first row that is not numeric is taken as a header and skipped. Empty lines are ignored.

    :param path: CSV file
    :raise DataFormatError: on non-numeric or non-finite cells and ragged rows, naming the row
    :raise FileNotFoundError: if the file does not exist
    """
    try:
        frame = pd.read_csv(path, header=None, dtype=str, keep_default_na=False, skip_blank_lines=False)
    except pd.errors.EmptyDataError:
        raise DataFormatError("{} holds no observation".format(path)) from None
    except pd.errors.ParserError as exc:
        match = re.search(r"Expected (\d+) fields in line (\d+), saw (\d+)", str(exc))
        if match is None:
            raise DataFormatError(str(exc)) from None
        expected, number, got = map(int, match.groups())
        raise DataFormatError("expected {} columns, got {}".format(expected, got), number) from None

    rows = []
    width = None
    for number, cells in enumerate(frame.itertuples(index=False, name=None), start=1):
        present = [cell for cell in cells if not pd.isna(cell)]
        if all(not cell.strip() for cell in present):
            continue
        if len(present) != len(cells):
            raise DataFormatError("expected {} columns, got {}".format(len(cells), len(present)), number)
        try:
            values = _parse_row(present, number)
        except DataFormatError:
            if not rows and width is None:
                logger.debug("skipping header row %s of %s", present, path)
                width = len(present)
                continue
            raise
        width = len(values)
        rows.append(values)
    if not rows:
        raise DataFormatError("{} holds no observation".format(path))
    logger.info("read %d observations of dimension %d from %s", len(rows), width, path)
    return Sample(np.array(rows))


def _plain(value):
    """ converts numpy scalars and arrays, and non-finite floats, into JSON-compatible values """
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(item) for item in (value.tolist() if isinstance(value, np.ndarray) else value)]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def dumps(payload) -> str:
    """ JSON text of a result, floats in their shortest round-trip form """
    return json.dumps(_plain(payload), indent=2, sort_keys=True, allow_nan=False)


def output_path(out: str, subcommand: str, extension: str, timestamp: str = None) -> str:
    """
    <out>/<subcommand>_<timestamp>.<extension>

    :param out: output directory, created if needed
    :param subcommand: name of the command
    :param extension: "json" or "csv"
    :param timestamp: shared timestamp of the files of one run, now by default
    """
    if timestamp is None:
        timestamp = datetime.datetime.now().strftime(TIMESTAMP_FORMAT)
    os.makedirs(out, exist_ok=True)
    return os.path.join(out, "{}_{}.{}".format(subcommand, timestamp, extension))


def write_json(path: str, payload) -> str:
    with open(path, "w") as output:
        output.write(dumps(payload))
        output.write("\n")
    logger.info("wrote %s", path)
    return path


def write_csv(path: str, frame: pd.DataFrame) -> str:
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    logger.info("wrote %s", path)
    return path
