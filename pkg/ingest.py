# ==============================================================================
# FILE: ingest.py
# ROLE: CSV Reader
# DESCRIPTION:
# Loads a `date,value` file into a Series. The first column is either an
# ISO-8601 date (stored as its proleptic ordinal day) or an integer index;
# the first data row decides which. One optional header row is accepted.
# Blank lines are skipped but still counted, so every error names the real
# 1-based line of the file.
# ==============================================================================

import re
import logging

import numpy as np
import pandas as pd

from errors import IngestError
from series import Series

logger = logging.getLogger(__name__)

INTEGER_STAMP = re.compile(r"^[+-]?\d+$")
ISO_DATE = "%Y-%m-%d"
EPOCH = pd.Timestamp("1970-01-01")
# date(1970, 1, 1).toordinal()
EPOCH_ORDINAL = 719163


def _blank(cell):
    return cell is None or (isinstance(cell, float) and np.isnan(cell)) or str(cell).strip() == ""


def _is_stamp(cell):
    text = str(cell).strip()
    return bool(INTEGER_STAMP.match(text)) or not pd.isna(pd.to_datetime(text, format=ISO_DATE, errors="coerce"))


def ingest_csv(path):
    logger.info(f"[Ingest] Reading {path}")
    try:
        frame = pd.read_csv(path, header=None, dtype=str, skip_blank_lines=False,
                            keep_default_na=False, skipinitialspace=True)
    except FileNotFoundError:
        raise IngestError(f"input file not found: {path}")
    except pd.errors.EmptyDataError:
        raise IngestError(f"input file is empty: {path}")
    except pd.errors.ParserError as e:
        raise IngestError(f"malformed CSV: {e}")

    if frame.shape[1] != 2:
        raise IngestError(f"expected 2 columns (date,value), found {frame.shape[1]}", line=1)

    rows = [
        (i + 1, stamp, value)
        for i, (stamp, value) in enumerate(zip(frame[0].tolist(), frame[1].tolist()))
        if not (_blank(stamp) and _blank(value))
    ]
    # A header is a first row whose stamp is neither an index nor a date
    if rows and not _is_stamp(rows[0][1]):
        logger.debug(f"[Ingest] Header row detected: {rows[0][1]},{rows[0][2]}")
        rows = rows[1:]
    if not rows:
        raise IngestError(f"no data rows in {path}")

    by_index = bool(INTEGER_STAMP.match(str(rows[0][1]).strip()))
    stamps, values = [], []
    for line, stamp, value in rows:
        stamp, value = str(stamp).strip(), str(value).strip()

        if by_index:
            if not INTEGER_STAMP.match(stamp):
                raise IngestError(f"expected an integer index, got '{stamp}'", line=line)
            position = int(stamp)
        else:
            moment = pd.to_datetime(stamp, format=ISO_DATE, errors="coerce")
            if pd.isna(moment):
                raise IngestError(f"cannot parse date '{stamp}' (expected YYYY-MM-DD)", line=line)
            position = EPOCH_ORDINAL + (moment - EPOCH).days

        try:
            number = float(value)
        except ValueError:
            raise IngestError(f"cannot parse value '{value}'", line=line)
        if not np.isfinite(number):
            raise IngestError(f"non-finite value '{value}'", line=line)

        if stamps and position <= stamps[-1]:
            raise IngestError(f"timestamp '{stamp}' is not after the previous row (duplicate or out of order)",
                              line=line)
        stamps.append(position)
        values.append(number)

    if len(values) < 2:
        raise IngestError(f"a series needs at least 2 rows, got {len(values)}")

    series = Series(np.array(stamps, dtype=np.int64), np.array(values), label=str(path))
    logger.info(f"[Ingest] Loaded {len(series)} rows ({'index' if by_index else 'date'} stamps)")
    return series
