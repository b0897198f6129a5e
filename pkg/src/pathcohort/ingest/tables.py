"""CSV readers and writers for features, lineage and patient records.

All files are UTF-8, comma separated, ``\\n`` terminated, with a header
row. Row numbers in errors are file line numbers (the header is line 1).
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import BadValue, HeaderMismatch, NoUsableRows
from ..features.types import FEATURE_COLUMNS, FeatureVector
from ..survival.dataset import SurvivalDataset

ID_COLUMNS = ("patch_id", "wsi_id", "patient_id")
LINEAGE_COLUMNS = ID_COLUMNS
RECORD_COLUMNS = ("patient_id", "time_days", "event")


def _fmt(x):
    # shortest repr that round-trips a float64 exactly
    return repr(float(x))


def _reader(path):
    fh = open(path, newline="", encoding="utf-8")
    rows = csv.reader(fh)
    try:
        header = next(rows)
    except StopIteration:
        fh.close()
        raise HeaderMismatch(message=f"{path}: file is empty, a header row is required") from None
    return fh, [h.strip() for h in header], rows


def _writer(path):
    fh = open(path, "w", newline="", encoding="utf-8")
    return fh, csv.writer(fh, lineterminator="\n")


def _check_exact_header(header, expected):
    if list(header) == list(expected):
        return
    missing = [c for c in expected if c not in header]
    extra = [c for c in header if c not in expected]
    if not missing and not extra:
        raise HeaderMismatch(message="columns are out of the canonical order")
    raise HeaderMismatch(missing, extra)


def _parse_float(text, row, column):
    try:
        value = float(text)
    except ValueError:
        raise BadValue(row, column, text, "not a number") from None
    if not math.isfinite(value):
        raise BadValue(row, column, text, "not finite")
    return value


def _iter_rows(rows, width):
    for line, row in enumerate(rows, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != width:
            raise BadValue(line, None, ",".join(row), f"expected {width} fields, got {len(row)}")
        yield line, row


def load_features(path, embedding=False):
    """Read a features CSV into FeatureVectors.

    Parameters
    ----------
    embedding : bool, default=False
        Accept any number of value columns after the three id columns
        (external embeddings) instead of the canonical 31 feature columns.

    Raises
    ------
    HeaderMismatch
        Header differs from the canonical one.
    BadValue
        Unparseable or non-finite value, or a duplicate ``patch_id``.
    """
    vectors, _ = read_feature_table(path, embedding)
    return vectors


def read_feature_table(path, embedding=False):
    """Like :func:`load_features` but also returns the value column names."""
    fh, header, rows = _reader(path)
    with fh:
        if embedding:
            if tuple(header[:3]) != ID_COLUMNS:
                _check_exact_header(header[:3], ID_COLUMNS)
            columns = header[3:]
            if not columns or any(not c for c in columns) or len(set(columns)) != len(columns):
                raise HeaderMismatch(message="embedding columns must be non-empty and unique")
        else:
            _check_exact_header(header, ID_COLUMNS + FEATURE_COLUMNS)
            columns = list(FEATURE_COLUMNS)
        vectors, seen = [], set()
        for line, row in _iter_rows(rows, len(header)):
            pid, wsi, patient = (c.strip() for c in row[:3])
            for name, value in zip(ID_COLUMNS, (pid, wsi, patient)):
                if not value:
                    raise BadValue(line, name, value, "empty id")
            if pid in seen:
                raise BadValue(line, "patch_id", pid, "duplicate patch_id")
            seen.add(pid)
            values = [_parse_float(v, line, c) for v, c in zip(row[3:], columns)]
            vectors.append(FeatureVector(pid, wsi, patient, np.array(values)))
    return vectors, columns


def write_features(path, vectors, columns=None):
    """Write FeatureVectors with the canonical (or given) value columns."""
    columns = list(FEATURE_COLUMNS if columns is None else columns)
    fh, w = _writer(path)
    with fh:
        w.writerow(list(ID_COLUMNS) + columns)
        for v in vectors:
            if len(v.values) != len(columns):
                raise ValueError(f"vector {v.patch_id!r} has {len(v.values)} values for {len(columns)} columns")
            w.writerow([v.patch_id, v.wsi_id, v.patient_id] + [_fmt(x) for x in v.values])


def load_lineage(path):
    """``patch_id -> (wsi_id, patient_id)`` in file order."""
    fh, header, rows = _reader(path)
    with fh:
        _check_exact_header(header, LINEAGE_COLUMNS)
        out = {}
        for line, row in _iter_rows(rows, 3):
            pid, wsi, patient = (c.strip() for c in row)
            for name, value in zip(LINEAGE_COLUMNS, (pid, wsi, patient)):
                if not value:
                    raise BadValue(line, name, value, "empty id")
            if pid in out:
                raise BadValue(line, "patch_id", pid, "duplicate patch_id")
            out[pid] = (wsi, patient)
    return out


def write_lineage(path, lineage):
    fh, w = _writer(path)
    with fh:
        w.writerow(LINEAGE_COLUMNS)
        for pid, (wsi, patient) in lineage.items():
            w.writerow([pid, wsi, patient])


def lineage_from_features(vectors):
    return {v.patch_id: (v.wsi_id, v.patient_id) for v in vectors}


@dataclass
class RecordsLoad:
    """Parsed records plus the rows dropped for missing required factors.

    ``rejects`` holds ``(line, patient_id, missing_factor_names)`` tuples.
    """

    dataset: SurvivalDataset
    rejects: list = field(default_factory=list)

    def rejects_csv(self):
        lines = ["line,patient_id,missing"]
        lines += [f"{ln},{pid},{';'.join(miss)}" for ln, pid, miss in self.rejects]
        return "\n".join(lines) + "\n"


def read_records(path, schema):
    """Parse a records CSV under ``schema``; see :func:`load_records`."""
    fh, header, rows = _reader(path)
    with fh:
        needed = list(RECORD_COLUMNS) + list(schema.names)
        missing = [c for c in needed if c not in header]
        if missing:
            raise HeaderMismatch(missing, ())
        if len(set(header)) != len(header):
            dup = sorted({c for c in header if header.count(c) > 1})
            raise HeaderMismatch(message="duplicate columns: " + ", ".join(dup))
        col = {c: header.index(c) for c in needed}
        ids, times, events, X, rejects, seen = [], [], [], [], [], set()
        for line, row in _iter_rows(rows, len(header)):
            pid = row[col["patient_id"]].strip()
            if not pid:
                raise BadValue(line, "patient_id", pid, "empty id")
            if pid in seen:
                raise BadValue(line, "patient_id", pid, "duplicate patient_id")
            seen.add(pid)
            t = _parse_float(row[col["time_days"]].strip(), line, "time_days")
            if t <= 0:
                raise BadValue(line, "time_days", row[col["time_days"]], "times must be positive")
            ev = row[col["event"]].strip()
            if ev not in ("0", "1"):
                raise BadValue(line, "event", ev, "event must be 0 or 1")
            codes = [f.encode(row[col[f.name]], line) for f in schema.factors]
            lacking = [f.name for f, c in zip(schema.factors, codes) if f.required and math.isnan(c)]
            if lacking:
                rejects.append((line, pid, lacking))
                continue
            ids.append(pid)
            times.append(t)
            events.append(ev == "1")
            X.append(codes)
    if not ids:
        raise NoUsableRows(f"{path}: no usable record rows")
    X = np.array(X, dtype=np.float64).reshape(len(ids), len(schema))
    return RecordsLoad(SurvivalDataset(times, events, X, schema.names, ids), rejects)


def load_records(path, schema):
    """Read patient records into a SurvivalDataset.

    Factor cells are encoded through ``schema``; missing optional values
    become NaN. Rows missing a required factor are dropped (see
    :func:`read_records` for the rejects list). Columns outside the
    schema are ignored.

    Raises
    ------
    HeaderMismatch
        A required column is absent.
    BadValue
        Unparseable cell, ``time_days <= 0``, or event outside {0, 1}.
    NoUsableRows
        Nothing left after dropping rejects.
    """
    return read_records(path, schema).dataset


def write_records(path, ds, schema):
    fh, w = _writer(path)
    with fh:
        w.writerow(list(RECORD_COLUMNS) + list(ds.names))
        specs = [schema[n] for n in ds.names]
        for i in range(ds.n):
            cells = [spec.decode(float(c)) for spec, c in zip(specs, ds.covariates[i])]
            w.writerow([ds.ids[i], _fmt(ds.times[i]), int(ds.events[i])] + cells)
