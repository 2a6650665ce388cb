"""File formats: counts CSV (wide or long), label tables, result documents.

Region names are external identity only; everything inside the library
works on stable 0-based row indices, assigned here in file order.
"""

import csv
import json

import numpy as np

from .errors import ParseError
from .multinomial import CountMatrix

RESULT_FORMAT_VERSION = 1


def _read_rows(path):
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    rows = [row for row in rows if row and any(cell.strip() for cell in row)]
    if len(rows) < 2:
        raise ParseError(f"{path}: expected a header row and at least one data row")
    return rows


def _parse_count(path, cell, where):
    try:
        value = int(cell)
    except ValueError as exc:
        raise ParseError(f"{path}: non-integer count {cell!r} at {where}") from exc
    if value < 0:
        raise ParseError(f"{path}: negative count at {where}")
    return value


def read_counts(path, long_form=False):
    """Load a counts table; returns (CountMatrix, region ids, category names)."""
    rows = _read_rows(path)
    header, body = rows[0], rows[1:]
    if long_form:
        if len(header) != 3:
            raise ParseError(f"{path}: long form needs exactly 3 columns, got {len(header)}")
        regions, categories = [], []
        cells = {}
        for row in body:
            if len(row) != 3:
                raise ParseError(f"{path}: ragged long-form row {row!r}")
            region, category, cell = (c.strip() for c in row)
            if region not in cells:
                cells[region] = {}
                regions.append(region)
            if category not in categories:
                categories.append(category)
            if category in cells[region]:
                raise ParseError(f"{path}: duplicate cell ({region}, {category})")
            cells[region][category] = _parse_count(path, cell, f"({region}, {category})")
        y = np.zeros((len(regions), len(categories)), dtype=np.int64)
        for i, region in enumerate(regions):
            missing = [c for c in categories if c not in cells[region]]
            if missing:
                raise ParseError(f"{path}: region {region} is missing categories {missing}")
            y[i] = [cells[region][c] for c in categories]
    else:
        if len(header) < 3:
            raise ParseError(f"{path}: wide form needs a region column and >= 2 categories")
        categories = [c.strip() for c in header[1:]]
        regions = []
        y = np.zeros((len(body), len(categories)), dtype=np.int64)
        for i, row in enumerate(body):
            if len(row) != len(header):
                raise ParseError(f"{path}: row {i + 2} has {len(row)} cells, expected {len(header)}")
            regions.append(row[0].strip())
            y[i] = [_parse_count(path, c, f"row {i + 2}") for c in row[1:]]
    if len(set(regions)) != len(regions):
        raise ParseError(f"{path}: region ids are not unique")
    try:
        data = CountMatrix(y=y)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return data, regions, categories


def write_counts(path, data, region_ids=None, category_names=None):
    region_ids = region_ids or [f"r{i}" for i in range(data.n)]
    category_names = category_names or [f"c{j}" for j in range(data.J)]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["region", *category_names])
        for rid, row in zip(region_ids, data.y):
            writer.writerow([rid, *row.tolist()])


def read_labels(path):
    """Label table: CSV with columns (region, label); returns (ids, labels)."""
    rows = _read_rows(path)
    ids, labels = [], []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) < 2:
            raise ParseError(f"{path}: row {i} needs (region, label)")
        ids.append(row[0].strip())
        labels.append(row[1].strip())
    return ids, np.asarray(labels)


def write_labels(path, labels, region_ids=None):
    region_ids = region_ids or [f"r{i}" for i in range(len(labels))]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["region", "label"])
        for rid, lab in zip(region_ids, labels):
            writer.writerow([rid, int(lab)])


def read_column(path, column):
    """Numeric column from a CSV with a header; returns (ids, values)."""
    rows = _read_rows(path)
    header = [c.strip() for c in rows[0]]
    if column not in header:
        raise ParseError(f"{path}: no column named {column!r} (have {header})")
    idx = header.index(column)
    ids, values = [], []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ParseError(f"{path}: row {i} is ragged")
        ids.append(row[0].strip())
        try:
            values.append(float(row[idx]))
        except ValueError as exc:
            raise ParseError(f"{path}: non-numeric value {row[idx]!r} in row {i}") from exc
    return ids, np.asarray(values)


def result_document(result, region_ids=None, category_names=None):
    """Self-describing dictionary form of a fit result (JSON-serializable)."""
    n = result.labels.size
    region_ids = region_ids or [f"r{i}" for i in range(n)]
    doc = {
        "format_version": RESULT_FORMAT_VERSION,
        "seed": int(result.seed),
        "spatial": bool(result.spatial),
        "K": int(result.K),
        "n_regions": int(n),
        "n_categories": int(result.params.lam.shape[1]),
        "identifiability_ok": bool(result.identifiability_ok),
        "converged": bool(result.converged),
        "iterations": int(result.iterations),
        "best_loglik": float(result.best_loglik),
        "free_parameters": int(result.d),
        "bic": float(result.bic),
        "alpha": result.params.gibbs.alpha.tolist(),
        "beta": result.params.gibbs.beta.tolist(),
        "lambda": result.params.lam.tolist(),
        "component_sizes": result.component_sizes().tolist(),
        "loglik_trace": result.loglik_trace.tolist(),
        "regions": region_ids,
        "labels": result.labels.tolist(),
        "responsibilities": result.w.tolist(),
    }
    if category_names:
        doc["categories"] = list(category_names)
    return doc


def write_result(path, result, region_ids=None, category_names=None, extra=None):
    doc = result_document(result, region_ids, category_names)
    if extra:
        doc.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def read_result(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read result file {path}: {exc}") from exc
