"""Flat-file formats: count CSV, state/results/report JSON, curve CSV."""
import csv
import io
import json
import os

import numpy as np

from .errors import (IoFailure, MalformedCounts, MalformedResults, MalformedState,
                     ValidationError)
from .model import N_MEASUREMENTS, CountSet
from .states import LABELS, validate_density

COUNT_HEADER = ["i", "j", "basis_signal", "basis_idler", "count"]
STATE_FORMAT = "qstdark/state-v1"
RESULTS_FORMAT = "qstdark/results-v1"
REPORT_FORMAT = "qstdark/report-v1"


def _read_text(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc


def write_text(path, text):
    """Write ``text`` to ``path``, or to stdout when ``path`` is None or '-'."""
    if path in (None, "-"):
        import sys
        sys.stdout.write(text)
        return
    try:
        d = os.path.dirname(os.path.abspath(path))
        os.makedirs(d, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def rho_to_pairs(rho):
    rho = np.asarray(rho, dtype=np.complex128).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in rho]


def rho_from_pairs(pairs, error=MalformedState):
    try:
        arr = np.asarray(pairs, dtype=float)
    except (TypeError, ValueError) as exc:
        raise error(f"density matrix entries are not numeric: {exc}") from exc
    if arr.shape != (16, 2):
        raise error(f"expected 16 [re, im] pairs, got shape {arr.shape}")
    rho = (arr[:, 0] + 1j * arr[:, 1]).reshape(4, 4)
    try:
        return validate_density(rho)
    except ValidationError as exc:
        raise error(str(exc)) from exc


def dumps_json(doc):
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


# -- counts -----------------------------------------------------------------

def format_counts(countset):
    buf = io.StringIO()
    buf.write("# qstdark counts\n")
    if countset.metadata:
        buf.write("# provenance: " + json.dumps(countset.metadata, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COUNT_HEADER)
    for k, m in enumerate(countset.counts):
        i, j = divmod(k, 6)
        w.writerow([i + 1, j + 1, LABELS[i], LABELS[j], repr(float(m))])
    return buf.getvalue()


def parse_counts(text):
    meta = {}
    lines = []
    for line in text.splitlines():
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("provenance:"):
                try:
                    meta = json.loads(body[len("provenance:"):])
                except json.JSONDecodeError as exc:
                    raise MalformedCounts(f"bad provenance line: {exc}") from exc
            continue
        if line.strip():
            lines.append(line)
    rows = list(csv.reader(lines))
    if not rows or [c.strip() for c in rows[0]] != COUNT_HEADER:
        raise MalformedCounts("count file header must be " + ",".join(COUNT_HEADER))
    data = rows[1:]
    if len(data) != N_MEASUREMENTS:
        raise MalformedCounts(f"expected {N_MEASUREMENTS} data rows, found {len(data)}")
    counts = np.empty(N_MEASUREMENTS)
    for k, row in enumerate(data):
        if len(row) != 5:
            raise MalformedCounts(f"row {k + 1}: expected 5 fields")
        try:
            i, j = int(row[0]), int(row[1])
            value = float(row[4])
        except ValueError as exc:
            raise MalformedCounts(f"row {k + 1}: {exc}") from exc
        if (i - 1) * 6 + (j - 1) != k or not (1 <= i <= 6 and 1 <= j <= 6):
            raise MalformedCounts(f"row {k + 1}: (i, j) = ({i}, {j}) out of order")
        if (row[2].strip(), row[3].strip()) != (LABELS[i - 1], LABELS[j - 1]):
            raise MalformedCounts(f"row {k + 1}: basis labels do not match (i, j)")
        if not np.isfinite(value) or value < 0:
            raise MalformedCounts(f"row {k + 1}: count must be finite and non-negative")
        counts[k] = value
    return CountSet(counts, meta)


def read_counts(path):
    return parse_counts(_read_text(path))


def write_counts(path, countset):
    write_text(path, format_counts(countset))


# -- states and results -------------------------------------------------------

def state_document(rho):
    return {"format": STATE_FORMAT, "rho": rho_to_pairs(rho)}


def load_json(path, error):
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise error(f"{path}: not valid JSON ({exc})") from exc


def state_from_document(doc, error=MalformedState):
    """Density matrix from a state document or a results document."""
    if not isinstance(doc, dict):
        raise error("expected a JSON object")
    fmt = doc.get("format")
    if fmt == STATE_FORMAT:
        return rho_from_pairs(doc.get("rho"), error)
    if fmt == RESULTS_FORMAT:
        avg = doc.get("average_state") or {}
        return rho_from_pairs(avg.get("rho"), error)
    raise error(f"unknown document format {fmt!r}")


def read_state(path, error=MalformedState):
    return state_from_document(load_json(path, error), error)


def results_states(doc):
    """Per-trial density matrices of a results document."""
    if not isinstance(doc, dict) or doc.get("format") != RESULTS_FORMAT:
        raise MalformedResults("not a qstdark results document")
    trials = doc.get("trials")
    if not isinstance(trials, list) or not trials:
        raise MalformedResults("results document has no trials")
    try:
        return [rho_from_pairs(t["rho"], MalformedResults) for t in trials]
    except (KeyError, TypeError) as exc:
        raise MalformedResults(f"malformed trial record: {exc}") from exc


def format_curve(curve, bell_values=None):
    buf = io.StringIO()
    buf.write("theta,n_estimated" + (",n_bell" if bell_values is not None else "") + "\n")
    for t, theta in enumerate(curve.thetas):
        fields = [f"{theta:.12g}", f"{curve.values[t]:.12g}"]
        if bell_values is not None:
            fields.append(f"{bell_values[t]:.12g}")
        buf.write(",".join(fields) + "\n")
    return buf.getvalue()
