"""Hull CSV reading and writing."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyFile, HeaderMismatch, IoError, ParseError, ValidationError
from .params import COLUMNS, N_PARAMS, HullParameters, validate_params


@dataclass
class Dataset:
    rows: np.ndarray  # (n, 45) validated raw vectors
    params: list[HullParameters]
    lines: list[int]  # source line of each kept row
    excluded: list[tuple[int, str]] = field(default_factory=list)  # (line, reason)
    source: str = ""

    def __len__(self) -> int:
        return len(self.params)


def check_header(header: list[str]) -> None:
    names = [h.strip() for h in header][:N_PARAMS]
    if names == list(COLUMNS):
        return
    missing = [c for c in COLUMNS if c not in names]
    if missing:
        raise HeaderMismatch(f"missing column(s): {', '.join(missing)}")
    for i, (got, want) in enumerate(zip(names, COLUMNS)):
        if got != want:
            raise HeaderMismatch(f"column {i + 1} is {got!r}, expected {want!r}")
    raise HeaderMismatch("header does not match the 45 hull parameter names")


def parse_dataset(text: str, source: str = "<text>") -> Dataset:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyFile(f"{source} is empty") from None
    if not any(h.strip() for h in header):
        raise EmptyFile(f"{source} has no header")
    check_header(header)

    rows, params, lines, excluded = [], [], [], []
    for lineno, rec in enumerate(reader, start=2):
        if not rec or all(not c.strip() for c in rec):
            continue
        if len(rec) < N_PARAMS:
            raise ParseError(lineno, f"expected {N_PARAMS} fields, got {len(rec)}")
        try:
            vals = [float(c) for c in rec[:N_PARAMS]]
        except ValueError as exc:
            raise ParseError(lineno, str(exc)) from None
        try:
            p = validate_params(vals)
        except ValidationError as exc:
            excluded.append((lineno, str(exc)))
            continue
        except Exception as exc:  # arity / non-finite
            excluded.append((lineno, f"{type(exc).__name__}: {exc}"))
            continue
        rows.append(vals)
        params.append(p)
        lines.append(lineno)
    arr = np.array(rows, dtype=float).reshape(-1, N_PARAMS)
    return Dataset(arr, params, lines, excluded, source)


def load_dataset(path) -> Dataset:
    """Read a hull CSV; out-of-range rows are excluded and listed, not fatal."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8-sig")
    except OSError as exc:
        raise IoError(f"{path}: {exc.strerror or exc}") from exc
    return parse_dataset(text, str(path))


def fmt(v: float) -> str:
    """Shortest repr that round-trips exactly."""
    return repr(float(v))


def hull_csv_text(rows, extra_names=(), extra=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(COLUMNS) + list(extra_names))
    for i, r in enumerate(rows):
        cells = [fmt(v) for v in np.asarray(r, dtype=float)]
        if extra is not None:
            cells += [fmt(v) if isinstance(v, (float, np.floating)) else str(v) for v in extra[i]]
        w.writerow(cells)
    return buf.getvalue()


def write_text(path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoError(f"{path}: {exc.strerror or exc}") from exc
    return path


def write_hull_csv(path, rows, extra_names=(), extra=None) -> Path:
    return write_text(path, hull_csv_text(rows, extra_names, extra))
