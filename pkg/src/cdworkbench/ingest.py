"""Parse and validate response logs, Q-matrices, and item metadata.

The CSV schemas are fixed:

    responses.csv  student_id,item_id,correct[,selected_option]
    qmatrix.csv    item_id,<kc_1>,...,<kc_K>
    items.csv      item_id,text,answer_key,option_a,option_b,...

`correct` and Q-matrix entries must be the literals ``0`` or ``1``.
Excel files are rejected; export the sheet as CSV instead.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ParseError

RESPONSE_COLUMNS = ("student_id", "item_id", "correct")
OPTION_COLUMN = "selected_option"

# .xlsx is a zip archive, .xls an OLE compound file
_EXCEL_MAGICS = (b"PK\x03\x04", b"\xd0\xcf\x11\xe0\xa1\xb1\x1a\xe1")


@dataclass(frozen=True)
class ResponseRecord:
    student_id: str
    item_id: str
    correct: int
    selected_option: str | None = None


class Obs(NamedTuple):
    """One encoded response: indices into the dataset's maps."""

    student: int
    item: int
    correct: int
    option: str | None = None


@dataclass(eq=False)
class QMatrix:
    """Binary item-by-KC relevancy table."""

    item_ids: list[str]
    kc_ids: list[str]
    entries: np.ndarray  # (M, K) of {0,1}

    @property
    def M(self) -> int:
        return len(self.item_ids)

    @property
    def K(self) -> int:
        return len(self.kc_ids)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, QMatrix)
            and self.item_ids == other.item_ids
            and self.kc_ids == other.kc_ids
            and np.array_equal(self.entries, other.entries)
        )


@dataclass
class ValidationReport:
    errors: list[tuple[str, int | None, str]] = field(default_factory=list)
    warnings: list[tuple[str, str]] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        return {
            "errors": [
                {"code": c, "row": row, "message": m} for c, row, m in self.errors
            ],
            "warnings": [{"code": c, "message": m} for c, m in self.warnings],
            "summary": self.summary,
        }


@dataclass(eq=False)
class EncodedDataset:
    """Validated, index-encoded responses plus the Q-matrix they refer to."""

    N: int
    M: int
    K: int
    student_index: dict[str, int]
    item_index: dict[str, int]
    kc_index: dict[str, int]
    records: list[Obs]
    qmatrix: QMatrix

    @property
    def student_ids(self) -> list[str]:
        return list(self.student_index)

    @property
    def item_ids(self) -> list[str]:
        return self.qmatrix.item_ids

    @property
    def kc_ids(self) -> list[str]:
        return self.qmatrix.kc_ids

    @property
    def options(self) -> dict[tuple[int, str], int] | None:
        """Selected-option counts among incorrect responses, or None when the
        response log carried no option data at all."""
        if all(obs.option is None for obs in self.records):
            return None
        counts: dict[tuple[int, str], int] = {}
        for obs in self.records:
            if obs.correct == 0 and obs.option is not None:
                key = (obs.item, obs.option)
                counts[key] = counts.get(key, 0) + 1
        return counts

    def responses_for(self, student_id: str) -> list[tuple[int, int]]:
        """(item index, correct) pairs for one student, in record order."""
        s = self.student_index.get(student_id)
        if s is None:
            return []
        return [(obs.item, obs.correct) for obs in self.records if obs.student == s]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, EncodedDataset)
            and (self.N, self.M, self.K) == (other.N, other.M, other.K)
            and self.student_index == other.student_index
            and self.item_index == other.item_index
            and self.kc_index == other.kc_index
            and self.records == other.records
            and self.qmatrix == other.qmatrix
        )


@dataclass(frozen=True)
class ItemInfo:
    item_id: str
    text: str = ""
    answer_key: str = ""
    options: dict[str, str] = field(default_factory=dict)


def decode_csv_bytes(data: bytes, source: str = "upload") -> str:
    """Decode raw bytes to CSV text, rejecting Excel containers outright."""
    for magic in _EXCEL_MAGICS:
        if data.startswith(magic):
            raise ParseError(
                "ExcelNotSupported",
                f"{source} looks like an Excel workbook; export the sheet as a"
                " CSV file (UTF-8) and upload that instead.",
            )
    try:
        return data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ParseError("BadEncoding", f"{source} is not UTF-8 text: {exc}") from exc


def _rows(csv_text: str):
    return csv.reader(io.StringIO(csv_text))


def parse_responses(csv_text: str) -> list[ResponseRecord]:
    """Parse a response log, preserving file order."""
    reader = _rows(csv_text)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError("MissingHeader", "response file is empty") from None
    missing = [c for c in RESPONSE_COLUMNS if c not in header]
    if missing:
        raise ParseError(
            "MissingHeader",
            f"response header must name columns {RESPONSE_COLUMNS}; missing {missing}",
            line=1,
        )
    col = {name: header.index(name) for name in RESPONSE_COLUMNS}
    opt_col = header.index(OPTION_COLUMN) if OPTION_COLUMN in header else None

    records: list[ResponseRecord] = []
    seen: set[tuple[str, str]] = set()
    for row in reader:
        line = reader.line_num
        if not any(cell.strip() for cell in row):
            continue
        if len(row) <= max(col.values()):
            raise ParseError("MalformedRow", f"row has {len(row)} fields", line=line)
        student = row[col["student_id"]].strip()
        item = row[col["item_id"]].strip()
        raw = row[col["correct"]].strip()
        if not student or not item:
            raise ParseError("MalformedRow", "empty student_id or item_id", line=line)
        if raw not in ("0", "1"):
            raise ParseError(
                "BadCorrectValue", f"correct must be 0 or 1, got {raw!r}", line=line
            )
        if (student, item) in seen:
            raise ParseError(
                "DuplicateResponse",
                f"repeated response for student {student!r}, item {item!r}",
                line=line,
            )
        seen.add((student, item))
        option = None
        if opt_col is not None and opt_col < len(row) and row[opt_col].strip():
            option = row[opt_col].strip()
        records.append(ResponseRecord(student, item, int(raw), option))
    return records


def parse_qmatrix(csv_text: str) -> QMatrix:
    """Parse an item-by-KC table; row and column order follow the file."""
    reader = _rows(csv_text)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError("MissingHeader", "Q-matrix file is empty") from None
    if len(header) < 2 or header[0] != "item_id":
        raise ParseError(
            "MissingHeader",
            "Q-matrix header must be item_id followed by at least one KC column",
            line=1,
        )
    kc_ids = header[1:]
    if any(not kc for kc in kc_ids):
        raise ParseError("MissingHeader", "empty KC column name", line=1)
    if len(set(kc_ids)) != len(kc_ids):
        raise ParseError("DuplicateKC", "KC column names must be unique", line=1)

    item_ids: list[str] = []
    rows: list[list[int]] = []
    for row in reader:
        line = reader.line_num
        if not any(cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise ParseError(
                "MalformedRow",
                f"expected {len(header)} fields, got {len(row)}",
                line=line,
            )
        item = row[0].strip()
        if not item:
            raise ParseError("MalformedRow", "empty item_id", line=line)
        if item in item_ids:
            raise ParseError("DuplicateItem", f"item {item!r} appears twice", line=line)
        values = []
        for kc, cell in zip(kc_ids, row[1:]):
            cell = cell.strip()
            if cell not in ("0", "1"):
                raise ParseError(
                    "NonBinaryEntry",
                    f"entry for item {item!r}, KC {kc!r} must be 0 or 1, got {cell!r}",
                    line=line,
                )
            values.append(int(cell))
        if not any(values):
            raise ParseError(
                "EmptyRow", f"item {item!r} measures no KC (all-zero row)", line=line
            )
        item_ids.append(item)
        rows.append(values)
    if not rows:
        raise ParseError("EmptyMatrix", "Q-matrix has no item rows")
    return QMatrix(item_ids, kc_ids, np.array(rows, dtype=np.int8))


def parse_items(csv_text: str) -> dict[str, ItemInfo]:
    """Parse optional item metadata (text, answer key, option labels)."""
    reader = _rows(csv_text)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError("MissingHeader", "items file is empty") from None
    if not header or header[0] != "item_id":
        raise ParseError("MissingHeader", "items header must start with item_id", line=1)
    idx = {name: i for i, name in enumerate(header)}
    option_cols = [(name[len("option_"):].upper(), i)
                   for name, i in idx.items() if name.startswith("option_")]

    out: dict[str, ItemInfo] = {}
    for row in reader:
        line = reader.line_num
        if not any(cell.strip() for cell in row):
            continue
        item = row[0].strip()
        if not item:
            raise ParseError("MalformedRow", "empty item_id", line=line)
        if item in out:
            raise ParseError("DuplicateItem", f"item {item!r} appears twice", line=line)

        def cell(name: str) -> str:
            i = idx.get(name)
            return row[i].strip() if i is not None and i < len(row) else ""

        options = {
            label: row[i].strip()
            for label, i in option_cols
            if i < len(row) and row[i].strip()
        }
        out[item] = ItemInfo(item, cell("text"), cell("answer_key"), options)
    return out


def encode(
    records: list[ResponseRecord], qmatrix: QMatrix
) -> EncodedDataset | ValidationReport:
    """Index-encode records against a Q-matrix.

    Students are numbered by first appearance; items and KCs follow Q-matrix
    order. Problems are collected into a ValidationReport rather than raised,
    so a bad upload reports every offending row at once. Row numbers count
    physical CSV lines (header is line 1).
    """
    item_index = {item: i for i, item in enumerate(qmatrix.item_ids)}
    kc_index = {kc: i for i, kc in enumerate(qmatrix.kc_ids)}

    report = ValidationReport()
    seen: set[tuple[str, str]] = set()
    for pos, rec in enumerate(records):
        row = pos + 2
        if rec.item_id not in item_index:
            report.errors.append(
                ("UnknownItem", row, f"item {rec.item_id!r} is not in the Q-matrix")
            )
        if rec.correct not in (0, 1):
            report.errors.append(
                ("BadCorrectValue", row, f"correct must be 0 or 1, got {rec.correct!r}")
            )
        key = (rec.student_id, rec.item_id)
        if key in seen:
            report.errors.append(
                ("DuplicateResponse", row, f"repeated response for {key!r}")
            )
        seen.add(key)

    answered = {rec.item_id for rec in records}
    silent = [item for item in qmatrix.item_ids if item not in answered]
    if silent:
        report.warnings.append(
            ("ItemNeverAnswered", f"no responses for items: {', '.join(silent)}")
        )

    student_index: dict[str, int] = {}
    for rec in records:
        if rec.student_id not in student_index:
            student_index[rec.student_id] = len(student_index)

    report.summary = {
        "n_records": len(records),
        "n_students": len(student_index),
        "n_items": qmatrix.M,
        "n_kcs": qmatrix.K,
        "n_errors": len(report.errors),
        "n_warnings": len(report.warnings),
    }
    if report.errors:
        return report

    encoded = [
        Obs(student_index[r.student_id], item_index[r.item_id], r.correct, r.selected_option)
        for r in records
    ]
    return EncodedDataset(
        N=len(student_index),
        M=qmatrix.M,
        K=qmatrix.K,
        student_index=student_index,
        item_index=item_index,
        kc_index=kc_index,
        records=encoded,
        qmatrix=qmatrix,
    )


def load_dataset(
    responses_csv_text: str, qmatrix_csv_text: str
) -> EncodedDataset | ValidationReport:
    """Parse both files and encode, folding parse failures into a report."""
    try:
        qmatrix = parse_qmatrix(qmatrix_csv_text)
        records = parse_responses(responses_csv_text)
    except ParseError as exc:
        return ValidationReport(errors=[(exc.code, exc.line, exc.message)])
    return encode(records, qmatrix)


def responses_csv(dataset: EncodedDataset) -> str:
    """Serialize records back to CSV; re-parsing yields an equal dataset."""
    students = dataset.student_ids
    items = dataset.item_ids
    with_options = dataset.options is not None
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(RESPONSE_COLUMNS) + ([OPTION_COLUMN] if with_options else [])
    writer.writerow(header)
    for obs in dataset.records:
        row = [students[obs.student], items[obs.item], str(obs.correct)]
        if with_options:
            row.append(obs.option or "")
        writer.writerow(row)
    return buf.getvalue()


def qmatrix_csv(dataset_or_qmatrix: EncodedDataset | QMatrix) -> str:
    q = (
        dataset_or_qmatrix.qmatrix
        if isinstance(dataset_or_qmatrix, EncodedDataset)
        else dataset_or_qmatrix
    )
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["item_id", *q.kc_ids])
    for item, row in zip(q.item_ids, q.entries):
        writer.writerow([item, *(str(int(v)) for v in row)])
    return buf.getvalue()
