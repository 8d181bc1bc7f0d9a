"""Serialize action and movement rows to CSV, JSON, XML, and YAML.

Schemas are fixed so statistics tooling sees deterministic input: column
names and order are pinned, CSV follows RFC 4180 with LF newlines (CRLF
accepted on read), floats render as the shortest string that parses back
to the same value, timestamps render as ISO 8601 UTC with milliseconds.
Everything is UTF-8 without a byte-order mark.
"""

from __future__ import annotations

import csv
import io
import json
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

import yaml

from .errors import ParseError, SchemaMismatch, UnsupportedFormat
from .store import ActionRow, MovementRow
from .timefmt import iso_to_ms, ms_to_iso


class ExportFormat(str, Enum):
    CSV = "csv"
    JSON = "json"
    XML = "xml"
    YAML = "yaml"


class ExportMode(str, Enum):
    PAPER_EXACT = "paper"
    EXTENDED = "extended"


CONTENT_TYPES = {
    ExportFormat.CSV: "text/csv",
    ExportFormat.JSON: "application/json",
    ExportFormat.XML: "application/xml",
    ExportFormat.YAML: "application/yaml",
}


def parse_format(name: str) -> ExportFormat:
    try:
        return ExportFormat(name)
    except ValueError:
        raise UnsupportedFormat(f"format must be one of csv/json/xml/yaml, not {name!r}") from None


def parse_mode(name: str) -> ExportMode:
    try:
        return ExportMode(name)
    except ValueError:
        raise UnsupportedFormat(f"mode must be paper or extended, not {name!r}") from None


@dataclass(frozen=True)
class Column:
    name: str
    kind: str  # "str" | "float" | "int" | "ts"


_ACTION_PAPER = (
    Column("player_name", "str"),
    Column("question_answer", "str"),
    Column("question_number", "str"),
    Column("question_description", "str"),
    Column("timestamp", "ts"),
)
_ACTION_EXTENDED = _ACTION_PAPER + (Column("session_id", "str"), Column("time_to_answer_ms", "int"))

_MOVEMENT_PAPER = (
    Column("player_name", "str"),
    Column("x_axis", "float"),
    Column("y_axis", "float"),
    Column("z_axis", "float"),
    Column("euler_x", "float"),
    Column("euler_y", "float"),
    Column("euler_z", "float"),
    Column("quat_x", "float"),
    Column("quat_y", "float"),
    Column("quat_z", "float"),
    Column("quat_w", "float"),
    Column("timestamp", "ts"),
)
_MOVEMENT_EXTENDED = _MOVEMENT_PAPER + (Column("session_id", "str"),)

PAPER_ACTIONS_HEADER = ",".join(c.name for c in _ACTION_PAPER)
PAPER_MOVEMENTS_HEADER = ",".join(c.name for c in _MOVEMENT_PAPER)

_SCHEMAS = {
    ("actions", ExportMode.PAPER_EXACT): _ACTION_PAPER,
    ("actions", ExportMode.EXTENDED): _ACTION_EXTENDED,
    ("movements", ExportMode.PAPER_EXACT): _MOVEMENT_PAPER,
    ("movements", ExportMode.EXTENDED): _MOVEMENT_EXTENDED,
}

Row = Union[ActionRow, MovementRow]


def format_float(v: float) -> str:
    """Shortest decimal that round-trips; integral values drop the fraction."""
    if math.isfinite(v) and v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _cell_text(col: Column, value) -> str:
    if col.kind == "float":
        return format_float(value)
    if col.kind == "ts":
        return ms_to_iso(value)
    if col.kind == "int":
        return str(value)
    return value


def _cell_parse(col: Column, text: str):
    try:
        if col.kind == "float":
            return float(text)
        if col.kind == "ts":
            return iso_to_ms(text)
        if col.kind == "int":
            return int(text)
        return text
    except (ValueError, ParseError) as exc:
        raise ParseError(f"column {col.name}: cannot parse {text!r}: {exc}") from None


def _obj_value(col: Column, value):
    # JSON/YAML carry native numbers; only timestamps become strings
    if col.kind == "ts":
        return ms_to_iso(value)
    return value


def _obj_parse(col: Column, value):
    if col.kind == "ts":
        if not isinstance(value, str):
            raise ParseError(f"column {col.name}: timestamp must be a string")
        return iso_to_ms(value)
    if col.kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(f"column {col.name}: expected a number, got {value!r}")
        return float(value)
    if col.kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ParseError(f"column {col.name}: expected an integer, got {value!r}")
        return value
    if not isinstance(value, str):
        raise ParseError(f"column {col.name}: expected a string, got {value!r}")
    return value


def export_actions(rows: Sequence[ActionRow], fmt: ExportFormat, mode: ExportMode = ExportMode.PAPER_EXACT) -> bytes:
    return _export("actions", rows, fmt, mode)


def export_movements(rows: Sequence[MovementRow], fmt: ExportFormat, mode: ExportMode = ExportMode.PAPER_EXACT) -> bytes:
    return _export("movements", rows, fmt, mode)


def import_actions(data: bytes, fmt: ExportFormat) -> list[ActionRow]:
    """Inverse of export_actions on its image.

    Paper-mode documents lack session_id and time_to_answer_ms; those fields
    come back as "" and 0.
    """
    return [_make_action(values) for values in _import("actions", data, fmt)]


def import_movements(data: bytes, fmt: ExportFormat) -> list[MovementRow]:
    return [_make_movement(values) for values in _import("movements", data, fmt)]


def _make_action(values: dict) -> ActionRow:
    values.setdefault("session_id", "")
    values.setdefault("time_to_answer_ms", 0)
    return ActionRow(**values)


def _make_movement(values: dict) -> MovementRow:
    values.setdefault("session_id", "")
    return MovementRow(**values)


def _export(kind: str, rows, fmt: ExportFormat, mode: ExportMode) -> bytes:
    if not isinstance(fmt, ExportFormat):
        raise UnsupportedFormat(f"unknown format {fmt!r}")
    cols = _SCHEMAS[(kind, mode)]
    if fmt is ExportFormat.CSV:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([c.name for c in cols])
        for row in rows:
            writer.writerow([_cell_text(c, getattr(row, c.name)) for c in cols])
        return buf.getvalue().encode("utf-8")
    if fmt is ExportFormat.JSON:
        doc = {"kind": kind, "rows": [_row_obj(row, cols) for row in rows]}
        return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    if fmt is ExportFormat.XML:
        root = ET.Element("export", {"kind": kind})
        for row in rows:
            el = ET.SubElement(root, "row")
            for c in cols:
                ET.SubElement(el, c.name).text = _cell_text(c, getattr(row, c.name))
        return ET.tostring(root, encoding="unicode").encode("utf-8")
    if fmt is ExportFormat.YAML:
        doc = {"kind": kind, "rows": [_row_obj(row, cols) for row in rows]}
        return yaml.safe_dump(doc, sort_keys=False, allow_unicode=True).encode("utf-8")
    raise UnsupportedFormat(f"unknown format {fmt!r}")


def _row_obj(row, cols) -> dict:
    return {c.name: _obj_value(c, getattr(row, c.name)) for c in cols}


def _mode_for(kind: str, names: Sequence[str], ordered: bool) -> ExportMode:
    for mode in (ExportMode.PAPER_EXACT, ExportMode.EXTENDED):
        expected = [c.name for c in _SCHEMAS[(kind, mode)]]
        if (list(names) == expected) if ordered else (set(names) == set(expected)):
            return mode
    raise SchemaMismatch(f"{kind} columns {list(names)!r} match no known schema")


def _import(kind: str, data: bytes, fmt: ExportFormat) -> list[dict]:
    if not isinstance(fmt, ExportFormat):
        raise UnsupportedFormat(f"unknown format {fmt!r}")
    text = data.decode("utf-8")
    if fmt is ExportFormat.CSV:
        reader = csv.reader(io.StringIO(text, newline=""))
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch("empty document has no header row") from None
        mode = _mode_for(kind, header, ordered=True)
        cols = _SCHEMAS[(kind, mode)]
        out = []
        for values in reader:
            if len(values) != len(cols):
                raise ParseError(f"expected {len(cols)} fields, got {len(values)}", line=reader.line_num)
            out.append({c.name: _cell_parse(c, v) for c, v in zip(cols, values)})
        return out
    if fmt is ExportFormat.JSON:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc.msg}", line=exc.lineno, column=exc.colno) from None
        return _parse_obj_doc(kind, doc)
    if fmt is ExportFormat.XML:
        try:
            root = ET.fromstring(text)
        except ET.ParseError as exc:
            line, column = exc.position
            raise ParseError(f"bad XML: {exc.msg.split(':')[0]}", line=line, column=column) from None
        if root.tag != "export" or root.get("kind") != kind:
            raise SchemaMismatch(f"expected <export kind={kind!r}>")
        out = []
        for el in root:
            if el.tag != "row":
                raise SchemaMismatch(f"unexpected element <{el.tag}>")
            names = [child.tag for child in el]
            mode = _mode_for(kind, names, ordered=False)
            cols = {c.name: c for c in _SCHEMAS[(kind, mode)]}
            out.append({child.tag: _cell_parse(cols[child.tag], child.text or "") for child in el})
        return out
    if fmt is ExportFormat.YAML:
        try:
            doc = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            raise ParseError(
                "bad YAML",
                line=mark.line + 1 if mark else None,
                column=mark.column + 1 if mark else None,
            ) from None
        return _parse_obj_doc(kind, doc)
    raise UnsupportedFormat(f"unknown format {fmt!r}")


def _parse_obj_doc(kind: str, doc) -> list[dict]:
    if not isinstance(doc, dict) or doc.get("kind") != kind or not isinstance(doc.get("rows"), list):
        raise SchemaMismatch(f"document must be a mapping with kind={kind!r} and a rows list")
    out = []
    for i, obj in enumerate(doc["rows"]):
        if not isinstance(obj, dict):
            raise ParseError(f"rows[{i}] is not a mapping")
        mode = _mode_for(kind, list(obj.keys()), ordered=False)
        cols = _SCHEMAS[(kind, mode)]
        out.append({c.name: _obj_parse(c, obj[c.name]) for c in cols})
    return out
