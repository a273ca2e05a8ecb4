import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple

logger = logging.getLogger(__name__)

OUTPUT_FORMATS = ("csv", "json")
JSON_FORMAT_VERSION = 1
STDOUT = "-"


class OutputWriteError(Exception):
    """Result could not be written to the requested destination."""


def format_value(value: Any) -> str:
    """Fixed 12 digits after the decimal point, locale independent; strings pass through."""
    if isinstance(value, str):
        return value
    text = f"{float(value):.12f}"
    if text.startswith("-") and float(text) == 0.0:
        return text[1:]
    return text


def _json_value(value: Any) -> Any:
    return value if isinstance(value, str) else float(format_value(value))


@dataclass
class ResultTable:
    """Rows of one command's output, in emission order."""

    name: str
    columns: Tuple[str, ...]
    rows: List[Tuple[Any, ...]] = field(default_factory=list)

    def add_row(self, *values: Any) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"Row for '{self.name}' has {len(values)} values, expected {len(self.columns)}")
        self.rows.append(tuple(values))

    def records(self) -> List[Dict[str, Any]]:
        return [dict(zip(self.columns, (_json_value(v) for v in row))) for row in self.rows]


class ResultWriter:
    """Emit tables as CSV (RFC 4180, CRLF, header row) or JSON (UTF-8) to a file or stdout."""

    def __init__(self, out: str = STDOUT, output_format: str = "csv"):
        if output_format not in OUTPUT_FORMATS:
            raise ValueError(f"Unknown output format '{output_format}', expected one of {OUTPUT_FORMATS}")
        self.out = out
        self.output_format = output_format

    def render_table(self, table: ResultTable) -> str:
        if self.output_format == "json":
            document = {"format": JSON_FORMAT_VERSION, "command": table.name, "rows": table.records()}
            return json.dumps(document, indent=2, ensure_ascii=False) + "\n"
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\r\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([format_value(value) for value in row])
        return buffer.getvalue()

    def render_document(self, name: str, document: Dict[str, Any], lines: Sequence[str]) -> str:
        """Report output: the lines as text for csv, the document as JSON otherwise."""
        if self.output_format == "json":
            return json.dumps({"format": JSON_FORMAT_VERSION, "command": name, **document}, indent=2) + "\n"
        return "".join(f"{line}\n" for line in lines)

    def write_table(self, table: ResultTable) -> None:
        self._write(self.render_table(table))
        logger.info(f"Wrote {len(table.rows)} {table.name} row(s) to {self._destination}")

    def write_document(self, name: str, document: Dict[str, Any], lines: Sequence[str]) -> None:
        self._write(self.render_document(name, document, lines))

    @property
    def _destination(self) -> str:
        return "stdout" if self.out == STDOUT else self.out

    def _write(self, text: str) -> None:
        if self.out == STDOUT:
            sys.stdout.write(text)
            sys.stdout.flush()
            return
        try:
            # newline="" keeps the CRLF row terminators untouched
            with open(Path(self.out), "w", encoding="utf-8", newline="") as handle:
                handle.write(text)
        except OSError as e:
            raise OutputWriteError(f"Cannot write output to {self.out}: {e}") from e
