"""Deterministic CSV/JSON serialisation.

Floats are always written with 17 significant digits and a ``.`` decimal
separator, independent of locale, so that identical runs produce
byte-identical files.
"""

from __future__ import annotations

import csv
import io
import math
import os
import sys
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

OUTPUT_DIR_ENV = "CKANNULUS_OUTPUT_DIR"


def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return "%.17g" % x


def _cell(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    if isinstance(v, complex):
        return format_complex(v)
    return str(v)


def format_complex(z: complex) -> str:
    return "%s%+.17gj" % (format_float(z.real), z.imag)


def to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row has {len(row)} fields, header has {len(header)}")
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def to_json(obj: Any, indent: int = 2) -> str:
    """Serialise plain data (dict/list/str/number/bool/None) to JSON text."""
    return _json(obj, indent, 0) + "\n"


def _json(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        # JSON has no inf/nan literal
        return format_float(x) if math.isfinite(x) else '"%s"' % format_float(x)
    if isinstance(obj, complex):
        return '{"re": %s, "im": %s}' % (format_float(obj.real), format_float(obj.imag))
    if isinstance(obj, str):
        return _json_str(obj)
    if isinstance(obj, Mapping):
        if not obj:
            return "{}"
        items = [f"{pad}{_json_str(str(k))}: {_json(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        items = [pad + _json(v, indent, level + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _json_str(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ord(ch) < 0x20:
            out.append("\\u%04x" % ord(ch))
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def table_to_records(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> list[dict]:
    return [dict(zip(header, row)) for row in rows]


def emit(text: str, path: str | os.PathLike | None = None, default_name: str | None = None) -> Path | None:
    """Write ``text`` to ``path``; fall back to $CKANNULUS_OUTPUT_DIR/default_name, else stdout."""
    if path is None and default_name is not None and os.environ.get(OUTPUT_DIR_ENV):
        path = Path(os.environ[OUTPUT_DIR_ENV]) / default_name
    if path is None:
        sys.stdout.write(text)
        return None
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")
    return path
