"""Input documents: parsing, validation and serialization.

Two input formats are accepted.

``json`` -- one document with any of the keys ``target``, ``selection``,
``counts``, ``assumptions`` and ``strata``::

    {"selection": [0.8, 0.6, 0.4, 0.1],
     "assumptions": {"sign_d": "NonDecreasing", "sign_e": "NonDecreasing",
                     "scale": "rd", "interaction_sign": "NonPositive"}}

Four-cell blocks are lists in the order d1e1, d1e0, d0e1, d0e0, or objects
keyed by those names.  ``strata`` is a list of objects with a ``label`` and
any of the other blocks.

``csv`` -- a header row naming the four cells, optionally preceded by a
``block`` column (``target``, ``selection`` or ``counts``) and a ``stratum``
column.  Without a ``block`` column every row is read as ``default_block``.
"""

from __future__ import annotations

import csv
import io as _io
import json
from dataclasses import dataclass, field

from .classify import QualitativeAssumptions
from .errors import ParseError, ValidationError
from .measures import CELLS, SelectionModel, TargetJoint
from .sensitivity import ObservedTable

FOUR_CELL_BLOCKS = {"target": TargetJoint, "selection": SelectionModel,
                    "counts": ObservedTable}
TOP_LEVEL_KEYS = ("target", "selection", "counts", "assumptions", "strata")
ASSUMPTION_KEYS = ("sign_d", "sign_e", "scale", "interaction_sign")


@dataclass
class Stratum:
    label: str
    target: TargetJoint | None = None
    selection: SelectionModel | None = None
    counts: ObservedTable | None = None
    assumptions: QualitativeAssumptions | None = None

    def to_dict(self) -> dict:
        out = {"label": self.label}
        out.update(_blocks_to_dict(self))
        return out


@dataclass
class InputDocument:
    target: TargetJoint | None = None
    selection: SelectionModel | None = None
    counts: ObservedTable | None = None
    assumptions: QualitativeAssumptions | None = None
    strata: list[Stratum] = field(default_factory=list)

    def require(self, *names: str, command: str = "") -> None:
        for name in names:
            if getattr(self, name) in (None, []):
                where = f" for '{command}'" if command else ""
                raise ValidationError(
                    f"missing required block '{name}'{where}",
                    code="missing_block", field=name)

    def to_dict(self) -> dict:
        out = _blocks_to_dict(self)
        if self.strata:
            out["strata"] = [s.to_dict() for s in self.strata]
        return out


def _blocks_to_dict(obj) -> dict:
    out = {}
    for name in FOUR_CELL_BLOCKS:
        value = getattr(obj, name)
        if value is not None:
            out[name] = [v if isinstance(v, int) else float(v)
                         for v in value.cells()]
    if obj.assumptions is not None:
        out["assumptions"] = obj.assumptions.to_dict()
    return out


def _four_cells(raw, path: str) -> list:
    if isinstance(raw, dict):
        unknown = set(raw) - set(CELLS)
        if unknown:
            raise ValidationError(f"{path}: unknown cell(s) {sorted(unknown)}",
                                  code="unknown_key", field=path)
        missing = [c for c in CELLS if c not in raw]
        if missing:
            raise ValidationError(f"{path}: missing cell(s) {missing}",
                                  code="missing_cell", field=path)
        return [raw[c] for c in CELLS]
    if isinstance(raw, list):
        if len(raw) != 4:
            raise ValidationError(f"{path}: expected 4 cells, got {len(raw)}",
                                  code="wrong_cell_count", field=path)
        return raw
    raise ValidationError(f"{path}: expected a list of 4 cells or an object",
                          code="bad_block", field=path)


def _build_block(name: str, raw, path: str, line: int | None = None):
    cells = _four_cells(raw, path)
    for i, v in enumerate(cells):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValidationError(f"{path}[{i}]: expected a number, got {v!r}",
                                  code="not_a_number", field=f"{path}[{i}]",
                                  line=line)
    try:
        return FOUR_CELL_BLOCKS[name](*cells)
    except ValidationError as exc:
        sub = exc.field
        if sub in CELLS:
            sub = f"{path}[{CELLS.index(sub)}]"
        raise ValidationError(f"{path}: {exc}", code=exc.code,
                              field=sub or path, line=line) from None


def _build_assumptions(raw, path: str) -> QualitativeAssumptions:
    if not isinstance(raw, dict):
        raise ValidationError(f"{path}: expected an object", code="bad_block",
                              field=path)
    missing = [k for k in ASSUMPTION_KEYS if k not in raw]
    if missing:
        raise ValidationError(f"{path}: missing key(s) {missing}",
                              code="missing_key", field=path)
    unknown = set(raw) - set(ASSUMPTION_KEYS)
    if unknown:
        raise ValidationError(f"{path}: unknown key(s) {sorted(unknown)}",
                              code="unknown_key", field=path)
    try:
        return QualitativeAssumptions.parse(*(raw[k] for k in ASSUMPTION_KEYS))
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}", code=exc.code,
                              field=f"{path}.{exc.field}") from None


def _fill(obj, raw: dict, prefix: str) -> None:
    for name in FOUR_CELL_BLOCKS:
        if raw.get(name) is not None:
            setattr(obj, name, _build_block(name, raw[name], prefix + name))
    if raw.get("assumptions") is not None:
        obj.assumptions = _build_assumptions(raw["assumptions"],
                                             prefix + "assumptions")


def document_from_dict(raw) -> InputDocument:
    if not isinstance(raw, dict):
        raise ValidationError("top level must be an object", code="bad_document")
    unknown = set(raw) - set(TOP_LEVEL_KEYS)
    if unknown:
        raise ValidationError(f"unknown top-level key(s) {sorted(unknown)}",
                              code="unknown_key", field=sorted(unknown)[0])
    doc = InputDocument()
    _fill(doc, raw, "")
    strata = raw.get("strata") or []
    if not isinstance(strata, list):
        raise ValidationError("strata: expected a list", code="bad_block",
                              field="strata")
    for i, s in enumerate(strata):
        path = f"strata[{i}]"
        if not isinstance(s, dict):
            raise ValidationError(f"{path}: expected an object", code="bad_block",
                                  field=path)
        unknown = set(s) - {"label", *TOP_LEVEL_KEYS[:-1]}
        if unknown:
            raise ValidationError(f"{path}: unknown key(s) {sorted(unknown)}",
                                  code="unknown_key", field=path)
        stratum = Stratum(label=str(s.get("label", i)))
        _fill(stratum, s, path + ".")
        doc.strata.append(stratum)
    return doc


def _parse_json(text: str) -> InputDocument:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg} (line {exc.lineno}, "
                         f"column {exc.colno})", code="malformed_json",
                         line=exc.lineno) from None
    return document_from_dict(raw)


def _number(text: str, line: int, column: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"line {line}: column {column}: {text!r} is not a "
                         "number", code="not_a_number", line=line,
                         field=column) from None


def _parse_csv(text: str, default_block: str) -> InputDocument:
    rows = [(i, r) for i, r in enumerate(csv.reader(_io.StringIO(text)), 1)
            if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError("empty table", code="empty_input")
    header_line, header = rows[0]
    header = [h.strip().lower() for h in header]
    allowed = {"block", "stratum", *CELLS}
    bad = [h for h in header if h not in allowed]
    if bad or not set(CELLS) <= set(header):
        raise ParseError(f"line {header_line}: header must name the cells "
                         f"{', '.join(CELLS)} (optionally 'block', 'stratum')",
                         code="bad_header", line=header_line)
    doc = InputDocument()
    strata: dict[str, Stratum] = {}
    for line, row in rows[1:]:
        if len(row) != len(header):
            raise ParseError(f"line {line}: expected {len(header)} fields, "
                             f"got {len(row)}", code="wrong_field_count",
                             line=line)
        rec = dict(zip(header, (c.strip() for c in row)))
        block = rec.get("block", default_block).lower()
        if block not in FOUR_CELL_BLOCKS:
            raise ParseError(f"line {line}: unknown block {block!r}",
                             code="unknown_block", line=line, field="block")
        cells = [_number(rec[c], line, c) for c in CELLS]
        value = _build_block(block, cells, block, line=line)
        label = rec.get("stratum", "")
        owner = doc
        if label:
            owner = strata.setdefault(label, Stratum(label))
        if getattr(owner, block) is not None:
            raise ValidationError(f"line {line}: duplicate {block} block",
                                  code="duplicate_block", line=line,
                                  field=block)
        setattr(owner, block, value)
    doc.strata = list(strata.values())
    return doc


def parse_input(data: bytes | str, fmt: str = "json",
                default_block: str = "selection") -> InputDocument:
    """Parse and validate an input document."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not UTF-8: {exc}",
                             code="bad_encoding") from None
    if fmt == "json":
        return _parse_json(data)
    if fmt == "csv":
        return _parse_csv(data, default_block)
    raise ValidationError(f"unknown input format {fmt!r}", code="unknown_format",
                          field="format")


def serialize(doc: InputDocument) -> str:
    return dumps(doc.to_dict())


def dumps(obj) -> str:
    """JSON with shortest round-trip float formatting and stable key order."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False,
                      ensure_ascii=False)
