"""Minimal xlsx reading and writing on the standard library.

Reads the cell grid of every worksheet (shared strings, inline strings,
numbers, booleans) and writes workbooks with inline strings and plain
numbers — enough for the tabular interchange format this project defines,
without a spreadsheet dependency. Formatting, formulas, and styles are out
of scope; a formula cell contributes its cached value.
"""

from __future__ import annotations

import io
import posixpath
import re
import zipfile
from xml.etree import ElementTree

MAIN_NS = "http://schemas.openxmlformats.org/spreadsheetml/2006/main"
REL_NS = "http://schemas.openxmlformats.org/officeDocument/2006/relationships"
PKG_REL_NS = "http://schemas.openxmlformats.org/package/2006/relationships"

Cell = str | float | bool | None

ElementTree.register_namespace("", MAIN_NS)
ElementTree.register_namespace("r", REL_NS)


class NotXlsx(Exception):
    """Bytes are not a readable xlsx archive."""


def _q(tag: str, ns: str = MAIN_NS) -> str:
    return f"{{{ns}}}{tag}"


def _column_index(ref: str) -> int:
    """'A1' -> 0, 'AB12' -> 27."""
    letters = re.match(r"([A-Z]+)", ref)
    if not letters:
        return 0
    index = 0
    for ch in letters.group(1):
        index = index * 26 + (ord(ch) - ord("A") + 1)
    return index - 1


def read_workbook(data: bytes) -> dict[str, list[list[Cell]]]:
    """Return {sheet name: rows}, each row a list of cell values.

    Rows are padded to the sheet's widest row; missing cells are None.
    Raises NotXlsx when the bytes are not an xlsx archive.
    """
    try:
        archive = zipfile.ZipFile(io.BytesIO(data))
    except zipfile.BadZipFile:
        raise NotXlsx("not a zip archive")
    names = set(archive.namelist())
    if "xl/workbook.xml" not in names:
        raise NotXlsx("archive has no xl/workbook.xml")

    try:
        workbook = ElementTree.fromstring(archive.read("xl/workbook.xml"))
        rel_root = ElementTree.fromstring(archive.read("xl/_rels/workbook.xml.rels"))
    except (KeyError, ElementTree.ParseError) as exc:
        raise NotXlsx(f"malformed workbook structure: {exc}")

    rels = {
        rel.get("Id"): rel.get("Target")
        for rel in rel_root.findall(_q("Relationship", PKG_REL_NS))
    }
    shared = _read_shared_strings(archive, names)

    sheets: dict[str, list[list[Cell]]] = {}
    sheets_el = workbook.find(_q("sheets"))
    if sheets_el is None:
        raise NotXlsx("workbook lists no sheets")
    for sheet_el in sheets_el.findall(_q("sheet")):
        name = sheet_el.get("name", "")
        rel_id = sheet_el.get(_q("id", REL_NS))
        target = rels.get(rel_id)
        if not target:
            continue
        path = posixpath.normpath(
            target if target.startswith("xl/") else posixpath.join("xl", target)
        )
        if path not in names:
            continue
        try:
            root = ElementTree.fromstring(archive.read(path))
        except ElementTree.ParseError as exc:
            raise NotXlsx(f"malformed worksheet {name!r}: {exc}")
        sheets[name] = _read_sheet(root, shared)
    return sheets


def _read_shared_strings(archive: zipfile.ZipFile, names: set[str]) -> list[str]:
    if "xl/sharedStrings.xml" not in names:
        return []
    root = ElementTree.fromstring(archive.read("xl/sharedStrings.xml"))
    strings = []
    for si in root.findall(_q("si")):
        strings.append("".join(t.text or "" for t in si.iter(_q("t"))))
    return strings


def _read_sheet(root: ElementTree.Element, shared: list[str]) -> list[list[Cell]]:
    data = root.find(_q("sheetData"))
    if data is None:
        return []
    rows: list[list[Cell]] = []
    width = 0
    for row_el in data.findall(_q("row")):
        row_no = int(row_el.get("r", len(rows) + 1))
        while len(rows) < row_no:
            rows.append([])
        cells: list[Cell] = []
        for cell_el in row_el.findall(_q("c")):
            col = _column_index(cell_el.get("r", ""))
            while len(cells) <= col:
                cells.append(None)
            cells[col] = _cell_value(cell_el, shared)
        rows[row_no - 1] = cells
        width = max(width, len(cells))
    for row in rows:
        row.extend([None] * (width - len(row)))
    return rows


def _cell_value(cell_el: ElementTree.Element, shared: list[str]) -> Cell:
    kind = cell_el.get("t", "n")
    if kind == "inlineStr":
        is_el = cell_el.find(_q("is"))
        if is_el is None:
            return None
        return "".join(t.text or "" for t in is_el.iter(_q("t")))
    v_el = cell_el.find(_q("v"))
    if v_el is None or v_el.text is None:
        return None
    raw = v_el.text
    if kind == "s":
        try:
            return shared[int(raw)]
        except (ValueError, IndexError):
            return None
    if kind == "b":
        return raw.strip() == "1"
    if kind == "str":
        return raw
    try:
        return float(raw)
    except ValueError:
        return raw


def write_workbook(sheets: dict[str, list[list[Cell]]]) -> bytes:
    """Build an xlsx archive; strings become inline strings, numbers stay numeric."""
    buffer = io.BytesIO()
    sheet_names = list(sheets)
    with zipfile.ZipFile(buffer, "w", zipfile.ZIP_DEFLATED) as archive:
        archive.writestr("[Content_Types].xml", _content_types(len(sheet_names)))
        archive.writestr("_rels/.rels", _package_rels())
        archive.writestr("xl/workbook.xml", _workbook_xml(sheet_names))
        archive.writestr("xl/_rels/workbook.xml.rels", _workbook_rels(len(sheet_names)))
        for i, name in enumerate(sheet_names, start=1):
            archive.writestr(f"xl/worksheets/sheet{i}.xml", _sheet_xml(sheets[name]))
    return buffer.getvalue()


def _content_types(n_sheets: int) -> str:
    overrides = "".join(
        f'<Override PartName="/xl/worksheets/sheet{i}.xml" '
        f'ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.worksheet+xml"/>'
        for i in range(1, n_sheets + 1)
    )
    return (
        '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
        '<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">'
        '<Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/>'
        '<Default Extension="xml" ContentType="application/xml"/>'
        '<Override PartName="/xl/workbook.xml" '
        'ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.sheet.main+xml"/>'
        f"{overrides}</Types>"
    )


def _package_rels() -> str:
    return (
        '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
        f'<Relationships xmlns="{PKG_REL_NS}">'
        '<Relationship Id="rId1" '
        'Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/officeDocument" '
        'Target="xl/workbook.xml"/></Relationships>'
    )


def _workbook_xml(sheet_names: list[str]) -> str:
    root = ElementTree.Element(_q("workbook"))
    sheets_el = ElementTree.SubElement(root, _q("sheets"))
    for i, name in enumerate(sheet_names, start=1):
        ElementTree.SubElement(
            sheets_el,
            _q("sheet"),
            {"name": name, "sheetId": str(i), _q("id", REL_NS): f"rId{i}"},
        )
    return ElementTree.tostring(root, encoding="unicode", xml_declaration=True)


def _workbook_rels(n_sheets: int) -> str:
    rels = "".join(
        f'<Relationship Id="rId{i}" '
        'Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/worksheet" '
        f'Target="worksheets/sheet{i}.xml"/>'
        for i in range(1, n_sheets + 1)
    )
    return (
        '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
        f'<Relationships xmlns="{PKG_REL_NS}">{rels}</Relationships>'
    )


def _column_letter(index: int) -> str:
    letters = ""
    index += 1
    while index:
        index, rem = divmod(index - 1, 26)
        letters = chr(ord("A") + rem) + letters
    return letters


def _sheet_xml(rows: list[list[Cell]]) -> str:
    root = ElementTree.Element(_q("worksheet"))
    data = ElementTree.SubElement(root, _q("sheetData"))
    for r, row in enumerate(rows, start=1):
        row_el = ElementTree.SubElement(data, _q("row"), {"r": str(r)})
        for c, value in enumerate(row):
            if value is None:
                continue
            ref = f"{_column_letter(c)}{r}"
            if isinstance(value, bool):
                cell = ElementTree.SubElement(row_el, _q("c"), {"r": ref, "t": "b"})
                ElementTree.SubElement(cell, _q("v")).text = "1" if value else "0"
            elif isinstance(value, (int, float)):
                cell = ElementTree.SubElement(row_el, _q("c"), {"r": ref})
                num = float(value)
                ElementTree.SubElement(cell, _q("v")).text = (
                    str(int(num)) if num.is_integer() else repr(num)
                )
            else:
                cell = ElementTree.SubElement(row_el, _q("c"), {"r": ref, "t": "inlineStr"})
                is_el = ElementTree.SubElement(cell, _q("is"))
                ElementTree.SubElement(is_el, _q("t")).text = str(value)
    return ElementTree.tostring(root, encoding="unicode", xml_declaration=True)
