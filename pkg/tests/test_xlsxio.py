import pytest

from workdesk import xlsxio


def test_round_trip_preserves_grid():
    sheets = {
        "Data": [
            ["ID", "Name", "Hours", "Flag"],
            ["A-1", "First", 8, True],
            ["A-2", "Second", 2.5, False],
            ["A-3", None, None, None],
        ]
    }
    result = xlsxio.read_workbook(xlsxio.write_workbook(sheets))
    assert result["Data"][0] == ["ID", "Name", "Hours", "Flag"]
    assert result["Data"][1] == ["A-1", "First", 8.0, True]
    assert result["Data"][2] == ["A-2", "Second", 2.5, False]
    assert result["Data"][3][0] == "A-3"


def test_multiple_sheets_and_empty_sheet():
    data = xlsxio.write_workbook({"One": [["X"]], "Two": []})
    result = xlsxio.read_workbook(data)
    assert list(result) == ["One", "Two"]
    assert result["Two"] == []


def test_unicode_and_special_chars():
    sheets = {"S": [["Téxt & <tags>"], ["linha çã"]]}
    result = xlsxio.read_workbook(xlsxio.write_workbook(sheets))
    assert result["S"][0][0] == "Téxt & <tags>"
    assert result["S"][1][0] == "linha çã"


def test_not_a_zip_raises():
    with pytest.raises(xlsxio.NotXlsx):
        xlsxio.read_workbook(b"plainly not a workbook")


def test_zip_without_workbook_raises():
    import io
    import zipfile

    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w") as archive:
        archive.writestr("hello.txt", "hi")
    with pytest.raises(xlsxio.NotXlsx):
        xlsxio.read_workbook(buffer.getvalue())


def test_reader_handles_shared_strings():
    # Hand-built archive using the shared-strings layout our writer avoids.
    import io
    import zipfile

    buffer = io.BytesIO()
    ns = "http://schemas.openxmlformats.org/spreadsheetml/2006/main"
    with zipfile.ZipFile(buffer, "w") as archive:
        archive.writestr(
            "[Content_Types].xml",
            '<?xml version="1.0"?><Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">'
            '<Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/>'
            '<Default Extension="xml" ContentType="application/xml"/></Types>',
        )
        archive.writestr(
            "_rels/.rels",
            '<?xml version="1.0"?><Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">'
            '<Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/officeDocument" Target="xl/workbook.xml"/></Relationships>',
        )
        archive.writestr(
            "xl/workbook.xml",
            f'<?xml version="1.0"?><workbook xmlns="{ns}" '
            'xmlns:r="http://schemas.openxmlformats.org/officeDocument/2006/relationships">'
            '<sheets><sheet name="S" sheetId="1" r:id="rId1"/></sheets></workbook>',
        )
        archive.writestr(
            "xl/_rels/workbook.xml.rels",
            '<?xml version="1.0"?><Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">'
            '<Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/worksheet" Target="worksheets/sheet1.xml"/></Relationships>',
        )
        archive.writestr(
            "xl/sharedStrings.xml",
            f'<?xml version="1.0"?><sst xmlns="{ns}"><si><t>hello</t></si><si><t>world</t></si></sst>',
        )
        archive.writestr(
            "xl/worksheets/sheet1.xml",
            f'<?xml version="1.0"?><worksheet xmlns="{ns}"><sheetData>'
            '<row r="1"><c r="A1" t="s"><v>0</v></c><c r="B1" t="s"><v>1</v></c><c r="C1"><v>3.5</v></c></row>'
            "</sheetData></worksheet>",
        )
    result = xlsxio.read_workbook(buffer.getvalue())
    assert result["S"][0] == ["hello", "world", 3.5]


def test_sparse_rows_pad_to_width():
    data = xlsxio.write_workbook({"S": [["A", "B", "C"], ["only-a"]]})
    result = xlsxio.read_workbook(data)
    assert result["S"][1] == ["only-a", None, None]
