import json

import pytest

from moduls.result_writer import OutputWriteError, ResultTable, ResultWriter, format_value


def sample_table():
    table = ResultTable("demo", ("label", "value"))
    table.add_row("first", 1 / 3)
    table.add_row("a,b", -1e-15)
    return table


@pytest.mark.parametrize(
    "value, expected",
    [
        (1 / 3, "0.333333333333"),
        (2 ** 0.5, "1.414213562373"),
        (-0.0, "0.000000000000"),
        (-4e-16, "0.000000000000"),
        (-0.25, "-0.250000000000"),
        (1, "1.000000000000"),
        ("perp", "perp"),
    ],
)
def test_format_value(value, expected):
    assert format_value(value) == expected


def test_row_length_is_checked():
    table = ResultTable("demo", ("a", "b"))
    with pytest.raises(ValueError):
        table.add_row(1.0)


def test_unknown_format_is_rejected():
    with pytest.raises(ValueError):
        ResultWriter(output_format="xml")


def test_csv_rendering_uses_crlf_and_quotes():
    text = ResultWriter().render_table(sample_table())
    assert text == 'label,value\r\nfirst,0.333333333333\r\n"a,b",0.000000000000\r\n'


def test_json_rendering():
    document = json.loads(ResultWriter(output_format="json").render_table(sample_table()))
    assert document == {
        "format": 1,
        "command": "demo",
        "rows": [{"label": "first", "value": 0.333333333333}, {"label": "a,b", "value": 0.0}],
    }


def test_write_table_to_file(tmp_path):
    out = tmp_path / "demo.csv"
    ResultWriter(str(out)).write_table(sample_table())
    assert out.read_bytes() == b'label,value\r\nfirst,0.333333333333\r\n"a,b",0.000000000000\r\n'


def test_write_table_to_stdout(capsys):
    ResultWriter().write_table(sample_table())
    assert capsys.readouterr().out.splitlines()[0] == "label,value"


def test_document_as_text_lines(capsys):
    ResultWriter().write_document("report", {"passed": True}, ["one", "two"])
    assert capsys.readouterr().out == "one\ntwo\n"


def test_document_as_json(capsys):
    ResultWriter(output_format="json").write_document("report", {"passed": True}, ["ignored"])
    assert json.loads(capsys.readouterr().out) == {"format": 1, "command": "report", "passed": True}


def test_unwritable_destination(tmp_path):
    writer = ResultWriter(str(tmp_path / "missing" / "demo.csv"))
    with pytest.raises(OutputWriteError):
        writer.write_table(sample_table())
