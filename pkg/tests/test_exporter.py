import random

import pytest

from epolis.errors import ParseError, SchemaMismatch, UnsupportedFormat
from epolis.exporter import (
    PAPER_ACTIONS_HEADER,
    PAPER_MOVEMENTS_HEADER,
    ExportFormat,
    ExportMode,
    export_actions,
    export_movements,
    format_float,
    import_actions,
    import_movements,
    parse_format,
)
from epolis.store import ActionRow, MovementRow

FORMATS = list(ExportFormat)

# printable edge cases: delimiters, quotes, newlines, YAML traps, non-ASCII
NASTY = [
    "plain",
    "with, comma",
    'quo"ted',
    "line\nbreak",
    "  padded  ",
    "",
    "yes",
    "null",
    "0123",
    "1e5",
    "2024-01-15T10:23:45.123Z",
    "Ένα δίλημμα στην πλατεία",
    "emoji ✓ züge",
    "semi;colon\tand tab",
]


def fuzz_action(rng: random.Random) -> ActionRow:
    return ActionRow(
        player_name=rng.choice(NASTY),
        question_answer=rng.choice("ABCDEF"),
        question_number=f"Q{rng.randint(1, 99)}",
        question_description=rng.choice(NASTY),
        timestamp=rng.randint(0, 4_000_000_000_000),
        session_id=f"sess-{rng.randint(0, 999)}",
        time_to_answer_ms=rng.randint(0, 600_000),
    )


def fuzz_movement(rng: random.Random) -> MovementRow:
    def f():
        return rng.choice(
            [0.0, 1.0, -1.0, rng.uniform(-1000, 1000), rng.uniform(-1, 1), 0.7071067811865476]
        )

    return MovementRow(
        player_name=rng.choice(NASTY),
        x_axis=f(), y_axis=0.0, z_axis=f(),
        euler_x=rng.uniform(-89, 89), euler_y=rng.uniform(0, 359.9), euler_z=rng.uniform(0, 359.9),
        quat_x=f(), quat_y=f(), quat_z=f(), quat_w=f(),
        timestamp=rng.randint(0, 4_000_000_000_000),
        session_id=f"sess-{rng.randint(0, 999)}",
    )


ONE_ROW = ActionRow(
    player_name="maria",
    question_answer="B",
    question_number="Q1",
    question_description="police incident",
    timestamp=1705314225123,  # 2024-01-15T10:23:45.123Z
    session_id="s-1",
    time_to_answer_ms=3500,
)


class TestCsvShape:
    def test_paper_header_pinned(self):
        data = export_actions([], ExportFormat.CSV, ExportMode.PAPER_EXACT)
        assert data.decode("utf-8").splitlines()[0] == (
            "player_name,question_answer,question_number,question_description,timestamp"
        )
        assert PAPER_ACTIONS_HEADER == (
            "player_name,question_answer,question_number,question_description,timestamp"
        )

    def test_movement_header_pinned(self):
        assert PAPER_MOVEMENTS_HEADER == (
            "player_name,x_axis,y_axis,z_axis,euler_x,euler_y,euler_z,"
            "quat_x,quat_y,quat_z,quat_w,timestamp"
        )
        data = export_movements([], ExportFormat.CSV)
        assert data.decode("utf-8").splitlines()[0] == PAPER_MOVEMENTS_HEADER

    def test_simple_row_body(self):
        data = export_actions([ONE_ROW], ExportFormat.CSV, ExportMode.PAPER_EXACT)
        body = data.decode("utf-8").splitlines()[1]
        assert body == "maria,B,Q1,police incident,2024-01-15T10:23:45.123Z"

    def test_comma_field_quoted_and_doubled(self):
        row = ActionRow("ann", "A", "Q2", 'say "hi", twice', 0, "s", 1)
        body = export_actions([row], ExportFormat.CSV, ExportMode.PAPER_EXACT).decode()
        assert '"say ""hi"", twice"' in body

    def test_zero_rows_header_only(self):
        data = export_actions([], ExportFormat.CSV, ExportMode.EXTENDED)
        assert data.decode().strip() == PAPER_ACTIONS_HEADER + ",session_id,time_to_answer_ms"

    def test_crlf_accepted_on_read(self):
        data = export_actions([ONE_ROW], ExportFormat.CSV, ExportMode.EXTENDED)
        crlf = data.decode().replace("\n", "\r\n").encode()
        assert import_actions(crlf, ExportFormat.CSV) == [ONE_ROW]

    def test_reordered_header_rejected(self):
        bad = b"question_answer,player_name,question_number,question_description,timestamp\n"
        with pytest.raises(SchemaMismatch):
            import_actions(bad, ExportFormat.CSV)

    def test_identity_quaternion_renders_as_integers(self):
        row = MovementRow("p", 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0, "s")
        body = export_movements([row], ExportFormat.CSV).decode().splitlines()[1]
        assert body == "p,0,0,0,0,0,0,0,0,0,1,1970-01-01T00:00:00.000Z"


class TestFloatRendering:
    def test_integral_drops_fraction(self):
        assert format_float(0.0) == "0"
        assert format_float(-3.0) == "-3"

    def test_shortest_round_trip(self):
        for v in (0.7071067811865476, 0.1, 1e-3, 9999999.5, -0.25):
            assert float(format_float(v)) == v

    def test_no_exponent_in_band(self):
        for v in (0.001, 0.5, 123456.789, 9999999.0):
            s = format_float(v)
            assert "e" not in s and "E" not in s


class TestRoundTrip:
    @pytest.mark.parametrize("fmt", FORMATS)
    def test_actions_extended_identity(self, fmt):
        rng = random.Random(414)
        rows = [fuzz_action(rng) for _ in range(200)]
        data = export_actions(rows, fmt, ExportMode.EXTENDED)
        assert import_actions(data, fmt) == rows

    @pytest.mark.parametrize("fmt", FORMATS)
    def test_movements_extended_identity(self, fmt):
        rng = random.Random(515)
        rows = [fuzz_movement(rng) for _ in range(200)]
        data = export_movements(rows, fmt, ExportMode.EXTENDED)
        assert import_movements(data, fmt) == rows

    @pytest.mark.parametrize("fmt", FORMATS)
    def test_paper_mode_preserves_paper_fields(self, fmt):
        rng = random.Random(616)
        rows = [fuzz_action(rng) for _ in range(50)]
        back = import_actions(export_actions(rows, fmt, ExportMode.PAPER_EXACT), fmt)
        for orig, round_tripped in zip(rows, back):
            assert round_tripped.player_name == orig.player_name
            assert round_tripped.question_answer == orig.question_answer
            assert round_tripped.question_number == orig.question_number
            assert round_tripped.question_description == orig.question_description
            assert round_tripped.timestamp == orig.timestamp
            assert round_tripped.session_id == "" and round_tripped.time_to_answer_ms == 0

    def test_cross_format_agreement(self):
        rng = random.Random(717)
        rows = [fuzz_action(rng) for _ in range(100)]
        decoded = {
            fmt: import_actions(export_actions(rows, fmt, ExportMode.EXTENDED), fmt)
            for fmt in FORMATS
        }
        for fmt in FORMATS:
            assert decoded[fmt] == rows

    def test_zero_rows_all_formats(self):
        for fmt in FORMATS:
            assert import_actions(export_actions([], fmt, ExportMode.EXTENDED), fmt) == []
            assert import_movements(export_movements([], fmt), fmt) == []


class TestImportErrors:
    def test_truncated_json(self):
        data = export_actions([ONE_ROW], ExportFormat.JSON, ExportMode.EXTENDED)
        with pytest.raises(ParseError):
            import_actions(data[: len(data) // 2], ExportFormat.JSON)

    def test_wrong_kind_rejected(self):
        data = export_movements([], ExportFormat.JSON)
        with pytest.raises(SchemaMismatch):
            import_actions(data, ExportFormat.JSON)

    def test_bad_xml(self):
        with pytest.raises(ParseError):
            import_actions(b"<export kind='actions'><row>", ExportFormat.XML)

    def test_unknown_format_string(self):
        with pytest.raises(UnsupportedFormat):
            parse_format("parquet")

    def test_csv_bad_timestamp(self):
        text = PAPER_ACTIONS_HEADER + "\nmaria,B,Q1,x,NOT_A_TIME\n"
        with pytest.raises(ParseError):
            import_actions(text.encode(), ExportFormat.CSV)

    def test_csv_wrong_field_count(self):
        text = PAPER_ACTIONS_HEADER + "\nmaria,B,Q1\n"
        with pytest.raises(ParseError):
            import_actions(text.encode(), ExportFormat.CSV)


class TestYamlShape:
    def test_parses_as_mapping_with_rows(self):
        import yaml

        doc = yaml.safe_load(export_actions([ONE_ROW], ExportFormat.YAML, ExportMode.EXTENDED))
        assert doc["kind"] == "actions"
        assert doc["rows"][0]["player_name"] == "maria"
        assert doc["rows"][0]["timestamp"] == "2024-01-15T10:23:45.123Z"


class TestXmlShape:
    def test_envelope(self):
        text = export_actions([ONE_ROW], ExportFormat.XML, ExportMode.PAPER_EXACT).decode()
        assert text.startswith('<export kind="actions"><row>')
        assert "<player_name>maria</player_name>" in text
