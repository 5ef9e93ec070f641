"""Streaming SQL dump parser tests."""

import gzip
import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from refrank.sqldump import SqlDumpError, iter_insert_rows, open_dump


def rows(sql, table=None, chunk_size=1 << 16):
    return list(iter_insert_rows(io.StringIO(sql), table=table,
                                 chunk_size=chunk_size))


def test_basic_rows():
    sql = "INSERT INTO `page` VALUES (1,0,'Main'),(2,14,'Cat');\n"
    assert rows(sql) == [(1, 0, "Main"), (2, 14, "Cat")]


def test_table_filter_and_multiple_statements():
    sql = (
        "INSERT INTO `page` VALUES (1,0,'A');\n"
        "INSERT INTO `categorylinks` VALUES (1,'Cat_name');\n"
        "INSERT INTO `page` VALUES (2,0,'B');\n"
    )
    assert rows(sql, table="page") == [(1, 0, "A"), (2, 0, "B")]
    assert rows(sql, table="categorylinks") == [(1, "Cat_name")]
    assert rows(sql, table="missing") == []


def test_value_types():
    sql = "INSERT INTO t VALUES (42,-7,3.5,NULL,'s',0.0,1e3);"
    assert rows(sql) == [(42, -7, 3.5, None, "s", 0.0, 1000.0)]


def test_escapes_round_trip():
    sql = r"INSERT INTO t VALUES ('It\'s','a\\b','x\ny','d''q','100\%');"
    assert rows(sql) == [("It's", "a\\b", "x\ny", "d'q", "100\\%")]


def test_quoted_parens_and_commas():
    sql = "INSERT INTO t VALUES ('a,b','c)d','(e');"
    assert rows(sql) == [("a,b", "c)d", "(e")]


def test_column_list_and_unbackticked_name():
    sql = "INSERT INTO page (page_id, page_title) VALUES (5,'T');"
    assert rows(sql, table="page") == [(5, "T")]


def test_noise_between_statements():
    sql = (
        "-- MySQL dump\nDROP TABLE IF EXISTS `t`;\n"
        "CREATE TABLE `t` (x int);\n"
        "INSERT INTO `t` VALUES (1);\nUNLOCK TABLES;\n"
    )
    assert rows(sql) == [(1,)]


def test_truncated_statement_reports_offset():
    sql = "INSERT INTO t VALUES (1,'unfinished"
    with pytest.raises(SqlDumpError) as excinfo:
        rows(sql)
    assert excinfo.value.offset <= len(sql)
    assert "offset" in str(excinfo.value)


def test_truncated_values_list():
    with pytest.raises(SqlDumpError):
        rows("INSERT INTO t VALUES (1,2),")


def test_small_chunks_match_large():
    sql = (
        "INSERT INTO `page` VALUES "
        + ",".join(f"({i},0,'Title_{i}')" for i in range(200))
        + ";"
    )
    expect = rows(sql)
    assert len(expect) == 200
    for chunk_size in (7, 64, 1024):
        assert rows(sql, chunk_size=chunk_size) == expect


def test_open_dump_gzip(tmp_path):
    sql = "INSERT INTO `t` VALUES (1,'z');"
    plain = tmp_path / "d.sql"
    plain.write_text(sql, encoding="utf-8")
    gz = tmp_path / "d.sql.gz"
    with gzip.open(gz, "wt", encoding="utf-8") as fh:
        fh.write(sql)
    for path in (plain, gz):
        with open_dump(path) as fh:
            assert list(iter_insert_rows(fh)) == [(1, "z")]


TEXT = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",)), max_size=30
)


def _quote(value):
    if value is None:
        return "NULL"
    if isinstance(value, int):
        return str(value)
    escaped = value.replace("\\", "\\\\").replace("'", "\\'")
    return f"'{escaped}'"


@given(
    st.lists(
        st.lists(
            st.one_of(st.none(), st.integers(-10**6, 10**6), TEXT),
            min_size=1, max_size=5,
        ),
        min_size=1, max_size=20,
    ),
    st.integers(min_value=8, max_value=256),
)
@settings(max_examples=150, deadline=None)
def test_round_trip_property(table_rows, chunk_size):
    sql = (
        "INSERT INTO `t` VALUES "
        + ",".join("(" + ",".join(_quote(v) for v in row) + ")"
                   for row in table_rows)
        + ";"
    )
    assert rows(sql, chunk_size=chunk_size) == [tuple(r) for r in table_rows]
