"""Streaming parser for MediaWiki SQL backup dumps.

Dumps ship as multi-gigabyte files of multi-row ``INSERT INTO ... VALUES
(...),(...);`` statements.  The parser tokenizes value tuples respecting
quoted strings and backslash escapes while holding only the current
buffer window in memory.
"""

from __future__ import annotations

import gzip
import io

_ESCAPES = {
    "0": "\0",
    "n": "\n",
    "t": "\t",
    "r": "\r",
    "b": "\b",
    "Z": "\x1a",
    "'": "'",
    '"': '"',
    "\\": "\\",
    "%": "\\%",
    "_": "\\_",
}

_NUM_CHARS = set("+-0123456789.eExX abcdefABCDEF")


class SqlDumpError(ValueError):
    """Malformed or truncated dump; carries the character offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


def open_dump(path):
    """Open a ``.sql`` or ``.sql.gz`` dump as a text stream."""
    if str(path).endswith(".gz"):
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8", errors="replace")
    return open(path, encoding="utf-8", errors="replace")


def iter_insert_rows(stream, table: str | None = None, chunk_size: int = 1 << 16):
    """Yield one tuple of Python values per inserted row.

    ``table`` restricts output to statements targeting that table; other
    statements are skipped.  Strings arrive unescaped, numbers as
    int/float, NULL as None.  A statement truncated at stream end raises
    :class:`SqlDumpError` with the offending offset.
    """
    buf = ""
    pos = 0
    base = 0
    eof = False

    def fill() -> bool:
        nonlocal buf, pos, base, eof
        if pos > chunk_size:
            base += pos
            buf = buf[pos:]
            pos = 0
        if not eof:
            chunk = stream.read(chunk_size)
            if chunk:
                buf += chunk
            else:
                eof = True
        return len(buf) > pos

    def ensure(n: int) -> bool:
        while len(buf) - pos < n and not eof:
            fill()
        return len(buf) - pos >= n

    def skip_ws():
        nonlocal pos
        while True:
            if not ensure(1):
                return
            if buf[pos] in " \t\n\r":
                pos += 1
            else:
                return

    def parse_string(quote: str) -> str:
        nonlocal pos
        out = []
        pos += 1  # opening quote
        while True:
            if not ensure(1):
                raise SqlDumpError("unterminated string", base + pos)
            ch = buf[pos]
            if ch == "\\":
                if not ensure(2):
                    raise SqlDumpError("dangling escape", base + pos)
                esc = buf[pos + 1]
                out.append(_ESCAPES.get(esc, esc))
                pos += 2
            elif ch == quote:
                if ensure(2) and buf[pos + 1] == quote:  # doubled quote
                    out.append(quote)
                    pos += 2
                else:
                    pos += 1
                    return "".join(out)
            else:
                out.append(ch)
                pos += 1

    def parse_value():
        nonlocal pos
        skip_ws()
        if not ensure(1):
            raise SqlDumpError("truncated statement", base + pos)
        ch = buf[pos]
        if ch in "'\"":
            return parse_string(ch)
        # accumulate chars instead of slicing: ensure() may rebase the
        # buffer and invalidate any saved start index
        chars = []
        while ensure(1) and buf[pos] not in ",)":
            chars.append(buf[pos])
            pos += 1
        token = "".join(chars).strip()
        if token.upper() == "NULL":
            return None
        try:
            if any(c in token for c in ".eE") and not token.lower().startswith("0x"):
                return float(token)
            return int(token, 0)
        except ValueError:
            return token

    def skip_statement():
        # consume to the terminating ';', honoring quoted strings
        nonlocal pos
        while ensure(1):
            ch = buf[pos]
            if ch in "'\"":
                parse_string(ch)
            elif ch == ";":
                pos += 1
                return
            else:
                pos += 1

    while True:
        idx = buf.find("INSERT INTO", pos)
        while idx < 0:
            if eof:
                return
            # keep a tail so a statement head split across chunks is found
            pos = max(pos, len(buf) - 16)
            if not fill():
                return
            idx = buf.find("INSERT INTO", pos)
        pos = idx + len("INSERT INTO")
        skip_ws()
        if not ensure(1):
            raise SqlDumpError("truncated statement", base + pos)
        if buf[pos] == "`":
            end = buf.find("`", pos + 1)
            while end < 0:
                if not fill():
                    raise SqlDumpError("unterminated table name", base + pos)
                end = buf.find("`", pos + 1)
            name = buf[pos + 1 : end]
            pos = end + 1
        else:
            chars = []
            while ensure(1) and (buf[pos].isalnum() or buf[pos] == "_"):
                chars.append(buf[pos])
                pos += 1
            name = "".join(chars)
        if table is not None and name != table:
            skip_statement()
            continue
        # optional column list, then VALUES
        skip_ws()
        if ensure(1) and buf[pos] == "(":
            depth = 0
            while ensure(1):
                ch = buf[pos]
                if ch == "(":
                    depth += 1
                elif ch == ")":
                    depth -= 1
                    if depth == 0:
                        pos += 1
                        break
                pos += 1
        skip_ws()
        if not ensure(6) or buf[pos : pos + 6].upper() != "VALUES":
            raise SqlDumpError("expected VALUES", base + pos)
        pos += 6
        while True:
            skip_ws()
            if not ensure(1):
                raise SqlDumpError("truncated statement", base + pos)
            ch = buf[pos]
            if ch == ",":
                pos += 1
                continue
            if ch == ";":
                pos += 1
                break
            if ch != "(":
                raise SqlDumpError(f"unexpected {ch!r} in VALUES list", base + pos)
            pos += 1
            row = []
            while True:
                row.append(parse_value())
                skip_ws()
                if not ensure(1):
                    raise SqlDumpError("truncated row", base + pos)
                ch = buf[pos]
                pos += 1
                if ch == ")":
                    break
                if ch != ",":
                    raise SqlDumpError(f"unexpected {ch!r} in row", base + pos)
            yield tuple(row)
