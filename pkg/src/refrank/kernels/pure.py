"""Pure-Python scanning kernels.

These are the hot inner loops of wikitext processing: locating ref tags,
bare URLs and top-level template calls in large markup strings.  The
compiled twin in ``_speedups.pyx`` implements byte-identical semantics;
``tests/test_kernels.py`` checks the two against each other.
"""

from __future__ import annotations

BACKEND = "pure"

_URL_STOP = set(" \t\n\r<>\"'|[]{}\\^`")
_URL_TRAILING = ".,;:!?)"


def scan_ref_tags(text):
    """Locate every ``<ref ...>`` tag in *text*.

    Returns a list of ``(start, end, attrs, body, closed)`` tuples in text
    order.  ``body`` is ``None`` for self-closing tags.  An unterminated
    ref is closed at the next ``<ref`` or at end of text with
    ``closed=False`` so callers can flag it.
    """
    low = text.lower()
    n = len(text)
    out = []
    i = 0
    while True:
        i = low.find("<ref", i)
        if i < 0:
            break
        after = i + 4
        if after < n and low[after] not in " \t\n\r/>":
            # <references>, <refx...> etc.
            i = after
            continue
        gt = text.find(">", after)
        if gt < 0:
            break  # open tag runs off the end of the text
        attrs = text[after:gt]
        if attrs.rstrip().endswith("/"):
            out.append((i, gt + 1, attrs.rstrip()[:-1], None, True))
            i = gt + 1
            continue
        body_start = gt + 1
        close = low.find("</ref", body_start)
        nxt = low.find("<ref", body_start)
        if close >= 0 and (nxt < 0 or close <= nxt):
            close_gt = text.find(">", close)
            end = close_gt + 1 if close_gt >= 0 else n
            out.append((i, end, attrs, text[body_start:close], True))
            i = end
        elif nxt >= 0:
            # unterminated: close at the next ref tag
            out.append((i, nxt, attrs, text[body_start:nxt], False))
            i = nxt
        else:
            out.append((i, n, attrs, text[body_start:], False))
            break
    return out


def scan_bare_urls(text):
    """Return ``(start, end)`` spans of bare http(s) URLs in *text*."""
    low = text.lower()
    n = len(text)
    out = []
    i = 0
    while True:
        i = low.find("http", i)
        if i < 0:
            break
        if low.startswith("https://", i):
            scheme_len = 8
        elif low.startswith("http://", i):
            scheme_len = 7
        else:
            i += 4
            continue
        if i > 0 and (text[i - 1].isalnum() or text[i - 1] in "-."):
            i += scheme_len
            continue
        j = i + scheme_len
        while j < n and text[j] not in _URL_STOP:
            j += 1
        while j > i + scheme_len and text[j - 1] in _URL_TRAILING:
            j -= 1
        if j > i + scheme_len:
            out.append((i, j))
        i = j if j > i + scheme_len else i + scheme_len
    return out


def find_template_spans(text):
    """Return ``(start, end)`` spans of outermost ``{{...}}`` calls.

    Unmatched braces are treated as literal text.  A matched pair nested
    inside an *unmatched* open counts as top-level, mirroring how the
    wiki renderer recovers from stray braces.
    """
    n = len(text)
    stack = []
    pairs = []
    i = 0
    while i < n - 1:
        c = text[i]
        if c == "{" and text[i + 1] == "{":
            stack.append(i)
            i += 2
        elif c == "}" and text[i + 1] == "}":
            if stack:
                pairs.append((stack.pop(), i + 2))
            i += 2
        else:
            i += 1
    # keep only spans not contained in another matched span
    pairs.sort()
    out = []
    frontier = 0
    for start, end in pairs:
        if start >= frontier:
            out.append((start, end))
            frontier = end
    return out
