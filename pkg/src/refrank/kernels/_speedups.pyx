# cython: language_level=3
"""Compiled scanning kernels.

Semantics must stay byte-identical to ``refrank.kernels.pure``; the parity
test runs both backends over the same inputs.
"""

BACKEND = "speedups"

cdef inline bint _url_stop(Py_UCS4 ch):
    return ch in u" \t\n\r<>\"'|[]{}\\^`"

cdef inline bint _url_trailing(Py_UCS4 ch):
    return ch in u".,;:!?)"


def scan_ref_tags(str text):
    """See :func:`refrank.kernels.pure.scan_ref_tags`."""
    cdef str low = text.lower()
    cdef Py_ssize_t n = len(text)
    cdef Py_ssize_t i = 0, after, gt, body_start, close, nxt, close_gt, end
    cdef str attrs, stripped
    out = []
    while True:
        i = low.find("<ref", i)
        if i < 0:
            break
        after = i + 4
        if after < n and low[after] not in " \t\n\r/>":
            i = after
            continue
        gt = text.find(">", after)
        if gt < 0:
            break
        attrs = text[after:gt]
        stripped = attrs.rstrip()
        if stripped.endswith("/"):
            out.append((i, gt + 1, stripped[:len(stripped) - 1], None, True))
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
            out.append((i, nxt, attrs, text[body_start:nxt], False))
            i = nxt
        else:
            out.append((i, n, attrs, text[body_start:], False))
            break
    return out


def scan_bare_urls(str text):
    """See :func:`refrank.kernels.pure.scan_bare_urls`."""
    cdef str low = text.lower()
    cdef Py_ssize_t n = len(text)
    cdef Py_ssize_t i = 0, j, scheme_len
    cdef Py_UCS4 prev
    out = []
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
        if i > 0:
            prev = text[i - 1]
            if prev.isalnum() or prev == u"-" or prev == u".":
                i += scheme_len
                continue
        j = i + scheme_len
        while j < n and not _url_stop(text[j]):
            j += 1
        while j > i + scheme_len and _url_trailing(text[j - 1]):
            j -= 1
        if j > i + scheme_len:
            out.append((i, j))
        i = j if j > i + scheme_len else i + scheme_len
    return out


def find_template_spans(str text):
    """See :func:`refrank.kernels.pure.find_template_spans`."""
    cdef Py_ssize_t n = len(text)
    cdef Py_ssize_t i = 0, start, end, frontier
    cdef Py_UCS4 c
    stack = []
    pairs = []
    while i < n - 1:
        c = text[i]
        if c == u"{" and text[i + 1] == u"{":
            stack.append(i)
            i += 2
        elif c == u"}" and text[i + 1] == u"}":
            if stack:
                pairs.append((stack.pop(), i + 2))
            i += 2
        else:
            i += 1
    pairs.sort()
    out = []
    frontier = 0
    for start, end in pairs:
        if start >= frontier:
            out.append((start, end))
            frontier = end
    return out
