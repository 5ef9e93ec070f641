"""Wikitext reference extraction.

Takes raw revision markup, expands template transclusions against a
date-matched template store, and emits every cited web source as a
:class:`ReferenceOccurrence`.  All functions are pure: the same inputs
always produce the same occurrence list, so revisions can be processed in
parallel without shared state.
"""

from __future__ import annotations

import bisect
import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone

from refrank.kernels import find_template_spans, scan_bare_urls, scan_ref_tags

DEFAULT_CITATION_TEMPLATES = frozenset(
    ["Cite web", "Cite news", "Cite book", "Cite journal", "NHLE", "Cite magazine"]
)
# archive-url parameters are deliberately absent: the original source, not
# the archive host, is the cited website
DEFAULT_URL_PARAMETERS = frozenset(["url", "URL", "website"])

DEFAULT_MAX_DEPTH = 5

_COMMENT_RE = re.compile(r"<!--.*?(?:-->|$)", re.DOTALL)
_NOWIKI_RE = re.compile(r"<nowiki>.*?(?:</nowiki>|$)", re.DOTALL | re.IGNORECASE)
_NOINCLUDE_RE = re.compile(r"<noinclude>.*?(?:</noinclude>|$)", re.DOTALL | re.IGNORECASE)
_INCLUDEONLY_RE = re.compile(r"</?includeonly>", re.IGNORECASE)
_PARAM_RE = re.compile(r"\{\{\{([^{}|]*)(?:\|([^{}]*))?\}\}\}", re.DOTALL)
_ATTR_RE = re.compile(r"""(\w+)\s*=\s*("[^"]*"|'[^']*'|\S+)""")


@dataclass(frozen=True)
class RevisionText:
    """One historical revision of one article."""

    article_id: str
    language: str
    timestamp: datetime
    wikitext: str


@dataclass(frozen=True)
class ReferenceOccurrence:
    """One citation occurrence in one revision.

    ``urls`` may be empty only for flagged degenerate cases (a named reuse
    whose definition is missing) or when ``via_template`` is set; such
    occurrences are dropped by snapshot building.
    """

    urls: tuple[str, ...]
    ref_name: str | None
    via_template: str | None
    in_ref_tag: bool
    byte_offset: int
    flags: tuple[str, ...] = ()


def canonical_template_name(name: str) -> str:
    """Normalize a template name the way the wiki does for page titles:
    underscores become spaces, whitespace collapses, first letter upper."""
    name = re.sub(r"[\s_]+", " ", name).strip()
    if not name:
        return ""
    return name[0].upper() + name[1:]


class TemplateStore:
    """Dated template revisions plus an alias map.

    Revision lists stay sorted by timestamp; lookups select the latest
    revision not newer than the article revision being expanded.
    Read-only after construction as far as expansion is concerned.
    """

    def __init__(self):
        self._revs: dict[str, list[tuple[datetime, str]]] = {}
        self._aliases: dict[str, str] = {}

    def add_revision(self, name: str, timestamp: datetime, text: str) -> None:
        revs = self._revs.setdefault(canonical_template_name(name), [])
        bisect.insort(revs, (timestamp, text))

    def add_alias(self, alias: str, canonical: str) -> None:
        self._aliases[canonical_template_name(alias)] = canonical_template_name(canonical)

    def canonical(self, name: str) -> str:
        name = canonical_template_name(name)
        seen = {name}
        while name in self._aliases:
            name = self._aliases[name]
            if name in seen:
                break
            seen.add(name)
        return name

    def lookup(self, name: str, as_of: datetime) -> str | None:
        revs = self._revs.get(self.canonical(name))
        if not revs:
            return None
        idx = bisect.bisect_right(revs, (as_of, "￿"))
        if idx == 0:
            return None
        return revs[idx - 1][1]

    def __contains__(self, name: str) -> bool:
        return self.canonical(name) in self._revs

    def to_json(self) -> dict:
        return {
            "templates": {
                name: [[ts.isoformat(), text] for ts, text in revs]
                for name, revs in self._revs.items()
            },
            "aliases": dict(self._aliases),
        }

    @classmethod
    def from_json(cls, data: dict) -> "TemplateStore":
        store = cls()
        for name, revs in data.get("templates", {}).items():
            for ts, text in revs:
                store.add_revision(name, _parse_ts(ts), text)
        for alias, canonical in data.get("aliases", {}).items():
            store.add_alias(alias, canonical)
        return store

    @classmethod
    def load(cls, path) -> "TemplateStore":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def _parse_ts(value: str) -> datetime:
    ts = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


def strip_comments(text: str) -> str:
    return _COMMENT_RE.sub("", text)


def _mask_nowiki(text: str) -> str:
    """Blank out nowiki spans (same length, so offsets survive)."""
    return _NOWIKI_RE.sub(lambda m: " " * len(m.group(0)), text)


def _mask_spans(text: str, spans) -> str:
    if not spans:
        return text
    parts = []
    pos = 0
    for start, end in spans:
        parts.append(text[pos:start])
        parts.append(" " * (end - start))
        pos = end
    parts.append(text[pos:])
    return "".join(parts)


def split_template_call(inner: str) -> tuple[str, list[str], dict[str, str]]:
    """Split the inside of a ``{{...}}`` call into name, positional args
    and named args.  Pipes nested in ``{{ }}`` or ``[[ ]]`` do not split,
    matching the wiki parser.  A positional value containing a top-level
    ``=`` becomes a named argument (also wiki behavior).
    """
    parts = []
    depth = 0
    start = 0
    i = 0
    n = len(inner)
    while i < n:
        two = inner[i : i + 2]
        if two in ("{{", "[["):
            depth += 1
            i += 2
        elif two in ("}}", "]]"):
            depth -= 1
            i += 2
        elif inner[i] == "|" and depth <= 0:
            parts.append(inner[start:i])
            start = i + 1
            i += 1
        else:
            i += 1
    parts.append(inner[start:])
    name = parts[0]
    positional: list[str] = []
    named: dict[str, str] = {}
    for part in parts[1:]:
        eq = _top_level_eq(part)
        if eq >= 0:
            named[part[:eq].strip()] = part[eq + 1 :].strip()
        else:
            positional.append(part)
    return name, positional, named


def _top_level_eq(part: str) -> int:
    depth = 0
    i = 0
    n = len(part)
    while i < n:
        two = part[i : i + 2]
        if two in ("{{", "[["):
            depth += 1
            i += 2
        elif two in ("}}", "]]"):
            depth -= 1
            i += 2
        elif part[i] == "=" and depth <= 0:
            return i
        else:
            i += 1
    return -1


def substitute_params(body: str, positional: list[str], named: dict[str, str]) -> str:
    """Replace ``{{{name|default}}}`` placeholders in a template body.

    Passed parameters win, defaults apply otherwise; a parameter with
    neither becomes empty text.  Runs innermost-first until stable so
    defaults may themselves contain placeholders.
    """
    values = dict(named)
    for idx, val in enumerate(positional, start=1):
        values.setdefault(str(idx), val)

    def repl(match: re.Match) -> str:
        key = match.group(1).strip()
        if key in values:
            return values[key]
        default = match.group(2)
        return default if default is not None else ""

    for _ in range(25):
        new = _PARAM_RE.sub(repl, body)
        if new == body:
            break
        body = new
    return body


def expand_transclusions(
    rev: RevisionText,
    store: TemplateStore,
    max_depth: int = DEFAULT_MAX_DEPTH,
    diagnostics: list[str] | None = None,
) -> str:
    """Expand ``{{Name|...}}`` calls against the store, date-matched to the
    revision timestamp.  Unknown templates (and templates with no revision
    old enough) are left verbatim; unmatched braces are literal text."""
    if max_depth < 0:
        raise ValueError("max_depth must be >= 0")
    text = strip_comments(rev.wikitext)
    return _expand(text, store, rev.timestamp, max_depth, diagnostics)


def _expand(text, store, as_of, depth, diagnostics):
    spans = find_template_spans(text)
    if not spans:
        return text
    parts = []
    pos = 0
    for start, end in spans:
        parts.append(text[pos:start])
        inner = text[start + 2 : end - 2]
        name, positional, named = split_template_call(inner)
        body = store.lookup(name, as_of)
        if body is None:
            parts.append(text[start:end])
        elif depth <= 0:
            if diagnostics is not None:
                diagnostics.append(
                    f"max transclusion depth reached at {canonical_template_name(name)!r}"
                )
            parts.append(text[start:end])
        else:
            body = _INCLUDEONLY_RE.sub("", _NOINCLUDE_RE.sub("", strip_comments(body)))
            body = substitute_params(body, positional, named)
            parts.append(_expand(body, store, as_of, depth - 1, diagnostics))
        pos = end
    parts.append(text[pos:])
    return "".join(parts)


def _parse_ref_attrs(attrs: str) -> dict[str, str]:
    out = {}
    for key, value in _ATTR_RE.findall(attrs):
        out[key.lower()] = value.strip("\"'")
    return out


def _template_urls(inner: str, citation_templates, url_parameter_names):
    """URL-bearing parameter values of a citation template call, in
    parameter order.  Returns (canonical name or None, urls)."""
    name, _, named = split_template_call(inner)
    canon = canonical_template_name(name)
    if canon not in citation_templates:
        return None, []
    urls = []
    for key, value in named.items():
        if key in url_parameter_names:
            for s, e in scan_bare_urls(value):
                urls.append(value[s:e])
    return canon, urls


def _body_sources(body: str, citation_templates, url_parameter_names):
    """Cited URLs of one ref body: bare links outside template calls plus
    url parameters of contained citation templates."""
    spans = find_template_spans(body)
    via = None
    tmpl_urls: list[tuple[int, str]] = []
    for start, end in spans:
        canon, urls = _template_urls(
            body[start + 2 : end - 2], citation_templates, url_parameter_names
        )
        if canon is not None and via is None:
            via = canon
        tmpl_urls.extend((start, u) for u in urls)
    masked = _mask_spans(body, spans)
    bare = [(s, masked[s:e]) for s, e in scan_bare_urls(masked)]
    merged = sorted(bare + tmpl_urls, key=lambda item: item[0])
    seen = set()
    urls = []
    for _, url in merged:
        if url not in seen:
            seen.add(url)
            urls.append(url)
    return urls, via


def _byte_offsets(text: str, occurrences):
    """Rewrite char offsets as UTF-8 byte offsets (no-op for ASCII text)."""
    if text.isascii():
        return occurrences
    positions = sorted({occ.byte_offset for occ in occurrences})
    mapping = {}
    prev_char = 0
    prev_byte = 0
    for pos in positions:
        prev_byte += len(text[prev_char:pos].encode("utf-8"))
        prev_char = pos
        mapping[pos] = prev_byte
    return [
        ReferenceOccurrence(
            occ.urls, occ.ref_name, occ.via_template, occ.in_ref_tag,
            mapping[occ.byte_offset], occ.flags,
        )
        for occ in occurrences
    ]


def extract_references(
    expanded: str,
    citation_templates=DEFAULT_CITATION_TEMPLATES,
    url_parameter_names=DEFAULT_URL_PARAMETERS,
    *,
    include_groups: bool = True,
    diagnostics: list[str] | None = None,
) -> list[ReferenceOccurrence]:
    """Extract every citation occurrence from post-transclusion wikitext.

    Emits one occurrence per ``<ref>`` body, one per self-closing named
    reuse (carrying the defining ref's URLs, definition order free), and
    one per citation template outside any ref tag.  Malformed markup never
    aborts: unterminated refs are closed at the next ref tag or end of
    text and flagged.
    """
    text = _mask_nowiki(strip_comments(expanded))
    tags = scan_ref_tags(text)

    definitions: dict[str, tuple[tuple[str, ...], str | None]] = {}
    for start, end, attrs, body, closed in tags:
        if body is None:
            continue
        name = _parse_ref_attrs(attrs).get("name")
        if name and name not in definitions:
            urls, via = _body_sources(body, citation_templates, url_parameter_names)
            definitions[name] = (tuple(urls), via)

    occurrences: list[ReferenceOccurrence] = []
    for start, end, attrs, body, closed in tags:
        parsed = _parse_ref_attrs(attrs)
        name = parsed.get("name")
        if parsed.get("group") and not include_groups:
            continue
        if body is None:
            if not name:
                if diagnostics is not None:
                    diagnostics.append(f"self-closing ref without name at {start}")
                continue
            if name in definitions:
                urls, via = definitions[name]
                flags = ()
            else:
                urls, via, flags = (), None, ("undefined-ref-name",)
                if diagnostics is not None:
                    diagnostics.append(f"ref name {name!r} reused but never defined")
            occurrences.append(
                ReferenceOccurrence(urls, name, via, True, start, flags)
            )
        else:
            urls, via = _body_sources(body, citation_templates, url_parameter_names)
            flags = () if closed else ("unterminated-ref",)
            if not urls and via is None:
                flags += ("no-sources",)
            if not closed and diagnostics is not None:
                diagnostics.append(f"unterminated ref at {start}")
            occurrences.append(
                ReferenceOccurrence(tuple(urls), name, via, True, start, flags)
            )

    # citation templates placed outside any ref tag
    ref_masked = _mask_spans(text, [(s, e) for s, e, *_ in tags])
    for start, end in find_template_spans(ref_masked):
        canon, urls = _template_urls(
            ref_masked[start + 2 : end - 2], citation_templates, url_parameter_names
        )
        if canon is not None:
            occurrences.append(
                ReferenceOccurrence(tuple(urls), None, canon, False, start)
            )

    occurrences.sort(key=lambda occ: occ.byte_offset)
    return _byte_offsets(text, occurrences)


def extract_nonref_sources(
    expanded: str,
    allowlist: set[tuple[str, str]],
    diagnostics: list[str] | None = None,
) -> list[ReferenceOccurrence]:
    """Extract sources cited through allowlisted non-reference templates,
    e.g. the data-source note below a statistics chart.  ``allowlist``
    holds (template name, parameter name) pairs."""
    if not allowlist:
        return []
    by_template: dict[str, set[str]] = {}
    for tmpl, param in allowlist:
        by_template.setdefault(canonical_template_name(tmpl), set()).add(param)
    text = _mask_nowiki(strip_comments(expanded))
    occurrences = []
    for start, end in find_template_spans(text):
        name, _, named = split_template_call(text[start + 2 : end - 2])
        canon = canonical_template_name(name)
        params = by_template.get(canon)
        if not params:
            continue
        urls = []
        for key, value in named.items():
            if key in params:
                for s, e in scan_bare_urls(value):
                    url = value[s:e]
                    if url not in urls:
                        urls.append(url)
        if urls:
            occurrences.append(
                ReferenceOccurrence(tuple(urls), None, canon, False, start)
            )
    occurrences.sort(key=lambda occ: occ.byte_offset)
    return _byte_offsets(text, occurrences)
