"""Revision, redirect and pageview acquisition plus daily snapshots.

Joins the extraction output with pageview series into one
:class:`ArticleDaySnapshot` per (article, day): the reference totals and
per-domain counts of the revision visible that day, plus all-agent and
human view counts.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import date, datetime, time, timezone

from refrank.extract import RevisionText
from refrank.http import day_range


@dataclass(frozen=True)
class PageViewRecord:
    language: str
    title: str
    date: date
    views_all: int
    views_human: int
    source: str = "api"  # which acquisition mode produced the record


@dataclass
class ArticleDaySnapshot:
    """Per (article, day): total references, per-domain reference counts,
    and views.  Totals count every occurrence carrying a URL, including
    ones whose URL fails domain resolution; domain_counts cover resolved
    URLs only."""

    article_id: str
    date: date
    total_refs: int
    domain_counts: dict[str, int]
    views_all: int = 0
    views_human: int = 0


def parse_revisions_xml(stream, language: str) -> dict[str, list[RevisionText]]:
    """Parse a pages-history XML export into per-title revision lists
    (oldest first).  Namespace prefixes on tags are ignored."""
    out: dict[str, list[RevisionText]] = {}
    title = None
    page_id = None
    rev_ts = None
    rev_text = ""
    in_revision = False
    for event, elem in ET.iterparse(stream, events=("start", "end")):
        tag = elem.tag.rsplit("}", 1)[-1]
        if event == "start":
            if tag == "revision":
                in_revision = True
                rev_ts, rev_text = None, ""
            elif tag == "page":
                title, page_id = None, None
            continue
        if tag == "title" and not in_revision:
            title = (elem.text or "").strip()
        elif tag == "id" and not in_revision and page_id is None:
            page_id = (elem.text or "").strip()
        elif tag == "timestamp" and in_revision:
            rev_ts = datetime.fromisoformat((elem.text or "").replace("Z", "+00:00"))
        elif tag == "text" and in_revision:
            rev_text = elem.text or ""
        elif tag == "revision":
            in_revision = False
            if title and rev_ts is not None:
                out.setdefault(title, []).append(
                    RevisionText(page_id or title, language,
                                 rev_ts.astimezone(timezone.utc), rev_text)
                )
        elif tag == "page":
            if title in out:
                out[title].sort(key=lambda r: r.timestamp)
            elem.clear()
    return out


def build_redirect_map(corpus, redirect_pairs, max_chain: int = 3,
                       diagnostics: list[str] | None = None) -> dict[str, str]:
    """Alternative title -> canonical corpus title.

    Chains are followed up to ``max_chain`` hops; cycles drop their
    members with a diagnostic.  Canonical titles map to themselves.
    """
    canonical = corpus.titles()
    raw = dict(redirect_pairs)
    mapping = {title: title for title in canonical}
    for title in canonical:
        for alt in corpus.articles[title].alt_titles:
            mapping.setdefault(alt, title)
    for source, target in raw.items():
        if source in canonical:
            continue
        seen = [source]
        current = target
        for _ in range(max_chain):
            if current in canonical:
                mapping[source] = current
                break
            if current in seen:
                if diagnostics is not None:
                    diagnostics.append(f"redirect cycle dropped: {' -> '.join(seen)}")
                break
            seen.append(current)
            if current not in raw:
                break
            current = raw[current]
    return mapping


@dataclass
class IngestStats:
    matched_lines: int = 0
    skipped_lines: int = 0
    malformed_lines: int = 0


def ingest_pageview_dump(hourly_files, language, redirects, window,
                         project: str | None = None,
                         stats: IngestStats | None = None) -> list[PageViewRecord]:
    """Stream hourly pageview dump files into daily per-article records.

    ``hourly_files`` yields ``(timestamp, line_iterable)`` pairs; lines
    follow the "project page_title count bytes" format.  Counts for
    redirect titles are credited to the canonical article.  Dump files
    carry all-agent traffic only, so ``views_human`` is 0 and the record
    source says so.
    """
    if stats is None:
        stats = IngestStats()
    project = project or language
    start, end = window
    totals: dict[tuple[str, date], int] = {}
    for stamp, lines in hourly_files:
        day = stamp.date() if isinstance(stamp, datetime) else stamp
        if day < start or day > end:
            continue
        for line in lines:
            parts = line.split(" ")
            if len(parts) < 3:
                if line.strip():
                    stats.malformed_lines += 1
                continue
            if parts[0] != project:
                stats.skipped_lines += 1
                continue
            title = parts[1].replace("_", " ")
            canonical = redirects.get(title)
            if canonical is None:
                stats.skipped_lines += 1
                continue
            try:
                count = int(parts[2])
            except ValueError:
                stats.malformed_lines += 1
                continue
            totals[(canonical, day)] = totals.get((canonical, day), 0) + count
            stats.matched_lines += 1
    return [
        PageViewRecord(language, title, day, views, 0, source="dump")
        for (title, day), views in sorted(totals.items())
    ]


def fetch_pageviews_api(client, language, corpus, redirects, window) -> list[PageViewRecord]:
    """Per-article daily series from the pageview API, all-agent and
    human (user) traffic, folded over every alternative title."""
    start, end = window
    records = []
    for title in sorted(corpus.titles()):
        titles = [title] + sorted(
            alt for alt, canon in redirects.items() if canon == title and alt != title
        )
        all_views: dict[date, int] = {}
        human_views: dict[date, int] = {}
        for name in titles:
            for day, views in client.daily(language, name, start, end, "all-agents").items():
                all_views[day] = all_views.get(day, 0) + views
            for day, views in client.daily(language, name, start, end, "user").items():
                human_views[day] = human_views.get(day, 0) + views
        for day in day_range(start, end):
            records.append(
                PageViewRecord(
                    language, title, day,
                    all_views.get(day, 0),
                    min(human_views.get(day, 0), all_views.get(day, 0)),
                    source="api",
                )
            )
    return records


def load_pageviews_file(path, language, redirects, window) -> list[PageViewRecord]:
    """Daily views from a local JSON file: {title: {date: [all, human]}}.
    Stands in for the API overlay in offline/fixture runs."""
    import json

    start, end = window
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    totals: dict[tuple[str, date], list[int]] = {}
    for title, series in data.items():
        canonical = redirects.get(title.replace("_", " "))
        if canonical is None:
            continue
        for day_str, counts in series.items():
            day = date.fromisoformat(day_str)
            if day < start or day > end:
                continue
            entry = totals.setdefault((canonical, day), [0, 0])
            entry[0] += int(counts[0])
            entry[1] += int(counts[1])
    return [
        PageViewRecord(language, title, day, views[0], min(views[1], views[0]),
                       source="file")
        for (title, day), views in sorted(totals.items())
    ]


def revision_of_day(revisions: list[RevisionText], day: date) -> RevisionText | None:
    """The revision a reader saw on *day*: the last one whose timestamp is
    at or before 23:59:59 UTC of that day."""
    cutoff = datetime.combine(day, time(23, 59, 59), tzinfo=timezone.utc)
    chosen = None
    for rev in revisions:
        if rev.timestamp <= cutoff:
            chosen = rev
        else:
            break
    return chosen


def build_snapshots(article_id, revisions, extract, views, window,
                    resolve) -> list[ArticleDaySnapshot]:
    """Fold one article's revisions, extraction and views into daily
    snapshots.

    ``extract`` maps a revision to its occurrence list; ``resolve`` maps
    a URL to a domain or None.  Days before article creation produce no
    snapshot; per-revision results are computed once and carried forward
    across unchanged days.
    """
    start, end = window
    revisions = sorted(revisions, key=lambda r: r.timestamp)
    per_revision: dict[datetime, tuple[int, dict[str, int]]] = {}
    snapshots = []
    for day in day_range(start, end):
        rev = revision_of_day(revisions, day)
        if rev is None:
            continue
        if rev.timestamp not in per_revision:
            total = 0
            counts: dict[str, int] = {}
            for occ in extract(rev):
                if not occ.urls:
                    continue  # templated citation with no URL, or flagged reuse
                total += 1
                for url in occ.urls:
                    domain = resolve(url)
                    if domain is not None:
                        counts[domain] = counts.get(domain, 0) + 1
            per_revision[rev.timestamp] = (total, counts)
        total, counts = per_revision[rev.timestamp]
        views_all, views_human = views.get(day, (0, 0))
        snapshots.append(
            ArticleDaySnapshot(article_id, day, total, dict(counts),
                               views_all, views_human)
        )
    return snapshots
