"""Topic-corpus identification.

Three complementary ways to find the articles on a topic in one language
edition: descending the wiki category graph, querying the semantic
knowledge base, and filtering on infobox parameters.  Their outputs merge
by union with per-article provenance.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

from refrank.extract import canonical_template_name, find_template_spans, split_template_call
from refrank.sqldump import iter_insert_rows

NS_ARTICLE = 0
NS_CATEGORY = 14

# Query builders for the knowledge-base query service: items that are an
# instance of a disease outbreak of COVID-19, and the pandemic timeline
# items.  Kept as canonical constants so downstream result URLs stay
# reproducible.
_OUTBREAK_QUERY = """\
SELECT ?item WHERE {
  ?item p:P31 [ps:P31 wd:Q3241045;
               pq:P642 wd:Q84263196]. }
"""

_TIMELINE_QUERY = """\
SELECT ?item WHERE {
  ?item p:P31 [ps:P31 wd:Q18340550;
               pq:P642 wd:Q81068910]. }
"""


def build_outbreak_query() -> str:
    return _OUTBREAK_QUERY


def build_timeline_query() -> str:
    return _TIMELINE_QUERY


def _norm_title(title: str) -> str:
    return title.replace("_", " ").strip()


@dataclass
class CategoryGraph:
    """Pages plus category membership edges from the SQL dumps.

    ``membership`` maps a category title (no namespace prefix, spaces) to
    the page ids of its members; member pages may themselves be
    categories, and cycles are possible.
    """

    pages: dict[int, tuple[str, int]] = field(default_factory=dict)
    membership: dict[str, set[int]] = field(default_factory=dict)

    def category_title(self, page_id: int) -> str | None:
        entry = self.pages.get(page_id)
        if entry and entry[1] == NS_CATEGORY:
            return entry[0]
        return None


def load_category_graph(page_stream, categorylinks_stream) -> CategoryGraph:
    """Build the graph from ``page`` and ``categorylinks`` dump streams.

    Only article (ns 0) and category (ns 14) pages are retained; rows in
    other namespaces are skipped silently.
    """
    graph = CategoryGraph()
    for row in iter_insert_rows(page_stream, table="page"):
        page_id, ns, title = row[0], row[1], row[2]
        if ns in (NS_ARTICLE, NS_CATEGORY):
            graph.pages[int(page_id)] = (_norm_title(str(title)), int(ns))
    for row in iter_insert_rows(categorylinks_stream, table="categorylinks"):
        src, dest = row[0], row[1]
        graph.membership.setdefault(_norm_title(str(dest)), set()).add(int(src))
    return graph


class UnknownRootError(ValueError):
    def __init__(self, missing):
        self.missing = sorted(missing)
        super().__init__(f"unknown root categories: {', '.join(self.missing)}")


def traverse_categories(
    graph: CategoryGraph,
    roots: set[str],
    exclusions: set[str] = frozenset(),
    max_depth: int = 3,
) -> set[int]:
    """Breadth-first descent from the root categories.

    Depth 0 means direct members of the roots only.  An excluded category
    is skipped with its entire subtree.  A visited set keeps the walk
    finite on cyclic category links.
    """
    if max_depth < 0:
        raise ValueError("max_depth must be >= 0")
    roots = {_norm_title(r) for r in roots}
    exclusions = {_norm_title(e) for e in exclusions}
    known = set(graph.membership)
    known.update(t for t, ns in graph.pages.values() if ns == NS_CATEGORY)
    missing = roots - known
    if missing:
        raise UnknownRootError(missing)

    articles: set[int] = set()
    visited: set[str] = set()
    queue = deque((r, 0) for r in sorted(roots) if r not in exclusions)
    visited.update(r for r, _ in queue)
    while queue:
        cat, depth = queue.popleft()
        for member in graph.membership.get(cat, ()):
            entry = graph.pages.get(member)
            if entry is None:
                continue
            title, ns = entry
            if ns == NS_ARTICLE:
                articles.add(member)
            elif ns == NS_CATEGORY and depth < max_depth:
                if title not in visited and title not in exclusions:
                    visited.add(title)
                    queue.append((title, depth + 1))
    return articles


@dataclass
class CorpusArticle:
    article_id: str
    title: str
    alt_titles: set[str] = field(default_factory=set)
    provenance: set[str] = field(default_factory=set)


@dataclass
class CorpusSpec:
    """The identified article set of one language edition."""

    language: str
    articles: dict[str, CorpusArticle] = field(default_factory=dict)

    def add(self, article_id: str, title: str, method: str,
            alt_titles=()) -> CorpusArticle:
        entry = self.articles.get(title)
        if entry is None:
            entry = CorpusArticle(article_id, title)
            self.articles[title] = entry
        entry.provenance.add(method)
        entry.alt_titles.update(alt_titles)
        return entry

    def merge(self, other: "CorpusSpec") -> None:
        if other.language != self.language:
            raise ValueError("cannot merge corpora of different languages")
        for entry in other.articles.values():
            merged = self.add(entry.article_id, entry.title, "merge", entry.alt_titles)
            merged.provenance.discard("merge")
            merged.provenance.update(entry.provenance)

    def titles(self) -> set[str]:
        return set(self.articles)

    def to_json(self) -> dict:
        return {
            "language": self.language,
            "articles": [
                {
                    "id": a.article_id,
                    "title": a.title,
                    "alt_titles": sorted(a.alt_titles),
                    "provenance": sorted(a.provenance),
                }
                for a in sorted(self.articles.values(), key=lambda a: a.title)
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "CorpusSpec":
        spec = cls(language=data["language"])
        for item in data["articles"]:
            entry = spec.add(item["id"], item["title"], "load", item.get("alt_titles", ()))
            entry.provenance.discard("load")
            entry.provenance.update(item.get("provenance", ()))
        return spec

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, ensure_ascii=False, indent=2, sort_keys=True)

    @classmethod
    def load(cls, path) -> "CorpusSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def resolve_sitelinks(items, languages, client) -> dict[str, CorpusSpec]:
    """Map knowledge-base items to article titles per requested language.

    ``client.sitelinks(item_ids, languages)`` must return
    ``{item_id: {language: title}}``.  Items without a sitelink in a
    language contribute nothing there; two items landing on the same
    title deduplicate into one corpus entry.
    """
    if not items:
        raise ValueError("no items to resolve")
    specs = {lang: CorpusSpec(language=lang) for lang in languages}
    links = client.sitelinks(sorted(items), sorted(languages))
    for item_id in sorted(links):
        for lang, title in links[item_id].items():
            if lang in specs and title:
                specs[lang].add(item_id, _norm_title(title), "wikidata")
    return specs


def filter_by_infobox(
    candidates: CorpusSpec,
    texts: dict[str, str],
    infobox_names: set[str],
    required_param: tuple[str, str],
) -> CorpusSpec:
    """Retain candidates whose text carries an allowlisted infobox whose
    ``required_param[0]`` parameter value contains ``required_param[1]``
    (case-insensitive).  Articles without text or a matching infobox are
    dropped."""
    names = {canonical_template_name(n) for n in infobox_names}
    param_name, needle = required_param
    needle = needle.lower()
    out = CorpusSpec(language=candidates.language)
    for title, entry in candidates.articles.items():
        text = texts.get(title)
        if not text:
            continue
        if _has_matching_infobox(text, names, param_name, needle):
            kept = out.add(entry.article_id, title, "infobox", entry.alt_titles)
            kept.provenance.update(entry.provenance)
    return out


def _has_matching_infobox(text, names, param_name, needle):
    for start, end in find_template_spans(text):
        name, _, named = split_template_call(text[start + 2 : end - 2])
        if canonical_template_name(name) in names:
            value = named.get(param_name, "")
            if needle in value.lower():
                return True
    return False
