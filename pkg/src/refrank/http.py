"""Rate-limited HTTP access with retries and an on-disk JSON cache.

Every remote call goes through :class:`CachedSession`: responses are
cached under human-readable keys so repeated pipeline runs (and the
``--offline`` mode) replay without network traffic.  Clients for the
revision API, the per-article pageview API, the knowledge-base entity
API and the SPARQL endpoint live here too.
"""

from __future__ import annotations

import hashlib
import json
import re
import time
import urllib.parse
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

import requests

from refrank.extract import RevisionText

DEFAULT_USER_AGENT = "refrank/0.1 (source-reliability research pipeline)"


class HttpError(RuntimeError):
    pass


class OfflineCacheMiss(HttpError):
    pass


def slugify(title: str) -> str:
    slug = re.sub(r"[^A-Za-z0-9._-]+", "_", title)
    return slug.strip("_") or "untitled"


class CachedSession:
    """requests.Session wrapper: pacing, capped exponential-backoff
    retries, mandatory user agent, JSON disk cache."""

    def __init__(
        self,
        cache_dir=None,
        user_agent: str = DEFAULT_USER_AGENT,
        rate_limit: float = 2.0,
        max_retries: int = 4,
        backoff: float = 0.5,
        offline: bool = False,
        session=None,
    ):
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.user_agent = user_agent
        self.min_interval = 1.0 / rate_limit if rate_limit > 0 else 0.0
        self.max_retries = max_retries
        self.backoff = backoff
        self.offline = offline
        self.session = session or requests.Session()
        self._last_request = 0.0

    def _cache_path(self, url, params, cache_key):
        if self.cache_dir is None:
            return None
        if cache_key is None:
            digest = hashlib.sha1(
                (url + "?" + urllib.parse.urlencode(sorted((params or {}).items())))
                .encode("utf-8")
            ).hexdigest()
            cache_key = f"http/{digest}.json"
        return self.cache_dir / cache_key

    def get_json(self, url, params=None, cache_key=None):
        path = self._cache_path(url, params, cache_key)
        if path is not None and path.exists():
            with open(path, encoding="utf-8") as fh:
                return json.load(fh)
        if self.offline:
            raise OfflineCacheMiss(f"offline mode and no cached response for {url}")
        payload = self._request(url, params)
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump(payload, fh, ensure_ascii=False)
            tmp.replace(path)
        return payload

    def _request(self, url, params):
        last_error = None
        for attempt in range(self.max_retries + 1):
            wait = self.min_interval - (time.monotonic() - self._last_request)
            if wait > 0:
                time.sleep(wait)
            self._last_request = time.monotonic()
            try:
                resp = self.session.get(
                    url, params=params, timeout=60,
                    headers={"User-Agent": self.user_agent},
                )
                if resp.status_code == 200:
                    return resp.json()
                last_error = HttpError(f"HTTP {resp.status_code} from {url}")
                if resp.status_code not in (429, 500, 502, 503, 504):
                    raise last_error
            except (requests.RequestException, ValueError) as exc:
                last_error = exc
            if attempt < self.max_retries:
                time.sleep(min(self.backoff * 2 ** attempt, 30.0))
        raise HttpError(f"giving up on {url} after {self.max_retries + 1} attempts: {last_error}")


class SparqlClient:
    """Query-service client returning item identifiers for ?item queries."""

    def __init__(self, session: CachedSession, endpoint: str):
        self.session = session
        self.endpoint = endpoint

    def item_ids(self, query: str) -> set[str]:
        digest = hashlib.sha1(query.encode("utf-8")).hexdigest()
        data = self.session.get_json(
            self.endpoint,
            params={"query": query, "format": "json"},
            cache_key=f"sparql/{digest}.json",
        )
        items = set()
        for binding in data.get("results", {}).get("bindings", []):
            value = binding.get("item", {}).get("value", "")
            if value:
                items.add(value.rstrip("/").rsplit("/", 1)[-1])
        return items


class WikidataClient:
    """Entity-API client used to turn items into per-language sitelinks."""

    def __init__(self, session: CachedSession, api_url: str, batch_size: int = 50):
        self.session = session
        self.api_url = api_url
        self.batch_size = batch_size

    def sitelinks(self, item_ids, languages) -> dict[str, dict[str, str]]:
        items = sorted(item_ids)
        sites = [f"{lang}wiki" for lang in sorted(languages)]
        out: dict[str, dict[str, str]] = {}
        for i in range(0, len(items), self.batch_size):
            batch = items[i : i + self.batch_size]
            digest = hashlib.sha1("|".join(batch + sites).encode()).hexdigest()
            data = self.session.get_json(
                self.api_url,
                params={
                    "action": "wbgetentities",
                    "ids": "|".join(batch),
                    "props": "sitelinks",
                    "sitefilter": "|".join(sites),
                    "format": "json",
                },
                cache_key=f"sitelinks/{digest}.json",
            )
            for item_id, entity in data.get("entities", {}).items():
                links = {}
                for site, link in entity.get("sitelinks", {}).items():
                    if site.endswith("wiki"):
                        links[site[:-4]] = link.get("title", "")
                if links:
                    out[item_id] = links
        return out


class RevisionClient:
    """Action-API client paging through an article's revision history."""

    def __init__(self, session: CachedSession, api_pattern: str):
        # api_pattern like "https://{lang}.wikipedia.org/w/api.php"
        self.session = session
        self.api_pattern = api_pattern

    def _query(self, language, params, cache_key):
        url = self.api_pattern.format(lang=language)
        base = {
            "action": "query",
            "prop": "revisions",
            "format": "json",
            "formatversion": "2",
            "rvprop": "timestamp|content|ids",
            "rvslots": "main",
        }
        base.update(params)
        return self.session.get_json(url, params=base, cache_key=cache_key)

    def fetch_revisions(self, language, article_id, title, start, end):
        """All revisions inside [start, end] plus the latest one before
        start (the article state when the window opens), oldest first."""
        revisions = []
        slug = slugify(title)
        cont = None
        page = 0
        while True:
            params = {
                "titles": title,
                "rvstart": start.isoformat(),
                "rvend": end.isoformat(),
                "rvdir": "newer",
                "rvlimit": "50",
            }
            if cont:
                params["rvcontinue"] = cont
            data = self._query(
                language, params,
                f"revisions/{language}/{slug}__{start.date()}_{end.date()}_{page}.json",
            )
            pages = data.get("query", {}).get("pages", [])
            if not pages or pages[0].get("missing"):
                return []
            for rev in pages[0].get("revisions", []):
                revisions.append(self._to_revision(language, article_id, rev))
            cont = data.get("continue", {}).get("rvcontinue")
            if not cont:
                break
            page += 1
        # state at window start
        data = self._query(
            language,
            {"titles": title, "rvstart": start.isoformat(), "rvdir": "older", "rvlimit": "1"},
            f"revisions/{language}/{slug}__before_{start.date()}.json",
        )
        pages = data.get("query", {}).get("pages", [])
        if pages and not pages[0].get("missing"):
            for rev in pages[0].get("revisions", []):
                parsed = self._to_revision(language, article_id, rev)
                if not revisions or parsed.timestamp < revisions[0].timestamp:
                    revisions.insert(0, parsed)
        revisions.sort(key=lambda r: r.timestamp)
        return revisions

    @staticmethod
    def _to_revision(language, article_id, rev) -> RevisionText:
        ts = datetime.fromisoformat(rev["timestamp"].replace("Z", "+00:00"))
        content = rev.get("slots", {}).get("main", {}).get("content", rev.get("content", ""))
        return RevisionText(article_id, language, ts.astimezone(timezone.utc), content or "")


class PageviewClient:
    """REST pageview API client: per-article daily series per agent class."""

    def __init__(self, session: CachedSession, rest_base: str):
        self.rest_base = rest_base.rstrip("/")
        self.session = session

    def daily(self, language, title, start: date, end: date, agent: str) -> dict[date, int]:
        project = f"{language}.wikipedia"
        encoded = urllib.parse.quote(title.replace(" ", "_"), safe="")
        url = (
            f"{self.rest_base}/metrics/pageviews/per-article/{project}/all-access/"
            f"{agent}/{encoded}/daily/{start.strftime('%Y%m%d')}/{end.strftime('%Y%m%d')}"
        )
        cache_key = (
            f"pageviews/{language}/{slugify(title)}__{agent}_"
            f"{start.isoformat()}_{end.isoformat()}.json"
        )
        try:
            data = self.session.get_json(url, cache_key=cache_key)
        except OfflineCacheMiss:
            raise
        except HttpError:
            # missing articles produce 404; treat as a zero series
            return {}
        out = {}
        for item in data.get("items", []):
            stamp = item.get("timestamp", "")
            if len(stamp) >= 8:
                day = date(int(stamp[:4]), int(stamp[4:6]), int(stamp[6:8]))
                out[day] = int(item.get("views", 0))
        return out


def day_range(start: date, end: date):
    day = start
    while day <= end:
        yield day
        day += timedelta(days=1)
