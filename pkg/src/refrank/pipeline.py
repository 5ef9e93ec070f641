"""End-to-end orchestration.

Stages run in order identify -> fetch -> extract -> resolve -> views ->
snapshot -> score -> report.  Every stage persists its output under the
cache directory and is skipped on rerun when that artifact already
exists, so deleting a downstream artifact resumes the run from there.
"""

from __future__ import annotations

import glob as globmod
import json
import logging
import re
from datetime import date, datetime, time, timezone
from pathlib import Path

from refrank import __version__
from refrank.config import PipelineConfig
from refrank.corpus import (
    CorpusSpec,
    build_outbreak_query,
    build_timeline_query,
    filter_by_infobox,
    load_category_graph,
    resolve_sitelinks,
    traverse_categories,
)
from refrank.domains import load_psl, try_resolve
from refrank.extract import (
    RevisionText,
    TemplateStore,
    expand_transclusions,
    extract_nonref_sources,
    extract_references,
)
from refrank.http import (
    CachedSession,
    PageviewClient,
    RevisionClient,
    SparqlClient,
    WikidataClient,
    day_range,
)
from refrank.ingest import (
    ArticleDaySnapshot,
    IngestStats,
    build_redirect_map,
    fetch_pageviews_api,
    ingest_pageview_dump,
    load_pageviews_file,
    parse_revisions_xml,
)
from refrank.report import emit_language_heatmap, emit_rank_timeline
from refrank.scoring import Model, ScoreSeries, build_score_series
from refrank.sqldump import open_dump

log = logging.getLogger(__name__)

STAGES = ["identify", "fetch", "extract", "resolve", "views", "snapshot", "score", "report"]


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


def _write_json(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, ensure_ascii=False, indent=1, sort_keys=True)
        fh.write("\n")


def _read_json(path: Path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _month_key(month: str) -> tuple[int, int]:
    year, mon = month.split("-")
    return int(year), int(mon)


class Pipeline:
    def __init__(self, config: PipelineConfig):
        self.cfg = config
        self.session = CachedSession(
            cache_dir=config.cache_dir,
            user_agent=config.user_agent,
            rate_limit=config.rate_limit,
            max_retries=config.max_retries,
            offline=config.offline,
        )
        self.diagnostics: dict[str, int] = {}

    # ---- artifact paths ----------------------------------------------

    def _cache(self, *parts) -> Path:
        return self.cfg.cache_dir.joinpath(*parts)

    def corpus_path(self, lang):
        return self._cache("corpus", f"{lang}.json")

    def revisions_path(self, lang):
        return self._cache("revisions", f"{lang}.json")

    def redirects_path(self, lang):
        return self._cache("redirects", f"{lang}.json")

    def occurrences_path(self, lang):
        return self._cache("occurrences", f"{lang}.json")

    def resolved_path(self, lang):
        return self._cache("resolved", f"{lang}.json")

    def pageviews_path(self, lang):
        return self._cache("pageviews", f"{lang}.json")

    def snapshots_path(self, lang):
        return self._cache("snapshots", f"{lang}.json")

    def scores_path(self, scope):
        return self._cache("scores", f"{scope}.json")

    # ---- run loop ----------------------------------------------------

    def run(self, stages=None, force: bool = False) -> dict:
        wanted = stages or STAGES
        manifest = {
            "version": __version__,
            "started": datetime.now(timezone.utc).isoformat(),
            "window": [self.cfg.window_start.isoformat(), self.cfg.window_end.isoformat()],
            "languages": list(self.cfg.languages),
            "stages": {},
        }
        manifest_path = self.cfg.output_dir / "run_manifest.json"
        for stage in STAGES:
            if stage not in wanted:
                continue
            runner = getattr(self, f"stage_{stage}")
            try:
                skipped = runner(force=force)
            except Exception as exc:
                manifest["stages"][stage] = {"status": "failed", "error": str(exc)}
                manifest["diagnostics"] = dict(self.diagnostics)
                _write_json(manifest_path, manifest)
                raise StageError(stage, exc) from exc
            manifest["stages"][stage] = {
                "status": "cached" if skipped else "completed",
                "at": datetime.now(timezone.utc).isoformat(),
            }
        manifest["diagnostics"] = dict(self.diagnostics)
        manifest["finished"] = datetime.now(timezone.utc).isoformat()
        _write_json(manifest_path, manifest)
        return manifest

    def _diag(self, key: str, count: int = 1) -> None:
        if count:
            self.diagnostics[key] = self.diagnostics.get(key, 0) + count

    # ---- stages ------------------------------------------------------

    def stage_identify(self, force=False) -> bool:
        cfg = self.cfg
        if not force and all(self.corpus_path(l).exists() for l in cfg.languages):
            return True
        methods = cfg.identify_methods
        sitelink_specs = {}
        if "wikidata" in methods:
            sparql = SparqlClient(self.session, cfg.sparql_endpoint)
            items = sparql.item_ids(build_outbreak_query())
            items |= sparql.item_ids(build_timeline_query())
            client = WikidataClient(self.session, cfg.wikidata_api)
            sitelink_specs = resolve_sitelinks(items, cfg.languages, client)
        for lang in cfg.languages:
            spec = CorpusSpec(language=lang)
            if "category" in methods:
                if not (cfg.page_dump and cfg.categorylinks_dump):
                    raise ValueError("category method requires page/categorylinks dumps")
                with open_dump(cfg.path_for(cfg.page_dump, lang)) as pages, \
                        open_dump(cfg.path_for(cfg.categorylinks_dump, lang)) as links:
                    graph = load_category_graph(pages, links)
                ids = traverse_categories(
                    graph, set(cfg.category_roots), set(cfg.category_exclusions),
                    cfg.category_max_depth,
                )
                for page_id in sorted(ids):
                    title, _ = graph.pages[page_id]
                    spec.add(str(page_id), title, "category")
            if lang in sitelink_specs:
                spec.merge(sitelink_specs[lang])
            if "infobox" in methods:
                texts = self._latest_texts(lang, spec.titles())
                kept = filter_by_infobox(
                    spec, texts, set(cfg.infobox_names),
                    (cfg.infobox_param, cfg.infobox_value),
                )
                dropped = spec.titles() - kept.titles()
                self._diag(f"{lang}.infobox_dropped", len(dropped))
                spec = kept
            self.corpus_path(lang).parent.mkdir(parents=True, exist_ok=True)
            spec.save(self.corpus_path(lang))
        return False

    def _latest_texts(self, lang, titles) -> dict[str, str]:
        """Latest available revision text per title, for infobox filtering."""
        texts = {}
        if self.cfg.fetch_mode == "xml" and self.cfg.revisions_xml:
            with open(self.cfg.path_for(self.cfg.revisions_xml, lang), "rb") as fh:
                for title, revs in parse_revisions_xml(fh, lang).items():
                    if title in titles and revs:
                        texts[title] = revs[-1].wikitext
        else:
            client = RevisionClient(self.session, self.cfg.revisions_api)
            for title in sorted(titles):
                revs = client.fetch_revisions(
                    lang, title, title,
                    datetime.combine(self.cfg.window_end, time(23, 59, 59), tzinfo=timezone.utc),
                    datetime.combine(self.cfg.window_end, time(23, 59, 59), tzinfo=timezone.utc),
                )
                if revs:
                    texts[title] = revs[-1].wikitext
        return texts

    def stage_fetch(self, force=False) -> bool:
        cfg = self.cfg
        done = all(
            self.revisions_path(l).exists() and self.redirects_path(l).exists()
            for l in cfg.languages
        )
        if not force and done:
            return True
        start = datetime.combine(cfg.window_start, time.min, tzinfo=timezone.utc)
        end = datetime.combine(cfg.window_end, time(23, 59, 59), tzinfo=timezone.utc)
        for lang in cfg.languages:
            corpus = CorpusSpec.load(self.corpus_path(lang))
            revisions: dict[str, list] = {}
            if cfg.fetch_mode == "xml":
                with open(cfg.path_for(cfg.revisions_xml, lang), "rb") as fh:
                    parsed = parse_revisions_xml(fh, lang)
                for title in corpus.titles():
                    revs = parsed.get(title, [])
                    if not revs:
                        self._diag(f"{lang}.missing_articles")
                    revisions[title] = [
                        [r.article_id, r.timestamp.isoformat(), r.wikitext] for r in revs
                    ]
            else:
                client = RevisionClient(self.session, cfg.revisions_api)
                for title in sorted(corpus.titles()):
                    entry = corpus.articles[title]
                    revs = client.fetch_revisions(lang, entry.article_id, title, start, end)
                    if not revs:
                        self._diag(f"{lang}.missing_articles")
                    revisions[title] = [
                        [r.article_id, r.timestamp.isoformat(), r.wikitext] for r in revs
                    ]
            _write_json(self.revisions_path(lang), revisions)

            pairs = {}
            if cfg.redirects_file:
                pairs = _read_json(Path(cfg.path_for(cfg.redirects_file, lang)))
            diags: list[str] = []
            mapping = build_redirect_map(corpus, pairs, diagnostics=diags)
            self._diag(f"{lang}.redirect_cycles", len(diags))
            _write_json(self.redirects_path(lang), mapping)
        return False

    def _revision_objects(self, lang) -> dict[str, list[RevisionText]]:
        data = _read_json(self.revisions_path(lang))
        out = {}
        for title, revs in data.items():
            out[title] = [
                RevisionText(article_id, lang, datetime.fromisoformat(ts), text)
                for article_id, ts, text in revs
            ]
        return out

    def stage_extract(self, force=False) -> bool:
        cfg = self.cfg
        if not force and all(self.occurrences_path(l).exists() for l in cfg.languages):
            return True
        citation = frozenset(cfg.citation_templates)
        url_params = frozenset(cfg.url_parameters)
        allowlist = set(cfg.nonref_allowlist)
        for lang in cfg.languages:
            store = TemplateStore()
            if cfg.templates_file:
                path = Path(cfg.path_for(cfg.templates_file, lang))
                if path.exists():
                    store = TemplateStore.load(path)
            out: dict[str, dict[str, list]] = {}
            diags: list[str] = []
            for title, revs in self._revision_objects(lang).items():
                per_rev = {}
                for rev in revs:
                    expanded = expand_transclusions(rev, store, cfg.max_template_depth, diags)
                    occurrences = extract_references(
                        expanded, citation, url_params,
                        include_groups=cfg.include_ref_groups, diagnostics=diags,
                    )
                    occurrences += extract_nonref_sources(expanded, allowlist, diags)
                    occurrences.sort(key=lambda o: o.byte_offset)
                    per_rev[rev.timestamp.isoformat()] = [
                        {
                            "urls": list(o.urls),
                            "ref_name": o.ref_name,
                            "via_template": o.via_template,
                            "in_ref_tag": o.in_ref_tag,
                            "byte_offset": o.byte_offset,
                            "flags": list(o.flags),
                        }
                        for o in occurrences
                    ]
                out[title] = per_rev
            self._diag(f"{lang}.extract_diagnostics", len(diags))
            _write_json(self.occurrences_path(lang), out)
        return False

    def stage_resolve(self, force=False) -> bool:
        cfg = self.cfg
        if not force and all(self.resolved_path(l).exists() for l in cfg.languages):
            return True
        rules = load_psl(cfg.psl_path, cfg.psl_section)
        cache: dict[str, str | None] = {}

        def resolve(url: str):
            if url not in cache:
                cache[url] = try_resolve(url, rules)
            return cache[url]

        for lang in cfg.languages:
            occurrences = _read_json(self.occurrences_path(lang))
            out: dict[str, dict[str, dict]] = {}
            unresolved = 0
            for title, per_rev in occurrences.items():
                resolved_revs = {}
                for ts, occs in per_rev.items():
                    total = 0
                    counts: dict[str, int] = {}
                    for occ in occs:
                        if not occ["urls"]:
                            continue
                        total += 1
                        for url in occ["urls"]:
                            domain = resolve(url)
                            if domain is None:
                                unresolved += 1
                            else:
                                counts[domain] = counts.get(domain, 0) + 1
                    resolved_revs[ts] = {"total": total, "domains": counts}
                out[title] = resolved_revs
            self._diag(f"{lang}.unresolved_urls", unresolved)
            _write_json(self.resolved_path(lang), out)
        return False

    def stage_views(self, force=False) -> bool:
        cfg = self.cfg
        if not force and all(self.pageviews_path(l).exists() for l in cfg.languages):
            return True
        for lang in cfg.languages:
            corpus = CorpusSpec.load(self.corpus_path(lang))
            redirects = _read_json(self.redirects_path(lang))
            if cfg.views_mode == "dump":
                stats = IngestStats()
                files = []
                for name in sorted(globmod.glob(str(cfg.path_for(cfg.views_dump_glob, lang)))):
                    stamp = _dump_timestamp(name)
                    files.append((stamp, open(name, encoding="utf-8")))
                try:
                    records = ingest_pageview_dump(
                        files, lang, redirects, cfg.window, stats=stats)
                finally:
                    for _, fh in files:
                        fh.close()
                self._diag(f"{lang}.malformed_view_lines", stats.malformed_lines)
            elif cfg.views_mode == "file":
                records = load_pageviews_file(
                    cfg.path_for(cfg.views_file, lang), lang, redirects, cfg.window)
            else:
                client = PageviewClient(self.session, cfg.views_api)
                records = fetch_pageviews_api(client, lang, corpus, redirects, cfg.window)
            _write_json(
                self.pageviews_path(lang),
                [
                    [r.title, r.date.isoformat(), r.views_all, r.views_human, r.source]
                    for r in records
                ],
            )
        return False

    def stage_snapshot(self, force=False) -> bool:
        cfg = self.cfg
        if not force and all(self.snapshots_path(l).exists() for l in cfg.languages):
            return True
        for lang in cfg.languages:
            corpus = CorpusSpec.load(self.corpus_path(lang))
            revisions = self._revision_objects(lang)
            resolved = _read_json(self.resolved_path(lang))
            views: dict[str, dict[date, tuple[int, int]]] = {}
            for title, day_str, all_v, human_v, _src in _read_json(self.pageviews_path(lang)):
                views.setdefault(title, {})[date.fromisoformat(day_str)] = (all_v, human_v)
            out: dict[str, list] = {}
            for title in sorted(corpus.titles()):
                revs = sorted(revisions.get(title, []), key=lambda r: r.timestamp)
                per_rev = resolved.get(title, {})
                title_views = views.get(title, {})
                rows = []
                for day in day_range(*cfg.window):
                    cutoff = datetime.combine(day, time(23, 59, 59), tzinfo=timezone.utc)
                    current = None
                    for rev in revs:
                        if rev.timestamp <= cutoff:
                            current = rev
                        else:
                            break
                    if current is None:
                        continue
                    counts = per_rev[current.timestamp.isoformat()]
                    all_v, human_v = title_views.get(day, (0, 0))
                    rows.append([
                        day.isoformat(), counts["total"], counts["domains"], all_v, human_v,
                    ])
                out[title] = rows
            _write_json(self.snapshots_path(lang), out)
        return False

    def _snapshots_by_day(self, lang) -> dict[date, list[ArticleDaySnapshot]]:
        data = _read_json(self.snapshots_path(lang))
        out: dict[date, list[ArticleDaySnapshot]] = {}
        for title in sorted(data):
            for day_str, total, domains, all_v, human_v in data[title]:
                day = date.fromisoformat(day_str)
                out.setdefault(day, []).append(
                    ArticleDaySnapshot(f"{lang}:{title}", day, total, domains, all_v, human_v)
                )
        return out

    def stage_score(self, force=False) -> bool:
        cfg = self.cfg
        scopes = list(cfg.languages) + (["all"] if len(cfg.languages) > 1 else [])
        if not force and all(self.scores_path(s).exists() for s in scopes):
            return True
        models = [Model(m) for m in cfg.models]
        merged: dict[date, list[ArticleDaySnapshot]] = {}
        for lang in cfg.languages:
            by_day = self._snapshots_by_day(lang)
            for day, snaps in by_day.items():
                merged.setdefault(day, []).extend(snaps)
            self._write_scores(lang, build_score_series(by_day, models))
        if len(cfg.languages) > 1:
            self._write_scores("all", build_score_series(merged, models))
        return False

    def _write_scores(self, scope, series_by_model) -> None:
        payload = {}
        for model, series in series_by_model.items():
            payload[model.value] = {
                domain: {
                    "daily": {d.isoformat(): v for d, v in entry.daily.items()},
                    "monthly": {f"{y:04d}-{m:02d}": v for (y, m), v in entry.monthly.items()},
                    "rank": {f"{y:04d}-{m:02d}": r for (y, m), r in entry.monthly_rank.items()},
                }
                for domain, entry in series.items()
            }
        _write_json(self.scores_path(scope), payload)

    def _load_scores(self, scope) -> dict[Model, dict[str, ScoreSeries]]:
        data = _read_json(self.scores_path(scope))
        out: dict[Model, dict[str, ScoreSeries]] = {}
        for model_name, series in data.items():
            model = Model(model_name)
            out[model] = {}
            for domain, entry in series.items():
                out[model][domain] = ScoreSeries(
                    domain, model,
                    daily={date.fromisoformat(d): v for d, v in entry["daily"].items()},
                    monthly={_month_key(m): v for m, v in entry["monthly"].items()},
                    monthly_rank={_month_key(m): r for m, r in entry["rank"].items()},
                )
        return out

    def stage_report(self, force=False) -> bool:
        cfg = self.cfg
        reports_dir = cfg.output_dir / "reports"
        scopes = list(cfg.languages) + (["all"] if len(cfg.languages) > 1 else [])
        models = [Model(m) for m in cfg.models]
        if not force and all(
            (reports_dir / scope / model.value / "rank_timeline.csv").exists()
            for scope in scopes for model in models
        ):
            return True
        per_language: dict[str, dict[Model, dict[str, ScoreSeries]]] = {}
        for scope in scopes:
            series_by_model = self._load_scores(scope)
            if scope != "all":
                per_language[scope] = series_by_model
            for model in models:
                out_dir = reports_dir / scope / model.value
                out_dir.mkdir(parents=True, exist_ok=True)
                emit_rank_timeline(
                    series_by_model.get(model, {}), scope, model, cfg.top_k,
                    out_dir / "rank_timeline.csv", out_dir / "rank_timeline.json",
                )
        for model in models:
            out_dir = reports_dir / "all" / model.value
            out_dir.mkdir(parents=True, exist_ok=True)
            emit_language_heatmap(
                {lang: per_language[lang].get(model, {}) for lang in per_language},
                model, out_dir / "heatmap.json",
            )
        return False


def _dump_timestamp(name: str) -> datetime:
    """Timestamp from an hourly dump filename like pageviews-20200101-060000."""
    match = re.search(r"(\d{8})-(\d{6})", Path(name).name)
    if not match:
        raise ValueError(f"cannot find a timestamp in dump filename {name!r}")
    return datetime.strptime("".join(match.groups()), "%Y%m%d%H%M%S").replace(
        tzinfo=timezone.utc)


def run_pipeline(config: PipelineConfig, stages=None, force: bool = False) -> dict:
    """Run the configured stages; returns the run manifest."""
    return Pipeline(config).run(stages=stages, force=force)
