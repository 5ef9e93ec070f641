"""Pipeline configuration.

One TOML file drives a whole run; paths may carry a ``{lang}`` placeholder
that is filled per language.  See README for the full key reference.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from refrank.extract import DEFAULT_CITATION_TEMPLATES, DEFAULT_MAX_DEPTH, DEFAULT_URL_PARAMETERS
from refrank.http import DEFAULT_USER_AGENT

# language editions the pipeline recognizes out of the box; extend via
# [general] extra_languages
KNOWN_LANGUAGES = {
    "ar", "bg", "ca", "cs", "da", "de", "el", "en", "eo", "es", "et", "fa",
    "fi", "fr", "he", "hi", "hr", "hu", "id", "it", "ja", "ko", "lt", "lv",
    "ms", "nl", "no", "pl", "pt", "ro", "ru", "sk", "sl", "sr", "sv", "th",
    "tr", "uk", "vi", "zh",
}


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    languages: list[str]
    window_start: date
    window_end: date
    cache_dir: Path
    output_dir: Path
    psl_path: Path
    psl_section: str = "all"

    # identification
    identify_methods: list[str] = field(default_factory=lambda: ["category"])
    category_roots: list[str] = field(default_factory=list)
    category_exclusions: list[str] = field(default_factory=list)
    category_max_depth: int = 3
    page_dump: str | None = None
    categorylinks_dump: str | None = None
    sparql_endpoint: str = "https://query.wikidata.org/sparql"
    wikidata_api: str = "https://www.wikidata.org/w/api.php"
    infobox_names: list[str] = field(
        default_factory=lambda: ["Infobox outbreak", "Infobox pandemic"])
    infobox_param: str = "disease"
    infobox_value: str = "COVID-19"

    # extraction
    citation_templates: list[str] = field(
        default_factory=lambda: sorted(DEFAULT_CITATION_TEMPLATES))
    url_parameters: list[str] = field(
        default_factory=lambda: sorted(DEFAULT_URL_PARAMETERS))
    nonref_allowlist: list[tuple[str, str]] = field(default_factory=list)
    include_ref_groups: bool = True
    max_template_depth: int = DEFAULT_MAX_DEPTH
    templates_file: str | None = None

    # revision acquisition
    fetch_mode: str = "api"  # api | xml
    revisions_api: str = "https://{lang}.wikipedia.org/w/api.php"
    revisions_xml: str | None = None
    redirects_file: str | None = None

    # pageviews
    views_mode: str = "api"  # api | dump | file
    views_api: str = "https://wikimedia.org/api/rest_v1"
    views_dump_glob: str | None = None
    views_file: str | None = None

    # http
    rate_limit: float = 2.0
    max_retries: int = 4
    user_agent: str = DEFAULT_USER_AGENT
    offline: bool = False

    # reporting
    top_k: int = 10
    models: list[str] = field(default_factory=lambda: ["F", "PR", "PR2"])

    @property
    def window(self) -> tuple[date, date]:
        return (self.window_start, self.window_end)

    def path_for(self, pattern: str, lang: str) -> Path:
        return Path(pattern.format(lang=lang))

    def validate(self) -> None:
        if not self.languages:
            raise ConfigError("at least one language is required")
        for lang in self.languages:
            if not re.fullmatch(r"[a-z][a-z0-9-]{1,11}", lang):
                raise ConfigError(f"malformed language code {lang!r}")
            if lang not in self._known_languages:
                raise ConfigError(f"unknown language code {lang!r}")
        if self.window_start > self.window_end:
            raise ConfigError("analysis window start is after its end")
        if not self.psl_path.exists():
            raise ConfigError(f"PSL file not found: {self.psl_path}")
        for mode, allowed in (
            (self.fetch_mode, ("api", "xml")),
            (self.views_mode, ("api", "dump", "file")),
        ):
            if mode not in allowed:
                raise ConfigError(f"unknown mode {mode!r} (expected one of {allowed})")
        for model in self.models:
            if model not in ("F", "PR", "PR2"):
                raise ConfigError(f"unknown model {model!r}")
        if self.top_k < 1:
            raise ConfigError("top_k must be >= 1")

    _known_languages: set = field(default_factory=lambda: set(KNOWN_LANGUAGES),
                                  repr=False)


def load_config(path, **overrides) -> PipelineConfig:
    """Read, apply keyword overrides (CLI flags), and validate."""
    path = Path(path)
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    base = path.parent

    def _path(value):
        p = Path(value)
        return p if p.is_absolute() else base / p

    general = raw.get("general", {})
    identify = raw.get("identify", {})
    extract = raw.get("extract", {})
    fetch = raw.get("fetch", {})
    views = raw.get("views", {})
    http = raw.get("http", {})
    report = raw.get("report", {})

    try:
        cfg = PipelineConfig(
            languages=list(general["languages"]),
            window_start=general["window_start"],
            window_end=general["window_end"],
            cache_dir=_path(general.get("cache_dir", "cache")),
            output_dir=_path(general.get("output_dir", "out")),
            psl_path=_path(general["psl_path"]),
            psl_section=general.get("psl_section", "all"),
        )
    except KeyError as exc:
        raise ConfigError(f"missing required config key: {exc}") from exc

    cfg._known_languages.update(general.get("extra_languages", []))

    if "methods" in identify:
        cfg.identify_methods = list(identify["methods"])
    cfg.category_roots = list(identify.get("category_roots", []))
    cfg.category_exclusions = list(identify.get("category_exclusions", []))
    cfg.category_max_depth = identify.get("max_depth", cfg.category_max_depth)
    cfg.page_dump = _maybe_path(identify.get("page_dump"), base)
    cfg.categorylinks_dump = _maybe_path(identify.get("categorylinks_dump"), base)
    cfg.sparql_endpoint = identify.get("sparql_endpoint", cfg.sparql_endpoint)
    cfg.wikidata_api = identify.get("wikidata_api", cfg.wikidata_api)
    cfg.infobox_names = list(identify.get("infobox_names", cfg.infobox_names))
    cfg.infobox_param = identify.get("infobox_param", cfg.infobox_param)
    cfg.infobox_value = identify.get("infobox_value", cfg.infobox_value)

    cfg.citation_templates = list(extract.get("citation_templates", cfg.citation_templates))
    cfg.url_parameters = list(extract.get("url_parameters", cfg.url_parameters))
    cfg.nonref_allowlist = [tuple(pair) for pair in extract.get("nonref_allowlist", [])]
    cfg.include_ref_groups = extract.get("include_ref_groups", True)
    cfg.max_template_depth = extract.get("max_template_depth", cfg.max_template_depth)
    cfg.templates_file = _maybe_path(extract.get("templates_file"), base)

    cfg.fetch_mode = fetch.get("mode", cfg.fetch_mode)
    cfg.revisions_api = fetch.get("api", cfg.revisions_api)
    cfg.revisions_xml = _maybe_path(fetch.get("revisions_xml"), base)
    cfg.redirects_file = _maybe_path(fetch.get("redirects_file"), base)

    cfg.views_mode = views.get("mode", cfg.views_mode)
    cfg.views_api = views.get("api", cfg.views_api)
    cfg.views_dump_glob = _maybe_path(views.get("dump_glob"), base)
    cfg.views_file = _maybe_path(views.get("file"), base)

    cfg.rate_limit = http.get("rate_limit", cfg.rate_limit)
    cfg.max_retries = http.get("max_retries", cfg.max_retries)
    cfg.user_agent = http.get("user_agent", cfg.user_agent)

    cfg.top_k = report.get("top_k", cfg.top_k)
    cfg.models = list(report.get("models", cfg.models))

    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    cfg.validate()
    return cfg


def _maybe_path(value, base) -> str | None:
    if value is None:
        return None
    p = Path(value)
    return str(p if p.is_absolute() else base / p)
