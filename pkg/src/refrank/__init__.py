"""refrank: time-resolved reliability ranking of the web sources cited in
encyclopedia articles.

The pipeline identifies topic articles per language edition, extracts
every cited URL from their revision histories, resolves URLs to
registrable domains, and scores domains daily with frequency (F) and
views-per-reference (PR, PR2) models, aggregated to monthly rank
timelines.
"""

__version__ = "0.1.0"

from refrank.extract import (
    ReferenceOccurrence,
    RevisionText,
    TemplateStore,
    expand_transclusions,
    extract_nonref_sources,
    extract_references,
)
from refrank.domains import PslRuleSet, parse_psl, resolve_source, try_resolve
from refrank.scoring import Model, ScoreSeries, score_f, score_pr

__all__ = [
    "__version__",
    "ReferenceOccurrence",
    "RevisionText",
    "TemplateStore",
    "expand_transclusions",
    "extract_references",
    "extract_nonref_sources",
    "PslRuleSet",
    "parse_psl",
    "resolve_source",
    "try_resolve",
    "Model",
    "ScoreSeries",
    "score_f",
    "score_pr",
]
