"""Report emission: rank-timeline CSV/JSON and cross-language heatmap data.

Plot-ready output only; rendering is left to external tooling.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from datetime import date

from refrank.scoring import Model, ScoreSeries

log = logging.getLogger(__name__)

CSV_COLUMNS = ["language", "month", "model", "domain", "score", "rank"]


@dataclass(frozen=True)
class ReportRow:
    language: str
    month: str  # YYYY-MM
    model: str
    domain: str
    score: float
    rank: int


def _month_str(month: tuple[int, int]) -> str:
    return f"{month[0]:04d}-{month[1]:02d}"


def build_rank_timeline(series: dict[str, ScoreSeries], scope: str, model: Model,
                        top_k: int) -> list[ReportRow]:
    """Rows for every domain that enters the monthly top ``top_k`` at
    least once, all months ascending."""
    kept = {
        domain
        for domain, entry in series.items()
        if any(rank <= top_k for rank in entry.monthly_rank.values())
    }
    months = sorted({m for entry in series.values() for m in entry.monthly})
    rows = []
    for month in months:
        month_rows = [
            ReportRow(scope, _month_str(month), model.value, domain,
                      series[domain].monthly[month],
                      series[domain].monthly_rank[month])
            for domain in kept
            if month in series[domain].monthly
        ]
        rows.extend(sorted(month_rows, key=lambda r: (r.rank, r.domain)))
    return rows


def emit_rank_timeline(series: dict[str, ScoreSeries], scope: str, model: Model,
                       top_k: int, csv_path, json_path) -> list[ReportRow]:
    rows = build_rank_timeline(series, scope, model, top_k)
    if not rows:
        log.warning("rank timeline for %s/%s is empty", scope, model.value)
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([row.language, row.month, row.model, row.domain,
                             f"{row.score:.6f}", row.rank])
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(
            [dict(row.__dict__, score=round(row.score, 6)) for row in rows],
            fh, ensure_ascii=False, indent=2,
        )
        fh.write("\n")
    return rows


def parse_rank_timeline_csv(path) -> list[ReportRow]:
    """Inverse of emit_rank_timeline's CSV output."""
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for record in reader:
            rows.append(
                ReportRow(record["language"], record["month"], record["model"],
                          record["domain"], float(record["score"]), int(record["rank"]))
            )
    return rows


def build_language_heatmap(series_by_language: dict[str, dict[str, ScoreSeries]],
                           model: Model, top_k: int = 10) -> dict:
    """Across-months average rank per (domain, language) for every domain
    that reaches the monthly top ``top_k`` in at least one language.
    Missing cells are explicit nulls."""
    languages = sorted(series_by_language)
    domains = sorted({
        domain
        for series in series_by_language.values()
        for domain, entry in series.items()
        if any(rank <= top_k for rank in entry.monthly_rank.values())
    })
    matrix = []
    for domain in domains:
        row = []
        for lang in languages:
            entry = series_by_language[lang].get(domain)
            if entry and entry.monthly_rank:
                ranks = list(entry.monthly_rank.values())
                row.append(round(sum(ranks) / len(ranks), 6))
            else:
                row.append(None)
        matrix.append(row)
    return {
        "model": model.value,
        "languages": languages,
        "domains": domains,
        "average_ranks": matrix,
    }


def emit_language_heatmap(series_by_language, model: Model, json_path,
                          top_k: int = 10) -> dict:
    data = build_language_heatmap(series_by_language, model, top_k)
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, ensure_ascii=False, indent=2)
        fh.write("\n")
    return data
