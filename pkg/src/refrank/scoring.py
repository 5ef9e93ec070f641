"""Source-reliability scores and rank timelines.

Three models over daily snapshots:

* F: total citation frequency of a domain across the corpus.
* PR: views-per-reference weighted frequency, so a citation in a heavily
  read, sparsely referenced article counts for more.
* PR2: PR restricted to human (user-agent class) views.

Daily scores aggregate to calendar-month means; months rank domains
descending with a deterministic lexicographic tie-break.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from datetime import date


class Model(str, enum.Enum):
    F = "F"
    PR = "PR"
    PR2 = "PR2"


@dataclass
class ScoreSeries:
    domain: str
    model: Model
    daily: dict[date, float] = field(default_factory=dict)
    monthly: dict[tuple[int, int], float] = field(default_factory=dict)
    monthly_rank: dict[tuple[int, int], int] = field(default_factory=dict)


def score_f(snapshots) -> dict[str, float]:
    """Frequency score per domain for one day's snapshots."""
    scores: dict[str, float] = {}
    for snap in snapshots:
        for domain, count in snap.domain_counts.items():
            scores[domain] = scores.get(domain, 0.0) + count
    return scores


def score_pr(snapshots, view_field: str = "all") -> dict[str, float]:
    """Views-per-reference weighted score per domain for one day.

    ``view_field`` selects all-agent ("all") or human ("human") views;
    snapshots with zero total references contribute nothing (the weight
    would divide by zero and the reader saw no citations anyway).
    """
    if view_field not in ("all", "human"):
        raise ValueError(f"unknown view field {view_field!r}")
    scores: dict[str, float] = {}
    for snap in snapshots:
        if snap.total_refs <= 0:
            continue
        views = snap.views_all if view_field == "all" else snap.views_human
        weight = views / snap.total_refs
        for domain, count in snap.domain_counts.items():
            scores[domain] = scores.get(domain, 0.0) + weight * count
    return scores


def score_day(snapshots, model: Model) -> dict[str, float]:
    if model == Model.F:
        return score_f(snapshots)
    if model == Model.PR:
        return score_pr(snapshots, "all")
    return score_pr(snapshots, "human")


def aggregate_monthly(daily: dict[date, float]) -> dict[tuple[int, int], float]:
    """Mean of the daily values present in each calendar month.  Uses
    exact summation so means are reproducible across platforms."""
    buckets: dict[tuple[int, int], list[float]] = {}
    for day, value in daily.items():
        buckets.setdefault((day.year, day.month), []).append(value)
    return {month: math.fsum(values) / len(values) for month, values in buckets.items()}


def rank_monthly(monthly_scores: dict[str, float]) -> dict[str, int]:
    """Rank domains for one month: 1 is the highest score, ties break by
    ascending domain name so output is deterministic."""
    if not monthly_scores:
        raise ValueError("no scores to rank")
    ordered = sorted(monthly_scores.items(), key=lambda item: (-item[1], item[0]))
    return {domain: rank for rank, (domain, _) in enumerate(ordered, start=1)}


def build_score_series(snapshots_by_day: dict[date, list],
                       models=tuple(Model)) -> dict[Model, dict[str, ScoreSeries]]:
    """Full per-domain series for each model: daily scores, monthly means,
    monthly ranks.  A domain has a daily entry only on days it is cited
    (defined scores), and a monthly entry only in months with at least
    one defined day."""
    out: dict[Model, dict[str, ScoreSeries]] = {}
    for model in models:
        series: dict[str, ScoreSeries] = {}
        for day in sorted(snapshots_by_day):
            for domain, value in score_day(snapshots_by_day[day], model).items():
                entry = series.setdefault(domain, ScoreSeries(domain, model))
                entry.daily[day] = value
        for entry in series.values():
            entry.monthly = aggregate_monthly(entry.daily)
        months = sorted({m for entry in series.values() for m in entry.monthly})
        for month in months:
            month_scores = {
                domain: entry.monthly[month]
                for domain, entry in series.items()
                if month in entry.monthly
            }
            for domain, rank in rank_monthly(month_scores).items():
                series[domain].monthly_rank[month] = rank
        out[model] = series
    return out
