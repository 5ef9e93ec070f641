"""Independent reference scorer for the golden fixture.

Computes the expected monthly rank-timeline CSVs straight from the plan
(citation counts are read off the declarative cite lists, never parsed
from wikitext) and writes them to tests/data/golden/expected/.  Shares no
code with the pipeline beyond plan.py.
"""

import csv
import math
import sys
from datetime import timedelta
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))
import plan  # noqa: E402

EXPECTED = Path(__file__).resolve().parents[1] / "data" / "golden" / "expected"


def day_scores(day):
    """Per-domain F/PR/PR2 maps for one day, exact arithmetic."""
    f_scores, pr, pr2 = {}, {}, {}
    for article in plan.ARTICLES:
        rev = plan.revision_for_day(article, day)
        if rev is None:
            continue
        total = sum(plan.cite_weight(c) for c in rev["cites"])
        counts = {}
        for cite in rev["cites"]:
            if cite["domain"] is not None:
                counts[cite["domain"]] = (
                    counts.get(cite["domain"], 0) + plan.cite_weight(cite))
        all_v, human_v = plan.views_for(article["id"], day)
        for domain, c_s in counts.items():
            f_scores[domain] = f_scores.get(domain, 0) + c_s
            if total > 0:
                pr[domain] = pr.get(domain, Fraction(0)) + Fraction(all_v, total) * c_s
                pr2[domain] = pr2.get(domain, Fraction(0)) + Fraction(human_v, total) * c_s
    return {"F": f_scores, "PR": pr, "PR2": pr2}


def build_series():
    """domain -> {month: mean} and domain -> {month: rank}, per model."""
    daily = {"F": {}, "PR": {}, "PR2": {}}
    start, end = plan.WINDOW
    day = start
    while day <= end:
        for model, scores in day_scores(day).items():
            for domain, value in scores.items():
                daily[model].setdefault(domain, {})[day] = float(value)
        day += timedelta(days=1)

    out = {}
    for model, per_domain in daily.items():
        monthly = {}
        for domain, values in per_domain.items():
            buckets = {}
            for d, v in values.items():
                buckets.setdefault((d.year, d.month), []).append(v)
            monthly[domain] = {
                month: math.fsum(vals) / len(vals)
                for month, vals in buckets.items()
            }
        months = sorted({m for entry in monthly.values() for m in entry})
        ranks = {domain: {} for domain in monthly}
        for month in months:
            present = sorted(
                ((domain, entry[month]) for domain, entry in monthly.items()
                 if month in entry),
                key=lambda item: (-item[1], item[0]),
            )
            for pos, (domain, _) in enumerate(present, start=1):
                ranks[domain][month] = pos
        out[model] = (monthly, ranks, months)
    return out


def write_csvs():
    series = build_series()
    for model, (monthly, ranks, months) in series.items():
        kept = {
            domain for domain, rs in ranks.items()
            if any(r <= plan.TOP_K for r in rs.values())
        }
        out_dir = EXPECTED / "en" / model
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "rank_timeline.csv", "w", encoding="utf-8",
                  newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["language", "month", "model", "domain", "score",
                             "rank"])
            for month in months:
                rows = sorted(
                    (ranks[domain][month], domain)
                    for domain in kept if month in monthly[domain]
                )
                for rank, domain in rows:
                    writer.writerow([
                        "en", f"{month[0]:04d}-{month[1]:02d}", model, domain,
                        f"{monthly[domain][month]:.6f}", rank,
                    ])
    print(f"expected reports written to {EXPECTED}")


if __name__ == "__main__":
    write_csvs()
