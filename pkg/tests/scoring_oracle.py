"""Independent brute-force scoring oracle used by unit and acceptance tests.

Evaluates the two score definitions directly with exact rational
arithmetic, sharing no code with the implementation under test.
"""

import random
from fractions import Fraction

from refrank.ingest import ArticleDaySnapshot

DOMAIN_POOL = [f"d{i}.org" for i in range(10)]


def random_instance(rng: random.Random, max_articles=20, max_domains=10,
                    equal_views=False):
    """One day's worth of snapshots for n <= max_articles articles citing
    up to max_domains domains."""
    n = rng.randint(1, max_articles)
    domains = rng.sample(DOMAIN_POOL, rng.randint(1, max_domains))
    snapshots = []
    for i in range(n):
        counts = {}
        for domain in domains:
            if rng.random() < 0.6:
                c = rng.randint(0, 50)
                if c:
                    counts[domain] = c
        cited = sum(counts.values())
        # total refs can exceed the resolved-domain total (unresolvable
        # urls still count toward C) and can be zero
        total = cited + rng.randint(0, 5) if cited else rng.choice([0, rng.randint(0, 3)])
        views_all = rng.randint(0, 10**6)
        views_human = views_all if equal_views else rng.randint(0, views_all)
        snapshots.append(
            ArticleDaySnapshot(f"a{i}", None, total, counts, views_all, views_human)
        )
    return snapshots


def oracle_f(snapshots):
    out = {}
    for snap in snapshots:
        for domain, c_s in snap.domain_counts.items():
            out[domain] = out.get(domain, 0) + c_s
    return out


def oracle_pr(snapshots, human=False):
    out = {}
    for snap in snapshots:
        c_i = snap.total_refs
        if c_i == 0:
            continue
        v_i = snap.views_human if human else snap.views_all
        for domain, c_s in snap.domain_counts.items():
            out[domain] = out.get(domain, Fraction(0)) + Fraction(v_i, c_i) * c_s
    return {domain: float(value) for domain, value in out.items()}


def close_maps(got, expected, rel=1e-9):
    if set(got) != set(expected):
        return False
    for domain, value in expected.items():
        other = got[domain]
        if value == other:
            continue
        denom = max(abs(value), abs(other))
        if abs(value - other) > rel * denom:
            return False
    return True
