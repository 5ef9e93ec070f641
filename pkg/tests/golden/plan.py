"""Declarative plan for the end-to-end golden fixture.

Ten articles over a 90-day window.  Every citation is described as data
(url, resolved domain, surface form), so the reference scorer can count
occurrences without ever parsing wikitext.  The fixture generator renders
the same plan into dump/XML/JSON inputs for the pipeline.
"""

import random
from datetime import date, datetime, timezone

LANGUAGE = "en"
WINDOW = (date(2020, 1, 1), date(2020, 3, 30))
TOP_K = 5

ROOT_CATEGORY = "Alpha pandemic articles"
SUB_CATEGORY = "Alpha pandemic by country"
EXCLUDED_CATEGORY = "Alpha pandemic deaths"

# (url pattern, registrable domain under the fixture PSL)
DOMAIN_POOL = [
    ("https://www.who.int/item/{n}", "who.int"),
    ("https://www.cdc.gov/page/{n}", "cdc.gov"),
    ("https://www.bbc.com/news/{n}", "bbc.com"),
    ("https://edition.cnn.com/{n}", "cnn.com"),
    ("https://www.reuters.com/article/{n}", "reuters.com"),
    ("https://stats.gov.pl/covid/{n}", "stats.gov.pl"),
    ("https://www.theguardian.com/world/{n}", "theguardian.com"),
    ("https://www.worldometers.info/{n}", "worldometers.info"),
]

PSL_RULES = ["com", "int", "gov", "info", "pl", "gov.pl", "org"]

FORMS = ["plain", "template", "namedset", "outside", "chart", "transcluded"]

TITLES = [
    "Pandemic in Alphaland", "Pandemic in Betaland", "Pandemic in Gammaland",
    "Pandemic in Deltaland", "Pandemic in Epsilonia", "Pandemic in Zetaland",
    "Pandemic in Etaland", "Pandemic in Thetaland", "Pandemic in Iotaland",
    "Pandemic in Kappaland",
]

# article 3 was renamed mid-window; its early pageviews arrive under the
# old title and must fold onto the canonical one
RENAMED_TITLE = "Early coverage in Gammaland"
RENAMED_CANONICAL = "Pandemic in Gammaland"
RENAME_CUTOVER = date(2020, 2, 1)

# the transcluded citation template changes body mid-window; both bodies
# yield exactly one occurrence of the passed url
TEMPLATE_STORE = {
    "templates": {
        "Cite via": [
            ["2019-12-01T00:00:00+00:00", "<ref>{{{u}}}</ref>"],
            ["2020-02-01T00:00:00+00:00",
             "<ref>{{Cite web|url={{{u}}}|title=Tracker}}</ref>"],
        ],
    },
    "aliases": {},
}

_CREATION = {
    1: "2019-12-10T09:00:00", 2: "2019-12-15T11:30:00",
    3: "2019-12-20T08:45:00", 4: "2019-12-22T16:00:00",
    5: "2019-12-28T10:10:00", 6: "2019-12-30T21:00:00",
    7: "2020-01-08T07:30:00", 8: "2020-01-17T13:00:00",
    9: "2020-02-03T18:20:00", 10: "2020-03-05T09:40:00",
}

_EDITS = {
    1: ["2020-01-15T12:00:00", "2020-02-20T12:00:00"],
    2: ["2020-02-05T12:00:00"],
    3: ["2020-01-25T12:00:00", "2020-03-10T12:00:00"],
    4: [],
    5: ["2020-02-14T12:00:00"],
    6: ["2020-01-06T12:00:00", "2020-03-01T12:00:00"],
    7: ["2020-02-25T12:00:00"],
    8: [],
    9: ["2020-03-15T12:00:00"],
    10: [],
}


def _ts(iso):
    return datetime.fromisoformat(iso).replace(tzinfo=timezone.utc)


def _build_articles():
    rng = random.Random(20200301)
    counter = [0]

    def make_cite(form=None):
        counter[0] += 1
        pattern, domain = rng.choice(DOMAIN_POOL)
        cite = {
            "url": pattern.format(n=counter[0]),
            "domain": domain,
            "form": form or rng.choice(FORMS),
        }
        if cite["form"] == "namedset":
            cite["reuses"] = rng.randint(1, 3)
        return cite

    articles = []
    for aid in range(1, 11):
        revisions = []
        times = [_CREATION[aid]] + _EDITS[aid]
        for idx, when in enumerate(times):
            if aid == 2 and idx == 0:
                cites = []  # zero-reference revision: C(i)=0 with views
            else:
                cites = [make_cite() for _ in range(rng.randint(2, 7))]
            if aid == 5 and idx == 1:
                # counts toward the reference total, resolves to nothing
                cites.append({"url": "https://invalid/x", "domain": None,
                              "form": "plain"})
            revisions.append({"ts": when, "cites": cites})
        articles.append({
            "id": aid,
            "title": TITLES[aid - 1],
            "revisions": revisions,
        })
    return articles


ARTICLES = _build_articles()


def cite_weight(cite):
    """How many reference occurrences one cite contributes."""
    return 1 + cite.get("reuses", 0) if cite["form"] == "namedset" else 1


def views_for(aid, day):
    """Deterministic daily (all, human) views for one article."""
    o = day.toordinal()
    all_v = ((aid * 37 + o * 13) % 400) * (1 + aid % 3)
    if (aid + o) % 13 == 0:
        all_v = 0
    return all_v, (all_v * 4) // 5


def revision_for_day(article, day):
    """Plan-level revision visible on *day*, or None before creation."""
    cutoff = _ts(day.isoformat() + "T23:59:59")
    chosen = None
    for rev in article["revisions"]:
        if _ts(rev["ts"]) <= cutoff:
            chosen = rev
        else:
            break
    return chosen
