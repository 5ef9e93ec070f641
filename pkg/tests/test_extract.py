"""Reference extraction against handcrafted fixtures plus invariants."""

from datetime import datetime, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extraction_cases import (
    EXTRACTION_CASES,
    TRANSCLUSION_CASES,
    TRANSCLUSION_STORE,
    simplify,
)
from refrank.extract import (
    ReferenceOccurrence,
    RevisionText,
    TemplateStore,
    expand_transclusions,
    extract_nonref_sources,
    extract_references,
)


@pytest.mark.parametrize(
    "wikitext,expected",
    [(text, expected) for _, text, expected in EXTRACTION_CASES],
    ids=[case_id for case_id, *_ in EXTRACTION_CASES],
)
def test_extraction_cases(wikitext, expected):
    assert simplify(extract_references(wikitext)) == expected


@pytest.mark.parametrize(
    "wikitext,as_of,expected",
    [(text, ts, expected) for _, text, ts, expected in TRANSCLUSION_CASES],
    ids=[case_id for case_id, *_ in TRANSCLUSION_CASES],
)
def test_transclusion_cases(wikitext, as_of, expected):
    store = TemplateStore.from_json(TRANSCLUSION_STORE)
    rev = RevisionText("a1", "en", datetime.fromisoformat(as_of), wikitext)
    expanded = expand_transclusions(rev, store)
    assert simplify(extract_references(expanded)) == expected


def test_offsets_ascending_and_byte_based():
    text = 'héllo <ref>https://uni.com/1</ref> x <ref name="n">https://uni.com/2</ref>'
    occs = extract_references(text)
    offsets = [occ.byte_offset for occ in occs]
    assert offsets == sorted(offsets)
    assert occs[0].byte_offset == len("héllo ".encode("utf-8"))


def test_group_refs_can_be_excluded():
    text = '<ref group="note">https://note.com/1</ref><ref>https://main.com/1</ref>'
    occs = extract_references(text, include_groups=False)
    assert simplify(occs) == [(("https://main.com/1",), None, None, True)]


def test_flags_and_diagnostics():
    diags = []
    occs = extract_references(
        '<ref name="ghost"/> <ref>https://cut.com/1', diagnostics=diags
    )
    assert occs[0].flags == ("undefined-ref-name",)
    assert "unterminated-ref" in occs[1].flags
    assert len(diags) == 2


def test_first_definition_wins_for_duplicate_names():
    text = (
        '<ref name="d">https://first.org/1</ref>'
        '<ref name="d">https://second.org/2</ref>'
        '<ref name="d"/>'
    )
    occs = extract_references(text)
    # the reuse carries the first definition; the second body keeps its own urls
    assert occs[2].urls == ("https://first.org/1",)
    assert occs[1].urls == ("https://second.org/2",)


def test_nonref_allowlist():
    text = (
        "{{Medical cases chart|data source=https://covid.gov/data and "
        "https://who.int/feed|other=https://skip.org}}"
        " {{Plain|data source=https://not-listed.org}}"
    )
    occs = extract_nonref_sources(text, {("Medical cases chart", "data source")})
    assert simplify(occs) == [
        (("https://covid.gov/data", "https://who.int/feed"), None,
         "Medical cases chart", False)
    ]
    assert extract_nonref_sources(text, set()) == []
    assert extract_nonref_sources(
        text, {("Medical cases chart", "missing param")}) == []


def test_nonref_allowlist_inside_ref_not_double_counted():
    # allowlisted template inside a ref: ref extraction sees its bare urls,
    # nonref extraction also reports it; callers pick one view per template
    text = "{{Chart|src=https://a.org/1}}"
    occs = extract_nonref_sources(text, {("Chart", "src")})
    assert len(occs) == 1 and occs[0].in_ref_tag is False


URL_POOL = [
    "https://a.org/1", "https://b.net/2", "http://c.com/3", "https://d.io/4",
]


@st.composite
def ref_texts(draw):
    """Random but well-formed sequences of ref constructs with a known
    expected occurrence count."""
    parts = []
    expected = 0
    defined = draw(st.booleans())
    reuses = draw(st.integers(min_value=0, max_value=5))
    urls = draw(st.lists(st.sampled_from(URL_POOL), min_size=1, max_size=3,
                         unique=True))
    filler = st.sampled_from(["text ", "\n", "== H ==", "[[Link]]", "'''b'''"])
    if defined:
        body = " ".join(urls)
        parts.append(f'<ref name="k">{body}</ref>')
        expected += 1
    for _ in range(reuses):
        parts.append(draw(filler))
        parts.append('<ref name="k"/>')
        expected += 1
    extra = draw(st.integers(min_value=0, max_value=4))
    for i in range(extra):
        parts.append(draw(filler))
        parts.append(f"<ref>{draw(st.sampled_from(URL_POOL))}</ref>")
        expected += 1
    return "".join(parts), expected, defined, reuses, tuple(urls)


@given(ref_texts())
@settings(max_examples=200, deadline=None)
def test_reuse_count_property(case):
    text, expected, defined, reuses, urls = case
    occs = extract_references(text)
    assert len(occs) == expected
    named = [occ for occ in occs if occ.ref_name == "k"]
    if defined:
        # one definition plus k reuses, all carrying the same url set
        assert len(named) == reuses + 1
        assert all(occ.urls == urls for occ in named)


@given(st.text(max_size=400))
@settings(max_examples=300, deadline=None)
def test_extract_never_raises_and_is_deterministic(text):
    first = extract_references(text)
    assert extract_references(text) == first
    offsets = [occ.byte_offset for occ in first]
    assert offsets == sorted(offsets)
    for occ in first:
        assert isinstance(occ, ReferenceOccurrence)
        if not occ.urls and occ.via_template is None:
            assert occ.flags


@given(st.text(alphabet="<ref>/{}|=nameab \"x", max_size=300))
@settings(max_examples=300, deadline=None)
def test_extract_markup_soup_never_raises(text):
    occs = extract_references(text)
    assert all(occ.byte_offset >= 0 for occ in occs)


def _mono_store():
    store = TemplateStore()
    store.add_revision("T", datetime(2020, 1, 1, tzinfo=timezone.utc), "OLD")
    store.add_revision("T", datetime(2020, 6, 1, tzinfo=timezone.utc), "NEW")
    return store


@given(st.integers(min_value=0, max_value=400))
@settings(max_examples=100, deadline=None)
def test_expansion_never_uses_newer_template_revision(day_offset):
    from datetime import timedelta

    store = _mono_store()
    ts = datetime(2020, 1, 1, tzinfo=timezone.utc) + timedelta(days=day_offset)
    rev = RevisionText("a", "en", ts, "x{{T}}y")
    expanded = expand_transclusions(rev, store)
    if ts < datetime(2020, 6, 1, tzinfo=timezone.utc):
        assert expanded == "xOLDy"
    else:
        assert expanded == "xNEWy"
