"""Registrable-domain resolution against the Public Suffix List.

A cited URL is credited to its registrable domain (matched public suffix
plus one label), which identifies the organizational website behind
arbitrary subdomain layouts.
"""

from __future__ import annotations

import ipaddress
from dataclasses import dataclass
from urllib.parse import urlsplit

import idna

SourceDomain = str


class DomainResolutionError(ValueError):
    pass


class InvalidUrl(DomainResolutionError):
    """URL fails syntactic validation; still counts as a visible reference
    downstream, just not toward any domain."""


class UnresolvableHost(DomainResolutionError):
    """Host equals a public suffix exactly; excluded downstream."""


class PslError(ValueError):
    pass


@dataclass(frozen=True)
class PslRuleSet:
    """Parsed PSL rules. Labels are lowercase and punycode-encoded;
    wildcard rules keep their leading ``*`` label, exception rules are
    stored without the ``!`` marker."""

    normal: frozenset[tuple[str, ...]]
    wildcard: frozenset[tuple[str, ...]]
    exception: frozenset[tuple[str, ...]]


def _encode_label(label: str) -> str:
    label = label.lower()
    if label.isascii():
        return label
    try:
        return idna.encode(label, uts46=True).decode("ascii")
    except idna.IDNAError:
        return "xn--" + label.encode("punycode").decode("ascii")


def parse_psl(text: str, section: str = "all") -> PslRuleSet:
    """Parse PSL plain-text contents.

    ``section`` selects ``all`` (default), ``icann`` or ``private`` rules;
    the list's BEGIN/END markers delimit the sections.
    """
    if section not in ("all", "icann", "private"):
        raise ValueError(f"unknown PSL section {section!r}")
    normal, wildcard, exception = set(), set(), set()
    current = "icann"
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("//"):
            if "BEGIN PRIVATE DOMAINS" in line:
                current = "private"
            elif "BEGIN ICANN DOMAINS" in line:
                current = "icann"
            continue
        if section != "all" and current != section:
            continue
        # rules end at the first whitespace per the PSL format
        rule = line.split()[0]
        is_exception = rule.startswith("!")
        if is_exception:
            rule = rule[1:]
        labels = tuple(_encode_label(lab) for lab in rule.strip(".").split("."))
        if not all(labels):
            continue
        if is_exception:
            exception.add(labels)
        elif "*" in labels:
            wildcard.add(labels)
        else:
            normal.add(labels)
    if not (normal or wildcard or exception):
        raise PslError("PSL parse produced no rules; configuration is unusable")
    return PslRuleSet(frozenset(normal), frozenset(wildcard), frozenset(exception))


def load_psl(path, section: str = "all") -> PslRuleSet:
    with open(path, encoding="utf-8") as fh:
        return parse_psl(fh.read(), section)


def _normalize_host(host: str) -> list[str] | None:
    host = host.lower().rstrip(".")
    if not host:
        return None
    labels = host.split(".")
    if any(not lab for lab in labels):
        return None
    return [_encode_label(lab) for lab in labels]


def registrable_domain(host: str, rules: PslRuleSet) -> str | None:
    """Registrable domain of *host* per the PSL algorithm, or None when
    the host is itself a public suffix (or malformed).

    Exception rules beat wildcards beat normal rules; an unlisted TLD
    matches the implicit ``*`` rule.
    """
    labels = _normalize_host(host)
    if labels is None:
        return None
    m = len(labels)
    suffix_len = 0
    for k in range(1, m + 1):
        suffix = tuple(labels[m - k :])
        if suffix in rules.exception:
            suffix_len = k - 1
            break
        if suffix in rules.normal:
            suffix_len = max(suffix_len, k)
        if k >= 1 and ("*",) + suffix[1:] in rules.wildcard:
            suffix_len = max(suffix_len, k)
    else:
        if suffix_len == 0:
            suffix_len = 1  # implicit * rule for unlisted TLDs
    if suffix_len == 0:
        suffix_len = 1
    if m <= suffix_len:
        return None
    return ".".join(labels[m - suffix_len - 1 :])


def resolve_source(url: str, rules: PslRuleSet) -> SourceDomain:
    """Map one absolute http(s) URL to its source domain.

    Raises :class:`InvalidUrl` for non-http(s) or syntactically broken
    URLs and :class:`UnresolvableHost` when the host is exactly a public
    suffix.  An IP-literal host is returned as-is.
    """
    try:
        parts = urlsplit(url)
        host = parts.hostname
    except ValueError as exc:
        raise InvalidUrl(f"unparseable URL {url!r}") from exc
    if parts.scheme not in ("http", "https"):
        raise InvalidUrl(f"unsupported scheme in {url!r}")
    if not host:
        raise InvalidUrl(f"URL has no host: {url!r}")
    host = host.rstrip(".")
    try:
        ipaddress.ip_address(host)
    except ValueError:
        pass
    else:
        return host
    domain = registrable_domain(host, rules)
    if domain is None:
        raise UnresolvableHost(f"host {host!r} is a public suffix")
    return domain


def try_resolve(url: str, rules: PslRuleSet) -> SourceDomain | None:
    """resolve_source that reports failure as None instead of raising."""
    try:
        return resolve_source(url, rules)
    except DomainResolutionError:
        return None
