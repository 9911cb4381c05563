"""Dated paper records, property-keyword matching, and prediction-year partitions.

Corpus files are JSON Lines, one record per line:

    {"id": "...", "year": 2001, "authors": ["..."], "entities": ["..."],
     "tokens": ["..."]}

with ``tokens`` optional.  Entities arrive pre-extracted; no NER happens here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Iterable, Iterator

from .errors import FormatError, ValidationError


@dataclass(frozen=True)
class PaperRecord:
    """One dated publication: its authors and the entities it mentions."""

    id: str
    year: int
    authors: tuple[str, ...]
    entities: tuple[str, ...]
    tokens: tuple[str, ...] = ()


@dataclass(frozen=True)
class Corpus:
    """Immutable record collection plus the property keyword family."""

    records: tuple[PaperRecord, ...]
    property_keywords: frozenset[str]

    def __post_init__(self):
        if not self.property_keywords:
            raise ValidationError("property_keywords must be nonempty")

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[PaperRecord]:
        return iter(self.records)

    def sorted_by_year(self) -> list[PaperRecord]:
        return sorted(self.records, key=lambda r: (r.year, r.id))

    def year_range(self) -> tuple[int, int]:
        if not self.records:
            raise ValidationError("empty corpus has no year range")
        years = [r.year for r in self.records]
        return min(years), max(years)


def normalize_keywords(keywords: Iterable[str]) -> frozenset[str]:
    """Lowercase and trim the keyword family; keyword matching is caseless."""
    out = frozenset(k.strip().lower() for k in keywords if k.strip())
    if not out:
        raise ValidationError("keyword set is empty after normalization")
    return out


def _dedup(seq: Iterable[str]) -> tuple[str, ...]:
    seen: set[str] = set()
    out = []
    for item in seq:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return tuple(out)


def _parse_record(obj: dict, line_no: int) -> PaperRecord:
    for name in ("id", "year", "authors", "entities"):
        if name not in obj:
            raise FormatError(f"line {line_no}: missing field {name!r}")
    if not isinstance(obj["id"], str) or not obj["id"]:
        raise FormatError(f"line {line_no}: id must be a nonempty string")
    year = obj["year"]
    if not isinstance(year, int) or isinstance(year, bool) or year <= 0:
        raise FormatError(f"line {line_no}: year must be a positive integer")
    for name in ("authors", "entities"):
        val = obj[name]
        if not isinstance(val, list) or not all(isinstance(x, str) for x in val):
            raise FormatError(f"line {line_no}: {name} must be a list of strings")
    tokens = obj.get("tokens", [])
    if tokens is None:
        tokens = []
    if not isinstance(tokens, list) or not all(isinstance(x, str) for x in tokens):
        raise FormatError(f"line {line_no}: tokens must be a list of strings")
    # In-record duplicates are normalized away so degree counts stay honest.
    return PaperRecord(
        id=obj["id"],
        year=year,
        authors=_dedup(obj["authors"]),
        entities=_dedup(obj["entities"]),
        tokens=tuple(tokens),
    )


def parse_corpus(stream: Iterable[str] | IO[str], keywords: Iterable[str]) -> Corpus:
    """Parse line-delimited JSON records into a Corpus.

    Preserves input order.  Raises FormatError naming the line for malformed
    input, ValidationError for duplicate record ids.
    """
    kw = normalize_keywords(keywords)
    records: list[PaperRecord] = []
    seen_ids: set[str] = set()
    for line_no, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"line {line_no}: invalid JSON ({exc.msg})") from exc
        if not isinstance(obj, dict):
            raise FormatError(f"line {line_no}: record must be a JSON object")
        rec = _parse_record(obj, line_no)
        if rec.id in seen_ids:
            raise ValidationError(f"duplicate record id {rec.id!r} (line {line_no})")
        seen_ids.add(rec.id)
        records.append(rec)
    return Corpus(records=tuple(records), property_keywords=kw)


def read_corpus(path, keywords: Iterable[str]) -> Corpus:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_corpus(fh, keywords)


def read_keywords(path) -> frozenset[str]:
    """Keyword file: one keyword per line, UTF-8, blank lines ignored."""
    with open(path, "r", encoding="utf-8") as fh:
        return normalize_keywords(fh.readlines())


def record_mentions_any(rec: PaperRecord, keywords: frozenset[str]) -> bool:
    """True iff any keyword appears among rec.entities or rec.tokens.

    Matching is exact whole-token and case-insensitive; no stemming.
    """
    for ent in rec.entities:
        if ent.lower() in keywords:
            return True
    for tok in rec.tokens:
        if tok.lower() in keywords:
            return True
    return False


def record_mentions_property(rec: PaperRecord, keywords: Iterable[str]) -> bool:
    """True iff the record mentions the property keyword family."""
    kw = keywords if isinstance(keywords, frozenset) else normalize_keywords(keywords)
    return record_mentions_any(rec, kw)


def partition_by_year(c: Corpus, t: int) -> tuple[Corpus, Corpus]:
    """Split into (records with year < t, records with year >= t)."""
    before = tuple(r for r in c.records if r.year < t)
    after = tuple(r for r in c.records if r.year >= t)
    return (
        Corpus(records=before, property_keywords=c.property_keywords),
        Corpus(records=after, property_keywords=c.property_keywords),
    )
