"""Lexicon construction and document scoring.

Documents are segmented by greedy longest-match against the union of the
sentiment and stop-word lexicons, so no external tokenizer is needed and
space-free scripts work unchanged. A document scores as the mean of its
matched sentiment terms; a source's daily node value is the mean over
that source's documents for the day.

The lexicon build loop is file-driven: each round emits the most frequent
unknown terms as candidates, an external scoring step fills in scores
(0 routes a term to the stop-word lexicon), and the round's coverage
fraction tells the caller when to stop (conventionally at 0.9).
"""
from __future__ import annotations

import datetime as dt
import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ParseError, ValidationError

SCORE_MIN = -5.0
SCORE_MAX = 5.0
DEFAULT_CANDIDATE_COUNT = 500


@dataclass(frozen=True)
class SentimentLexicon:
    entries: Mapping[str, float]

    def __post_init__(self):
        for term, score in self.entries.items():
            if not term:
                raise ValidationError("sentiment lexicon contains an empty term")
            if not SCORE_MIN <= score <= SCORE_MAX or score == 0:
                raise ValidationError(f"sentiment score for {term!r} must be in [-5, +5] and nonzero, got {score}")

    def __contains__(self, term: str) -> bool:
        return term in self.entries

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class StopwordLexicon:
    terms: frozenset[str]

    def __post_init__(self):
        if any(not t for t in self.terms):
            raise ValidationError("stop-word lexicon contains an empty term")

    def __contains__(self, term: str) -> bool:
        return term in self.terms

    def __len__(self) -> int:
        return len(self.terms)


def check_disjoint(sent: SentimentLexicon, stop: StopwordLexicon) -> None:
    overlap = set(sent.entries) & set(stop.terms)
    if overlap:
        raise ValidationError(f"lexicons overlap on {sorted(overlap)[:5]}")


@dataclass(frozen=True)
class NewsDocument:
    date: dt.date
    source_id: str
    text: str


@dataclass(frozen=True)
class DailySourceSignal:
    date: dt.date
    values: tuple[float, ...]
    coverage: tuple[int, ...]

    def __post_init__(self):
        if len(self.values) != len(self.coverage):
            raise ValidationError("signal values and coverage lengths differ")
        for v, c in zip(self.values, self.coverage):
            if not math.isfinite(v):
                raise ValidationError("signal value not finite")
            if c == 0 and v != 0.0:
                raise ValidationError("source with zero coverage must have value 0")


def _scan(text: str, sent: SentimentLexicon, stop: StopwordLexicon):
    """Yield (kind, token) pieces: 'sent'/'stop' for lexicon matches, 'raw' per skipped char."""
    max_len = max(
        max((len(t) for t in sent.entries), default=0),
        max((len(t) for t in stop.terms), default=0),
    )
    i, n = 0, len(text)
    while i < n:
        matched = False
        for length in range(min(max_len, n - i), 0, -1):
            piece = text[i:i + length]
            if piece in sent.entries:
                yield "sent", piece
                i += length
                matched = True
                break
            if piece in stop.terms:
                yield "stop", piece
                i += length
                matched = True
                break
        if not matched:
            yield "raw", text[i]
            i += 1


def segment(text: str, sent: SentimentLexicon, stop: StopwordLexicon) -> list[str]:
    """Greedy longest-match segmentation; stop words are consumed but not emitted."""
    return [tok for kind, tok in _scan(text, sent, stop) if kind == "sent"]


def score_document(doc: NewsDocument, sent: SentimentLexicon, stop: StopwordLexicon) -> float:
    """Mean sentiment score of matched terms (with multiplicity); 0.0 if none match."""
    scores = [sent.entries[t] for t in segment(doc.text, sent, stop)]
    if not scores:
        return 0.0
    return sum(scores) / len(scores)


def aggregate_daily(
    docs: Iterable[NewsDocument],
    date: dt.date,
    sources: Sequence[str],
    sent: SentimentLexicon,
    stop: StopwordLexicon,
) -> DailySourceSignal:
    """One node value per source: mean document score for the day, 0 when silent."""
    index = {s: k for k, s in enumerate(sources)}
    sums = [0.0] * len(sources)
    counts = [0] * len(sources)
    for doc in docs:
        if doc.date != date:
            raise ValidationError(f"document dated {doc.date} passed to aggregate for {date}")
        if doc.source_id not in index:
            raise ValidationError(f"unknown source_id {doc.source_id!r}")
        k = index[doc.source_id]
        sums[k] += score_document(doc, sent, stop)
        counts[k] += 1
    values = tuple(sums[k] / counts[k] if counts[k] else 0.0 for k in range(len(sources)))
    return DailySourceSignal(date=date, values=values, coverage=tuple(counts))


def build_daily_signals(
    docs: Iterable[NewsDocument],
    sources: Sequence[str],
    sent: SentimentLexicon,
    stop: StopwordLexicon,
) -> dict[dt.date, DailySourceSignal]:
    """Group a corpus by date and aggregate each day; days without documents are absent."""
    by_date: dict[dt.date, list[NewsDocument]] = defaultdict(list)
    for doc in docs:
        by_date[doc.date].append(doc)
    return {d: aggregate_daily(day_docs, d, sources, sent, stop) for d, day_docs in sorted(by_date.items())}


@dataclass(frozen=True)
class LexiconIterationResult:
    sentiment: SentimentLexicon
    stopwords: StopwordLexicon
    candidates: tuple[str, ...]
    coverage_fraction: float


def _candidate_tokens(text: str, sent: SentimentLexicon, stop: StopwordLexicon) -> Iterable[str]:
    """All word tokens of a text: lexicon matches plus alphanumeric runs of unmatched spans."""
    run: list[str] = []
    for kind, tok in _scan(text, sent, stop):
        if kind == "raw" and tok.isalnum():
            run.append(tok)
            continue
        if run:  # any boundary (lexicon match or punctuation) ends the run
            yield "".join(run)
            run = []
        if kind != "raw":
            yield tok
    if run:
        yield "".join(run)


def lexicon_iteration(
    texts: Iterable[str],
    sent: SentimentLexicon,
    stop: StopwordLexicon,
    scores: Mapping[str, float],
    candidate_count: int = DEFAULT_CANDIDATE_COUNT,
) -> LexiconIterationResult:
    """One round of the lexicon build loop.

    Applies externally supplied scores (0 -> stop word, otherwise sentiment),
    re-tokenizes the sample, and ranks tokens by frequency (ties broken
    lexicographically). Candidates are the highest-ranked unscored tokens;
    coverage_fraction is the scored share of the top ``candidate_count``
    tokens, the loop's convergence measure (1.0 for an empty sample).
    """
    entries = dict(sent.entries)
    stop_terms = set(stop.terms)
    for term, score in scores.items():
        if not term:
            raise ValidationError("cannot score an empty term")
        if not SCORE_MIN <= score <= SCORE_MAX:
            raise ValidationError(f"score for {term!r} outside [-5, +5]: {score}")
        entries.pop(term, None)
        stop_terms.discard(term)
        if score == 0:
            stop_terms.add(term)
        else:
            entries[term] = score
    new_sent = SentimentLexicon(entries=entries)
    new_stop = StopwordLexicon(terms=frozenset(stop_terms))
    check_disjoint(new_sent, new_stop)

    freq: Counter[str] = Counter()
    for text in texts:
        freq.update(_candidate_tokens(text, new_sent, new_stop))
    ranked = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))
    top = [term for term, _ in ranked[:candidate_count]]
    if top:
        scored = sum(1 for term in top if term in entries or term in stop_terms)
        coverage = scored / len(top)
    else:
        coverage = 1.0
    candidates = tuple(
        term for term, _ in ranked if term not in entries and term not in stop_terms
    )[:candidate_count]
    return LexiconIterationResult(new_sent, new_stop, candidates, coverage)


# --- file formats -----------------------------------------------------------

def load_sentiment_lexicon(path: str | Path) -> SentimentLexicon:
    """TSV term<TAB>score; scores must be nonzero and within [-5, +5]."""
    entries = _read_tsv_scores(Path(path))
    return SentimentLexicon(entries=entries)


def save_sentiment_lexicon(sent: SentimentLexicon, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for term in sorted(sent.entries):
            fh.write(f"{term}\t{sent.entries[term]!r}\n")


def load_stopwords(path: str | Path) -> StopwordLexicon:
    """One term per line."""
    terms = set()
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            term = line.strip()
            if term:
                terms.add(term)
    return StopwordLexicon(terms=frozenset(terms))


def save_stopwords(stop: StopwordLexicon, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for term in sorted(stop.terms):
            fh.write(term + "\n")


def load_scores(path: str | Path) -> dict[str, float]:
    """Score file returned by the external scoring step; 0 marks a stop word."""
    return _read_tsv_scores(Path(path), allow_zero=True)


def save_candidates(candidates: Sequence[str], path: str | Path) -> None:
    """Candidate terms awaiting scores, written term<TAB> with the score cell empty."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for term in candidates:
            fh.write(f"{term}\t\n")


def _read_tsv_scores(path: Path, allow_zero: bool = False) -> dict[str, float]:
    out: dict[str, float] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1].strip():
                raise ParseError(f"{path}:{lineno}: expected term<TAB>score")
            term = parts[0]
            try:
                score = float(parts[1])
            except ValueError:
                raise ParseError(f"{path}:{lineno}: bad score {parts[1]!r}") from None
            if term in out:
                raise ParseError(f"{path}:{lineno}: duplicate term {term!r}")
            if not SCORE_MIN <= score <= SCORE_MAX or (score == 0 and not allow_zero):
                raise ValidationError(f"{path}:{lineno}: score {score} out of range for {term!r}")
            out[term] = score
    return out


def load_news_jsonl(path: str | Path) -> list[NewsDocument]:
    """JSON Lines corpus: one object per document with date, source_id, text."""
    path = Path(path)
    docs = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                doc = NewsDocument(
                    date=dt.date.fromisoformat(obj["date"]),
                    source_id=str(obj["source_id"]),
                    text=str(obj["text"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
            docs.append(doc)
    return docs


def save_news_jsonl(docs: Iterable[NewsDocument], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(
                {"date": doc.date.isoformat(), "source_id": doc.source_id, "text": doc.text},
                ensure_ascii=False, sort_keys=True,
            ) + "\n")
