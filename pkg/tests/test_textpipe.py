import datetime as dt

import pytest
from hypothesis import given, strategies as st

from newsvm.errors import ParseError, ValidationError
from newsvm.textpipe import (
    NewsDocument,
    SentimentLexicon,
    StopwordLexicon,
    aggregate_daily,
    build_daily_signals,
    check_disjoint,
    lexicon_iteration,
    load_news_jsonl,
    load_scores,
    load_sentiment_lexicon,
    load_stopwords,
    save_candidates,
    save_news_jsonl,
    save_sentiment_lexicon,
    save_stopwords,
    score_document,
    segment,
)

from conftest import make_doc


def ref_segment(text, sent_terms, stop_terms):
    """Independent greedy longest-match: startswith scan over length-sorted vocabulary."""
    vocab = sorted(set(sent_terms) | set(stop_terms), key=len, reverse=True)
    out, i = [], 0
    while i < len(text):
        for term in vocab:
            if text.startswith(term, i):
                if term in sent_terms:
                    out.append(term)
                i += len(term)
                break
        else:
            i += 1
    return out


def test_lexicon_validation():
    with pytest.raises(ValidationError):
        SentimentLexicon(entries={"x": 0.0})
    with pytest.raises(ValidationError):
        SentimentLexicon(entries={"x": 5.5})
    with pytest.raises(ValidationError):
        SentimentLexicon(entries={"": 1.0})
    with pytest.raises(ValidationError):
        StopwordLexicon(terms=frozenset({""}))
    check_disjoint(SentimentLexicon(entries={"a": 1.0}), StopwordLexicon(terms=frozenset({"b"})))
    with pytest.raises(ValidationError):
        check_disjoint(SentimentLexicon(entries={"a": 1.0}), StopwordLexicon(terms=frozenset({"a"})))


def test_segment_empty(tiny_lexicons):
    sent, stop = tiny_lexicons
    assert segment("", sent, stop) == []


def test_segment_stopword_consumed(tiny_lexicons):
    sent, stop = tiny_lexicons
    assert segment("今日涨停", sent, stop) == ["涨停"]


def test_segment_longest_match(tiny_lexicons):
    sent, stop = tiny_lexicons
    assert segment("abc", sent, stop) == ["abc"]


def test_segment_skips_unknown(tiny_lexicons):
    sent, stop = tiny_lexicons
    assert segment("xx涨停yy下跌", sent, stop) == ["涨停", "下跌"]


@given(st.text(alphabet="abcde今日涨停的下跌利好", max_size=60))
def test_segment_matches_reference(text, ):
    sent = SentimentLexicon(entries={"涨停": 4.0, "下跌": -2.0, "ab": 1.0, "abc": 2.0, "cde": 1.5, "e": -1.0})
    stop = StopwordLexicon(terms=frozenset({"今日", "的", "abcd"}))
    got = segment(text, sent, stop)
    assert got == ref_segment(text, set(sent.entries), set(stop.terms))
    assert all(tok in sent.entries for tok in got)  # stop words never leak


def test_score_document_examples(tiny_lexicons):
    sent, stop = tiny_lexicons
    assert score_document(make_doc("涨停下跌"), sent, stop) == pytest.approx(1.0)  # (+4 - 2) / 2
    assert score_document(make_doc("今日的"), sent, stop) == 0.0
    doc = make_doc("xx下跌")
    single = SentimentLexicon(entries={"下跌": -5.0})
    assert score_document(doc, single, stop) == -5.0


def test_score_block_permutation(tiny_lexicons):
    sent, stop = tiny_lexicons
    assert score_document(make_doc("涨停，利好"), sent, stop) == \
        score_document(make_doc("利好，涨停"), sent, stop)


def test_aggregate_daily(tiny_lexicons):
    sent, stop = tiny_lexicons
    date = dt.date(2020, 1, 6)
    sources = ("src01", "src02")
    empty = aggregate_daily([], date, sources, sent, stop)
    assert empty.values == (0.0, 0.0)
    assert empty.coverage == (0, 0)

    docs = [make_doc("涨停下跌", source="src01"),   # (4-2)/2 = 1.0
            make_doc("利好", source="src01")]       # 3.0
    sig = aggregate_daily(docs, date, sources, sent, stop)
    assert sig.values[0] == pytest.approx(2.0)
    assert sig.values[1] == 0.0
    assert sig.coverage == (2, 0)


def test_aggregate_rejects_unknown_source(tiny_lexicons):
    sent, stop = tiny_lexicons
    with pytest.raises(ValidationError, match="unknown source"):
        aggregate_daily([make_doc("涨停", source="nope")], dt.date(2020, 1, 6), ("src01",), sent, stop)


def test_aggregate_rejects_wrong_date(tiny_lexicons):
    sent, stop = tiny_lexicons
    with pytest.raises(ValidationError):
        aggregate_daily([make_doc("涨停")], dt.date(2020, 1, 7), ("src01",), sent, stop)


@given(st.lists(st.sampled_from(["涨停", "下跌", "利好", "今日", "zz"]), max_size=12))
def test_aggregate_values_bounded(tokens):
    sent = SentimentLexicon(entries={"涨停": 5.0, "下跌": -5.0, "利好": 3.0})
    stop = StopwordLexicon(terms=frozenset({"今日"}))
    doc = make_doc("".join(tokens))
    sig = aggregate_daily([doc], doc.date, ("src01",), sent, stop)
    assert -5.0 <= sig.values[0] <= 5.0


def test_build_daily_signals_groups_by_date(tiny_lexicons):
    sent, stop = tiny_lexicons
    d1, d2 = dt.date(2020, 1, 6), dt.date(2020, 1, 7)
    docs = [make_doc("涨停", date=d1), make_doc("下跌", date=d2)]
    signals = build_daily_signals(docs, ("src01",), sent, stop)
    assert set(signals) == {d1, d2}
    assert signals[d1].values[0] == 4.0
    assert signals[d2].values[0] == -2.0


# --- lexicon iteration --------------------------------------------------------

def test_iteration_empty_corpus(tiny_lexicons):
    sent, stop = tiny_lexicons
    result = lexicon_iteration([], sent, stop, {})
    assert result.candidates == ()
    assert result.coverage_fraction == 1.0


def test_iteration_routes_scores(tiny_lexicons):
    sent, stop = tiny_lexicons
    result = lexicon_iteration(["foo bar"], sent, stop, {"foo": 0.0, "bar": 2.5})
    assert "foo" in result.stopwords
    assert result.sentiment.entries["bar"] == 2.5
    check_disjoint(result.sentiment, result.stopwords)


def test_iteration_score_out_of_range(tiny_lexicons):
    sent, stop = tiny_lexicons
    with pytest.raises(ValidationError):
        lexicon_iteration(["x"], sent, stop, {"x": 7.0})


def test_iteration_candidates_by_frequency():
    sent = SentimentLexicon(entries={})
    stop = StopwordLexicon(terms=frozenset())
    texts = ["bb bb bb", "aa aa", "cc", "dd dd"]
    result = lexicon_iteration(texts, sent, stop, {}, candidate_count=3)
    # counts: bb=3, aa=2, dd=2, cc=1; tie aa/dd broken lexicographically
    assert result.candidates == ("bb", "aa", "dd")
    assert result.coverage_fraction == 0.0


def test_iteration_coverage_counts_scored_terms():
    sent = SentimentLexicon(entries={})
    stop = StopwordLexicon(terms=frozenset())
    texts = ["bb bb bb aa aa cc"]
    result = lexicon_iteration(texts, sent, stop, {"bb": 1.0, "aa": 0.0}, candidate_count=3)
    # top-3 significant tokens are bb, aa, cc; two of them now scored
    assert result.coverage_fraction == pytest.approx(2 / 3)
    assert result.candidates == ("cc",)


def test_iteration_loop_converges(tiny_lexicons):
    """Scoring the emitted candidates drives coverage to 1.0."""
    sent = SentimentLexicon(entries={})
    stop = StopwordLexicon(terms=frozenset())
    texts = ["aa bb", "aa cc", "bb dd"]
    result = lexicon_iteration(texts, sent, stop, {})
    scores = {term: 1.0 for term in result.candidates}
    result = lexicon_iteration(texts, result.sentiment, result.stopwords, scores)
    assert result.coverage_fraction == 1.0
    assert result.candidates == ()


# --- file formats ---------------------------------------------------------------

def test_lexicon_tsv_round_trip(tmp_path, tiny_lexicons):
    sent, stop = tiny_lexicons
    sp = tmp_path / "sent.tsv"
    save_sentiment_lexicon(sent, sp)
    assert load_sentiment_lexicon(sp) == sent
    wp = tmp_path / "stop.txt"
    save_stopwords(stop, wp)
    assert load_stopwords(wp) == stop


def test_sentiment_tsv_rejects_zero(tmp_path):
    p = tmp_path / "sent.tsv"
    p.write_text("x\t0\n")
    with pytest.raises(ValidationError):
        load_sentiment_lexicon(p)
    assert load_scores(p) == {"x": 0.0}  # the exchange format allows 0


def test_candidates_file_shape(tmp_path):
    p = tmp_path / "cand.tsv"
    save_candidates(["aa", "bb"], p)
    assert p.read_text() == "aa\t\nbb\t\n"
    with pytest.raises(ParseError):
        load_scores(p)  # score cells still empty


def test_tsv_parse_errors(tmp_path):
    p = tmp_path / "bad.tsv"
    p.write_text("x\tnotanumber\n")
    with pytest.raises(ParseError, match="bad.tsv:1"):
        load_scores(p)
    p.write_text("x\t1\nx\t2\n")
    with pytest.raises(ParseError, match="duplicate"):
        load_scores(p)


def test_news_jsonl_round_trip(tmp_path):
    docs = [make_doc("涨停", date=dt.date(2020, 1, 6)), make_doc("hello", source="src02")]
    p = tmp_path / "news.jsonl"
    save_news_jsonl(docs, p)
    assert load_news_jsonl(p) == docs


def test_news_jsonl_error_names_line(tmp_path):
    p = tmp_path / "news.jsonl"
    p.write_text('{"date": "2020-01-06", "source_id": "a", "text": "x"}\n{"date": "nope"}\n')
    with pytest.raises(ParseError, match="news.jsonl:2"):
        load_news_jsonl(p)
