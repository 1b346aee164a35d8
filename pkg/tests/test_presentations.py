import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftlab.patterns import FormatError, Pattern, ShiftlabError, contains
from shiftlab.presentations import (
    Certificate,
    Presentation,
    SearchExhausted,
    Verdict,
    count_language_words_1d,
    decide_language_1d,
    format_presentation,
    in_colanguage,
    language_certificate,
    models,
    parse_presentation,
    periodic_witness,
    quotient,
    recolor,
    search_filling,
)

GM = Presentation.finite("01", ["11"])


def _words(alpha, n):
    return ["".join(t) for t in itertools.product(alpha, repeat=n)]


@st.composite
def sft_1d(draw):
    alpha = draw(st.sampled_from(["0", "01", "012"]))
    n = draw(st.integers(0, 3))
    forb = [draw(st.text(alphabet=alpha, min_size=1, max_size=3)) for _ in range(n)]
    return Presentation.finite(alpha, forb)


def _in_language_brute(P, w, pad):
    # a word is in the language iff it sits in the middle of a long enough allowed word;
    # pad >= number of vertices of the transfer graph guarantees a cycle on both sides
    alpha = list(P.alphabet)
    forb = ["".join(f.cells) for f in P.forbidden.patterns]
    for left in itertools.product(alpha, repeat=pad):
        for right in itertools.product(alpha, repeat=pad):
            s = "".join(left) + w + "".join(right)
            if not any(f in s for f in forb):
                return True
    return False


@settings(max_examples=60, deadline=None)
@given(sft_1d(), st.integers(1, 4))
def test_exact_core_matches_padding_brute_force(P, n):
    alpha = "".join(P.alphabet)
    # |Σ|^2 vertices plus slack on each side; the ternary case is only checked one way
    pad = len(alpha) ** 2 + 3 if len(alpha) <= 2 else 4
    for w in _words(alpha, n):
        got = decide_language_1d(P, Pattern.word(w))
        if len(alpha) <= 2:
            assert got == _in_language_brute(P, w, pad)
        else:
            # one-sided check: membership implies a padded witness exists
            if got:
                assert _in_language_brute(P, w, pad)


@settings(max_examples=40, deadline=None)
@given(sft_1d(), st.integers(1, 5))
def test_count_is_number_of_language_words(P, n):
    alpha = "".join(P.alphabet)
    assert count_language_words_1d(P, n) == sum(decide_language_1d(P, Pattern.word(w)) for w in _words(alpha, n))


def test_golden_mean_counts_are_fibonacci():
    assert [count_language_words_1d(GM, n) for n in range(1, 9)] == [2, 3, 5, 8, 13, 21, 34, 55]


def test_empty_forbidden_set_is_the_full_shift():
    P = Presentation.finite("ab", [])
    assert count_language_words_1d(P, 5) == 32
    assert decide_language_1d(P, Pattern.word("abba"))


def test_empty_shift_has_empty_language():
    P = Presentation.finite("ab", ["a", "b"])
    assert count_language_words_1d(P, 1) == 0
    c = in_colanguage(P, Pattern.word("a"), 3)
    assert c.verdict is Verdict.IN and c.depth == 0


def test_certificate_shapes():
    c = in_colanguage(GM, Pattern.word("11"), 4)
    assert c.verdict is Verdict.IN and c.depth == 0
    assert c.describe().startswith("IN depth=0")
    c = in_colanguage(GM, Pattern.word("101"), 4)
    assert c.verdict is Verdict.OUT and c.in_language
    lc = language_certificate(GM, Pattern.word("101"), 4)
    assert lc.verdict is Verdict.IN and lc.subject == "language"


def test_search_certificate_needs_depth():
    # a lone 1 needs 0 on both sides, which spells the forbidden 010
    P = Presentation.finite("01", ["00", "11", "010"])
    c = in_colanguage(P, Pattern.word("1"), 5, use_exact=False)
    assert c.verdict is Verdict.IN and c.depth >= 2
    assert not decide_language_1d(P, Pattern.word("1"))


def test_2d_periodic_witness_and_soundness():
    # checkerboard-like: horizontal and vertical neighbors differ
    P = Presentation.finite("ab", [Pattern((2, 1), "aa"), Pattern((2, 1), "bb"),
                                   Pattern((1, 2), "aa"), Pattern((1, 2), "bb")], dim=2)
    ok = Pattern.grid(["a b", "b a"])
    bad = Pattern.grid(["a b", "a b"])
    assert in_colanguage(P, ok, 4).verdict is Verdict.OUT
    assert in_colanguage(P, bad, 4).verdict is Verdict.IN
    per = periodic_witness(P, ok, 4)
    assert per is not None and contains(per, ok)


def _lex_least_brute(shape, fixed, forbidden, symbols):
    n = shape[0] * (shape[1] if len(shape) > 1 else 1)
    free = [i for i in range(n) if i not in fixed]
    for choice in itertools.product(symbols, repeat=len(free)):
        cells = [fixed.get(i) for i in range(n)]
        for i, c in zip(free, choice):
            cells[i] = c
        p = Pattern(shape, cells)
        if not any(contains(p, f) for f in forbidden if f.dim == p.dim):
            return cells
    return None


@settings(max_examples=60, deadline=None)
@given(st.lists(st.text(alphabet="ab", min_size=1, max_size=3), max_size=3),
       st.integers(2, 6), st.dictionaries(st.integers(0, 5), st.sampled_from("ab"), max_size=2))
def test_search_filling_is_lexicographically_least(forb, n, fixed):
    fixed = {k: v for k, v in fixed.items() if k < n}
    F = [Pattern.word(f) for f in forb]
    assert search_filling((n,), fixed, F, ["a", "b"]) == _lex_least_brute((n,), fixed, F, ["a", "b"])


def test_search_node_limit():
    with pytest.raises(SearchExhausted):
        search_filling((12,), {}, [Pattern.word("b")], ["b", "a"], node_limit=3)


def test_recolor_and_quotient():
    R = recolor(GM, {"0": "x", "1": "y"})
    assert list(R.alphabet) == ["x", "y"]
    assert decide_language_1d(R, Pattern.word("xyx"))
    assert not decide_language_1d(R, Pattern.word("yy"))
    with pytest.raises(ShiftlabError):
        recolor(GM, {"0": "x", "1": "x"})
    Q = quotient(GM, [Pattern.word("00")])
    assert [count_language_words_1d(Q, n) for n in (1, 2, 3)] == [2, 2, 2]


def test_models_report():
    rep = models(GM, [Pattern.word("10")], [Pattern.word("11")], 4)
    assert rep.holds is True
    rep = models(GM, [Pattern.word("11")], [], 4)
    assert rep.holds is False


def test_presentation_file_round_trip():
    P = Presentation.finite("ab", ["aa", Pattern.word("bab")])
    assert parse_presentation(format_presentation(P)).forbidden.patterns == P.forbidden.patterns
    P2 = Presentation.finite("ab", [Pattern.grid(["a b", "b a"])], dim=2)
    back = parse_presentation(format_presentation(P2))
    assert back.dim == 2 and back.forbidden.patterns == P2.forbidden.patterns


@pytest.mark.parametrize("text,line", [
    ("alphabet: a\n", 1),
    ("dim: 1\nletters: a\nforbidden:\n", 2),
    ("dim: 1\nalphabet: a\nforbid:\n", 3),
])
def test_presentation_format_errors(text, line):
    with pytest.raises(FormatError) as err:
        parse_presentation(text)
    assert err.value.line == line


def test_forbidden_words_must_be_over_the_alphabet():
    with pytest.raises(ShiftlabError):
        Presentation.finite("ab", ["ac"])


def test_certificate_unknown_flags_budget():
    c = Certificate(Verdict.UNKNOWN, 3)
    assert not c.decided and c.in_language is None
    assert "budget=3" in c.describe()
