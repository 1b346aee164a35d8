import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftlab.enum_red import (
    D1,
    EnumOperator,
    OneEnumOperator,
    WordCode,
    apply_1enum,
    apply_enum,
    build_IJ,
    canonical_colanguage_operator,
    cantor_pair,
    cantor_triple,
    cantor_unpair,
    cantor_untriple,
    certified_sets,
    decode_set,
    encode_set,
    verify_e_reduction,
    ziegler_check,
)
from shiftlab.patterns import Pattern, ShiftlabError
from shiftlab.presentations import Presentation, decide_language_1d

GM = Presentation.finite("01", ["11"])


@given(st.frozensets(st.integers(0, 40)))
def test_set_codes_round_trip(s):
    assert decode_set(encode_set(s)) == s


def test_set_code_values():
    assert encode_set([]) == 0 and encode_set([0, 2]) == 5
    assert D1(0) == frozenset() and D1(3) == {2}


@given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6))
def test_pairing_round_trip(x, y):
    assert cantor_unpair(cantor_pair(x, y)) == (x, y)


@given(st.integers(0, 10 ** 6))
def test_unpairing_is_onto(z):
    assert cantor_pair(*cantor_unpair(z)) == z
    assert cantor_triple(*cantor_untriple(z)) == z


def test_pairing_small_values():
    assert [cantor_unpair(z) for z in range(6)] == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]


@pytest.mark.parametrize("alpha,dim", [("ab", 1), ("abc", 1), ("ab", 2)])
def test_word_code_is_a_bijection(alpha, dim):
    code = WordCode(alpha, dim)
    seen = [code.decode(n) for n in range(300)]
    assert len(set(seen)) == 300
    assert all(code.encode(w) == n for n, w in enumerate(seen))
    sizes = [w.size for w in seen]
    assert sizes == sorted(sizes)


def test_word_code_order_and_limits():
    code = WordCode("01")
    assert [str(code.decode(n)) for n in range(6)] == ["0", "1", "0 0", "0 1", "1 0", "1 1"]
    assert code.max_code(2) == 5
    assert sum(1 for _ in code.words_up_to(3)) == 14


def _brute_enum(axioms, Y):
    return {n for n, u in axioms if decode_set(u) <= set(Y)}


@settings(max_examples=60)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 63)), max_size=8),
       st.frozensets(st.integers(0, 6)))
def test_enum_operator_semantics(axioms, Y):
    W = EnumOperator.from_axioms(axioms)
    assert apply_enum(W, Y, 0) == _brute_enum(axioms, Y)


@settings(max_examples=60)
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 31), st.integers(0, 7)), max_size=8),
       st.frozensets(st.integers(0, 5), max_size=3))
def test_one_enum_semantics_and_projection(axioms, Y):
    W = OneEnumOperator.from_axioms(axioms)
    neg = set(range(8)) - set(Y)
    out = apply_1enum(W, Y, neg, 0)
    want = {n for n, u, v in axioms if decode_set(u) <= set(Y) and D1(v) <= neg}
    assert out == want
    # dropping the negative query can only enumerate more
    assert out <= W.project().apply(Y, 0)


def test_overlapping_information_is_rejected():
    W = OneEnumOperator.complement_identity()
    with pytest.raises(ShiftlabError):
        W.apply({1}, {1}, 3)


def test_stages_are_monotone():
    calls = []

    def stage(t):
        calls.append(t)
        return [(t, 0)]

    W = EnumOperator(stage)
    assert W.axioms(3) == {(0, 0), (1, 0), (2, 0), (3, 0)}
    assert W.axioms(1) <= W.axioms(3)
    assert W.axioms(5) >= W.axioms(3)
    assert calls == [0, 1, 2, 3, 4, 5]


def test_identity_operators():
    I = EnumOperator.identity()
    assert I.apply({1, 3, 7}, 5) == {1, 3}
    C = OneEnumOperator.complement_identity()
    assert C.apply(set(), {0, 2}, 4) == {0, 2}


def test_canonical_operator_small_stage():
    W = canonical_colanguage_operator("a")
    c = W.code
    ax = (c.encode(Pattern.word("a")), encode_set([c.encode(Pattern.word("aa"))]))
    assert ax in W.axioms(2)


def test_canonical_operator_on_the_golden_mean_is_sound():
    W = canonical_colanguage_operator("01")
    c = W.code
    out = W.apply({c.encode(Pattern.word("11"))}, 4)
    for n in out:
        assert not decide_language_1d(GM, c.decode(n))


def test_verify_reports_violations_and_gaps():
    W = EnumOperator.from_axioms([(1, 0), (2, 0)])
    rep = verify_e_reduction(lambda n: n in {2, 3}, [], W, 0, 4)
    assert rep.violations == [1] and rep.uncovered == [3]
    assert not rep.sound and not rep.clean
    assert rep.lines()[0].startswith("VIOLATION 1")


def test_certified_sets_of_golden_mean():
    code = WordCode("01")
    pos, neg = certified_sets(GM, code, 2)
    assert code.encode(Pattern.word("11")) in pos
    assert code.encode(Pattern.word("10")) in neg
    assert not pos & neg


def test_identity_ziegler_reduction_is_clean():
    tp = Presentation.finite("ab", ["aa", "bb"])
    code = WordCode("ab")
    rep = ziegler_check(tp, tp, EnumOperator.identity(code), OneEnumOperator.complement_identity(code),
                        4, code.max_code(4))
    assert rep.clean


def test_wrong_ziegler_operator_is_caught():
    tp = Presentation.finite("ab", ["aa", "bb"])
    code = WordCode("ab")
    bogus = EnumOperator.from_axioms([(code.encode(Pattern.word("ab")), 0)])
    rep = ziegler_check(tp, tp, bogus, OneEnumOperator.complement_identity(code), 3, code.max_code(3))
    assert rep.colanguage.violations == [code.encode(Pattern.word("ab"))]


def test_implications_from_axioms():
    cs, ct = WordCode("ab"), WordCode("tu")
    Wi = EnumOperator.from_axioms([(0, encode_set([1]))])
    Wj = OneEnumOperator.from_axioms([(1, 0, 1)])
    I, J = build_IJ(Wi, Wj, 0, cs, ct)
    assert str(I[0]) == "{u} -> a"
    assert J[0].word == Pattern.word("b") and J[0].neg == {Pattern.word("t")}
