import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from consistency_reference import consistent as brute_consistent
from shiftlab.codes import full_restriction_check
from shiftlab.forcing import (
    ConsistentPairQuery,
    ForcingState,
    branch_separate,
    check_ecfcs_at_stage,
    commit_pair,
    decode_vset,
    decode_vword,
    diagonalize_step,
    find_pad,
    format_state,
    infinite_alphabet_gadget,
    is_consistent,
    parse_state,
    run,
    stage_pair,
    state_invariants,
    transitivity_witness,
    witness_configuration,
)
from shiftlab.patterns import PAD, Alphabet, FormatError, Pattern, ShiftlabError, Var
from shiftlab.presentations import Presentation, Verdict, decide_language_1d, recolor

X = Var("x0")
GM = Presentation.finite("01", ["11"])


def W(text):
    return Pattern.word(text)


def test_word_decoding():
    assert str(decode_vword(0)) == "a0"
    assert str(decode_vword(1)) == "a0 a0"
    assert str(decode_vword(2)) == "?x0"
    assert decode_vword(5).shape == (1,)
    assert decode_vword(7, dim=2).dim == 2


def test_decoded_sets_and_stage_pairs():
    assert decode_vset(0) == frozenset()
    assert decode_vset(5) == {decode_vword(0), decode_vword(2)}
    j, k, Fj, Fk = stage_pair(4)
    assert (j, k) == (1, 1) and Fj == Fk == {decode_vword(0)}


@pytest.mark.parametrize("G,B,alpha,want", [
    (["a0 ?x0"], ["?x0 a0"], None, Verdict.IN),
    (["a0 ?x0"], ["?x0 a0"], ["a0"], Verdict.OUT),
    (["a0 ?x0"], ["?x0 a0"], ["a0", "b"], Verdict.IN),
    (["a0"], ["a0"], None, Verdict.OUT),
    (["a"], ["a a"], ["a"], Verdict.OUT),
    (["a"], ["a a"], ["a", PAD], Verdict.IN),
    (["b"], [], ["a"], Verdict.OUT),
])
def test_consistency_instances(G, B, alpha, want):
    q = ConsistentPairQuery({W(g) for g in G}, {W(b) for b in B}, Alphabet(alpha) if alpha else None)
    assert is_consistent(q).verdict is want


def test_consistency_against_a_shift():
    T = Presentation.finite(["a0", "a1"], ["a0 a0"])
    q = ConsistentPairQuery({W("a0 a0")}, set(), T=T)
    assert is_consistent(q).verdict is Verdict.OUT
    q = ConsistentPairQuery({W("a0 a1")}, set(), T=T)
    assert is_consistent(q).verdict is Verdict.IN


_CELLS = ["a", "b", X]


@settings(max_examples=150, deadline=None)
@given(st.lists(st.lists(st.sampled_from(_CELLS), min_size=1, max_size=2), max_size=2),
       st.lists(st.lists(st.sampled_from(_CELLS), min_size=1, max_size=2), max_size=2),
       st.sampled_from([("a",), ("a", "b"), ("a", PAD)]))
def test_consistency_matches_brute_force(G, B, alpha):
    G = [tuple(g) for g in G]
    B = [tuple(b) for b in B]
    q = ConsistentPairQuery({Pattern.word(list(g)) for g in G}, {Pattern.word(list(b)) for b in B},
                            Alphabet(alpha))
    got = is_consistent(q).verdict
    assert got is not Verdict.UNKNOWN
    assert (got is Verdict.IN) == brute_consistent(G, B, alpha)


def test_pads_center_the_word():
    p = find_pad(W("a1 a1"), 2, [W("a0 a0")], [PAD, "a0", "a1"])
    assert p.cells == (PAD, PAD, "a1", "a1", PAD, PAD)
    # with # next to a1 forbidden, the least filling uses a0
    p = find_pad(Pattern.word(["a1"]), 1, [Pattern.word([PAD, "a1"]), Pattern.word(["a1", PAD])], [PAD, "a0", "a1"])
    assert p.cells == ("a0", "a1", "a0")


def test_commit_pair_uses_fresh_letters():
    st0 = ForcingState(used=("a0", "a1"))
    st1, sigma = commit_pair(st0, {Pattern.word(["a0", X])}, set(), 4)
    assert sigma == {X: "a2"}
    assert W("a0 a2") in st1.base
    st2, sigma = commit_pair(st1, set(), {W("a0 a2")}, 4)
    assert sigma is None and st2 is st1


def test_run_keeps_invariants_at_every_stage():
    st, trail = run(20, 4, keep=True)
    assert st.stage == 20 and len(trail) == 21
    for s in trail:
        rep = state_invariants(s, 4)
        assert rep.clean, rep.discrepancies
    final = check_ecfcs_at_stage(st, 4)
    assert final.clean and final.pairs == 20


def test_pad_margins_grow_with_the_stage():
    st = run(8, 4)
    base = next(iter(sorted(st.base)))
    margins = sorted(p.margin for p in st.pads if p.base == base)
    assert margins == sorted(set(margins)) and margins[-1] == st.stage


def test_tampered_state_is_caught():
    st = run(10, 4)
    bad_word = next(iter(sorted(st.base)))
    tampered = ForcingState(st.stage, st.dim, st.base, st.pads, st.bad | {bad_word}, st.used, st.history)
    rep = check_ecfcs_at_stage(tampered, 4)
    assert not rep.clean
    assert any(d.startswith("CONTAINMENT") for d in rep.discrepancies)


def test_kill_slices_forbid_long_powers():
    st = run(6, 4, kill_slices=True)
    kills = [h for h in st.history if h[0] == "kill"]
    assert kills
    assert check_ecfcs_at_stage(st, 4).clean


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 25), st.booleans())
def test_state_files_round_trip(n, kill):
    s = run(n, 3, kill_slices=kill)
    text = format_state(s)
    back = parse_state(text)
    assert back == s
    assert format_state(back) == text


@pytest.mark.parametrize("text", [
    "",
    "forcing-state 2\n",
    "forcing-state 1\nstage: x\ndimension: 1\nused:\n[base]\n[pads]\n[bad]\n[history]\n",
    "forcing-state 1\nstage: 0\ndimension: 1\nused:\n[base]\n[pads]\n[bad]\n",
])
def test_malformed_state_files(text):
    with pytest.raises(FormatError):
        parse_state(text)


def test_diagonalization_against_the_golden_mean():
    st0 = run(5, 4)
    st1, cert = diagonalize_step(st0, GM, ["a0", "a1"], 4)
    assert cert.verdict is Verdict.IN
    assert cert.witness == W("a1 a1")
    assert st1.stage == st0.stage
    S = recolor(GM, {"0": "a0", "1": "a1"})
    assert not full_restriction_check(S, st1.presentation(), 2, 4).clean


def test_diagonalization_input_checks():
    with pytest.raises(ShiftlabError):
        diagonalize_step(ForcingState(), GM, ["a0"], 3)
    with pytest.raises(ShiftlabError):
        diagonalize_step(ForcingState(), GM, ["a0", "a0"], 3)


def test_branch_separation():
    st0 = run(4, 4)
    r = branch_separate(st0, st0, ["a0"], ["a1"], 3)
    assert r.found and r.word is not None
    again = branch_separate(r.A, r.B, ["a0"], ["a1"], 3)
    assert again.orientation == "already"
    same = branch_separate(st0, st0, ["a0"], ["a0"], 3)
    assert same.orientation == "exhausted"


def test_gadget_forces_a_new_letter():
    st = run(12, 4)
    q = infinite_alphabet_gadget(st, 2)
    assert is_consistent(q).verdict is Verdict.IN
    st2, sigma = commit_pair(st, q.G, q.B, 4)
    assert sigma[X] not in st.used
    with pytest.raises(ShiftlabError):
        infinite_alphabet_gadget(ForcingState(), 1)


def test_transitivity_witness():
    st = run(12, 4)
    G = sorted(st.base)
    v, w = G[0], G[-1]
    st2, word = transitivity_witness(st, v, w, 4)
    assert word is not None and word.shape[0] == w.shape[0] + 1 + v.shape[0]
    assert word in st2.base and state_invariants(st2, 4).clean


def test_witness_configuration_layout():
    cfg = witness_configuration({Pattern.word(["a0", X]), Pattern.word(["a1"])}, {X: "a2"}, margin=1)
    assert cfg.cells == (PAD, "a1", PAD, "a0", "a2", PAD)
    with pytest.raises(ShiftlabError):
        witness_configuration({Pattern.word([X])}, {}, 1)


def test_state_presentation_contains_g():
    st = run(15, 4)
    P = st.presentation()
    for g in st.G:
        assert decide_language_1d(P, g)
