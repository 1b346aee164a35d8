"""Forcing construction of subshifts that are existentially closed for
consistent systems, at finite stages.

The countable alphabet is {a0, a1, ...}; variables are ``Var("x0")``, ...;
the reserved ``#`` is available as padding.  A state (G_s, B_s) presents
⟨used ∪ {#} | B_s⟩^d.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

from .codes import full_restriction_check, sqsubsetsim_search
from .enum_red import cantor_unpair, decode_set
from .patterns import (
    PAD,
    Alphabet,
    FormatError,
    Pattern,
    ShiftlabError,
    Var,
    cell_coords,
    contains,
    format_patterns,
    parse_patterns,
    patterns_up_to,
    strides,
    substitute,
)
from .presentations import (
    Certificate,
    FiniteSource,
    Presentation,
    SearchExhausted,
    Verdict,
    decide_language_1d,
    in_colanguage,
    recolor,
    search_filling,
    unknown,
)

_SYM = re.compile(r"a(\d+)$")


def sym(m: int) -> str:
    return f"a{m}"


def sym_index(s: str) -> int:
    mt = _SYM.match(s)
    if not mt:
        raise ShiftlabError(f"{s!r} is not a symbol of the countable alphabet")
    return int(mt.group(1))


def var(m: int) -> Var:
    return Var(f"x{m}")


# ---------------------------------------------------------------------------
# enumerating finite sets of variable words


def _unpair_n(z: int, n: int) -> list[int]:
    out = []
    for _ in range(n - 1):
        a, z = cantor_unpair(z)
        out.append(a)
    out.append(z)
    return out


def decode_vword(n: int, dim: int = 1) -> Pattern:
    """The n-th variable word: n = ⟨shape, contents⟩, symbol 2m ↦ a_m, 2m+1 ↦ x_m."""
    a, b = cantor_unpair(n)
    shape = tuple(e + 1 for e in _unpair_n(a, dim))
    N = 1
    for e in shape:
        N *= e
    cells = [sym(c // 2) if c % 2 == 0 else var(c // 2) for c in _unpair_n(b, N)]
    return Pattern(shape, cells)


def decode_vset(k: int, dim: int = 1) -> frozenset:
    """F_k: the variable words coded by the members of D_k."""
    return frozenset(decode_vword(n, dim) for n in decode_set(k))


def stage_pair(s: int, dim: int = 1) -> tuple[int, int, frozenset, frozenset]:
    j, k = cantor_unpair(s)
    return j, k, decode_vset(j, dim), decode_vset(k, dim)


# ---------------------------------------------------------------------------
# consistency


@dataclass(frozen=True)
class ConsistentPairQuery:
    """(G, B) over Σ ∪ X; ``alphabet=None`` stands for the countable alphabet."""

    G: frozenset
    B: frozenset
    alphabet: Optional[Alphabet] = None
    T: Optional[Presentation] = None

    def __post_init__(self):
        object.__setattr__(self, "G", frozenset(self.G))
        object.__setattr__(self, "B", frozenset(self.B))

    @property
    def variables(self) -> frozenset:
        return frozenset(v for w in itertools.chain(self.G, self.B) for v in w.variables())

    @property
    def constants(self) -> frozenset:
        return frozenset(s for w in itertools.chain(self.G, self.B) for s in w.symbols())


def _syntactic_hit(G: Iterable[Pattern], B: Iterable[Pattern]) -> Optional[tuple[Pattern, Pattern]]:
    for w in sorted(G):
        for v in sorted(B):
            if v.dim == w.dim and contains(w, v):
                return w, v
    return None


def _consistency(verdict: Verdict, budget: int, note: str, witness=None) -> Certificate:
    return Certificate(verdict, budget, subject="consistency", witness=witness, note=note)


def is_consistent(q: ConsistentPairQuery, budget: int = 8) -> Certificate:
    """IN = consistent, OUT = inconsistent, UNKNOWN = undecided at the budget.

    Syntactic containment of a B-word in a G-word is always fatal.  Over the
    countable alphabet, or whenever Σ leaves |vars|+1 symbols outside the
    constants, that test is exact.  Smaller finite alphabets are decided by
    trying every assignment of the variables and asking whether each
    substituted G-word lies in L(⟨Σ | B(σ)⟩).
    """
    hit = _syntactic_hit(q.G, q.B)
    if hit:
        return _consistency(Verdict.OUT, budget, f"{hit[0]} contains {hit[1]}", hit[0])
    if q.alphabet is not None and any(isinstance(s, Var) for s in q.alphabet):
        raise ShiftlabError("variables collide with the alphabet")
    pending = False
    if q.T is not None:
        for w in sorted(q.G):
            if w.variables() or not w.symbols() <= set(q.T.alphabet) or w.dim != q.T.dim:
                continue
            c = q.T.colanguage(w, budget)
            if c.verdict is Verdict.IN:
                return _consistency(Verdict.OUT, budget, f"{w} is excluded from T", w)
            if c.verdict is Verdict.UNKNOWN:
                pending = True
    if q.alphabet is None:
        if pending:
            return _consistency(Verdict.UNKNOWN, budget, "consistent so far; some G-words undecided in T")
        return _consistency(Verdict.IN, budget, "no G-word contains a B-word")
    sigma = set(q.alphabet)
    if any(not w.symbols() <= sigma for w in q.G):
        return _consistency(Verdict.OUT, budget, "a G-word uses a letter outside Σ")
    B = [v for v in q.B if v.symbols() <= sigma]
    vars_ = sorted(q.variables)
    free = sigma - q.constants
    if len(free) >= len(vars_) + 1:
        if pending:
            return _consistency(Verdict.UNKNOWN, budget, "consistent so far; some G-words undecided in T")
        return _consistency(Verdict.IN, budget, "no G-word contains a B-word and Σ has room")
    undecided = False
    letters = list(q.alphabet)
    for image in itertools.product(letters, repeat=len(vars_)):
        sigma_map = dict(zip(vars_, image))
        Gs = [substitute(w, sigma_map) for w in q.G]
        Bs = frozenset(substitute(v, sigma_map) for v in B)
        P = Presentation(q.alphabet, _dim(q), FiniteSource(Bs))
        verdicts = [_in_language(P, g, budget) for g in Gs]
        if all(v is True for v in verdicts):
            return _consistency(Verdict.IN, budget, f"realized with {_fmt_assign(sigma_map)}")
        if any(v is None for v in verdicts) and not any(v is False for v in verdicts):
            undecided = True
    if undecided or pending:
        return _consistency(Verdict.UNKNOWN, budget, "no assignment certified")
    return _consistency(Verdict.OUT, budget, "no assignment of the variables is realizable")


def _dim(q: ConsistentPairQuery) -> int:
    for w in itertools.chain(q.G, q.B):
        return w.dim
    return 1


def _in_language(P: Presentation, w: Pattern, budget: int) -> Optional[bool]:
    if P.dim == 1:
        return decide_language_1d(P, w)
    return in_colanguage(P, w, budget).in_language


def _fmt_assign(m) -> str:
    return ",".join(f"{k.name}={v}" for k, v in sorted(m.items()))


# ---------------------------------------------------------------------------
# states


@dataclass(frozen=True)
class PadEntry:
    base: Pattern
    stage: int
    margin: int
    word: Pattern


@dataclass(frozen=True)
class ForcingState:
    stage: int = 0
    dim: int = 1
    base: frozenset = frozenset()
    pads: tuple = ()
    bad: frozenset = frozenset()
    used: tuple = ()
    history: tuple = ()

    @property
    def G(self) -> frozenset:
        return self.base | frozenset(p.word for p in self.pads)

    @property
    def B(self) -> frozenset:
        return self.bad

    def alphabet(self) -> Alphabet:
        return Alphabet(list(self.used) + [PAD])

    def presentation(self) -> Presentation:
        """⟨used ∪ {#} | B_s⟩^d."""
        return Presentation(self.alphabet(), self.dim, FiniteSource(self.bad))

    def fresh(self, n: int, avoid: Iterable[str] = ()) -> list[str]:
        taken = set(self.used) | set(avoid)
        out, m = [], 0
        while len(out) < n:
            if sym(m) not in taken:
                out.append(sym(m))
            m += 1
        return out


def _used_after(used: Iterable[str], words: Iterable[Pattern]) -> tuple:
    s = set(used)
    for w in words:
        s |= {c for c in w.symbols() if c != PAD}
    return tuple(sorted(s, key=sym_index))


class _LanguageOracle:
    """Exact 1D membership in ⟨used ∪ {#} | B⟩.

    Letters that occur in no B-word can be traded for # (which occurs in
    none either) without creating or destroying B-occurrences, so one
    transfer graph over the letters of B plus # serves every query.
    """

    def __init__(self, bad: frozenset, dim: int):
        self.dim = dim
        self.bad = bad
        letters = sorted({c for v in bad for c in v.symbols()}, key=sym_index)
        self.letters = set(letters)
        self.P = Presentation(Alphabet(letters + [PAD]), dim, FiniteSource(bad))

    def __call__(self, w: Pattern, budget: int) -> Optional[bool]:
        mapped = w.recolor({c: PAD for c in w.symbols() if c not in self.letters})
        if self.dim == 1:
            return self.P.graph.accepts(mapped.cells)
        return in_colanguage(self.P, mapped, budget).in_language


def find_pad(w: Pattern, margin: int, bad: Iterable[Pattern], symbols: Sequence[str],
             node_limit: Optional[int] = None) -> Optional[Pattern]:
    """Lexicographically least word with ``w`` centered at the given margin that avoids ``bad``.

    Symbols are tried in the given order, so listing # first yields the
    #-framed pad whenever it is admissible.
    """
    shape = tuple(e + 2 * margin for e in w.shape)
    st = strides(shape)
    fixed = {}
    for rel, c in zip(cell_coords(w.shape), w.cells):
        fixed[sum((r + margin) * k for r, k in zip(rel, st))] = c
    try:
        cells = search_filling(shape, fixed, list(bad), list(symbols), node_limit=node_limit)
    except SearchExhausted:
        return None
    if cells is None:
        return None
    return Pattern(shape, cells)


def _pad_all(st: ForcingState, budget: int, margin: int) -> ForcingState:
    symbols = [PAD] + list(st.used)
    pads = list(st.pads)
    hist = list(st.history)
    for w in sorted(st.base):
        p = find_pad(w, margin, st.bad, symbols, node_limit=2000 * max(1, budget))
        if p is None:
            hist.append(("stuck", st.stage, _wtext(w)))
            continue
        pads.append(PadEntry(w, st.stage, margin, p))
    return replace(st, pads=tuple(pads), history=tuple(hist))


def commit_pair(st: ForcingState, G: Iterable[Pattern], B: Iterable[Pattern], budget: int,
                pad: bool = True) -> tuple[ForcingState, Optional[dict]]:
    """Add (G(b̄), B(b̄)) with fresh b̄ if (G_s ∪ G, B_s ∪ B) is consistent.

    Returns the new state and the variable assignment, or the unchanged
    state and None when the pair is inconsistent.
    """
    G, B = frozenset(G), frozenset(B)
    q = ConsistentPairQuery(st.G | G, st.bad | B)
    if is_consistent(q, budget).verdict is not Verdict.IN:
        return st, None
    vars_ = sorted(q.variables)
    consts = {c for w in itertools.chain(G, B) for c in w.symbols() if c != PAD}
    sigma = dict(zip(vars_, st.fresh(len(vars_), consts)))
    newG = {substitute(w, sigma) for w in G}
    newB = {substitute(v, sigma) for v in B}
    used = _used_after(st.used, itertools.chain(newG, newB, st.base))
    st2 = replace(st, base=st.base | frozenset(newG), bad=st.bad | frozenset(newB), used=used)
    if pad and newG:
        margin = max(st.stage, 1)
        pads = list(st2.pads)
        for w in sorted(newG):
            p = find_pad(w, margin, st2.bad, [PAD] + list(used), node_limit=2000 * max(1, budget))
            if p is not None:
                pads.append(PadEntry(w, st.stage, margin, p))
        st2 = replace(st2, pads=tuple(pads))
    return st2, sigma


def stage_step(st: ForcingState, budget: int, kill_slices: bool = False) -> ForcingState:
    """One stage: process pair ⟨j,k⟩ = s (or s//2 with the slice policy), then re-pad."""
    s = st.stage
    if kill_slices and s % 2 == 1:
        st2 = _kill_slice(st, (s - 1) // 2)
    else:
        idx = s // 2 if kill_slices else s
        j, k, Fj, Fk = stage_pair(idx, st.dim)
        st2, sigma = commit_pair(st, Fj, Fk, budget, pad=False)
        verdict = "consistent" if sigma is not None else "inconsistent"
        assign = _fmt_assign(sigma) if sigma else "-"
        st2 = replace(st2, history=st2.history + (("pair", s, j, k, verdict, assign),))
    st3 = replace(st2, stage=s + 1)
    return _pad_all(st3, budget, s + 1)


def _kill_slice(st: ForcingState, t: int) -> ForcingState:
    """Forbid a power of a_t long enough to miss every G-word, emptying the slice to {a_t}."""
    a = sym(t)
    L = 0
    for w in st.G:
        run = 0
        for c in w.cells:
            run = run + 1 if c == a else 0
            L = max(L, run)
    side = L + 1
    v = Pattern((side,) * st.dim, [a] * side ** st.dim)
    if _syntactic_hit(st.G, [v]):
        return replace(st, history=st.history + (("kill", st.stage, a, "skipped"),))
    used = _used_after(st.used, [v])
    return replace(st, bad=st.bad | {v}, used=used,
                   history=st.history + (("kill", st.stage, a, _wtext(v)),))


def run(stages: int, budget: int, dim: int = 1, kill_slices: bool = False,
        keep: bool = False):
    """Fold stage_step from the empty state; with ``keep`` also return every intermediate state."""
    st = ForcingState(dim=dim)
    trail = [st]
    for _ in range(stages):
        st = stage_step(st, budget, kill_slices)
        if keep:
            trail.append(st)
    return (st, trail) if keep else st


# ---------------------------------------------------------------------------
# checks


@dataclass
class EcfcsReport:
    discrepancies: list[str] = field(default_factory=list)
    unknowns: list[str] = field(default_factory=list)
    pairs: int = 0

    @property
    def clean(self) -> bool:
        return not self.discrepancies


def state_invariants(st: ForcingState, budget: int) -> EcfcsReport:
    rep = EcfcsReport()
    hit = _syntactic_hit(st.G, st.bad)
    if hit:
        rep.discrepancies.append(f"CONTAINMENT {hit[0]} contains {hit[1]}")
    lang = _LanguageOracle(st.bad, st.dim)
    for w in sorted(st.G):
        v = lang(w, budget)
        if v is False:
            rep.discrepancies.append(f"NOT-IN-LANGUAGE {w}")
        elif v is None:
            rep.unknowns.append(f"UNDECIDED {w}")
    for p in st.pads:
        if p.margin < p.stage:
            rep.discrepancies.append(f"PAD-MARGIN {p.base} margin {p.margin} < stage {p.stage}")
        if not contains(p.word, p.base):
            rep.discrepancies.append(f"PAD-CONTENT {p.word} misses {p.base}")
    return rep


def check_ecfcs_at_stage(st: ForcingState, budget: int) -> EcfcsReport:
    """Replay the recorded pairs and check that each consistent one is satisfied."""
    rep = state_invariants(st, budget)
    G: set = set()
    B: set = set()
    for entry in st.history:
        if entry[0] == "kill":
            if entry[3] != "skipped":
                B.add(_wparse(entry[3]))
            continue
        if entry[0] == "diag":
            (B if entry[3] == "B" else G).add(_wparse(entry[2]))
            continue
        if entry[0] == "commit":
            G.update(_wparse(t) for t in entry[2].split(";") if t)
            B.update(_wparse(t) for t in entry[3].split(";") if t)
            continue
        if entry[0] != "pair":
            continue
        _, s, j, k, verdict, assign = entry
        rep.pairs += 1
        Fj, Fk = decode_vset(j, st.dim), decode_vset(k, st.dim)
        q = ConsistentPairQuery(frozenset(G) | Fj, frozenset(B) | Fk)
        now = is_consistent(q, budget).verdict is Verdict.IN
        if now != (verdict == "consistent"):
            rep.discrepancies.append(f"VERDICT pair {s} recorded {verdict}")
            continue
        if not now:
            continue
        sigma = _parse_assign(assign)
        for w in Fj:
            ws = substitute(w, sigma)
            if ws not in st.base:
                rep.discrepancies.append(f"MISSING-G pair {s} {ws}")
            G.add(ws)
        for v in Fk:
            vs = substitute(v, sigma)
            if vs not in st.bad:
                rep.discrepancies.append(f"MISSING-B pair {s} {vs}")
            B.add(vs)
    return rep


def _parse_assign(text: str) -> dict:
    if text == "-":
        return {}
    out = {}
    for part in text.split(","):
        k, v = part.split("=")
        out[Var(k)] = v
    return out


# ---------------------------------------------------------------------------
# the other uses of the forcing argument


def query_gadget(st: ForcingState, n: int) -> ConsistentPairQuery:
    """∃x (L(a0 x) ∧ L^c(x a0, ..., x a_{n-1})): any solution is a new letter."""
    need = [sym(i) for i in range(n)]
    if n < 1 or any(a not in st.used for a in need):
        raise ShiftlabError(f"gadget needs a0..a{n - 1} in the used alphabet")
    x = var(0)
    G = {Pattern((2,), (sym(0), x))}
    B = {Pattern((2,), (x, a)) for a in need}
    return ConsistentPairQuery(frozenset(G), frozenset(B))


infinite_alphabet_gadget = query_gadget


def witness_configuration(G: Iterable[Pattern], sigma: dict, margin: int = 2) -> Pattern:
    """The substituted G-words laid along axis 0, framed and separated by #."""
    words = [substitute(w, sigma) for w in sorted(G)]
    for w in words:
        if w.variables():
            raise ShiftlabError(f"unbound variables in {w}")
    dims = {w.dim for w in words} or {1}
    if len(dims) > 1:
        raise ShiftlabError("G-words of mixed dimension")
    d = dims.pop()
    height = tuple(max([w.shape[a] for w in words] + [1]) + (2 if d > 1 else 0) for a in range(1, d))
    width = 2 * margin + sum(w.shape[0] for w in words) + max(0, len(words) - 1)
    if not words:
        width = 2 * margin
    shape = (width,) + height
    grid = {}
    x = margin
    for w in words:
        for rel in itertools.product(*(range(e) for e in w.shape)):
            pos = (x + rel[0],) + tuple(r + (1 if d > 1 else 0) for r in rel[1:])
            grid[pos] = w[rel]
        x += w.shape[0] + 1
    return Pattern(shape, [grid.get(rel, PAD) for rel in cell_coords(shape)])


def diagonalize_step(st: ForcingState, S: Presentation, cbar: Sequence[str],
                     budget: int) -> tuple[ForcingState, Certificate]:
    """Commit a word over c̄ separating S_c̄ from the state's presentation.

    The first pass looks for w ∈ L^c(S_c̄) that can join G, the second for
    w ∈ L(S_c̄) that can join B.  IN reports success (the witness is w).
    """
    cbar = list(cbar)
    src = list(S.alphabet)
    if len(cbar) != len(src):
        raise ShiftlabError(f"need {len(src)} symbols, got {len(cbar)}")
    if len(set(cbar)) != len(cbar):
        raise ShiftlabError("the tuple must be injective")
    Sc = recolor(S, dict(zip(src, cbar)))
    words = list(patterns_up_to(S.dim, budget, cbar))
    for target in ("G", "B"):
        for w in words:
            c = Sc.colanguage(w, budget)
            if target == "G" and c.verdict is not Verdict.IN:
                continue
            if target == "B" and c.verdict is not Verdict.OUT:
                continue
            q = ConsistentPairQuery(st.G | {w}, st.bad) if target == "G" else \
                ConsistentPairQuery(st.G, st.bad | {w})
            if is_consistent(q, budget).verdict is not Verdict.IN:
                continue
            used = _used_after(st.used, [w] + [Pattern((1,), (a,)) for a in cbar])
            if target == "G":
                st2 = replace(st, base=st.base | {w}, used=used)
                p = find_pad(w, max(st.stage, 1), st2.bad, [PAD] + list(used))
                if p is not None:
                    st2 = replace(st2, pads=st2.pads + (PadEntry(w, st.stage, max(st.stage, 1), p),))
            else:
                st2 = replace(st, bad=st.bad | {w}, used=used)
            st2 = replace(st2, history=st2.history + (("diag", ",".join(cbar), _wtext(w), target),))
            return st2, Certificate(Verdict.IN, budget, subject="diagonalization", witness=w,
                                    note=f"added to {target}")
    return st, unknown(budget, "diagonalization", "no separating word at this budget")


def _separated(stA: ForcingState, stB: ForcingState, cbar, dbar) -> bool:
    fwd = dict(zip(cbar, dbar))
    back = dict(zip(dbar, cbar))
    for v in stA.bad:
        if v.symbols() <= set(cbar):
            vr = v.recolor(fwd)
            if any(contains(g, vr) for g in stB.G):
                return True
    for v in stB.bad:
        if v.symbols() <= set(dbar):
            vr = v.recolor(back)
            if any(contains(g, vr) for g in stA.G):
                return True
    return False


@dataclass
class SeparationResult:
    A: ForcingState
    B: ForcingState
    word: Optional[Pattern]
    orientation: str

    @property
    def found(self) -> bool:
        return self.orientation in ("forward", "swapped", "already")


def branch_separate(stA: ForcingState, stB: ForcingState, cbar: Sequence[str], dbar: Sequence[str],
                    budget: int) -> SeparationResult:
    """Find w(x̄) with w(c̄) ∈ L^c(M_A) and w(d̄) ∈ L(M_B), or the swapped orientation."""
    cbar, dbar = list(cbar), list(dbar)
    if len(cbar) != len(dbar):
        raise ShiftlabError("c̄ and d̄ must have the same length")
    if _separated(stA, stB, cbar, dbar):
        return SeparationResult(stA, stB, None, "already")
    if stA == stB and cbar == dbar:
        return SeparationResult(stA, stB, None, "exhausted")
    xs = [var(i) for i in range(len(cbar))]
    for L in range(2, max(2, budget) + 1):
        for cells in itertools.product(xs, repeat=L):
            w = Pattern((L,) * 1 if stA.dim == 1 else (L,) + (1,) * (stA.dim - 1), cells)
            wc = substitute(w, dict(zip(xs, cbar)))
            wd = substitute(w, dict(zip(xs, dbar)))
            for orient in ("forward", "swapped"):
                if orient == "forward":
                    kill_st, keep_st, kill_w, keep_w = stA, stB, wc, wd
                else:
                    kill_st, keep_st, kill_w, keep_w = stB, stA, wd, wc
                ok_kill = is_consistent(ConsistentPairQuery(kill_st.G, kill_st.bad | {kill_w}), budget)
                ok_keep = is_consistent(ConsistentPairQuery(keep_st.G | {keep_w}, keep_st.bad), budget)
                if ok_kill.verdict is Verdict.IN and ok_keep.verdict is Verdict.IN:
                    k2, _ = commit_pair(kill_st, (), {kill_w}, budget)
                    g2, _ = commit_pair(keep_st, {keep_w}, (), budget)
                    k2 = replace(k2, history=k2.history + (("commit", kill_st.stage, "", _wtext(kill_w)),))
                    g2 = replace(g2, history=g2.history + (("commit", keep_st.stage, _wtext(keep_w), ""),))
                    if orient == "forward":
                        return SeparationResult(k2, g2, w, orient)
                    return SeparationResult(g2, k2, w, orient)
    return SeparationResult(stA, stB, None, "exhausted")


def transitivity_witness(st: ForcingState, v: Pattern, w: Pattern,
                         budget: int) -> tuple[ForcingState, Optional[Pattern]]:
    """Commit w·x·v through a fresh letter and return the committed word (None if v or w is not certified)."""
    if st.dim != 1:
        raise ShiftlabError("concatenation witnesses are implemented in dimension 1")
    lang = _LanguageOracle(st.bad, st.dim)
    if lang(v, budget) is not True or lang(w, budget) is not True:
        return st, None
    x = var(0)
    word = Pattern((w.side + 1 + v.side,), tuple(w.cells) + (x,) + tuple(v.cells))
    st2, sigma = commit_pair(st, {word}, (), budget)
    if sigma is None:
        return st, None
    out = substitute(word, sigma)
    st2 = replace(st2, history=st2.history + (("commit", st.stage, _wtext(out), ""),))
    return st2, out


def restriction_counterexample(st: ForcingState, S: Presentation, cbar: Sequence[str], bound: int,
                               budget: int):
    """full_restriction_check of S_c̄ against the state's presentation."""
    Sc = recolor(S, dict(zip(S.alphabet, cbar)))
    return full_restriction_check(Sc, st.presentation(), bound, budget)


def embedding_between(stA: ForcingState, stB: ForcingState, cbar, dbar, bound: int, budget: int):
    return sqsubsetsim_search(stA.presentation(), stB.presentation(), bound, budget,
                              extending={**dict(zip(cbar, dbar)), PAD: PAD})


# ---------------------------------------------------------------------------
# state files


def _wtext(w: Pattern) -> str:
    return "x".join(map(str, w.shape)) + ":" + ",".join(str(c) if not isinstance(c, Var) else "?" + c.name
                                                        for c in w.cells)


def _wparse(text: str) -> Pattern:
    shape, cells = text.split(":")
    dims = tuple(int(e) for e in shape.split("x"))
    out = [Var(c[1:]) if c.startswith("?") else c for c in cells.split(",")]
    return Pattern(dims, out)


def _block(ps) -> str:
    text = format_patterns(ps)
    return text + "\n" if text and not text.endswith("\n") else text


def format_state(st: ForcingState) -> str:
    lines = ["forcing-state 1", f"stage: {st.stage}", f"dimension: {st.dim}",
             "used: " + " ".join(st.used), "[base]"]
    out = "\n".join(lines) + "\n"
    out += _block(sorted(st.base))
    out += "[pads]\n"
    for p in st.pads:
        out += f"pad {p.stage} {p.margin} {_wtext(p.base)} {_wtext(p.word)}\n"
    out += "[bad]\n"
    out += _block(sorted(st.bad))
    out += "[history]\n"
    for e in st.history:
        out += " ".join(str(t) for t in e) + "\n"
    return out


def parse_state(text: str) -> ForcingState:
    lines = text.split("\n")
    if not lines or lines[0].strip() != "forcing-state 1":
        raise FormatError("missing 'forcing-state 1' header", 1, 1)
    head = {}
    for n, ln in enumerate(lines[1:4], start=2):
        if ":" not in ln:
            raise FormatError(f"expected 'key: value', got {ln!r}", n, 1)
        k, v = ln.split(":", 1)
        head[k.strip()] = v.strip()
    try:
        stage, dim = int(head["stage"]), int(head["dimension"])
    except (KeyError, ValueError):
        raise FormatError("bad stage or dimension", 2, 1) from None
    used = tuple(head.get("used", "").split())
    sections: dict[str, tuple[int, list[str]]] = {}
    cur = None
    for n, ln in enumerate(lines[4:], start=5):
        if ln.startswith("[") and ln.rstrip().endswith("]"):
            cur = ln.strip()[1:-1]
            sections[cur] = (n, [])
        elif cur is None:
            if ln.strip():
                raise FormatError(f"content before the first section: {ln!r}", n, 1)
        else:
            sections[cur][1].append(ln)
    for name in ("base", "pads", "bad", "history"):
        if name not in sections:
            raise FormatError(f"missing [{name}] section", len(lines), 1)

    def pats(name):
        start, body = sections[name]
        text = "\n".join(body).strip("\n")
        return frozenset(parse_patterns(text, start)) if text.strip() else frozenset()

    pads = []
    start, body = sections["pads"]
    for n, ln in enumerate(body, start=start + 1):
        if not ln.strip():
            continue
        parts = ln.split()
        if len(parts) != 5 or parts[0] != "pad":
            raise FormatError(f"bad pad line {ln!r}", n, 1)
        try:
            pads.append(PadEntry(_wparse(parts[3]), int(parts[1]), int(parts[2]), _wparse(parts[4])))
        except (ValueError, ShiftlabError) as e:
            raise FormatError(f"bad pad line: {e}", n, 1) from None
    history = []
    start, body = sections["history"]
    for ln in body:
        if not ln.strip():
            continue
        parts = ln.split(" ")
        entry = tuple(int(p) if p.lstrip("-").isdigit() and i in (1, 2, 3) and parts[0] == "pair"
                      else (int(p) if p.isdigit() and i == 1 else p)
                      for i, p in enumerate(parts))
        history.append(entry)
    return ForcingState(stage, dim, pats("base"), tuple(pads), pats("bad"), used, tuple(history))
