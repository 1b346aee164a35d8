"""Enumeration and 1-enumeration reducibility at finite stages.

Sets of naturals are coded in binary (``u = Σ 2^n``), singletons by
``D¹_v = {v-1}``, pairs by the Cantor pairing and triples as ``⟨x,⟨y,z⟩⟩``.
Words are coded per (alphabet, dimension) by :class:`WordCode`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Optional

from .patterns import Alphabet, Pattern, ShiftlabError, patterns_up_to
from .codes import DeterminationTuple, image_colanguage, preimage, pullback_quotient
from .presentations import (
    Certificate,
    FiniteSource,
    Presentation,
    Verdict,
    in_colanguage,
    quotient,
    unknown,
)


# ---------------------------------------------------------------------------
# codings


def encode_set(s: Iterable[int]) -> int:
    u = 0
    for n in set(s):
        if n < 0:
            raise ShiftlabError("finite sets of naturals only")
        u |= 1 << n
    return u


def decode_set(u: int) -> frozenset:
    if u < 0:
        raise ShiftlabError("set codes are naturals")
    out = []
    n = 0
    while u:
        if u & 1:
            out.append(n)
        u >>= 1
        n += 1
    return frozenset(out)


def D1(v: int) -> frozenset:
    """The singleton code: D¹_0 = ∅ and D¹_v = {v-1}."""
    if v < 0:
        raise ShiftlabError("singleton codes are naturals")
    return frozenset() if v == 0 else frozenset([v - 1])


def cantor_pair(x: int, y: int) -> int:
    return (x + y) * (x + y + 1) // 2 + y


def cantor_unpair(z: int) -> tuple[int, int]:
    w = (math.isqrt(8 * z + 1) - 1) // 2
    y = z - w * (w + 1) // 2
    return w - y, y


def cantor_triple(x: int, y: int, z: int) -> int:
    return cantor_pair(x, cantor_pair(y, z))


def cantor_untriple(n: int) -> tuple[int, int, int]:
    x, r = cantor_unpair(n)
    return (x, *cantor_unpair(r))


@lru_cache(maxsize=None)
def _shapes_of_size(n: int, d: int) -> tuple[tuple[int, ...], ...]:
    """All d-tuples of positive extents with product n, lexicographically."""
    if d == 1:
        return ((n,),)
    out = []
    for a in range(1, n + 1):
        if n % a == 0:
            out.extend((a, *rest) for rest in _shapes_of_size(n // a, d - 1))
    return tuple(out)


class WordCode:
    """Bijection between the words over ``alphabet`` in dimension ``dim`` and ω.

    Words are ordered by cell count, then extent vector, then contents read
    in cell order with symbols compared by alphabet position.
    """

    def __init__(self, alphabet: Iterable[str], dim: int = 1):
        self.alphabet = alphabet if isinstance(alphabet, Alphabet) else Alphabet(alphabet)
        self.dim = dim
        self.k = len(self.alphabet)
        if self.k == 0:
            raise ShiftlabError("no words over the empty alphabet")
        self._syms = list(self.alphabet)

    def _blocks(self) -> Iterator[tuple[tuple[int, ...], int, int]]:
        start = 0
        n = 1
        while True:
            for shape in _shapes_of_size(n, self.dim):
                count = self.k ** n
                yield shape, start, count
                start += count
            n += 1

    def encode(self, w: Pattern) -> int:
        if w.dim != self.dim:
            raise ShiftlabError(f"word of dimension {w.dim} coded in dimension {self.dim}")
        idx = 0
        for s in w.cells:
            idx = idx * self.k + self.alphabet.id(s)
        for shape, start, _ in self._blocks():
            if shape == w.shape:
                return start + idx

    def decode(self, n: int) -> Pattern:
        if n < 0:
            raise ShiftlabError("word codes are naturals")
        for shape, start, count in self._blocks():
            if n < start + count:
                idx = n - start
                cells = []
                for _ in range(math.prod(shape)):
                    idx, r = divmod(idx, self.k)
                    cells.append(self._syms[r])
                return Pattern(shape, tuple(reversed(cells)))

    def words_up_to(self, side: int) -> list[Pattern]:
        return list(patterns_up_to(self.dim, side, self.alphabet))

    def max_code(self, side: int) -> int:
        return max((self.encode(w) for w in self.words_up_to(side)), default=-1)


# ---------------------------------------------------------------------------
# operators


def _cumulative(cache: dict, fn, t: int) -> frozenset:
    if t in cache:
        return cache[t]
    start = max((s for s in cache if s < t), default=-1)
    acc = cache.get(start, frozenset())
    for s in range(start + 1, t + 1):
        acc = acc | frozenset(fn(s))
        cache[s] = acc
    return acc


class EnumOperator:
    """A c.e. set of axioms ⟨n,u⟩, exposed as the finite stage ``axioms(t)``.

    ``stage_fn(t)`` returns the axioms (as pairs) enumerated by stage t; the
    operator keeps the union over all stages ≤ t so that stages are monotone.
    """

    def __init__(self, stage_fn: Callable[[int], Iterable[tuple[int, int]]], name: str = "W"):
        self.stage_fn = stage_fn
        self.name = name
        self._cache: dict[int, frozenset] = {}

    @classmethod
    def from_axioms(cls, axioms: Iterable[tuple[int, int]], name: str = "W") -> "EnumOperator":
        ax = frozenset((int(n), int(u)) for n, u in axioms)
        return cls(lambda t: ax, name)

    @classmethod
    def identity(cls, code: Optional[WordCode] = None) -> "EnumOperator":
        """{⟨n, 2^n⟩}; stage t covers n ≤ t, or every word of side ≤ t when a coding is given."""
        if code is None:
            return cls(lambda t: [(n, 1 << n) for n in range(t + 1)], "id")
        return cls(lambda t: [(n, 1 << n) for n in map(code.encode, code.words_up_to(t))], "id")

    def axioms(self, t: int) -> frozenset:
        return _cumulative(self._cache, self.stage_fn, t)

    def apply(self, Ypos: Iterable[int], t: int) -> frozenset:
        Y = set(Ypos)
        return frozenset(n for n, u in self.axioms(t) if decode_set(u) <= Y)

    def encoded(self, t: int) -> list[int]:
        return sorted(cantor_pair(n, u) for n, u in self.axioms(t))


def apply_enum(W: EnumOperator, Ypos: Iterable[int], t: int) -> frozenset:
    return W.apply(Ypos, t)


class OneEnumOperator:
    """A c.e. set of axioms ⟨n,u,v⟩ with one negative query D¹_v."""

    def __init__(self, stage_fn: Callable[[int], Iterable[tuple[int, int, int]]], name: str = "W1"):
        self.stage_fn = stage_fn
        self.name = name
        self._cache: dict[int, frozenset] = {}

    @classmethod
    def from_axioms(cls, axioms: Iterable[tuple[int, int, int]], name: str = "W1") -> "OneEnumOperator":
        ax = frozenset((int(n), int(u), int(v)) for n, u, v in axioms)
        return cls(lambda t: ax, name)

    @classmethod
    def complement_identity(cls, code: Optional[WordCode] = None) -> "OneEnumOperator":
        """{⟨n, 0, n+1⟩}: n is enumerated once n is known to be outside Y."""
        if code is None:
            return cls(lambda t: [(n, 0, n + 1) for n in range(t + 1)], "co-id")
        return cls(lambda t: [(n, 0, n + 1) for n in map(code.encode, code.words_up_to(t))], "co-id")

    @classmethod
    def empty(cls) -> "OneEnumOperator":
        return cls(lambda t: (), "empty")

    def axioms(self, t: int) -> frozenset:
        return _cumulative(self._cache, self.stage_fn, t)

    def apply(self, Ypos: Iterable[int], Yneg: Iterable[int], t: int) -> frozenset:
        P, N = set(Ypos), set(Yneg)
        if P & N:
            raise ShiftlabError(f"positive and negative information overlap on {sorted(P & N)}")
        return frozenset(n for n, u, v in self.axioms(t) if decode_set(u) <= P and D1(v) <= N)

    def project(self) -> EnumOperator:
        """The plain operator obtained by dropping the negative query."""
        return EnumOperator(lambda t: [(n, u) for n, u, _ in self.axioms(t)], self.name + "/proj")

    def encoded(self, t: int) -> list[int]:
        return sorted(cantor_triple(n, u, v) for n, u, v in self.axioms(t))


def apply_1enum(W: OneEnumOperator, Ypos: Iterable[int], Yneg: Iterable[int], t: int) -> frozenset:
    return W.apply(Ypos, Yneg, t)


class CanonicalColanguageOperator(EnumOperator):
    """⟨w,u⟩ whenever, for some n, every extension of w to side n contains a word of D_u.

    ``seed`` words are treated as always present in the hypothesis, which is
    how the operator for a quotient S = T/{w} is obtained.  ``max_hyp``
    bounds |D_u| when axioms are listed explicitly; :meth:`apply` does not
    need that bound.
    """

    def __init__(self, alphabet: Iterable[str], dim: int = 1, seed: Iterable[Pattern] = (),
                 max_hyp: int = 1):
        self.code = WordCode(alphabet, dim)
        self.alphabet = self.code.alphabet
        self.dim = dim
        self.seed = frozenset(seed)
        self.max_hyp = max_hyp
        super().__init__(self._stage, "canonical")

    def _covers(self, w: Pattern, hyp: Iterable[Pattern], t: int) -> bool:
        F = frozenset(hyp) | self.seed
        if not F:
            return False
        P = Presentation(self.alphabet, self.dim, FiniteSource(F))
        return in_colanguage(P, w, t, use_exact=False).verdict is Verdict.IN

    def _stage(self, t: int):
        words = self.code.words_up_to(t)
        out = []
        for w in words:
            for r in range(0 if self.seed else 1, self.max_hyp + 1):
                for hyp in itertools.combinations(words, r):
                    if self._covers(w, hyp, t):
                        out.append((self.code.encode(w), encode_set(self.code.encode(v) for v in hyp)))
        return out

    def apply(self, Ypos: Iterable[int], t: int) -> frozenset:
        hyp = [self.code.decode(n) for n in Ypos]
        hyp = [v for v in hyp if v.side <= t]
        F = frozenset(hyp) | self.seed
        if not F:
            return frozenset()
        P = Presentation(self.alphabet, self.dim, FiniteSource(F))
        return frozenset(
            self.code.encode(w) for w in self.code.words_up_to(t)
            if in_colanguage(P, w, t, use_exact=False).verdict is Verdict.IN
        )

    def holds(self, n: int, u: int, t: int) -> bool:
        w = self.code.decode(n)
        return w.side <= t and self._covers(w, map(self.code.decode, decode_set(u)), t)


def canonical_colanguage_operator(alphabet, dim: int = 1, seed: Iterable[Pattern] = ()) -> CanonicalColanguageOperator:
    return CanonicalColanguageOperator(alphabet, dim, seed)


# ---------------------------------------------------------------------------
# verification


@dataclass
class ReductionReport:
    stage: int
    bound: int
    output: frozenset = frozenset()
    violations: list[int] = field(default_factory=list)
    uncovered: list[int] = field(default_factory=list)
    undecided: list[int] = field(default_factory=list)

    @property
    def sound(self) -> bool:
        return not self.violations

    @property
    def clean(self) -> bool:
        return not self.violations and not self.uncovered

    def lines(self, tag: str = "") -> list[str]:
        pre = f"{tag} " if tag else ""
        out = [f"{pre}VIOLATION {n} enumerated but not in X" for n in self.violations]
        out += [f"{pre}UNCOVERED {n} in X but not enumerated by stage {self.stage}" for n in self.uncovered]
        out += [f"{pre}UNDECIDED {n}" for n in self.undecided]
        return out


def _staged(src, t):
    return src(t) if callable(src) else src


def verify_e_reduction(Xoracle: Callable[[int], Optional[bool]], Ysource, W: EnumOperator, t: int,
                       bound: int, Yneg=None) -> ReductionReport:
    """Check Φ_W(Y) against X at stage t.

    ``Xoracle(n)`` answers True/False/None.  Soundness is checked on every
    enumerated element, coverage on codes ≤ ``bound``.  Passing ``Yneg``
    switches to 1-enumeration semantics.
    """
    Ypos = _staged(Ysource, t)
    if Yneg is None:
        out = W.apply(Ypos, t)
    else:
        out = W.apply(Ypos, _staged(Yneg, t), t)
    rep = ReductionReport(t, bound, out)
    for n in sorted(out):
        if Xoracle(n) is False:
            rep.violations.append(n)
    for n in range(bound + 1):
        v = Xoracle(n)
        if v is None:
            rep.undecided.append(n)
        elif v and n not in out:
            rep.uncovered.append(n)
    return rep


def certified_sets(T, code: WordCode, t: int) -> tuple[frozenset, frozenset]:
    """Codes of words of side ≤ t certified in L^c(T), resp. L(T), at budget t."""
    pos, neg = set(), set()
    for w in code.words_up_to(t):
        c = T.colanguage(w, t)
        if c.verdict is Verdict.IN:
            pos.add(code.encode(w))
        elif c.verdict is Verdict.OUT:
            neg.add(code.encode(w))
    return frozenset(pos), frozenset(neg)


@dataclass
class ZieglerReport:
    colanguage: ReductionReport
    language: ReductionReport

    @property
    def clean(self) -> bool:
        return self.colanguage.clean and self.language.clean


def ziegler_check(S: Presentation, T: Presentation, Wi: EnumOperator, Wj: OneEnumOperator,
                  t: int, bound: int, budget: Optional[int] = None) -> ZieglerReport:
    """L^c(S) ≤_e L^c(T) via Wi and L(S) ≤_e^1 L^c(T) via Wj, both at stage t."""
    budget = t if budget is None else budget
    cs, ct = WordCode(S.alphabet, S.dim), WordCode(T.alphabet, T.dim)
    pos, neg = certified_sets(T, ct, t)

    def in_lang(n):
        return S.colanguage(cs.decode(n), budget).in_language

    def in_colang(n):
        v = in_lang(n)
        return None if v is None else not v

    r1 = verify_e_reduction(in_colang, pos, Wi, t, bound)
    r2 = verify_e_reduction(in_lang, pos, Wj, t, bound, Yneg=neg)
    return ZieglerReport(r1, r2)


# ---------------------------------------------------------------------------
# implications and the forward algorithm


@dataclass(frozen=True)
class Implication:
    """``pos`` (T-words present), ``neg`` (T-words absent) ⟹ ``word`` (an S-word)."""

    pos: frozenset
    neg: frozenset
    word: Pattern

    def __str__(self):
        p = ", ".join(map(str, sorted(self.pos))) or "∅"
        n = ", ".join(map(str, sorted(self.neg)))
        lhs = f"{{{p}}}" + (f"; not {{{n}}}" if self.neg else "")
        return f"{lhs} -> {self.word}"


def build_IJ(Wi: EnumOperator, Wj: OneEnumOperator, t: int, code_S: WordCode,
             code_T: WordCode) -> tuple[list[Implication], list[Implication]]:
    I = [Implication(frozenset(map(code_T.decode, decode_set(u))), frozenset(), code_S.decode(n))
         for n, u in sorted(Wi.axioms(t))]
    J = [Implication(frozenset(map(code_T.decode, decode_set(u))),
                     frozenset(map(code_T.decode, D1(v))), code_S.decode(n))
         for n, u, v in sorted(Wj.axioms(t))]
    return I, J


def ziegler_forward(tup: DeterminationTuple, T, w: Pattern, budget: int) -> Certificate:
    """Semi-decide ``w`` for the shift determined by ``tup`` over T.

    IN means co-language, OUT means language, as for every certificate here.
    """
    Q = pullback_quotient(tup.alphabet, tup.dim, tup.bad, tup.code, T)
    U = [v for v in preimage(tup.code, w) if v.symbols() <= set(tup.alphabet)]
    if not U:
        return Certificate(Verdict.IN, budget, depth=0, note="empty preimage")
    c = image_colanguage(tup.code, Q, w, budget)
    if c.verdict is Verdict.IN:
        return c
    Qw = quotient(Q, U)
    for g in sorted(tup.good):
        cg = in_colanguage(Qw, g, budget, use_exact=False)
        if cg.verdict is Verdict.IN:
            return Certificate(Verdict.OUT, budget, depth=cg.depth, witness=g,
                               note="forbidding the preimages kills a G-word")
    for v in patterns_up_to(tup.dim, budget, T.alphabet):
        if image_colanguage(tup.code, Qw, v, budget).verdict is Verdict.IN:
            if T.colanguage(v, budget).verdict is Verdict.OUT:
                return Certificate(Verdict.OUT, budget, witness=v,
                                   note="forbidding the preimages excludes a word of L(T)")
    return unknown(budget, note="no exclusion detected")
