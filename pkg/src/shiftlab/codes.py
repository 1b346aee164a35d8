"""Block codes, factor images, slices and lifts, full restrictions, and
finite-determination checks.

Only letter-to-letter codes admit exact finite preimages, so every image
computation here requires them; general block codes support :func:`apply_code`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .patterns import (
    Alphabet,
    AlphabetMismatch,
    DimensionMismatch,
    Pattern,
    Rect,
    ShiftlabError,
    cell_coords,
    contains,
    patterns_up_to,
)
from .presentations import (
    Certificate,
    FiniteSource,
    GeneratorSource,
    Presentation,
    Verdict,
    in_colanguage,
    models,
    quotient,
    recolor,
    unknown,
)


@dataclass(frozen=True)
class BlockCode:
    """Local rule Σ_T^D → Σ_S.  ``table`` keys are neighborhood contents in cell order."""

    source: Alphabet
    target: Alphabet
    neighborhood: Rect
    table: Mapping[tuple, str] = field(hash=False, compare=False)

    def __post_init__(self):
        n = self.neighborhood.size
        for key, out in self.table.items():
            if len(key) != n or any(s not in self.source for s in key):
                raise ShiftlabError(f"bad table entry {key} -> {out}")
            if out not in self.target:
                raise AlphabetMismatch(f"table output {out!r} not in the target alphabet")
        expected = len(self.source) ** n
        if len(self.table) != expected:
            raise ShiftlabError(f"table has {len(self.table)} rows, a total code needs {expected}")

    @classmethod
    def letter(cls, mapping: Mapping[str, str], source: Iterable[str] | None = None,
               target: Iterable[str] | None = None, dim: int = 1) -> "BlockCode":
        src = Alphabet(source if source is not None else mapping.keys())
        tgt = Alphabet(target if target is not None else sorted(set(mapping.values()), key=list(mapping.values()).index))
        return cls(src, tgt, Rect((0,) * dim, (0,) * dim), {(a,): mapping[a] for a in src})

    @classmethod
    def identity(cls, alphabet: Iterable[str], dim: int = 1) -> "BlockCode":
        alpha = Alphabet(alphabet)
        return cls.letter({a: a for a in alpha}, alpha, alpha, dim)

    @property
    def dim(self) -> int:
        return self.neighborhood.dim

    @property
    def is_letter_to_letter(self) -> bool:
        return self.neighborhood.size == 1

    def letter_map(self) -> dict[str, str]:
        if not self.is_letter_to_letter:
            raise ShiftlabError("not a letter-to-letter code")
        return {k[0]: v for k, v in self.table.items()}

    def inverse(self) -> dict[str, list[str]]:
        inv: dict[str, list[str]] = {}
        m = self.letter_map()
        for a in self.source:
            inv.setdefault(m[a], []).append(a)
        return inv


def apply_code(code: BlockCode, w: Pattern) -> Pattern:
    """Slide the local rule over ``w``; the result lives on the eroded domain."""
    if w.dim != code.dim:
        raise DimensionMismatch(f"code of dimension {code.dim} applied to a {w.dim}-dimensional pattern")
    D = code.neighborhood
    out_shape = tuple(n - e + 1 for n, e in zip(w.shape, D.shape))
    if any(e < 1 for e in out_shape):
        raise ShiftlabError("pattern too small for the code's neighborhood")
    rels = cell_coords(D.shape)
    cells = []
    for u in cell_coords(out_shape):
        key = tuple(w[tuple(a + r for a, r in zip(u, rel))] for rel in rels)
        try:
            cells.append(code.table[key])
        except KeyError:
            raise AlphabetMismatch(f"neighborhood {key} not in the code's table") from None
    # cell u of the output reads w's neighborhood u + D, so its absolute
    # position is the absolute corner of that neighborhood minus D.lo
    origin = tuple(o - lo for o, lo in zip(w.origin, D.lo))
    return Pattern(out_shape, cells, origin)


def preimage(code: BlockCode, w: Pattern) -> list[Pattern]:
    """Every source pattern mapped onto ``w`` by a letter-to-letter code."""
    inv = code.inverse()
    choices = [inv.get(c, []) for c in w.cells]
    return [Pattern(w.shape, cells, w.origin) for cells in itertools.product(*choices)]


class ImageShift:
    """f(Q) for a letter-to-letter code f and a presentation Q, seen through its co-language."""

    def __init__(self, code: BlockCode, base: Presentation):
        if not code.is_letter_to_letter:
            raise ShiftlabError("images are only computed for letter-to-letter codes")
        if not base.alphabet.issubset(code.source):
            raise AlphabetMismatch("the presentation's alphabet is not the code's source")
        self.code = code
        self.base = base
        self.alphabet = code.target
        self.dim = base.dim

    def colanguage(self, w: Pattern, budget: int) -> Certificate:
        return image_colanguage(self.code, self.base, w, budget)


def image_colanguage(code: BlockCode, Q: Presentation, w: Pattern, budget: int) -> Certificate:
    """``w ∈ L^c(f(Q))`` iff every preimage of ``w`` lies in ``L^c(Q)``."""
    pre = [v for v in preimage(code, w) if v.symbols() <= set(Q.alphabet)]
    if not pre:
        return Certificate(Verdict.IN, budget, depth=0, note="empty preimage")
    depth = 0
    for v in pre:
        c = in_colanguage(Q, v, budget)
        if c.verdict is Verdict.OUT:
            return Certificate(Verdict.OUT, budget, witness=v, note="a preimage is in the language")
        if c.verdict is Verdict.UNKNOWN:
            return unknown(budget, note=f"preimage {v!r} undecided")
        depth = max(depth, c.depth or 0)
    return Certificate(Verdict.IN, budget, depth=depth, note=f"all {len(pre)} preimages excluded")


# ---------------------------------------------------------------------------
# new shifts from old


def lift(P: Presentation, k: int) -> Presentation:
    """S^(k): configurations constant along k new axes over points of P."""
    if k < 1:
        raise ShiftlabError("lift needs k >= 1")
    d = P.dim + k
    constancy = []
    for axis in range(P.dim, d):
        shape = tuple(2 if a == axis else 1 for a in range(d))
        for a, b in itertools.permutations(P.alphabet, 2):
            constancy.append(Pattern(shape, (a, b)))
    if P.is_finite_type:
        src = FiniteSource([p.embed(d) for p in P.forbidden.patterns] + constancy)
    else:
        inner = P.forbidden
        src = GeneratorSource(lambda t: [p.embed(d) for p in inner.at(t)] + constancy, f"lift({inner.name})")
    return Presentation(P.alphabet, d, src)


def slice_alphabet(P: Presentation, delta: Iterable[str]) -> Presentation:
    """S↾Δ presented over the original alphabet with every letter outside Δ forbidden."""
    delta = Alphabet(delta)
    if not delta.issubset(P.alphabet):
        raise AlphabetMismatch(f"{delta} is not a subset of {P.alphabet}")
    outside = [Pattern((1,) * P.dim, (s,)) for s in P.alphabet if s not in delta]
    return quotient(P, outside)


def alphabet_slice(P: Presentation, delta: Iterable[str], w: Pattern, budget: int) -> Certificate:
    delta = Alphabet(delta)
    sliced = slice_alphabet(P, delta)
    if any(s not in delta for s in w.symbols()):
        raise AlphabetMismatch("the word uses letters outside the slice alphabet")
    return in_colanguage(sliced, w, budget)


def dimension_slice(P: Presentation, d: int, w: Pattern, budget: int) -> Certificate:
    """Membership of a d-dimensional ``w`` in L^c(S↾d), via its embedding in Z^{d_S}."""
    if not 1 <= d < P.dim:
        raise DimensionMismatch(f"slice dimension {d} must be below {P.dim}")
    if w.dim != d:
        raise DimensionMismatch(f"word of dimension {w.dim}, slice of dimension {d}")
    return in_colanguage(P, w.embed(P.dim), budget)


# ---------------------------------------------------------------------------
# full restrictions


@dataclass
class RestrictionReport:
    checked: int = 0
    counterexamples: list[tuple[Pattern, int, Optional[bool], Optional[bool]]] = field(default_factory=list)
    unknowns: list[Pattern] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.counterexamples


def _lang(shift, w: Pattern, budget: int) -> Optional[bool]:
    if isinstance(shift, Presentation) and shift.dim == 1 and shift.is_finite_type:
        # exact and much cheaper than going through a certificate
        return shift.graph.accepts(w.cells)
    return shift.colanguage(w, budget).in_language


def full_restriction_check(S, T, size_bound: int, budget: int) -> RestrictionReport:
    """Compare L(S) with L(T) ∩ Σ_S^{*d_S} on every pattern of side ≤ ``size_bound``.

    ``S`` and ``T`` are presentations or any object exposing ``alphabet``,
    ``dim`` and ``colanguage``.  Undecided verdicts are collected, never
    counted as counterexamples.
    """
    if not S.alphabet.issubset(T.alphabet):
        raise AlphabetMismatch(f"{S.alphabet} is not contained in {T.alphabet}")
    if S.dim > T.dim:
        raise DimensionMismatch("S must not have larger dimension than T")
    rep = RestrictionReport()
    for w in patterns_up_to(S.dim, size_bound, S.alphabet):
        a = _lang(S, w, budget)
        b = _lang(T, w.embed(T.dim), budget)
        rep.checked += 1
        if a is None or b is None:
            rep.unknowns.append(w)
        elif a != b:
            rep.counterexamples.append((w, w.side, a, b))
    return rep


@dataclass
class EmbeddingResult:
    injection: Optional[dict[str, str]]
    tried: int
    reports: list[tuple[dict[str, str], RestrictionReport]]


def sqsubsetsim_search(S: Presentation, T, size_bound: int, budget: int,
                       extending: Optional[Mapping[str, str]] = None) -> EmbeddingResult:
    """First injection Σ_S ↪ Σ_T (lexicographic in T's order) whose recoloring of S passes the check."""
    extending = dict(extending or {})
    if len(S.alphabet) > len(T.alphabet):
        return EmbeddingResult(None, 0, [])
    src = list(S.alphabet)
    for a, b in extending.items():
        if a not in S.alphabet or b not in T.alphabet:
            return EmbeddingResult(None, 0, [])
    rest_src = [a for a in src if a not in extending]
    rest_tgt = [b for b in T.alphabet if b not in extending.values()]
    reports = []
    tried = 0
    for image in itertools.permutations(rest_tgt, len(rest_src)):
        mapping = dict(extending)
        mapping.update(zip(rest_src, image))
        tried += 1
        rep = full_restriction_check(recolor(S, mapping), T, size_bound, budget)
        reports.append((mapping, rep))
        if rep.clean:
            return EmbeddingResult(mapping, tried, reports)
    return EmbeddingResult(None, tried, reports)


# ---------------------------------------------------------------------------
# finite determination


@dataclass(frozen=True)
class DeterminationTuple:
    alphabet: Alphabet
    dim: int
    good: frozenset
    bad: frozenset
    code: BlockCode

    def __post_init__(self):
        if not self.code.is_letter_to_letter:
            raise ShiftlabError("determination tuples use letter-to-letter codes")
        if not self.alphabet.issubset(self.code.source):
            raise AlphabetMismatch("the code must be defined on the tuple's alphabet")
        for p in itertools.chain(self.good, self.bad):
            if p.dim != self.dim or any(s not in self.alphabet for s in p.symbols()):
                raise ShiftlabError(f"malformed tuple word {p!r}")

    @property
    def base(self) -> Presentation:
        """⟨Σ|B⟩^d."""
        return Presentation(self.alphabet, self.dim, FiniteSource(self.bad))


def decide_via_determination(t: DeterminationTuple, w: Pattern, budget: int) -> Certificate:
    """Certificate for ``w`` against the shift determined by ``t`` over the empty shift.

    IN (co-language) when every preimage of ``w`` is excluded from ⟨Σ|B⟩;
    OUT (language) when additionally forbidding the preimages of ``w`` kills
    some G-word.
    """
    Q = t.base
    c = image_colanguage(t.code, Q, w, budget)
    if c.verdict is Verdict.IN:
        return c
    U = [v for v in preimage(t.code, w) if v.symbols() <= set(t.alphabet)]
    killed = quotient(Q, U)
    for g in sorted(t.good):
        cg = in_colanguage(killed, g, budget)
        if cg.verdict is Verdict.IN:
            return Certificate(Verdict.OUT, budget, depth=cg.depth, witness=g,
                               note="forbidding the preimages kills a required word")
    return unknown(budget)


@dataclass
class DeterminationReport:
    qualifying: list[Presentation] = field(default_factory=list)
    excluded: list[tuple[Presentation, str]] = field(default_factory=list)
    failures: list[tuple[Presentation, RestrictionReport]] = field(default_factory=list)
    clause1: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def clause2(self) -> bool:
        return not self.failures

    @property
    def ok(self) -> bool:
        return self.clause1 and self.clause2


def _reduced(forbidden: Iterable[Pattern]) -> frozenset:
    """Drop forbidden patterns that contain another one; the shift is unchanged."""
    fs = sorted(set(forbidden))
    keep = []
    for p in fs:
        if not any(q != p and contains(p, q) for q in fs):
            keep.append(p)
    return frozenset(keep)


def check_determination(t: DeterminationTuple, S, T, candidates: Iterable[Presentation],
                        size_bound: int, budget: int) -> DeterminationReport:
    """Bounded harness for the two clauses of finite determination.

    A candidate R qualifies when R ⊨ L(G) ∧ L^c(B) and T ⊑ f(R) at the given
    bounds; clause (2) then asks S ⊑ f(R).  ``T=None`` stands for the empty
    shift, which fully restricts to anything.  Candidates presenting the same
    shift after removing redundant forbidden patterns are evaluated once.
    """
    rep = DeterminationReport()
    memo: dict[tuple, tuple[str, Optional[RestrictionReport]]] = {}
    seen_any = False
    for R in candidates:
        seen_any = True
        if R.alphabet != t.alphabet or R.dim != t.dim:
            raise ShiftlabError("candidates must share the tuple's alphabet and dimension")
        key = (_reduced(R.forbidden.patterns),) if R.is_finite_type else (id(R),)
        if key not in memo:
            memo[key] = _judge(t, S, T, R, size_bound, budget)
        status, frep = memo[key]
        if status == "qualifies":
            rep.qualifying.append(R)
            rep.clause1 = True
        elif status == "fails":
            rep.qualifying.append(R)
            rep.clause1 = True
            rep.failures.append((R, frep))
        else:
            rep.excluded.append((R, status))
    if not seen_any:
        rep.notes.append("empty candidate family: clause (1) unverified")
    elif not rep.clause1:
        rep.notes.append("no candidate satisfies clause (1) at these bounds")
    return rep


def _judge(t, S, T, R, size_bound, budget):
    m = models(R, t.good, t.bad, budget)
    if m.holds is not True:
        return ("excluded: does not model (G, B)", None)
    image = ImageShift(t.code, R)
    if T is not None:
        trep = full_restriction_check(T, image, size_bound, budget)
        if not trep.clean or trep.unknowns:
            return ("excluded: T is not a full restriction of f(R)", None)
    srep = full_restriction_check(S, image, size_bound, budget)
    if srep.clean:
        return ("qualifies", srep)
    return ("fails", srep)


def candidate_family(base: Presentation, max_len: int) -> list[Presentation]:
    """All ⟨Σ|F ∪ F'⟩ with F' a set of 1D words of length ≤ ``max_len``."""
    words = [w for w in patterns_up_to(base.dim, max_len, base.alphabet)]
    out = []
    for r in range(len(words) + 1):
        for extra in itertools.combinations(words, r):
            out.append(quotient(base, extra) if extra else base)
    return out


def pullback_quotient(alphabet: Iterable[str], dim: int, bad: Iterable[Pattern], code: BlockCode,
                      T) -> Presentation:
    """Q = ⟨Σ | B ∪ f̂^{-1}(L^c(T))⟩ with the pullback enumerated stage by stage.

    At stage t the source lists B together with the preimages of every word
    over T's alphabet of side ≤ t that T certifies as excluded at budget t.
    """
    alpha = Alphabet(alphabet)
    bad = frozenset(bad)
    if not code.is_letter_to_letter:
        raise ShiftlabError("pullbacks need a letter-to-letter code")

    def stage(t: int):
        out = set(bad)
        if t < 1:
            return out
        for w in patterns_up_to(dim, t, T.alphabet):
            if T.colanguage(w, t).verdict is Verdict.IN:
                out.update(v for v in preimage(code, w) if v.symbols() <= set(alpha))
        return out

    return Presentation(alpha, dim, GeneratorSource(stage, "pullback"))


def format_code(code: BlockCode) -> str:
    lines = [
        "source = [" + ", ".join(f'"{s}"' for s in code.source) + "]",
        "target = [" + ", ".join(f'"{s}"' for s in code.target) + "]",
        f"neighborhood = {[list(p) for p in zip(code.neighborhood.lo, code.neighborhood.hi)]}",
        "table = [",
    ]
    for key in sorted(code.table):
        lines.append(f'  "{" ".join(key)} -> {code.table[key]}",')
    lines.append("]")
    return "\n".join(lines) + "\n"


def code_from_mapping(data: Mapping) -> BlockCode:
    """Build a code from parsed TOML: ``source``, ``target``, ``neighborhood``, ``table`` rows."""
    try:
        source = Alphabet(data["source"])
        target = Alphabet(data["target"])
        nb = data.get("neighborhood", [[0, 0]])
        rect = Rect(tuple(int(a) for a, _ in nb), tuple(int(b) for _, b in nb))
        table = {}
        for row in data["table"]:
            lhs, rhs = row.split("->")
            table[tuple(lhs.split())] = rhs.strip()
    except (KeyError, ValueError, TypeError) as e:
        raise ShiftlabError(f"malformed block code: {e}") from None
    return BlockCode(source, target, rect, table)
