"""Presentations ⟨Σ|F⟩^d and budgeted (co-)language membership.

Membership in the co-language of an effectively closed shift is only
semi-decidable, so checks return a :class:`Certificate` carrying one of three
verdicts.  For one-dimensional shifts of finite type an exact decision is
available through the transfer graph (:class:`TransferGraph`).
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Optional, Sequence

from .patterns import (
    Alphabet,
    AlphabetMismatch,
    DimensionMismatch,
    FormatError,
    Pattern,
    ShiftlabError,
    Var,
    _prod,
    cell_coords,
    centered_offset,
    contains,
    format_pattern,
    parse_patterns,
    shapes_up_to,
    strides,
)


class Verdict(enum.Enum):
    IN = "IN"
    OUT = "OUT"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class Certificate:
    """Outcome of a budgeted membership question.

    ``subject`` names the set being asked about (``"colanguage"`` or
    ``"language"``); ``depth`` is the hypercube side at which an extension
    search closed (0 for immediate containment of a forbidden pattern).
    """

    verdict: Verdict
    budget: int
    subject: str = "colanguage"
    depth: Optional[int] = None
    witness: Optional[Pattern] = None
    note: str = ""

    @property
    def decided(self) -> bool:
        return self.verdict is not Verdict.UNKNOWN

    @property
    def in_language(self) -> Optional[bool]:
        if self.verdict is Verdict.UNKNOWN:
            return None
        inside = self.verdict is Verdict.IN
        return inside if self.subject == "language" else not inside

    def as_language(self) -> "Certificate":
        if self.subject == "language":
            return self
        flip = {Verdict.IN: Verdict.OUT, Verdict.OUT: Verdict.IN, Verdict.UNKNOWN: Verdict.UNKNOWN}
        return Certificate(flip[self.verdict], self.budget, "language", self.depth, self.witness, self.note)

    def describe(self) -> str:
        bits = [self.verdict.value]
        if self.depth is not None:
            bits.append(f"depth={self.depth}")
        if self.note:
            bits.append(self.note)
        if self.verdict is Verdict.UNKNOWN:
            bits.append(f"budget={self.budget}")
        return " ".join(bits)


def unknown(budget: int, subject: str = "colanguage", note: str = "") -> Certificate:
    return Certificate(Verdict.UNKNOWN, budget, subject, note=note)


# ---------------------------------------------------------------------------
# forbidden sources


@dataclass(frozen=True)
class FiniteSource:
    patterns: frozenset

    def __init__(self, patterns: Iterable[Pattern] = ()):
        object.__setattr__(self, "patterns", frozenset(p.anchored() for p in patterns))

    def at(self, stage: int) -> frozenset:
        return self.patterns


class GeneratorSource:
    """Staged c.e. enumeration; ``at(t)`` is cumulative and therefore monotone in t."""

    def __init__(self, fn: Callable[[int], Iterable[Pattern]], name: str = "generator"):
        self.fn = fn
        self.name = name
        self._memo: dict[int, frozenset] = {}

    def at(self, stage: int) -> frozenset:
        stage = max(stage, 0)
        if stage not in self._memo:
            prev = self.at(stage - 1) if stage > 0 else frozenset()
            self._memo[stage] = prev | frozenset(p.anchored() for p in self.fn(stage))
        return self._memo[stage]

    def __repr__(self) -> str:
        return f"GeneratorSource({self.name})"


@dataclass(frozen=True)
class Presentation:
    alphabet: Alphabet
    dim: int
    forbidden: FiniteSource | GeneratorSource = field(default_factory=FiniteSource)

    def __post_init__(self):
        if self.dim < 1:
            raise DimensionMismatch("dimension must be at least 1")
        if isinstance(self.forbidden, FiniteSource):
            for p in self.forbidden.patterns:
                _check_over(p, self.alphabet, self.dim)

    @classmethod
    def finite(cls, alphabet: Iterable[str], forbidden: Iterable[Pattern | str] = (), dim: int = 1) -> "Presentation":
        pats = [Pattern.word(f) if isinstance(f, str) else f for f in forbidden]
        pats = [p.embed(dim) if p.dim < dim else p for p in pats]
        return cls(Alphabet(alphabet), dim, FiniteSource(pats))

    @property
    def is_finite_type(self) -> bool:
        return isinstance(self.forbidden, FiniteSource)

    def forbidden_at(self, stage: int) -> frozenset:
        return self.forbidden.at(stage)

    def colanguage(self, w: Pattern, budget: int) -> Certificate:
        return in_colanguage(self, w, budget)

    @cached_property
    def graph(self) -> "TransferGraph":
        return TransferGraph(self)


def _check_over(p: Pattern, alphabet: Alphabet, dim: int) -> None:
    if p.dim != dim:
        raise DimensionMismatch(f"pattern of dimension {p.dim} in a {dim}-dimensional presentation")
    if p.variables():
        raise ShiftlabError("variable cells are not allowed here")
    bad = [s for s in p.symbols() if s not in alphabet]
    if bad:
        raise AlphabetMismatch(f"symbols {sorted(bad)} not in {alphabet}")


def recolor(P: Presentation, mapping: dict) -> Presentation:
    """Rename symbols of ``P`` through an injective ``mapping``."""
    if len(set(mapping.values())) != len(mapping):
        raise ShiftlabError("recoloring must be injective")
    alpha = Alphabet(mapping.get(s, s) for s in P.alphabet)
    if len(alpha) != len(P.alphabet):
        raise ShiftlabError("recoloring collapses symbols")
    if isinstance(P.forbidden, FiniteSource):
        src = FiniteSource(p.recolor(mapping) for p in P.forbidden.patterns)
    else:
        inner = P.forbidden
        src = GeneratorSource(lambda t: (p.recolor(mapping) for p in inner.at(t)), f"recolor({inner.name})")
    return Presentation(alpha, P.dim, src)


def quotient(P: Presentation, extra: Iterable[Pattern]) -> Presentation:
    """P/F': forbid the additional patterns."""
    extra = frozenset(e.anchored() for e in extra)
    for e in extra:
        _check_over(e, P.alphabet, P.dim)
    if not extra:
        return P
    if isinstance(P.forbidden, FiniteSource):
        return Presentation(P.alphabet, P.dim, FiniteSource(P.forbidden.patterns | extra))
    inner = P.forbidden
    return Presentation(P.alphabet, P.dim, GeneratorSource(lambda t: inner.at(t) | extra, f"{inner.name}/+{len(extra)}"))


# ---------------------------------------------------------------------------
# backtracking search for fillings avoiding forbidden patterns


def _constraints(forbidden: Iterable[Pattern], shape: Sequence[int], fixed: dict, torus: bool = False):
    """Placements of each forbidden pattern as (flat indices, symbols) lists.

    Placements contradicted by a fixed cell are dropped.  With ``torus`` the
    coordinates wrap, giving the periodic configuration with that period.
    """
    st = strides(shape)
    out = []
    for q in forbidden:
        if q.dim != len(shape):
            continue
        rels = cell_coords(q.shape)
        if torus:
            starts = itertools.product(*(range(e) for e in shape))
        else:
            if any(a > b for a, b in zip(q.shape, shape)):
                continue
            starts = itertools.product(*(range(b - a + 1) for a, b in zip(q.shape, shape)))
        for start in starts:
            req: dict[int, str] = {}
            ok = True
            for rel, c in zip(rels, q.cells):
                if torus:
                    idx = sum(((r + s0) % e) * k for r, s0, e, k in zip(rel, start, shape, st))
                else:
                    idx = sum((r + s0) * k for r, s0, k in zip(rel, start, st))
                if req.get(idx, c) != c:
                    ok = False
                    break
                req[idx] = c
                f = fixed.get(idx)
                if f is not None and f != c:
                    ok = False
                    break
            if ok:
                out.append(req)
    return out


def search_filling(shape: Sequence[int], fixed: dict, forbidden: Iterable[Pattern], symbols: Sequence[str],
                   torus: bool = False, node_limit: Optional[int] = None) -> Optional[list]:
    """Lexicographically least filling of ``shape`` that extends ``fixed`` and avoids ``forbidden``.

    Returns the flat cell list, or None when no filling exists.  Raises
    :class:`SearchExhausted` if ``node_limit`` assignments are tried first.
    """
    n = _prod(shape)
    cons = _constraints(forbidden, shape, fixed, torus)
    free = [i for i in range(n) if i not in fixed]
    pos = {i: k for k, i in enumerate(free)}
    # bucket each placement by the last free cell it mentions
    buckets: list[list[dict]] = [[] for _ in free]
    cells: list = [fixed.get(i) for i in range(n)]
    for req in cons:
        frees = [pos[i] for i in req if i in pos]
        if not frees:
            return None  # a forbidden pattern sits entirely on fixed cells
        buckets[max(frees)].append(req)
    if not free:
        return cells
    syms = list(symbols)
    choice = [-1] * len(free)
    k = 0
    nodes = 0
    while k >= 0:
        choice[k] += 1
        if choice[k] >= len(syms):
            choice[k] = -1
            cells[free[k]] = None
            k -= 1
            continue
        nodes += 1
        if node_limit is not None and nodes > node_limit:
            raise SearchExhausted(nodes)
        cells[free[k]] = syms[choice[k]]
        if any(all(cells[i] == c for i, c in req.items()) for req in buckets[k]):
            continue
        if k == len(free) - 1:
            return cells
        k += 1
    return None


class SearchExhausted(ShiftlabError):
    pass


def extension_exists(forbidden: Iterable[Pattern], w: Pattern, side: int, symbols: Sequence[str]) -> bool:
    """Whether some extension of ``w`` to the side-``side`` hypercube avoids ``forbidden``."""
    shape = (side,) * w.dim
    off = centered_offset(w.shape, shape)
    st = strides(shape)
    fixed = {}
    for rel, c in zip(cell_coords(w.shape), w.cells):
        fixed[sum((a + o) * s for a, o, s in zip(rel, off, st))] = c
    return search_filling(shape, fixed, forbidden, symbols) is not None


def periodic_witness(P: Presentation, w: Pattern, max_period: int, cell_cap: int = 96) -> Optional[Pattern]:
    """A fundamental domain of a periodic point of a finite-type ``P`` that displays ``w``.

    Tries period vectors with each entry between w's extent and ``max_period``,
    fewest cells first.  The returned pattern tiles Z^d without creating a
    forbidden pattern.
    """
    if not P.is_finite_type:
        return None
    forb = P.forbidden.patterns
    ranges = [range(e, max(e, max_period) + 1) for e in w.shape]
    periods = sorted(itertools.product(*ranges), key=lambda s: (_prod(s), s))
    for per in periods:
        if _prod(per) > cell_cap:
            break
        st = strides(per)
        fixed = {sum(r * s for r, s in zip(rel, st)): c for rel, c in zip(cell_coords(w.shape), w.cells)}
        cells = search_filling(per, fixed, forb, list(P.alphabet), torus=True)
        if cells is not None:
            return Pattern(per, cells)
    return None


# ---------------------------------------------------------------------------
# exact 1D core


class TransferGraph:
    """De Bruijn-style graph of a 1D shift of finite type.

    Vertices are allowed words of length m-1 (m the longest forbidden length),
    edges allowed words of length m.  ``essential`` is the largest vertex set
    in which every vertex keeps an incoming and an outgoing edge.
    """

    def __init__(self, P: Presentation):
        if P.dim != 1:
            raise DimensionMismatch("the transfer graph needs a 1-dimensional presentation")
        if not P.is_finite_type:
            raise ShiftlabError("the transfer graph needs a finite forbidden set")
        self.alphabet = P.alphabet
        self.forbidden = [tuple(p.cells) for p in P.forbidden.patterns]
        self.m = max([len(f) for f in self.forbidden] + [1])
        self.k = self.m - 1
        syms = list(P.alphabet)
        fset = self.forbidden
        by_len: dict[int, set] = {}
        for f in fset:
            by_len.setdefault(len(f), set()).add(f)

        def ends_forbidden(u: tuple) -> bool:
            return any(len(u) >= L and u[len(u) - L:] in fs for L, fs in by_len.items())

        # grow allowed words symbol by symbol so only suffixes need checking
        level: list[tuple] = [()]
        for _ in range(self.k):
            level = [v + (a,) for v in level for a in syms if not ends_forbidden(v + (a,))]
        self.vertices = level
        self.succ: dict[tuple, list[tuple[str, tuple]]] = {v: [] for v in level}
        pred_count = {v: 0 for v in level}
        vset = set(level)
        for v in level:
            for a in syms:
                u = v + (a,)
                if ends_forbidden(u):
                    continue
                nxt = u[1:]
                if nxt in vset:
                    self.succ[v].append((a, nxt))
                    pred_count[nxt] += 1
        self.essential = self._prune(vset)

    def _prune(self, vset: set) -> frozenset:
        alive = set(vset)
        preds: dict[tuple, list[tuple]] = {v: [] for v in alive}
        for v in alive:
            for _, nxt in self.succ[v]:
                preds[nxt].append(v)
        indeg = {v: len(preds[v]) for v in alive}
        outdeg = {v: len(self.succ[v]) for v in alive}
        stack = [v for v in alive if indeg[v] == 0 or outdeg[v] == 0]
        while stack:
            v = stack.pop()
            if v not in alive:
                continue
            alive.discard(v)
            for _, nxt in self.succ[v]:
                if nxt in alive:
                    indeg[nxt] -= 1
                    if indeg[nxt] == 0:
                        stack.append(nxt)
            for p in preds[v]:
                if p in alive:
                    outdeg[p] -= 1
                    if outdeg[p] == 0:
                        stack.append(p)
        return frozenset(alive)

    def accepts(self, w: Sequence[str]) -> bool:
        w = tuple(w)
        if any(a not in self.alphabet for a in w):
            return False
        for f in self.forbidden:
            L = len(f)
            if any(w[i:i + L] == f for i in range(len(w) - L + 1)):
                return False
        k = self.k
        if len(w) >= k:
            return all(w[i:i + k] in self.essential for i in range(len(w) - k + 1))
        L = len(w)
        return any(v[i:i + L] == w for v in self.essential for i in range(k - L + 1))

    def count(self, n: int) -> int:
        if n <= 0:
            return 1 if self.essential else 0
        k = self.k
        if n < k:
            return len({v[i:i + n] for v in self.essential for i in range(k - n + 1)})
        ways = {v: 1 for v in self.essential}
        for _ in range(n - k):
            nxt: dict[tuple, int] = {}
            for v, c in ways.items():
                for _, u in self.succ[v]:
                    if u in self.essential:
                        nxt[u] = nxt.get(u, 0) + c
            ways = nxt
        return sum(ways.values())


def _require_1d_finite(P: Presentation) -> None:
    if P.dim != 1:
        raise DimensionMismatch("exact decision is only available in dimension 1")
    if not P.is_finite_type:
        raise ShiftlabError("exact decision needs a finite forbidden set")


def decide_language_1d(P: Presentation, w: Pattern) -> bool:
    """Exact membership of ``w`` in L(P) for a 1D shift of finite type."""
    _require_1d_finite(P)
    _check_over(w, P.alphabet, 1)
    return P.graph.accepts(w.cells)


def count_language_words_1d(P: Presentation, n: int) -> int:
    """Number of length-``n`` words in L(P)."""
    _require_1d_finite(P)
    return P.graph.count(n)


# ---------------------------------------------------------------------------
# budgeted membership


def in_colanguage(P: Presentation, w: Pattern, budget: int, *, use_exact: bool = True) -> Certificate:
    """Semi-decide ``w ∈ L^c(P)`` within ``budget``.

    IN comes only from containment or from an extension search in which every
    extension of ``w`` to some hypercube of side ``<= budget`` hits a forbidden
    pattern; it is sound for the true co-language.  OUT comes from the exact
    1D core or, for finite-type presentations in dimension >= 2, from a
    periodic witness with periods ``<= budget``.
    """
    _check_over(w, P.alphabet, P.dim)
    forb = P.forbidden_at(budget)
    for q in sorted(forb):
        if contains(w, q):
            return Certificate(Verdict.IN, budget, depth=0, witness=q, note="contains a forbidden pattern")
    if use_exact and P.dim == 1 and P.is_finite_type and decide_language_1d(P, w):
        return Certificate(Verdict.OUT, budget, note="exact 1D decision")
    syms = list(P.alphabet)
    for side in range(w.side, budget + 1):
        if not extension_exists(forb, w, side, syms):
            return Certificate(Verdict.IN, budget, depth=side, note="every extension dies")
    if use_exact and P.dim >= 2 and P.is_finite_type:
        per = periodic_witness(P, w, budget)
        if per is not None:
            return Certificate(Verdict.OUT, budget, witness=per, note="periodic witness")
    return unknown(budget)


def language_certificate(P, w: Pattern, budget: int) -> Certificate:
    """Membership in the language of any shift-like object exposing ``colanguage``."""
    return P.colanguage(w, budget).as_language()


def membership(P, w: Pattern, budget: int) -> Optional[bool]:
    """True / False / None (undecided) for ``w ∈ L(P)``."""
    return P.colanguage(w, budget).in_language


@dataclass
class ModelsReport:
    good: list[tuple[Pattern, Certificate]]
    bad: list[tuple[Pattern, Certificate]]

    @property
    def holds(self) -> Optional[bool]:
        """True if every G-word is certified in L and every B-word in L^c."""
        verdicts = [c.verdict for _, c in self.good + self.bad]
        if any(v is Verdict.OUT for v in verdicts):
            return False
        if all(v is Verdict.IN for v in verdicts):
            return True
        return None


def models(P, G: Iterable[Pattern], B: Iterable[Pattern], budget: int) -> ModelsReport:
    """Check P ⊨ L(G) ∧ L^c(B) pattern by pattern.

    G-certificates are about the language, B-certificates about the co-language.
    """
    good = [(g, language_certificate(P, g, budget)) for g in sorted(G)]
    bad = [(b, P.colanguage(b, budget)) for b in sorted(B)]
    return ModelsReport(good, bad)


# ---------------------------------------------------------------------------
# file format


def format_presentation(P: Presentation) -> str:
    if not P.is_finite_type:
        raise ShiftlabError("only finite-type presentations can be written to a file")
    lines = [f"dim: {P.dim}", "alphabet: " + " ".join(P.alphabet), "forbidden:"]
    body = "\n".join(format_pattern(p) for p in sorted(P.forbidden.patterns))
    return "\n".join(lines) + "\n" + body


def parse_presentation(text: str) -> Presentation:
    lines = text.splitlines()
    it = [(no, ln) for no, ln in enumerate(lines, start=1) if ln.strip()]
    if len(it) < 3:
        raise FormatError("a presentation needs 'dim:', 'alphabet:' and 'forbidden:' lines", len(lines), 1)
    (n1, l1), (n2, l2), (n3, l3) = it[:3]
    if not l1.strip().startswith("dim:"):
        raise FormatError("expected 'dim: d'", n1, 1)
    try:
        dim = int(l1.split(":", 1)[1])
    except ValueError:
        raise FormatError("dimension is not an integer", n1, 5) from None
    if not l2.strip().startswith("alphabet:"):
        raise FormatError("expected 'alphabet: s1 s2 ...'", n2, 1)
    try:
        alpha = Alphabet(l2.split(":", 1)[1].split())
    except ShiftlabError as e:
        raise FormatError(str(e), n2, 10) from None
    if l3.strip() != "forbidden:":
        raise FormatError("expected 'forbidden:'", n3, 1)
    pats = parse_patterns("\n".join(lines[n3:]), line_offset=n3)
    for no in range(n3 + 1, len(lines) + 1):
        ln = lines[no - 1]
        if ln.strip().startswith("dim:"):
            continue
        for tok in ln.split():
            if tok not in alpha:
                raise FormatError(f"symbol {tok!r} not in the alphabet", no, ln.index(tok) + 1)
    try:
        return Presentation(alpha, dim, FiniteSource(pats))
    except ShiftlabError as e:
        raise FormatError(str(e), n3, 1) from None


__all__ = [
    "Verdict", "Certificate", "FiniteSource", "GeneratorSource", "Presentation", "TransferGraph",
    "in_colanguage", "decide_language_1d", "count_language_words_1d", "quotient", "models", "recolor",
    "periodic_witness", "search_filling", "extension_exists", "membership", "language_certificate",
    "format_presentation", "parse_presentation", "ModelsReport", "SearchExhausted",
]
