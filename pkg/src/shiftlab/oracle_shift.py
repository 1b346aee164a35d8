"""Oracle-shift scaffolding and the combined S/T oracle, on finite windows.

Windows are 2D patterns: axis 0 runs along a row, axis 1 (the last axis)
stacks rows.  Window-level checks are implemented for d = 1 content rows;
``is_valid_pattern`` works in any dimension.

Every family is a window predicate that is witnessed by a sub-rectangle,
so "the window contains a forbidden word of the family" and "the predicate
fires on the window" coincide.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

from .patterns import (
    PAD,
    PAD_T,
    RESERVED,
    Alphabet,
    AlphabetMismatch,
    Pattern,
    Rect,
    ShiftlabError,
    all_patterns,
)
from .presentations import Presentation, Verdict

SCAFFOLD = ("Grid", "FixType", "Periodicity", "Recurrence", "SubwordClosed")
COMBINED = ("Alternation", "Synch", "OracleS", "OracleT", "CodingI", "CodingJ")
ALL_TAGS = SCAFFOLD + COMBINED


def period(i: int, k: int, d: int = 1) -> int:
    """Horizontal period of a type-i row over a content alphabet of size k."""
    return 2 ** i * k ** (2 ** (d * i))


def visible_span(i: int, k: int, d: int = 1) -> int:
    """Row length guaranteed to show every block of a type-i row in full."""
    return period(i, k, d) + 2 ** i - 2


def row_type(r: int, vphase: int = 0) -> int:
    """Type of row r in the canonical interleaving: 1 + the 2-adic valuation of r+1."""
    n = r + 1 + vphase
    return 1 + (n & -n).bit_length() - 1


def coding_side(l: int, k: int, d: int = 1) -> int:
    """Sufficient hypercube side for an implication whose longest word has length l."""
    return 2 ** l * k ** (2 ** (d * l))


def is_valid_pattern(w: Pattern, i: int, boundary: str = PAD, content: Optional[Iterable[str]] = None) -> bool:
    n = 2 ** i + 1
    if any(e != n for e in w.shape):
        return False
    allowed = None if content is None else set(content)
    for rel in itertools.product(range(n), repeat=w.dim):
        c = w[rel]
        edge = any(a in (0, n - 1) for a in rel)
        if edge:
            if c != boundary:
                return False
        elif c in RESERVED or (allowed is not None and c not in allowed):
            return False
    return True


# ---------------------------------------------------------------------------
# row helpers


@dataclass(frozen=True)
class RowCtx:
    boundary: str
    content: frozenset
    k: int


def valid_occurrences(row: Sequence[str], i: int, ctx: RowCtx) -> list[int]:
    n = 2 ** i
    b, cont = ctx.boundary, ctx.content
    out = []
    for x in range(len(row) - n):
        if row[x] == b and row[x + n] == b and all(c in cont for c in row[x + 1:x + n]):
            out.append(x)
    return out


def _segment_consistent(seg: Sequence[str], i: int, b: str) -> bool:
    n = 2 ** i
    return any(all((c == b) == ((j - p) % n == 0) for j, c in enumerate(seg)) for p in range(n))


def _find(row: Sequence[str], word: Sequence[str]) -> list[int]:
    L = len(word)
    word = tuple(word)
    return [x for x in range(len(row) - L + 1) if tuple(row[x:x + L]) == word]


def free_segments(row: Sequence[str], words: Iterable[Sequence[str]], min_len: int) -> list[tuple[int, int]]:
    """Maximal segments of ``row`` of length ≥ min_len containing no full occurrence of any word."""
    X = len(row)
    occ = sorted((p, p + len(w) - 1) for w in words for p in _find(row, w))
    out = []
    for a in [0] + [p + 1 for p, _ in occ]:
        b = min((e - 1 for p, e in occ if p >= a), default=X - 1)
        if b - a + 1 >= min_len and not (out and out[-1][1] >= b):
            out.append((a, b))
    return out


def _free_segment(row: Sequence[str], words: Iterable[Sequence[str]], lo: int, hi: int,
                  min_len: int) -> Optional[tuple[int, int]]:
    """A segment [a,b] ⊇ [lo,hi] of length ≥ min_len containing no occurrence of any word."""
    for a, b in free_segments(row, words, min_len):
        if a <= lo and hi <= b:
            return a, b
    return None


def _types(X: int, H: int) -> range:
    top = max(X, H)
    return range(1, max(1, (top - 1).bit_length()) + 1)


# ---------------------------------------------------------------------------
# family predicates over a stack of rows
# Each returns witnesses (i, x0, y0, x1, y1) in stack coordinates.


def fam_grid(rows, ctx: RowCtx, i: int):
    n = 2 ** i + 1
    H, X = len(rows), len(rows[0])
    if n > X or n > H:
        return []
    good = [[_segment_consistent(r[x:x + n], i, ctx.boundary) for x in range(X - n + 1)] for r in rows]
    out = []
    for y0 in range(H - n + 1):
        for x0 in range(X - n + 1):
            if not any(good[y][x0] for y in range(y0, y0 + n)):
                out.append((i, x0, y0, x0 + n - 1, y0 + n - 1))
    return out


def fam_fixtype(rows, ctx: RowCtx, i: int):
    n = 2 ** i
    out = []
    for y, r in enumerate(rows):
        for x0 in valid_occurrences(r, i, ctx):
            bad = [x for x, c in enumerate(r) if (c == ctx.boundary) != ((x - x0) % n == 0)]
            if bad:
                xb = min(bad, key=lambda x: (abs(x - x0), x))
                out.append((i, min(x0, xb), y, max(x0 + n, xb), y))
    return out


def fam_periodicity(rows, ctx: RowCtx, i: int):
    P = period(i, ctx.k)
    out = []
    for y, r in enumerate(rows):
        if len(r) <= P:
            continue
        occ = valid_occurrences(r, i, ctx)
        if not occ:
            continue
        for x in range(len(r) - P):
            if r[x] != r[x + P]:
                x0 = occ[0]
                out.append((i, min(x, x0), y, max(x + P, x0 + 2 ** i), y))
                break
    return out


def fam_recurrence(rows, ctx: RowCtx, i: int):
    n = 2 ** i
    out = []
    for y, r in enumerate(rows):
        if y + n >= len(rows):
            break
        up = rows[y + n]
        for x0 in valid_occurrences(r, i, ctx):
            if tuple(up[x0:x0 + n + 1]) != tuple(r[x0:x0 + n + 1]):
                out.append((i, x0, y, x0 + n, y + n))
    return out


def fam_subword(rows, ctx: RowCtx, i: int):
    if i < 2:
        return []
    L = 2 ** (i - 1) - 1
    need = visible_span(i - 1, ctx.k)
    X = len(rows[0])
    if X < need:
        return []
    lower = [(y, valid_occurrences(r, i - 1, ctx)) for y, r in enumerate(rows)]
    lower = [(y, occ) for y, occ in lower if occ]
    span = 2 ** (i - 1)
    memo: dict = {}

    def witness(s):
        if s not in memo:
            memo[s] = None
            for y1, occ in lower:
                for a, b in free_segments(rows[y1], [s], need):
                    if any(a <= x1 and x1 + span <= b for x1 in occ):
                        memo[s] = (y1, (a, b))
                        break
                if memo[s]:
                    break
        return memo[s]

    out = []
    for y, r in enumerate(rows):
        for x0 in valid_occurrences(r, i, ctx):
            subs = sorted({tuple(r[x0 + 1 + j:x0 + 1 + j + L]) for j in range(span + 1)})
            hit = next((h for h in map(witness, subs) if h), None)
            if hit:
                y1, (a, b) = hit
                out.append((i, min(a, x0), min(y, y1), max(b, x0 + 2 ** i), max(y, y1)))
    return out


FAMILY_FNS = {
    "Grid": fam_grid,
    "FixType": fam_fixtype,
    "Periodicity": fam_periodicity,
    "Recurrence": fam_recurrence,
    "SubwordClosed": fam_subword,
}


def content_runs(row: Sequence[str], content: frozenset) -> list[tuple[int, int]]:
    runs, start = [], None
    for x, c in enumerate(list(row) + [None]):
        if c in content:
            if start is None:
                start = x
        elif start is not None:
            runs.append((start, x - 1))
            start = None
    return runs


class _ColangCache:
    def __init__(self, S, stage: int):
        self.S, self.stage, self.memo = S, stage, {}

    def excluded(self, word: tuple) -> bool:
        if word not in self.memo:
            self.memo[word] = self.S.colanguage(Pattern((len(word),), word), self.stage).verdict is Verdict.IN
        return self.memo[word]


def colanguage_hits(rows, ctx: RowCtx, S, stage: int):
    """Leftmost shortest In-certified word of L^c(S) inside each content run."""
    if S is None or stage < 1:
        return []
    cache = _ColangCache(S, stage)
    out = []
    for y, r in enumerate(rows):
        for a, b in content_runs(r, ctx.content):
            found = None
            for L in range(1, min(stage, b - a + 1) + 1):
                for x in range(a, b - L + 2):
                    if cache.excluded(tuple(r[x:x + L])):
                        found = (x, x + L - 1)
                        break
                if found:
                    break
            if found:
                out.append((0, found[0], y, found[1], y))
    return out


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True, order=True)
class Violation:
    tag: str
    location: tuple
    i: int = 0
    subpattern: Optional[Pattern] = field(default=None, compare=False)

    @property
    def rect(self) -> Rect:
        (x0, y0), (x1, y1) = self.location
        return Rect((x0, y0), (x1, y1))

    def line(self) -> str:
        (x0, y0), (x1, y1) = self.location
        extra = f" i={self.i}" if self.i else ""
        return f"{self.tag} [{x0}..{x1},{y0}..{y1}]{extra}"


@dataclass
class ViolationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.violations

    @property
    def tags(self) -> frozenset:
        return frozenset(v.tag for v in self.violations)

    def lines(self) -> list[str]:
        return [v.line() for v in self.violations]


def _emit(window: Pattern, tag: str, hits, ymap: Sequence[int]) -> list[Violation]:
    out = []
    for i, x0, y0, x1, y1 in hits:
        lo = (x0, ymap[y0])
        hi = (x1, ymap[y1])
        sub = window.sub(lo, (hi[0] - lo[0] + 1, hi[1] - lo[1] + 1))
        out.append(Violation(tag, (lo, hi), i, sub))
    return out


def _finish(vs: list[Violation]) -> ViolationReport:
    seen, out = set(), []
    for v in sorted(vs):
        key = (v.tag, v.location, v.i)
        if key not in seen:
            seen.add(key)
            out.append(v)
    return ViolationReport(out)


def _parse_families(families) -> set[str]:
    if families is None or families == "all":
        return set(ALL_TAGS)
    fams = set(families)
    bad = fams - set(ALL_TAGS)
    if bad:
        raise ShiftlabError(f"unknown families: {sorted(bad)}")
    return fams


def _require_window(window: Pattern) -> None:
    if window.dim != 2:
        raise ShiftlabError("oracle windows are 2-dimensional (d = 1 rows)")


def _stack_violations(window, rows, ymap, ctx, fams, tag_override=None, S=None, stage=0):
    vs = []
    X, H = len(rows[0]), len(rows)
    for fam in SCAFFOLD:
        if fam not in fams:
            continue
        for i in _types(X, H):
            vs += _emit(window, tag_override or fam, FAMILY_FNS[fam](rows, ctx, i), ymap)
    return vs


def scaffold_check(window: Pattern, families=None, stage: int = 0, S: Optional[Presentation] = None,
                   alphabet: Optional[Iterable[str]] = None) -> ViolationReport:
    """All family violations of a single-oracle window.

    The content alphabet is S's, else ``alphabet``, else the non-reserved
    symbols of the window.  When S is given, In-certified words of L^c(S)
    at budget ``stage`` inside content runs are reported as OracleS.
    """
    _require_window(window)
    fams = _parse_families(families)
    if S is not None:
        alpha = S.alphabet
    elif alphabet is not None:
        alpha = Alphabet(alphabet)
    else:
        alpha = Alphabet(s for s in sorted(window.symbols()) if s not in RESERVED)
    content = frozenset(alpha.content())
    extra = window.symbols() - content - {PAD}
    if extra:
        raise AlphabetMismatch(f"window uses symbols outside Σ ∪ {{#}}: {sorted(extra)}")
    ctx = RowCtx(PAD, content, max(1, len(content)))
    rows = window.rows()
    ymap = list(range(len(rows)))
    vs = _stack_violations(window, rows, ymap, ctx, fams)
    if "OracleS" in fams:
        vs += _emit(window, "OracleS", colanguage_hits(rows, ctx, S, stage), ymap)
    return _finish(vs)


# ---------------------------------------------------------------------------
# synthesis


def _certified_words(S, L: int, budget: int) -> Iterator[tuple]:
    for cells in itertools.product(list(S.alphabet.content()), repeat=L):
        if S.colanguage(Pattern((L,), cells), budget).verdict is Verdict.OUT:
            yield cells


class _RowContent:
    """Lazy WordCode-ordered list of certified words of one length."""

    def __init__(self, S, L: int, budget: int):
        self.it = _certified_words(S, L, budget)
        self.words: list[tuple] = []
        self.done = False

    def get(self, idx: int) -> Optional[tuple]:
        while not self.done and len(self.words) <= idx:
            try:
                self.words.append(next(self.it))
            except StopIteration:
                self.done = True
        if idx < len(self.words):
            return self.words[idx]
        if not self.words:
            return None
        return self.words[idx % len(self.words)]


def synthesize_row(S, i: int, width: int, budget: int, hphase: int = 0, boundary: str = PAD,
                   cache: Optional[dict] = None) -> Optional[list[str]]:
    n = 2 ** i
    k = len(S.alphabet.content())
    slots = k ** n
    key = (i, budget)
    if cache is not None and key in cache:
        src = cache[key]
    else:
        src = _RowContent(S, n - 1, budget)
        if cache is not None:
            cache[key] = src
    row = []
    for x in range(width):
        xp = x + hphase
        if xp % n == 0:
            row.append(boundary)
            continue
        word = src.get((xp // n) % slots)
        if word is None:
            return None
        row.append(word[xp % n - 1])
    return row


def synthesize_window(S: Presentation, width: int, height: int, budget: int, hphase: int = 0,
                      vphase: int = 0, boundary: str = PAD) -> Optional[Pattern]:
    """Canonical window of O_S, or None when some row type has no certified word."""
    if S.dim != 1:
        raise ShiftlabError("window synthesis is implemented for 1-dimensional S")
    if width < 1 or height < 1:
        raise ShiftlabError("window extents must be positive")
    cache: dict = {}
    rows = []
    for r in range(height):
        row = synthesize_row(S, row_type(r, vphase), width, budget, hphase, boundary, cache)
        if row is None:
            return None
        rows.append(row)
    return Pattern((width, height), [c for r in rows for c in r])


# ---------------------------------------------------------------------------
# forbidden-pattern generation


def _family_shapes(family: str, i: int, size_bound: int, k: int) -> Iterator[tuple[int, int]]:
    n = 2 ** i + 1
    if family in ("Grid", "Recurrence"):
        if n <= size_bound:
            yield (n, n)
    elif family == "FixType":
        for w in range(n + 1, size_bound + 1):
            yield (w, 1)
    elif family == "Periodicity":
        for w in range(period(i, k) + 1, size_bound + 1):
            yield (w, 1)
    elif family == "SubwordClosed":
        if i >= 2:
            for h in range(1, size_bound + 1):
                for w in range(max(n, visible_span(i - 1, k)), size_bound + 1):
                    yield (w, h)
    elif family == "OracleS":
        for w in range(1, size_bound + 1):
            yield (w, 1)
    else:
        raise ShiftlabError(f"no generator for family {family!r}")


def forbids(family: str, i: int, p: Pattern, ctx: RowCtx, S=None, stage: int = 0) -> bool:
    """Whether the single-oracle family at parameter i fires on pattern p."""
    rows = p.rows()
    if family == "OracleS":
        return bool(colanguage_hits(rows, ctx, S, stage))
    return bool(FAMILY_FNS[family](rows, ctx, i))


def generate_forbidden(family: str, i: int, size_bound: int, alphabet: Iterable[str], S=None,
                       stage: int = 0, limit: Optional[int] = None) -> Iterator[Pattern]:
    """Forbidden 2D patterns of the family at parameter i with side ≤ size_bound.

    Patterns come shape by shape (the family's minimal shapes) in the
    lexicographic order of ``all_patterns``; the stream is lazy and stops
    after ``limit`` patterns when given.
    """
    content = frozenset(Alphabet(alphabet).content())
    ctx = RowCtx(PAD, content, max(1, len(content)))
    symbols = sorted(content) + [PAD]
    count = 0
    for shape in _family_shapes(family, i, size_bound, ctx.k):
        for p in all_patterns(shape, symbols):
            if forbids(family, i, p, ctx, S, stage):
                yield p
                count += 1
                if limit is not None and count >= limit:
                    return


# ---------------------------------------------------------------------------
# the combined oracle


@dataclass(frozen=True)
class Axiom:
    """An implication: ``pos`` T-words present, ``neg`` T-words that must appear, ⟹ S-word ``word``.

    Coding I uses ``neg = ∅`` and excludes ``word`` when ``pos`` is absent;
    Coding J requires ``word`` whenever ``neg`` appears and ``pos`` is absent.
    """

    kind: str
    pos: frozenset
    word: Pattern
    neg: frozenset = frozenset()

    @property
    def longest(self) -> int:
        return max(w.side for w in itertools.chain([self.word], self.pos, self.neg))

    @property
    def min_type(self) -> int:
        return max(1, math.ceil(math.log2(self.longest + 1)))


class CombinedOracle:
    """Q over Σ_S ∪ Σ_T ∪ {#,%}: S-rows (boundary #) directly below T-rows (boundary %)."""

    def __init__(self, sigma_S: Iterable[str], T: Presentation, axioms: Iterable[Axiom] = ()):
        self.sigma_S = Alphabet(sigma_S).content()
        self.T = T
        self.sigma_T = T.alphabet.content()
        if set(self.sigma_S) & set(self.sigma_T):
            raise AlphabetMismatch("S and T alphabets must be disjoint; recolor first")
        if T.dim != 1:
            raise ShiftlabError("the combined oracle is implemented for d = 1")
        self.axioms = tuple(axioms)
        for ax in self.axioms:
            if ax.kind not in ("I", "J"):
                raise ShiftlabError(f"axiom kind {ax.kind!r}")
            if not ax.word.symbols() <= set(self.sigma_S):
                raise AlphabetMismatch(f"axiom conclusion {ax.word} is not over Σ_S")
            for v in itertools.chain(ax.pos, ax.neg):
                if not v.symbols() <= set(self.sigma_T):
                    raise AlphabetMismatch(f"axiom hypothesis {v} is not over Σ_T")
        self.ctx_S = RowCtx(PAD, frozenset(self.sigma_S), max(1, len(self.sigma_S)))
        self.ctx_T = RowCtx(PAD_T, frozenset(self.sigma_T), max(1, len(self.sigma_T)))
        self.alphabet = Alphabet(list(self.sigma_S) + list(self.sigma_T) + [PAD, PAD_T])
        self.dim = 2

    @classmethod
    def from_operators(cls, sigma_S, T, Wi, Wj, stage: int) -> "CombinedOracle":
        from .enum_red import WordCode, build_IJ

        I, J = build_IJ(Wi, Wj, stage, WordCode(sigma_S), WordCode(T.alphabet.content()))
        axioms = [Axiom("I", imp.pos, imp.word) for imp in I]
        axioms += [Axiom("J", imp.pos, imp.word, imp.neg) for imp in J]
        return cls(sigma_S, T, axioms)

    def side_for(self, ax: Axiom) -> int:
        return coding_side(ax.longest, max(self.ctx_S.k, self.ctx_T.k))

    # window checks ------------------------------------------------------

    def _kind(self, c: str) -> str:
        if c == PAD or c in self.ctx_S.content:
            return "S"
        if c == PAD_T or c in self.ctx_T.content:
            return "T"
        raise AlphabetMismatch(f"symbol {c!r} is in neither oracle alphabet")

    def check(self, window: Pattern, stage: int = 0, families=None) -> ViolationReport:
        _require_window(window)
        fams = _parse_families(families)
        rows = window.rows()
        X, H = window.shape
        kinds = [[self._kind(c) for c in r] for r in rows]
        vs: list[Violation] = []
        for y in range(H):
            for x in range(X):
                if "Alternation" in fams:
                    if x + 1 < X and kinds[y][x] != kinds[y][x + 1]:
                        vs += _emit(window, "Alternation", [(0, x, y, x + 1, y)], range(H))
                    if y + 1 < H and kinds[y][x] == kinds[y + 1][x]:
                        vs += _emit(window, "Alternation", [(0, x, y, x, y + 1)], range(H))
                if "Synch" in fams and y + 1 < H and kinds[y][x] == "S" and kinds[y + 1][x] == "T":
                    if (rows[y][x] == PAD) != (rows[y + 1][x] == PAD_T):
                        vs += _emit(window, "Synch", [(0, x, y, x, y + 1)], range(H))
        q = 0 if kinds[0][0] == "S" else 1
        s_ys = list(range(q, H, 2))
        t_ys = list(range(1 - q, H, 2))
        s_rows = [rows[y] for y in s_ys]
        t_rows = [rows[y] for y in t_ys]
        scaffold = set(SCAFFOLD)
        if "OracleS" in fams and s_rows:
            vs += _stack_violations(window, s_rows, s_ys, self.ctx_S, scaffold, "OracleS")
        if "OracleT" in fams and t_rows:
            vs += _stack_violations(window, t_rows, t_ys, self.ctx_T, scaffold, "OracleT")
            vs += _emit(window, "OracleT", colanguage_hits(t_rows, self.ctx_T, self.T, stage), t_ys)
        for y in s_ys:
            if y + 1 < H:
                vs += self._coding(window, rows[y], rows[y + 1], y, fams)
        return _finish(vs)

    def _coding(self, window, srow, trow, y, fams) -> list[Violation]:
        out = []
        X = len(srow)
        if any(self._kind(c) != "S" for c in srow) or any(self._kind(c) != "T" for c in trow):
            return out
        for ax in self.axioms:
            tag = "CodingI" if ax.kind == "I" else "CodingJ"
            if tag not in fams:
                continue
            for i in _types(X, 2):
                if i < ax.min_type:
                    continue
                s_occ = valid_occurrences(srow, i, self.ctx_S)
                t_occ = valid_occurrences(trow, i, self.ctx_T)
                if not s_occ or not t_occ:
                    continue
                pos = [v.cells for v in ax.pos]
                t_free = None
                for x1 in t_occ:
                    t_free = _free_segment(trow, pos, x1, x1 + 2 ** i, visible_span(i, self.ctx_T.k))
                    if t_free:
                        break
                if not t_free:
                    continue
                if ax.kind == "I":
                    hits = _find(srow, ax.word.cells)
                    if hits:
                        x = hits[0]
                        lo = min(x, t_free[0])
                        hi = max(x + ax.word.side - 1, t_free[1])
                        out += _emit(window, tag, [(i, lo, y, hi, y + 1)], range(len(window.rows())))
                        break
                else:
                    shown = [p for v in ax.neg for p in _find(trow, v.cells)]
                    if ax.neg and not shown:
                        continue
                    s_free = None
                    for x1 in s_occ:
                        s_free = _free_segment(srow, [ax.word.cells], x1, x1 + 2 ** i,
                                               visible_span(i, self.ctx_S.k))
                        if s_free:
                            break
                    if s_free:
                        lo = min(s_free[0], t_free[0], *shown) if shown else min(s_free[0], t_free[0])
                        hi = max(s_free[1], t_free[1])
                        if shown:
                            hi = max(hi, max(shown) + max(v.side for v in ax.neg) - 1)
                        out += _emit(window, tag, [(i, lo, y, hi, y + 1)], range(len(window.rows())))
                        break
        return out

    def synthesize(self, S: Presentation, width: int, height: int, budget: int,
                   hphase: int = 0) -> Optional[Pattern]:
        """Interleave a canonical O_S window (even rows) with a canonical O_T window (odd rows)."""
        if not S.alphabet.content().issubset(self.sigma_S):
            raise AlphabetMismatch("S must be over Σ_S")
        h = (height + 1) // 2
        ws = synthesize_window(S, width, h, budget, hphase)
        wt = synthesize_window(self.T, width, h, budget, hphase, boundary=PAD_T)
        if ws is None or wt is None:
            return None
        rows = []
        for k in range(h):
            rows.append(ws.rows()[k])
            rows.append(wt.rows()[k])
        rows = rows[:height]
        return Pattern((width, height), [c for r in rows for c in r])

    def presentation(self, per_family_limit: int = 64) -> Presentation:
        """The effectively closed Q with a lazily truncated generator of forbidden words.

        Stage t lists the local Alternation and Synch dominoes in full and, for
        the scaffold families, at most ``per_family_limit`` patterns of side ≤ t
        each; window membership is decided by :meth:`check`.
        """
        from .presentations import GeneratorSource

        S_alpha = list(self.sigma_S) + [PAD]
        T_alpha = list(self.sigma_T) + [PAD_T]

        def stage(t: int):
            out = []
            for a in S_alpha + T_alpha:
                for b in S_alpha + T_alpha:
                    sa, sb = a in S_alpha, b in S_alpha
                    if sa != sb:
                        out.append(Pattern((2, 1), (a, b)))
                    if sa == sb:
                        out.append(Pattern((1, 2), (a, b)))
                    if sa and not sb and (a == PAD) != (b == PAD_T):
                        out.append(Pattern((1, 2), (a, b)))
            for fam in ("Grid", "FixType", "Recurrence"):
                for i in range(1, max(1, t.bit_length()) + 1):
                    out += list(generate_forbidden(fam, i, min(t, 3), self.sigma_S, limit=per_family_limit))
            return out

        return Presentation(self.alphabet, 2, GeneratorSource(stage, "combined"))


def combined_presentation(sigma_S, T: Presentation, Wi, Wj, stage: int) -> CombinedOracle:
    return CombinedOracle.from_operators(sigma_S, T, Wi, Wj, stage)


# ---------------------------------------------------------------------------
# rendering


def _row_annotations(window: Pattern) -> list[str]:
    out = []
    for r in window.rows():
        label = ""
        for b in (PAD, PAD_T):
            content = frozenset(c for c in r if c not in RESERVED)
            ctx = RowCtx(b, content, max(1, len(content)))
            for i in range(1, max(1, len(r) - 1).bit_length() + 1):
                if valid_occurrences(r, i, ctx):
                    label = f"{'S' if b == PAD else 'T'}{i}"
                    break
            if label:
                break
        out.append(label)
    return out


def render_window(window: Optional[Pattern], fmt: str = "ascii") -> str:
    """Deterministic ascii or svg rendering; the top row is printed first."""
    if fmt == "ascii":
        if window is None:
            return ""
        _require_window(window)
        wmax = max(len(c) for c in window.cells)
        sep = "" if wmax == 1 else " "
        lines = [sep.join(c.ljust(wmax) for c in r).rstrip() for r in reversed(window.rows())]
        return "\n".join(lines) + "\n"
    if fmt == "svg":
        return _svg(window)
    raise ShiftlabError(f"unknown render format {fmt!r}")


_COLORS = {"S": "#cfe2ff", "T": "#d1f2d6", "#": "#6c757d", "%": "#2f6b3a"}


def _svg(window: Optional[Pattern]) -> str:
    cell = 18
    head = '<?xml version="1.0" encoding="UTF-8"?>\n'
    if window is None:
        return head + '<svg xmlns="http://www.w3.org/2000/svg" width="0" height="0"></svg>\n'
    _require_window(window)
    X, H = window.shape
    notes = _row_annotations(window)
    W = X * cell + 40
    parts = [head, f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H * cell}" '
                   f'font-family="monospace" font-size="11">\n']
    for k, r in enumerate(reversed(window.rows())):
        y = k * cell
        tee = any(c == PAD_T for c in r) or notes[H - 1 - k].startswith("T")
        for x, c in enumerate(r):
            fill = _COLORS.get(c) or _COLORS["T" if tee else "S"]
            parts.append(f'<rect x="{x * cell}" y="{y}" width="{cell}" height="{cell}" '
                         f'fill="{fill}" stroke="#ffffff"/>')
            if c not in RESERVED:
                parts.append(f'<text x="{x * cell + 5}" y="{y + 13}">{c}</text>')
        if notes[H - 1 - k]:
            parts.append(f'<text x="{X * cell + 4}" y="{y + 13}">{notes[H - 1 - k]}</text>')
        parts.append("\n")
    parts.append("</svg>\n")
    return "".join(parts)
