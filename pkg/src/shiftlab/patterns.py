"""Finite d-dimensional words on integer rectangles.

A :class:`Pattern` is stored origin-anchored: ``shape`` gives the extent along
each axis and ``cells`` is the flat tuple of symbols with axis 0 varying
fastest.  The absolute position of the domain is kept in ``origin`` but plays
no part in equality, since language questions are translation invariant.

Symbols are short display strings.  ``"#"`` and ``"%"`` are the reserved
padding symbols; variables live in their own namespace (:class:`Var`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence, Union

PAD = "#"
PAD_T = "%"
RESERVED = (PAD, PAD_T)
# Dedicated ids for the padding symbols, above every content id.
RESERVED_IDS = {PAD: 1 << 30, PAD_T: (1 << 30) + 1}


class ShiftlabError(ValueError):
    """Base class for domain errors raised by shiftlab."""


class DimensionMismatch(ShiftlabError):
    pass


class AlphabetMismatch(ShiftlabError):
    pass


class FormatError(ShiftlabError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True, order=True)
class Var:
    """A variable cell.  Never equal to any alphabet symbol."""

    name: str

    def __str__(self) -> str:
        return "?" + self.name


Cell = Union[str, Var]


def _check_symbol(sym: str) -> None:
    if not isinstance(sym, str) or not sym or any(c.isspace() for c in sym) or sym.startswith("?"):
        raise ShiftlabError(f"invalid symbol name {sym!r}")


@dataclass(frozen=True)
class Alphabet:
    """Finite ordered set of symbols.

    Content symbols keep the order they were given in and get ids 0, 1, ...;
    the padding symbols always sort last under their dedicated ids.
    """

    symbols: tuple[str, ...]

    def __init__(self, symbols: Iterable[str] = ()):
        seen: list[str] = []
        for s in symbols:
            _check_symbol(s)
            if s not in seen:
                seen.append(s)
        content = [s for s in seen if s not in RESERVED]
        reserved = [s for s in RESERVED if s in seen]
        object.__setattr__(self, "symbols", tuple(content + reserved))

    def __contains__(self, sym: object) -> bool:
        return sym in self._set

    @property
    def _set(self) -> frozenset:
        cached = self.__dict__.get("_symset")
        if cached is None:
            cached = frozenset(self.symbols)
            object.__setattr__(self, "_symset", cached)
        return cached

    def __iter__(self) -> Iterator[str]:
        return iter(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def id(self, sym: str) -> int:
        if sym in RESERVED_IDS:
            return RESERVED_IDS[sym]
        return self.symbols.index(sym)

    def content(self) -> "Alphabet":
        return Alphabet(s for s in self.symbols if s not in RESERVED)

    def union(self, other: Iterable[str]) -> "Alphabet":
        return Alphabet(list(self.symbols) + list(other))

    def issubset(self, other: "Alphabet") -> bool:
        return all(s in other for s in self.symbols)

    def __repr__(self) -> str:
        return "Alphabet(" + " ".join(self.symbols) + ")"


@dataclass(frozen=True)
class Rect:
    """Product of integer intervals ``[lo_i, hi_i]``."""

    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi) or not self.lo:
            raise ShiftlabError("a rectangle needs d >= 1 matching bounds")
        if any(a > b for a, b in zip(self.lo, self.hi)):
            raise ShiftlabError(f"empty interval in {self.lo}..{self.hi}")

    @classmethod
    def of_shape(cls, shape: Sequence[int], origin: Sequence[int] | None = None) -> "Rect":
        origin = tuple(origin) if origin is not None else (0,) * len(shape)
        return cls(origin, tuple(o + n - 1 for o, n in zip(origin, shape)))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(b - a + 1 for a, b in zip(self.lo, self.hi))

    @property
    def size(self) -> int:
        n = 1
        for e in self.shape:
            n *= e
        return n

    def points(self) -> Iterator[tuple[int, ...]]:
        """Lattice points in cell order (axis 0 fastest)."""
        ranges = [range(a, b + 1) for a, b in zip(self.lo, self.hi)]
        for p in itertools.product(*reversed(ranges)):
            yield tuple(reversed(p))


def strides(shape: Sequence[int]) -> tuple[int, ...]:
    out = []
    acc = 1
    for e in shape:
        out.append(acc)
        acc *= e
    return tuple(out)


def cell_coords(shape: Sequence[int]) -> list[tuple[int, ...]]:
    """Relative coordinates of every cell, in flat order."""
    return list(Rect.of_shape(shape).points())


class Pattern:
    """A total assignment of symbols (or variables) to a rectangle."""

    __slots__ = ("shape", "cells", "origin", "_hash")

    def __init__(self, shape: Sequence[int], cells: Sequence[Cell], origin: Sequence[int] | None = None):
        shape = tuple(int(e) for e in shape)
        if not shape or any(e < 1 for e in shape):
            raise ShiftlabError(f"invalid pattern shape {shape}")
        cells = tuple(cells)
        n = 1
        for e in shape:
            n *= e
        if len(cells) != n:
            raise ShiftlabError(f"shape {shape} needs {n} cells, got {len(cells)}")
        self.shape = shape
        self.cells = cells
        self.origin = tuple(origin) if origin is not None else (0,) * len(shape)
        if len(self.origin) != len(shape):
            raise DimensionMismatch("origin and shape disagree on dimension")
        self._hash = hash((shape, cells))

    # construction helpers -------------------------------------------------

    @classmethod
    def word(cls, text: str | Sequence[Cell]) -> "Pattern":
        """1D pattern from ``"a b a"``, ``"aba"`` (single-char symbols) or a sequence."""
        if isinstance(text, str):
            toks = text.split() if any(c.isspace() for c in text.strip()) else list(text.strip())
            cells = [_parse_cell(t) for t in toks]
        else:
            cells = list(text)
        return cls((len(cells),), cells)

    @classmethod
    def grid(cls, rows: Sequence[str | Sequence[Cell]]) -> "Pattern":
        """2D pattern; ``rows[k]`` is the hyper-row at axis-1 coordinate k."""
        parsed = [cls.word(r).cells for r in rows]
        width = len(parsed[0])
        if any(len(r) != width for r in parsed):
            raise ShiftlabError("ragged rows")
        return cls((width, len(parsed)), [c for r in parsed for c in r])

    # basic accessors ------------------------------------------------------

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return len(self.cells)

    @property
    def side(self) -> int:
        return max(self.shape)

    @property
    def domain(self) -> Rect:
        return Rect.of_shape(self.shape, self.origin)

    def __getitem__(self, rel: Sequence[int]) -> Cell:
        idx = 0
        acc = 1
        for c, e in zip(rel, self.shape):
            if not 0 <= c < e:
                raise IndexError(rel)
            idx += c * acc
            acc *= e
        return self.cells[idx]

    def symbols(self) -> frozenset[str]:
        return frozenset(c for c in self.cells if not isinstance(c, Var))

    def variables(self) -> frozenset[Var]:
        return frozenset(c for c in self.cells if isinstance(c, Var))

    def anchored(self) -> "Pattern":
        return Pattern(self.shape, self.cells)

    def rows(self) -> list[tuple[Cell, ...]]:
        """Hyper-rows (runs along axis 0) in flat order."""
        w = self.shape[0]
        return [self.cells[i:i + w] for i in range(0, len(self.cells), w)]

    def sub(self, lo: Sequence[int], shape: Sequence[int]) -> "Pattern":
        """Restriction to the box at relative corner ``lo`` with ``shape``."""
        st = strides(self.shape)
        base = sum(a * s for a, s in zip(lo, st))
        deltas = [sum(c * s for c, s in zip(rel, st)) for rel in cell_coords(shape)]
        cells = [self.cells[base + d] for d in deltas]
        return Pattern(shape, cells, tuple(o + a for o, a in zip(self.origin, lo)))

    def embed(self, dim: int) -> "Pattern":
        """View a pattern in a higher dimension via Z^k ⊆ Z^d."""
        if dim < self.dim:
            raise DimensionMismatch(f"cannot embed dimension {self.dim} into {dim}")
        pad = dim - self.dim
        return Pattern(self.shape + (1,) * pad, self.cells, self.origin + (0,) * pad)

    def recolor(self, mapping: Mapping[str, str]) -> "Pattern":
        return Pattern(self.shape, [mapping.get(c, c) if isinstance(c, str) else c for c in self.cells], self.origin)

    # equality --------------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Pattern):
            return NotImplemented
        return self.shape == other.shape and self.cells == other.cells

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "Pattern") -> bool:
        return self.sort_key() < other.sort_key()

    def sort_key(self) -> tuple:
        return (self.size, self.shape, tuple(str(c) for c in self.cells))

    def __repr__(self) -> str:
        if self.dim == 1:
            return f"Pattern({' '.join(map(str, self.cells))!r})"
        return f"Pattern(shape={self.shape}, rows={[' '.join(map(str, r)) for r in self.rows()]})"

    def __str__(self) -> str:
        return " ".join(map(str, self.cells)) if self.dim == 1 else format_pattern(self)


Word = Pattern


def _parse_cell(tok: str) -> Cell:
    if tok.startswith("?"):
        if len(tok) == 1:
            raise ShiftlabError("empty variable name")
        return Var(tok[1:])
    _check_symbol(tok)
    return tok


# ---------------------------------------------------------------------------
# operations


def translate(p: Pattern, v: Sequence[int]) -> Pattern:
    """Image of ``p`` under the shift by ``v``: the domain moves by ``-v``."""
    if len(v) != p.dim:
        raise DimensionMismatch(f"shift vector of length {len(v)} for a {p.dim}-dimensional pattern")
    return Pattern(p.shape, p.cells, tuple(o - x for o, x in zip(p.origin, v)))


def _placement_deltas(p_shape: Sequence[int], q_shape: Sequence[int]) -> list[int]:
    st = strides(p_shape)
    return [sum(c * s for c, s in zip(rel, st)) for rel in cell_coords(q_shape)]


def occurrences(p: Pattern, q: Pattern) -> list[tuple[int, ...]]:
    """Every relative offset at which ``q`` occurs inside ``p``."""
    if p.dim != q.dim:
        raise DimensionMismatch(f"dimensions {p.dim} and {q.dim} differ")
    if any(b > a for a, b in zip(p.shape, q.shape)):
        return []
    st = strides(p.shape)
    deltas = _placement_deltas(p.shape, q.shape)
    pc, qc = p.cells, q.cells
    pairs = list(zip(deltas, qc))
    free = [range(a - b + 1) for a, b in zip(p.shape, q.shape)]
    out = []
    for off in itertools.product(*reversed(free)):
        off = tuple(reversed(off))
        base = sum(o * s for o, s in zip(off, st))
        if all(pc[base + d] == c for d, c in pairs):
            out.append(off)
    return out


_SEP = "\x1f"


def contains(p: Pattern, q: Pattern) -> bool:
    """Whether ``q`` occurs somewhere in ``p``."""
    if p.dim == 1 and q.dim == 1:
        if q.size > p.size:
            return False
        if all(isinstance(c, str) for c in p.cells) and all(isinstance(c, str) for c in q.cells):
            hay = _SEP + _SEP.join(p.cells) + _SEP
            return (_SEP + _SEP.join(q.cells) + _SEP) in hay
    return bool(occurrences(p, q))


def contains_subpattern(p: Pattern, q: Pattern) -> tuple[bool, list[tuple[int, ...]]]:
    offs = occurrences(p, q)
    return bool(offs), offs


def contains_any(p: Pattern, qs: Iterable[Pattern]) -> bool:
    return any(contains(p, q) for q in qs)


def centered_offset(inner: Sequence[int], outer: Sequence[int]) -> tuple[int, ...]:
    """Canonical placement of a box inside a larger one: centered, ties to the min corner."""
    if len(inner) != len(outer):
        raise DimensionMismatch("dimension mismatch in placement")
    if any(a > b for a, b in zip(inner, outer)):
        raise ShiftlabError(f"shape {tuple(inner)} does not fit in {tuple(outer)}")
    return tuple((b - a) // 2 for a, b in zip(inner, outer))


def extensions(p: Pattern, target: Rect | Sequence[int], alphabet: Alphabet | Iterable[str]) -> Iterator[Pattern]:
    """All patterns on ``target`` restricting to ``p`` at its centered placement.

    Enumerated lexicographically: free cells in cell order, symbols in
    alphabet order, the first free cell most significant.
    """
    rect = target if isinstance(target, Rect) else Rect.of_shape(target)
    shape = rect.shape
    off = centered_offset(p.shape, shape)
    syms = list(alphabet)
    st = strides(shape)
    fixed = {}
    for rel, c in zip(cell_coords(p.shape), p.cells):
        fixed[sum((a + o) * s for a, o, s in zip(rel, off, st))] = c
    n = rect.size
    free = [i for i in range(n) if i not in fixed]
    base = [fixed.get(i) for i in range(n)]
    for choice in itertools.product(syms, repeat=len(free)):
        cells = list(base)
        for i, c in zip(free, choice):
            cells[i] = c
        yield Pattern(shape, cells, rect.lo)


def substitute(vp: Pattern, sigma: Mapping[Var, str]) -> Pattern:
    """Replace every variable cell by its image under ``sigma``."""
    out = []
    for c in vp.cells:
        if isinstance(c, Var):
            if c not in sigma:
                raise ShiftlabError(f"unbound variable {c}")
            out.append(sigma[c])
        else:
            out.append(c)
    return Pattern(vp.shape, out, vp.origin)


def all_patterns(shape: Sequence[int], alphabet: Iterable[str]) -> Iterator[Pattern]:
    syms = list(alphabet)
    n = 1
    for e in shape:
        n *= e
    for cells in itertools.product(syms, repeat=n):
        yield Pattern(shape, cells)


def shapes_up_to(dim: int, side: int) -> list[tuple[int, ...]]:
    """Every shape with all extents in ``1..side``, ordered by cell count then lexicographically."""
    shapes = list(itertools.product(range(1, side + 1), repeat=dim))
    return sorted(shapes, key=lambda s: (_prod(s), s))


def patterns_up_to(dim: int, side: int, alphabet: Iterable[str]) -> Iterator[Pattern]:
    syms = list(alphabet)
    for shape in shapes_up_to(dim, side):
        yield from all_patterns(shape, syms)


def _prod(xs: Iterable[int]) -> int:
    n = 1
    for x in xs:
        n *= x
    return n


# ---------------------------------------------------------------------------
# textual format


def format_pattern(p: Pattern) -> str:
    lines = [f"dim: {p.dim}"]
    w = p.shape[0]
    rows = p.rows()
    higher = p.shape[1:]
    for k, row in enumerate(rows):
        if k:
            # a step along axis a >= 2 is marked by a - 1 blank lines
            gap = 0
            rem = k
            for a, e in enumerate(higher, start=1):
                if rem % e:
                    break
                rem //= e
                if a + 1 < p.dim:
                    gap = a
            lines.extend([""] * gap)
        lines.append(" ".join(map(str, row)))
    return "\n".join(lines) + "\n"


def parse_pattern(text: str, first_line: int = 1) -> Pattern:
    lines = text.splitlines()
    while lines and not lines[0].strip():
        lines.pop(0)
        first_line += 1
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise FormatError("empty pattern", first_line, 1)
    head = lines[0].strip()
    if not head.startswith("dim:"):
        raise FormatError("pattern must start with 'dim: d'", first_line, 1)
    try:
        dim = int(head[4:].strip())
    except ValueError:
        raise FormatError("dimension is not an integer", first_line, 5) from None
    if dim < 1:
        raise FormatError("dimension must be >= 1", first_line, 5)
    rows: list[list[Cell]] = []
    # gaps[k] = number of blank lines preceding row k
    gaps: list[int] = []
    blank = 0
    for offset, line in enumerate(lines[1:], start=1):
        if not line.strip():
            blank += 1
            continue
        try:
            rows.append([_parse_cell(t) for t in line.split()])
        except ShiftlabError as e:
            raise FormatError(str(e), first_line + offset, 1) from None
        gaps.append(blank)
        blank = 0
    if not rows:
        raise FormatError("pattern has no cells", first_line, 1)
    width = len(rows[0])
    for k, r in enumerate(rows):
        if len(r) != width:
            raise FormatError(f"row has {len(r)} cells, expected {width}", first_line + 1 + k, 1)
    if dim == 1:
        if len(rows) != 1:
            raise FormatError("a 1-dimensional pattern has exactly one row", first_line + 2, 1)
        return Pattern((width,), rows[0])
    # recover extents of axes 1..dim-1 from the blank-line structure
    extents = [width] + [1] * (dim - 1)
    counters = [0] * dim
    for k, g in enumerate(gaps):
        if k == 0:
            continue
        if g > dim - 2:
            raise FormatError("too many blank lines for the declared dimension", first_line, 1)
        axis = g + 1
        counters[axis] += 1
        for a in range(1, axis):
            counters[a] = 0
        for a in range(1, dim):
            extents[a] = max(extents[a], counters[a] + 1)
    shape = tuple(extents)
    if _prod(shape[1:]) != len(rows):
        raise FormatError("ragged hyper-planes", first_line, 1)
    return Pattern(shape, [c for r in rows for c in r])


def split_blocks(lines: list[str]) -> list[tuple[int, str]]:
    """Split lines into chunks each starting at a ``dim:`` header; returns (line_no, text)."""
    blocks: list[tuple[int, list[str]]] = []
    for no, line in enumerate(lines, start=1):
        if line.strip().startswith("dim:"):
            blocks.append((no, [line]))
        elif blocks:
            blocks[-1][1].append(line)
        elif line.strip():
            raise FormatError("content before the first 'dim:' header", no, 1)
    return [(no, "\n".join(ls)) for no, ls in blocks]


def parse_patterns(text: str, line_offset: int = 0) -> list[Pattern]:
    return [parse_pattern(t, no + line_offset) for no, t in split_blocks(text.splitlines())]


def format_patterns(ps: Iterable[Pattern]) -> str:
    return "\n".join(format_pattern(p) for p in ps)
