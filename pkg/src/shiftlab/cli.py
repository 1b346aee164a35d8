"""Command-line entry point.

Every report goes to stdout one finding per line (``TAG location detail``).
Exit codes: 0 clean, 1 violations or counterexamples, 2 undecided at the
budget, 3 usage or file-format errors.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from typing import Callable, Optional, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import codes, enum_red, forcing, oracle_shift
from .patterns import FormatError, Pattern, ShiftlabError, format_pattern, parse_pattern
from .presentations import (
    Presentation,
    Verdict,
    count_language_words_1d,
    language_certificate,
    parse_presentation,
)

EXIT_CLEAN, EXIT_FOUND, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class FileFormatError(Exception):
    """A malformed input file, reported as ``path:line:column: message``."""

    def __init__(self, path: str, line: int, column: int, message: str):
        super().__init__(f"{path}:{line}:{column}: {message}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _nat(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a natural number") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"{text!r} is negative")
    return v


# ---------------------------------------------------------------------------
# file helpers


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def write_atomic(path: str, text: str | bytes) -> None:
    """Write through a temporary file in the target directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".shiftlab-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(text.encode("utf-8") if isinstance(text, str) else text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _png_atomic(path: str, draw: Callable[[str], None]) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".shiftlab-", suffix=".png")
    os.close(fd)
    try:
        draw(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _located(path: str, fn, text: str):
    try:
        return fn(text)
    except FormatError as e:
        msg = str(e).split(": ", 1)[-1]
        raise FileFormatError(path, e.line, e.column, msg) from None


def load_presentation(path: str) -> Presentation:
    return _located(path, parse_presentation, _read(path))


def load_pattern(path: str) -> Pattern:
    return _located(path, parse_pattern, _read(path))


def load_toml(path: str) -> dict:
    try:
        return tomllib.loads(_read(path))
    except tomllib.TOMLDecodeError as e:
        raise FileFormatError(path, getattr(e, "lineno", 0), getattr(e, "colno", 0), e.msg) from None


def load_naturals(path: str) -> list[int]:
    out = []
    for no, line in enumerate(_read(path).splitlines(), start=1):
        for col, tok in _tokens(line):
            if not tok.isdigit():
                raise FileFormatError(path, no, col, f"expected a natural, got {tok!r}")
            out.append(int(tok))
    return out


def _tokens(line: str):
    line = line.split("#", 1)[0]
    col = 0
    for tok in line.split():
        col = line.index(tok, col)
        yield col + 1, tok
        col += len(tok)


def load_axioms(path: str) -> tuple[list[tuple[int, ...]], int]:
    """Axiom lines ``n u`` or ``n u v``; all lines must have the same arity."""
    axioms, arity = [], None
    for no, line in enumerate(_read(path).splitlines(), start=1):
        toks = list(_tokens(line))
        if not toks:
            continue
        for col, tok in toks:
            if not tok.isdigit():
                raise FileFormatError(path, no, col, f"expected a natural, got {tok!r}")
        if len(toks) not in (2, 3):
            raise FileFormatError(path, no, 1, "an axiom has two or three fields")
        if arity is None:
            arity = len(toks)
        elif arity != len(toks):
            raise FileFormatError(path, no, 1, "mixed axiom arities")
        axioms.append(tuple(int(t) for _, t in toks))
    return axioms, arity or 2


def _word(text: str, dim: int) -> Pattern:
    """Tuple-file words: ``"a b"`` in 1D, rows joined by ``/`` (bottom row first) in 2D."""
    if dim == 1:
        return Pattern.word(text)
    if dim == 2:
        return Pattern.grid([r.split() for r in text.split("/")])
    raise ShiftlabError("tuple files hold words of dimension at most 2")


def load_tuple(path: str) -> codes.DeterminationTuple:
    data = load_toml(path)
    try:
        dim = int(data.get("dim", 1))
        alphabet = list(data["alphabet"])
        good = frozenset(_word(s, dim) for s in data.get("good", []))
        bad = frozenset(_word(s, dim) for s in data.get("bad", []))
    except (KeyError, TypeError, ValueError) as e:
        raise FileFormatError(path, 0, 0, f"malformed tuple ({e})") from None
    code = codes.code_from_mapping(data["code"]) if "code" in data else codes.BlockCode.identity(alphabet, dim)
    return codes.DeterminationTuple(codes.Alphabet(alphabet), dim, good, bad, code)


def _emit(lines: Sequence[str], out: Optional[str] = None) -> None:
    text = "".join(line + "\n" for line in lines)
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _exit_for(found: bool, undecided: bool) -> int:
    if found:
        return EXIT_FOUND
    return EXIT_UNKNOWN if undecided else EXIT_CLEAN


# ---------------------------------------------------------------------------
# subcommands


def cmd_colang(a) -> int:
    P, w = load_presentation(a.presentation), load_pattern(a.pattern)
    c = P.colanguage(w, a.budget)
    _emit([c.describe()])
    return EXIT_UNKNOWN if c.verdict is Verdict.UNKNOWN else EXIT_CLEAN


def cmd_lang(a) -> int:
    P, w = load_presentation(a.presentation), load_pattern(a.pattern)
    c = language_certificate(P, w, a.budget)
    _emit([c.describe()])
    return EXIT_UNKNOWN if c.verdict is Verdict.UNKNOWN else EXIT_CLEAN


def cmd_count(a) -> int:
    P = load_presentation(a.presentation)
    counts = [count_language_words_1d(P, n) for n in range(1, a.n + 1)]
    _emit([f"COUNT n={n} {c}" for n, c in enumerate(counts, start=1)])
    if a.plot:
        from .figures import save_counts_png

        _png_atomic(a.plot, lambda p: save_counts_png(counts, p))
    return EXIT_CLEAN


def cmd_restrict_check(a) -> int:
    S, T = load_presentation(a.S), load_presentation(a.T)
    rep = codes.full_restriction_check(S, T, a.size, a.budget)
    lines = []
    for w, side, inS, inT in rep.counterexamples:
        lines.append(f"COUNTEREXAMPLE side={side} {_inline(w)} S={'L' if inS else 'Lc'} T={'L' if inT else 'Lc'}")
    lines += [f"UNKNOWN side={w.side} {_inline(w)}" for w in rep.unknowns]
    lines.append(f"CHECKED - {rep.checked}")
    _emit(lines)
    return _exit_for(bool(rep.counterexamples), bool(rep.unknowns))


def cmd_determine_decide(a) -> int:
    t = load_tuple(a.tuple)
    w = load_pattern(a.pattern)
    c = codes.decide_via_determination(t, w, a.budget)
    _emit([c.describe()])
    return EXIT_UNKNOWN if c.verdict is Verdict.UNKNOWN else EXIT_CLEAN


def cmd_code_apply(a) -> int:
    code = codes.code_from_mapping(load_toml(a.code))
    w = load_pattern(a.pattern)
    out = codes.apply_code(code, w)
    _emit([format_pattern(out).rstrip("\n")], a.out)
    return EXIT_CLEAN


def _ered_operator(path: str):
    axioms, arity = load_axioms(path)
    if arity == 2:
        return enum_red.EnumOperator.from_axioms(axioms), False
    return enum_red.OneEnumOperator.from_axioms(axioms), True


def cmd_ered_apply(a) -> int:
    W, one = _ered_operator(a.axioms)
    Y = load_naturals(a.input) if a.input else []
    if one:
        out = W.apply(Y, load_naturals(a.neg) if a.neg else [], a.stage)
    else:
        if a.neg:
            raise UsageError("--neg needs three-field axioms")
        out = W.apply(Y, a.stage)
    _emit([f"ELEMENT {n}" for n in sorted(out)])
    return EXIT_CLEAN


def cmd_ered_verify(a) -> int:
    W, one = _ered_operator(a.axioms)
    Y = load_naturals(a.input) if a.input else []
    X = set(load_naturals(a.target))
    neg = (load_naturals(a.neg) if a.neg else []) if one else None
    rep = enum_red.verify_e_reduction(lambda n: n in X, Y, W, a.stage, a.bound, Yneg=neg)
    _emit(rep.lines() + [f"ENUMERATED - {len(rep.output)}"])
    return _exit_for(not rep.clean, bool(rep.undecided))


def cmd_ziegler_check(a) -> int:
    S, T = load_presentation(a.S), load_presentation(a.T)
    ct = enum_red.WordCode(T.alphabet, T.dim)
    if a.wi:
        ax, arity = load_axioms(a.wi)
        if arity != 2:
            raise UsageError("--wi needs two-field axioms")
        Wi = enum_red.EnumOperator.from_axioms(ax, "Wi")
    else:
        Wi = enum_red.EnumOperator.identity(ct)
    if a.wj:
        ax, arity = load_axioms(a.wj)
        if arity != 3:
            raise UsageError("--wj needs three-field axioms")
        Wj = enum_red.OneEnumOperator.from_axioms(ax, "Wj")
    else:
        Wj = enum_red.OneEnumOperator.complement_identity(ct)
    rep = enum_red.ziegler_check(S, T, Wi, Wj, a.stage, a.bound, a.budget)
    lines = rep.colanguage.lines("COLANG") + rep.language.lines("LANG")
    _emit(lines)
    undecided = bool(rep.colanguage.undecided or rep.language.undecided)
    return _exit_for(not rep.clean, undecided)


def cmd_oracle_gen(a) -> int:
    S = load_presentation(a.S)
    win = oracle_shift.synthesize_window(S, a.width, a.height, a.budget, hphase=a.hphase)
    if win is None:
        sys.stderr.write("no window: some row type has no certified word at this budget\n")
        return EXIT_UNKNOWN
    _emit([format_pattern(win).rstrip("\n")], a.out)
    return EXIT_CLEAN


def cmd_oracle_verify(a) -> int:
    win = load_pattern(a.window)
    S = load_presentation(a.S) if a.S else None
    alphabet = a.alphabet.split(",") if a.alphabet else None
    fams = None if a.families == "all" else a.families.split(",")
    rep = oracle_shift.scaffold_check(win, fams, a.stage, S, alphabet)
    _emit(rep.lines())
    return EXIT_FOUND if not rep.clean else EXIT_CLEAN


def cmd_oracle_render(a) -> int:
    win = load_pattern(a.window)
    if a.format == "png":
        if not a.out:
            raise UsageError("--format png needs --out")
        from .figures import save_window_png

        _png_atomic(a.out, lambda p: save_window_png(win, p))
        return EXIT_CLEAN
    text = oracle_shift.render_window(win, a.format)
    if a.out:
        write_atomic(a.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_CLEAN


def load_state(path: str) -> forcing.ForcingState:
    return _located(path, forcing.parse_state, _read(path))


def _put_state(st: forcing.ForcingState, out: Optional[str]) -> None:
    text = forcing.format_state(st)
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def cmd_force_run(a) -> int:
    st, trail = forcing.run(a.stages, a.budget, kill_slices=a.kill_slices, keep=True)
    _put_state(st, a.out)
    if a.plot:
        from .figures import save_forcing_png

        _png_atomic(a.plot, lambda p: save_forcing_png(trail, p))
    return EXIT_CLEAN


def cmd_force_check(a) -> int:
    st = load_state(a.state)
    rep = forcing.check_ecfcs_at_stage(st, a.budget)
    _emit(rep.discrepancies + rep.unknowns + [f"PAIRS - {rep.pairs}"])
    return _exit_for(not rep.clean, bool(rep.unknowns))


def cmd_force_diag(a) -> int:
    st = load_state(a.state)
    S = load_presentation(a.S)
    st2, c = forcing.diagonalize_step(st, S, a.tuple.split(","), a.budget)
    _emit([c.describe() + (f" word={forcing._wtext(c.witness)}" if c.witness is not None else "")])
    if c.verdict is Verdict.IN and a.out:
        write_atomic(a.out, forcing.format_state(st2))
    return EXIT_CLEAN if c.verdict is Verdict.IN else EXIT_UNKNOWN


def cmd_force_branch(a) -> int:
    A, B = load_state(a.stateA), load_state(a.stateB)
    r = forcing.branch_separate(A, B, a.c.split(","), a.d.split(","), a.budget)
    word = forcing._wtext(r.word) if r.word is not None else "-"
    _emit([f"SEPARATION {r.orientation} {word}"])
    if r.found and r.word is not None:
        if a.out_a:
            write_atomic(a.out_a, forcing.format_state(r.A))
        if a.out_b:
            write_atomic(a.out_b, forcing.format_state(r.B))
    return EXIT_CLEAN if r.found else EXIT_UNKNOWN


def _inline(w: Pattern) -> str:
    if w.dim == 1:
        return "".join(w.cells) if all(len(c) == 1 for c in w.cells) else " ".join(map(str, w.cells))
    return "/".join(" ".join(map(str, r)) for r in w.rows())


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="shiftlab", description="Budgeted computations with multidimensional subshifts.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def leaf(parent, name, fn, help):
        q = parent.add_parser(name, help=help)
        q.set_defaults(fn=fn)
        return q

    def group(name, help):
        g = sub.add_parser(name, help=help)
        s = g.add_subparsers(dest=name + "_command", parser_class=_Parser)
        s.required = True
        return s

    q = leaf(sub, "colang", cmd_colang, "certify a pattern in the co-language")
    q.add_argument("presentation")
    q.add_argument("pattern")
    q.add_argument("--budget", type=_nat, default=8)

    q = leaf(sub, "lang", cmd_lang, "certify a pattern in the language")
    q.add_argument("presentation")
    q.add_argument("pattern")
    q.add_argument("--budget", type=_nat, default=8)

    q = leaf(sub, "count", cmd_count, "count language words of a 1D shift of finite type")
    q.add_argument("presentation")
    q.add_argument("--n", type=_nat, required=True)
    q.add_argument("--plot", metavar="PNG")

    g = group("restrict", "full restriction checks")
    q = leaf(g, "check", cmd_restrict_check, "compare L(S) with L(T) on small patterns")
    q.add_argument("S")
    q.add_argument("T")
    q.add_argument("--size", type=_nat, default=3)
    q.add_argument("--budget", type=_nat, default=6)

    g = group("determine", "determination tuples")
    q = leaf(g, "decide", cmd_determine_decide, "decide a word through a determination tuple")
    q.add_argument("tuple")
    q.add_argument("pattern")
    q.add_argument("--budget", type=_nat, default=6)

    g = group("code", "block codes")
    q = leaf(g, "apply", cmd_code_apply, "apply a block code to a pattern")
    q.add_argument("code")
    q.add_argument("pattern")
    q.add_argument("--out")

    g = group("ered", "enumeration operators")
    q = leaf(g, "apply", cmd_ered_apply, "apply an operator at a stage")
    q.add_argument("axioms")
    q.add_argument("--input", help="file of naturals: positive information")
    q.add_argument("--neg", help="file of naturals: negative information")
    q.add_argument("--stage", type=_nat, default=0)
    q = leaf(g, "verify", cmd_ered_verify, "check an operator output against a target set")
    q.add_argument("axioms")
    q.add_argument("--input")
    q.add_argument("--neg")
    q.add_argument("--target", required=True)
    q.add_argument("--stage", type=_nat, default=0)
    q.add_argument("--bound", type=_nat, default=16)

    g = group("ziegler", "Ziegler reductions")
    q = leaf(g, "check", cmd_ziegler_check, "check both halves of a Ziegler reduction at a stage")
    q.add_argument("S")
    q.add_argument("T")
    q.add_argument("--wi")
    q.add_argument("--wj")
    q.add_argument("--stage", type=_nat, default=2)
    q.add_argument("--bound", type=_nat, default=16)
    q.add_argument("--budget", type=_nat)

    g = group("oracle", "oracle-shift windows")
    q = leaf(g, "gen", cmd_oracle_gen, "synthesize a window")
    q.add_argument("S")
    q.add_argument("--width", type=_nat, required=True)
    q.add_argument("--height", type=_nat, required=True)
    q.add_argument("--budget", type=_nat, default=6)
    q.add_argument("--hphase", type=_nat, default=0)
    q.add_argument("--out")
    q = leaf(g, "verify", cmd_oracle_verify, "report family violations of a window")
    q.add_argument("window")
    q.add_argument("--families", default="all")
    q.add_argument("--stage", type=_nat, default=0)
    q.add_argument("--S", help="presentation whose co-language the rows must avoid")
    q.add_argument("--alphabet", help="comma-separated content alphabet")
    q = leaf(g, "render", cmd_oracle_render, "draw a window")
    q.add_argument("window")
    q.add_argument("--format", choices=["ascii", "svg", "png"], default="ascii")
    q.add_argument("--out")

    g = group("force", "forcing states")
    q = leaf(g, "run", cmd_force_run, "run the construction for some stages")
    q.add_argument("--stages", type=_nat, required=True)
    q.add_argument("--budget", type=_nat, default=4)
    q.add_argument("--kill-slices", action="store_true")
    q.add_argument("--out")
    q.add_argument("--plot", metavar="PNG")
    q = leaf(g, "check", cmd_force_check, "replay and check a state")
    q.add_argument("state")
    q.add_argument("--budget", type=_nat, default=4)
    q = leaf(g, "diag", cmd_force_diag, "diagonalize a state against a presentation")
    q.add_argument("state")
    q.add_argument("S")
    q.add_argument("--tuple", required=True)
    q.add_argument("--budget", type=_nat, default=4)
    q.add_argument("--out")
    q = leaf(g, "branch", cmd_force_branch, "separate two states on tuples")
    q.add_argument("stateA")
    q.add_argument("stateB")
    q.add_argument("--c", required=True)
    q.add_argument("--d", required=True)
    q.add_argument("--budget", type=_nat, default=3)
    q.add_argument("--out-a")
    q.add_argument("--out-b")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except UsageError as e:
        sys.stderr.write(f"shiftlab: {e}\n")
        return EXIT_USAGE
    except (FileFormatError, FormatError) as e:
        sys.stderr.write(f"shiftlab: format error: {e}\n")
        return EXIT_USAGE
    except ShiftlabError as e:
        sys.stderr.write(f"shiftlab: {e}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
