import pytest

from shiftlab import forcing
from shiftlab.cli import load_axioms, load_presentation, load_state, load_tuple, main
from shiftlab.patterns import parse_pattern

GM = "dim: 1\nalphabet: 0 1\nforbidden:\ndim: 1\n1 1\n"
FULL01 = "dim: 1\nalphabet: 0 1\nforbidden:\n"
FULLAB = "dim: 1\nalphabet: a b\nforbidden:\n"


@pytest.fixture
def files(tmp_path):
    def put(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    put.dir = tmp_path
    return put


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_colang_of_a_forbidden_word(files, capsys):
    code, out, _ = run(capsys, "colang", files("gm.pres", GM), files("w.pat", "dim: 1\n1 1\n"), "--budget", 4)
    assert code == 0
    assert out.startswith("IN depth=0")


def test_lang_of_an_allowed_word(files, capsys):
    code, out, _ = run(capsys, "lang", files("gm.pres", GM), files("w.pat", "dim: 1\n0 1\n"))
    assert code == 0 and out.startswith("IN")


def test_count_and_plot(files, capsys):
    png = files.dir / "c.png"
    code, out, _ = run(capsys, "count", files("gm.pres", GM), "--n", 5, "--plot", png)
    assert code == 0
    assert out.splitlines() == [f"COUNT n={n} {c}" for n, c in zip(range(1, 6), [2, 3, 5, 8, 13])]
    assert png.read_bytes().startswith(b"\x89PNG")


def test_restrict_check_reports_counterexamples(files, capsys):
    code, out, _ = run(capsys, "restrict", "check", files("gm.pres", GM), files("full.pres", FULL01), "--size", 3)
    assert code == 1
    lines = out.splitlines()
    assert any(l.startswith("COUNTEREXAMPLE") for l in lines)
    assert lines[-1].startswith("CHECKED - ")
    code, _, _ = run(capsys, "restrict", "check", files("gm.pres", GM), files("gm2.pres", GM), "--size", 3)
    assert code == 0


def test_code_apply_output_is_readable(files, capsys):
    code_toml = files("c.toml", 'source = ["0", "1"]\ntarget = ["a", "b"]\nneighborhood = [[0, 1]]\n'
                     'table = ["0 0 -> a", "0 1 -> b", "1 0 -> b", "1 1 -> a"]\n')
    out = files.dir / "o.pat"
    code, _, _ = run(capsys, "code", "apply", code_toml, files("w.pat", "dim: 1\n0 1 1\n"), "--out", out)
    assert code == 0
    assert parse_pattern(out.read_text()).cells == ("b", "a")


def test_determine_decide(files, capsys):
    tup = files("t.toml", 'alphabet = ["a", "b"]\ngood = ["a b"]\nbad = ["a a", "b b"]\n')
    t = load_tuple(tup)
    assert t.dim == 1 and len(t.bad) == 2
    code, out, _ = run(capsys, "determine", "decide", tup, files("w.pat", "dim: 1\na a\n"))
    assert code == 0 and out.startswith("IN")


def test_ered_apply_and_verify(files, capsys):
    ax = files("w.ax", "1 0\n2 1\n3 5  # needs 0 and 2\n")
    assert load_axioms(ax) == ([(1, 0), (2, 1), (3, 5)], 2)
    code, out, _ = run(capsys, "ered", "apply", ax, "--input", files("y", "0 2\n"))
    assert code == 0 and out.splitlines() == ["ELEMENT 1", "ELEMENT 2", "ELEMENT 3"]
    code, out, _ = run(capsys, "ered", "verify", ax, "--input", files("y2", "0\n"),
                       "--target", files("x", "1 2\n"), "--bound", 4)
    assert code == 0
    code, out, _ = run(capsys, "ered", "verify", ax, "--input", files("y3", "0\n"),
                       "--target", files("x2", "1\n"), "--bound", 4)
    assert code == 1 and out.startswith("VIOLATION 2")


def test_ered_one_enum(files, capsys):
    ax = files("w1.ax", "4 0 1\n5 1 0\n")
    code, out, _ = run(capsys, "ered", "apply", ax, "--input", files("y", "0\n"), "--neg", files("n", "0\n"))
    assert code == 3  # overlapping information
    code, out, _ = run(capsys, "ered", "apply", ax, "--input", files("y2", "0\n"), "--neg", files("n2", "1\n"))
    assert code == 0 and out.splitlines() == ["ELEMENT 5"]


def test_ziegler_identity_reduction(files, capsys):
    alt = files("alt.pres", "dim: 1\nalphabet: a b\nforbidden:\ndim: 1\na a\n\ndim: 1\nb b\n")
    code, out, _ = run(capsys, "ziegler", "check", alt, alt, "--stage", 4, "--bound", 14)
    assert code == 0 and out == ""


def test_force_run_zero_stages_is_empty(files, capsys):
    out = files.dir / "st.state"
    code, _, _ = run(capsys, "force", "run", "--stages", 0, "--out", out)
    assert code == 0
    st = load_state(str(out))
    assert st.stage == 0 and not st.base and not st.bad and not st.history


def test_force_pipeline(files, capsys):
    d = files.dir
    code, _, _ = run(capsys, "force", "run", "--stages", 10, "--out", d / "st.state", "--plot", d / "g.png")
    assert code == 0 and (d / "g.png").read_bytes().startswith(b"\x89PNG")
    code, out, _ = run(capsys, "force", "check", d / "st.state")
    assert code == 0 and out.strip() == "PAIRS - 10"
    gm = files("gm.pres", "dim: 1\nalphabet: a0 a1\nforbidden:\ndim: 1\na1 a1\n")
    code, out, _ = run(capsys, "force", "diag", d / "st.state", gm, "--tuple", "a0,a1", "--out", d / "st2.state")
    assert code == 0 and out.startswith("IN") and "word=" in out
    assert load_state(str(d / "st2.state")).stage == 10
    code, out, _ = run(capsys, "force", "branch", d / "st.state", d / "st.state", "--c", "a0", "--d", "a1",
                       "--out-a", d / "A.state", "--out-b", d / "B.state")
    assert code == 0 and out.split()[1] in {"forward", "swapped"}
    code, _, _ = run(capsys, "force", "check", d / "A.state")
    assert code == 0


def test_force_check_reports_tampering(files, capsys):
    st = forcing.run(6, 4)
    w = sorted(st.base)[0]
    bad = forcing.ForcingState(st.stage, st.dim, st.base, st.pads, st.bad | {w}, st.used, st.history)
    code, out, _ = run(capsys, "force", "check", files("t.state", forcing.format_state(bad)))
    assert code == 1 and "CONTAINMENT" in out


def test_oracle_gen_verify_render(files, capsys):
    d = files.dir
    code, _, _ = run(capsys, "oracle", "gen", files("ab.pres", FULLAB), "--width", 40, "--height", 6,
                     "--out", d / "win.pat")
    assert code == 0
    code, out, _ = run(capsys, "oracle", "verify", d / "win.pat")
    assert code == 0 and out == ""
    win = parse_pattern((d / "win.pat").read_text())
    rows = [list(r) for r in win.rows()]
    rows[0][0] = "a"
    from shiftlab.patterns import Pattern, format_pattern

    files("mut.pat", format_pattern(Pattern.grid(rows)))
    code, out, _ = run(capsys, "oracle", "verify", d / "mut.pat")
    assert code == 1
    assert out.split()[0] in {"Grid", "FixType", "Periodicity", "Recurrence", "SubwordClosed"}
    code, out, _ = run(capsys, "oracle", "render", d / "win.pat")
    assert code == 0 and len(out.splitlines()) == 6
    code, _, _ = run(capsys, "oracle", "render", d / "win.pat", "--format", "svg", "--out", d / "w.svg")
    assert code == 0 and "<svg" in (d / "w.svg").read_text()


def test_oracle_gen_without_window(files, capsys):
    empty = files("e.pres", "dim: 1\nalphabet: a\nforbidden:\ndim: 1\na\n")
    code, out, _ = run(capsys, "oracle", "gen", empty, "--width", 16, "--height", 4)
    assert code == 2 and out == ""


def test_outputs_are_deterministic(files, capsys):
    d = files.dir
    gm = files("gm.pres", GM)
    for tag in "xy":
        run(capsys, "force", "run", "--stages", 8, "--out", d / f"s{tag}", "--plot", d / f"g{tag}.png")
        run(capsys, "count", gm, "--n", 6, "--plot", d / f"c{tag}.png")
        run(capsys, "oracle", "gen", files("ab.pres", FULLAB), "--width", 24, "--height", 4, "--out", d / f"w{tag}")
        run(capsys, "oracle", "render", d / f"w{tag}", "--format", "png", "--out", d / f"w{tag}.png")
    for a, b in [("sx", "sy"), ("gx.png", "gy.png"), ("cx.png", "cy.png"), ("wx", "wy"), ("wx.png", "wy.png")]:
        assert (d / a).read_bytes() == (d / b).read_bytes()


def test_written_files_round_trip(files, capsys):
    d = files.dir
    run(capsys, "force", "run", "--stages", 12, "--kill-slices", "--out", d / "s")
    text = (d / "s").read_text()
    assert forcing.format_state(forcing.parse_state(text)) == text
    run(capsys, "oracle", "gen", files("ab.pres", FULLAB), "--width", 24, "--height", 4, "--out", d / "w")
    from shiftlab.patterns import format_pattern

    text = (d / "w").read_text()
    assert format_pattern(parse_pattern(text)) == text


def test_malformed_presentation_reports_location(files, capsys):
    bad = files("bad.pres", "dim: 1\nalphabet: 0 1\nforbidden:\ndim: 1\n1 2\n")
    code, _, err = run(capsys, "colang", bad, files("w.pat", "dim: 1\n1\n"))
    assert code == 3
    assert f"{bad}:5:" in err
    with pytest.raises(Exception):
        load_presentation(bad)


def test_malformed_axioms_and_naturals(files, capsys):
    code, _, err = run(capsys, "ered", "apply", files("a.ax", "1 0\n2 x\n"))
    assert code == 3 and ":2:3:" in err
    code, _, err = run(capsys, "ered", "apply", files("b.ax", "1 0\n2 0 0\n"))
    assert code == 3 and "mixed" in err
    code, _, err = run(capsys, "ered", "apply", files("c.ax", "1 0\n"), "--input", files("y", "0 -1\n"))
    assert code == 3


def test_malformed_state_file(files, capsys):
    code, _, err = run(capsys, "force", "check", files("s.state", "forcing-state 1\nstage: q\ndimension: 1\nused:\n"))
    assert code == 3 and "s.state:2:" in err


@pytest.mark.parametrize("argv", [
    [],
    ["nonsense"],
    ["force"],
    ["force", "run"],
    ["force", "run", "--stages", "-1"],
    ["colang", "missing.pres", "missing.pat"],
    ["oracle", "render", "x.pat", "--format", "gif"],
])
def test_usage_errors_exit_3(argv, capsys):
    assert main(argv) == 3
