"""Tests for the derandkit command line"""

from fractions import Fraction
from pathlib import Path
from tempfile import TemporaryDirectory

import pytest

from derandkit.cli import main
from derandkit.family import binary_function, make_family
from derandkit.family_file import write_family

FAST = ["--pool-budget", "20000", "--seed", "0"]


@pytest.fixture
def workdir():
    with TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


def test_construct_splitter(workdir, capsys):
    """A uniform splitter is certified and written"""
    out = workdir / "f.txt"
    code = main(["construct", "--kind", "splitter", "--n", "16", "--k", "2", "--l", "8",
                 "--goal", "uniform", "--out", str(out), *FAST])
    stdout = capsys.readouterr().out

    assert code == 0
    assert out.exists()
    assert "RESULT valid=true checked=120 witness=none" in stdout
    assert "✅ Successfully constructed splitter" in stdout


def test_construct_then_verify_and_info(workdir, capsys):
    """construct, then verify and info on the written file"""
    out = workdir / "b.txt"
    assert main(["construct", "--kind", "bisector", "--n", "8", "--k", "2", "--alpha", "1/2",
                 "--out", str(out), *FAST]) == 0
    capsys.readouterr()

    assert main(["verify", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "RESULT valid=true checked=28 witness=none" in stdout
    assert "STATS " in stdout

    assert main(["info", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "kind: bisector" in stdout
    assert "ones per function: target 4, all equal" in stdout
    assert "provenance.verified: true" in stdout


def test_verify_with_sample(workdir, capsys):
    """--sample checks only that many subsets"""
    out = workdir / "b.txt"
    main(["construct", "--kind", "bisector", "--n", "8", "--k", "2", "--alpha", "1/2",
          "--out", str(out), *FAST])
    capsys.readouterr()
    assert main(["verify", str(out), "--sample", "5", "--seed", "3"]) == 0
    assert "checked=5" in capsys.readouterr().out


def test_verify_invalid_family(workdir, capsys):
    """Exit 1 with the first uncovered subset as witness"""
    family = make_family("bisector", 4, 1, [binary_function(4, [0, 1])], alpha=Fraction(1, 2))
    path = write_family(family, workdir / "bad.txt")

    assert main(["verify", str(path)]) == 1
    stdout = capsys.readouterr().out
    assert "RESULT valid=false" in stdout
    assert "witness=0" in stdout


def test_verify_override_k(workdir, capsys):
    """Checking a k=1 family as k=2 fails on a pair"""
    functions = [binary_function(4, ones) for ones in ([0, 1], [2, 3])]
    family = make_family("bisector", 4, 1, functions, alpha=Fraction(1, 2))
    path = write_family(family, workdir / "b.txt")

    assert main(["verify", str(path)]) == 0
    capsys.readouterr()
    assert main(["verify", str(path), "--k", "2"]) == 1
    assert "valid=false" in capsys.readouterr().out


def test_corrupt_file_is_a_usage_error(workdir, capsys):
    """A truncated file exits 2 for verify and info"""
    out = workdir / "b.txt"
    main(["construct", "--kind", "bisector", "--n", "8", "--k", "1", "--alpha", "1/2",
          "--out", str(out), *FAST])
    text = out.read_text(encoding="ascii")
    out.write_text(text[: len(text) // 2], encoding="ascii")
    capsys.readouterr()

    assert main(["verify", str(out)]) == 2
    assert "❌ Error:" in capsys.readouterr().err
    assert main(["info", str(out)]) == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["construct", "--kind", "splitter", "--n", "16", "--k", "2", "--out", "unused.txt"],
        ["construct", "--kind", "bisector", "--n", "8", "--k", "2", "--out", "unused.txt"],
        ["construct", "--kind", "bisector", "--n", "8", "--k", "2", "--alpha", "1/2"],
        ["construct", "--kind", "tree", "--n", "8", "--k", "2", "--out", "unused.txt"],
        ["frobnicate"],
        [],
    ],
)
def test_usage_errors(argv, capsys):
    """Missing flags, unknown kinds and commands exit 2"""
    assert main(argv) == 2


def test_missing_file(workdir, capsys):
    """A path that does not exist exits 2"""
    assert main(["info", str(workdir / "nope.txt")]) == 2


def test_verify_alpha_override_on_universal_file(workdir, capsys):
    """A ones-count mismatch exits 1 and names the member"""
    functions = [binary_function(4, ones) for ones in ([0, 1], [2, 3], [0, 2], [1, 3])]
    family = make_family("universal", 4, 1, functions, alpha=Fraction(1, 2))
    path = write_family(family, workdir / "u.txt")

    assert main(["verify", str(path)]) == 0
    capsys.readouterr()
    assert main(["verify", str(path), "--alpha", "1/4"]) == 1
    assert "RESULT valid=false checked=0 witness=function:0" in capsys.readouterr().out


def test_construct_is_identical_across_thread_counts(workdir, monkeypatch, capsys):
    """Same arguments and seed write the same bytes for any DERANDOM_THREADS"""
    outputs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("DERANDOM_THREADS", threads)
        out = workdir / f"u{threads}.txt"
        assert main(["construct", "--kind", "universal", "--n", "8", "--k", "2", "--alpha", "1/2",
                     "--out", str(out), *FAST]) == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
