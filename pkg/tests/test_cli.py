import csv
import io
import subprocess
import sys

import pytest

from dicfb.capacity import (fb_sum_capacity, feedback_gain, half_duplex_sum_capacity,
                            no_fb_sum_capacity)
from dicfb.channel import OperatingPoint
from dicfb.cli import SIM_HEADER, SWEEP_HEADER, fmt6, main
from dicfb.trace import parse_trace_lines


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def table(text):
    lines = text.splitlines()
    assert lines[0].startswith("# config: ")
    return list(csv.DictReader(lines[1:]))


class TestFmt6:
    @pytest.mark.parametrize("x, s", [(0, "0.000000"), (3, "3.000000"), ("29/10", "2.900000"),
                                      ("2/3", "0.666667"), ("1/12", "0.083333"),
                                      ("-1/3", "-0.333333"), ("1/2000000", "0.000000")])
    def test_values(self, x, s):
        from fractions import Fraction
        assert fmt6(Fraction(x)) == s


class TestCapacity:
    def test_2_1(self):
        code, text = run("capacity", "--n", "2", "--m", "1")
        assert code == 0
        rows = {r["model"]: r for r in table(text)}
        assert rows["one-link"]["sum_capacity"] == "3"
        assert rows["no-feedback"]["sum_capacity"] == "2"
        assert rows["gain"]["sum_capacity"] == "1"
        assert rows["half-duplex"]["sum_capacity"] == "[2,3]"
        assert rows["half-duplex"]["kind"] == "interval"

    @pytest.mark.parametrize("n, m", [(n, m) for n in range(1, 7) for m in range(0, 13)])
    def test_agrees_with_formulas(self, n, m):
        op = OperatingPoint(n, m)
        rows = {r["model"]: r["sum_capacity"] for r in table(run("capacity", "--n", str(n), "--m", str(m))[1])}
        assert rows == {
            "no-feedback": str(no_fb_sum_capacity(op)),
            "one-link": str(fb_sum_capacity(op)),
            "two-link": str(fb_sum_capacity(op)),
            "four-link": str(fb_sum_capacity(op)),
            "half-duplex": str(half_duplex_sum_capacity(op)),
            "gain": str(feedback_gain(op)),
        }

    def test_n_zero_marks_undefined(self):
        rows = {r["model"]: r for r in table(run("capacity", "--n", "0", "--m", "2")[1])}
        assert rows["one-link"]["sum_capacity"] == "2"
        assert rows["no-feedback"]["sum_capacity"] == "undefined"

    @pytest.mark.parametrize("argv", [["capacity", "--n", "-1", "--m", "2"],
                                      ["capacity", "--n", "0", "--m", "0"],
                                      ["capacity", "--n", "x", "--m", "2"],
                                      ["capacity", "--n", "2"],
                                      ["frobnicate"]])
    def test_usage_errors(self, argv):
        assert run(*argv)[0] == 2


class TestSimulate:
    def test_one_link_example(self):
        code, text = run("simulate", "--n", "2", "--m", "1", "--topology", "one-link",
                         "--T", "10", "--seed", "7")
        assert code == 0
        lines = text.splitlines()
        assert lines[1] == ",".join(SIM_HEADER)
        (row,) = table(text)
        assert (row["bits_u1"], row["bits_u2"], row["sum_rate"]) == ("9", "20", "2.900000")
        assert row["capacity"] == "3" and row["t"] == "1.000000"

    def test_relay_route(self):
        (row,) = table(run("simulate", "--n", "1", "--m", "2", "--topology", "one-link", "--T", "10")[1])
        assert (row["bits_u1"], row["bits_u2"]) == ("0", "19")

    def test_equal_links_route(self):
        (row,) = table(run("simulate", "--n", "1", "--m", "1", "--topology", "one-link", "--T", "10")[1])
        assert row["sum_rate"] == "1.000000"

    def test_half_duplex(self):
        code, text = run("simulate", "--n", "2", "--m", "1", "--topology", "half-duplex",
                         "--L", "3", "--f", "2", "--strategy", "chained-one-link-hd", "--T", "10")
        assert code == 0
        (row,) = table(text)
        assert row["t"] == "0.666667" and row["sum_rate"] == "1.933333"

    def test_trace_file(self, tmp_path):
        path = tmp_path / "t.txt"
        code, _ = run("simulate", "--n", "3", "--m", "1", "--T", "6", "--trace", str(path))
        assert code == 0
        recs = parse_trace_lines(path.read_text())
        assert [r.slot for r in recs] == list(range(1, 7))

    def test_output_file(self, tmp_path):
        path = tmp_path / "o.csv"
        code, text = run("simulate", "--n", "3", "--m", "1", "--T", "6", "--output", str(path))
        assert code == 0 and text == ""
        assert table(path.read_text())[0]["bits_u2"] == "18"

    @pytest.mark.parametrize("argv", [
        ["--n", "2", "--m", "1", "--topology", "half-duplex", "--L", "3", "--f", "2",
         "--strategy", "relay-hd"],
        ["--n", "2", "--m", "1", "--topology", "half-duplex", "--L", "3", "--f", "2"],
        ["--n", "2", "--m", "1", "--topology", "half-duplex", "--L", "3"],
        ["--n", "2", "--m", "1", "--topology", "one-link", "--L", "3"],
        ["--n", "2", "--m", "1", "--T", "0"],
        ["--n", "0", "--m", "2", "--topology", "none"],
        ["--n", "2", "--m", "1", "--topology", "three-link"],
    ])
    def test_usage_errors(self, argv, capsys):
        assert run("simulate", *argv)[0] == 2
        assert "error" in capsys.readouterr().err

    def test_regime_error_names_precondition(self, capsys):
        run("simulate", "--n", "1", "--m", "2", "--topology", "half-duplex", "--L", "3", "--f", "2",
            "--strategy", "chained-one-link-hd")
        assert "regime mismatch" in capsys.readouterr().err


class TestSweep:
    def test_schema_and_best(self):
        code, text = run("sweep", "--n", "2", "--m", "1", "--L", "3", "--frames", "4")
        assert code == 0
        assert text.splitlines()[1] == ",".join(SWEEP_HEADER)
        rows = table(text)
        best = [r for r in rows if r["best"] == "1"]
        assert len(best) == 1
        assert (best[0]["f"], best[0]["strategy"], best[0]["sum_rate"]) == ("3", "no-feedback", "2.000000")

    def test_ranges_and_lists(self):
        rows = table(run("sweep", "--n", "1-2", "--m", "0-3", "--L", "2,3", "--frames", "2")[1])
        assert {(r["n"], r["m"], r["L"]) for r in rows} == {
            (str(n), str(m), str(L)) for n in (1, 2) for m in range(4) for L in (2, 3)}
        assert sum(r["best"] == "1" for r in rows) == 16

    def test_threads_leave_bytes_unchanged(self):
        argv = ["sweep", "--n", "1-4", "--m", "0-6", "--L", "2,3,6", "--frames", "3", "--seed", "5"]
        assert run(*argv, "--threads", "1") == run(*argv, "--threads", "4")

    @pytest.mark.parametrize("argv", [["--n", "0", "--m", "1"], ["--n", "3-1", "--m", "1"],
                                      ["--n", "2", "--m", "1", "--L", "0"],
                                      ["--n", "2", "--m", "1", "--threads", "0"]])
    def test_usage_errors(self, argv):
        assert run("sweep", *argv)[0] == 2


class TestCurve:
    def test_n12(self):
        code, text = run("curve", "--n", "12")
        assert code == 0
        rows = {r["alpha"]: r for r in table(text)}
        assert len(rows) == 37
        assert rows["0.000000"]["feedback"] == "1.000000"
        assert rows["1.000000"]["feedback"] == "0.500000"
        assert rows["2.000000"]["feedback"] == "1.000000"
        assert rows["0.666667"]["feedback"] == rows["0.666667"]["no_feedback"]
        assert (rows["0.500000"]["feedback"], rows["0.500000"]["no_feedback"]) == ("0.750000", "0.500000")

    @pytest.mark.parametrize("n", ["0", "61"])
    def test_bounds(self, n):
        assert run("curve", "--n", n)[0] == 2


class TestVerify:
    def test_small_grid_passes(self):
        code, text = run("verify", "--n-max", "3", "--m-max", "6", "--skip-strategies")
        assert code == 0
        assert [l.split()[0] for l in text.splitlines()[1:]] == ["PASS"] * 4

    def test_corrupted_cache_names_the_point(self, tmp_path):
        path = tmp_path / "cache.txt"
        path.write_text("2 1 1 2 01,10;-\n3 2 1 4 100,010;100,001\n")
        code, text = run("verify", "--n-max", "3", "--m-max", "3", "--skip-strategies",
                         "--cache", str(path))
        assert code == 1
        assert "FAIL w-curve" in text
        assert "MISMATCH n=3 m=2" in text

    def test_malformed_cache_is_a_usage_error(self, tmp_path):
        path = tmp_path / "cache.txt"
        path.write_text("2 1 1 3 01,10;-\n")
        assert run("verify", "--n-max", "2", "--m-max", "2", "--cache", str(path))[0] == 2

    def test_oversized_grid_refused(self, capsys):
        code, _ = run("verify", "--n-max", "9", "--m-max", "4")
        assert code == 2
        assert "guard" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dicfb", "capacity", "--n", "3", "--m", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "half-duplex,4,exact" in proc.stdout
