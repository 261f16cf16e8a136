import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dparetogof import __version__
from dparetogof.cli import EXIT_DOMAIN, EXIT_NUMERICAL, EXIT_PARSE, main
from dparetogof.distribution import FrequencyTable
from dparetogof.exceptions import ConvergenceError, DomainError, InsufficientDataError, ParseError
from dparetogof.io import ingest, loglog, parse_text, write_freq_pairs, write_raw_counts

ROOT = Path(__file__).resolve().parents[1]
EXPELLED_FILE = ROOT / "data" / "effectively_expelled.txt"
NOT_EXPELLED_FILE = ROOT / "data" / "not_effectively_expelled.txt"


def write(tmp_path, text, name="data.txt"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestIngest:
    def test_pairs(self, tmp_path):
        t = ingest(write(tmp_path, "1 1999\n2 33\n3 2\n4 1\n5 1"), "pairs")
        assert t.n == 2036
        assert t.as_dict() == {1: 1999, 2: 33, 3: 2, 4: 1, 5: 1}

    def test_raw(self, tmp_path):
        assert ingest(write(tmp_path, "1\n1\n3\n"), "raw").as_dict() == {1: 2, 3: 1}

    def test_comments_blank_lines_and_whitespace(self, tmp_path):
        text = "# header\n\n  1\t4 \n# note\n7   2\n"
        assert ingest(write(tmp_path, text), "pairs").as_dict() == {1: 4, 7: 2}

    def test_auto_detect(self):
        assert parse_text("# x\n2 5\n1 1\n", "auto").as_dict() == {1: 1, 2: 5}
        assert parse_text("2\n1\n2\n", "auto").as_dict() == {1: 1, 2: 2}

    def test_zero_rejected(self, tmp_path):
        with pytest.raises(DomainError, match="line 2"):
            ingest(write(tmp_path, "1\n0\n"), "raw")

    def test_zero_count_rejected(self):
        with pytest.raises(DomainError, match="line 1"):
            parse_text("3 0\n", "pairs")

    @pytest.mark.parametrize("text,fmt,line", [
        ("1\n2\nabc\n", "raw", 3),
        ("1 2 3\n", "pairs", 1),
        ("1 2\n1 5\n", "pairs", 2),
        ("1\n2.5\n", "raw", 2),
        ("1 1\n2\n", "pairs", 2),
    ])
    def test_parse_errors_carry_line(self, text, fmt, line):
        with pytest.raises(ParseError) as info:
            parse_text(text, fmt)
        assert info.value.lineno == line
        assert str(info.value).startswith(f"line {line}:")

    @pytest.mark.parametrize("text", ["", "# only a comment\n", "\n\n"])
    def test_empty(self, text):
        with pytest.raises(ParseError, match="no observations"):
            parse_text(text)

    def test_raw_dump_round_trip(self):
        xs = np.array([3, 1, 1, 9])
        assert parse_text(write_raw_counts(xs), "raw") == FrequencyTable.from_mapping({1: 2, 3: 1, 9: 1})

    @given(st.dictionaries(st.integers(1, 10**12), st.integers(1, 10**9), min_size=1, max_size=40))
    def test_pairs_round_trip(self, mapping):
        table = FrequencyTable.from_mapping(mapping)
        assert parse_text(write_freq_pairs(table), "pairs") == table


class TestLogLog:
    def test_published_slopes(self):
        assert loglog(ingest(EXPELLED_FILE, "pairs")).ols_slope == pytest.approx(-5.02, abs=0.01)
        assert loglog(ingest(NOT_EXPELLED_FILE, "pairs")).ols_slope == pytest.approx(-4.31, abs=0.01)

    def test_exact_power_law(self):
        # 60 is a multiple of every k in 1..5, so 60**3 / k**3 is an exact integer
        k = np.arange(1, 6)
        table = FrequencyTable(k, 60**3 // k**3)
        diag = loglog(table)
        assert diag.ols_slope == pytest.approx(-3.0, abs=1e-12)
        assert diag.r_squared == pytest.approx(1.0, abs=1e-12)
        assert diag.ols_intercept == pytest.approx(3 * math.log(60), abs=1e-12)

    def test_against_numpy_polyfit(self):
        diag = loglog({1: 50, 2: 9, 3: 5, 7: 2, 11: 1})
        x, y = np.log([1, 2, 3, 7, 11]), np.log([50, 9, 5, 2, 1])
        slope, intercept = np.polyfit(x, y, 1)
        assert diag.ols_slope == pytest.approx(slope, rel=1e-12)
        assert diag.ols_intercept == pytest.approx(intercept, rel=1e-12)
        assert 0 <= diag.r_squared <= 1

    @given(st.dictionaries(st.integers(1, 500), st.integers(1, 1000), min_size=2, max_size=30),
           st.integers(2, 50))
    def test_slope_scale_invariant(self, mapping, factor):
        base = loglog(mapping)
        scaled = loglog({k: v * factor for k, v in mapping.items()})
        assert scaled.ols_slope == pytest.approx(base.ols_slope, rel=1e-9, abs=1e-9)
        assert scaled.ols_intercept == pytest.approx(base.ols_intercept + math.log(factor), abs=1e-9)

    def test_needs_two_values(self):
        with pytest.raises(InsufficientDataError):
            loglog({3: 10})

    def test_csv(self):
        lines = loglog({1: 4, 2: 1}).to_csv().splitlines()
        assert lines[0] == "value,frequency,log_value,log_frequency"
        assert lines[1].startswith("1,4,0.0,")
        assert len(lines) == 3


def run_cli(args, capsys):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


class TestCli:
    def test_test_json_report(self, capsys):
        code, out, _ = run_cli(["test", NOT_EXPELLED_FILE, "--boot-reps", 60, "--seed", 3,
                                "--format", "json", "--stat", "K", "--stat", "T:0"], capsys)
        assert code == 0
        doc = json.loads(out)
        assert doc["tool_version"] == __version__ and doc["seed"] == 3
        assert doc["input"]["n"] == 1645 + 183 + 37 + 13 + 2
        assert [r["statistic"] for r in doc["reports"]] == ["K", "T:0"]
        assert all(r["decision"] == "reject" for r in doc["reports"])
        assert doc["reports"][0]["fit"]["nu_hat"] == pytest.approx(3.50, abs=0.01)

    def test_json_is_reproducible(self, capsys, tmp_path):
        docs = []
        for name in ("a.json", "b.json"):
            path = tmp_path / name
            code, out, _ = run_cli(["test", EXPELLED_FILE, "--boot-reps", 40, "--seed", 11,
                                    "--output", path], capsys)
            assert code == 0 and "retain" in out
            doc = json.loads(path.read_text())
            assert doc.pop("generated_at")
            docs.append(json.dumps(doc, sort_keys=True, indent=2))
        assert docs[0] == docs[1]

    def test_text_summary(self, capsys):
        code, out, _ = run_cli(["test", EXPELLED_FILE, "--boot-reps", 20], capsys)
        assert code == 0
        assert "fitted exponent: 5.88555" in out
        assert "n = 2036" in out

    def test_loglog_formats(self, capsys, tmp_path):
        code, out, _ = run_cli(["loglog", EXPELLED_FILE], capsys)
        assert code == 0 and "slope: -5.0164" in out
        code, out, _ = run_cli(["loglog", EXPELLED_FILE, "--format", "csv"], capsys)
        assert out.splitlines()[0] == "value,frequency,log_value,log_frequency"
        code, out, _ = run_cli(["loglog", NOT_EXPELLED_FILE, "--format", "json"], capsys)
        assert json.loads(out)["slope"] == pytest.approx(-4.314, abs=1e-3)

    def test_sample_round_trip(self, capsys, tmp_path):
        path = tmp_path / "draws.txt"
        code, _, _ = run_cli(["sample", "--nu", 2.5, "--size", 300, "--seed", 1,
                              "--format", "pairs", "--output", path], capsys)
        assert code == 0
        assert ingest(path, "pairs").n == 300
        code, out, _ = run_cli(["sample", "--nu", 2.5, "-n", 5, "--seed", 1], capsys)
        assert len(out.split()) == 5

    def test_power_study(self, capsys, tmp_path):
        config = tmp_path / "study.json"
        config.write_text(json.dumps({
            "schema_version": 1, "n": 12, "mc": 4, "bootstrap": {"b": 15},
            "master_seed": 2, "tests": ["K", "CN"],
            "alternatives": [{"kind": "NULL", "nu": 2}, {"kind": "MAX_DU", "nu": 3, "k": 2}],
        }))
        stem = tmp_path / "out"
        code, out, _ = run_cli(["power-study", config, "--output", stem], capsys)
        assert code == 0
        assert out.splitlines()[0] == "distribution,K,CN"
        csv_text = (tmp_path / "out.csv").read_text()
        assert csv_text.splitlines()[2].startswith('"max(X1(3),DU(2))"')
        meta = json.loads((tmp_path / "out.json").read_text())["metadata"]
        assert meta["mc"] == 4 and meta["b"] == 15 and meta["master_seed"] == 2
        code, out, _ = run_cli(["power-study", config, "--mc", 2, "--boot-reps", 10,
                                "--seed", 8, "--format", "json"], capsys)
        meta = json.loads(out)["metadata"]
        assert (meta["mc"], meta["b"], meta["master_seed"]) == (2, 10, 8)

    def test_exit_codes(self, capsys, tmp_path):
        assert run_cli(["test", write(tmp_path, "1\nx\n")], capsys)[0] == EXIT_PARSE
        assert run_cli(["test", tmp_path / "missing.txt"], capsys)[0] == EXIT_PARSE
        assert run_cli(["test", write(tmp_path, "")], capsys)[0] == EXIT_PARSE
        code, _, err = run_cli(["test", write(tmp_path, "1\n0\n")], capsys)
        assert code == EXIT_DOMAIN and "line 2" in err
        assert run_cli(["loglog", write(tmp_path, "4\n4\n")], capsys)[0] == EXIT_DOMAIN
        assert run_cli(["test", EXPELLED_FILE, "--alpha", 1.5], capsys)[0] == EXIT_DOMAIN
        assert run_cli(["sample", "--nu", 0.9, "-n", 3], capsys)[0] == EXIT_DOMAIN
        assert len({EXIT_PARSE, EXIT_DOMAIN, EXIT_NUMERICAL}) == 3

    def test_numerical_failure_exit_code(self, capsys, monkeypatch):
        from dparetogof import cli

        def boom(*args, **kwargs):
            raise ConvergenceError("did not converge")

        monkeypatch.setattr(cli, "bootstrap_many", boom)
        code, _, err = run_cli(["test", EXPELLED_FILE], capsys)
        assert code == EXIT_NUMERICAL and "numerical failure" in err

    def test_usage_error(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["test", EXPELLED_FILE.as_posix(), "--stat", "Q"])
        assert info.value.code == 2

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "dparetogof", "loglog", str(EXPELLED_FILE)],
                              capture_output=True, text=True, check=False)
        assert proc.returncode == 0
        assert "slope: -5.0164" in proc.stdout
