import subprocess
import sys

import pytest

from truthlab.cli import EXIT_CLEAN, EXIT_CONFIG, EXIT_FINDING, main


@pytest.fixture
def grid_file(tmp_path):
    p = tmp_path / "g1.grid"
    p.write_text("# discount check\n0\n1/2\n2\n5\n")
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


class TestVerify:
    def test_discount_clean(self, capsys, grid_file):
        code, out = run(capsys, "verify", "--mech", "discount", "--grid", grid_file, "--no-timestamp")
        assert code == EXIT_CLEAN
        assert "DSIC = 0" in out.out

    def test_greedy_violations(self, capsys):
        code, out = run(capsys, "verify", "--mech", "greedy", "--grid", "0,1,2", "--no-timestamp")
        assert code == EXIT_FINDING
        assert "DSIC bidder=" in out.out

    def test_report_files(self, tmp_path):
        out = tmp_path / "out"
        code = main(["verify", "--mech", "greedy", "--grid", "0,1,2", "--out", str(out)])
        assert code == EXIT_FINDING
        assert (out / "verify.txt").read_text().startswith("# generated")
        assert (out / "violations.csv").read_text().startswith("kind,")

    def test_timestamp_suppressible(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for d in (a, b):
            main(["verify", "--mech", "greedy", "--grid", "0,1,2", "--out", str(d), "--no-timestamp"])
        assert (a / "verify.txt").read_bytes() == (b / "verify.txt").read_bytes()


class TestRatio:
    def test_discount_witness_row(self, capsys):
        code, out = run(capsys, "ratio", "--mech", "discount", "--grid", "0,2,100,101")
        assert code == EXIT_CLEAN
        assert "discount,51,0,100,2,101,TwoItems,102,2," in out.out

    def test_above_h_is_a_finding(self, capsys):
        code, _ = run(capsys, "ratio", "--mech", "discount", "--grid", "0,2,100,101", "--H", "4")
        assert code == EXIT_FINDING

    def test_stochastic_expected(self, capsys):
        code, out = run(capsys, "ratio", "--mech", "stochastic", "--p", "1/2", "--grid", "0,1,2,5",
                        "--H", "2")
        assert code == EXIT_CLEAN and "expected" in out.out


class TestOtherCommands:
    def test_payments_greedy(self, capsys):
        code, out = run(capsys, "payments", "--mech", "greedy", "--grid", "0,1,2,3,4,8",
                        "--no-timestamp")
        assert code == EXIT_FINDING and "negative cycle" in out.out

    def test_lemmas_file_spec(self, capsys, tmp_path):
        spec = tmp_path / "t.mech"
        spec.write_text("kind = threshold\npi_default = 2 5\nphi_default = 10 10\n")
        code, out = run(capsys, "lemmas", "--mech", str(spec), "--grid", "0,1,3,6", "--H", "10",
                        "--no-timestamp")
        assert code in (EXIT_CLEAN, EXIT_FINDING)
        assert "L7" in out.out

    def test_probe(self, capsys):
        code, out = run(capsys, "probe", "--mech", "discount",
                        "--grid", "0,1/512,1/64,1/16,1/8,1/2,1,8",
                        "--N", "8", "--eps", "1/8", "--H", "4", "--no-timestamp")
        assert code in (EXIT_CLEAN, EXIT_FINDING)
        assert "candidate_ratios" in out.out or "L9" in out.out

    def test_search_micro(self, capsys):
        code, out = run(capsys, "search", "--grid", "0,1,2", "--H", "1", "--no-timestamp", "--log")
        assert code == EXIT_FINDING
        assert "verdict = no candidate within H" in out.out
        assert "remove " in out.out

    def test_demo_list(self, capsys):
        code, out = run(capsys, "demo")
        assert code == EXIT_CLEAN and "discount" in out.out

    @pytest.mark.parametrize("name", ["greedy", "lemmas", "probe", "regions", "stochastic"])
    def test_demo_runs(self, capsys, name):
        code, out = run(capsys, "demo", name)
        assert code == EXIT_CLEAN and out.out

    def test_probe_demo_ratio_witness(self, capsys):
        _, out = run(capsys, "demo", "probe")
        assert "ratio witnesses: fail" in out.out and "ratio=8" in out.out


class TestConfigErrors:
    @pytest.mark.parametrize("argv", [
        ["verify", "--mech", "nope", "--grid", "0,1"],
        ["verify", "--mech", "discount", "--grid", "0,banana"],
        ["verify", "--mech", "discount"],
        ["lemmas", "--mech", "discount", "--grid", "0,1"],
        ["probe", "--mech", "discount", "--grid", "0,1", "--N", "2", "--eps", "1/8", "--H", "4"],
        ["search", "--grid", "0,1", "--H", "-1"],
        ["frobnicate"],
        ["ratio", "--mech", "stochastic", "--p", "0", "--grid", "0,1"],
    ])
    def test_exit_two(self, argv, capsys):
        assert main(argv) == EXIT_CONFIG

    def test_bad_grid_file_names_line(self, tmp_path, capsys):
        p = tmp_path / "bad.grid"
        p.write_text("0\n1\n-3\n")
        assert main(["verify", "--mech", "discount", "--grid", str(p)]) == EXIT_CONFIG
        assert ":3:" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "truthlab", "demo", "list"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "demos:" in proc.stdout
