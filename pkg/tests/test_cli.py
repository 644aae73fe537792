"""End-to-end checks of the command-line interface.

Commands run in-process through main(argv); one subprocess test covers
the installed console script. Exit codes: 0 success, 1 invariant or
reproduction failure, 2 usage or parse error.
"""

import contextlib
import io
import json
import shutil
import subprocess
import sys

import pytest

from nsboxes.cli import main


def run(argv):
    out, errbuf = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(errbuf):
        rc = main(argv)
    return rc, out.getvalue(), errbuf.getvalue()


def run_json(argv):
    rc, out, _ = run(argv)
    return rc, json.loads(out)


@pytest.fixture
def npr3(tmp_path):
    p = tmp_path / "npr3.json"
    p.write_text(json.dumps({"kind": "npr", "n": 3}))
    return str(p)


@pytest.fixture
def fc5(tmp_path):
    doc = {"kind": "full_correlation", "n": 5,
           "anf": [[1, 2, 3], [1, 4], [4, 5], [3]]}
    p = tmp_path / "fc5.json"
    p.write_text(json.dumps(doc))
    return str(p)


@pytest.fixture
def mix2(tmp_path):
    doc = {
        "kind": "mixture", "epsilon": "1/10",
        "components": [{"kind": "npr", "n": 2},
                       {"kind": "even_parity", "n": 2}],
    }
    p = tmp_path / "mix2.json"
    p.write_text(json.dumps(doc))
    return str(p)


@pytest.fixture
def signaling(tmp_path):
    # party 1's marginal at input 00 differs from input 01
    probs = {
        "00": {"00": "1/1"},
        "10": {"00": "1/1"},
        "01": {"10": "1/1"},
        "11": {"00": "1/1"},
    }
    p = tmp_path / "sig.json"
    p.write_text(json.dumps({"kind": "table", "n": 2, "probs": probs}))
    return str(p)


class TestBox:
    def test_summary(self, npr3):
        rc, doc = run_json(["box", npr3])
        assert rc == 0
        assert doc["n"] == 3
        assert doc["nonsignaling"] is True
        assert doc["subset_outputs_uniform"] is True
        assert set(doc["support_sizes"]) == {
            format(x, "03b")[::-1] for x in range(8)
        }
        assert all(v == 4 for v in doc["support_sizes"].values())

    def test_check_passes(self, npr3):
        rc, _, _ = run(["box", npr3, "--check"])
        assert rc == 0

    def test_signaling_detected(self, signaling):
        rc, doc = run_json(["box", signaling])
        assert rc == 0  # without --check the report is informational
        assert doc["nonsignaling"] is False
        witness = doc["signaling_witness"]
        assert witness["subset"] == [1]
        assert {witness["x"], witness["x_alt"]} == {"00", "01"}

    def test_signaling_check_fails(self, signaling):
        rc, _, _ = run(["box", signaling, "--check"])
        assert rc == 1

    def test_csv(self, npr3):
        rc, out, _ = run(["box", npr3, "--format", "csv"])
        assert rc == 0
        assert out.startswith("field,value")
        assert "input,support_size" in out

    def test_missing_file(self):
        rc, _, errtext = run(["box", "/nonexistent/box.json"])
        assert rc == 2
        assert "cannot read" in errtext

    def test_bad_document(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"kind": "npr", "n": 2, "oops": 1}')
        rc, _, errtext = run(["box", str(p)])
        assert rc == 2
        assert "oops" in errtext


class TestDistill:
    def test_fixed_rounds_golden(self):
        rc, doc = run_json(["distill", "--n", "3", "--epsilon", "1/2",
                            "--rounds", "3"])
        assert rc == 0
        assert doc["epsilons"] == ["1/2", "9/16", "639/1024",
                                   "2863359/4194304"]
        assert doc["rounds"] == 3
        assert doc["copies_used"] == 8

    def test_delta_mode(self):
        rc, doc = run_json(["distill", "--n", "2", "--epsilon", "1/10",
                            "--delta", "1/10"])
        assert rc == 0
        assert doc["rounds"] == 9
        assert doc["delta"] == "1/10"
        assert "final_lower_bound" in doc

    def test_delta_mode_with_tail(self):
        rc, doc = run_json(["distill", "--n", "3", "--epsilon", "1/10",
                            "--delta", "1/1000"])
        assert rc == 0
        assert doc["rounds"] == 35
        assert doc["tail_bounds"]  # exact prefix ends before round 35

    def test_audit(self):
        rc, doc = run_json(["distill", "--n", "2", "--epsilon", "1/3",
                            "--rounds", "2", "--audit-boxlevel"])
        assert rc == 0
        # rounds mode audits nothing extra; flag must still be accepted
        assert doc["rounds"] == 2

    def test_epsilon_one_rejected(self):
        rc, _, errtext = run(["distill", "--n", "3", "--epsilon", "1/1",
                              "--rounds", "2"])
        assert rc == 2
        assert "epsilon" in errtext

    def test_requires_delta_or_rounds(self):
        rc, _, _ = run(["distill", "--n", "3", "--epsilon", "1/2"])
        assert rc == 2

    def test_delta_and_rounds_exclusive(self):
        rc, _, _ = run(["distill", "--n", "3", "--epsilon", "1/2",
                        "--delta", "1/10", "--rounds", "2"])
        assert rc == 2

    def test_csv_rows(self):
        rc, out, _ = run(["distill", "--n", "2", "--epsilon", "1/2",
                          "--rounds", "1", "--format", "csv"])
        assert rc == 0
        lines = out.strip().splitlines()
        assert lines[0] == "round,kind,lo,hi"
        assert lines[1] == "0,exact,1/2,1/2"
        assert lines[2] == "1,exact,5/8,5/8"


class TestComm:
    def test_worked_example(self, fc5):
        rc, doc = run_json(["comm", fc5])
        assert rc == 0
        assert doc["n_j"] == 1
        assert doc["scratch_channels"] == 4
        assert doc["distill_channel_bound"] == 2
        assert doc["corollary_holds"] is True
        assert doc["plan"]["channels"] == [[5, 4], [4, 1]]
        assert doc["plan"]["isolated_monomial"] == [1, 2, 3]

    def test_hypothesis_not_met(self, tmp_path):
        doc = {"kind": "full_correlation", "n": 4, "anf": [[1, 2], [3, 4]]}
        p = tmp_path / "two.json"
        p.write_text(json.dumps(doc))
        rc, out = run_json(["comm", str(p)])
        assert rc == 0  # descriptive output, not a failure
        assert "hypothesis not met" in out["notice"]
        assert out["n_j"] == 2
        assert "scratch_channels" not in out
        assert "plan" not in out

    def test_local_function(self, tmp_path):
        doc = {"kind": "full_correlation", "n": 2, "anf": [[1], [2]]}
        p = tmp_path / "loc.json"
        p.write_text(json.dumps(doc))
        rc, out = run_json(["comm", str(p)])
        assert rc == 0
        assert "local" in out["notice"]

    def test_needs_full_correlation(self, npr3):
        rc, _, errtext = run(["comm", npr3])
        assert rc == 2
        assert "full_correlation" in errtext


class TestDistance:
    def test_mixture(self, mix2):
        rc, doc = run_json(["distance", mix2])
        assert rc == 0
        assert doc["distance"] == "1/5"
        assert doc["method"] == "exact"

    def test_symmetric_five_party(self, fc5):
        rc, doc = run_json(["distance", fc5, "--use-symmetry"])
        assert rc == 0
        assert doc["distance"] == "20/1"
        assert doc["method"] == "exact+symmetry"

    def test_party_cap(self, fc5):
        rc, _, errtext = run(["distance", fc5, "--party-cap", "4"])
        assert rc == 2
        assert "cap" in errtext

    def test_csv(self, mix2):
        rc, out, _ = run(["distance", mix2, "--format", "csv"])
        assert rc == 0
        assert "distance,1/5" in out.replace("\r", "")


@pytest.fixture(scope="module")
def report():
    rc, doc = run_json(["survey3"])
    assert rc == 0
    return doc


@pytest.fixture(scope="module")
def repro_result():
    out, errbuf = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(errbuf):
        rc = main(["reproduce-example"])
    return rc, json.loads(out.getvalue()), errbuf.getvalue()


class TestSurvey:
    def test_counts(self, report):
        assert report["total"] == 256
        assert report["nonlocal_count"] == 240

    def test_blanket_claim_fails(self, report):
        assert report["all_nonlocal_satisfy_precondition"] is False
        assert report["precondition_failures"]
        assert "notice" in report

    def test_orbit_fields(self, report):
        orbit = report["orbits"][0]
        assert {"representative", "size", "is_nonlocal", "n_j",
                "scratch", "corollary_true",
                "corollary_false"} <= set(orbit)


class TestReproduceExample:
    def test_exits_nonzero_on_mismatch(self, repro_result):
        rc, doc, _ = repro_result
        assert rc == 1
        assert doc["ok"] is False

    def test_single_known_mismatch(self, repro_result):
        _, doc, _ = repro_result
        bad = [it for it in doc["items"] if not it["ok"]]
        assert len(bad) == 1
        assert "m" in bad[0]["name"]
        assert bad[0]["tag"] == "quoted"
        assert bad[0]["note"]

    def test_derived_values_all_hold(self, repro_result):
        _, doc, _ = repro_result
        derived = [it for it in doc["items"] if it["tag"] == "derived"]
        assert derived and all(it["ok"] for it in derived)

    def test_lines_on_stderr(self, repro_result):
        _, _, errtext = repro_result
        assert "FAIL" in errtext
        assert "MISMATCH" in errtext


class TestSample:
    def test_within_three_sigma(self, npr3):
        rc, doc = run_json(["sample", npr3, "--input", "111",
                            "--count", "20000", "--seed", "7"])
        assert rc == 0
        assert doc["ok"] is True
        assert len(doc["outputs"]) == 4
        assert all(e["within_3_sigma"] for e in doc["outputs"])
        assert sum(e["count"] for e in doc["outputs"]) == 20000

    def test_deterministic(self, npr3):
        one = run(["sample", npr3, "--input", "010", "--seed", "3"])
        two = run(["sample", npr3, "--input", "010", "--seed", "3"])
        assert one == two

    def test_seed_changes_counts(self, npr3):
        _, a = run_json(["sample", npr3, "--input", "010", "--seed", "1",
                         "--count", "1000"])
        _, b = run_json(["sample", npr3, "--input", "010", "--seed", "2",
                         "--count", "1000"])
        assert a["outputs"] != b["outputs"]

    def test_zero_probability_outputs_absent(self, npr3):
        _, doc = run_json(["sample", npr3, "--input", "000",
                           "--count", "1000", "--seed", "0"])
        # npr at input 000 supports only even-parity outputs
        outs = {e["output"] for e in doc["outputs"]}
        assert outs == {"000", "110", "101", "011"}

    def test_bad_input_length(self, npr3):
        rc, _, errtext = run(["sample", npr3, "--input", "01"])
        assert rc == 2
        assert "length" in errtext


class TestUsage:
    def test_unknown_command(self):
        rc, _, _ = run(["warp"])
        assert rc == 2

    def test_help(self):
        rc, _, _ = run(["--help"])
        assert rc == 0

    def test_no_command(self):
        rc, _, _ = run([])
        assert rc == 2


def test_console_script(tmp_path):
    exe = shutil.which("nsboxes")
    if exe is None:
        pytest.skip("console script not on PATH")
    p = tmp_path / "npr2.json"
    p.write_text(json.dumps({"kind": "npr", "n": 2}))
    proc = subprocess.run([exe, "box", str(p), "--check"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["nonsignaling"] is True


def test_module_invocation(tmp_path):
    p = tmp_path / "npr2.json"
    p.write_text(json.dumps({"kind": "npr", "n": 2}))
    proc = subprocess.run(
        [sys.executable, "-m", "nsboxes.cli", "distance", str(p)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["distance"] == "2/1"
