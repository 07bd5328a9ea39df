"""Command-line interface: output formats, exit codes, error reporting.

Most tests drive ``cli.main`` in-process for speed; one test invokes the
installed console script to cover the packaging entry point.
"""

import json
import shutil
import subprocess
import sys

import pytest

from infdiag import builtin_example, load, oracle_posterior, save, sum_out
from infdiag.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def fig9_file(tmp_path):
    path = tmp_path / "fig9.json"
    path.write_text(save(builtin_example("fig9")))
    return str(path)


def test_example_then_validate(capsys, tmp_path):
    path = tmp_path / "m.json"
    code, out, err = run(capsys, "example", "fig9", "-o", str(path))
    assert code == 0
    assert out == "" and err == ""
    assert load(path.read_text()) == builtin_example("fig9")

    code, out, err = run(capsys, "validate", str(path))
    assert code == 0
    assert out == "ok: 7 node(s), 6 arc(s)\n"


def test_example_writes_stdout_without_output_flag(capsys):
    code, out, _ = run(capsys, "example", "fig5")
    assert code == 0
    assert out == save(builtin_example("fig5"))


def test_query_text_matches_oracle(capsys, fig9_file):
    code, out, _ = run(capsys, "query", fig9_file,
                       "--target", "heart_failure",
                       "--evidence", "xray=abnormal,frothy_urine=yes")
    assert code == 0
    d = builtin_example("fig9")
    vec = oracle_posterior(d, "heart_failure",
                           {"xray": "abnormal", "frothy_urine": "yes"})
    expected = [
        f"P(heart_failure={o} | xray=abnormal, frothy_urine=yes) = {p:.12g}"
        for o, p in zip(("absent", "present"), vec)
    ]
    assert out.splitlines() == expected


def test_query_without_evidence_prints_prior(capsys, fig9_file):
    code, out, _ = run(capsys, "query", fig9_file, "--target", "heart_failure")
    assert code == 0
    assert out.splitlines() == ["P(heart_failure=absent) = 0.9",
                                "P(heart_failure=present) = 0.1"]


def test_query_json_is_deterministic_and_accurate(capsys, fig9_file):
    argv = ("query", fig9_file, "--target", "nephrotic_syndrome",
            "--evidence", "frothy_urine=yes", "--format", "json")
    code, out1, _ = run(capsys, *argv)
    assert code == 0
    _, out2, _ = run(capsys, *argv)
    assert out1 == out2

    doc = json.loads(out1)
    assert doc["target"] == "nephrotic_syndrome"
    assert doc["evidence"] == {"frothy_urine": "yes"}
    vec = oracle_posterior(builtin_example("fig9"), "nephrotic_syndrome",
                           {"frothy_urine": "yes"})
    got = [doc["posterior"]["absent"], doc["posterior"]["present"]]
    assert max(abs(a - b) for a, b in zip(got, vec)) <= 1e-10


def test_query_explain_prints_plan(capsys, fig9_file):
    code, out, _ = run(capsys, "query", fig9_file,
                       "--target", "heart_failure",
                       "--evidence", "xray=abnormal", "--explain")
    assert code == 0
    lines = out.splitlines()
    header = [ln for ln in lines if ln.startswith("plan (")]
    assert len(header) == 1
    assert "arcs added" in header[0] and "parameters touched" in header[0]
    steps = [ln for ln in lines if ln.startswith("  ")]
    assert steps and all(":" in ln for ln in steps)
    assert any("condition:xray=abnormal" in ln for ln in steps)


def test_query_evidence_on_target_fails(capsys, fig9_file):
    code, out, err = run(capsys, "query", fig9_file,
                         "--target", "xray", "--evidence", "xray=abnormal")
    assert code == 1
    assert out == ""
    assert err.startswith("EvidenceOnTarget:")


def test_query_duplicate_evidence_fails(capsys, fig9_file):
    code, _, err = run(capsys, "query", fig9_file, "--target", "heart_failure",
                       "--evidence", "xray=abnormal",
                       "--evidence", "xray=normal")
    assert code == 1
    assert err.startswith("InvalidParameters:")


def test_query_unknown_target_fails(capsys, fig9_file):
    code, _, err = run(capsys, "query", fig9_file, "--target", "nope")
    assert code == 1
    assert err.startswith("UnknownNode:")


def test_validate_broken_file_names_violation(capsys, tmp_path):
    doc = {"version": 1, "nodes": [{
        "name": "x", "outcomes": ["a", "b"], "kind": "probabilistic",
        "parents": [], "cpt": [[0.5, 0.4]],
    }]}
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(doc))
    code, out, err = run(capsys, "validate", str(path))
    assert code == 1
    assert out == ""
    assert "NormalizationViolation" in err


def test_reverse_writes_loadable_model(capsys, fig9_file):
    code, out, _ = run(capsys, "reverse", fig9_file,
                       "--arc", "cardiomegaly:xray")
    assert code == 0
    d = load(out)
    assert ("xray", "cardiomegaly") in d.arcs
    assert ("cardiomegaly", "xray") not in d.arcs


def test_reverse_missing_arc_fails(capsys, fig9_file):
    code, _, err = run(capsys, "reverse", fig9_file,
                       "--arc", "xray:cardiomegaly")
    assert code == 1
    assert err.startswith("NoSuchArc:")


def test_sumout_output_matches_library(capsys, fig9_file):
    code, out, _ = run(capsys, "sumout", fig9_file,
                       "--node", "nephrotic_syndrome")
    assert code == 0
    d = load(out)
    assert d == sum_out(builtin_example("fig9"), "nephrotic_syndrome")
    assert d.parents("pitting_edema") == ("heart_failure",)


def test_refactor_reorders_arcs(capsys, tmp_path):
    path = tmp_path / "fig7.json"
    path.write_text(save(builtin_example("fig7")))
    code, out, _ = run(capsys, "refactor", str(path),
                       "--order", "effect_a,effect_b,cause")
    assert code == 0
    d = load(out)
    assert list(d.nodes) == ["effect_a", "effect_b", "cause"]
    assert all(c == "cause" or (p, c) == ("effect_a", "effect_b")
               for p, c in d.arcs)


def test_metrics_exact_lines(capsys, fig9_file):
    code, out, _ = run(capsys, "metrics", fig9_file)
    assert code == 0
    assert out == "nodes: 7\narcs: 6\nfree parameters: 14\n"


def test_orders_table_format_and_ranking(capsys, tmp_path):
    from conftest import DOCS
    path = str(DOCS / "order_gap.json")
    code, out1, _ = run(capsys, "orders", path, "--target", "v1",
                        "--mode", "exhaustive")
    assert code == 0
    _, out2, _ = run(capsys, "orders", path, "--target", "v1",
                     "--mode", "exhaustive")
    assert out1 == out2

    lines = out1.splitlines()
    assert lines[0] == "rank  added_arcs  peak_arcs  peak_params  order"
    added = [int(ln.split()[1]) for ln in lines[1:]]
    assert added == sorted(added)
    assert added[-1] - added[0] >= 1


def test_orders_greedy_sample_is_deterministic(capsys, fig9_file):
    argv = ("orders", fig9_file, "--target", "heart_failure",
            "--evidence", "xray=abnormal", "--mode", "greedy-sample")
    code, out1, _ = run(capsys, *argv)
    assert code == 0
    _, out2, _ = run(capsys, *argv)
    assert out1 == out2
    assert len(out1.splitlines()) >= 2


def test_export_dot_stdout(capsys, fig9_file):
    code, out, _ = run(capsys, "export-dot", fig9_file)
    assert code == 0
    assert out.startswith("digraph influence_diagram {")
    assert '"heart_failure" -> "cardiomegaly";' in out


def test_gen_random_roundtrip_through_cli(capsys, tmp_path):
    path = tmp_path / "r.json"
    argv = ("gen-random", "--nodes", "6", "--seed", "9", "-o", str(path))
    code, _, _ = run(capsys, *argv)
    assert code == 0
    first = path.read_text()

    code, out, _ = run(capsys, "validate", str(path))
    assert code == 0
    assert out.startswith("ok: 6 node(s)")

    run(capsys, *argv)
    assert path.read_text() == first


def test_independent_yes_and_no(capsys, tmp_path):
    path = tmp_path / "fig8.json"
    path.write_text(save(builtin_example("fig8")))
    code, out, _ = run(capsys, "independent", str(path),
                       "--a", "cause_a", "--b", "cause_b")
    assert (code, out) == (0, "yes\n")
    code, out, _ = run(capsys, "independent", str(path),
                       "--a", "cause_a", "--b", "cause_b",
                       "--given", "effect")
    assert (code, out) == (0, "no\n")


def test_bad_evidence_syntax_is_usage_error(capsys, fig9_file):
    with pytest.raises(SystemExit) as exc:
        main(["query", fig9_file, "--target", "heart_failure",
              "--evidence", "xray"])
    assert exc.value.code == 2


def test_bad_arc_syntax_is_usage_error(capsys, fig9_file):
    with pytest.raises(SystemExit) as exc:
        main(["reverse", fig9_file, "--arc", "cardiomegaly->xray"])
    assert exc.value.code == 2


def test_missing_file_is_engine_error(capsys, tmp_path):
    code, _, err = run(capsys, "validate", str(tmp_path / "absent.json"))
    assert code == 1
    assert err.startswith("FileNotFoundError:")


def test_unknown_example_is_engine_error(capsys):
    code, _, err = run(capsys, "example", "fig99")
    assert code == 1
    assert err.startswith("UnknownExample:")


@pytest.mark.skipif(shutil.which("infdiag") is None,
                    reason="console script not installed")
def test_console_script_subprocess():
    proc = subprocess.run(["infdiag", "example", "fig9"],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0
    assert proc.stdout == save(builtin_example("fig9"))

    proc = subprocess.run(["infdiag", "example", "fig99"],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 1
    assert proc.stderr.startswith("UnknownExample:")


def test_module_entry_point_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "infdiag.cli", "metrics", "/dev/stdin"],
        input=save(builtin_example("fig5")),
        capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0
    assert proc.stdout == "nodes: 2\narcs: 1\nfree parameters: 2\n"
