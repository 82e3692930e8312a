import json
import subprocess
import sys
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


def ink(*args, env=None):
    return subprocess.run([sys.executable, "-m", "ink.cli", *map(str, args)],
                          capture_output=True, text=True, env=env)


@pytest.fixture(scope="module")
def chain(tmp_path_factory):
    """Artifacts from one extract -> resolve -> vocab -> genquiz run."""
    out = tmp_path_factory.mktemp("chain")
    paths = {
        "manifest": out / "manifest.jsonl",
        "usages": out / "usages.jsonl",
        "uvocab": out / "uvocab.json",
        "quizzes": out / "quizzes.jsonl",
    }
    steps = [
        ("extract", ["--roots", FIXTURES / "mini_corpus" / "repo_alpha",
                     "--roots", FIXTURES / "mini_corpus" / "repo_beta",
                     "--out", paths["manifest"]]),
        ("resolve", ["--manifest", paths["manifest"], "--out", paths["usages"]]),
        ("vocab", ["--profiles", FIXTURES / "profiles", "--out", paths["uvocab"]]),
        ("genquiz", ["--usages", paths["usages"], "--uvocab", paths["uvocab"],
                     "--profiles", FIXTURES / "profiles",
                     "--out", paths["quizzes"]]),
    ]
    for cmd, args in steps:
        proc = ink(cmd, *args)
        assert proc.returncode == 0, f"{cmd}: {proc.stderr}"
    return paths


def test_chain_artifacts_and_sidecars(chain):
    for path in chain.values():
        assert path.exists()
        sidecar = path.with_name(path.name + ".meta.json")
        assert sidecar.exists()
        meta = json.loads(sidecar.read_text(encoding="utf-8"))
        assert meta["tool_version"].startswith("ink/")
        assert "created_at" in meta
    counts = json.loads((chain["quizzes"].parent / "quizzes.counts.json")
                        .read_text(encoding="utf-8"))
    assert set(counts) == {"call", "import", "alias"}


def test_artifacts_contain_no_timestamps(chain):
    for path in chain.values():
        assert "created_at" not in path.read_text(encoding="utf-8")


def test_resolve_uses_sidecar_roots(chain, tmp_path):
    proc = ink("resolve", "--manifest", chain["manifest"],
               "--out", tmp_path / "usages2.jsonl")
    assert proc.returncode == 0
    assert (tmp_path / "usages2.jsonl").read_text() == \
        chain["usages"].read_text()


def test_missing_input_artifact_exits_two(tmp_path):
    proc = ink("resolve", "--manifest", tmp_path / "nope.jsonl",
               "--out", tmp_path / "out.jsonl")
    assert proc.returncode == 2
    assert "ink extract" in proc.stderr


def test_empty_profile_dir_exits_one(tmp_path):
    (tmp_path / "empty").mkdir()
    proc = ink("vocab", "--profiles", tmp_path / "empty",
               "--out", tmp_path / "uv.json")
    assert proc.returncode == 1
    assert "configuration error" in proc.stderr


def test_unknown_ref_profile_exits_one(chain, tmp_path):
    proc = ink("genquiz", "--usages", chain["usages"],
               "--uvocab", chain["uvocab"],
               "--profiles", FIXTURES / "profiles",
               "--ref-profile", "missing-model",
               "--out", tmp_path / "q.jsonl")
    assert proc.returncode == 1


def test_bad_usage_exits_one():
    proc = ink("extract")  # missing required options
    assert proc.returncode == 1


def test_protocol_violation_exits_three(chain, tmp_path):
    bad = tmp_path / "bad_predictor.py"
    bad.write_text("import json, sys\n"
                   "for line in sys.stdin:\n"
                   "    req = json.loads(line)\n"
                   "    print(json.dumps({'v': 2, 'quiz_id': req['quiz_id'],"
                   " 'candidates': []}))\n", encoding="utf-8")
    proc = ink("eval", "--quizzes", chain["quizzes"],
               "--predictor", f"cmd:{sys.executable} {bad}",
               "--out", tmp_path / "journal.jsonl")
    assert proc.returncode == 3
    assert "protocol error" in proc.stderr


def test_eval_score_report_chain(chain, tmp_path):
    journal = tmp_path / "journal.jsonl"
    proc = ink("eval", "--quizzes", chain["quizzes"],
               "--predictor", "mock:rank:5", "--out", journal)
    assert proc.returncode == 0
    report = tmp_path / "report.json"
    proc = ink("score", "--journal", journal, "--quizzes", chain["quizzes"],
               "--out", report)
    assert proc.returncode == 0
    assert report.exists() and report.with_suffix(".csv").exists()
    data = json.loads(report.read_text(encoding="utf-8"))
    overall = data["rows"][-1]
    assert overall["p_at"]["1"] == 0.0
    assert overall["p_at"]["5"] == 100.0

    out_dir = tmp_path / "rendered"
    proc = ink("report", "--report", report, "--out-dir", out_dir)
    assert proc.returncode == 0
    assert (out_dir / "report.csv").exists()
    pngs = sorted(p.name for p in out_dir.glob("*.png"))
    assert pngs == ["pk_alias.png", "pk_call.png", "pk_import.png"]
    for png in out_dir.glob("*.png"):
        assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_score_macro_alias(chain, tmp_path):
    journal = tmp_path / "journal.jsonl"
    assert ink("eval", "--quizzes", chain["quizzes"], "--predictor",
               "mock:oracle", "--out", journal).returncode == 0
    proc = ink("score", "--journal", journal, "--quizzes", chain["quizzes"],
               "--agg", "macro", "--out", tmp_path / "report.json")
    assert proc.returncode == 0
    data = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    assert data["aggregation"] == "macro_by_fqn"


def test_adversarial_command(chain, tmp_path):
    out = tmp_path / "adv.jsonl"
    proc = ink("adversarial", "--quizzes", chain["quizzes"],
               "--usages", chain["usages"], "--seed", 7, "--out", out)
    assert proc.returncode == 0
    rows = [json.loads(l) for l in out.read_text(encoding="utf-8").splitlines()]
    assert rows and all(r["family"] == "alias_adv" for r in rows)
    meta = json.loads(out.with_name(out.name + ".meta.json")
                      .read_text(encoding="utf-8"))
    assert meta["seed"] == 7
    assert meta["warnings"]  # fixture pool is below ten candidates


def test_nl_command(chain, tmp_path):
    out = tmp_path / "nl.jsonl"
    proc = ink("nl", "--quizzes", chain["quizzes"],
               "--queries", FIXTURES / "queries.jsonl",
               "--profiles", FIXTURES / "profiles", "--out", out)
    assert proc.returncode == 0
    rows = [json.loads(l) for l in out.read_text(encoding="utf-8").splitlines()]
    assert any("nl_context" in r for r in rows)


def test_split_command(chain, tmp_path):
    prefix = tmp_path / "part"
    proc = ink("split", "--quizzes", chain["quizzes"],
               "--training-fqns", FIXTURES / "training_fqns.txt",
               "--out-prefix", prefix)
    assert proc.returncode == 0
    summary = json.loads((tmp_path / "part.split.json").read_text(encoding="utf-8"))
    n_total = sum(1 for _ in open(chain["quizzes"], encoding="utf-8"))
    assert summary["n_seen"] + summary["n_unseen"] + summary["n_dropped"] == n_total
    for name in ("seen", "unseen", "dropped"):
        assert (tmp_path / f"part.{name}.jsonl").exists()


def test_jobs_env_var_is_accepted(tmp_path):
    proc = ink("extract", "--roots", FIXTURES / "mini_corpus" / "repo_alpha",
               "--out", tmp_path / "m.jsonl",
               env={"INK_JOBS": "4", "PATH": "/usr/bin:/bin"})
    assert proc.returncode == 0


def test_version_flag():
    proc = ink("--version")
    assert proc.returncode == 0
    assert "ink" in proc.stdout
