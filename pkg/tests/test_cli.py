import json
import os

import pytest

from koszul.cli import ENGINE_VERSION, RankCache, RunConfig, main, render_diagram, structural_zero
from koszul.combinatorics import RingParams


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_homology_command_char3(capsys):
    code, out = run_cli(
        capsys, "homology", "--n", "7", "--c", "2", "--t", "2", "--deg", "7", "--char", "3"
    )
    assert code == 0
    assert "= 1" in out
    assert "(1, 1, 1, 1, 1, 1, 1)" in out


def test_homology_command_json(capsys):
    code, out = run_cli(
        capsys, "homology", "--n", "7", "--c", "2", "--t", "2", "--deg", "7",
        "--char", "3", "--format", "json",
    )
    assert code == 0
    payload = json.loads(out)
    assert set(payload) == {"query", "result", "meta"}
    assert payload["result"][0]["dim"] == 1
    assert payload["result"][0]["orbits"] == [{"rep": [1, 1, 1, 1, 1, 1, 1], "dim": 1}]
    assert payload["meta"]["char_policy"] == "prime(3)"
    assert payload["meta"]["primes_used"] == [3]
    assert payload["meta"]["engine_version"] == ENGINE_VERSION


def test_table_diagram_small(capsys):
    code, out = run_cli(capsys, "table", "--n", "2", "--c", "2", "--char", "0")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].split("|")[1].split() == ["0", "1"]
    assert lines[2].split("|")[1].split() == ["1", "-"]
    assert lines[3].split("|")[1].split() == ["2", "2"]  # two linear syzygies
    assert lines[4].split("|")[1].split() == ["-", "1"]


def test_table_csv_sorted(capsys):
    code, out = run_cli(
        capsys, "table", "--n", "2", "--c", "2", "--char", "0", "--format", "csv"
    )
    assert code == 0
    rows = out.strip().splitlines()
    assert rows[0] == "t,d,dim"
    keys = [tuple(map(int, r.split(",")[:2])) for r in rows[1:]]
    assert keys == sorted(keys)


def test_index_command(capsys):
    code, out = run_cli(capsys, "index", "--n", "4", "--c", "2", "--char", "0")
    assert code == 0
    assert out.startswith("ind = 5")


def test_verify_duality_ok(capsys):
    code, out = run_cli(
        capsys, "verify", "duality", "--n", "3", "--c", "2", "--tmax", "4", "--char", "0"
    )
    assert code == 0
    assert out.startswith("OK (")


def test_verify_vanishing_ok(capsys):
    code, out = run_cli(capsys, "verify", "vanishing", "--n", "3", "--c", "2", "--char", "0")
    assert code == 0
    assert out.startswith("OK (")


def test_verify_zgen_ok(capsys):
    code, out = run_cli(
        capsys, "verify", "zgen", "--n", "2", "--c", "2", "--t", "1", "--char", "0"
    )
    assert code == 0
    assert "3:2" in out
    assert "OK" in out


def test_verify_factorial_char3_reports_findings(capsys):
    code, out = run_cli(
        capsys, "verify", "factorial", "--n", "7", "--c", "2", "--char", "3",
        "--stratum", "1", "1", "1", "1", "1", "1", "1",
    )
    assert code == 0  # expected findings, not failures
    assert "findings: 630" in out


def test_verify_coeffdim(capsys):
    code, out = run_cli(
        capsys, "verify", "coeffdim", "--n", "3", "--c", "2", "--samples", "25", "--seed", "5"
    )
    assert code == 0
    assert out.startswith("OK (25 nonzero cycles")


def test_verify_greenbound(capsys):
    code, out = run_cli(capsys, "verify", "greenbound", "--n", "3", "--c", "2", "--char", "0")
    assert code == 0
    assert out.startswith("OK (")


def test_chardep_finds_three(capsys):
    code, out = run_cli(
        capsys, "chardep", "--n", "7", "--c", "2", "--t", "2", "--deg", "7", "--char", "0"
    )
    assert code == 0
    first = out.strip().splitlines()[0]
    assert "3" in first
    assert "5" not in first  # no prime above c+1 shows up


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["table", "--n", "3"])  # missing --c
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["table", "--n", "3", "--c", "2", "--char", "9"])  # 9 not prime
    assert exc.value.code == 2


def test_structural_zero_positions():
    p = RingParams(3, 3)
    assert not structural_zero(p, 1, 3)  # linear-strand zero is computed, not structural
    assert not structural_zero(p, 1, 4)
    assert structural_zero(p, 1, 10)  # j = 7 >= t+c
    assert structural_zero(p, 8, 24)  # above depth bound
    assert structural_zero(p, 2, 5)  # below t*c: no chains


def test_render_diagram_alignment():
    p = RingParams(2, 2)
    entries = {(0, 0): 1, (1, 3): 2, (2, 6): 1, (0, 1): 2}
    text = render_diagram(p, entries, 2, 2)
    assert "|" in text.splitlines()[0]


def test_cache_roundtrip(tmp_path):
    path = str(tmp_path / "ranks.jsonl")
    cache = RankCache(path)
    cache.put(3, 2, 1, (2, 1, 0), 0, 5)
    cache.put(3, 2, 1, (2, 1, 0), 7, 4)
    assert cache.get(3, 2, 1, (2, 1, 0), 0) == 5
    assert cache.get(3, 2, 1, (2, 1, 0), 7) == 4
    assert cache.get(3, 2, 1, (2, 1, 0), 11) is None  # p mismatch -> miss
    reloaded = RankCache(path)
    assert reloaded.get(3, 2, 1, (2, 1, 0), 0) == 5
    assert len(reloaded) == 2


def test_cache_skips_corrupt_lines(tmp_path, caplog):
    path = str(tmp_path / "ranks.jsonl")
    good = {"n": 2, "c": 2, "t": 1, "alpha": [2, 0], "p": 0, "rank": 1, "engine": ENGINE_VERSION}
    with open(path, "w") as fh:
        fh.write(json.dumps(good) + "\n")
        fh.write("this is not json\n")
        fh.write(json.dumps({"n": 1}) + "\n")
        fh.write(json.dumps(dict(good, engine="other", rank=9)) + "\n")
    cache = RankCache(path)
    assert cache.get(2, 2, 1, (2, 0), 0) == 1
    assert len(cache) == 1


def test_warm_cache_replays_without_eliminations(tmp_path):
    cfg = RunConfig(n=3, c=3, cache_dir=str(tmp_path), primes=3)
    engine = cfg.engine()
    cold = engine.homology_table(7, 27)
    assert engine.stats["eliminations"] > 0
    warm_engine = cfg.engine()
    warm = warm_engine.homology_table(7, 27)
    assert warm_engine.stats["eliminations"] == 0
    assert warm.entries == cold.entries


def test_output_determinism(capsys):
    argv = ["table", "--n", "3", "--c", "2", "--char", "0", "--seed", "4"]
    _, first = run_cli(capsys, *argv)
    _, second = run_cli(capsys, *argv)
    assert first == second  # diagram output carries no timing

    argv_json = argv + ["--format", "json"]
    _, a = run_cli(capsys, *argv_json)
    _, b = run_cli(capsys, *argv_json)
    pa, pb = json.loads(a), json.loads(b)
    pa["meta"].pop("elapsed_ms")
    pb["meta"].pop("elapsed_ms")
    assert pa == pb


def test_no_orbit_changes_nothing_visible(capsys):
    base = ["table", "--n", "3", "--c", "2", "--char", "0", "--format", "csv"]
    _, plain = run_cli(capsys, *base)
    _, reduced = run_cli(capsys, *(base + ["--no-orbit"]))
    assert plain == reduced


def test_env_cache_dir(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("KOSZ_CACHE_DIR", str(tmp_path))
    code, _ = run_cli(capsys, "homology", "--n", "2", "--c", "2", "--t", "1", "--deg", "3")
    assert code == 0
    assert os.path.exists(tmp_path / "rank_cache.jsonl")
