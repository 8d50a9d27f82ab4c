import csv
import io
import json
import subprocess
import sys

import pytest

from hypdio.cli import main


def run(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "hypdio", *args], capture_output=True, text=True, cwd=cwd)


def call(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_audit_space_json(capsys):
    code, out, _ = call(capsys, "audit-space", "--model", "uhp", "--samples", "500", "--seed", "42")
    assert code == 0
    doc = json.loads(out)
    assert doc["config"]["seed"] == 42 and doc["config"]["command"] == "audit-space"
    assert "result" in doc


def test_tree_orbit_csv(tmp_path):
    path = tmp_path / "orbit.csv"
    r = run("group", "orbit", "--kind", "tree", "--q", "2", "--max-word", "10", "--out", str(path))
    assert r.returncode == 0, r.stderr
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("# config: ")
    cfg = json.loads(lines[0][len("# config: "):])
    assert cfg["max_word"] == 10 and cfg["kind"] == "tree"
    rows = list(csv.reader(io.StringIO("\n".join(lines[1:]))))
    # header plus 1 + 3 (2^10 - 1) orbit points
    assert len(rows) - 1 == 1 + 3 * (2 ** 10 - 1) == 3070


def test_game_transcript_replayable_and_deterministic(tmp_path):
    # same config (relative paths) in two directories
    outs = []
    for k in range(2):
        d = tmp_path / str(k)
        d.mkdir()
        r = run("game", "run", "--variant", "h-potential", "--beta", "0.25", "--c", "0.5", "--rounds", "25",
                "--seed", "7", "--transcript", "t.json", "--out", "o.json", cwd=d)
        assert r.returncode == 0, r.stderr
        outs.append(((d / "t.json").read_bytes(), (d / "o.json").read_bytes()))
    assert outs[0] == outs[1]
    r = run("game", "replay", "--transcript", str(tmp_path / "0" / "t.json"))
    assert r.returncode == 0, r.stderr
    res = json.loads(r.stdout)["result"]
    assert res["valid"] is True and res["violation"] is None
    assert res["outcome"] == json.loads(outs[0][0])["outcome"]["q"]


def test_config_file_and_override(tmp_path, capsys):
    cfgf = tmp_path / "c.json"
    cfgf.write_text(json.dumps({"kind": "tree", "q": 3, "max_word": 2}))
    code, out, _ = call(capsys, "group", "orbit", "--config", str(cfgf), "--max-word", "1", "--explain")
    assert code == 0
    resolved = json.loads(out)
    assert resolved["q"] == 3 and resolved["max_word"] == 1


def test_explain_prints_defaults(capsys):
    code, out, _ = call(capsys, "dio", "ford", "--explain")
    assert code == 0
    cfg = json.loads(out)
    assert {"qmax", "bound", "cap"} <= set(cfg)


def test_exit_codes(capsys):
    assert run("frobnicate").returncode == 2
    assert run("group", "frobnicate").returncode == 2
    assert run("group").returncode == 2
    # sampling command without a seed
    assert call(capsys, "audit-space", "--samples", "10")[0] == 3
    assert call(capsys, "group", "orbit", "--kind", "tree", "--q", "1", "--max-word", "2")[0] == 3
    assert call(capsys, "group", "orbit", "--kind", "sl2z", "--max-word", "40", "--budget", "100")[0] == 4


def test_dio_commands(capsys):
    code, out, _ = call(capsys, "dio", "ba", "--eta", "golden", "--classical", "--Q", "1000")
    assert code == 0 and json.loads(out)["result"]
    code, out, _ = call(capsys, "dio", "jarnik", "--mode", "velani_hill", "--delta", "1.5", "--delta-xi", "0.5",
                        "--c", "0.25")
    assert code == 0
    assert json.loads(out)["result"]["value"] == pytest.approx(1.75 / 1.5)


def test_ford_csv_deterministic(capsys):
    a = call(capsys, "dio", "ford", "--qmax", "5")
    b = call(capsys, "dio", "ford", "--qmax", "5")
    assert a[0] == 0 and a[1] == b[1]
    assert a[1].startswith("# config: ")


def test_console_script():
    r = subprocess.run(["hypdio", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "audit-space" in r.stdout
