import json

import pytest

from swkcenter.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def lines(out):
    return [json.loads(l) for l in out.splitlines()]


@pytest.fixture
def small(tmp_path):
    p = tmp_path / "s.txt"
    p.write_text("config k=1 z=1 eps=0.2 W=10 dmin=1 dmax=16\narrive 0\narrive 1\narrive 2\narrive 10\n")
    return str(p)


def test_run_empty_file(tmp_path, capsys):
    p = tmp_path / "e.txt"
    p.write_text("config k=1 z=0 eps=0.5 W=10 dmin=1 dmax=4\n")
    code, out, _ = run(capsys, "run", str(p))
    rec = lines(out)[0]
    assert code == 0 and rec["radius"] == 0 and rec["centers"] == []


def test_run_small_example(small, capsys):
    code, out, _ = run(capsys, "run", small)
    rec = lines(out)[0]
    assert code == 0 and 1 <= rec["radius"] <= 1.2
    code, out, _ = run(capsys, "run", small, "--mode", "both")
    assert code == 0 and lines(out)[0]["ok"]
    code, out, _ = run(capsys, "run", small, "--mode", "oracle")
    assert lines(out)[0]["opt"] == 1.0


def test_run_queries_and_formats(small, capsys):
    code, out, _ = run(capsys, "run", small, "--queries", "0,2,3", "--format", "csv")
    rows = out.splitlines()
    assert code == 0 and rows[0].startswith("file,t,") and len(rows) == 4
    code, out, _ = run(capsys, "run", small, "--queries", "every:2", "--query", "diameter")
    assert [r["t"] for r in lines(out)] == [0, 2]
    code, out, _ = run(capsys, "run", small, "--query", "kprime", "--kprime", "1")
    assert code == 0
    code, _, _ = run(capsys, "run", small, "--queries", "3,2")
    assert code == 2


def test_run_is_deterministic(tmp_path, capsys):
    f = tmp_path / "u.txt"
    assert run(capsys, "gen", "uniform", "--n", "150", "--seed", "4", "-o", str(f))[0] == 0
    a = run(capsys, "run", str(f), "--queries", "every:10", "--mode", "both")
    b = run(capsys, "run", str(f), "--queries", "every:10", "--mode", "both")
    assert a == b and a[0] == 0


def test_run_jobs(tmp_path, capsys):
    files = []
    for s in range(3):
        f = tmp_path / f"u{s}.txt"
        run(capsys, "gen", "uniform", "--n", "60", "--seed", str(s), "-o", str(f))
        files.append(str(f))
    serial = run(capsys, "run", *files)
    par = run(capsys, "run", *files, "--jobs", "2")
    assert serial == par


def test_exit_codes(tmp_path, capsys):
    dup = tmp_path / "d.txt"
    dup.write_text("config k=1 z=0 eps=0.5 W=10 dmin=1 dmax=4\narrive 1 0\narrive 1 2\n")
    assert run(capsys, "run", str(dup))[0] == 2
    assert run(capsys, "audit", str(dup))[0] == 2
    far = tmp_path / "f.txt"
    far.write_text("config k=1 z=0 eps=0.5 W=10 dmin=1 dmax=4\narrive 0\narrive 9\n")
    assert run(capsys, "run", str(far))[0] == 3
    assert run(capsys, "run", str(tmp_path / "missing.txt"))[0] == 2


def test_contract_violation_exit(tmp_path, capsys):
    # an expectation the data cannot meet is reported as a contract failure
    f = tmp_path / "g.txt"
    f.write_text("config k=1 z=0 eps=0.5 W=10 dmin=1 dmax=4\narrive 0 0\narrive 1 1\n"
                 "expect-ratio-gap 1 2 5\n")
    assert run(capsys, "run", str(f), "--mode", "both")[0] == 4


def test_gen_lb_constant(tmp_path, capsys):
    f = tmp_path / "c.txt"
    assert run(capsys, "gen", "lb-constant", "--k", "2", "--z", "1", "--c", "2", "-o", str(f))[0] == 0
    head = f.read_text().splitlines()[0]
    assert "dmin=1" in head and "dmax=9" in head
    code, out, _ = run(capsys, "run", str(f), "--mode", "both")
    recs = lines(out)
    assert code == 0 and recs[-1]["kind"] == "expect-ratio-gap" and recs[-1]["ok"]


def test_gen_lb_eps(tmp_path, capsys):
    assert run(capsys, "gen", "lb-eps", "--s", "2", "--z", "1", "--eps-prime", "4")[0] == 2
    f = tmp_path / "e.txt"
    assert run(capsys, "gen", "lb-eps", "--s", "2", "--z", "1", "--construction-eps", "0.5",
               "-o", str(f))[0] == 0
    assert run(capsys, "run", str(f), "--mode", "both")[0] == 0
    assert run(capsys, "gen", "lb-constant", "--z", "0")[0] == 2


def test_gen_uniform_header_only(capsys):
    code, out, _ = run(capsys, "gen", "uniform", "--n", "0")
    assert code == 0 and len(out.splitlines()) == 1


def test_audit(tmp_path, capsys):
    f = tmp_path / "u.txt"
    run(capsys, "gen", "uniform", "--n", "80", "--seed", "1", "--window", "20", "-o", str(f))
    assert run(capsys, "audit", str(f))[0] == 0
    code, _, err = run(capsys, "audit", str(f), "--inject-fault", "reps")
    assert code == 5 and "rep-size" in err
    t = tmp_path / "t.txt"
    run(capsys, "gen", "table", "--n", "50", "--seed", "2", "-o", str(t))
    assert run(capsys, "audit", str(t))[0] == 0
