import csv

import pytest

from geomax.cli import main


@pytest.fixture
def inst(tmp_path):
    path = tmp_path / "u.txt"
    assert main(["gen", "--n", "40", "--seed", "3", "-o", str(path)]) == 0
    return path


def test_gen_formats(tmp_path, capsys):
    assert main(["gen", "--n", "5", "--kind", "clustered", "--format", "tsplib"]) == 0
    out = capsys.readouterr().out
    assert "NODE_COORD_SECTION" in out and "DIMENSION : 5" in out


def test_solve_matching(inst, tmp_path, capsys):
    sol, svg = tmp_path / "m.txt", tmp_path / "m.svg"
    assert main(["solve-matching", "-i", str(inst), "-o", str(sol), "--svg", str(svg)]) == 0
    assert "gap=" in capsys.readouterr().out
    assert len(sol.read_text().splitlines()) == 20
    assert svg.read_text().startswith("<?xml")
    assert main(["solve-matching", "-i", str(inst), "--algo", "cross_ls", "--budget", "500",
                 "--center", "combinatorial"]) == 0


def test_solve_tour_and_render(inst, tmp_path):
    sol, svg = tmp_path / "t.txt", tmp_path / "t.svg"
    assert main(["solve-tour", "-i", str(inst), "--algo", "cross_tour_ls", "--budget", "500",
                 "-o", str(sol)]) == 0
    assert sorted(int(x) for x in sol.read_text().split()) == list(range(40))
    assert main(["render", "-i", str(inst), "--solution", str(sol), "--solution-kind", "tour",
                 "-o", str(svg)]) == 0
    assert svg.read_text().count("<line") == 40


def test_bound_and_exact(tmp_path, capsys):
    path = tmp_path / "s.txt"
    path.write_text("4\n0 0\n1 0\n1 1\n0 1\n")
    assert main(["bound", "-i", str(path), "--fwp-prime", "--combinatorial"]) == 0
    out = capsys.readouterr().out
    assert "fwp_num=2.828427" in out and "balanced=True" in out
    for what, value in (("matching", "2.828427"), ("tour", "4.828427"), ("lp", "2.828427"),
                        ("subtour", "4.828427")):
        assert main(["exact", "-i", str(path), "--what", what]) == 0
        assert f"{what}={value}" in capsys.readouterr().out


def test_bench_csv_and_figure(tmp_path, capsys):
    out, fig = tmp_path / "b.csv", tmp_path / "b.png"
    assert main(["bench", "--n", "30", "--kind", "clustered", "--reps", "2",
                 "--algo", "cross,lp_opt,cross_tour", "-o", str(out), "--figure", str(fig),
                 "--summary"]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 6 and {r["seed"] for r in rows} == {"0", "1"}
    assert fig.stat().st_size > 1000
    assert "vs bound" in capsys.readouterr().err


def test_bench_spec_file(tmp_path, capsys):
    spec = tmp_path / "s.json"
    spec.write_text('{"instances": [{"kind": "uniform", "n": 20, "reps": 2}],'
                    ' "algorithms": ["cross"]}')
    assert main(["bench", "--spec", str(spec)]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 3


def test_exit_codes(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve-matching"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1
    assert main(["bench", "--n", "10", "--algo", "cross,bogus"]) == 1
    assert main(["solve-tour", "-i", str(tmp_path / "missing.tsp")]) == 2
    bad = tmp_path / "bad.tsp"
    bad.write_text("NAME : x\nDIMENSION : 3\nEDGE_WEIGHT_TYPE : EXPLICIT\nNODE_COORD_SECTION\n")
    assert main(["bound", "-i", str(bad)]) == 2
    assert "EXPLICIT" in capsys.readouterr().err


def test_module_entry():
    import subprocess
    import sys
    r = subprocess.run([sys.executable, "-m", "geomax", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "solve-matching" in r.stdout
