import json

import pytest

from sosopt import demos
from sosopt.cli import EXIT_ERROR, EXIT_NONE, EXIT_OK, main
from sosopt.model import serialize, sosprogram
from sosopt.sdpa import sdpa_import


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def demo1_file(tmp_path):
    prog, _ = demos.demo1_program()
    path = tmp_path / "demo1.json"
    path.write_text(serialize(prog))
    return path


def test_demo_ok(capsys):
    code, out, _ = run(capsys, "demo", "1")
    assert code == EXIT_OK
    assert out.startswith("demo 1")
    assert "[ok]" in out


def test_demo_json(capsys):
    code, out, _ = run(capsys, "demo", "8", "--json")
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["ok"] is True


def test_demo4_parameter(capsys):
    # at m = 0 the program is infeasible, which is the expected outcome
    code, out, _ = run(capsys, "demo", "4", "--m", "0")
    assert code == EXIT_OK
    assert "infeasible" in out


def test_demo_unknown(capsys):
    code, _, err = run(capsys, "demo", "11")
    assert code == EXIT_ERROR
    assert "unknown demo" in err


def test_demo7_size_guard(capsys):
    code, _, err = run(capsys, "demo", "7", "--n", "14")
    assert code == EXIT_ERROR
    assert err.startswith("error:")


def test_findsos_float(capsys):
    code, out, _ = run(capsys, "findsos", "x^2+2*x+1", "--json")
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["status"] == "sos"
    assert data["Z"] == ["1", "x"]


def test_findsos_rational(capsys):
    code, out, _ = run(capsys, "findsos", "x^2+1", "--rational", "--json")
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["D"] == 1 and data["Qnum"] == [[1, 0], [0, 1]]


def test_findsos_negative_argument(capsys):
    # a leading minus is a polynomial, not an option
    code, _, _ = run(capsys, "findsos", "-x^2")
    assert code == EXIT_NONE


def test_findsos_matrix(capsys):
    code, out, _ = run(capsys, "findsos", "x^2+1, x; x, x^2+1", "--vars", "x")
    assert code == EXIT_OK
    assert out


def test_findsos_parse_error(capsys):
    code, _, err = run(capsys, "findsos", "x^^2")
    assert code == EXIT_ERROR
    assert err.startswith("error:")


def test_findbound_outputs(capsys):
    code, out, _ = run(capsys, "findbound", "x^2-2*x", "--json")
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["bound"] == pytest.approx(-1.0, abs=1e-6)
    code, _, _ = run(capsys, "findbound", "x^3")
    assert code == EXIT_NONE


def test_findbound_constrained_cli(capsys):
    code, out, _ = run(capsys, "findbound", "x", "--ineq", "(x-1)*(2-x)", "--json")
    assert code == EXIT_OK
    assert json.loads(out)["bound"] == pytest.approx(1.0, abs=1e-5)


def test_findlyap_cli(capsys):
    code, out, _ = run(capsys, "findlyap", "-x1^3+x2, -x1-x2", "--vars", "x1,x2", "--json")
    assert code == EXIT_OK
    assert json.loads(out)["status"] == "found"
    code, _, _ = run(capsys, "findlyap", "x1", "--vars", "x1")
    assert code == EXIT_NONE
    code, _, _ = run(capsys, "findlyap", "-x1", "--vars", "x1", "--degree", "3")
    assert code == EXIT_ERROR


def test_solve_matches_run_demo(capsys, demo1_file):
    code, out, _ = run(capsys, "solve", str(demo1_file), "--json")
    data = json.loads(out)
    rep = demos.run_demo(1)
    assert code == EXIT_OK
    assert rep.verdict == "feasible"
    assert data["feasible"] is True


def test_solve_infeasible_exit_code(capsys, tmp_path):
    prog = demos.demo4_program(0)
    path = tmp_path / "d4.json"
    path.write_text(serialize(prog))
    code, _, _ = run(capsys, "solve", str(path))
    assert code == EXIT_NONE


def test_solve_empty_program(capsys, tmp_path):
    path = tmp_path / "empty.json"
    path.write_text(serialize(sosprogram(["x"])))
    code, _, err = run(capsys, "solve", str(path))
    assert code == EXIT_ERROR
    assert "no constraints" in err


def test_solve_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "solve", str(tmp_path / "nope.json"))
    assert code == EXIT_ERROR
    assert err.startswith("error:")


def test_export_sdpa(capsys, demo1_file, tmp_path):
    out_path = tmp_path / "d1.dat-s"
    code, _, _ = run(capsys, "export-sdpa", str(demo1_file), str(out_path))
    assert code == EXIT_OK
    P = sdpa_import(out_path)
    assert P.cone.psd == (3,)
    code, out, _ = run(capsys, "export-sdpa", str(demo1_file))
    assert code == EXIT_OK
    assert out == out_path.read_text()


def test_export_flag_on_findsos(capsys, tmp_path):
    path = tmp_path / "p.dat-s"
    code, _, _ = run(capsys, "findsos", "x^4+1", "--export-sdpa", str(path))
    assert code == EXIT_OK
    assert sdpa_import(path).m > 0
