import json
import subprocess
import sys
from pathlib import Path

from iltkit import FieldTower, operator_from_json, parse_operator
from iltkit.cli import main, run_command

WS = str(Path(__file__).parent / "data" / "worked_example.ws")
T = FieldTower(["x", "y", "z"])


def run_json(*argv):
    code, text = run_command(["--json", *argv])
    return code, json.loads(text)


def test_ilt_verify_worked_example():
    code, text = run_command(["-w", WS, "ilt", "verify"])
    assert code == 0 and text.splitlines()[-1] == "verified"
    code, data = run_json("-w", WS, "ilt", "verify")
    assert code == 0 and data["op"] == "ilt verify" and data["status"] == "ok"
    assert data["result"]["passed"] is True


def test_ilt_verify_failure_reports_residual():
    code, data = run_json("-w", WS, "ilt", "verify", "--m1", "M1 + 1")
    assert code == 1 and data["status"] == "fail"
    assert data["residual"] == str(parse_operator("x^2*Dx*Dy + x*y*Dx*Dz - x^3*Dz^2 + Dx + 2*x*Dy + 2*y*Dz + 2/x", T))


def test_ilt_generate():
    code, data = run_json("ilt", "generate", "--htilde", "Dz^2", "--theta1", "x", "--theta2", "x^2",
                          "--x1", "x^2*Dy + x*y*Dz + 1")
    assert code == 0
    cert = data["result"]
    assert cert["X2"] == "Dx + 2/x" and cert["psi"] == "-3/x" and cert["verified"] is True
    assert cert["L1"] == "x^2*Dx*Dy + x*y*Dx*Dz - x^3*Dz^2 + Dx + x*Dy - 1/x"


def test_ilt_generate_with_maps():
    code, data = run_json("--vars", "x,y", "ilt", "generate", "--htilde", "Dy^2 + y", "--theta1", "x",
                          "--theta2", "x", "--x1", "DY + X", "--fwd", "X=x + y^2", "--fwd", "Y=y",
                          "--inv", "x=X - Y^2", "--inv", "y=Y")
    assert code == 0 and data["result"]["X2"] == "DX - 1/(Y^2 - X)"


def test_laplace_commands():
    code, text = run_command(["laplace", "invariants", "--a", "x", "--b", "y", "--c", "x*y"])
    assert (code, text) == (0, "h = 1\nk = 1")
    code, data = run_json("laplace", "transform", "--a", "x*y", "--dir", "Y")
    assert code == 1 and data["status"] == "fail" and data["error"] == "ZeroInvariant"
    code, text = run_command(["laplace", "transform", "--a", "x*y", "--dir", "Y"])
    assert code == 1 and "ZeroInvariant" in text
    code, data = run_json("laplace", "transform", "--a", "x*y")
    assert code == 0 and data["result"]["psi"] == "-1/y"
    code, data = run_json("laplace", "cascade", "--a", "2/(x + y)", "--max-steps", "3")
    assert code == 0 and data["result"]["status"] == "Exhausted" and len(data["result"]["steps"]) == 4
    assert set(data["result"]["steps"][0]) == {"step", "a", "b", "c", "h", "k", "status"}
    code, data = run_json("laplace", "cascade")
    assert data["result"]["factors"] == ["Dx", "Dy"]


def test_malformed_expression_exits_2():
    code, text = run_command(["compose", "Dx + * x"])
    assert code == 2 and "ExprSyntaxError" in text and "column 6" in text
    code, data = run_json("compose", "Dx/Dy")
    assert code == 2 and data["status"] == "error" and data["error"] == "ExprSyntaxError"


def test_usage_errors_exit_2():
    assert run_command([])[0] == 2
    assert run_command(["frobnicate"])[0] == 2
    assert run_command(["laplace", "transform", "--dir", "Z"])[0] == 2
    assert run_command(["-w", "/nonexistent.ws", "compose", "Dx"])[0] == 2


def test_algebra_commands():
    assert run_command(["compose", "Dx + y", "Dy + x"]) == (0, "Dx*Dy + x*Dx + y*Dy + x*y + 1")
    assert run_command(["commutator", "x^3*Dz^2", "Dx + 2/x"]) == (0, "-3*x^2*Dz^2")
    assert run_command(["divide", "Dx^2", "Dx + x"]) == (0, "Q = Dx - x\nR = x^2 - 1")
    assert run_command(["symbol", "Dx*Dy + x*Dx"]) == (0, "xi_x*xi_y")
    assert run_command(["apply", "Dx + 2/x", "x^2"]) == (0, "4*x")
    assert run_command(["--vars", "x", "chvar", "Dx", "--fwd", "X=2*x", "--inv", "x=X/2"]) == (0, "2*DX")


def test_json_operators_reingest():
    code, data = run_json("compose", "(Dx + 2/x)", "x^2*Dy + x*y*Dz + 1")
    assert code == 0
    A = operator_from_json(data["result"]["terms"], T)
    assert A == parse_operator(data["result"]["text"], T)
    assert A == parse_operator("x^2*Dx*Dy + x*y*Dx*Dz + Dx + 4*x*Dy + 3*y*Dz + 2/x", T)


def test_classical_commands():
    code, text = run_command(["--vars", "x", "darboux", "schrodinger", "--v", "x"])
    assert code == 0 and text.startswith("u = x^2 + 1\nu_tilde = x^2 - 1")
    code, data = run_json("darboux", "hyperbolic", "--seed", "x + y")
    assert code == 0 and data["result"]["M"] == "Dx - 1/(x + y)"
    code, data = run_json("darboux", "hyperbolic", "--seed", "x + y", "--seed", "x*y")
    assert code == 1 and data["error"] == "SeedNotASolution"
    code, data = run_json("darboux", "parabolic", "--b", "1", "--seed", "x")
    assert data["result"]["L1"] == "Dx^2 + Dy - 2/x^2"
    code, data = run_json("euler-darboux", "--A", "Dx^2", "--B", "Dy", "--h", "x")
    assert data["result"]["L1"] == "Dx^2 + Dy - 2/x^2"
    code, data = run_json("--gen", "t=x: 0, y: -y*t", "petren", "--A", "y", "--A", "1", "--B=-1", "--B", "0",
                          "--alpha0", "t")
    assert code == 0 and data["result"]["M"] == "Dy + y"
    code, data = run_json("gauge", "Dx^2", "--lam", "x")
    assert data["result"]["L1"] == "Dx^2 + 2/x*Dx"
    code, data = run_json("--vars", "x", "lodo", "euclid", "Dx^2", "Dx + x")
    assert data["result"]["rgcd"] == "1"
    code, data = run_json("--vars", "x", "lodo", "transform", "Dx^2", "Dx")
    assert code == 1 and data["error"] == "DivisibleByM"


def test_dini_commands():
    code, text = run_command(["dini", "decompose", "--H", "x*Dx + Dz", "--X2", "Dx"])
    assert (code, text) == (0, "kappa = 0\nrho = -1")
    args = ["dini", "to-ilt", "--X1", "Dy", "--X2", "Dx", "--H", "x*Dx + Dz", "--kappa", "0", "--rho=-1"]
    code, data = run_json(*args, "--alpha=-x")
    assert code == 0 and data["result"]["psi"] == "0"
    code, data = run_json(*args, "--alpha=-2*x")
    assert code == 1 and data["error"] == "AlphaNotASolution"


def test_intertwine_commands():
    code, data = run_json("-w", WS, "intertwine", "solve", "L", "M")
    assert code == 0 and data["result"]["status"] == "Unique" and data["result"]["M1"] == "Dx - 1/x"
    code, text = run_command(["--vars", "x", "intertwine", "solve", "Dx^2", "Dx"])
    assert code == 0 and text.startswith("status: NonUnique")
    code, data = run_json("-w", WS, "intertwine", "certify", "L", "M", "L1", "M1")
    assert code == 0 and data["result"]["certified"] is True
    code, data = run_json("-w", WS, "intertwine", "certify", "L", "M", "L1 + Dy^2", "M1")
    assert code == 1 and data["status"] == "fail"
    code, data = run_json("-w", WS, "intertwine", "normalize", "L", "M", "M1", "L1")
    assert code == 0 and data["result"]["H"] == "x^3*Dz^2"
    code, text = run_command(["intertwine", "kernel", "Dx*Dy", "Dx - 1/(x + y)", "--seed", "x + y",
                              "--H", "-1/(x + y)*Dy + 1/(x + y)^2"])
    assert code == 0 and text == "x + y: L=true M=true H=true"


def test_json_flag_position_is_free():
    a = run_command(["--json", "symbol", "Dx*Dy"])
    b = run_command(["symbol", "Dx*Dy", "--json"])
    assert a == b and json.loads(a[1])["result"]["symbol"] == "xi_x*xi_y"


def test_main_and_entry_point(capsys):
    assert main(["apply", "Dx", "x^2"]) == 0
    assert capsys.readouterr().out == "2*x\n"
    assert main(["compose", "("]) == 2
    assert "ExprSyntaxError" in capsys.readouterr().err
    proc = subprocess.run([sys.executable, "-m", "iltkit.cli", "-w", WS, "ilt", "verify"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "verified" in proc.stdout
