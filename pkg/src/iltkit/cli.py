"""Command-line interface.

Every command prints either readable text or, with ``--json``, one object
``{"op", "status", "result", "residual"}``.  Exit codes: 0 success,
1 verification failure, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from . import classical, ilt, operators, solver
from .errors import IltError, InputError, VerificationError
from .field import FieldTower
from .text import operator_to_json
from .workspace import Workspace, parse_generator_spec


@dataclass
class Outcome:
    result: object
    text: list[str]
    passed: bool = True
    residual: object = None


def _cert(cert: ilt.IltCertificate) -> Outcome:
    data = cert.to_json()
    lines = [f"{k} = {data[k]}" for k in ("X1", "X2", "H", "psi", "L", "L1", "M", "M1")]
    lines.append(f"verified: {str(data['verified']).lower()}")
    return Outcome(data, lines, data["verified"])


def _op(A) -> Outcome:
    return Outcome({"text": str(A), "terms": operator_to_json(A)}, [str(A)])


def _pairs(items: list[str] | None) -> dict[str, str]:
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise InputError(f"expected name=expr, got {item!r}")
        out[name.strip()] = value.strip()
    return out


# -- command handlers -------------------------------------------------------

def cmd_compose(ws, a):
    result = ws.operator(a.operands[0])
    for text in a.operands[1:]:
        result = operators.compose(result, ws.operator(text))
    return _op(result)


def cmd_commutator(ws, a):
    return _op(operators.commutator(ws.operator(a.A), ws.operator(a.B)))


def cmd_divide(ws, a):
    Q, R = operators.right_divide(ws.operator(a.L), ws.operator(a.M), a.var)
    return Outcome({"Q": str(Q), "R": str(R)}, [f"Q = {Q}", f"R = {R}"])


def cmd_symbol(ws, a):
    s = operators.principal_symbol(ws.operator(a.A))
    return Outcome({"degree": s.degree, "symbol": str(s)}, [str(s)])


def cmd_apply(ws, a):
    f = operators.apply(ws.operator(a.A), ws.expr(a.f))
    return Outcome(str(f), [str(f)])


def cmd_chvar(ws, a):
    fwd_src, inv_src = _pairs(a.fwd), _pairs(a.inv)
    target = ws.tower if sorted(fwd_src) == sorted(ws.tower.vars) else FieldTower(list(fwd_src))
    fwd = {v: ws.expr(t) for v, t in fwd_src.items()}
    inv = {v: Workspace(target).expr(t) for v, t in inv_src.items()}
    B = operators.change_vars(ws.operator(a.A), fwd, inv, target)
    return _op(B)


def cmd_ilt_generate(ws, a):
    maps = None
    if a.fwd or a.inv:
        fwd_src, inv_src = _pairs(a.fwd), _pairs(a.inv)
        target = FieldTower(list(fwd_src)) if sorted(fwd_src) != sorted(ws.tower.vars) else ws.tower
        tws = Workspace(target)
        maps = ({v: ws.expr(t) for v, t in fwd_src.items()}, {v: tws.expr(t) for v, t in inv_src.items()})
        X1 = tws.operator(a.x1)
    else:
        X1 = ws.operator(a.x1)
    cert = ilt.generate(ws.operator(a.htilde), ws.expr(a.theta1), ws.expr(a.theta2), X1, a.var, maps)
    return _cert(cert)


def cmd_ilt_verify(ws, a):
    M1, L, L1, M = (ws.operator(t) for t in (a.m1, a.l, a.l1, a.m))
    rep = ilt.verify_intertwining(M1, L, L1, M)
    data = rep.to_json()
    lines = [f"{k}: {'pass' if data[k] else 'FAIL'}" for k in ("product_identity", "orders_equal", "symbols_equal")]
    lines.append("verified" if rep.passed else f"not verified; residual = {rep.residual}")
    return Outcome(data, lines, rep.passed, None if rep.passed else str(rep.residual))


def _abc(ws, a):
    return ws.expr(a.a), ws.expr(a.b), ws.expr(a.c)


def cmd_laplace_invariants(ws, a):
    h, k = classical.laplace_invariants(*_abc(ws, a), a.xvar, a.yvar)
    return Outcome({"h": str(h), "k": str(k)}, [f"h = {h}", f"k = {k}"])


def cmd_laplace_transform(ws, a):
    return _cert(classical.laplace_transform(*_abc(ws, a), a.dir, a.xvar, a.yvar))


def cmd_laplace_cascade(ws, a):
    rep = classical.cascade(*_abc(ws, a), a.dir, a.max_steps, a.xvar, a.yvar)
    steps = rep.to_json()
    lines = [f"step {s['step']}: a = {s['a']}, b = {s['b']}, c = {s['c']}, h = {s['h']}, k = {s['k']} [{s['status']}]"
             for s in steps]
    lines.append(f"status: {rep.status}")
    result = {"status": rep.status, "steps": steps}
    if rep.factors:
        result["factors"] = [str(f) for f in rep.factors]
        lines.append(f"L = ({rep.factors[0]})*({rep.factors[1]})")
    return Outcome(result, lines)


def cmd_gauge(ws, a):
    return _cert(classical.gauge_as_ilt(ws.operator(a.L), ws.expr(a.lam), ws.expr(a.phi)))


def cmd_lodo_euclid(ws, a):
    r = classical.lodo_euclid(ws.operator(a.L), ws.operator(a.M))
    data = {k: str(getattr(r, k)) for k in ("rgcd", "lclm", "L_bar", "M_bar", "s", "t")}
    return Outcome(data, [f"{k} = {v}" for k, v in data.items()])


def cmd_lodo_transform(ws, a):
    return _cert(classical.lodo_transform_as_ilt(ws.operator(a.L), ws.operator(a.M)))


def cmd_darboux_schrodinger(ws, a):
    r = classical.schrodinger_darboux(ws.expr(a.v), a.xvar)
    out = _cert(r.certificate)
    out.result = {"u": str(r.u), "u_tilde": str(r.u_tilde), "L": str(r.L), "L_tilde": str(r.L_tilde),
                  "certificate": out.result}
    out.text = [f"u = {r.u}", f"u_tilde = {r.u_tilde}", f"L_tilde = {r.L_tilde}"] + out.text
    return out


def cmd_darboux_hyperbolic(ws, a):
    seeds = [ws.expr(s) for s in a.seed]
    return _cert(classical.darboux_hyperbolic(*_abc(ws, a), seeds, a.xvar, a.yvar))


def cmd_darboux_parabolic(ws, a):
    seeds = [ws.expr(s) for s in a.seed]
    return _cert(classical.darboux_parabolic(*_abc(ws, a), seeds, a.xvar, a.yvar))


def cmd_euler_darboux(ws, a):
    return _cert(classical.euler_darboux(ws.operator(a.A), ws.operator(a.B), ws.expr(a.h), ws.expr(a.c), a.xvar))


def cmd_petren(ws, a):
    A = [ws.expr(t) for t in a.A]
    B = [ws.expr(t) for t in a.B]
    return _cert(classical.petren_transform(A, B, ws.expr(a.alpha0), a.xvar, a.yvar))


def cmd_dini_decompose(ws, a):
    kappa, rho = classical.dini_decompose(ws.operator(a.H), ws.operator(a.X2))
    return Outcome({"kappa": str(kappa), "rho": str(rho)}, [f"kappa = {kappa}", f"rho = {rho}"])


def cmd_dini_to_ilt(ws, a):
    return _cert(classical.dini_to_ilt(ws.operator(a.X1), ws.operator(a.X2), ws.operator(a.H),
                                       ws.expr(a.kappa), ws.expr(a.rho), ws.expr(a.alpha)))


def cmd_intertwine_solve(ws, a):
    sol = solver.solve_intertwining(ws.operator(a.L), ws.operator(a.M))
    data = sol.to_json()
    lines = [f"status: {sol.status}" + (f" (dimension {sol.dimension})" if sol.status == "NonUnique" else "")]
    if sol.L1 is not None:
        lines += [f"M1 = {sol.M1}", f"L1 = {sol.L1}"]
    for i, (dm, dl) in enumerate(sol.directions):
        lines.append(f"direction {i}: M1 += t*({dm}), L1 += t*({dl})")
    lines += [f"note: {d}" for d in sol.diagnostics]
    return Outcome(data, lines)


def cmd_intertwine_certify(ws, a):
    rep = solver.certify_lclm(*(ws.operator(t) for t in (a.L, a.M, a.L1, a.M1)))
    data = rep.to_json()
    lines = [f"{k}: {'pass' if data[k] else 'FAIL'}"
             for k in ("product_identity", "orders_equal", "symbols_equal", "not_divisible")]
    lines.append("certified" if rep.certified else "not certified")
    return Outcome(data, lines, rep.certified, None if rep.product_identity else str(rep.residual))


def cmd_intertwine_normalize(ws, a):
    L, M, M1, L1 = (ws.operator(t) for t in (a.L, a.M, a.M1, a.L1))
    return _cert(solver.first_order_to_ilt(L, M, M1, L1, a.var))


def cmd_intertwine_kernel(ws, a):
    H = ws.operator(a.H) if a.H else None
    rows = solver.kernel_check(ws.operator(a.L), ws.operator(a.M), [ws.expr(s) for s in a.seed], H)

    def mark(v):
        return "-" if v is None else str(v).lower()

    lines = [f"{r['seed']}: L={mark(r['L'])} M={mark(r['M'])} H={mark(r['H'])}" for r in rows]
    return Outcome(rows, lines)


# -- argument parsing -------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="iltkit", description="Exact intertwining Laplace transformations of linear PDOs.")
    p.add_argument("--workspace", "-w", help="workspace file declaring variables and named objects")
    p.add_argument("--json", action="store_true", help="emit one JSON object")
    p.add_argument("--vars", default="x,y,z", help="variables when no workspace is given (default: x,y,z)")
    p.add_argument("--gen", action="append", default=[], metavar="NAME=PARTIALS",
                   help="declare a generator, e.g. 't=x: t, y: -y*t' (repeatable)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(parent, name, handler, help_):
        sp = parent.add_parser(name, help=help_)
        sp.set_defaults(handler=handler, op=name)
        return sp

    def group(name, help_):
        g = sub.add_parser(name, help=help_)
        return g.add_subparsers(dest="sub", required=True, parser_class=_Parser)

    def plane(sp):
        sp.add_argument("--a", default="0")
        sp.add_argument("--b", default="0")
        sp.add_argument("--c", default="0")
        sp.add_argument("--xvar", default="x")
        sp.add_argument("--yvar", default="y")

    sp = cmd(sub, "compose", cmd_compose, "compose operators left to right")
    sp.add_argument("operands", nargs="+")
    sp = cmd(sub, "commutator", cmd_commutator, "[A, B] = A*B - B*A")
    sp.add_argument("A")
    sp.add_argument("B")
    sp = cmd(sub, "divide", cmd_divide, "right division L = Q*M + R by a first-order M")
    sp.add_argument("L")
    sp.add_argument("M")
    sp.add_argument("--var", default="x", help="derivation eliminated from the remainder")
    sp = cmd(sub, "symbol", cmd_symbol, "principal symbol")
    sp.add_argument("A")
    sp = cmd(sub, "apply", cmd_apply, "apply an operator to a function")
    sp.add_argument("A")
    sp.add_argument("f")
    sp = cmd(sub, "chvar", cmd_chvar, "change of variables")
    sp.add_argument("A")
    sp.add_argument("--fwd", action="append", required=True, metavar="NEW=EXPR_IN_OLD")
    sp.add_argument("--inv", action="append", required=True, metavar="OLD=EXPR_IN_NEW")

    g = group("ilt", "generate or verify an ILT")
    sp = cmd(g, "generate", cmd_ilt_generate, "build an ILT from an x-independent seed operator")
    sp.add_argument("--htilde", required=True)
    sp.add_argument("--theta1", default="1")
    sp.add_argument("--theta2", default="1")
    sp.add_argument("--x1", required=True)
    sp.add_argument("--var", default="x")
    sp.add_argument("--fwd", action="append")
    sp.add_argument("--inv", action="append")
    sp = cmd(g, "verify", cmd_ilt_verify, "check M1*L = L1*M with order and symbol conditions")
    sp.add_argument("--m1", default="M1")
    sp.add_argument("--l", default="L")
    sp.add_argument("--l1", default="L1")
    sp.add_argument("--m", default="M")

    g = group("laplace", "classical Laplace transformations")
    sp = cmd(g, "invariants", cmd_laplace_invariants, "Laplace invariants h, k")
    plane(sp)
    sp = cmd(g, "transform", cmd_laplace_transform, "one Laplace transformation")
    plane(sp)
    sp.add_argument("--dir", choices=("X", "Y"), default="X")
    sp = cmd(g, "cascade", cmd_laplace_cascade, "iterate until factorization or max steps")
    plane(sp)
    sp.add_argument("--dir", choices=("X", "Y"), default="X")
    sp.add_argument("--max-steps", type=int, default=10)

    sp = cmd(sub, "gauge", cmd_gauge, "gauge transformation as an ILT")
    sp.add_argument("L")
    sp.add_argument("--lam", required=True)
    sp.add_argument("--phi", default="1")

    g = group("lodo", "ordinary operators")
    sp = cmd(g, "euclid", cmd_lodo_euclid, "rGCD, lLCM and Bezout data")
    sp.add_argument("L")
    sp.add_argument("M")
    sp = cmd(g, "transform", cmd_lodo_transform, "transformation by a first-order M as an ILT")
    sp.add_argument("L")
    sp.add_argument("M")

    g = group("darboux", "Darboux transformations")
    sp = cmd(g, "schrodinger", cmd_darboux_schrodinger, "one-dimensional Schrodinger operator")
    sp.add_argument("--v", required=True)
    sp.add_argument("--xvar", default="x")
    for name, handler in (("hyperbolic", cmd_darboux_hyperbolic), ("parabolic", cmd_darboux_parabolic)):
        sp = cmd(g, name, handler, f"{name} operator on the plane from seed solutions")
        plane(sp)
        sp.add_argument("--seed", action="append", required=True)

    sp = cmd(sub, "euler-darboux", cmd_euler_darboux, "Euler-Darboux transformation of A + B")
    sp.add_argument("--A", required=True)
    sp.add_argument("--B", required=True)
    sp.add_argument("--h", required=True)
    sp.add_argument("--c", default="0")
    sp.add_argument("--xvar", default="x")

    sp = cmd(sub, "petren", cmd_petren, "Petren transformation")
    sp.add_argument("--A", action="append", required=True, help="A_0, A_1, ... in order (repeatable)")
    sp.add_argument("--B", action="append", required=True, help="B_0, B_1, ... in order (repeatable)")
    sp.add_argument("--alpha0", required=True)
    sp.add_argument("--xvar", default="x")
    sp.add_argument("--yvar", default="y")

    g = group("dini", "Dini transformation")
    sp = cmd(g, "decompose", cmd_dini_decompose, "solve [H, X2] = kappa*H + rho*X2")
    sp.add_argument("--H", required=True)
    sp.add_argument("--X2", required=True)
    sp = cmd(g, "to-ilt", cmd_dini_to_ilt, "ILT from a Dini decomposition and alpha")
    for name in ("X1", "X2", "H", "kappa", "rho", "alpha"):
        sp.add_argument(f"--{name}", required=True)

    g = group("intertwine", "intertwining relations")
    sp = cmd(g, "solve", cmd_intertwine_solve, "find M1, L1 with M1*L = L1*M")
    sp.add_argument("L")
    sp.add_argument("M")
    sp = cmd(g, "certify", cmd_intertwine_certify, "check the lLCM hypotheses")
    for name in ("L", "M", "L1", "M1"):
        sp.add_argument(name)
    sp = cmd(g, "normalize", cmd_intertwine_normalize, "rewrite a first-order intertwining as an ILT")
    for name in ("L", "M", "M1", "L1"):
        sp.add_argument(name)
    sp.add_argument("--var", default="x")
    sp = cmd(g, "kernel", cmd_intertwine_kernel, "which of L, M, H annihilate the seeds")
    sp.add_argument("L")
    sp.add_argument("M")
    sp.add_argument("--seed", action="append", required=True)
    sp.add_argument("--H")
    return p


def _workspace(args) -> Workspace:
    if args.workspace:
        ws = Workspace.load(args.workspace)
        tower = ws.tower
    else:
        tower = FieldTower([v.strip() for v in args.vars.split(",") if v.strip()])
        ws = None
    for item in args.gen:
        name, sep, spec = item.partition("=")
        if not sep:
            raise InputError(f"--gen expects NAME=PARTIALS, got {item!r}")
        tower = tower.declare_generator(name.strip(), parse_generator_spec(spec))
    if ws is None or tower is not ws.tower:
        fresh = Workspace(tower)
        if ws is not None:
            for name, src in ws.sources.items():
                (fresh.define_expr if name in ws.exprs else fresh.define_operator)(name, src)
        ws = fresh
    return ws


def run_command(argv: list[str]) -> tuple[int, str]:
    """Run one command; returns the exit code and the text to print."""
    as_json = "--json" in argv
    argv = [a for a in argv if a != "--json"]
    op = next((a for a in argv if not a.startswith("-")), None)
    try:
        args = build_parser().parse_args(argv)
        op = args.op if getattr(args, "sub", None) is None else f"{args.command} {args.sub}"
        out = args.handler(_workspace(args), args)
    except IltError as e:
        status = "error" if isinstance(e, InputError) else "fail"
        residual = getattr(e, "residual", None)
        if as_json:
            payload = {"op": op, "status": status, "result": None, "error": type(e).__name__,
                       "message": str(e), "residual": None if residual is None else str(residual)}
            return e.exit_code, json.dumps(payload)
        msg = f"error: {type(e).__name__}: {e}"
        if residual is not None:
            msg += f"\nresidual = {residual}"
        return e.exit_code, msg
    code = 0 if out.passed else VerificationError.exit_code
    if as_json:
        payload = {"op": op, "status": "ok" if out.passed else "fail", "result": out.result,
                   "residual": out.residual}
        return code, json.dumps(payload)
    return code, "\n".join(out.text)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if any(a in ("-h", "--help") for a in argv):
        build_parser().parse_args(argv)
        return 0
    code, text = run_command(argv)
    stream = sys.stdout if code == 0 or "--json" in argv else sys.stderr
    print(text, file=stream)
    return code


if __name__ == "__main__":
    sys.exit(main())
