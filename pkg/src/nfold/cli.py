"""Command-line entry point: ``nfold <command> --input FILE``.

Exit codes: 0 answer found, 2 infeasible, 3 infinite or empty, 4 invalid
input, 5 budget exceeded, unsupported request or failed ``--check``.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Sequence

from . import apps, graver, solver
from ._completion import OverflowGuard
from .core import BoundsBox, IntMatrix, format_ext
from .instances import (
    InstanceFile, ValidationFailed, bimatrix_from_json, bounds_from_json, ext_list,
    objective_from_json, parse_instance, term_from_json,
)
from .objectives import SeparableObjective
from .oracle import BudgetExceeded

EXIT_OK, EXIT_INFEASIBLE, EXIT_INFINITE, EXIT_INVALID, EXIT_BUDGET = 0, 2, 3, 4, 5

COMMAND_KINDS = {
    "graver": "matrix-graver",
    "nfold-graver": "nfold-graver",
    "solve": "nfold-solve",
    "table": "table",
    "entry-set": "entry-set",
    "flow": "transshipment",
    "transport": "transportation",
    "complexity": "complexity",
}

_STATUS_EXIT = {
    solver.Status.OPTIMAL: EXIT_OK,
    solver.Status.INFEASIBLE: EXIT_INFEASIBLE,
    solver.Status.INFINITE_IF_NONEMPTY: EXIT_INFINITE,
}


class CheckFailed(RuntimeError):
    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


def _num(value):
    """Render numbers as decimal strings, recursively."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, (int, float)):
        return format_ext(value)
    if isinstance(value, dict):
        return {k: _num(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_num(v) for v in value]
    return value


def result_report(res: solver.SolveResult) -> dict:
    out = {"status": res.status.value, "value": res.value, "point": res.point,
           "steps": res.steps, "basis_size": res.basis_size}
    if res.witness is not None:
        out["witness"] = res.witness
    return out


def _verify_point(A: IntMatrix, b, bounds: BoundsBox, x) -> list[str]:
    problems = []
    Ax = A.matvec(x)
    for i, (lhs, rhs) in enumerate(zip(Ax, b)):
        if lhs != rhs:
            problems.append(f"row {i}: A x = {lhs}, expected {rhs}")
    for j, (lo, v, hi) in enumerate(zip(bounds.lower, x, bounds.upper)):
        if not lo <= v <= hi:
            problems.append(f"coordinate {j}: {v} outside [{format_ext(lo)}, {format_ext(hi)}]")
    return problems


def _check(enabled: bool, problems: list[str]) -> None:
    if enabled and problems:
        raise CheckFailed(problems)


# ---------------------------------------------------------------- handlers


def _graver(inst: InstanceFile, args) -> tuple[dict, int]:
    p = inst.payload
    A = IntMatrix.from_rows(p["matrix"], p.get("ncols"))
    G = graver.graver_basis(A)
    return {"ambient_dim": G.ambient_dim, "size": len(G), "elements": G.elements}, EXIT_OK


def _nfold_graver(inst, args):
    p = inst.payload
    B = bimatrix_from_json(p["bimatrix"])
    G = graver.nfold_graver(B, p["n"])
    return {"ambient_dim": G.ambient_dim, "size": len(G),
            "complexity_bound": graver.graver_complexity_bound(B),
            "elements": G.elements}, EXIT_OK


def _complexity(inst, args):
    p = inst.payload
    if "bimatrix" in p:
        bound = graver.graver_complexity_bound(bimatrix_from_json(p["bimatrix"]))
    else:
        g = p["graph"]
        bound = graver.graph_graver_complexity([tuple(e) for e in g["edges"]], g["vertices"],
                                               g.get("directed", True))
    return {"complexity_bound": bound}, EXIT_OK


def _solve(inst, args):
    p = inst.payload
    B, n = bimatrix_from_json(p["bimatrix"]), p["n"]
    nt = n * B.t
    bounds = bounds_from_json(p, nt)
    b = tuple(p["rhs"])
    f = objective_from_json(p["objective"]) if "objective" in p else SeparableObjective.zero(nt)
    A = graver.nfold_matrix(B, n)
    extra = {}
    if "weighted" in p:
        w = p["weighted"]
        W = bimatrix_from_json(w["W"])
        d = W.r + n * W.s
        hat = bounds_from_json(w, d, "hat_lower", "hat_upper", default_lower="-inf")
        ginst = solver.GeneralizedInstance(B, W, n, bounds, hat, b,
                                           objective_from_json(w["f"]), f)
        res = solver.solve_nfold_generalized(ginst, threads=args.threads)
        if res.optimal:
            Wx = graver.nfold_matrix(W, n).matvec(res.point)
            extra["image"] = Wx
            _check(args.check, _verify_point(A, b, bounds, res.point)
                   + [f"image {i}: {v} outside bounds" for i, (lo, v, hi)
                      in enumerate(zip(hat.lower, Wx, hat.upper)) if not lo <= v <= hi])
    else:
        ninst = solver.NFoldInstance(B, n, bounds, b, f)
        if "distance" in p:
            dist = p["distance"]
            pval = solver.INF if dist["p"] == "inf" else dist["p"]
            res = solver.solve_nfold_distance(ninst, pval, dist["target"],
                                              method=dist.get("method", "power"),
                                              threads=args.threads)
            if res.optimal and "q" in res.info:
                extra["q"] = res.info["q"]
        elif "maximize" in p:
            mx = p["maximize"]
            terms = [term_from_json(t) for t in mx["f"]]
            W = IntMatrix.from_rows(mx["W"], nt)
            res = solver.solve_nfold_max(ninst, W, lambda y: sum(t(v) for t, v in zip(terms, y)),
                                         threads=args.threads)
        else:
            res = solver.solve_nfold_separable(ninst, threads=args.threads)
        if res.optimal:
            _check(args.check, _verify_point(A, b, bounds, res.point))
    report = result_report(res)
    report.update(extra)
    return report, _STATUS_EXIT[res.status]


def _table_instance(p) -> apps.TableInstance:
    return apps.TableInstance(tuple(p["dims"]), p["n"], tuple(p["margins"]), p.get("cost"))


def _table(inst, args):
    t = _table_instance(inst.payload)
    res = solver.solve_nfold_separable(apps.encode_table(t), threads=args.threads)
    report = result_report(res)
    if res.optimal:
        table = apps.decode_table(t, res.point)
        report["table"] = table.tolist()
        margins = apps.table_margins(table)
        _check(args.check, [f"margin {k} differs" for k, (got, want)
                            in enumerate(zip(margins, t.margins)) if got != list(want)])
    return report, _STATUS_EXIT[res.status]


def _entry_set(inst, args):
    t = _table_instance(inst.payload)
    values = apps.entry_value_set(t, tuple(inst.payload["entry"]))
    if not values:
        return {"status": "infeasible", "values": [], "unique": False}, EXIT_INFEASIBLE
    return {"status": "optimal", "values": values, "unique": len(values) == 1}, EXIT_OK


def _flow(inst, args):
    p = inst.payload
    cc = p.get("commodity_costs")
    t = apps.TransshipmentInstance(
        p["vertices"], tuple(tuple(e) for e in p["edges"]), tuple(tuple(d) for d in p["demands"]),
        ext_list(p["capacities"]),
        tuple(term_from_json(c) for c in p["edge_costs"]) if "edge_costs" in p else None,
        tuple(tuple(term_from_json(c) for c in row) for row in cc) if cc else None)
    slack = p.get("encoding", "slack") == "slack"
    if slack:
        res = solver.solve_nfold_separable(apps.encode_transshipment_slack(t), threads=args.threads)
    else:
        res = solver.solve_nfold_generalized(apps.encode_transshipment_weighted(t),
                                             threads=args.threads)
    report = result_report(res)
    if res.optimal:
        flows = apps.decode_transshipment(t, res.point, slack=slack)
        report["flows"] = flows
        _check(args.check, t.check(flows))
    return report, _STATUS_EXIT[res.status]


def _transport(inst, args):
    p = inst.payload
    ec, cc = p.get("edge_costs"), p.get("commodity_costs")
    t = apps.TransportationInstance(
        tuple(p["volumes"]), tuple(map(tuple, p["supplies"])), tuple(map(tuple, p["consumptions"])),
        tuple(ext_list(r) for r in p["capacities"]),
        tuple(tuple(term_from_json(c) for c in row) for row in ec) if ec else None,
        tuple(tuple(tuple(term_from_json(c) for c in r) for r in block) for block in cc)
        if cc else None)
    res = solver.solve_nfold_generalized(apps.encode_transportation(t), threads=args.threads)
    report = result_report(res)
    if res.optimal:
        flows = apps.decode_transportation(t, res.point)
        report["flows"] = flows
        _check(args.check, apps.transportation_violations(t, flows))
    return report, _STATUS_EXIT[res.status]


HANDLERS = {
    "graver": _graver,
    "nfold-graver": _nfold_graver,
    "solve": _solve,
    "table": _table,
    "entry-set": _entry_set,
    "flow": _flow,
    "transport": _transport,
    "complexity": _complexity,
}


# ---------------------------------------------------------------- output


def render(report: dict, fmt: str) -> str:
    data = _num(report)
    if fmt == "json":
        return json.dumps(data, indent=2, sort_keys=True) + "\n"
    lines = []
    for key in sorted(data):
        value = data[key]
        if isinstance(value, list) and value and isinstance(value[0], list) and key == "elements":
            lines.append(f"{key}:")
            lines += ["  " + " ".join(v) for v in value]
        elif isinstance(value, list):
            lines.append(f"{key}: {json.dumps(value)}")
        else:
            lines.append(f"{key}: {value}")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nfold", description="Exact n-fold integer programming")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(HANDLERS) + ["validate"]:
        cmd = sub.add_parser(name)
        cmd.add_argument("--input", "-i", default="-", help="instance file (default: stdin)")
        cmd.add_argument("--output", "-o", default="-", help="report file (default: stdout)")
        cmd.add_argument("--format", choices=("json", "text"), default="json")
        cmd.add_argument("--threads", type=int, default=1)
        cmd.add_argument("--check", action="store_true",
                         help="re-verify the solution against the instance before reporting")
        cmd.add_argument("--timing", action="store_true",
                         help="add wall_time_ms to the report (makes output run-dependent)")
    return parser


def _emit(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def run(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        text = sys.stdin.read() if args.input == "-" else open(args.input).read()
    except OSError as exc:
        print(f"error: cannot read {args.input}: {exc.strerror}", file=sys.stderr)
        return EXIT_INVALID
    try:
        inst = parse_instance(text)
    except ValidationFailed as exc:
        for err in exc.errors:
            print(f"invalid: {err}", file=sys.stderr)
        if args.command == "validate":
            _emit(render({"valid": False, "errors": exc.errors}, args.format), args.output)
        return EXIT_INVALID
    if args.command == "validate":
        _emit(render({"valid": True, "kind": inst.kind}, args.format), args.output)
        return EXIT_OK
    want = COMMAND_KINDS[args.command]
    if inst.kind != want:
        print(f"invalid: /kind: command {args.command} expects kind {want!r}, got {inst.kind!r}",
              file=sys.stderr)
        return EXIT_INVALID
    start = time.perf_counter()
    try:
        report, code = HANDLERS[args.command](inst, args)
    except CheckFailed as exc:
        for problem in exc.problems:
            print(f"check failed: {problem}", file=sys.stderr)
        return EXIT_BUDGET
    except (BudgetExceeded, solver.UnsupportedDimension, OverflowGuard) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ValueError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.timing:
        report["wall_time_ms"] = round((time.perf_counter() - start) * 1000)
    _emit(render(report, args.format), args.output)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
