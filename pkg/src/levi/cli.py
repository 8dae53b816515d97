"""Command line front end: ``levi check | linearize | average``.

Exit codes: 0 success, 1 error, 2 obstructed linearization, 3 theorem
hypothesis violated, 64 usage error.
"""
import argparse
import hashlib
import json
import logging
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import avg, normalform, poisson, subavg
from .parallel import set_threads
from .errors import HypothesisViolated, DefectTooLarge, LeviError, ParseError, UnknownKind
from .liecoh import LieAlgebra
from .truncpoly import format_rational

log = logging.getLogger("levi")

EXIT_OK, EXIT_ERROR, EXIT_OBSTRUCTED, EXIT_HYPOTHESIS, EXIT_USAGE = 0, 1, 2, 3, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _num(x):
    """Floats rounded to 12 significant digits for reports."""
    if isinstance(x, (float, np.floating)):
        return float(f"{float(x):.12g}")
    return x


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    return _num(obj)


def _read_json(path):
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg} at line {exc.lineno} column {exc.colno}") from exc


def _digest(paths):
    h = hashlib.sha256()
    for p in paths:
        h.update(Path(p).read_bytes())
    return h.hexdigest()


def _write(path, obj):
    Path(path).write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")


def detect_kind(obj):
    if not isinstance(obj, dict):
        raise UnknownKind("top-level JSON value must be an object")
    if "brackets" in obj:
        return "poisson"
    if "rank" in obj and "b" in obj:
        return "algebroid"
    if "table" in obj:
        return "group"
    if "target" in obj and "values" in obj:
        return "homomorphism"
    if "dim" in obj and "c" in obj:
        return "lie-algebra"
    if "ambient" in obj:
        return "submanifold-sidecar"
    raise UnknownKind("cannot tell what kind of object this file describes")


# -- check -------------------------------------------------------------------


def _max_abs_coeff(polys):
    best = 0
    for p in polys:
        for _, c in p.items():
            best = max(best, abs(c))
    return best


def _check_poisson(obj):
    P = poisson.PoissonStructure.from_json(obj)
    residuals = poisson.jacobi_residuals(P)
    bad = [k for k, r in residuals.items() if r]
    out = {"kind": "poisson", "max_residual": format_rational(_max_abs_coeff(residuals.values()))}
    if bad:
        out["witness"] = list(bad[0])
    return not bad, out


def _check_algebroid(obj):
    A = normalform.LieAlgebroid.from_json(obj)
    anchor = normalform.anchor_residuals(A)
    jac = normalform.jacobi_residuals(A)
    out = {"kind": "algebroid",
           "max_anchor_residual": format_rational(_max_abs_coeff(anchor.values())),
           "max_jacobi_residual": format_rational(_max_abs_coeff(jac.values()))}
    bad_a = [k for k, r in anchor.items() if r]
    bad_j = [k for k, r in jac.items() if r]
    if bad_a:
        out["anchor_witness"] = list(bad_a[0])
    if bad_j:
        out["jacobi_witness"] = list(bad_j[0])
    return not (bad_a or bad_j), out


def _check_group(obj):
    G = avg.FiniteGroup.from_json(obj)
    return True, {"kind": "group", "size": G.size, "identity": G.identity}


def _check_lie_algebra(obj):
    g = LieAlgebra.from_json(obj)
    res = g.jacobi_residual()
    worst = max((abs(v) for v in res.ravel()), default=0)
    from .liecoh import is_semisimple
    return worst == 0, {"kind": "lie-algebra", "max_residual": format_rational(worst),
                        "semisimple": bool(is_semisimple(g)) if worst == 0 else None}


def _check_homomorphism(obj, group_path):
    if group_path is None:
        raise UnknownKind("checking an almost homomorphism needs --group")
    G = avg.FiniteGroup.from_json(_read_json(group_path))
    sigma = avg.AlmostHomomorphism.from_json(obj, G)
    return True, {"kind": "homomorphism", "defect": avg.defect(sigma)}


def _check_submanifold(csv_path, sidecar_path):
    N, amb = subavg.load_submanifold(Path(csv_path).read_text(), _read_json(sidecar_path))
    frame = N.frame_residual()
    tang = N.tangency_residual()
    h = N.mesh_size()
    ok = frame <= subavg.ORTHO_TOL and tang <= max(h, 1e-12)
    return ok, {"kind": "submanifold", "samples": len(N), "frame_residual": frame,
                "tangency_residual": tang, "mesh_size": h,
                "invariance_defect": subavg.invariance_defect(N, amb) if ok else None}


def _sidecar_for(csv_path, explicit):
    if explicit:
        return explicit
    p = Path(csv_path)
    for cand in (p.with_suffix(".json"), Path(str(p) + ".json")):
        if cand.exists():
            return cand
    raise ParseError(f"no JSON sidecar found next to {csv_path}")


def cmd_check(args):
    path = args.input
    if str(path).endswith(".csv"):
        sidecar = _sidecar_for(path, args.sidecar)
        ok, info = _check_submanifold(path, sidecar)
        return ok, info, [path, sidecar]
    obj = _read_json(path)
    kind = detect_kind(obj)
    if kind == "poisson":
        ok, info = _check_poisson(obj)
    elif kind == "algebroid":
        ok, info = _check_algebroid(obj)
    elif kind == "group":
        ok, info = _check_group(obj)
    elif kind == "lie-algebra":
        ok, info = _check_lie_algebra(obj)
    elif kind == "homomorphism":
        ok, info = _check_homomorphism(obj, args.group)
    else:
        raise UnknownKind(f"{kind} files are checked through their CSV samples")
    return ok, info, [path]


# -- linearize -----------------------------------------------------------------


def cmd_linearize(args):
    obj = _read_json(args.input)
    kind = detect_kind(obj)
    if kind == "poisson":
        P = poisson.PoissonStructure.from_json(obj)
        order = P.order if args.order is None else args.order
        if not 1 <= order <= P.order:
            raise UsageError(f"--order {order} exceeds the file order {P.order}")
        report = normalform.linearize_poisson(P, order)
    elif kind == "algebroid":
        A = normalform.LieAlgebroid.from_json(obj)
        order = A.order if args.order is None else args.order
        if not 1 <= order <= A.order:
            raise UsageError(f"--order {order} exceeds the file order {A.order}")
        report = normalform.linearize_algebroid(A, order)
    else:
        raise UnknownKind(f"cannot linearize a {kind} file")
    info = {"kind": kind, "target_order": order, "success": report.success,
            "achieved_order": report.achieved_order,
            "records": [r.to_json() for r in report.records]}
    outputs = []
    if args.output:
        full = report.to_json()
        _write(args.output, full)
        outputs.append(str(args.output))
        if report.success:
            change = {k: full[k] for k in ("coordinate_change", "frame_change") if k in full}
            out = Path(args.output)
            change_path = out.with_name(out.stem + ".change.json")
            _write(change_path, change)
            outputs.append(str(change_path))
    info["outputs"] = outputs
    return report, info


# -- average -------------------------------------------------------------------


def _average_hom(args):
    G = avg.FiniteGroup.from_json(_read_json(args.inputs[0]))
    sigma0 = avg.AlmostHomomorphism.from_json(_read_json(args.inputs[1]), G)
    q = avg.defect(sigma0)
    sigma = avg.average_to_homomorphism(sigma0, tol=args.tol or 1e-12, force=args.force)
    achieved = avg.max_displacement(sigma0, sigma)
    info = {"kind": "homomorphism", "q": q, "bound": avg.DISTANCE_FACTOR * q,
            "achieved": achieved, "final_defect": avg.defect(sigma),
            "bound_holds": bool(achieved < avg.DISTANCE_FACTOR * q or q == 0)}
    return sigma.to_json(), info


def _parse_matrices(flat_list, m):
    out = []
    for flat in flat_list:
        if len(flat) != m * m:
            raise ParseError("matrix entry count does not match the module dimension")
        out.append(np.array([complex(x[0], x[1]) if isinstance(x, list) else x for x in flat],
                            dtype=complex).reshape(m, m))
    return np.array(out)


def _average_rep(args):
    G = avg.FiniteGroup.from_json(_read_json(args.inputs[0]))
    obj = _read_json(args.inputs[1])
    try:
        m = int(obj["dim"])
        T0 = _parse_matrices(obj["values"], m)
        K = float(obj.get("K", 1.0))
        eps = float(obj.get("eps", avg.EPS_LIMIT))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"malformed almost representation: {exc}") from exc
    problems = avg.representation_hypothesis(G, T0, K, eps)
    if problems and not args.force:
        raise HypothesisViolated("; ".join(problems))
    T = avg.average_to_representation(G, T0, K, eps, tol=args.tol or 1e-12, force=args.force)
    achieved = max(avg.operator_norm(a - b) for a, b in zip(T0, T))
    info = {"kind": "representation", "eps": eps, "K": K,
            "defect": avg.representation_defect(G, T0), "bound": eps, "achieved": achieved,
            "final_defect": avg.representation_defect(G, T), "bound_holds": bool(achieved <= eps)}
    result = {"dim": m, "values": [[[float(z.real), float(z.imag)] for z in t.ravel()] for t in T]}
    return result, info


def _average_submanifold(args):
    csv_path = args.inputs[0]
    sidecar = args.inputs[1] if len(args.inputs) > 1 else _sidecar_for(csv_path, None)
    N, amb = subavg.load_submanifold(Path(csv_path).read_text(), _read_json(sidecar))
    res = subavg.average_submanifold(N, amb, tol=args.tol or 1e-10, force=args.force)
    info = {"kind": "submanifold", "eps": res.epsilon, "bound": res.bound,
            "achieved": res.distance, "residual": res.residual, "iterations": res.iterations,
            "hypothesis_holds": res.hypothesis_holds,
            "bound_holds": bool(res.distance < res.bound)}
    return {"csv": res.result.to_csv()}, info


def cmd_average(args):
    handler = {"hom": _average_hom, "rep": _average_rep, "submanifold": _average_submanifold}
    result, info = handler[args.what](args)
    outputs = []
    if args.output:
        if args.what == "submanifold":
            Path(args.output).write_text(result["csv"])
        else:
            _write(args.output, result)
        outputs.append(str(args.output))
    info["outputs"] = outputs
    return info


# -- driver --------------------------------------------------------------------


def build_parser():
    parser = _Parser(prog="levi", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", help="where to write the result artifact")
    common.add_argument("--report", help="write the run report here instead of stdout")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads for averaging sweeps (default: all cores)")
    common.add_argument("--no-timestamp", action="store_true",
                        help="omit timestamp and wall time from the report")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", parents=[common], help="validate an input file")
    p.add_argument("input")
    p.add_argument("--sidecar", help="JSON sidecar for a submanifold CSV")
    p.add_argument("--group", help="group table for an almost homomorphism")

    p = sub.add_parser("linearize", parents=[common], help="formal linearization")
    p.add_argument("input")
    p.add_argument("--order", type=int, default=None)

    p = sub.add_parser("average", parents=[common], help="group averaging")
    p.add_argument("what", choices=["hom", "rep", "submanifold"])
    p.add_argument("inputs", nargs="+")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--force", action="store_true", help="run even if hypotheses fail")
    return parser


def _inputs(args):
    if args.command == "average":
        return list(args.inputs)
    paths = [args.input]
    if getattr(args, "sidecar", None):
        paths.append(args.sidecar)
    if getattr(args, "group", None):
        paths.append(args.group)
    return paths


def main(argv=None):
    logging.basicConfig(level=os.environ.get("LEVI_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    report = {"command": args.command, "status": "ok", "steps": []}
    if args.command == "average":
        report["command"] = f"average {args.what}"
    set_threads(args.threads)
    code = EXIT_OK
    try:
        paths = _inputs(args)
        for p in paths:
            if not Path(p).exists():
                raise ParseError(f"{p}: no such file")
        report["input_digest"] = _digest(paths)
        if args.command == "check":
            ok, info, paths = cmd_check(args)
            report["input_digest"] = _digest(paths)
            report["steps"].append(info)
            if not ok:
                report["status"] = "fail"
                code = EXIT_ERROR
        elif args.command == "linearize":
            result, info = cmd_linearize(args)
            report["steps"].append(info)
            report["outputs"] = info.pop("outputs")
            if not result.success:
                report["status"] = "obstructed"
                report["error"] = {"code": result.obstruction.code, "message": str(result.obstruction)}
                code = EXIT_OBSTRUCTED
        else:
            info = cmd_average(args)
            report["outputs"] = info.pop("outputs")
            report["steps"].append(info)
    except UsageError as exc:
        parser.exit(EXIT_USAGE, f"levi: error: {exc}\n")
    except (HypothesisViolated, DefectTooLarge) as exc:
        report["status"] = "hypothesis_violated"
        report["error"] = {"code": exc.code, "message": str(exc)}
        code = EXIT_HYPOTHESIS
    except LeviError as exc:
        report["status"] = "error"
        report["error"] = {"code": exc.code, "message": str(exc)}
        code = EXIT_ERROR
    except OSError as exc:
        report["status"] = "error"
        report["error"] = {"code": "io_error", "message": str(exc)}
        code = EXIT_ERROR
    if not args.no_timestamp:
        report["wall_time"] = time.perf_counter() - start
        report["timestamp"] = datetime.now(timezone.utc).isoformat()
    text = json.dumps(_clean(report), indent=2, sort_keys=True) + "\n"
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)
    log.info("%s finished with exit code %d", report["command"], code)
    return code


if __name__ == "__main__":
    sys.exit(main())
