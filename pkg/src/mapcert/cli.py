"""Command-line entry point: run instance-file tasks and persist reports.

Each task produces an envelope holding a canonical, timestamp-free
payload; rerunning the same instance file reproduces every payload
byte for byte.  Exit codes: 0 all passed, 1 any failure, 2 usage or
instance errors, 3 enumeration cap exceeded.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .coincidence import (CoincidenceInstance, sufficient_report, sweep_fixp,
                          verify_fixp_bound, verify_fixp_bound_alt)
from .composition import (PreconditionError, certify_lyusternik_graves,
                          certify_main_const, certify_op_comp, certify_part_A,
                          certify_part_B)
from .ekeland import solve_inclusion
from .implicit import (GammaInstance, HypothesisRefuted, ImplicitInstance,
                       VerificationError, bound_lip_S, bound_reg_S,
                       sweep_gamma, sweep_pSx, sweep_xSp,
                       verify_gamma_lipschitz, verify_pSx_estimate,
                       verify_xSp_estimate)
from .instance import CapExceeded, InstanceError, InstanceFile, Task, \
    load_instance
from .metric import OffGridError
from .moduli import (check_equivalence_around, check_equivalence_at,
                     estimate_hemreg_at, estimate_lip_around,
                     estimate_lop_around, estimate_partial, estimate_plop_at,
                     estimate_psdclm_at, estimate_reg_around)

_AROUND = {
    "lop": estimate_lop_around,
    "lip": estimate_lip_around,
    "reg": estimate_reg_around,
}
_AT = {
    "plop": estimate_plop_at,
    "psdclm": estimate_psdclm_at,
    "hemreg": estimate_hemreg_at,
}
_PARTIAL = ("lop_x", "lip_x", "lip_p", "reg_x")

PASSING = ("PASS", "SUCCESS")


def _sanitize(obj):
    """Replace non-finite floats by strings so reports stay strict JSON."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    return obj


def _cfg(inst: InstanceFile, task: Task, resolution: float | None):
    cfg = inst.configs[task.args["config"]]
    return replace(cfg, resolution=resolution) if resolution else cfg


def _anchor(inst: InstanceFile, task: Task, arity: int):
    anchor = inst.anchors[task.args["anchor"]]
    if len(anchor) != arity:
        raise PreconditionError(
            f"anchor {task.args['anchor']!r} has {len(anchor)} points, "
            f"{arity} expected")
    return anchor


def _run_estimate(inst, task, resolution, jobs):
    args = task.args
    mapping = inst.maps[args["map"]]
    cfg = _cfg(inst, task, resolution)
    modulus = args["modulus"]
    if modulus in _AROUND or modulus in _AT:
        x, y = _anchor(inst, task, 2)
        fn = _AROUND.get(modulus) or _AT[modulus]
        report = fn(mapping, x, y, cfg)
    elif modulus in _PARTIAL:
        x, p, y = _anchor(inst, task, 3)
        report = estimate_partial(mapping, modulus, x, p, y, cfg)
    else:
        raise PreconditionError(f"unknown modulus {modulus!r}")
    payload = report.to_payload()
    status = "PASS"
    if "claim" in args:
        value = float(args["claim"])
        refuted = report.refutes(value)
        payload["claim"] = {
            "value": value,
            "refuted": refuted,
            "certified": report.certifies(value),
        }
        status = "FAIL" if refuted else "PASS"
    return status, payload, None


def _run_verify_equiv(inst, task, resolution, jobs):
    mapping = inst.maps[task.args["map"]]
    cfg = _cfg(inst, task, resolution)
    x, y = _anchor(inst, task, 2)
    mode = task.args.get("mode", "around")
    if mode == "around":
        report = check_equivalence_around(mapping, x, y, cfg)
    elif mode == "at":
        report = check_equivalence_at(mapping, x, y, cfg)
    else:
        raise PreconditionError(f"unknown mode {mode!r}")
    return ("PASS" if report.agree else "FAIL"), report.to_payload(), None


def _run_certify(inst, task, resolution, jobs):
    args = task.args
    cfg = _cfg(inst, task, resolution)
    constants = inst.constants[args["constants"]]
    theorem = args["theorem"]
    if theorem == "op_comp":
        cert = certify_op_comp(inst.maps[args["f1"]], inst.maps[args["f2"]],
                               inst.maps[args["g"]], _anchor(inst, task, 4),
                               constants, cfg, jobs=jobs)
    elif theorem == "part_a":
        cert = certify_part_A(inst.maps[args["f"]], inst.maps[args["g"]],
                              _anchor(inst, task, 3), constants, cfg,
                              check_cond=args.get("check_cond", False),
                              jobs=jobs)
    elif theorem == "part_b":
        cert = certify_part_B(inst.maps[args["f"]], inst.maps[args["g"]],
                              _anchor(inst, task, 3), constants, cfg,
                              singleton_check=args.get("singleton_check",
                                                       False),
                              jobs=jobs)
    elif theorem == "main_const":
        target = args.get("target")
        cert = certify_main_const(
            inst.maps[args["f1"]], inst.maps[args["f2"]],
            _anchor(inst, task, 3), constants, cfg,
            target=inst.spaces[target] if target else None, jobs=jobs)
    elif theorem == "lyusternik_graves":
        cert = certify_lyusternik_graves(
            inst.maps[args["f"]], inst.maps[args["g"]], constants, cfg,
            both_directions=args.get("both_directions", False), jobs=jobs)
    else:
        raise PreconditionError(f"unknown theorem {theorem!r}")
    rows = [r.to_payload() for r in cert.conclusions]
    return cert.status, cert.to_payload(), rows or None


def _implicit_instance(inst, task, resolution) -> ImplicitInstance:
    args = task.args
    xbar, pbar = _anchor(inst, task, 2)
    return ImplicitInstance(inst.maps[args["map"]], float(args["c"]),
                            float(args["gamma"]), float(args["alpha"]),
                            float(args["beta"]), xbar, pbar,
                            _cfg(inst, task, resolution))


def _run_implicit(inst, task, resolution, jobs):
    args = task.args
    check = args.get("check", "sweep_x")

    if check == "gamma":
        ybar, zbar, wbar = _anchor(inst, task, 3)
        ginst = GammaInstance(inst.maps[args["map"]], float(args["C"]),
                              float(args["D"]), float(args["gamma"]),
                              ybar, zbar, wbar,
                              _cfg(inst, task, resolution),
                              delta=float(args.get("delta", 0.01)))
        if "pairs" in args:
            reports = tuple(
                verify_gamma_lipschitz(ginst, tuple(map(tuple, a)),
                                       tuple(map(tuple, b)))
                for a, b in args["pairs"])
        else:
            reports = sweep_gamma(ginst)
        ok = all(r.holds for r in reports)
        payload = {"reports": [r.to_payload() for r in reports]}
        return ("PASS" if ok else "FAIL"), payload, None

    iinst = _implicit_instance(inst, task, resolution)
    if check in ("estimate_x", "estimate_p"):
        x, p = (tuple(c) for c in args["at"])
        fn = verify_xSp_estimate if check == "estimate_x" \
            else verify_pSx_estimate
        return "PASS", fn(iinst, x, p).to_payload(), None
    if check in ("sweep_x", "sweep_p"):
        reports = sweep_xSp(iinst) if check == "sweep_x" else sweep_pSx(iinst)
        rows = [r.to_payload() for r in reports]
        return "PASS", {"reports": rows}, rows
    if check == "lip_bound":
        bound = bound_lip_S(iinst, float(args["modulus"]))
        return "PASS", {"bound": bound, "modulus": float(args["modulus"]),
                        "c": iinst.c}, None
    if check == "reg_bound":
        bound = bound_reg_S(iinst, float(args["modulus"]))
        return "PASS", {"bound": bound, "modulus": float(args["modulus"]),
                        "c": iinst.c}, None
    raise PreconditionError(f"unknown implicit check {check!r}")


def _run_solve(inst, task, resolution, jobs):
    args = task.args
    result = solve_inclusion(
        inst.maps[args["f1"]], inst.maps[args["f2"]], inst.maps[args["g"]],
        _anchor(inst, task, 4), inst.constants[args["constants"]],
        tuple(args["u"]), _cfg(inst, task, resolution),
        tau=args.get("tau"), jobs=jobs)
    return result.status, result.to_payload(), None


def _run_verify_fixpoint(inst, task, resolution, jobs):
    args = task.args
    xbar, ybar = _anchor(inst, task, 2)
    cinst = CoincidenceInstance(
        inst.maps[args["f1"]], inst.maps[args["f2"]], float(args["l"]),
        float(args["m"]), float(args["alpha"]), float(args["beta"]),
        xbar, ybar, _cfg(inst, task, resolution))
    alt = args.get("alt", False)
    if "at" in args:
        check = verify_fixp_bound_alt if alt else verify_fixp_bound
        reports = (check(cinst, tuple(args["at"])),)
    else:
        reports = sweep_fixp(cinst, alt=alt)
    payload = {"factor": cinst.factor,
               "reports": [r.to_payload() for r in reports]}
    if "epsilon" in args:
        payload["sufficient"] = sufficient_report(
            cinst, float(args["epsilon"])).to_payload()
    rows = [{"x": r.to_payload()["x"], "lhs": r.lhs, "rhs": r.rhs,
             "ratio": r.ratio, "status": "vacuous" if r.vacuous else "ok"}
            for r in reports]
    return "PASS", payload, rows


_RUNNERS = {
    "estimate": _run_estimate,
    "verify-equiv": _run_verify_equiv,
    "certify": _run_certify,
    "implicit": _run_implicit,
    "solve": _run_solve,
    "verify-fixpoint": _run_verify_fixpoint,
}


def run_task(inst: InstanceFile, task: Task, *, resolution: float | None,
             jobs: int) -> dict:
    """Execute one task and wrap the outcome in a report envelope."""
    start = time.perf_counter()
    try:
        status, payload, rows = _RUNNERS[task.kind](inst, task, resolution,
                                                    jobs)
    except HypothesisRefuted as exc:
        status = "FAIL"
        payload = {"error": "hypothesis refuted", "message": str(exc),
                   "report": exc.report.to_payload()}
        rows = None
    except VerificationError as exc:
        status, rows = "FAIL", None
        payload = {"error": "verification failed", "message": str(exc)}
    except (PreconditionError, OffGridError, KeyError, ValueError) as exc:
        status, rows = "ERROR", None
        payload = {"error": type(exc).__name__, "message": str(exc)}
    envelope = {
        "tool": "mapcert",
        "version": __version__,
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "instance_digest": inst.digest,
        "task": task.name,
        "command": task.kind,
        "status": status,
        "wall_time": round(time.perf_counter() - start, 6),
        "payload": _sanitize(payload),
    }
    if rows:
        envelope["csv_rows"] = _sanitize(rows)
    return envelope


def _emit(envelope: dict, out: Path | None) -> None:
    body = json.dumps(envelope["payload"], sort_keys=True)
    if out is None:
        print(f"[{envelope['status']}] {envelope['task']} "
              f"({envelope['command']})")
        print(body)
        return
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{envelope['task']}.json"
    rows = envelope.pop("csv_rows", None)
    path.write_text(json.dumps(envelope, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    if rows:
        table = out / f"{envelope['task']}.csv"
        with table.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            for row in rows:
                writer.writerow({k: json.dumps(v) if isinstance(v, list)
                                 else v for k, v in row.items()})
    print(f"[{envelope['status']}] {envelope['task']} -> {path}")


def _show_report(path: Path) -> int:
    doc = json.loads(path.read_text(encoding="utf-8"))
    for key in ("tool", "version", "task", "command", "status",
                "instance_digest", "created", "wall_time"):
        if key in doc:
            print(f"{key}: {doc[key]}")
    payload = doc.get("payload", {})
    print("payload:")
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0 if doc.get("status") in PASSING else 1


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mapcert",
        description="verify openness, regularity and composition rates of "
                    "sampled set-valued maps")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--instance", required=True,
                        help="path to the instance JSON file")
    common.add_argument("--task", default="all",
                        help="task name to run, or 'all'")
    common.add_argument("--out", default=None,
                        help="directory for report files (default: stdout)")
    common.add_argument("--fail-fast", action="store_true",
                        help="stop after the first non-passing task")
    common.add_argument("--resolution", type=float, default=None,
                        help="override the bisection resolution")
    common.add_argument("--cap", type=int, default=None,
                        help="override the enumeration cap")
    common.add_argument("--jobs", type=int, default=1,
                        help="worker threads for sweeps")
    for name in ("estimate", "verify-equiv", "certify", "implicit", "solve",
                 "verify-fixpoint"):
        sub.add_parser(name, parents=[common])
    show = sub.add_parser("report", help="pretty-print a stored report")
    show.add_argument("path", help="report JSON file")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "report":
        return _show_report(Path(args.path))

    try:
        kwargs = {"cap": args.cap} if args.cap else {}
        inst = load_instance(args.instance, **kwargs)
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return 3
    except (InstanceError, OffGridError, ValueError) as exc:
        print(f"instance error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read instance: {exc}", file=sys.stderr)
        return 2

    selected = [t for t in inst.tasks if t.kind == args.command
                and (args.task == "all" or t.name == args.task)]
    if not selected:
        print(f"no {args.command} task matches {args.task!r}",
              file=sys.stderr)
        return 2

    out = Path(args.out) if args.out else None
    worst = 0
    for task in selected:
        envelope = run_task(inst, task, resolution=args.resolution,
                            jobs=args.jobs)
        _emit(envelope, out)
        if envelope["status"] not in PASSING:
            worst = 1
            if args.fail_fast:
                break
    return worst


if __name__ == "__main__":
    raise SystemExit(main())
