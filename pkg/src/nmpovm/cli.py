"""Command line interface.

Subcommands: pairs, build, validate, analyze, detect, scan. Machine-readable
results (JSON or CSV) go to stdout or ``--out``; human-readable text goes to
stderr and is silenced by ``--quiet``. Any validation failure exits with 1.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings

import numpy as np

from ._config import NMPOVMError, tolerances_from_env
from .bases import basis_by_name, group, load_basis
from .entanglement import (
    SCAN_COLUMNS,
    bell_state,
    detect,
    isotropic,
    product,
    random_product,
    random_separable,
    threshold_scan,
)
from .info import CSV_COLUMNS, analysis_rows, write_csv
from .linalg import random_density
from .measurements import (
    admissible_pairs,
    assemble,
    build_h_operators,
    classify,
    ic_check,
    load_measurement,
    measurement_to_dict,
    t_range,
    validate_symmetry,
)
from .serialization import decode_matrix

DEFAULT_SEED = 0


class CommandFailed(Exception):
    """Raised to request a nonzero exit after output has been written."""


def _say(args, *text):
    if not args.quiet:
        print(*text, file=sys.stderr)


def _emit_json(obj, path=None):
    text = json.dumps(obj, indent=1) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_class(text):
    if text == "all":
        return "all"
    try:
        n, m = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"class must be 'N,M' or 'all', got {text!r}") from None
    return n, m


def _resolve_classes(d, selector):
    pairs = admissible_pairs(d)
    if selector == "all":
        return [(p.N, p.M) for p in pairs]
    if selector not in [(p.N, p.M) for p in pairs]:
        valid = ", ".join(f"{p.N},{p.M}" for p in pairs)
        raise NMPOVMError(f"(N, M) = {selector} is not admissible for d = {d}; choose from {valid}")
    return [selector]


def _load_basis(name, d):
    if name in ("gellmann", "pauli"):
        return basis_by_name(name, d)
    basis = load_basis(name)
    if basis.dim != d:
        raise NMPOVMError(f"basis file {name} has dimension {basis.dim}, expected {d}")
    return basis


def _permutation(seed, d):
    if seed is None:
        return None
    return np.random.default_rng(seed).permutation(d * d - 1)


def _t_arg(text):
    if text in ("max", "min"):
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"t must be 'max', 'min' or a number, got {text!r}") from None


def _config(args):
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "quiet", "tolerances", "tol")}
    cfg["tolerance"] = args.tolerances.validation
    return json.loads(json.dumps(cfg, default=list))


def _construct(args, d, N, M, basis_name=None):
    basis = _load_basis(basis_name or args.basis, d)
    g = group(basis, N, M - 1, _permutation(args.perm_seed, d))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        m = assemble(g, args.t, args.tolerances.positivity)
    return m, g


# ---------------------------------------------------------------- subcommands


def cmd_pairs(args):
    pairs = admissible_pairs(args.d)
    rows = [
        {
            "N": p.N,
            "M": p.M,
            "class": p.class_name,
            "classes": list(p.classes),
            "projective_possible": p.projective_possible,
        }
        for p in pairs
    ]
    _say(args, f"{'N':>4} {'M':>4}  class     projective-possible")
    for r in rows:
        _say(args, f"{r['N']:>4} {r['M']:>4}  {','.join(r['classes']) or '-':<9} {r['projective_possible']}")
    extra = [r for r in rows if not r["classes"]]
    if extra:
        _say(
            args,
            f"note: {len(extra)} pair(s) beyond the four families present in every dimension; "
            "all divisor pairs of d^2-1 are listed",
        )
    _emit_json({"config": _config(args), "d": args.d, "pairs": rows})


def _summary(m, g, tol):
    rep = validate_symmetry(m, tol.validation)
    ic = ic_check(m, tol.rank)
    try:
        t_neg, t_pos = t_range(build_h_operators(g))
    except NMPOVMError:
        t_neg = t_pos = None
    cls = classify(m, tol.classify)
    ok = rep.passed and ic.complete
    out = {
        "d": m.d, "N": m.N, "M": m.M,
        "t": m.t, "t_range": [t_neg, t_pos], "x": m.x,
        "symmetry": rep.as_dict(),
        "ic_rank": ic.rank, "informationally_complete": ic.complete,
        "classification": cls.as_dict(),
        "ok": ok,
    }
    if not ic.complete:
        out["error"] = (
            f"Gram rank {ic.rank} < d^2 = {m.d**2}: not informationally complete"
            + (" (t = 0 makes every element I/M)" if m.t == 0 else "")
        )
    elif not rep.passed:
        out["error"] = "symmetry validation failed"
    return out


def cmd_build(args):
    classes = _resolve_classes(args.d, args.cls)
    if args.out and len(classes) > 1:
        os.makedirs(args.out, exist_ok=True)
    results, failed = [], False
    for N, M in classes:
        m, g = _construct(args, args.d, N, M)
        s = _summary(m, g, args.tolerances)
        if s["ok"] and args.out:
            path = args.out
            if len(classes) > 1:
                path = os.path.join(args.out, f"measurement_d{args.d}_N{N}_M{M}.json")
            doc = measurement_to_dict(m)
            doc["config"] = _config(args)
            _emit_json(doc, path)
            s["file"] = path
        failed |= not s["ok"]
        cls = s["classification"]
        _say(
            args,
            f"d={m.d} (N,M)=({N},{M}) class={cls['class'] or '-'} t={m.t:.12g} "
            f"t_range=[{s['t_range'][0]:.6g}, {s['t_range'][1]:.6g}] x={m.x:.12g} "
            f"rank={s['ic_rank']} optimal={cls['optimal']} projective={cls['projective']} "
            f"max_dev={max(s['symmetry']['deviations'].values()):.2e}"
            + (f"  FAILED: {s['error']}" if not s["ok"] else ""),
        )
        results.append(s)
    _emit_json({"config": _config(args), "results": results})
    if failed:
        raise CommandFailed()


def cmd_validate(args):
    results, failed = [], False
    for path in args.measurement:
        m = load_measurement(path)
        rep = validate_symmetry(m, args.tolerances.validation)
        ic = ic_check(m, args.tolerances.rank)
        ok = rep.passed and ic.complete
        failed |= not ok
        results.append({
            "file": path, "d": m.d, "N": m.N, "M": m.M, "x": m.x,
            "symmetry": rep.as_dict(), "ic_rank": ic.rank,
            "classification": classify(m, args.tolerances.classify).as_dict(), "ok": ok,
        })
        _say(args, f"{path}: {'ok' if ok else 'FAILED'}")
    _emit_json({"config": _config(args), "results": results})
    if failed:
        raise CommandFailed()


def _read_states(path, d):
    with open(path) as fh:
        data = json.load(fh)
    dim = int(data.get("dim", d))
    if d is not None and dim != d:
        raise NMPOVMError(f"state file has dimension {dim}, expected {d}")
    if "states" in data:
        return [decode_matrix(s, dim) for s in data["states"]]
    return [decode_matrix(data["entries"], dim)]


def _single_states(kind, d, args):
    if kind in ("mixed", "maximally-mixed"):
        return [np.eye(d, dtype=complex) / d]
    if kind == "pure":
        rho = np.zeros((d, d), dtype=complex)
        rho[0, 0] = 1
        return [rho]
    if kind == "random":
        rng = np.random.default_rng(args.seed)
        return [random_density(d, args.rank, rng) for _ in range(args.count)]
    return _read_states(kind, d)


def _write_table(args, rows, columns, summary):
    if args.out:
        with open(args.out, "w") as fh:
            write_csv(rows, fh, columns)
        _emit_json(summary)
    else:
        sys.stdout.write(write_csv(rows, columns=columns))
        if not args.quiet:
            print(json.dumps(summary), file=sys.stderr)


def cmd_analyze(args):
    m = load_measurement(args.measurement)
    cls = classify(m).class_name
    label = cls if cls else f"({m.N},{m.M})"
    rows = list(analysis_rows(m, _single_states(args.state, m.d, args), label))
    n_ok = sum(r["ok"] for r in rows)
    summary = {"config": _config(args), "states": len(rows), "ok": n_ok}
    _write_table(args, rows, CSV_COLUMNS, summary)
    if n_ok != len(rows):
        raise CommandFailed()


def _pair(args):
    if "all" in (args.cls, args.class_b):
        raise NMPOVMError("detect and scan need a single class per side, not 'all'")
    if args.measurement_a:
        m_a = load_measurement(args.measurement_a)
    else:
        (N, M), = _resolve_classes(args.d, args.cls)
        m_a, _ = _construct(args, args.d, N, M)
    d_b = args.d_b or m_a.d
    cls_b = args.class_b or ((m_a.N, m_a.M) if d_b == m_a.d else None)
    if args.measurement_b:
        m_b = load_measurement(args.measurement_b)
    else:
        if cls_b is None:
            raise NMPOVMError("--class-b is required when --d-b differs from --d")
        (N, M), = _resolve_classes(d_b, cls_b)
        m_b, _ = _construct(args, d_b, N, M, args.basis_b)
    if args.transpose_b:
        m_b = m_b.transposed()
    return m_a, m_b


def _bipartite_state(args, d_a, d_b):
    kind = args.state
    if kind in ("bell", "isotropic") and d_a != d_b:
        raise NMPOVMError(f"{kind} state needs equal local dimensions")
    if kind == "bell":
        return bell_state(d_a)
    if kind == "isotropic":
        return isotropic(d_a, args.p)
    if kind == "product-mixed":
        return product(np.eye(d_a) / d_a, np.eye(d_b) / d_b)
    if kind == "product-random":
        return random_product(d_a, d_b, args.seed)
    if kind == "separable":
        return random_separable(d_a, d_b, args.seed)
    states = _read_states(kind, d_a * d_b)
    return states[0]


def _class_label(m):
    return f"{m.N},{m.M}"


def cmd_detect(args):
    m_a, m_b = _pair(args)
    rho = _bipartite_state(args, m_a.d, m_b.d)
    report = detect(rho, m_a, m_b)
    out = {
        "dA": m_a.d, "dB": m_b.d,
        "classA": _class_label(m_a), "classB": _class_label(m_b),
        "b_side_transposed": bool(args.transpose_b),
        **report.as_dict(),
        "config": _config(args),
    }
    _say(
        args,
        f"||P||_tr = {report.trace_norm_value:.10g} vs {report.trace_norm_bound:.10g}: {report.verdict_eq18}",
    )
    if report.trace_value is not None:
        _say(args, f"Tr P = {report.trace_value:.10g} vs {report.trace_bound:.10g}: {report.verdict_eq19}")
    _emit_json(out, args.out)


def cmd_scan(args):
    m_a, m_b = _pair(args)
    if m_a.d != m_b.d:
        raise NMPOVMError("scan uses isotropic states and needs equal local dimensions")
    res = threshold_scan(m_a.d, m_a, m_b, args.criterion, args.grid)
    summary = {
        "config": _config(args),
        "criterion": res.criterion,
        "p_star": res.p_star if res.p_star is not None else "none",
    }
    _write_table(args, res.rows, SCAN_COLUMNS, summary)


# ---------------------------------------------------------------- parser


def _common(p):
    p.add_argument("--quiet", action="store_true", help="suppress human-readable text")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="RNG seed (default %(default)s)")
    p.add_argument("--tol", type=float, default=None,
                   help="validation tolerance (default 1e-10, or $NMPOVM_TOL)")


def _construction(p, cls_required=True):
    p.add_argument("--d", type=int, required=True, help="Hilbert space dimension")
    p.add_argument("--class", dest="cls", type=_parse_class, required=cls_required,
                   help="'N,M' or 'all'")
    p.add_argument("--basis", default="gellmann", help="gellmann, pauli or a basis JSON file")
    p.add_argument("--t", type=_t_arg, default="max", help="'max', 'min' or a number")
    p.add_argument("--perm-seed", type=int, default=None,
                   help="seed for a random assignment of basis operators to groups")


def _bipartite(p):
    _construction(p, cls_required=False)
    p.add_argument("--d-b", type=int, default=None, help="dimension of subsystem B (default --d)")
    p.add_argument("--class-b", type=_parse_class, default=None)
    p.add_argument("--basis-b", default=None)
    p.add_argument("--measurement-a", default=None, help="measurement JSON for A")
    p.add_argument("--measurement-b", default=None, help="measurement JSON for B")
    p.add_argument("--transpose-b", action="store_true", help="transpose every B-side element")


def build_parser():
    parser = argparse.ArgumentParser(prog="nmpovm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pairs", help="list admissible (N, M) classes")
    _common(p)
    p.add_argument("--d", type=int, required=True)
    p.set_defaults(func=cmd_pairs)

    p = sub.add_parser("build", help="construct and validate a measurement")
    _common(p)
    _construction(p)
    p.add_argument("--out", default=None, help="measurement JSON path (directory for --class all)")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("validate", help="validate measurement files")
    _common(p)
    p.add_argument("measurement", nargs="+")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("analyze", help="coincidence and entropy table for states")
    _common(p)
    p.add_argument("measurement")
    p.add_argument("--state", default="random", help="mixed, pure, random or a state JSON file")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("detect", help="run both separability criteria on a bipartite state")
    _common(p)
    _bipartite(p)
    p.add_argument("--state", default="bell",
                   help="bell, isotropic, product-mixed, product-random, separable or a JSON file")
    p.add_argument("--p", type=float, default=1.0, help="isotropic mixing weight")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("scan", help="detection threshold over isotropic states")
    _common(p)
    _bipartite(p)
    p.add_argument("--criterion", choices=("trace", "trace-norm"), default="trace")
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    p.set_defaults(func=cmd_scan)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tol = tolerances_from_env()
        if args.tol is not None:
            tol = tol.with_validation(args.tol)
    except ValueError as exc:
        parser.error(str(exc))
    args.tolerances = tol
    if getattr(args, "cls", None) is None and args.command in ("detect", "scan"):
        if not getattr(args, "measurement_a", None):
            parser.error("--class is required unless --measurement-a is given")
    try:
        args.func(args)
    except CommandFailed:
        return 1
    except (NMPOVMError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
