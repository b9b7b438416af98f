"""Command-line entry point.

Every subcommand writes its result to stdout (JSON or CSV).  Failures exit
with status 2 and a single JSON object on stderr:
``{"error": <kind>, "message": ..., "field": ...}``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time

from . import analysis
from .circuit import load_circuit
from .compile import compile_circuit, compile_program
from .errors import CliffPertError, SchemaError
from .models import (
    LayeredCliffordSpec,
    build_qaoa_circuit,
    default_layered_observable,
    generate_e3lin2,
    generate_layered_clifford,
    instance_max_order,
    parse_sparse_label,
    qaoa_cost,
)
from .noise import load_noise
from .oracle import density_matrix_expectation, statevector_expectation
from .pauli import PauliString, parse_pauli
from .propagate import default_max_terms, lightcone_filter, propagate


class _JsonErrorParser(argparse.ArgumentParser):
    def error(self, message):
        _emit_error("usage", message)
        sys.exit(2)


def _emit_error(kind: str, message: str, field: str | None = None) -> None:
    payload = {"error": kind, "message": message}
    if field is not None:
        payload["field"] = field
    print(json.dumps(payload), file=sys.stderr)


def _observable(text: str, n: int) -> PauliString:
    t = text.strip().upper()
    if any(ch.isdigit() for ch in t):
        return parse_sparse_label(t, n)
    p = parse_pauli(t)
    if p.n != n:
        raise SchemaError(f"observable has {p.n} qubits, circuit has {n}", field="observable")
    return p


def _grid(spec: str) -> list[float]:
    """``a:b:steps`` (inclusive, evenly spaced) or a comma list."""
    if ":" in spec:
        a, b, steps = spec.split(":")
        steps = int(steps)
        if steps == 1:
            return [float(a)]
        return [float(a) + (float(b) - float(a)) * i / (steps - 1) for i in range(steps)]
    return [float(v) for v in spec.split(",") if v]


def _int_range(spec: str) -> list[int]:
    if ":" in spec:
        parts = [int(v) for v in spec.split(":")]
        a, b = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 1
        return list(range(a, b + 1, step))
    return [int(v) for v in spec.split(",") if v]


def _orders(spec: str) -> list[int | None]:
    out: list[int | None] = []
    for v in spec.split(","):
        v = v.strip().lower()
        if v:
            out.append(None if v in ("full", "all") else int(v))
    return out


def _order_label(K: int | None) -> str:
    return "full" if K is None else str(K)


def _max_terms(args) -> int:
    return args.max_terms if args.max_terms is not None else default_max_terms()


def _threads(args) -> int:
    return args.threads if args.threads else (os.cpu_count() or 1)


def _write_csv(rows: list[list], header: list[str], comment: str | None = None) -> None:
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    sys.stdout.write(buf.getvalue())


# --- subcommands ------------------------------------------------------------


def cmd_compile(args) -> None:
    circuit = load_circuit(args.circuit)
    prog = compile_program(circuit, _observable(args.observable, circuit.n),
                           transform_angles=not args.no_transform)
    text = prog.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_expval(args) -> None:
    circuit = load_circuit(args.circuit)
    obs = _observable(args.observable, circuit.n)
    noise = load_noise(args.noise) if args.noise else None
    prog = compile_program(circuit, obs, transform_angles=not args.no_transform)
    if not noise and not args.no_lightcone:
        prog = lightcone_filter(prog)
    res = propagate(
        prog,
        args.order,
        noise=noise,
        damping_order=args.damping_order,
        coeff_threshold=args.coeff_threshold,
        max_terms=_max_terms(args),
        threads=_threads(args),
        check_angles=not args.no_transform,
    )
    rep = res.report
    if args.csv:
        rows = [
            [k, rep.per_order_value[k], rep.cumulative_value[k],
             rep.per_order_term_count[k], rep.cumulative_term_count[k]]
            for k in range(len(rep.per_order_value))
        ]
        _write_csv(rows, ["K", "per_order", "cumulative", "terms_per_order", "cumulative_terms"])
    else:
        print(json.dumps(rep.to_dict(), indent=2))


def cmd_qaoa(args) -> None:
    inst = generate_e3lin2(args.n, args.D, args.seed)
    orders = _orders(args.order)
    rows = []
    for gamma in _grid(args.gamma_grid):
        t0 = time.perf_counter()
        compiled = compile_circuit(build_qaoa_circuit(inst, gamma, args.beta)[0])
        top = None if None in orders else max(orders)
        res = qaoa_cost(inst, gamma, args.beta, top, compiled=compiled, threads=_threads(args))
        values = [res.value if K is None else res.value_at(K) for K in orders]
        rows.append([gamma, *values, round(time.perf_counter() - t0, 3)])
    header = ["gamma", *[f"C_K{_order_label(K)}" for K in orders], "seconds"]
    _write_csv(rows, header, f"seed={args.seed} n={args.n} D={args.D} beta={args.beta!r} clauses={len(inst.clauses)}")


def cmd_qaoa_orders(args) -> None:
    rows = []
    for D in _int_range(args.D):
        counts: dict[int, int] = {}
        for r in range(args.runs):
            inst = generate_e3lin2(args.n, D, args.seed + r)
            k = instance_max_order(inst, args.gamma, args.beta)
            counts[k] = counts.get(k, 0) + 1
        rows.extend([D, k, c] for k, c in sorted(counts.items()))
    _write_csv(rows, ["D", "max_order", "count"],
               f"seed={args.seed} n={args.n} runs={args.runs} gamma={args.gamma!r} beta={args.beta!r}")


def cmd_layers(args) -> None:
    label = args.observable or default_layered_observable(args.n)
    obs = parse_sparse_label(label, args.n)
    orders = [int(k) for k in _int_range(args.order_grid)]
    rows = []
    for r in range(args.runs):
        seed = args.seed + r
        for dtheta in _grid(args.dtheta_grid):
            circuit = generate_layered_clifford(LayeredCliffordSpec(args.n, args.p, seed, dtheta))
            prog = lightcone_filter(compile_program(circuit, obs, transform_angles=not args.no_transform))
            ref = propagate(prog, None, coeff_threshold=args.reference_threshold,
                            max_terms=_max_terms(args), threads=_threads(args),
                            check_angles=not args.no_transform)
            top = max(orders)
            trunc = propagate(prog, top, max_terms=_max_terms(args), threads=_threads(args),
                              check_angles=not args.no_transform)
            rep = trunc.report
            for K in orders:
                val = rep.value_at(K)
                idx = min(K, len(rep.per_order_term_count) - 1)
                rows.append([seed, dtheta, K, val, ref.value, abs(val - ref.value),
                             rep.per_order_term_count[idx] if K <= idx else 0,
                             rep.cumulative_term_count[idx], ref.report.total_terms_generated])
    header = ["seed", "dtheta", "K", "value", "reference", "abs_error",
              "terms_at_order", "cumulative_terms", "reference_terms"]
    _write_csv(rows, header, f"seed={args.seed} n={args.n} p={args.p} observable={label} "
               f"reference_threshold={args.reference_threshold!r}")


def cmd_orderbound(args) -> None:
    deltas = _grid(args.delta_list)
    rows = []
    for N in _int_range(args.n_range):
        row: list = [N]
        for d in deltas:
            K = analysis.min_order_for_bound(N, args.theta, d)
            row += [K, float(analysis.cumulative_terms(N, K))]
        rows.append(row)
    header = ["N"]
    for d in deltas:
        header += [f"K_min_delta={d:g}", f"M_cum_delta={d:g}"]
    _write_csv(rows, header, f"theta={args.theta!r}")


def cmd_oracle(args) -> None:
    circuit = load_circuit(args.circuit)
    obs = _observable(args.observable, circuit.n)
    if args.noise:
        val = density_matrix_expectation(circuit, load_noise(args.noise), obs)
        method = "density_matrix"
    else:
        val = statevector_expectation(circuit, obs)
        method = "statevector"
    print(json.dumps({"expval": val, "method": method}))


def build_parser() -> argparse.ArgumentParser:
    p = _JsonErrorParser(prog="cliffpert", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_JsonErrorParser)

    def engine_opts(sp):
        sp.add_argument("--coeff-threshold", type=float, default=0.0,
                        help="drop |c| below this after each gate (makes E^(k) approximate)")
        sp.add_argument("--max-terms", type=int, default=None,
                        help="term budget; defaults to $CLIFFPERT_MAX_TERMS or 2e8")
        sp.add_argument("--threads", type=int, default=0, help="partition workers (0 = all cores)")

    c = sub.add_parser("compile", help="emit the interaction-picture program")
    c.add_argument("--circuit", required=True)
    c.add_argument("--observable", required=True)
    c.add_argument("--out")
    c.add_argument("--no-transform", action="store_true", help="keep raw rotation angles")
    c.set_defaults(func=cmd_compile)

    e = sub.add_parser("expval", help="truncated expectation value with per-order report")
    e.add_argument("--circuit", required=True)
    e.add_argument("--observable", required=True)
    e.add_argument("--order", type=int, default=None, help="truncation order K (default: full)")
    e.add_argument("--noise")
    e.add_argument("--damping-order", type=int, default=None)
    e.add_argument("--no-transform", action="store_true")
    e.add_argument("--no-lightcone", action="store_true")
    fmt = e.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", default=True)
    fmt.add_argument("--csv", action="store_true")
    engine_opts(e)
    e.set_defaults(func=cmd_expval)

    q = sub.add_parser("qaoa", help="E3LIN2 QAOA cost landscape")
    q.add_argument("--n", type=int, default=50)
    q.add_argument("--D", type=int, default=4)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--beta", type=float, default=math.pi / 4)
    q.add_argument("--gamma-grid", default=f"0.0:{math.pi / 4!r}:30")
    q.add_argument("--order", default="1,full", help="comma list of K values, 'full' allowed")
    engine_opts(q)
    q.set_defaults(func=cmd_qaoa)

    h = sub.add_parser("qaoa-orders", help="histogram of the largest non-zero order")
    h.add_argument("--n", type=int, default=50)
    h.add_argument("--D", default="1:5", help="range a:b or comma list")
    h.add_argument("--runs", type=int, default=100)
    h.add_argument("--seed", type=int, default=0)
    h.add_argument("--gamma", type=float, default=0.3)
    h.add_argument("--beta", type=float, default=math.pi / 4)
    h.set_defaults(func=cmd_qaoa_orders)

    lay = sub.add_parser("layers", help="layered Clifford circuits with coherent error")
    lay.add_argument("--n", type=int, default=50)
    lay.add_argument("--p", type=int, default=4)
    lay.add_argument("--seed", type=int, default=0)
    lay.add_argument("--runs", type=int, default=1)
    lay.add_argument("--dtheta-grid", default="0.05,0.1,0.2")
    lay.add_argument("--order-grid", default="0:6")
    lay.add_argument("--observable", default=None, help="sparse label, 1-based (default Z1Z26 at n=50)")
    lay.add_argument("--reference-threshold", type=float, default=0.0,
                     help="coefficient threshold for the full-order reference run")
    lay.add_argument("--no-transform", action="store_true")
    engine_opts(lay)
    lay.set_defaults(func=cmd_layers)

    ob = sub.add_parser("orderbound", help="minimal order for a relative bound (random-circuit model)")
    ob.add_argument("--theta", type=float, default=0.2)
    ob.add_argument("--delta-list", default="0.01,0.05")
    ob.add_argument("--n-range", default="10:200:10")
    ob.set_defaults(func=cmd_orderbound)

    o = sub.add_parser("oracle", help="dense reference value")
    o.add_argument("--circuit", required=True)
    o.add_argument("--observable", required=True)
    o.add_argument("--noise")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except CliffPertError as exc:
        _emit_error(exc.kind, str(exc), getattr(exc, "field", None))
        return 2
    except FileNotFoundError as exc:
        _emit_error("file_not_found", str(exc), exc.filename)
        return 2
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        _emit_error("invalid_input", str(exc))
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
