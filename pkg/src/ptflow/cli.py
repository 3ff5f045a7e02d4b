"""Command-line harness emitting the benchmark tables and figure data as CSV.

Commands: flow (one integration), exact (eigensolver oracle), instanton
(closed-form estimate), table1 (all schemes over the 16 benchmark rows),
fig1 (finite-m convergence sweep), fig2 (field snapshots along one flow).
Exit codes: 0 success, 1 usage error, 2 physics/numerics abort.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from .exact_solver import EigenConfig, schrodinger_gap
from .flow_integrator import SteppingConfig, integrate
from .flow_rhs import SchemeKind, SchemeSpec
from .instanton import instanton_gap
from .model import ModelParams, SpatialGrid, default_grid
from .stencil import apply_stencil

# The 16 benchmark parameter rows: convex block, then the double-well block.
PARAM_ROWS: list[tuple[float, float]] = [
    (1.0, 1.0),
    (1.0, 0.4),
    (1.0, 0.1),
    (1.0, 0.05),
    (1.0, 0.03),
    (1.0, 0.02),
    (-1.0, 0.4),
    (-1.0, 0.3),
    (-1.0, 0.2),
    (-1.0, 0.1),
    (-1.0, 0.07),
    (-1.0, 0.06),
    (-1.0, 0.05),
    (-1.0, 0.04),
    (-1.0, 0.03),
    (-1.0, 0.02),
]

_SCHEME_TAGS = {
    "wh": SchemeKind.WEGNER_HOUGHTON,
    "pt-lo": SchemeKind.PROPER_TIME_LO,
    "pt-nlo": SchemeKind.PROPER_TIME_NLO,
    "pt-m": SchemeKind.PROPER_TIME_FINITE_M,
}

_TABLE_SCHEMES = ("wh", "pt-lo", "exact", "pt-nlo")

FIG1_DEFAULT_PAIRS = ((1.0, 0.4), (-1.0, 0.05))
FIG1_DEFAULT_M_LIST = (5, 8, 10, 15, 20, 30, 50)
FIG2_DEFAULT_SNAPSHOTS = (1500.0, 10.0, 1.0, 0.5, 0.2, 0.1)


def _fmt(x) -> str:
    """Six significant digits; empty cell for undefined values."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return ""
    return f"{x:.6g}"


def _build_grid(args, params: ModelParams) -> SpatialGrid:
    if args.xmax is None:
        return default_grid(params, n_points=args.nx)
    return SpatialGrid(x_max=args.xmax, n_points=args.nx)


def _build_cfg(args) -> SteppingConfig:
    return SteppingConfig(rel_tol=args.rel_tol, abs_tol=args.abs_tol, k_min=args.kmin)


def _run_flow_task(task: dict) -> dict:
    """One integration from picklable primitives (process-pool friendly)."""
    params = ModelParams(
        m_squared=task["m2"],
        lam=task["lam"],
        cutoff=task["cutoff"],
    )
    grid = (
        default_grid(params, n_points=task["nx"])
        if task["xmax"] is None
        else SpatialGrid(x_max=task["xmax"], n_points=task["nx"])
    )
    cfg = SteppingConfig(
        rel_tol=task["rel_tol"], abs_tol=task["abs_tol"], k_min=task["kmin"]
    )
    kind = _SCHEME_TAGS[task["scheme"]]
    spec = SchemeSpec(kind, task.get("m"))
    t0 = time.perf_counter()
    res = integrate(params, spec, grid, cfg)
    return {
        "scheme": task["scheme"],
        "m": task.get("m"),
        "m2": task["m2"],
        "lam": task["lam"],
        "delta_e": res.delta_e,
        "v2_origin": res.v2_origin,
        "z_origin": res.z_origin,
        "termination": res.termination.value,
        "is_abort": res.termination.is_abort,
        "wall_seconds": time.perf_counter() - t0,
    }


def _run_exact_task(task: dict) -> dict:
    params = ModelParams(m_squared=task["m2"], lam=task["lam"], cutoff=task["cutoff"])
    res = schrodinger_gap(params, EigenConfig(x_max=task["xmax"], n_points=task["nx"]))
    return {
        "m2": task["m2"],
        "lam": task["lam"],
        "e0": res.e0,
        "e1": res.e1,
        "gap": res.gap,
        "gap_error": res.e0_error + res.e1_error,
    }


def _run_task(task: dict) -> tuple:
    if task["kind"] == "flow":
        return task["key"], _run_flow_task(task)
    return task["key"], _run_exact_task(task)


def _run_all(tasks: list[dict], jobs: int) -> dict:
    """Execute tasks (optionally in parallel) and key the results deterministically."""
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = dict(pool.map(_run_task, tasks))
    else:
        results = dict(map(_run_task, tasks))
    return results


def _write_rows(out_path: str | None, header: list[str], rows: list[list[str]]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    text = buf.getvalue()
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


class _Parser(argparse.ArgumentParser):
    """argparse exits usage errors with code 2; this harness reserves 2 for aborts."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _add_common_flags(p: argparse.ArgumentParser, *, exact_defaults: bool = False) -> None:
    p.add_argument("--m2", type=float, default=-1.0, help="bare curvature M^2")
    p.add_argument("--lambda", dest="lam", type=float, default=0.1, help="quartic coupling")
    p.add_argument("--cutoff", type=float, default=1500.0, help="UV scale where the flow starts")
    p.add_argument(
        "--xmax",
        type=float,
        default=12.0 if exact_defaults else None,
        help="half-extent of the spatial grid (default: auto from the minima)",
    )
    p.add_argument(
        "--nx", type=int, default=8001 if exact_defaults else 2001, help="grid node count (odd)"
    )
    p.add_argument("--kmin", type=float, default=1e-3, help="lowest scale integrated to")
    p.add_argument("--rel-tol", type=float, default=1e-7, help="stepper relative tolerance")
    p.add_argument("--abs-tol", type=float, default=1e-9, help="stepper absolute tolerance")
    p.add_argument("--out", type=str, default=None, help="CSV output path (default stdout)")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ptflow", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_flow = sub.add_parser("flow", help="run one flow integration")
    _add_common_flags(p_flow)
    p_flow.add_argument("--scheme", choices=sorted(_SCHEME_TAGS), required=True)
    p_flow.add_argument("--m", type=int, default=None, help="regulator index (pt-m only)")

    p_exact = sub.add_parser("exact", help="run the eigenvalue oracle")
    _add_common_flags(p_exact, exact_defaults=True)

    p_inst = sub.add_parser("instanton", help="closed-form dilute-gas gap estimate")
    p_inst.add_argument("--lambda", dest="lam", type=float, required=True)
    p_inst.add_argument("--out", type=str, default=None)

    p_table = sub.add_parser("table1", help="all schemes over the 16 benchmark rows")
    _add_common_flags(p_table)
    p_table.add_argument(
        "--only",
        type=str,
        default=None,
        help="row filter, e.g. 'm2=-1,lambda=0.06'",
    )
    p_table.add_argument(
        "--schemes",
        type=str,
        default=",".join(_TABLE_SCHEMES),
        help="comma list out of wh,pt-lo,exact,pt-nlo",
    )
    p_table.add_argument("--exact-xmax", type=float, default=12.0)
    p_table.add_argument("--exact-nx", type=int, default=8001)

    p_fig1 = sub.add_parser("fig1", help="finite-m convergence sweep")
    _add_common_flags(p_fig1)
    p_fig1.add_argument(
        "--m-list",
        type=str,
        default=",".join(str(m) for m in FIG1_DEFAULT_M_LIST),
        help="comma list of regulator indices (the m = infinity entry is always added)",
    )
    p_fig1.add_argument(
        "--pair",
        action="append",
        default=None,
        metavar="M2,LAMBDA",
        help="parameter pair to sweep (repeatable; default: both benchmark pairs)",
    )

    p_fig2 = sub.add_parser("fig2", help="field snapshots along one flow")
    _add_common_flags(p_fig2)
    p_fig2.add_argument("--scheme", choices=sorted(_SCHEME_TAGS), default="pt-nlo")
    p_fig2.add_argument("--m", type=int, default=None)
    p_fig2.add_argument(
        "--snapshots",
        type=str,
        default=",".join(_fmt(k) for k in FIG2_DEFAULT_SNAPSHOTS),
        help="comma list of k values (kmin is always appended)",
    )
    return parser


def _flow_task_from_args(args, scheme: str, m2: float, lam: float, m: int | None = None) -> dict:
    return {
        "kind": "flow",
        "key": ("flow", scheme, m, m2, lam),
        "scheme": scheme,
        "m": m,
        "m2": m2,
        "lam": lam,
        "cutoff": args.cutoff,
        "xmax": args.xmax,
        "nx": args.nx,
        "kmin": args.kmin,
        "rel_tol": args.rel_tol,
        "abs_tol": args.abs_tol,
    }


def cmd_flow(args) -> int:
    if args.scheme == "pt-m" and (args.m is None or args.m < 1):
        sys.stderr.write("ptflow flow: --scheme pt-m requires --m >= 1\n")
        return 1
    if args.scheme != "pt-m" and args.m is not None:
        sys.stderr.write(f"ptflow flow: --m is only meaningful with --scheme pt-m\n")
        return 1
    rec = _run_flow_task(_flow_task_from_args(args, args.scheme, args.m2, args.lam, args.m))
    header = [
        "scheme", "m", "m2", "lambda", "delta_e",
        "v2_origin", "z_origin", "termination", "wall_seconds",
    ]
    row = [
        rec["scheme"],
        "" if rec["m"] is None else str(rec["m"]),
        _fmt(rec["m2"]),
        _fmt(rec["lam"]),
        _fmt(rec["delta_e"]),
        _fmt(rec["v2_origin"]),
        _fmt(rec["z_origin"]),
        rec["termination"],
        f"{rec['wall_seconds']:.3f}",
    ]
    _write_rows(args.out, header, [row])
    return 2 if rec["is_abort"] else 0


def cmd_exact(args) -> int:
    rec = _run_exact_task(
        {"m2": args.m2, "lam": args.lam, "cutoff": args.cutoff, "xmax": args.xmax, "nx": args.nx}
    )
    header = ["m2", "lambda", "e0", "e1", "gap", "gap_error"]
    row = [_fmt(rec["m2"]), _fmt(rec["lam"]), _fmt(rec["e0"]), _fmt(rec["e1"]),
           _fmt(rec["gap"]), _fmt(rec["gap_error"])]
    _write_rows(args.out, header, [row])
    return 0


def cmd_instanton(args) -> int:
    gap = instanton_gap(args.lam)
    _write_rows(args.out, ["lambda", "delta_e"], [[_fmt(args.lam), _fmt(gap)]])
    return 0


def _parse_only(expr: str) -> dict[str, float]:
    out = {}
    for part in expr.split(","):
        key, _, value = part.partition("=")
        key = key.strip()
        if key not in ("m2", "lambda") or not value:
            raise ValueError(f"bad --only term {part!r} (use m2=... / lambda=...)")
        out[key] = float(value)
    return out


def cmd_table1(args) -> int:
    schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    for s in schemes:
        if s not in _TABLE_SCHEMES:
            sys.stderr.write(f"ptflow table1: unknown scheme {s!r}\n")
            return 1
    rows = PARAM_ROWS
    if args.only:
        try:
            flt = _parse_only(args.only)
        except ValueError as exc:
            sys.stderr.write(f"ptflow table1: {exc}\n")
            return 1
        rows = [
            (m2, lam)
            for (m2, lam) in rows
            if ("m2" not in flt or m2 == flt["m2"]) and ("lambda" not in flt or lam == flt["lambda"])
        ]

    tasks = []
    for m2, lam in rows:
        for scheme in schemes:
            if scheme == "exact":
                tasks.append(
                    {
                        "kind": "exact",
                        "key": ("exact", m2, lam),
                        "m2": m2,
                        "lam": lam,
                        "cutoff": args.cutoff,
                        "xmax": args.exact_xmax,
                        "nx": args.exact_nx,
                    }
                )
            else:
                tasks.append(_flow_task_from_args(args, scheme, m2, lam))
    results = _run_all(tasks, args.jobs)

    header = ["m2", "lambda"]
    for scheme, col in (("wh", "delta_e_wh"), ("pt-lo", "delta_e_ptlo"),
                        ("exact", "delta_e_exact"), ("pt-nlo", "delta_e_ptnlo")):
        if scheme in schemes:
            header.append(col)
    if "pt-nlo" in schemes:
        header += ["z_origin", "ptnlo_termination"]
    header.append("notes")

    out_rows = []
    for m2, lam in rows:
        row = [_fmt(m2), _fmt(lam)]
        notes = []
        for scheme in ("wh", "pt-lo", "exact", "pt-nlo"):
            if scheme not in schemes:
                continue
            if scheme == "exact":
                row.append(_fmt(results[("exact", m2, lam)]["gap"]))
                continue
            rec = results[("flow", scheme, None, m2, lam)]
            row.append(_fmt(rec["delta_e"]))
            if scheme != "pt-nlo" and rec["is_abort"]:
                notes.append(f"{scheme}={rec['termination']}")
        if "pt-nlo" in schemes:
            rec = results[("flow", "pt-nlo", None, m2, lam)]
            row.append("" if rec["is_abort"] else _fmt(rec["z_origin"]))
            row.append(rec["termination"])
        row.append(";".join(notes))
        out_rows.append(row)
    _write_rows(args.out, header, out_rows)
    return 0


def cmd_fig1(args) -> int:
    try:
        m_list = [int(s) for s in args.m_list.split(",") if s.strip()]
    except ValueError:
        sys.stderr.write(f"ptflow fig1: bad --m-list {args.m_list!r}\n")
        return 1
    if any(m < 1 for m in m_list):
        sys.stderr.write("ptflow fig1: m values must be >= 1\n")
        return 1
    if args.pair:
        try:
            pairs = []
            for expr in args.pair:
                m2_s, _, lam_s = expr.partition(",")
                pairs.append((float(m2_s), float(lam_s)))
        except ValueError:
            sys.stderr.write(f"ptflow fig1: bad --pair {expr!r} (use M2,LAMBDA)\n")
            return 1
    else:
        pairs = list(FIG1_DEFAULT_PAIRS)

    tasks = []
    for m2, lam in pairs:
        for m in m_list:
            tasks.append(_flow_task_from_args(args, "pt-m", m2, lam, m))
        tasks.append(_flow_task_from_args(args, "pt-nlo", m2, lam))
    results = _run_all(tasks, args.jobs)

    out_rows = []
    failed = []
    for m2, lam in pairs:
        for m in sorted(m_list):
            rec = results[("flow", "pt-m", m, m2, lam)]
            if rec["is_abort"]:
                failed.append(f"m={m} (m2={_fmt(m2)}, lambda={_fmt(lam)}): {rec['termination']}")
                continue
            out_rows.append(
                [_fmt(m2), _fmt(lam), str(m), _fmt(1.0 / m),
                 _fmt(rec["v2_origin"]), _fmt(rec["z_origin"])]
            )
        rec = results[("flow", "pt-nlo", None, m2, lam)]
        if rec["is_abort"]:
            failed.append(f"m=infinity (m2={_fmt(m2)}, lambda={_fmt(lam)}): {rec['termination']}")
        else:
            out_rows.append(
                [_fmt(m2), _fmt(lam), "", "0",
                 _fmt(rec["v2_origin"]), _fmt(rec["z_origin"])]
            )
    _write_rows(args.out, ["m2", "lambda", "m", "inv_m", "v2_origin", "z_origin"], out_rows)
    if failed:
        sys.stderr.write("ptflow fig1: aborted runs: " + "; ".join(failed) + "\n")
        return 2
    return 0


def cmd_fig2(args) -> int:
    if args.scheme == "pt-m" and (args.m is None or args.m < 1):
        sys.stderr.write("ptflow fig2: --scheme pt-m requires --m >= 1\n")
        return 1
    try:
        snaps = sorted((float(s) for s in args.snapshots.split(",") if s.strip()), reverse=True)
    except ValueError:
        sys.stderr.write(f"ptflow fig2: bad --snapshots {args.snapshots!r}\n")
        return 1
    if not snaps or snaps[-1] > args.kmin:
        snaps.append(args.kmin)

    params = ModelParams(m_squared=args.m2, lam=args.lam, cutoff=args.cutoff)
    grid = _build_grid(args, params)
    spec = SchemeSpec(_SCHEME_TAGS[args.scheme], args.m)
    res = integrate(params, spec, grid, _build_cfg(args), snapshot_ks=snaps)

    out_rows = []
    for state in res.snapshots:
        v2 = apply_stencil(state.v.values, grid.h, 2)
        k_s = _fmt(state.k)
        for x, v2_i, z_i in zip(grid.x, v2, state.z.values):
            out_rows.append([k_s, _fmt(x), _fmt(v2_i), _fmt(z_i)])
    _write_rows(args.out, ["k", "x", "v2", "z"], out_rows)
    if res.termination.is_abort:
        sys.stderr.write(
            f"ptflow fig2: run aborted: {res.termination.value} ({res.diagnostics.note})\n"
        )
        return 2
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "flow": cmd_flow,
        "exact": cmd_exact,
        "instanton": cmd_instanton,
        "table1": cmd_table1,
        "fig1": cmd_fig1,
        "fig2": cmd_fig2,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
