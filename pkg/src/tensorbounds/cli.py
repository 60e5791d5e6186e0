"""Command-line front end.

    tensorbounds bound dicke --lambda 2,2
    tensorbounds table complete --kmax 10 --format csv
    tensorbounds certify cw-border --q 2 --k 4

Results go to stdout, diagnostics to stderr.  Exit status: 0 success,
1 computation error, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import __version__
from .cuts import MAX_VERTICES
from .engine import BoundConfig, flattening_cap, main_lower_bound, strassen_bound
from .entropy import InfeasibleMarginals
from .exponents import (
    ALPHA_DUAL,
    OMEGA_MM,
    TABLE_COLUMNS,
    check_cw_border_certificate,
    complete_graph_table,
    cycle_bound,
    flattening_lower_bounds,
)
from .lab import (
    ExperimentConfig,
    average_free_set,
    greedy_diagonal,
    is_average_free,
    leg_strings,
    run_cw_experiment,
    all_sequences,
)
from .relations import DEFAULT_BUDGET, EnumerationBudgetError, RelationError, dicke_symmetry
from .tensors import (
    Graph,
    SparseTensor,
    TensorError,
    complete_graph,
    cw_tensor,
    cycle_graph,
    dicke_tensor,
    graph_tensor,
    unit_tensor,
)
from .tightness import NotTight, TightLabeling, Undetermined, check_tight, find_labeling

DEFAULT_SEED = 20240101
COMPUTATION_ERRORS = (
    NotTight, Undetermined, InfeasibleMarginals, EnumerationBudgetError, RelationError,
    TensorError, ValueError, RuntimeError, OSError,
)


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    command: str
    seed: int = DEFAULT_SEED
    tol: float = 1e-10
    fmt: str = "json"
    workers: int = 1
    omega_mm: float = OMEGA_MM
    alpha_dual: float = ALPHA_DUAL
    budget: int = DEFAULT_BUDGET
    precision: str = "6"

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "CliConfig":
        return cls(
            command=" ".join(x for x in (ns.command, getattr(ns, "sub", None)) if x),
            seed=ns.seed, tol=ns.tol, fmt=ns.format, workers=ns.workers,
            omega_mm=ns.omega_mm, alpha_dual=ns.alpha_dual, budget=ns.budget,
            precision=ns.precision,
        )


# ---------------------------------------------------------------------------
# argument parsing


def _int_list(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(v) for v in text.replace(" ", "").split(",") if v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("parts must be positive integers")
    return vals


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _common(suppress: bool = False) -> argparse.ArgumentParser:
    # subcommands repeat the options with suppressed defaults so that a value
    # given before the subcommand is not overwritten
    def d(v):
        return argparse.SUPPRESS if suppress else v

    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--seed", type=int, default=d(DEFAULT_SEED))
    g.add_argument("--tol", type=float, default=d(1e-10))
    g.add_argument("--format", choices=("json", "csv", "pretty"), default=d("json"))
    g.add_argument("--workers", type=_positive, default=d(1))
    g.add_argument("--omega-mm", type=float, default=d(OMEGA_MM))
    g.add_argument("--alpha-dual", type=float, default=d(ALPHA_DUAL))
    g.add_argument("--budget", type=_positive, default=d(DEFAULT_BUDGET))
    g.add_argument("--precision", choices=("6", "full"), default=d("6"))
    return p


def _tensor_source(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--lambda", dest="lam", type=_int_list, help="Dicke tensor, e.g. 2,2")
    g.add_argument("--w", dest="w", type=_positive, help="W tensor on k legs")
    g.add_argument("--unit", type=_int_list, help="unit tensor r,k")
    g.add_argument("--cw", type=_int_list, help="CW tensor q,k")
    g.add_argument("--complete", type=_positive, help="graph tensor of K_k")
    g.add_argument("--cycle", type=_positive, help="graph tensor of C_k")
    g.add_argument("--graph", type=Path, help="graph JSON {vertices, edges}")
    g.add_argument("--tensor", type=Path, help="tensor JSON {arity, dims, entries}")
    p.add_argument("--n", type=_positive, default=2, help="alphabet size per edge for graph tensors")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tensorbounds", description="Certified bounds for tensor exponents.",
                     parents=[_common()])
    common = _common(suppress=True)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bound", help="entropy lower bound on the monomial subexponent", parents=[common])
    bs = b.add_subparsers(dest="sub", required=True, parser_class=_Parser)
    bd = bs.add_parser("dicke", parents=[common])
    bd.add_argument("--lambda", dest="lam", type=_int_list, required=True)
    bd.add_argument("--symmetry", action="store_true", help="reduce relations by leg/symbol symmetry")
    bg = bs.add_parser("graph", parents=[common])
    g = bg.add_mutually_exclusive_group(required=True)
    g.add_argument("--complete", type=_positive)
    g.add_argument("--cycle", type=_positive)
    g.add_argument("--graph", type=Path)
    bg.add_argument("--n", type=_positive, default=2)
    bf = bs.add_parser("file", parents=[common])
    bf.add_argument("path", type=Path)
    bf.add_argument("--labeling", type=Path, help="JSON list of per-leg integer lists")
    bf.add_argument("--p", type=Path, help="JSON list of probabilities aligned with the support")
    for q in (bd, bg, bf):
        q.add_argument("--strategy", choices=("uniform", "ascent"), default="uniform")
        q.add_argument("--mode", choices=("maximal", "all"), default="maximal")
        q.add_argument("--maximin", action="store_true", help="also run the tripartite maximin (3-tensors)")

    t = sub.add_parser("tight", help="tightness checks and labelings", parents=[common])
    ts = t.add_subparsers(dest="sub", required=True, parser_class=_Parser)
    tc = ts.add_parser("check", parents=[common])
    _tensor_source(tc)
    tc.add_argument("--labeling", type=Path, required=True)
    tf = ts.add_parser("find", parents=[common])
    _tensor_source(tf)

    tb = sub.add_parser("table", help="exponent table for complete graphs", parents=[common])
    tbs = tb.add_subparsers(dest="sub", required=True, parser_class=_Parser)
    tcmp = tbs.add_parser("complete", parents=[common])
    tcmp.add_argument("--kmax", type=int, default=10)
    tcmp.add_argument("--kmin", type=int, default=3)
    tcmp.add_argument("--qm", type=float, default=1.0, help="subexponent of D_(2,2) fed to the CW bound")
    tcmp.add_argument("--qmax", type=_positive, default=10_000)

    c = sub.add_parser("certify", help="symbolic border-rank identity check", parents=[common])
    cs = c.add_subparsers(dest="sub", required=True, parser_class=_Parser)
    cb = cs.add_parser("cw-border", parents=[common])
    cb.add_argument("--q", type=_positive, required=True)
    cb.add_argument("--k", type=_positive, required=True)
    cb.add_argument("--constant", type=str, default=None,
                    help="override the b0 coefficient as 'c0,c1' meaning c0 + c1*eps")

    lb = sub.add_parser("lab", help="finite-N restriction experiments", parents=[common])
    ls = lb.add_subparsers(dest="sub", required=True, parser_class=_Parser)
    la = ls.add_parser("avgfree", parents=[common])
    la.add_argument("--k", type=_positive, required=True)
    la.add_argument("--N", type=_positive, required=True)
    la.add_argument("--mode", choices=("exhaustive", "greedy"), default="exhaustive")
    le = ls.add_parser("experiment", parents=[common])
    _tensor_source(le)
    le.add_argument("--N", type=_positive, required=True)
    le.add_argument("--trials", type=_positive, default=50)
    le.add_argument("--no-types", action="store_true")
    le.add_argument("--joint-type", action="store_true")
    le.add_argument("--no-hash", action="store_true")
    le.add_argument("--M", type=_positive, default=None)
    le.add_argument("--mu", type=float, default=0.5)
    ld = ls.add_parser("diagonal", parents=[common])
    _tensor_source(ld)
    ld.add_argument("--power", type=_positive, default=1)
    ld.add_argument("--order", type=Path, help="JSON list giving the point order")

    cu = sub.add_parser("cuts", help="exhaustive min/max cut and flattening bounds", parents=[common])
    g = cu.add_mutually_exclusive_group(required=True)
    g.add_argument("--complete", type=_positive)
    g.add_argument("--cycle", type=_positive)
    g.add_argument("--graph", type=Path)
    cu.add_argument("--alpha", type=float, default=None, help="also evaluate the odd-cycle formula")
    return parser


# ---------------------------------------------------------------------------
# inputs


def _read_json(path: Path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ValueError(f"{path}: invalid JSON ({e})")


def _graph(ns) -> Graph:
    if getattr(ns, "complete", None):
        return complete_graph(ns.complete)
    if getattr(ns, "cycle", None):
        return cycle_graph(ns.cycle)
    return Graph.from_dict(_read_json(ns.graph))


def _tensor(ns) -> tuple[SparseTensor, str]:
    if getattr(ns, "lam", None):
        return dicke_tensor(ns.lam), "D_(" + ",".join(map(str, ns.lam)) + ")"
    if getattr(ns, "w", None):
        if ns.w < 2:
            raise ValueError("W tensor needs k >= 2")
        return dicke_tensor((ns.w - 1, 1)), f"W_{ns.w}"
    if getattr(ns, "unit", None):
        if len(ns.unit) != 2:
            raise ValueError("--unit takes r,k")
        return unit_tensor(*ns.unit), f"unit({ns.unit[0]},{ns.unit[1]})"
    if getattr(ns, "cw", None):
        if len(ns.cw) != 2:
            raise ValueError("--cw takes q,k")
        return cw_tensor(*ns.cw), f"CW({ns.cw[0]},{ns.cw[1]})"
    if getattr(ns, "tensor", None):
        return SparseTensor.from_dict(_read_json(ns.tensor)), str(ns.tensor)
    g = _graph(ns)
    return graph_tensor(g, ns.n), f"T_{ns.n}(G), |V|={g.vertex_count}, |E|={len(g.edges)}"


# ---------------------------------------------------------------------------
# commands


def cmd_bound(ns, cfg: CliConfig) -> dict:
    symmetry = None
    if ns.sub == "dicke":
        t, name = dicke_tensor(ns.lam), "D_(" + ",".join(map(str, ns.lam)) + ")"
        if ns.symmetry:
            symmetry = dicke_symmetry(ns.lam, t)
    elif ns.sub == "graph":
        g = _graph(ns)
        t, name = graph_tensor(g, ns.n), f"T_{ns.n}(G)"
    else:
        t, name = SparseTensor.from_dict(_read_json(ns.path)), str(ns.path)
    labeling = TightLabeling.from_list(_read_json(ns.labeling)) if getattr(ns, "labeling", None) else None
    p = _read_json(ns.p) if getattr(ns, "p", None) else None
    bc = BoundConfig(
        strategy="user" if p is not None else ns.strategy, mode=ns.mode, seed=cfg.seed,
        tol=cfg.tol, budget=cfg.budget, workers=cfg.workers,
    )
    cert = main_lower_bound(t, bc, labeling=labeling, p=p, symmetry=symmetry)
    out = {
        "command": cfg.command,
        "tensor": name,
        "bound": cert.bound,
        "closed_form": cert.to_dict()["closed_form"],
        "flattening_cap": flattening_cap(t),
        "certificate": cert.to_dict(),
    }
    if ns.maximin:
        if t.arity != 3:
            raise ValueError("--maximin needs a 3-tensor")
        s = strassen_bound(t, seed=cfg.seed)
        out["maximin"] = s.to_dict()
    return out


def cmd_tight(ns, cfg: CliConfig) -> dict:
    t, name = _tensor(ns)
    if ns.sub == "check":
        a = TightLabeling.from_list(_read_json(ns.labeling))
        return {"command": cfg.command, "tensor": name, "tight": check_tight(t, a), "labeling": a.to_list()}
    a = find_labeling(t, cfg.seed)
    return {"command": cfg.command, "tensor": name, "tight": True, "labeling": a.to_list()}


def cmd_table(ns, cfg: CliConfig) -> dict:
    rows = complete_graph_table(ns.kmax, cfg.omega_mm, ns.qm, (2, ns.qmax), ns.kmin)
    return {
        "command": cfg.command,
        "constants": {"omega_mm": cfg.omega_mm, "q_M": ns.qm},
        "rows": [{**r.cells(), "upper_source": r.upper_source,
                  "tau_upper_exact": r.tau_upper_exact, "tau_lower_exact": r.tau_lower_exact}
                 for r in rows],
    }


def cmd_certify(ns, cfg: CliConfig) -> dict:
    constant = (1, None)
    if ns.constant:
        parts = ns.constant.split(",")
        if len(parts) != 2:
            raise UsageError("--constant takes c0,c1")
        constant = (int(parts[0]), int(parts[1]))
    res = check_cw_border_certificate(ns.q, ns.k, constant)
    return {
        "command": cfg.command,
        "q": ns.q,
        "k": ns.k,
        "result": "pass" if res.passed else "fail",
        "failed_order": res.failed_order,
        "matches_cw": res.matches_cw,
        "rank_one_terms": res.terms,
        "top_coefficient_support": len(res.top),
    }


def cmd_lab(ns, cfg: CliConfig) -> dict:
    if ns.sub == "avgfree":
        s = average_free_set(ns.k, ns.N, ns.mode)
        return {"command": cfg.command, "k": ns.k, "N": ns.N, "mode": ns.mode,
                "size": len(s), "elements": list(s.elements), "valid": is_average_free(ns.k, s.elements)}
    t, name = _tensor(ns)
    if ns.sub == "experiment":
        ec = ExperimentConfig(
            N=ns.N, trials=ns.trials, seed=cfg.seed, restrict_types=not ns.no_types,
            joint_type=ns.joint_type, hash=not ns.no_hash, M=ns.M, mu=ns.mu,
        )
        target = main_lower_bound(t, BoundConfig(seed=cfg.seed, budget=cfg.budget)).bound
        rep = run_cw_experiment(t, ec, target_bound=target, flattening_cap=flattening_cap(t))
        return {"command": cfg.command, "tensor": name, **rep.to_dict()}
    pts = list(t.support)
    seqs = all_sequences(len(pts), ns.power)
    strings = [leg_strings(pts, s) for s in seqs]
    order = _read_json(ns.order) if ns.order else None
    d = greedy_diagonal(strings, order)
    return {
        "command": cfg.command, "tensor": name, "power": ns.power,
        "X": d.X, "Y": d.Y, "components": d.components, "size": d.size,
        "selected": [[list(leg) for leg in p] for p in d.selected],
    }


def cmd_cuts(ns, cfg: CliConfig) -> dict:
    g = _graph(ns)
    if g.vertex_count > MAX_VERTICES:
        raise ValueError(f"exhaustive cuts limited to {MAX_VERTICES} vertices")
    fb = flattening_lower_bounds(g)
    out = {
        "command": cfg.command, "vertices": g.vertex_count, "edges": fb.edges,
        "min_cut": fb.min_cut, "max_cut": fb.max_cut,
        "omega_lower": fb.omega_lower, "tau_lower": fb.tau_lower,
    }
    if ns.alpha is not None:
        cb = cycle_bound(g.vertex_count, ns.alpha, cfg.omega_mm)
        out["cycle_bound"] = {"alpha": cb.alpha, "value": cb.value, "omega_form": cb.omega_form}
    return out


COMMANDS = {"bound": cmd_bound, "tight": cmd_tight, "table": cmd_table,
            "certify": cmd_certify, "lab": cmd_lab, "cuts": cmd_cuts}


# ---------------------------------------------------------------------------
# output


def _round(obj, digits: int | None):
    if digits is None:
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return obj
        r = round(obj, digits)
        return 0.0 if r == 0 else r
    if isinstance(obj, dict):
        return {k: _round(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v, digits) for v in obj]
    return obj


def _rows(result: dict) -> tuple[list[str], list[list]]:
    if "rows" in result:
        return list(TABLE_COLUMNS), [[r[c] for c in TABLE_COLUMNS] for r in result["rows"]]
    scalars = {k: v for k, v in result.items() if not isinstance(v, (dict, list))}
    return list(scalars), [list(scalars.values())]


def render(result: dict, fmt: str, precision: str) -> str:
    result = _round(result, None if precision == "full" else 6)
    if fmt == "json":
        return json.dumps(result, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        head, rows = _rows(result)
        w.writerow(head)
        w.writerows(rows)
        return buf.getvalue()
    lines = []
    head, rows = _rows(result)
    if "rows" in result:
        widths = [max(len(str(x)) for x in [h] + [r[j] for r in rows]) for j, h in enumerate(head)]
        lines.append("  ".join(h.ljust(wd) for h, wd in zip(head, widths)))
        lines += ["  ".join(str(x).ljust(wd) for x, wd in zip(r, widths)) for r in rows]
    else:
        for k, v in zip(head, rows[0]):
            lines.append(f"{k}: {v}")
        cert = result.get("certificate")
        if cert and cert.get("worst"):
            wst = cert["worst"]
            lines.append(
                f"worst relation: axis {wst['relation']['axis']}, type {wst['type']}, "
                f"rank {wst['rank']}, penalty {wst['penalty']}"
            )
    return "\n".join(lines) + "\n"


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        cfg = CliConfig.from_args(ns)
        result = COMMANDS[ns.command](ns, cfg)
    except UsageError as e:
        print(e, file=sys.stderr)
        return 2
    except COMPUTATION_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    sys.stdout.write(render(result, cfg.fmt, cfg.precision))
    # a certificate that does not check out is a computation failure
    return 1 if result.get("result") == "fail" else 0


if __name__ == "__main__":
    sys.exit(main())
