"""Command-line entry point: ``dynres replay | bench | validate | verify-reduction``."""

from __future__ import annotations

import argparse
import csv
import io
import math
import re
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import generators, reduction
from .effres import QueryParams, make_index, query
from .errors import DynResError, ParseError
from .graph import ResistanceOracle, read_graph
from .separator import SeparatorStrategy, build_separator_tree, validate


@dataclass(frozen=True)
class RunConfig:
    epsilon: float = 0.25
    seed: int = 42
    separator: str = "bfs"
    rebuild_coeff: float = 1.0
    with_oracle: bool = False
    timings: bool = False
    out: str | None = None
    plot: bool = True

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if not self.rebuild_coeff > 0:
            raise ValueError("rebuild coefficient must be positive")

    @property
    def strategy(self):
        return SeparatorStrategy(self.separator)


# -- inputs --------------------------------------------------------------------

_SPEC = re.compile(r"^(grid|path|planar|cycle):(\d+)(?:x(\d+))?(?::(\d+))?$")


def load_graph(spec):
    """A graph file, or a generator spec ``grid:R[xC]``, ``path:N``, ``cycle:N``, ``planar:N[:seed]``."""
    m = _SPEC.match(spec)
    if m and not Path(spec).exists():
        kind, a, b, seed = m.group(1), int(m.group(2)), m.group(3), m.group(4)
        if kind == "grid":
            return generators.grid(a, int(b) if b else a)
        if kind == "path":
            return generators.path(a)
        if kind == "cycle":
            return generators.cycle(a)
        return generators.planar_like(a, seed=int(seed or 0))
    return read_graph(spec)


_ARITY = {"I": 3, "D": 2, "T": 1, "Q": 2, "R": 0}


def parse_stream(text):
    """Parse ``I u v w | D u v | T u | Q s t | R`` lines into tuples."""
    ops = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        kind = parts[0].upper()
        if kind not in _ARITY or len(parts) != _ARITY[kind] + 1:
            raise ParseError(f"cannot parse {line.strip()!r}", lineno)
        try:
            args = [int(x) for x in parts[1:3]] if kind != "T" else [int(parts[1])]
            if kind == "I":
                args.append(float(parts[3]))
        except ValueError as exc:
            raise ParseError(f"bad number in {line.strip()!r}", lineno) from exc
        ops.append((kind, *args))
    return ops


def format_stream(ops):
    lines = []
    for op in ops:
        if op[0] == "I":
            lines.append(f"I {op[1]} {op[2]} {op[3]!r}")
        else:
            lines.append(" ".join(str(x) for x in op))
    return "\n".join(lines) + ("\n" if lines else "")


# -- commands ------------------------------------------------------------------

def run_replay(G, ops, config, err=sys.stderr):
    """Execute ``ops``; returns (rows, number of failed operations)."""
    params = QueryParams(eps=config.epsilon)
    index = make_index(G, params, seed=config.seed, strategy=config.strategy,
                       rebuild_coeff=config.rebuild_coeff)
    current = G.copy() if config.with_oracle else None
    oracle = None
    rows = []
    failures = 0
    for k, op in enumerate(ops):
        kind = op[0]
        start = time.perf_counter_ns()
        try:
            if kind == "I":
                index.insert(op[1], op[2], op[3])
            elif kind == "D":
                index.delete(op[1], op[2])
            elif kind == "T":
                index.add_terminal(op[1])
            elif kind == "R":
                index.rebuild()
            else:
                psi = query(index, op[1], op[2], params)
                elapsed = time.perf_counter_ns() - start
                row = {"op_index": k, "s": op[1], "t": op[2], "psi": psi}
                if current is not None:
                    oracle = oracle or ResistanceOracle(current)
                    row["oracle"] = oracle(op[1], op[2])
                if config.timings:
                    row["elapsed_ns"] = elapsed
                rows.append(row)
                continue
        except DynResError as exc:
            failures += 1
            print(f"op {k}: {type(exc).__name__}: {exc}", file=err)
            continue
        if current is not None and kind in "ID":
            if kind == "I":
                current.add_edge(op[1], op[2], op[3])
            else:
                current.remove_edge(op[1], op[2])
            oracle = None
    return rows, failures


def replay_csv(rows, config):
    cols = ["op_index", "s", "t", "psi"]
    if config.with_oracle:
        cols.append("oracle")
    if config.timings:
        cols.append("elapsed_ns")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in cols])
    return buf.getvalue()


def _fmt(x):
    return repr(x) if isinstance(x, float) else str(x)


def run_bench(sizes, ops, config):
    """Median update and query latency on square grids of each size."""
    rows = []
    params = QueryParams(eps=config.epsilon)
    for n in sizes:
        side = int(round(math.sqrt(n)))
        G = generators.grid(side)
        index = make_index(G, params, seed=config.seed, strategy=config.strategy,
                           rebuild_coeff=config.rebuild_coeff)
        rng = np.random.default_rng(config.seed)
        pairs = [(u, v) for u, v, _ in G.edges]
        upd, qry = [], []
        inserted = []
        for k in range(ops):
            if inserted and k % 2:
                u, v = inserted.pop()
                t0 = time.perf_counter_ns()
                index.delete(u, v)
            else:
                u, v = pairs[int(rng.integers(len(pairs)))]
                inserted.append((u, v))
                t0 = time.perf_counter_ns()
                index.insert(u, v, float(rng.uniform(0.5, 2.0)))
            upd.append(time.perf_counter_ns() - t0)
        verts = G.vertices
        for _ in range(ops):
            s, t = (int(x) for x in rng.choice(verts, size=2, replace=False))
            t0 = time.perf_counter_ns()
            query(index, s, t, params)
            qry.append(time.perf_counter_ns() - t0)
        t0 = time.perf_counter_ns()
        index.rebuild()
        rebuild = time.perf_counter_ns() - t0
        rows.append({"n": side * side, "update_ns_p50": int(np.median(upd)),
                     "query_ns_p50": int(np.median(qry)), "rebuild_ns": rebuild})
    return rows


def bench_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = ["n", "update_ns_p50", "query_ns_p50", "rebuild_ns"]
    w.writerow(cols)
    for r in rows:
        w.writerow([r[c] for c in cols])
    return buf.getvalue()


def validate_report(G, config, fuzz=0, plant=None):
    """Separator-tree violations plus, with ``fuzz``, invariant scans over random streams."""
    tree = build_separator_tree(G, config.strategy)
    if plant == "duplicate-edge":
        leaves = tree.leaves()
        eid, e = next((i, e) for leaf in leaves for i, e in leaf.edges.items())
        other = next(leaf for leaf in leaves if eid not in leaf.edges)
        other.edges[eid] = e
    elif plant == "extra-boundary":
        leaf = next(x for x in tree.leaves() if set(x.vertices) - x.boundary)
        leaf.boundary.add(min(set(leaf.vertices) - leaf.boundary))
    lines = [str(v) for v in validate(tree)]
    for k in range(fuzz):
        index = make_index(G, QueryParams(eps=config.epsilon), seed=config.seed + k,
                           strategy=config.strategy, rebuild_coeff=config.rebuild_coeff)
        for op in generators.random_stream(G, 50, seed=config.seed + k):
            if op[0] == "I":
                index.insert(*op[1:])
            elif op[0] == "D":
                index.delete(*op[1:])
            else:
                query(index, op[1], op[2])
            bad = index.check_invariants()
            if bad:
                lines += [f"stream {k}: {b}" for b in bad]
                break
    return lines


def reduction_rows(mode, n0, instances):
    rows = []
    for k, (M, u, v) in enumerate(instances):
        rep = reduction.check_instance(reduction.build_gadget(mode, M, u, v))
        rows.append({
            "index": k, "mode": mode,
            "M": "".join(str(x) for row in M for x in row),
            "u": "".join(map(str, u)), "v": "".join(map(str, v)),
            "uMv": rep.umv, "detect": rep.detect, "classify": rep.classify,
            "Lambda": str(rep.decimal(40)),
            "pass": int(rep.ok),
        })
    return rows


def reduction_csv(rows):
    buf = io.StringIO()
    cols = ["index", "mode", "M", "u", "v", "uMv", "detect", "classify", "Lambda", "pass"]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([r[c] for c in cols])
    return buf.getvalue()


# -- argument parsing ------------------------------------------------------------

def _common(p):
    p.add_argument("--epsilon", type=float, default=0.25, help="query accuracy (default 0.25)")
    p.add_argument("--seed", type=int, default=42, help="master seed (default 42)")
    p.add_argument("--separator", default="bfs", choices=["grid", "bfs", "spectral", "bfs-level", "spectral-bisection"],
                   help="separator strategy (default bfs)")
    p.add_argument("--rebuild-coeff", type=float, default=1.0, help="rebuild every ceil(rho sqrt n) ops (default 1)")
    p.add_argument("--out", help="write CSV here instead of stdout; figures go next to it")
    p.add_argument("--no-plot", action="store_true", help="skip the figure even when --out is given")


def build_parser():
    parser = argparse.ArgumentParser(prog="dynres", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("replay", help="run an update/query stream against a graph")
    p.add_argument("graph", help="graph file ('n m' then 'u v w') or generator spec such as grid:16")
    p.add_argument("stream", help="stream file with I/D/T/Q/R lines")
    p.add_argument("--with-oracle", action="store_true", help="add the exact resistance column")
    p.add_argument("--timings", action="store_true", help="add per-query elapsed_ns")
    _common(p)

    p = sub.add_parser("bench", help="latency ladder on grid graphs")
    p.add_argument("--sizes", default="256,1024,4096", help="comma-separated n values (default 256,1024,4096)")
    p.add_argument("--ops", type=int, default=200, help="updates and queries per size (default 200)")
    _common(p)

    p = sub.add_parser("validate", help="separator-tree and dynamic invariant checks")
    p.add_argument("graph")
    p.add_argument("--fuzz", type=int, default=0, help="number of random 50-op streams to scan")
    p.add_argument("--plant-fault", choices=["duplicate-edge", "extra-boundary"],
                   help="corrupt the tree on purpose to see the violation reported")
    _common(p)

    p = sub.add_parser("verify-reduction", help="exact checks of the lower-bound gadgets")
    p.add_argument("--mode", choices=list(reduction.MODES), default="separable")
    p.add_argument("--n0", type=int, default=2)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exhaustive", action="store_true")
    g.add_argument("--samples", type=int)
    _common(p)
    return parser


def _config(args, **extra):
    return RunConfig(epsilon=args.epsilon, seed=args.seed, separator=args.separator,
                     rebuild_coeff=args.rebuild_coeff, out=args.out, plot=not args.no_plot, **extra)


def _emit(text, config, out):
    if config.out:
        Path(config.out).write_text(text)
    else:
        out.write(text)


def _figure_path(config, suffix):
    if not (config.out and config.plot):
        return None
    p = Path(config.out)
    return p.with_name(f"{p.stem}_{suffix}.png")


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        if args.command == "replay":
            config = _config(args, with_oracle=args.with_oracle, timings=args.timings)
            G = load_graph(args.graph)
            ops = parse_stream(Path(args.stream).read_text())
            rows, failures = run_replay(G, ops, config, err=err)
            _emit(replay_csv(rows, config), config, out)
            fig = _figure_path(config, "ratio")
            if fig and config.with_oracle and rows:
                from .plotting import ratio_plot
                ratio_plot(rows, config.epsilon, fig)
            return 0 if failures == 0 else 1
        if args.command == "bench":
            config = _config(args)
            sizes = [int(x) for x in args.sizes.split(",") if x]
            rows = run_bench(sizes, args.ops, config)
            _emit(bench_csv(rows), config, out)
            from .plotting import latency_plot, loglog_slope
            if len(rows) > 1:
                slope = loglog_slope([r["n"] for r in rows], [r["update_ns_p50"] for r in rows])
                print(f"update latency log-log slope: {slope:.3f}", file=err)
            fig = _figure_path(config, "latency")
            if fig:
                latency_plot(rows, fig)
            return 0
        if args.command == "validate":
            config = _config(args)
            G = load_graph(args.graph)
            lines = validate_report(G, config, fuzz=args.fuzz, plant=args.plant_fault)
            _emit("".join(line + "\n" for line in lines) or "ok\n", config, out)
            return 1 if lines else 0
        if args.command == "verify-reduction":
            config = _config(args)
            if not 1 <= args.n0 <= 4:
                print("n0 must lie in 1..4", file=err)
                return 2
            exhaustive = args.exhaustive or (args.samples is None and args.n0 <= 2)
            if exhaustive:
                instances = reduction.all_instances(args.n0)
            else:
                instances = reduction.random_instances(args.n0, args.samples or 200, seed=config.seed)
            rows = reduction_rows(args.mode, args.n0, instances)
            _emit(reduction_csv(rows), config, out)
            failed = sum(1 for r in rows if not r["pass"])
            print(f"{len(rows) - failed}/{len(rows)} instances pass", file=err)
            return 0 if failed == 0 else 1
    except ParseError as exc:
        print(f"parse error: {exc}", file=err)
        return 2
    except (DynResError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=err)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
