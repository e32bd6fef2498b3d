"""Command-line front end.

Subcommands: report (full suite), fit (power law on a one-column file),
motifs, paths, synth (emit synthetic CSVs), industry (per-NAICS subnetwork
reports). Exit codes: 0 success, 2 input error, 3 estimation failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import components as comp
from .degree_stats import DegreeSample, ccdf, degree_sequences
from .errors import EstimationError, InputError
from .graph import build_graph
from .ingest import NetworkScope, filter_network, parse_edges_csv, parse_nodes_csv
from .motifs import count_simple_cycles, count_shortcut_edges, four_node_census, triad_census
from .paths import avg_clustering, degree_assortativity, path_stats
from .powerlaw import bootstrap_ci, fit_power_law, gof_pvalue
from .records import ParseStats
from .report import ReportConfig, run_report
from .synth import (
    ScaleFreeParams,
    attach_financials,
    gen_directed_scale_free,
    gen_discrete_power_law,
    gen_er_digraph,
    gen_random_tree,
    write_network_csv,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_ESTIMATION = 3


def _add_network_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--nodes", required=True, help="node CSV (id,kind,naics,assets,wages)")
    p.add_argument("--edges", required=True, help="edge CSV (parent_id,child_id,share_pct,source)")
    p.add_argument(
        "--scope",
        default="entities",
        choices=["entities", "all", "no-fire"],
        help="network scope variant (default: entities)",
    )
    p.add_argument("--gcc-only", action="store_true", help="restrict to the giant component")


def _load_scoped(args) -> "comp.EntityGraph":
    stats = ParseStats()
    nodes = parse_nodes_csv(args.nodes, stats)
    edges = parse_edges_csv(args.edges, stats)
    g = build_graph(nodes, edges, stats=stats)
    return filter_network(g, NetworkScope.named(args.scope, gcc_only=args.gcc_only))


def _emit(payload: dict) -> None:
    json.dump(payload, sys.stdout, indent=2, sort_keys=True, default=float)
    sys.stdout.write("\n")


def _cmd_report(args) -> int:
    config = ReportConfig(
        seed=args.seed,
        bootstrap_b=args.bootstrap,
        workers=args.workers,
        exact_paths_cap=args.exact_paths_cap,
        sample_sources=args.sample_sources,
        motif_budget=args.motif_budget,
        motif_samples=args.motif_samples,
        cycle_cap=args.cycle_cap,
        shortcut_depth=args.shortcut_depth,
        share_policy=args.share_policy,
        naics_prefix=args.naics,
        figures=not args.no_figures,
    )
    if 0 < config.bootstrap_b < 100:
        raise InputError("--bootstrap must be 0 (disabled) or >= 100")
    scope = NetworkScope.named(args.scope, gcc_only=args.gcc_only)
    run_report(args.nodes, args.edges, scope, config, out_dir=args.out)
    print(f"report written to {Path(args.out) / 'report.json'}")
    return EXIT_OK


def _cmd_fit(args) -> int:
    try:
        raw = np.loadtxt(args.values, dtype=np.int64, ndmin=1)
    except ValueError as exc:
        raise InputError(f"could not read integer column from {args.values}: {exc}") from None
    sample = DegreeSample(raw, "out")
    fit = fit_power_law(sample, xmin=args.xmin)
    payload = {"n": sample.n, "power_law": fit.to_dict(), "ccdf_slope": ccdf(sample).loglog_slope()}
    if args.bootstrap:
        lo, hi = bootstrap_ci(sample, b=args.bootstrap, seed=args.seed, workers=args.workers)
        payload["power_law"]["ci95"] = [lo, hi]
    if args.gof:
        payload["gof_pvalue"] = gof_pvalue(sample, fit, nsims=args.gof, seed=args.seed, workers=args.workers)
    _emit(payload)
    return EXIT_OK


def _cmd_motifs(args) -> int:
    g = _load_scoped(args)
    if g.is_empty:
        _emit({"empty": True})
        return EXIT_OK
    payload = {
        "triads": triad_census(g).to_dict(),
        "four_node": four_node_census(
            g,
            exclude_funnel=args.exclude_funnel,
            budget=args.motif_budget,
            target_samples=args.motif_samples,
            seed=args.seed,
        ).to_dict(),
        "cycles": count_simple_cycles(g, cap=args.cycle_cap).to_dict(),
        "shortcuts": count_shortcut_edges(g, depth=args.shortcut_depth).to_dict(),
    }
    _emit(payload)
    return EXIT_OK


def _cmd_paths(args) -> int:
    g = _load_scoped(args)
    if g.is_empty:
        _emit({"empty": True})
        return EXIT_OK
    gcc = comp.extract_gcc(g)
    if gcc.node_count <= args.exact_paths_cap:
        stats = path_stats(gcc, exact_cap=args.exact_paths_cap)
    else:
        stats = path_stats(gcc, sample_sources=args.sample_sources, seed=args.seed)
    rho = degree_assortativity(g)
    _emit(
        {
            "gcc_node_count": gcc.node_count,
            "paths": stats.to_dict(),
            "avg_clustering": avg_clustering(g),
            "assortativity": {"value": rho, "defined": rho is not None},
        }
    )
    return EXIT_OK


def _cmd_synth(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.kind == "degree-sample":
        sample = gen_discrete_power_law(args.n, args.gamma, xmin=args.xmin, seed=args.seed)
        path = out / "values.txt"
        np.savetxt(path, sample.values, fmt="%d")
        print(f"wrote {path}")
        return EXIT_OK

    if args.kind == "scale-free":
        params = ScaleFreeParams(
            p_new_source=args.p_new_source,
            p_new_target=args.p_new_target,
            offset_in=args.offset_in,
            offset_out=args.offset_out,
        )
        g = gen_directed_scale_free(args.n, params, seed=args.seed)
        print(
            f"predicted exponents: in={params.predicted_in_exponent:.3f} "
            f"out={params.predicted_out_exponent:.3f}"
        )
    elif args.kind == "tree":
        g = gen_random_tree(args.n, seed=args.seed)
        if args.with_shares:
            g = _with_unit_shares(g)
    elif args.kind == "er":
        g = gen_er_digraph(args.n, args.p, seed=args.seed)
    else:
        raise InputError(f"unknown synthetic kind {args.kind!r}")
    if args.with_financials:
        g = attach_financials(g, seed=args.seed + 1)
    nodes_path = out / "nodes.csv"
    edges_path = out / "edges.csv"
    write_network_csv(g, nodes_path, edges_path)
    print(f"wrote {nodes_path} ({g.node_count} nodes) and {edges_path} ({g.edge_count} edges)")
    return EXIT_OK


def _with_unit_shares(g):
    from .graph import EntityGraph

    return EntityGraph(
        list(g.ids),
        g.kinds.copy(),
        list(g.naics),
        g.assets.copy(),
        g.wages.copy(),
        g.parents.copy(),
        g.children.copy(),
        np.ones(g.edge_count),
        year=g.year,
    )


def _cmd_industry(args) -> int:
    g = _load_scoped(args)
    results = {}
    for prefix in args.naics:
        sliced = comp.industry_subnetwork(g, prefix)
        sub = sliced.graph
        entry = {
            "prefixes": list(sliced.prefixes),
            "node_count": sub.node_count,
            "edge_count": sub.edge_count,
            "match_fraction": None if np.isnan(sliced.match_fraction) else sliced.match_fraction,
        }
        if sub.edge_count:
            out_s, in_s = degree_sequences(sub)
            for direction, s in (("out", out_s), ("in", in_s)):
                try:
                    entry[f"gamma_{direction}"] = fit_power_law(s).to_dict()
                except EstimationError as exc:
                    entry[f"gamma_{direction}"] = {"skipped": str(exc)}
        results[prefix] = entry
    _emit({"industries": results})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="capnet",
        description="Ownership/capital network measurement: power-law fits, motifs, paths, consolidation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("report", help="run the full measurement pipeline")
    _add_network_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bootstrap", type=int, default=200, metavar="B", help="replicates (0 disables)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--exact-paths-cap", type=int, default=200_000)
    p.add_argument("--sample-sources", type=int, default=64, metavar="K")
    p.add_argument("--motif-budget", type=int, default=2_000_000)
    p.add_argument("--motif-samples", type=int, default=200_000)
    p.add_argument("--cycle-cap", type=int, default=1_000_000)
    p.add_argument("--shortcut-depth", type=int, default=None)
    p.add_argument("--share-policy", default="equal_split", choices=["equal_split", "skip"])
    p.add_argument("--naics", default=None, help="also report this NAICS prefix subnetwork")
    p.add_argument("--no-figures", action="store_true", help="skip rendering CCDF figures")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("fit", help="fit a power law to a one-column integer file")
    p.add_argument("--values", required=True, help="text file, one positive integer per line")
    p.add_argument("--xmin", type=int, default=None, help="fix the tail cutoff instead of scanning")
    p.add_argument("--bootstrap", type=int, default=0, metavar="B")
    p.add_argument("--gof", type=int, default=0, metavar="NSIMS")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("motifs", help="triad and 4-node censuses, cycles, shortcuts")
    _add_network_args(p)
    p.add_argument("--exclude-funnel", action="store_true")
    p.add_argument("--motif-budget", type=int, default=2_000_000)
    p.add_argument("--motif-samples", type=int, default=200_000)
    p.add_argument("--cycle-cap", type=int, default=1_000_000)
    p.add_argument("--shortcut-depth", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_motifs)

    p = sub.add_parser("paths", help="diameter, path lengths, clustering, assortativity")
    _add_network_args(p)
    p.add_argument("--exact-paths-cap", type=int, default=200_000)
    p.add_argument("--sample-sources", type=int, default=64, metavar="K")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_paths)

    p = sub.add_parser("synth", help="emit synthetic CSVs with known ground truth")
    p.add_argument("--kind", required=True, choices=["scale-free", "tree", "er", "degree-sample"])
    p.add_argument("--n", type=int, required=True, help="edges (scale-free), nodes (tree/er), draws (degree-sample)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")
    p.add_argument("--gamma", type=float, default=2.5, help="degree-sample exponent")
    p.add_argument("--xmin", type=int, default=1)
    p.add_argument("--p", type=float, default=0.1, help="er edge probability")
    p.add_argument("--p-new-source", type=float, default=0.4)
    p.add_argument("--p-new-target", type=float, default=0.1)
    p.add_argument("--offset-in", type=float, default=0.0)
    p.add_argument("--offset-out", type=float, default=0.0)
    p.add_argument("--with-financials", action="store_true")
    p.add_argument("--with-shares", action="store_true", help="trees: 100%% ownership per edge")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("industry", help="per-NAICS-prefix subnetwork reports")
    _add_network_args(p)
    p.add_argument("--naics", action="append", required=True, help="repeatable NAICS prefix")
    p.set_defaults(func=_cmd_industry)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EstimationError as exc:
        print(f"estimation error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except FileNotFoundError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
