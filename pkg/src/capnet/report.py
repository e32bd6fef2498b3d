"""Full measurement pipeline: ingest -> scope filter -> statistics -> files.

``run_report`` writes ``report.json`` plus ``ccdf_out.tsv`` / ``ccdf_in.tsv``
(and rendered CCDF figures unless disabled) into the output directory. Every
report section is either populated or carries an explicit skip reason, and
the report echoes the full configuration, so a run is reproducible
byte-for-byte from its own output. All randomized stages derive their seeds
from ``config.seed`` and fixed stage tags, which makes the report identical
across worker counts.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import components as comp
from .consolidation import consolidate
from .degree_stats import ccdf, degree_sequences, size_correlation_matrix
from .errors import EstimationError, InputError
from .graph import build_graph
from .ingest import NetworkScope, filter_network, parse_edges_csv, parse_nodes_csv
from .motifs import count_shortcut_edges, count_simple_cycles, four_node_census, triad_census
from .paths import avg_clustering, degree_assortativity, expected_small_world_diameter, path_stats
from .powerlaw import fit_lognormal_tail, fit_power_law, vuong_lr_test, with_bootstrap_ci
from .records import ParseStats

SCHEMA_VERSION = 1

# fixed per-stage seed tags so stages never share random streams
_STAGE_TAGS = {"bootstrap_out": 11, "bootstrap_in": 12, "paths": 21, "motif4": 31}


@dataclass(frozen=True)
class ReportConfig:
    seed: int = 0
    bootstrap_b: int = 200
    workers: int = 1
    exact_paths_cap: int = 200_000
    sample_sources: int = 64
    motif_budget: int = 2_000_000
    motif_samples: int = 200_000
    cycle_cap: int = 1_000_000
    shortcut_depth: int | None = None
    share_policy: str = "equal_split"
    naics_prefix: str | None = None
    figures: bool = True
    year: int | None = None

    def describe(self) -> dict:
        # worker count deliberately not echoed: results are worker-invariant,
        # and the report must be byte-identical across worker counts
        return {
            "seed": self.seed,
            "bootstrap_b": self.bootstrap_b,
            "bootstrap_flavor": "full_procedure_refit_xmin",
            "exact_paths_cap": self.exact_paths_cap,
            "sample_sources": self.sample_sources,
            "motif_budget": self.motif_budget,
            "motif_samples": self.motif_samples,
            "cycle_cap": self.cycle_cap,
            "shortcut_depth": self.shortcut_depth,
            "share_policy": self.share_policy,
            "naics_prefix": self.naics_prefix,
            "figures": self.figures,
            "year": self.year,
        }


@dataclass
class NetworkReport:
    """The full per-network statistics bundle, serialized as report.json."""

    sections: dict = field(default_factory=dict)
    files: list[str] = field(default_factory=list)

    def set(self, name: str, value) -> None:
        self.sections[name] = value

    def skip(self, name: str, reason: str) -> None:
        self.sections[name] = {"skipped": reason}

    def to_json(self) -> str:
        payload = dict(self.sections)
        payload["files"] = sorted(self.files)
        payload["schema_version"] = SCHEMA_VERSION
        return json.dumps(_denan(payload), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _denan(obj):
    if isinstance(obj, dict):
        return {k: _denan(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_denan(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if (np.isnan(v) or np.isinf(v)) else v
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _stage(report: NetworkReport, name: str, fn: Callable[[], dict]) -> None:
    try:
        report.set(name, fn())
    except EstimationError as exc:
        report.skip(name, str(exc))
    except InputError as exc:
        report.skip(name, str(exc))


def _atomic_write(path: Path, data: str | bytes) -> None:
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_report(
    nodes_path: str | Path,
    edges_path: str | Path,
    scope: NetworkScope,
    config: ReportConfig = ReportConfig(),
    out_dir: str | Path = ".",
) -> NetworkReport:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = NetworkReport()
    report.set("config", config.describe())
    report.set("scope", scope.describe())

    stats = ParseStats()
    nodes = parse_nodes_csv(nodes_path, stats)
    edges = parse_edges_csv(edges_path, stats)
    raw = build_graph(nodes, edges, year=config.year, stats=stats)
    report.set(
        "ingest",
        {
            "nodes_read": len(nodes),
            "edges_read": len(edges),
            "unknown_kinds": stats.unknown_kinds,
            "merged_duplicates": stats.merged_duplicates,
            "share_discrepancies": stats.share_discrepancies,
            "over_share_edges": stats.over_share_edges,
        },
    )
    del nodes, edges  # the record lists dominate memory at full scale

    scoped = filter_network(raw, scope)
    del raw
    if scoped.is_empty:
        report.set("network", {"node_count": 0, "edge_count": 0, "empty": True})
        for name in (
            "degree_fit_out",
            "degree_fit_in",
            "paths",
            "clustering",
            "assortativity",
            "motifs_3",
            "motifs_4",
            "cycles",
            "shortcuts",
            "size_correlation",
        ):
            report.skip(name, "network is empty under this scope")
        _write_outputs(report, out_dir, None, None, None, None, config)
        return report

    labeling = comp.connected_components(scoped)
    gcc = scoped if scope.gcc_only else comp.extract_gcc(scoped)
    report.set(
        "network",
        {
            "node_count": scoped.node_count,
            "edge_count": scoped.edge_count,
            "empty": False,
            "component_count": labeling.count,
            "gcc_node_count": labeling.gcc_size if not scope.gcc_only else scoped.node_count,
            "percent_in_gcc": comp.percent_in_gcc(scoped, labeling),
            "expected_small_world_diameter": (
                expected_small_world_diameter(gcc.node_count) if gcc.node_count >= 16 else None
            ),
        },
    )

    # degree fits, per direction
    tables = {}
    fits = {}
    try:
        out_sample, in_sample = degree_sequences(scoped)
        samples = {"out": out_sample, "in": in_sample}
    except EstimationError as exc:
        samples = {}
        report.skip("degree_fit_out", str(exc))
        report.skip("degree_fit_in", str(exc))
    for direction, sample in samples.items():
        name = f"degree_fit_{direction}"

        def fit_stage(sample=sample, direction=direction):
            table = ccdf(sample)
            tables[direction] = table
            fit = fit_power_law(sample)
            if config.bootstrap_b > 0:
                fit = with_bootstrap_ci(
                    fit,
                    sample,
                    b=config.bootstrap_b,
                    seed=_stage_seed(config.seed, f"bootstrap_{direction}"),
                    workers=config.workers,
                )
            fits[direction] = fit
            section = {"n": sample.n, "power_law": fit.to_dict(), "ccdf_slope": table.loglog_slope()}
            try:
                ln = fit_lognormal_tail(sample, fit.xmin)
                section["lognormal"] = ln.to_dict()
                section["lr_test"] = vuong_lr_test(sample, fit, ln).to_dict()
            except EstimationError as exc:
                section["lognormal"] = {"skipped": str(exc)}
                section["lr_test"] = {"skipped": str(exc)}
            return section

        _stage(report, name, fit_stage)

    # undirected path statistics on the GCC
    def paths_stage():
        if gcc.node_count <= config.exact_paths_cap:
            ps = path_stats(gcc, exact_cap=config.exact_paths_cap)
        else:
            ps = path_stats(
                gcc,
                sample_sources=config.sample_sources,
                seed=_stage_seed(config.seed, "paths"),
                exact_cap=config.exact_paths_cap,
            )
        return ps.to_dict()

    _stage(report, "paths", paths_stage)
    _stage(report, "clustering", lambda: {"average": avg_clustering(scoped)})

    def assort_stage():
        rho = degree_assortativity(scoped)
        return {"value": rho, "defined": rho is not None}

    _stage(report, "assortativity", assort_stage)
    _stage(report, "motifs_3", lambda: triad_census(scoped).to_dict())
    _stage(
        report,
        "motifs_4",
        lambda: four_node_census(
            scoped,
            exclude_funnel=True,
            budget=config.motif_budget,
            target_samples=config.motif_samples,
            seed=_stage_seed(config.seed, "motif4"),
        ).to_dict(),
    )
    _stage(report, "cycles", lambda: count_simple_cycles(scoped, cap=config.cycle_cap).to_dict())
    _stage(
        report,
        "shortcuts",
        lambda: count_shortcut_edges(scoped, depth=config.shortcut_depth).to_dict(),
    )

    def correlation_stage():
        assets_c = consolidate(scoped, "assets", config.share_policy)
        wages_c = consolidate(scoped, "wages", config.share_policy)
        section = size_correlation_matrix(scoped, assets_c, wages_c).to_dict()
        section["consolidation"] = {
            "assets": assets_c.to_dict(),
            "wages": wages_c.to_dict(),
        }
        return section

    _stage(report, "size_correlation", correlation_stage)

    if config.naics_prefix:
        def industry_stage():
            sliced = comp.industry_subnetwork(scoped, config.naics_prefix)
            sub = sliced.graph
            section = {
                "prefixes": list(sliced.prefixes),
                "node_count": sub.node_count,
                "edge_count": sub.edge_count,
                "match_fraction": sliced.match_fraction,
            }
            if sub.edge_count:
                out_s, in_s = degree_sequences(sub)
                for direction, s in (("out", out_s), ("in", in_s)):
                    try:
                        section[f"gamma_{direction}"] = fit_power_law(s).to_dict()
                    except EstimationError as exc:
                        section[f"gamma_{direction}"] = {"skipped": str(exc)}
            return section

        _stage(report, "industry", industry_stage)

    _write_outputs(
        report,
        out_dir,
        tables.get("out"),
        tables.get("in"),
        fits.get("out"),
        fits.get("in"),
        config,
    )
    return report


def _stage_seed(seed: int, stage: str) -> int:
    return (int(seed) & 0xFFFFFFFFFFFFFFFF) * 64 + _STAGE_TAGS[stage]


def _write_outputs(report, out_dir, table_out, table_in, fit_out, fit_in, config):
    for direction, table, fit in (("out", table_out, fit_out), ("in", table_in, fit_in)):
        if table is None:
            continue
        tsv_path = out_dir / f"ccdf_{direction}.tsv"
        _atomic_write(tsv_path, table.to_tsv())
        report.files.append(tsv_path.name)
        if config.figures:
            from .figures import render_ccdf_figure

            png_path = out_dir / f"ccdf_{direction}.png"
            render_ccdf_figure(
                table, png_path, f"{direction}-degree CCDF", fit=fit
            )
            report.files.append(png_path.name)
    report_path = out_dir / "report.json"
    report.files.append(report_path.name)
    _atomic_write(report_path, report.to_json())
