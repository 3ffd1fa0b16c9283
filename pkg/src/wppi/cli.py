"""Command-line entry point: ingestion, orchestration, and report emission.

Exit codes: 0 on success, 1 for computation failures, 2 for usage or input
errors. Every emitted manifest embeds the full effective configuration and
a sha256 of each input file, so a report is reproducible from its inputs.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, builder, detector, engine, evaluator, fileio, synthetic

QUANTILE_POINTS = (0.0, 0.25, 0.5, 0.75, 1.0)
SWEEP_THRESHOLDS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6)


class UsageError(ValueError):
    """Bad flag combination or unusable input, reported with exit code 2."""


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--output", required=True, help="output directory")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: WPPI_THREADS or all cores)")
    parser.add_argument("--format", choices=("tsv", "json"), default="tsv",
                        help="report format")


def _add_build_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mapping", help="protein-to-gene mapping TSV")
    parser.add_argument("--default-weight", type=float, default=None,
                        help="fixed weight for unmatched edges (default: mean of matched)")
    parser.add_argument("--zero-as-unmatched", action="store_true",
                        help="give exactly-zero-correlation edges the fallback weight")
    parser.add_argument("--partition-strategy", choices=("range", "hash"),
                        default="range", help="edge partitioning strategy")


def _add_detect_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--d-alpha", type=float, default=None,
                        help="hub weighted-degree threshold (default: mean degree)")
    parser.add_argument("--lambda", dest="cohesion", type=float, default=2.0,
                        help="functional-cohesion threshold (default: 2.0)")
    parser.add_argument("--max-stage2-passes", type=int, default=32,
                        help="stage-2 sweep cap")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wppi",
        description="Weighted protein-interaction networks and community detection.",
    )
    parser.add_argument("--version", action="version", version=f"wppi {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-wppi", help="weight a PPI network by gene co-expression")
    p.add_argument("--ppi", required=True, help="interaction TSV")
    p.add_argument("--ged", required=True, help="gene expression TSV")
    _add_build_flags(p)
    _add_common(p)

    p = sub.add_parser("detect", help="detect communities in a weighted network")
    p.add_argument("--wppi", help="weighted network TSV (skips the build step)")
    p.add_argument("--ppi", help="interaction TSV (build in-process)")
    p.add_argument("--ged", help="gene expression TSV (build in-process)")
    p.add_argument("--emit-wppi", action="store_true",
                   help="write the in-process weighted network alongside the results")
    _add_build_flags(p)
    _add_detect_flags(p)
    _add_common(p)

    p = sub.add_parser("evaluate", help="score detected communities")
    p.add_argument("--communities", required=True, help="communities TSV from detect")
    p.add_argument("--catalogue", help="known-complex catalogue TSV")
    p.add_argument("--annotations", help="protein annotation TSV")
    p.add_argument("--threshold", type=float, default=evaluator.DEFAULT_MATCH_THRESHOLD,
                   help="overlap-score match threshold")
    p.add_argument("--annotated-universe", action="store_true",
                   help="restrict the enrichment population to annotated proteins")
    _add_common(p)

    p = sub.add_parser("pipeline", help="build, detect, and evaluate in one run")
    p.add_argument("--ppi", required=True)
    p.add_argument("--ged", required=True)
    p.add_argument("--catalogue")
    p.add_argument("--annotations")
    p.add_argument("--threshold", type=float, default=evaluator.DEFAULT_MATCH_THRESHOLD)
    p.add_argument("--annotated-universe", action="store_true")
    p.add_argument("--no-intermediates", action="store_true",
                   help="skip writing the intermediate weighted network")
    _add_build_flags(p)
    _add_detect_flags(p)
    _add_common(p)

    p = sub.add_parser("gen-synthetic", help="generate a seeded planted-partition fixture")
    p.add_argument("--blocks", default="10,10", help="comma-separated block sizes")
    p.add_argument("--w-in", default="0.8,1.0", help="within-block weight range lo,hi")
    p.add_argument("--w-out", default="0.0,0.1", help="cross-block weight range lo,hi")
    p.add_argument("--p-in", type=float, default=1.0, help="within-block edge probability")
    p.add_argument("--p-out", type=float, default=1.0, help="cross-block edge probability")
    p.add_argument("--samples", type=int, default=10,
                   help="expression samples to synthesize (0 disables)")
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)

    return parser


def _input_entry(path) -> dict:
    return {"path": str(path), "sha256": fileio.sha256_file(path)}


def _write_json(path, payload) -> None:
    fileio.atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _weight_quantiles(network) -> dict[str, float]:
    w = network.edge_weight
    return {f"q{int(q * 100)}": float(np.quantile(w, q)) for q in QUANTILE_POINTS}


def _run_build(args, threads: int):
    proteins, ppi = fileio.load_ppi(args.ppi)
    matrix = fileio.load_expression(args.ged)
    from .expression import quantile_normalize

    matrix = quantile_normalize(matrix)
    mapping = fileio.load_mapping(args.mapping) if args.mapping else None
    inputs = {"ppi": _input_entry(args.ppi), "ged": _input_entry(args.ged)}
    if args.mapping:
        inputs["mapping"] = _input_entry(args.mapping)

    started = time.perf_counter()
    result = builder.build_wppi(
        proteins, ppi, matrix, mapping,
        default_weight=args.default_weight,
        zero_as_unmatched=args.zero_as_unmatched,
        threads=threads,
        partition_strategy=args.partition_strategy,
    )
    elapsed = time.perf_counter() - started
    summary = {
        "vertices": ppi.num_vertices,
        "edges": result.network.edge_count,
        "self_loops_dropped": ppi.self_loops_dropped,
        "duplicates_dropped": ppi.duplicates_dropped,
        "matching_ratio_percent": round(result.matching.ratio_percent, 2),
        "matched_edges": result.matched_edge_count,
        "unmatched_edges": result.unmatched_edge_count,
        "zero_variance_edges": result.zero_variance_edge_count,
        "fallback_weight": result.fallback_weight,
        "weight_quantiles": _weight_quantiles(result.network),
        "build_seconds": round(elapsed, 4),
    }
    return proteins, result, inputs, summary


def _build_config(args, threads: int, command: str) -> dict:
    config = {
        "command": command,
        "threads": threads,
        "format": args.format,
        "output": str(args.output),
    }
    for name in ("ppi", "ged", "mapping", "wppi", "catalogue", "annotations",
                 "communities", "default_weight", "zero_as_unmatched",
                 "partition_strategy", "d_alpha", "max_stage2_passes",
                 "threshold", "annotated_universe", "no_intermediates", "emit_wppi",
                 "blocks", "w_in", "w_out", "p_in", "p_out", "samples", "seed"):
        if hasattr(args, name):
            config[name] = getattr(args, name)
    if hasattr(args, "cohesion"):
        config["lambda"] = args.cohesion
    return config


def cmd_build_wppi(args) -> int:
    threads = engine.resolve_threads(args.threads)
    out = Path(args.output)
    proteins, result, inputs, summary = _run_build(args, threads)
    fileio.write_wppi(out / "wppi.tsv", proteins, result.network)
    manifest = {
        "tool": "wppi",
        "version": __version__,
        "config": _build_config(args, threads, "build-wppi"),
        "inputs": inputs,
        "build": summary,
    }
    _write_json(out / "build_manifest.json", manifest)
    print(f"vertices: {summary['vertices']}")
    print(f"edges: {summary['edges']}")
    print(f"matching ratio: {summary['matching_ratio_percent']:.2f}%")
    quantiles = " ".join(f"{k}={v:.6f}" for k, v in summary["weight_quantiles"].items())
    print(f"weight quantiles: {quantiles}")
    return 0


def _detect_on(network, proteins, args, threads: int):
    config = detector.HubConfig(
        hub_threshold=args.d_alpha,
        cohesion_threshold=args.cohesion,
        max_stage2_passes=args.max_stage2_passes,
    )
    started = time.perf_counter()
    result = detector.detect(network, config, threads=threads)
    elapsed = time.perf_counter() - started
    rows = []
    for report in result.communities:
        labels = [proteins.label_of(v) for v in report.vertices]
        rows.append((report.community_id, labels, report.functional_cohesion,
                     report.modularity))
    summary = {
        "communities": len(result.communities),
        "hub_threshold": result.hub_threshold,
        "hub_count": result.hub_count,
        "stage1_communities": result.stage1_communities,
        "stage1_sweeps": result.stage1_sweeps,
        "stage1_hit_cap": result.stage1_hit_cap,
        "stage2_passes": result.stage2_passes,
        "stage2_hit_cap": result.stage2_hit_cap,
        "detect_seconds": round(elapsed, 4),
    }
    return rows, summary


def cmd_detect(args) -> int:
    threads = engine.resolve_threads(args.threads)
    out = Path(args.output)
    inputs = {}
    build_summary = None
    if args.wppi:
        if args.ppi or args.ged:
            raise UsageError("--wppi replaces --ppi/--ged; give one or the other")
        proteins, network = fileio.load_wppi(args.wppi)
        inputs["wppi"] = _input_entry(args.wppi)
    elif args.ppi and args.ged:
        proteins, result, inputs, build_summary = _run_build(args, threads)
        network = result.network
        if args.emit_wppi:
            fileio.write_wppi(out / "wppi.tsv", proteins, network)
    else:
        raise UsageError("detect needs --wppi, or --ppi together with --ged")

    rows, summary = _detect_on(network, proteins, args, threads)
    fileio.write_communities(out / "communities.tsv", rows)
    manifest = {
        "tool": "wppi",
        "version": __version__,
        "config": _build_config(args, threads, "detect"),
        "inputs": inputs,
        "detection": summary,
    }
    if build_summary:
        manifest["build"] = build_summary
    _write_json(out / "detect_manifest.json", manifest)
    print(f"communities: {summary['communities']}")
    print(f"stage-1 sweeps: {summary['stage1_sweeps']}, "
          f"stage-2 passes: {summary['stage2_passes']}")
    return 0


def _evaluation_sections(communities, args):
    """Catalogue matching and enrichment tables for loaded communities."""
    member_sets = {cid: set(labels) for cid, labels, _, _ in communities}
    universe: set[str] = set()
    for labels in member_sets.values():
        universe |= labels

    sections: dict = {}
    if args.catalogue:
        catalogue = fileio.load_catalogue(args.catalogue)
        report = evaluator.match_complexes(member_sets, catalogue, args.threshold)
        sweep = []
        for threshold in SWEEP_THRESHOLDS:
            matched = sum(1 for m in report.matches if m.score >= threshold)
            sweep.append({"threshold": threshold, "matched": matched,
                          "total": report.total})
        sections["complex_matching"] = {
            "threshold": report.threshold,
            "matched": report.matched_count,
            "total": report.total,
            "matches": [vars(m) for m in report.matches],
            "threshold_sweep": sweep,
        }
    if args.annotations:
        annotations = fileio.load_annotations(args.annotations)
        trimmed = {}
        for term, members in annotations.terms.items():
            kept = members & universe
            if kept:
                trimmed[term] = frozenset(kept)
        if not trimmed:
            raise UsageError("no annotation covers any protein in the communities")
        annotations = evaluator.AnnotationSet(trimmed)
        if args.annotated_universe:
            population = len(annotations.annotated_proteins())
        else:
            population = len(universe)
        records = evaluator.enrich(member_sets, annotations, population)
        sections["enrichment"] = {
            "population": population,
            "annotated_universe": args.annotated_universe,
            "records": [vars(r) for r in records],
        }
    return sections


def _write_evaluation_tsv(out: Path, sections: dict) -> None:
    if "complex_matching" in sections:
        block = sections["complex_matching"]
        lines = ["community_id\tsize\tbest_complex\tcomplex_size\toverlap"
                 "\toverlap_score\trecall_ratio\tmatched"]
        for m in block["matches"]:
            lines.append(
                f"{m['community_id']}\t{m['community_size']}\t{m['complex_name']}"
                f"\t{m['complex_size']}\t{m['overlap']}\t{m['score']:.6f}"
                f"\t{m['recall']:.6f}\t{str(m['matched']).lower()}")
        fileio.atomic_write_text(out / "complex_matches.tsv", "\n".join(lines) + "\n")
        lines = ["threshold\tmatched\ttotal"]
        for row in block["threshold_sweep"]:
            lines.append(f"{row['threshold']:.1f}\t{row['matched']}\t{row['total']}")
        fileio.atomic_write_text(out / "threshold_sweep.tsv", "\n".join(lines) + "\n")
    if "enrichment" in sections:
        block = sections["enrichment"]
        lines = ["community_id\tsize\tterm\tgroup_size\toverlap\tp_value"]
        for r in block["records"]:
            lines.append(f"{r['community_id']}\t{r['community_size']}\t{r['term']}"
                         f"\t{r['group_size']}\t{r['overlap']}\t{r['p_value']:.2E}")
        fileio.atomic_write_text(out / "enrichment.tsv", "\n".join(lines) + "\n")


def cmd_evaluate(args) -> int:
    threads = engine.resolve_threads(args.threads)
    out = Path(args.output)
    if not args.catalogue and not args.annotations:
        raise UsageError("evaluate needs --catalogue and/or --annotations")
    communities = fileio.load_communities(args.communities)
    inputs = {"communities": _input_entry(args.communities)}
    for name in ("catalogue", "annotations"):
        if getattr(args, name):
            inputs[name] = _input_entry(getattr(args, name))
    sections = _evaluation_sections(communities, args)
    manifest = {
        "tool": "wppi",
        "version": __version__,
        "config": _build_config(args, threads, "evaluate"),
        "inputs": inputs,
        "evaluation": sections,
    }
    if args.format == "json":
        _write_json(out / "evaluation.json", manifest)
    else:
        _write_evaluation_tsv(out, sections)
        _write_json(out / "evaluate_manifest.json", manifest)
    if "complex_matching" in sections:
        block = sections["complex_matching"]
        print(f"matched complexes: {block['matched']}/{block['total']} "
              f"at threshold {block['threshold']:.2f}")
    if "enrichment" in sections:
        records = sections["enrichment"]["records"]
        print(f"enriched communities: {len(records)} "
              f"(best p = {records[0]['p_value']:.2E})" if records else
              "enriched communities: 0")
    return 0


def cmd_pipeline(args) -> int:
    threads = engine.resolve_threads(args.threads)
    out = Path(args.output)
    proteins, result, inputs, build_summary = _run_build(args, threads)
    for name in ("catalogue", "annotations"):
        if getattr(args, name):
            inputs[name] = _input_entry(getattr(args, name))
    if not args.no_intermediates:
        fileio.write_wppi(out / "wppi.tsv", proteins, result.network)
    rows, detect_summary = _detect_on(result.network, proteins, args, threads)
    fileio.write_communities(out / "communities.tsv", rows)

    sections = None
    if args.catalogue or args.annotations:
        communities = [(cid, labels, fc, q) for cid, labels, fc, q in rows]
        sections = _evaluation_sections(communities, args)
        if args.format == "tsv":
            _write_evaluation_tsv(out, sections)
    report = {
        "tool": "wppi",
        "version": __version__,
        "config": _build_config(args, threads, "pipeline"),
        "inputs": inputs,
        "build": build_summary,
        "detection": detect_summary,
        "evaluation": sections,
    }
    name = "pipeline_report.json" if args.format == "json" else "pipeline_manifest.json"
    _write_json(out / name, report)
    print(f"vertices: {build_summary['vertices']}, edges: {build_summary['edges']}, "
          f"communities: {detect_summary['communities']}")
    return 0


def _parse_pair(text: str, flag: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"{flag} expects two comma-separated numbers")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise UsageError(f"{flag}: {exc}") from exc


def cmd_gen_synthetic(args) -> int:
    out = Path(args.output)
    try:
        blocks = [int(b) for b in args.blocks.split(",") if b]
    except ValueError as exc:
        raise UsageError(f"--blocks: {exc}") from exc
    if not blocks:
        raise UsageError("--blocks must name at least one block size")
    syn = synthetic.planted_partition(
        blocks,
        w_in=_parse_pair(args.w_in, "--w-in"),
        w_out=_parse_pair(args.w_out, "--w-out"),
        p_in=args.p_in,
        p_out=args.p_out,
        seed=args.seed,
    )
    labels = syn.proteins.labels
    ppi_lines = [f"{labels[i]}\t{labels[j]}" for i, j, _ in syn.network.edges()]
    fileio.atomic_write_text(out / "ppi.tsv", "\n".join(ppi_lines) + "\n")
    fileio.write_wppi(out / "wppi.tsv", syn.proteins, syn.network)
    truth_lines = [f"{b}\t{','.join(labels[v] for v in block)}"
                   for b, block in enumerate(syn.blocks)]
    fileio.atomic_write_text(out / "truth.tsv", "\n".join(truth_lines) + "\n")
    if args.samples >= 2:
        names, values = synthetic.block_expression(syn, args.samples, seed=args.seed)
        header = "gene_id\t" + "\t".join(f"S{k + 1}" for k in range(args.samples))
        lines = [header]
        for label, row in zip(names, values):
            lines.append(label + "\t" + "\t".join(f"{x:.6f}" for x in row))
        fileio.atomic_write_text(out / "ged.tsv", "\n".join(lines) + "\n")
    print(f"generated {syn.network.num_vertices} vertices, "
          f"{syn.network.edge_count} edges in {out}")
    return 0


_COMMANDS = {
    "build-wppi": cmd_build_wppi,
    "detect": cmd_detect,
    "evaluate": cmd_evaluate,
    "pipeline": cmd_pipeline,
    "gen-synthetic": cmd_gen_synthetic,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (UsageError, fileio.InputError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - boundary of the process
        print(f"computation failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
