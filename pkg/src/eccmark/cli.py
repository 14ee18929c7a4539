"""Command line front end: ``ecc-mark {test,simulate,scenario,bands,zscores}``.

All randomness flows from ``--seed``; reruns with identical flags produce
byte-identical outputs regardless of ``--threads`` (or the
``ECC_MARK_THREADS`` environment override).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ._util import resolve_threads
from .envelopes import CSR_INTENSITY, RANDOM_LABELING
from .filtration import curve_to_csv, diagram_from_matrix, diagram_to_csv
from .geometry import (EUCLIDEAN, MarkedPointPattern, Window,
                       mark_weighted_entries, pairwise_matrix,
                       read_pattern_csv, write_pattern_csv)
from .localscores import local_z_scores, zscores_to_csv
from .scenarios import (DEFAULT_WINDOW, ScenarioSpec, analyze_pattern,
                        generate_pattern, load_scenario_config,
                        mark_model_for, monte_carlo_bands,
                        simulate_scenario_pattern, spatial_model_for)
from .svgplot import bands_figure, envelope_figure, scenario_panel, zscore_figure
from ._util import STREAM_MARKS, STREAM_PATTERN, rng_for


def _window_args(p: argparse.ArgumentParser):
    p.add_argument("--window", nargs=4, type=float, metavar=("XMIN", "XMAX", "YMIN", "YMAX"),
                   help="observation window bounds")
    p.add_argument("--infer-window", action="store_true",
                   help="use the bounding box of the input data")


def _stat_args(p: argparse.ArgumentParser):
    p.add_argument("--s", type=int, default=999, help="simulations per null (default 999)")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--K", type=int, default=100, dest="k", help="grid size (default 100)")
    p.add_argument("--epsilon-max", default="auto",
                   help="truncation scale: 'auto' or a number")
    p.add_argument("--standardize-marks", action="store_true",
                   help="rescale marks to zero mean / unit sd before weighting")


def _common_args(p: argparse.ArgumentParser, out_help: str):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: ECC_MARK_THREADS or all cores)")
    p.add_argument("--out", required=True, help=out_help)


def _load_input_pattern(args) -> MarkedPointPattern:
    window = Window(*args.window) if args.window else None
    return read_pattern_csv(args.input, window=window, infer_window=args.infer_window)


def _epsilon_max(args):
    if args.epsilon_max == "auto":
        return None
    return float(args.epsilon_max)


def _summary_line(report) -> str:
    return (f"null={report.null_kind} p={report.p_value:g} "
            f"eps_crit={report.epsilon_crit:g} rank={report.extreme_rank_obs:g}")


def _write_analysis(out_dir: Path, pattern, analysis, seed: int,
                    write_pattern: bool = False, diagrams: bool = False,
                    panel: bool = False) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    reports = analysis.reports
    doc = {"schema": 1, "seed": seed,
           "tests": [reports[k].to_json_dict() for k in sorted(reports)]}
    with open(out_dir / "report.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    for kind, curve in analysis.curves.items():
        curve_to_csv(curve, out_dir / f"curves_{kind}.csv")
    primary = RANDOM_LABELING if RANDOM_LABELING in analysis.curves else CSR_INTENSITY
    curve_to_csv(analysis.curves[primary], out_dir / "curves.csv")
    if analysis.zmap is not None:
        zscores_to_csv(analysis.zmap, pattern, out_dir / "zscores.csv")
        zscore_figure(pattern, analysis.zmap, out_dir / "zscores.svg")
    ordered = [reports[k] for k in (CSR_INTENSITY, RANDOM_LABELING) if k in reports]
    envelope_figure(ordered, out_dir / "figure.svg")
    if write_pattern:
        write_pattern_csv(pattern, out_dir / "pattern.csv")
    if panel:
        scenario_panel(pattern, ordered, analysis.zmap, out_dir / "panel.svg")
    if diagrams:
        euclid = pairwise_matrix(pattern, EUCLIDEAN)
        if CSR_INTENSITY in reports:
            grid_end = float(reports[CSR_INTENSITY].grid[-1])
            diagram_to_csv(diagram_from_matrix(euclid, grid_end),
                           out_dir / "diagram_csr_intensity.csv")
        if RANDOM_LABELING in reports:
            dm = mark_weighted_entries(euclid.entries, pattern.marks)
            grid_end = float(reports[RANDOM_LABELING].grid[-1])
            diagram_to_csv(diagram_from_matrix(dm, grid_end),
                           out_dir / "diagram_random_labeling.csv")


def cmd_test(args) -> int:
    pattern = _load_input_pattern(args)
    nulls = ("csr", "random_labeling") if args.null == "both" else (args.null,)
    analysis = analyze_pattern(
        pattern, nulls, s=args.s, seed=args.seed, alpha=args.alpha, k=args.k,
        epsilon_max=_epsilon_max(args), threads=args.threads,
        standardize=args.standardize_marks,
    )
    _write_analysis(Path(args.out), pattern, analysis, args.seed, diagrams=args.diagrams)
    for kind in (CSR_INTENSITY, RANDOM_LABELING):
        if kind in analysis.reports:
            print(_summary_line(analysis.reports[kind]))
    return 0


def cmd_simulate(args) -> int:
    if args.config:
        cfg = load_scenario_config(args.config)
        spatial = cfg.get("spatial_model")
        marks = cfg.get("mark_model")
        n, seed = cfg["n"], cfg["seed"]
        if spatial is None or marks is None:
            raise ValueError("config must define both 'spatial' and 'marks'")
        pattern = generate_pattern(spatial, marks, n,
                                   rng_for(seed, STREAM_PATTERN),
                                   rng_for(seed, STREAM_MARKS))
    else:
        window = Window(*args.window) if args.window else DEFAULT_WINDOW
        spec = ScenarioSpec(args.spatial, args.marks, n=args.n, s=1,
                            seed=args.seed, window=window)
        pattern = simulate_scenario_pattern(spec)
    out = Path(args.out)
    if out.suffix != ".csv":
        out.mkdir(parents=True, exist_ok=True)
        out = out / "pattern.csv"
    write_pattern_csv(pattern, out)
    euclid = pairwise_matrix(pattern, EUCLIDEAN).entries
    min_dist = float(euclid[np.triu_indices(pattern.n, 1)].min()) if pattern.n > 1 else float("inf")
    print(f"wrote {out} n={pattern.n} min_distance={min_dist:g}")
    if args.verify and args.spatial == "hardcore" and min_dist < 0.9:
        print(f"hardcore constraint violated: min distance {min_dist:g} < 0.9",
              file=sys.stderr)
        return 1
    return 0


def cmd_scenario(args) -> int:
    if args.config:
        cfg = load_scenario_config(args.config)
        window = cfg["window"]
        spec = ScenarioSpec(args.spatial, args.marks, n=cfg["n"], s=args.s,
                            seed=cfg["seed"], window=window)
        spatial = cfg.get("spatial_model") or spatial_model_for(spec)
        marks = cfg.get("mark_model") or mark_model_for(spec)
        pattern = generate_pattern(spatial, marks, spec.n,
                                   rng_for(spec.seed, STREAM_PATTERN),
                                   rng_for(spec.seed, STREAM_MARKS))
        seed = spec.seed
    else:
        spec = ScenarioSpec(args.spatial, args.marks, n=args.n, s=args.s, seed=args.seed)
        pattern = simulate_scenario_pattern(spec)
        seed = args.seed
    analysis = analyze_pattern(pattern, ("csr", "random_labeling"), s=args.s,
                               seed=seed, alpha=args.alpha, k=args.k,
                               epsilon_max=_epsilon_max(args), threads=args.threads,
                               standardize=args.standardize_marks)
    _write_analysis(Path(args.out), pattern, analysis, seed,
                    write_pattern=True, panel=True)
    for kind in (CSR_INTENSITY, RANDOM_LABELING):
        print(_summary_line(analysis.reports[kind]))
    return 0


def cmd_bands(args) -> int:
    spec = ScenarioSpec(args.spatial, args.marks, n=args.n, s=1, seed=args.seed)
    summary = monte_carlo_bands(spec, B=args.B, k=args.k, threads=args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary.to_csv(out / "bands.csv")
    bands_figure(summary, out / "bands.svg")
    print(f"wrote {out / 'bands.csv'} B={args.B} grid_end={summary.grid[-1]:g}")
    return 0


def cmd_zscores(args) -> int:
    pattern = _load_input_pattern(args)
    if args.epsilon_crit == "auto":
        analysis = analyze_pattern(pattern, ("random_labeling",), s=args.s,
                                   seed=args.seed, alpha=args.alpha, k=args.k,
                                   threads=args.threads,
                                   standardize=args.standardize_marks)
        zmap = analysis.zmap
        eps = zmap.epsilon_crit
    else:
        eps = float(args.epsilon_crit)
        zmap = local_z_scores(pattern, eps, s=args.s, seed=args.seed,
                              threads=args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    zscores_to_csv(zmap, pattern, out / "zscores.csv")
    zscore_figure(pattern, zmap, out / "zscores.svg")
    print(f"eps_crit={eps:g} mean_z={float(np.mean(zmap.scores)):g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ecc-mark",
        description="Mark-weighted Euler characteristic curves with global envelope tests",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="test a CSV point pattern against the null models")
    p.add_argument("--input", required=True, help="CSV with header x,y,mark")
    _window_args(p)
    p.add_argument("--null", choices=("both", "csr", "random_labeling"), default="both")
    p.add_argument("--diagrams", action="store_true", help="also export persistence diagrams")
    _stat_args(p)
    _common_args(p, "output directory")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("simulate", help="generate a scenario realization as CSV")
    p.add_argument("--spatial", choices=("csr", "thomas", "hardcore"), default="csr")
    p.add_argument("--marks", choices=("random", "positive", "negative"), default="random")
    p.add_argument("--n", type=int, default=80)
    p.add_argument("--config", help="scenario JSON config (overrides the flags)")
    p.add_argument("--verify", action="store_true",
                   help="fail if a hardcore pattern violates its minimum separation")
    _window_args(p)
    _common_args(p, "output CSV file (or directory)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scenario", help="run one factorial scenario end to end")
    p.add_argument("--spatial", choices=("csr", "thomas", "hardcore"), required=True)
    p.add_argument("--marks", choices=("random", "positive", "negative"), required=True)
    p.add_argument("--n", type=int, default=80)
    p.add_argument("--config", help="scenario JSON config for model overrides")
    _stat_args(p)
    _common_args(p, "output directory")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("bands", help="Monte Carlo band characterization of a scenario")
    p.add_argument("--spatial", choices=("csr", "thomas", "hardcore"), required=True)
    p.add_argument("--marks", choices=("random", "positive", "negative"), required=True)
    p.add_argument("--n", type=int, default=80)
    p.add_argument("--B", type=int, default=1000)
    p.add_argument("--K", type=int, default=100, dest="k")
    _common_args(p, "output directory")
    p.set_defaults(func=cmd_bands)

    p = sub.add_parser("zscores", help="per-point Z-scores at a critical scale")
    p.add_argument("--input", required=True)
    _window_args(p)
    p.add_argument("--epsilon-crit", default="auto",
                   help="critical scale ('auto' runs the marked test first)")
    _stat_args(p)
    _common_args(p, "output directory")
    p.set_defaults(func=cmd_zscores)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    resolve_threads(args.threads)  # fail fast on a malformed env override
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
