"""Command-line surface: simulate, fit, evaluate, analyze, reproduce.

Every command is a pure function of its inputs and --seed; output JSON
documents embed the tool version, a config hash, the dataset hash, and the
seed, so results always trace back to exactly what produced them.

Exit codes: 0 success, 2 config/usage error, 3 I/O error, 4 fit error,
5 dataset-hash mismatch.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import channel_contributions, noise_subspace, principal_angles
from .dataset import dataset_digest, read_csv_dir, write_csv_dir
from .evaluation import EvalReport, evaluate_fit, harden
from .exceptions import RFCPCAError
from .experiments import BENCHMARK_V, run_benchmark, write_rows_csv
from .core import FitResult, MembershipMatrix, fit_fcpca
from .covariance import ClusterSubspaces
from .robust import fit_rfcpca_e, fit_rfcpca_n, fit_rfcpca_t, select_lambda_elbow
from .selection import DEFAULT_ALPHA_GRID, DEFAULT_M_GRID, SearchGrid, cvi, grid_search
from .simulate import SimManifest, generate_clean_dataset, inject_bursts, inject_eyeblinks

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_FIT = 4
EXIT_HASH = 5

SIMULATE_KEYS = {
    "kind": str,            # none | burst | eyeblink
    "n_per_group": int,
    "channels": int,
    "length": None,         # int or [lo, hi]
    "fs": float,
    "rho": float,
    "eta": float,           # burst amplitude multiplier
    "seed": int,
}
SIMULATE_REQUIRED = ("kind", "n_per_group", "channels", "length", "seed")


class ConfigError(Exception):
    pass


def _config_hash(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()


def _provenance(config, data_hash, seed):
    return {
        "tool": "rfcpca",
        "version": __version__,
        "config_sha256": _config_hash(config),
        "dataset_sha256": data_hash,
        "seed": seed,
    }


def _load_simulate_config(path) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    unknown = set(raw) - set(SIMULATE_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = [k for k in SIMULATE_REQUIRED if k not in raw]
    if missing:
        raise ConfigError(f"missing config keys: {missing}")
    if raw["kind"] not in ("none", "burst", "eyeblink"):
        raise ConfigError(f"unknown kind {raw['kind']!r}")
    return raw


def cmd_simulate(args) -> int:
    config = _load_simulate_config(args.config)
    out_dir = Path(args.out)
    t_spec = config["length"]
    if isinstance(t_spec, list):
        t_spec = tuple(t_spec)
    clean, manifest = generate_clean_dataset(
        config["n_per_group"], config["channels"], t_spec,
        fs=config.get("fs", 100.0), seed=config["seed"])
    kind = config["kind"]
    if kind == "burst":
        dataset, manifest = inject_bursts(clean, manifest,
                                          rho=config.get("rho", 0.20),
                                          eta=config.get("eta", 5.0),
                                          seed=config["seed"] + 1)
    elif kind == "eyeblink":
        dataset, manifest = inject_eyeblinks(clean, manifest,
                                             rho=config.get("rho", 0.40),
                                             seed=config["seed"] + 1)
    else:
        dataset = clean
    try:
        write_csv_dir(dataset, out_dir)
        manifest.dataset_sha256 = dataset_digest(out_dir)
        (out_dir / "manifest.json").write_text(manifest.to_json(indent=2))
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {dataset.n_series} trials and manifest.json to {out_dir}")
    return EXIT_OK


def _axes_to_json(subspaces: ClusterSubspaces):
    return [[c.tolist() for c in per_lag] for per_lag in subspaces.axes]


def _fit_to_json(fit: FitResult, extra: dict) -> dict:
    params = dict(fit.variant_params)
    if "retained" in params:
        params["retained"] = np.asarray(params["retained"]).tolist()
    doc = {
        "variant": fit.variant,
        "n_series": fit.n_series,
        "n_clusters": fit.memberships.n_clusters,
        "m": fit.memberships.m,
        "variance_fraction": fit.subspaces.variance_fraction,
        "converged": fit.converged,
        "iterations": fit.iterations,
        "objective_trace": fit.objective_trace,
        "variant_params": params,
        "flagged": fit.flagged.tolist(),
        "memberships": fit.memberships.u.tolist(),
        "errors": fit.errors.tolist(),
        "axes": _axes_to_json(fit.subspaces),
    }
    doc.update(extra)
    return doc


def cmd_fit(args) -> int:
    data_dir = Path(args.data)
    try:
        dataset = read_csv_dir(data_dir)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    data_hash = dataset_digest(data_dir)
    config = {
        "variant": args.variant, "s": args.clusters, "m": args.m, "v": args.v,
        "alpha": args.alpha, "lambda": args.lam, "auto": args.auto,
        "max_lag": args.max_lag, "seed": args.seed,
    }
    report = None
    elbow = None
    try:
        if args.auto:
            grid = SearchGrid(variant=args.variant, s_values=(args.clusters,),
                              m_values=DEFAULT_M_GRID,
                              alpha_values=DEFAULT_ALPHA_GRID,
                              lam="elbow" if args.lam in (None, "auto") else float(args.lam))
            fit, report = grid_search(dataset, grid, seed=args.seed, v=args.v,
                                      max_lag=args.max_lag)
        elif args.variant == "fcpca":
            fit = fit_fcpca(dataset, args.clusters, m=args.m, v=args.v,
                            seed=args.seed, max_lag=args.max_lag)
        elif args.variant == "e":
            fit = fit_rfcpca_e(dataset, args.clusters, m=args.m, v=args.v,
                               seed=args.seed, max_lag=args.max_lag)
        elif args.variant == "n":
            if args.lam in (None, "auto"):
                elbow = select_lambda_elbow(dataset, args.clusters, m=args.m,
                                            v=args.v, seed=args.seed,
                                            max_lag=args.max_lag)
                lam = elbow.lambda_star
            else:
                lam = float(args.lam)
            fit = fit_rfcpca_n(dataset, args.clusters, m=args.m, v=args.v,
                               lam=lam, seed=args.seed, max_lag=args.max_lag)
        else:
            fit = fit_rfcpca_t(dataset, args.clusters, m=args.m,
                               alpha=args.alpha if args.alpha is not None else 0.2,
                               v=args.v, seed=args.seed, max_lag=args.max_lag)
    except RFCPCAError as exc:
        doc = {"error": type(exc).__name__, "message": str(exc),
               "provenance": _provenance(config, data_hash, args.seed)}
        Path(args.out).write_text(json.dumps(doc, indent=2))
        print(f"fit error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FIT

    extra = {"provenance": _provenance(config, data_hash, args.seed)}
    try:
        extra["cvi"] = cvi(fit)
    except RFCPCAError:
        extra["cvi"] = None
    if report is not None:
        extra["selection"] = json.loads(report.to_json())
    if elbow is not None:
        extra["elbow_curve"] = elbow.curve
        extra["elbow_no_elbow"] = elbow.no_elbow
    doc = _fit_to_json(fit, extra)
    try:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps(doc, indent=2))
        memb_path = out.with_suffix(".memberships.csv")
        np.savetxt(memb_path, fit.memberships.u, delimiter=",",
                   header=",".join(f"cluster_{s}" for s in range(fit.memberships.n_clusters)),
                   comments="")
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"fit written to {out} (variant={fit.variant}, converged={fit.converged})")
    return EXIT_OK


def _fit_from_json(doc) -> FitResult:
    u = np.asarray(doc["memberships"], dtype=float)
    axes = [[np.asarray(c, dtype=float) for c in per_lag] for per_lag in doc["axes"]]
    params = dict(doc["variant_params"])
    if "retained" in params:
        params["retained"] = np.asarray(params["retained"], dtype=int)
    return FitResult(
        memberships=MembershipMatrix(u, doc["m"]),
        subspaces=ClusterSubspaces(axes=axes, variance_fraction=doc["variance_fraction"]),
        errors=np.asarray(doc["errors"], dtype=float),
        objective_trace=list(doc["objective_trace"]),
        iterations=doc["iterations"],
        converged=doc["converged"],
        variant=doc["variant"],
        variant_params=params,
        flagged=np.asarray(doc["flagged"], dtype=int),
        seed=doc["provenance"]["seed"],
    )


def cmd_evaluate(args) -> int:
    try:
        fit_doc = json.loads(Path(args.fit).read_text())
        manifest = SimManifest.from_json(Path(args.manifest).read_text())
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if "error" in fit_doc:
        print("error: fit JSON records a failed fit", file=sys.stderr)
        return EXIT_CONFIG
    fit_hash = fit_doc["provenance"]["dataset_sha256"]
    if manifest.dataset_sha256 != fit_hash:
        print("error: fit and manifest reference different datasets", file=sys.stderr)
        return EXIT_HASH
    fit = _fit_from_json(fit_doc)
    report = evaluate_fit(fit, np.asarray(manifest.group_labels),
                          manifest.contaminated)
    doc = json.loads(report.to_json())
    doc["provenance"] = _provenance({"fit": str(args.fit)}, fit_hash,
                                    fit_doc["provenance"]["seed"])
    try:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps(doc, indent=2))
        if args.csv:
            _write_per_object_csv(args.csv, fit, manifest, report)
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"evaluation written to {out}")
    return EXIT_OK


def _write_per_object_csv(path, fit: FitResult, manifest: SimManifest,
                          report: EvalReport) -> None:
    u = fit.memberships.u
    hard = harden(u if fit.variant != "n" else
                  u[:, :-1] / np.maximum(u[:, :-1].sum(axis=1, keepdims=True), 1e-300))
    flagged = set(report.flagged)
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "true_label", "hard_label", "max_membership", "flagged"])
        for i in range(fit.n_series):
            writer.writerow([i, manifest.group_labels[i], int(hard[i]),
                             f"{u[i].max():.6f}", int(i in flagged)])


def cmd_analyze(args) -> int:
    try:
        fit_doc = json.loads(Path(args.fit).read_text())
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    fit = _fit_from_json(fit_doc)
    subs = fit.subspaces
    prefix = Path(args.out_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    extra_axes = []
    extra_names = []
    if fit.variant == "n" and args.data:
        dataset = read_csv_dir(Path(args.data))
        noise = noise_subspace(dataset, fit)
        extra_axes = [noise.axes[0]]
        extra_names = ["noise"]
    names = [f"cluster_{s}" for s in range(subs.n_clusters)] + extra_names
    all_axes = [subs.axes[s] for s in range(subs.n_clusters)] + extra_axes

    angle_path = Path(f"{prefix}_angles.csv")
    with angle_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["subspace_a", "subspace_b", "lag", "angle_index", "angle_rad"])
        for a in range(len(all_axes)):
            for b in range(a + 1, len(all_axes)):
                for lag_idx in range(subs.n_lags):
                    angles = principal_angles(all_axes[a][lag_idx], all_axes[b][lag_idx])
                    for j, angle in enumerate(angles):
                        writer.writerow([names[a], names[b], lag_idx + 1, j, f"{angle:.10f}"])

    p = all_axes[0][0].shape[0] // 2
    contrib_path = Path(f"{prefix}_contributions.csv")
    with contrib_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["subspace", "lag", "channel", "contribution"])
        for name, per_lag in zip(names, all_axes):
            for lag_idx, c in enumerate(per_lag):
                contrib = channel_contributions(c, p)
                for j, value in enumerate(contrib):
                    writer.writerow([name, lag_idx + 1, j + 1, f"{value:.10f}"])
    print(f"wrote {angle_path} and {contrib_path}")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    if args.experiment == "table1":
        kind, t_spec, rho = "burst", 400, 0.20
    elif args.experiment == "table4":
        kind, t_spec, rho = "eyeblink", (400, 2000), 0.40
    else:
        print(f"error: unknown experiment {args.experiment!r}", file=sys.stderr)
        return EXIT_CONFIG
    p_values = (32, 64, 128) if args.full else (32, 64)
    replications = 50 if args.full and args.replications is None else (args.replications or 10)
    out_dir = Path(args.out)

    def progress(p, rep_seed, rows):
        done = [f"{row['variant']}={row['out_recall']}" for row in rows]
        print(f"p={p} seed={rep_seed}: " + " ".join(done))

    rows, summary = run_benchmark(kind, p_values, t_spec, replications,
                                  seed=args.seed, rho=rho, progress=progress)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        write_rows_csv(rows, out_dir / f"{args.experiment}_replications.csv")
        write_rows_csv(summary, out_dir / f"{args.experiment}_summary.csv")
        meta = {
            "provenance": _provenance(
                {"experiment": args.experiment, "p_values": list(p_values),
                 "replications": replications, "v": BENCHMARK_V},
                None, args.seed),
        }
        (out_dir / f"{args.experiment}_meta.json").write_text(json.dumps(meta, indent=2))
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"summary written to {out_dir}")
    for s in summary:
        print({k: (round(v, 3) if isinstance(v, float) else v) for k, v in s.items()})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rfcpca",
                                     description="Robust fuzzy subspace clustering of multivariate time series")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate a synthetic benchmark dataset")
    p_sim.add_argument("--config", required=True, help="JSON config file")
    p_sim.add_argument("--out", required=True, help="output directory")

    p_fit = sub.add_parser("fit", help="fit a clustering model to a dataset directory")
    p_fit.add_argument("--data", required=True, help="directory of trial_*.csv files")
    p_fit.add_argument("--variant", choices=("fcpca", "e", "n", "t"), default="fcpca")
    p_fit.add_argument("-S", "--clusters", type=int, default=2,
                       help="substantive clusters (the noise variant adds one)")
    p_fit.add_argument("-m", type=float, default=2.0, help="fuzziness exponent")
    p_fit.add_argument("--v", type=float, default=0.95, help="variance fraction")
    p_fit.add_argument("--alpha", type=float, default=None, help="trimming proportion")
    p_fit.add_argument("--lambda", dest="lam", default=None,
                       help="noise multiplier or 'auto' for elbow selection")
    p_fit.add_argument("--auto", action="store_true",
                       help="grid-search m (and alpha) by the validity index")
    p_fit.add_argument("--max-lag", type=int, default=2)
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.add_argument("--out", required=True, help="output JSON path")

    p_eval = sub.add_parser("evaluate", help="score a fit against a manifest")
    p_eval.add_argument("--fit", required=True)
    p_eval.add_argument("--manifest", required=True)
    p_eval.add_argument("--out", required=True)
    p_eval.add_argument("--csv", default=None, help="optional per-object CSV path")

    p_an = sub.add_parser("analyze", help="principal angles and channel contributions")
    p_an.add_argument("--fit", required=True)
    p_an.add_argument("--data", default=None,
                      help="dataset directory (for the noise-variant noise subspace)")
    p_an.add_argument("--out-prefix", required=True)

    p_rep = sub.add_parser("reproduce", help="rerun a benchmark table at desk scale")
    p_rep.add_argument("experiment", choices=("table1", "table4"))
    p_rep.add_argument("-R", "--replications", type=int, default=None)
    p_rep.add_argument("--seed", type=int, default=1)
    p_rep.add_argument("--full", action="store_true",
                       help="full scale: p up to 128 and 50 replications")
    p_rep.add_argument("--out", required=True)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "simulate": cmd_simulate,
        "fit": cmd_fit,
        "evaluate": cmd_evaluate,
        "analyze": cmd_analyze,
        "reproduce": cmd_reproduce,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
