"""Command-line interface.

Exit status: 0 on success, 1 on runtime or data errors, 2 on usage errors.
Logs go to stderr; results go to ``--out`` (``-`` means stdout).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import __version__, baselines, dataio, evaluation
from .bow import BowConfig, build_histogram, fit_codebook
from .errors import InvalidInputError
from .metrics import parse_distance
from .signal import downsample, resize_linear

log = logging.getLogger("bowts")

THREADS_ENV = "BOWTS_THREADS"


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _csv_list(cast):
    def parse(text: str):
        try:
            return [cast(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"cannot parse list {text!r}") from None

    return parse


def _window_list(text: str) -> list:
    """``16,32,48`` or ``start:stop:step`` (stop inclusive)."""
    if ":" in text:
        try:
            start, stop, step = (int(v) for v in text.split(":"))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad range {text!r}; use start:stop:step") from None
        return list(range(start, stop + 1, step))
    return _csv_list(int)(text)


def _add_data(p):
    p.add_argument("--data", required=True, help="class-directory tree or delimited table")
    p.add_argument("--format", choices=["dir", "table"], default=None,
                   help="input layout (default: inferred from the path)")


def _add_bow(p):
    g = p.add_argument_group("bag-of-words")
    g.add_argument("--window", type=int, default=128, help="segment length in samples (default: 128)")
    g.add_argument("--stride", type=int, default=2, help="window step in samples (default: 2)")
    g.add_argument("--k", type=int, default=1000, help="codebook size (default: 1000)")
    g.add_argument("--wavelet", choices=["db1", "db2", "db3"], default="db3",
                   help="segment feature wavelet (default: db3)")
    g.add_argument("--max-train-segments", type=int, default=100_000,
                   help="cap on segments used for k-means (default: 100000)")
    g.add_argument("--max-iter", type=int, default=100, help="k-means iteration cap (default: 100)")


def _add_seed(p):
    p.add_argument("--seed", type=int, default=0, help="random seed (default: 0)")


def _add_eval(p):
    g = p.add_argument_group("evaluation")
    g.add_argument("--distance", default="chi2",
                   help="euclidean | chi2 | js | intersection (default: chi2)")
    g.add_argument("--folds", type=int, default=10, help="cross-validation folds (default: 10)")
    g.add_argument("--codebook-scope", choices=["fold", "global"], default="fold",
                   help="train the codebook per fold or once on all series (default: fold)")
    g.add_argument("--histograms", choices=["auto", "raw", "normalized"], default="auto",
                   help="histogram convention (default: auto = normalized only for js/intersection)")
    g.add_argument("--threads", type=int, default=_default_threads(),
                   help=f"parallel folds (default: ${THREADS_ENV} or 1)")


def _add_out(p, required=False, help="output path, '-' for stdout (default: -)"):
    p.add_argument("--out", required=required, default=None if required else "-", help=help)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bowts", description="Bag-of-words time-series classification toolkit."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging")
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("gen-data", help="write a synthetic motif corpus", formatter_class=fmt)
    _add_out(p, required=True, help="output directory (dir layout) or file (table layout)")
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--per-class", type=int, default=100)
    p.add_argument("--length", type=int, default=1024, help="minimum series length")
    p.add_argument("--length-max", type=int, default=None, help="maximum length (default: --length)")
    p.add_argument("--noise", type=float, default=0.1, help="Gaussian noise sigma")
    p.add_argument("--gap-max", type=int, default=32, help="largest silent gap between motifs")
    p.add_argument("--layout", choices=["dir", "table"], default="dir")
    _add_seed(p)

    p = sub.add_parser("train-codebook", help="learn a codebook from a dataset", formatter_class=fmt)
    _add_data(p)
    _add_bow(p)
    _add_seed(p)
    _add_out(p, required=True, help="codebook file to write")

    p = sub.add_parser("transform", help="histogram every series with a codebook", formatter_class=fmt)
    _add_data(p)
    p.add_argument("--codebook", required=True, help="codebook file from train-codebook")
    _add_out(p)

    p = sub.add_parser("evaluate", help="cross-validated 1-NN accuracy", formatter_class=fmt)
    _add_data(p)
    _add_bow(p)
    _add_eval(p)
    _add_seed(p)
    _add_out(p)
    p.add_argument("--json", default=None, help="also write the full report (confusion matrix) as JSON")

    p = sub.add_parser("sweep", help="accuracy along one parameter axis", formatter_class=fmt)
    _add_data(p)
    p.add_argument("--axis", required=True, choices=list(evaluation.SWEEP_AXES))
    p.add_argument("--values", required=True, help="comma-separated values for the axis")
    _add_bow(p)
    _add_eval(p)
    _add_seed(p)
    _add_out(p)

    p = sub.add_parser("noise", help="accuracy under additive white Gaussian noise", formatter_class=fmt)
    _add_data(p)
    p.add_argument("--snr", default="10,8,6,4,2,0", help="comma-separated SNR values in dB")
    _add_bow(p)
    _add_eval(p)
    _add_seed(p)
    _add_out(p)

    p = sub.add_parser("baseline", help="DWT / DFT / DTW / BoP comparison methods", formatter_class=fmt)
    _add_data(p)
    p.add_argument("--method", required=True, choices=["dwt", "dft", "dtw", "bop"])
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--distance", default="euclidean", help="distance for dwt/dft/bop features")
    p.add_argument("--resize", type=int, default=None,
                   help="common length for dwt/dft (default: longest series, only if lengths differ)")
    p.add_argument("--dft-coeffs", type=int, default=None, help="DFT magnitudes kept (default: all)")
    p.add_argument("--dwt-wavelet", choices=["db1", "db2", "db3"], default="db2")
    p.add_argument("--dwt-levels", type=int, default=4)
    p.add_argument("--dtw-len", type=int, default=820, help="downsampled length for DTW")
    p.add_argument("--bop-windows", type=_window_list, default=_window_list("16:320:16"),
                   help="BoP window lengths, list or start:stop:step")
    p.add_argument("--alphabet", type=int, default=4)
    p.add_argument("--word", type=int, default=6)
    p.add_argument("--bop-stride", type=int, default=1)
    p.add_argument("--numerosity-reduction", action="store_true")
    _add_seed(p)
    _add_out(p)
    return parser


def _bow_config(args) -> BowConfig:
    return BowConfig(
        window_len=args.window,
        stride=args.stride,
        codebook_size=args.k,
        wavelet=args.wavelet,
        max_train_segments=args.max_train_segments,
        max_iter=args.max_iter,
        seed=args.seed,
    )


def _normalize_flag(args):
    return {"auto": None, "raw": False, "normalized": True}[args.histograms]


def _load(args):
    log.info("loading %s", args.data)
    ds = dataio.load_dataset(args.data, args.format)
    log.info("%d series, %d classes", len(ds), len(ds.classes))
    return ds


def cmd_gen_data(args) -> None:
    spec = dataio.SyntheticSpec(
        n_classes=args.classes,
        series_per_class=args.per_class,
        length_min=args.length,
        length_max=args.length_max or args.length,
        noise_sigma=args.noise,
        gap_max=args.gap_max,
        seed=args.seed,
    )
    ds = dataio.gen_synthetic(spec)
    dataio.save_dataset(ds, args.out, args.layout)
    log.info("wrote %d series to %s", len(ds), args.out)


def cmd_train_codebook(args) -> None:
    ds = _load(args)
    cfg = _bow_config(args)
    cb = fit_codebook(ds.series, cfg)
    dataio.save_codebook(cb, args.out)
    log.info("codebook K=%d d=%d, %d iterations, objective %.6g",
             cb.size, cb.dim, cb.stats.iterations, cb.stats.objective)


def cmd_transform(args) -> None:
    ds = _load(args)
    cb = dataio.load_codebook(args.codebook)
    if cb.config is None:
        raise InvalidInputError(f"{args.codebook}: codebook has no pipeline config")
    hists = [build_histogram(cb, s) for s in ds.series]
    header = ["id", "label", "total", *[f"c{j}" for j in range(cb.size)]]
    rows = [[s.id, s.label, h.total, *h.counts.tolist()] for s, h in zip(ds.series, hists)]
    dataio.write_csv(args.out, header, rows, config={"codebook": str(args.codebook), "bow": cb.config.to_dict()})


def cmd_evaluate(args) -> None:
    ds = _load(args)
    report = evaluation.run_experiment(
        ds, _bow_config(args), args.distance, args.folds, args.seed,
        codebook_scope=args.codebook_scope, normalize=_normalize_flag(args), threads=args.threads,
    )
    log.info("timings: %s", report.timings)
    dataio.write_csv(args.out, ["fold", "n_test", "correct", "accuracy"], report.fold_rows(),
                     config={**report.config, "data": str(args.data), "flags": report.flags})
    if args.json:
        dataio.save_report_json(report, args.json)


def _run_sweep(args, axis: str, values: list) -> None:
    ds = _load(args)
    if args.histograms != "auto":
        log.warning("--histograms is ignored by sweeps; the per-distance default applies")
    result = evaluation.sweep(
        ds, axis, values, _bow_config(args), args.seed, distance=args.distance,
        k_folds=args.folds, threads=args.threads, codebook_scope=args.codebook_scope,
    )
    rows = [[v, f"{a:.6f}", "ok"] for v, a in zip(result.values, result.accuracies)]
    rows += [[v, "", f"skipped: {why}"] for v, why in result.skipped]
    dataio.write_csv(args.out, [axis, "mean_accuracy", "status"], rows,
                     config={**result.config, "data": str(args.data)})


def cmd_sweep(args) -> None:
    cast = str if args.axis == "distance" else (float if args.axis == "snr_db" else int)
    try:
        values = _csv_list(cast)(args.values)
    except argparse.ArgumentTypeError as exc:
        raise InvalidInputError(str(exc)) from None
    _run_sweep(args, args.axis, values)


def cmd_noise(args) -> None:
    try:
        values = _csv_list(float)(args.snr)
    except argparse.ArgumentTypeError as exc:
        raise InvalidInputError(str(exc)) from None
    _run_sweep(args, "snr_db", values)


def cmd_baseline(args) -> None:
    ds = _load(args)
    labels = ds.labels
    split = evaluation.kfold_split(len(ds), labels, args.folds, args.seed)
    arrays = [s.values for s in ds.series]
    config = {"method": args.method, "data": str(args.data), "seed": args.seed}

    if args.method in ("dwt", "dft"):
        lengths = {a.size for a in arrays}
        target = args.resize or (max(lengths) if len(lengths) > 1 else None)
        if target:
            arrays = [resize_linear(a, target) for a in arrays]
            config["resized_to"] = target
        if args.method == "dwt":
            X = [baselines.dwt_features(a, args.dwt_wavelet, args.dwt_levels) for a in arrays]
            config.update(wavelet=args.dwt_wavelet, levels=args.dwt_levels)
        else:
            X = [baselines.dft_features(a, args.dft_coeffs) for a in arrays]
            config["dft_coeffs"] = args.dft_coeffs or "all"
        report = evaluation.cross_validate_representation(
            np.vstack(X), labels, split, parse_distance(args.distance), ds.classes, config
        )
        dataio.write_csv(args.out, ["fold", "n_test", "correct", "accuracy"], report.fold_rows(),
                         config=report.config)
        return

    if args.method == "dtw":
        reduced = [downsample(a, min(args.dtw_len, a.size)) for a in arrays]
        config["dtw_len"] = args.dtw_len
        D = baselines.dtw_matrix(reduced)
        report = evaluation.cross_validate_distances(D, labels, split, ds.classes, config)
        dataio.write_csv(args.out, ["fold", "n_test", "correct", "accuracy"], report.fold_rows(),
                         config=report.config)
        return

    kind = parse_distance(args.distance)
    rows, best = [], None
    for w in args.bop_windows:
        try:
            cfg = baselines.SaxConfig(args.alphabet, args.word, w, args.numerosity_reduction)
            H = np.vstack([baselines.bop_histogram(a, cfg, args.bop_stride).counts for a in arrays])
        except InvalidInputError as exc:
            log.warning("skipping BoP window %d: %s", w, exc)
            rows.append([w, "", f"skipped: {exc}"])
            continue
        acc = evaluation.cross_validate_representation(H, labels, split, kind, ds.classes).mean_accuracy
        rows.append([w, f"{acc:.6f}", "ok"])
        if best is None or acc > best[1]:
            best = (w, acc)
    if best is not None:
        rows.append([f"best={best[0]}", f"{best[1]:.6f}", "ok"])
    config.update(alphabet=args.alphabet, word=args.word, stride=args.bop_stride,
                  numerosity_reduction=args.numerosity_reduction, distance=kind.value,
                  k_folds=args.folds)
    dataio.write_csv(args.out, ["bop_window_len", "mean_accuracy", "status"], rows, config=config)


COMMANDS = {
    "gen-data": cmd_gen_data,
    "train-codebook": cmd_train_codebook,
    "transform": cmd_transform,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "noise": cmd_noise,
    "baseline": cmd_baseline,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        COMMANDS[args.command](args)
    except (InvalidInputError, OSError) as exc:
        log.error("%s", exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
