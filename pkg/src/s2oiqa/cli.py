"""Command-line interface: feature extraction, training, scoring, the
evaluation protocol, and the FR baselines."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import fusion_eval, sphere
from .errors import (ConvergenceError, CorruptFile, DecodeError, DegenerateInput,
                     InvalidArgument, MissingFeature, S2Error, SchemaError,
                     ShapeError, UnsupportedFormat)
from .formats import (KIND_STATISTIC, load_manifest, read_feature_file,
                      read_model_file, write_feature_file, write_model_file)
from .pipeline import extract_stat_features
from .raster import load_image, psnr
from .regress import grid_search, scale_fit_transform, svr_predict, svr_train
from .semfeat import load_semantic_features

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


def _fmt_db(v: float) -> str:
    return "inf" if v == float("inf") else f"{v:.4f}"


def cmd_extract_stat(args) -> int:
    omni = load_image(args.image)
    feats = extract_stat_features(omni, args.viewports)
    write_feature_file(args.out, KIND_STATISTIC, feats,
                       source_tag=f"stat-vp{args.viewports}")
    print(f"wrote {args.out} (dim {len(feats)})")
    return EXIT_OK


def _manifest_features(manifest, path_kind: str, viewports: int):
    mos = np.array([e.mos for e in manifest.entries])
    if path_kind == "st":
        x = np.stack([extract_stat_features(load_image(manifest.resolve(e.image_path)),
                                            viewports)
                      for e in manifest.entries])
    else:
        rows = []
        for e in manifest.entries:
            if e.semantic_feature_path is None:
                raise MissingFeature(f"{e.image_path}: manifest has no semantic feature file")
            rows.append(load_semantic_features(manifest.resolve(e.semantic_feature_path)).fc1)
        x = np.stack(rows)
    return x, mos


def cmd_train(args) -> int:
    manifest = load_manifest(args.manifest)
    if len(manifest.entries) < 5:
        raise InvalidArgument("manifest too small to train (need >= 5 entries)")
    x, y = _manifest_features(manifest, args.path, args.viewports)
    xs, params = scale_fit_transform(x)
    c, gamma, eps = grid_search(xs, y, seed=args.seed)
    model = svr_train(xs, y, c, gamma, eps, seed=args.seed, scaling=params)
    write_model_file(args.out, model)
    print(f"wrote {args.out} (c={c}, gamma={gamma}, epsilon={eps}, "
          f"n_sv={len(model.dual_coeffs)})")
    return EXIT_OK


def cmd_score(args) -> int:
    omni = load_image(args.image)
    q_st = q_se = 0.0
    if args.w > 0.0:
        if args.model_st is None:
            raise InvalidArgument("--model-st required when w > 0")
        model_st = read_model_file(args.model_st)
        feats = extract_stat_features(omni, args.viewports)
        q_st = float(svr_predict(model_st, feats)[0])
    if args.w < 1.0:
        if args.model_se is None or args.fc1 is None:
            raise InvalidArgument("--model-se and --fc1 required when w < 1")
        model_se = read_model_file(args.model_se)
        fc1 = load_semantic_features(args.fc1).fc1
        q_se = float(svr_predict(model_se, fc1)[0])
    q = fusion_eval.fuse(q_st, q_se, args.w)
    print(f"q_st {q.q_st:.4f}")
    print(f"q_se {q.q_se:.4f}")
    print(f"q_overall {q.q_overall:.4f}")
    return EXIT_OK


def _report_text(reports: dict) -> str:
    lines = ["S2REPORT 1"]
    for name, r in reports.items():
        lines.append(f"variant={name}\tsrocc={r.srocc:.6f}\tplcc={r.plcc:.6f}"
                     f"\trmse={r.rmse:.6f}\tn_splits={r.n_splits}"
                     f"\taggregation={r.aggregation}\tsplit_mode={r.split_mode}"
                     "\tlogistic=" + ",".join(f"{b:.6g}" for b in r.logistic_params))
    lines.append("")
    lines.append(fusion_eval.format_report_table(reports))
    return "\n".join(lines) + "\n"


def cmd_evaluate(args) -> int:
    manifest = load_manifest(args.manifest)
    config = fusion_eval.PipelineConfig(n_viewports=args.viewports,
                                        content_split=not args.image_split)
    variants = args.variants.split(",") if args.variants else ["All"]
    reports = fusion_eval.run_ablation(manifest, config, variants,
                                       n_repeats=args.repeats, seed=args.seed)
    text = _report_text(reports)
    if args.report:
        Path(args.report).write_text(text)
    if args.csv:
        rows = ["variant,seed,srocc,plcc,rmse"]
        for name, r in reports.items():
            for (sd, s, p, e) in r.per_repeat:
                rows.append(f"{name},{sd},{s:.6f},{p:.6f},{e:.6f}")
        Path(args.csv).write_text("\n".join(rows) + "\n")
    sys.stdout.write(text)
    return EXIT_OK


def cmd_baselines(args) -> int:
    ref = load_image(args.ref)
    dist = load_image(args.dist)
    print(f"PSNR {_fmt_db(psnr(ref, dist))}")
    print(f"S-PSNR {_fmt_db(sphere.s_psnr(ref, dist))}")
    print(f"WS-PSNR {_fmt_db(sphere.ws_psnr(ref, dist))}")
    print(f"CPP-PSNR {_fmt_db(sphere.cpp_psnr(ref, dist))}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="s2oiqa",
                                description="Blind omnidirectional image quality assessment")
    sub = p.add_subparsers(dest="command", required=True)

    ext = sub.add_parser("extract-stat", help="extract the 249-dim statistic feature vector")
    ext.add_argument("image")
    ext.add_argument("--viewports", type=int, choices=(6, 20, 80), default=6)
    ext.add_argument("--out", required=True)
    ext.set_defaults(func=cmd_extract_stat)

    tr = sub.add_parser("train", help="grid-search and train one SVR path")
    tr.add_argument("manifest")
    tr.add_argument("--path", choices=("st", "se"), required=True)
    tr.add_argument("--out", required=True)
    tr.add_argument("--viewports", type=int, choices=(6, 20, 80), default=6)
    tr.add_argument("--seed", type=int, default=0)
    tr.set_defaults(func=cmd_train)

    sc = sub.add_parser("score", help="score one image")
    sc.add_argument("image")
    sc.add_argument("--model-st")
    sc.add_argument("--model-se")
    sc.add_argument("--fc1", help="semantic FC1 feature file for the image")
    sc.add_argument("--w", type=float, required=True)
    sc.add_argument("--viewports", type=int, choices=(6, 20, 80), default=6)
    sc.set_defaults(func=cmd_score)

    ev = sub.add_parser("evaluate", help="run the repeated-split protocol")
    ev.add_argument("manifest")
    ev.add_argument("--repeats", type=int, default=100)
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--report", help="write report file")
    ev.add_argument("--csv", help="write per-repeat CSV")
    ev.add_argument("--variants", help="comma-separated variant list (default All)")
    ev.add_argument("--viewports", type=int, choices=(6, 20, 80), default=6)
    ev.add_argument("--image-split", action="store_true",
                    help="split by image instead of by source content")
    ev.set_defaults(func=cmd_evaluate)

    bl = sub.add_parser("baselines", help="print PSNR, S-PSNR, WS-PSNR, CPP-PSNR")
    bl.add_argument("ref")
    bl.add_argument("dist")
    bl.set_defaults(func=cmd_baselines)
    return p


def main(argv=None) -> int:
    threads = os.environ.get("S2OIQA_THREADS")
    if threads:
        os.environ.setdefault("NUMBA_NUM_THREADS", threads)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    try:
        if args.command == "score" and not (0.0 <= args.w <= 1.0):
            raise InvalidArgument(f"--w must lie in [0, 1], got {args.w}")
        return args.func(args)
    except (InvalidArgument,) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as e:
        print(f"error: missing file: {e.filename}", file=sys.stderr)
        return EXIT_DATA
    except (SchemaError, CorruptFile, DecodeError, UnsupportedFormat,
            MissingFeature, ShapeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except (ConvergenceError, DegenerateInput) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except S2Error as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
