"""Command-line entry point: ``smalltarget <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import pipeline
from .core import DataError, PipelineConfig, SortParams
from .synth import ScenarioError

EXIT_USAGE = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON file with PipelineConfig fields")
    p.add_argument("--upsample-factor", type=int, choices=(1, 2, 4))
    p.add_argument("--patch-size", type=int)
    p.add_argument("--center-size", type=int)
    p.add_argument("--top-fraction", type=float)
    p.add_argument("--dilation-side", type=int)
    p.add_argument("--top-n", type=int, dest="top_n_targets")
    p.add_argument("--workers", type=int, default=None, help=f"worker threads (default ${pipeline.WORKERS_ENV} or 1)")


def _add_sort_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--iou-min", type=float)
    p.add_argument("--max-age", type=int)
    p.add_argument("--min-hits", type=int)
    p.add_argument("--no-warmup", action="store_true", help="never report tracks before min_hits updates")


def _config(args) -> PipelineConfig:
    cfg = PipelineConfig()
    if getattr(args, "config", None):
        cfg = PipelineConfig.from_dict(json.loads(args.config.read_text()))
    overrides = {}
    for name in ("upsample_factor", "patch_size", "center_size", "top_fraction", "dilation_side", "top_n_targets"):
        v = getattr(args, name, None)
        if v is not None:
            overrides[name] = v
    if overrides:
        cfg = replace(cfg, **overrides)
    return cfg


def _sort_params(args, base: SortParams | None = None) -> SortParams:
    sp = base or SortParams()
    overrides = {k: getattr(args, k) for k in ("iou_min", "max_age", "min_hits") if getattr(args, k, None) is not None}
    if getattr(args, "no_warmup", False):
        overrides["warmup"] = False
    return replace(sp, **overrides) if overrides else sp


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="smalltarget", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("detect", help="LIG + CC detection over a PGM frame directory")
    p.add_argument("video_dir", type=Path)
    p.add_argument("-o", "--out", type=Path, required=True, help="detections CSV")
    _add_config_flags(p)

    p = sub.add_parser("track", help="SORT association of a detections CSV")
    p.add_argument("detections", type=Path)
    p.add_argument("-o", "--out", type=Path, required=True, help="tracks CSV")
    p.add_argument("--frames", type=int, help="number of frames in the video (default: from the manifest)")
    _add_sort_flags(p)

    p = sub.add_parser("eval", help="precision / recall / F1 against ground truth")
    p.add_argument("results", type=Path, help="detections or tracks CSV")
    p.add_argument("gt", type=Path)
    p.add_argument("--tp-distance", type=float, default=10.0, help="at original scale")
    p.add_argument("--upsample-factor", type=int, choices=(1, 2, 4), default=1)
    p.add_argument("-o", "--out", type=Path, help="metrics JSON (default: stdout only)")

    p = sub.add_parser("bench", help="time detection at several worker counts")
    p.add_argument("video_dir", type=Path)
    p.add_argument("--worker-counts", type=int, nargs="+", default=[1, 2, 4])
    p.add_argument("-o", "--out", type=Path)
    _add_config_flags(p)

    p = sub.add_parser("synth", help="generate a synthetic sequence from a scenario JSON")
    p.add_argument("scenario", type=Path)
    p.add_argument("out_dir", type=Path)

    p = sub.add_parser("render", help="burn track boxes into copies of the frames")
    p.add_argument("video_dir", type=Path)
    p.add_argument("tracks", type=Path)
    p.add_argument("out_dir", type=Path)

    p = sub.add_parser("upsample", help="bicubic upsampling of a frame directory")
    p.add_argument("video_dir", type=Path)
    p.add_argument("out_dir", type=Path)
    p.add_argument("--factor", type=int, choices=(2, 4), default=2)
    return parser


def run(args) -> int:
    cmd = args.command
    if cmd == "detect":
        cfg = _config(args)
        m = pipeline.detect(args.video_dir, cfg, args.out, args.workers)
        print(f"{sum(m.detections_per_frame)} detections in {len(m.detections_per_frame)} frames -> {args.out}")
    elif cmd == "track":
        rows = pipeline.track(args.detections, _sort_params(args), args.out, args.frames)
        print(f"{len(rows)} track rows -> {args.out}")
    elif cmd == "eval":
        report = pipeline.eval_files(args.results, args.gt, args.tp_distance, args.upsample_factor, args.out)
        print(json.dumps(report.to_dict(), sort_keys=True))
    elif cmd == "bench":
        if len(args.worker_counts) < 2:
            raise ValueError("bench needs at least two worker counts")
        report = pipeline.bench(args.video_dir, _config(args), args.worker_counts)
        text = json.dumps(report, indent=2, sort_keys=True)
        if args.out:
            args.out.write_text(text + "\n")
        print(text)
    elif cmd == "synth":
        seq = pipeline.synth(args.scenario, args.out_dir)
        print(f"{len(seq.frames)} frames, {len(seq.specks)} specks -> {args.out_dir}")
    elif cmd == "render":
        n = pipeline.render(args.video_dir, args.tracks, args.out_dir)
        print(f"{n} boxes drawn -> {args.out_dir}")
    elif cmd == "upsample":
        n = pipeline.upsample_dir(args.video_dir, args.factor, args.out_dir)
        print(f"{n} frames upsampled x{args.factor} -> {args.out_dir}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return run(args)
    except (DataError, ScenarioError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
