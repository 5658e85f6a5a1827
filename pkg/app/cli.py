"""Command-line front end: ``python -m app <command> ...``.

Exit codes: 0 success, 1 internal error, 2 usage or input error.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

from app import config
from app.exceptions import InputError, ValueRangeError
from app.models.imaging import MaskMap
from app.schemas.schemas import FlowParams, Layout, Method
from app.utils import io_utils
from app.utils.bench_utils import BenchOptions, run_benchmark
from app.utils.dataset_utils import attach_saliency, save_manifest, scan_dataset, subsample
from app.utils.flow_utils import estimate_bidirectional, estimate_flow, scale_flow
from app.utils.fusion_utils import attention_fuse, interpolate_detailed, oracle_mask
from app.utils.metrics_utils import evaluate_sample
from app.utils.report_utils import format_metric, render_csv, render_markdown
from app.utils.saliency_utils import binarize, load_saliency, spectral_saliency
from app.utils.warp_utils import DEFAULT_COVERAGE_THRESHOLD, backward_warp, forward_warp

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE = 0, 1, 2
FLOW_FLAGS = ("pyramid_levels", "downscale_factor", "smoothness_alpha", "iterations_per_level")


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value file with defaults for any flag")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    return common


def _flow_parser() -> argparse.ArgumentParser:
    defaults = FlowParams()
    flow = argparse.ArgumentParser(add_help=False)
    group = flow.add_argument_group("flow estimation")
    group.add_argument("--pyramid-levels", type=int, default=defaults.pyramid_levels)
    group.add_argument("--downscale-factor", type=float, default=defaults.downscale_factor)
    group.add_argument("--smoothness-alpha", type=float, default=defaults.smoothness_alpha,
                       help="regularization weight on the 0-255 luma scale")
    group.add_argument("--iterations-per-level", type=int, default=defaults.iterations_per_level)
    return flow


def build_parser() -> argparse.ArgumentParser:
    common, flow = _common_parser(), _flow_parser()
    parser = argparse.ArgumentParser(prog="vfi-lab", description="Flow-based frame interpolation lab")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("flow", parents=[common, flow], help="estimate optical flow between two frames")
    p.add_argument("frame_a")
    p.add_argument("frame_b")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--bidirectional", action="store_true", help="write .fwd.flo and .bwd.flo")
    p.set_defaults(handler=cmd_flow)

    p = commands.add_parser("warp", parents=[common], help="warp a frame along a .flo flow")
    p.add_argument("source")
    p.add_argument("flow")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--t", type=float, default=1.0, help="fraction of the flow to apply")
    p.add_argument("--holes", help="write the hole mask here (forward warp only)")
    p.add_argument("--backward", action="store_true", help="sample instead of splat")
    p.add_argument("--coverage-threshold", type=float, default=DEFAULT_COVERAGE_THRESHOLD)
    p.set_defaults(handler=cmd_warp)

    p = commands.add_parser("interpolate", parents=[common, flow], help="synthesize the frame between two inputs")
    p.add_argument("first")
    p.add_argument("last")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--flow-fwd", help="precomputed F13 (.flo)")
    p.add_argument("--flow-bwd", help="precomputed F31 (.flo)")
    p.add_argument("--coverage-threshold", type=float, default=DEFAULT_COVERAGE_THRESHOLD)
    p.add_argument("--dump-candidates", action="store_true",
                   help="also write both candidates, both hole masks, the joint holes and the contribution mask")
    p.set_defaults(handler=cmd_interpolate)

    p = commands.add_parser("fuse", parents=[common], help="blend two frames with an attention mask")
    p.add_argument("in1")
    p.add_argument("in2")
    p.add_argument("-o", "--output", required=True)
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--mask", help="gray PNG, weight toward in1 = byte / 255")
    source.add_argument("--weight", type=float, help="constant weight toward in1")
    source.add_argument("--oracle-gt", help="derive the least-squares optimal mask from this ground truth")
    p.add_argument("--mask-out", help="write the mask that was used")
    p.set_defaults(handler=cmd_fuse)

    p = commands.add_parser("saliency", parents=[common], help="spectral-residual foreground mask")
    p.add_argument("frame")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--binarize", action="store_true", help="threshold at 0.5")
    p.set_defaults(handler=cmd_saliency)

    p = commands.add_parser("eval", parents=[common], help="quality metrics for one prediction")
    p.add_argument("pred")
    p.add_argument("gt")
    saliency = p.add_mutually_exclusive_group()
    saliency.add_argument("--saliency", help="foreground map (gray PNG); default: spectral saliency of gt")
    saliency.add_argument("--no-saliency", action="store_true", help="whole-frame metrics only")
    p.add_argument("--binarize", action="store_true", help="threshold the saliency map at 0.5")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=cmd_eval)

    p = commands.add_parser("bench", parents=[common, flow], help="benchmark a triplet dataset")
    p.add_argument("dataset_root")
    p.add_argument("--layout", choices=[l.value for l in Layout], default=Layout.flat.value)
    p.add_argument("--list-file", help="vimeo-style clip list (<seq>/<clip> per line)")
    p.add_argument("--limit", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--saliency-dir", help="precomputed foreground maps named <id>.png")
    p.add_argument("--binarize-saliency", action="store_true")
    p.add_argument("--method", choices=[m.value for m in Method], default=Method.fusion.value)
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--report", choices=["csv", "md"], default="csv")
    p.add_argument("--out", help="report directory (required)")
    p.add_argument("--workers", type=int, default=config.DEFAULT_WORKERS)
    p.add_argument("--quiet", action="store_true", help="no progress bar")
    p.set_defaults(handler=cmd_bench)
    return parser


def _flow_params(args: argparse.Namespace) -> FlowParams:
    try:
        return FlowParams(**{name: getattr(args, name) for name in FLOW_FLAGS})
    except ValueError as e:
        raise ValueRangeError(f"invalid flow parameters: {e}") from e


def _with_suffix(path: str, suffix: str) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}.{suffix}{path.suffix}")


def cmd_flow(args: argparse.Namespace) -> int:
    a, b = io_utils.load_frame(args.frame_a), io_utils.load_frame(args.frame_b)
    params = _flow_params(args)
    if args.bidirectional:
        forward, backward = estimate_bidirectional(a, b, params)
        io_utils.save_flo(forward, _with_suffix(args.output, "fwd"))
        io_utils.save_flo(backward, _with_suffix(args.output, "bwd"))
    else:
        io_utils.save_flo(estimate_flow(a, b, params), args.output)
    logger.info("flow written output=%s bidirectional=%s", args.output, args.bidirectional)
    return EXIT_OK


def cmd_warp(args: argparse.Namespace) -> int:
    src = io_utils.load_frame(args.source)
    flow = scale_flow(io_utils.load_flo(args.flow), args.t)
    if args.backward:
        io_utils.save_frame(backward_warp(src, flow), args.output)
        return EXIT_OK
    warped, holes = forward_warp(src, flow, args.coverage_threshold)
    io_utils.save_frame(warped, args.output)
    if args.holes:
        io_utils.save_holes(holes, args.holes)
    logger.info("warp written output=%s holes=%d", args.output, holes.count)
    return EXIT_OK


def cmd_interpolate(args: argparse.Namespace) -> int:
    first, last = io_utils.load_frame(args.first), io_utils.load_frame(args.last)
    if bool(args.flow_fwd) != bool(args.flow_bwd):
        raise InputError("--flow-fwd and --flow-bwd must be given together")
    flows = (io_utils.load_flo(args.flow_fwd), io_utils.load_flo(args.flow_bwd)) if args.flow_fwd else None
    result = interpolate_detailed(first, last, args.t, _flow_params(args), flows, args.coverage_threshold)
    io_utils.save_frame(result.frame, args.output)
    if args.dump_candidates:
        io_utils.save_frame(result.I1t, _with_suffix(args.output, "I1t"))
        io_utils.save_frame(result.I3t, _with_suffix(args.output, "I3t"))
        io_utils.save_holes(result.H1t, _with_suffix(args.output, "H1t"))
        io_utils.save_holes(result.H3t, _with_suffix(args.output, "H3t"))
        io_utils.save_holes(result.joint_holes, _with_suffix(args.output, "joint"))
        io_utils.save_mask(result.contribution, _with_suffix(args.output, "mask"))
    logger.info("interpolated output=%s t=%.3f joint_holes=%d", args.output, args.t, result.joint_holes.count)
    return EXIT_OK


def cmd_fuse(args: argparse.Namespace) -> int:
    in1, in2 = io_utils.load_frame(args.in1), io_utils.load_frame(args.in2)
    if args.mask:
        mask = io_utils.load_mask(args.mask)
    elif args.oracle_gt:
        mask = oracle_mask(in1, in2, io_utils.load_frame(args.oracle_gt))
    else:
        if not 0.0 <= args.weight <= 1.0:
            raise ValueRangeError(f"--weight must lie in [0, 1], got {args.weight}")
        mask = MaskMap.constant(in1.width, in1.height, args.weight)
    io_utils.save_frame(attention_fuse(in1, in2, mask), args.output)
    if args.mask_out:
        io_utils.save_mask(mask, args.mask_out)
    return EXIT_OK


def cmd_saliency(args: argparse.Namespace) -> int:
    mask = spectral_saliency(io_utils.load_frame(args.frame))
    io_utils.save_mask(binarize(mask) if args.binarize else mask, args.output)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    pred, gt = io_utils.load_frame(args.pred), io_utils.load_frame(args.gt)
    mask = None
    if not args.no_saliency:
        mask = load_saliency(args.saliency, gt.size) if args.saliency else spectral_saliency(gt)
        if args.binarize:
            mask = binarize(mask)
    record = evaluate_sample(pred, gt, mask, sample_id=Path(args.pred).stem)
    if args.json:
        print(json.dumps(record.to_json_dict()))
    else:
        for column, value in record.columns().items():
            print(f"{column}: {'null' if value is None else format_metric(column, value)}")
    return EXIT_OK


def _run_config(args: argparse.Namespace) -> Dict[str, object]:
    skip = {"handler", "config", "command", "verbose", "quiet"}
    return {key: value for key, value in vars(args).items() if key not in skip}


def cmd_bench(args: argparse.Namespace) -> int:
    if not args.out:
        raise InputError("bench needs --out (flag or config file)")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = scan_dataset(args.dataset_root, args.layout, args.list_file)
    if args.limit is not None:
        manifest = subsample(manifest, args.limit, args.seed)
    if args.saliency_dir:
        manifest = attach_saliency(manifest, args.saliency_dir)
    options = BenchOptions(
        method=Method(args.method), params=_flow_params(args), t=args.t,
        binarize_saliency=args.binarize_saliency, workers=args.workers, progress=not args.quiet,
        seed=args.seed if args.limit is not None else None, limit=args.limit,
    )
    if not 0.0 < options.t < 1.0:
        raise ValueRangeError(f"--t must lie in (0, 1), got {options.t}")
    result = run_benchmark(manifest, options)

    (out / "results.csv").write_text(render_csv(result.records, result.summary.metrics))
    if args.report == "md":
        title = f"{Path(args.dataset_root).name} ({args.layout})"
        (out / "report.md").write_text(render_markdown(result.summary, title))
    (out / "summary.json").write_text(result.summary.model_dump_json(indent=2) + "\n")
    save_manifest(manifest, out / "manifest.json")
    config.write_config_file(out / "config.env", _run_config(args))
    logger.info("bench report written out=%s", out)
    return EXIT_OK


def _subparser(parser: argparse.ArgumentParser, command: str) -> argparse.ArgumentParser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def _apply_config_file(parser: argparse.ArgumentParser, argv: List[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    values = config.read_config_file(args.config)
    subparser = _subparser(parser, args.command)
    defaults = {}
    for action in subparser._actions:
        if action.dest not in values or action.dest in ("help", "config"):
            continue
        raw = values.pop(action.dest)
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            defaults[action.dest] = raw.strip().lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            try:
                defaults[action.dest] = action.type(raw)
            except ValueError:
                raise InputError(f"config {args.config}: bad value for {action.dest}: {raw!r}")
        else:
            defaults[action.dest] = raw
    for key in values:
        logger.warning("config key ignored key=%s", key)
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _apply_config_file(parser, argv)
        config.setup_logging("DEBUG" if args.verbose else None)
        return args.handler(args)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    except (InputError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        logger.exception("internal error")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
