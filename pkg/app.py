"""
TGWV 伪装场景前景检测命令行入口

    python app.py detect --config det.cfg --frames seq/frames --out masks
    python app.py synth --scenario scene.cfg --out seq
    python app.py eval --masks masks --truth seq/truth --csv report.csv
    python app.py calibrate --config det.cfg --frame seq/frames/frame_000001.pgm
    python app.py benchmark --config det.cfg --scenario scene.cfg
"""
import argparse
import sys
from pathlib import Path
from typing import List, Optional

import pandas as pd

from config.logger import logger
from core.benchmark import run_benchmark
from core.evaluation import REPORT_HEADER, aggregate, format_report, reports_to_frame, score_directories
from core.exceptions import TgwvError
from core.frames import load_frame
from core.pipeline import effective_levels, process_sequence
from core.schemas import DetectorConfig, load_config, load_scenario
from core.swt import band_sigma, decompose, dump_pyramid
from core.synth import generate, write_sequence
from core.weights import estimate_noise_sigma, noise_weight, translation_table
from utils.image_io import ImageHandler


def _config(path: Optional[str]) -> DetectorConfig:
    return load_config(path) if path else DetectorConfig()


def cmd_detect(args: argparse.Namespace) -> int:
    config = _config(args.config)
    frames = ImageHandler.list_frames(args.frames)
    summary = process_sequence(
        config, frames, args.out,
        background=args.background, method=args.method,
        dump_votes=args.dump_votes, show_progress=args.progress,
        resume=args.resume, checkpoint=args.checkpoint,
    )
    print(f"{len(summary)} 帧 → {args.out}，前景像素总数 {int(summary['foreground_pixels'].sum())}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    frames, truths = generate(scenario)
    frame_dir, truth_dir = write_sequence(frames, truths, args.out)
    print(f"frames: {frame_dir}\ntruth: {truth_dir}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    reports = score_directories(args.masks, args.truth)
    summary = aggregate(reports)
    if args.csv:
        table = reports_to_frame(reports, summary)
        Path(args.csv).parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(args.csv, index=False)
        logger.info(f"CSV 已写出: {args.csv}")
    print(format_report(summary, method=Path(args.masks).name or "masks"))
    return 0


def cmd_calibrate(args: argparse.Namespace) -> int:
    config = _config(args.config)
    levels = config.levels
    frame = None
    if args.frame:
        frame = load_frame(args.frame)
        levels = effective_levels(config, frame.height, frame.width)

    table = translation_table(levels, config.ar_coefficient)
    print(pd.DataFrame({
        "level": list(table),
        "support": [(2 ** level) ** 2 for level in table],
        "omega_c": list(table.values()),
    }).to_string(index=False, float_format=lambda v: f"{v:.6f}"))

    if frame is not None:
        pyramid = decompose(frame, levels)
        if config.noise_sigma == "auto":
            sigma_noise = estimate_noise_sigma(pyramid)
        else:
            sigma_noise = float(config.noise_sigma)
        print(f"\nsigma_n = {sigma_noise:.6f} ({'auto' if config.noise_sigma == 'auto' else 'config'})")
        rows = []
        for (level, name), plane in pyramid.items():
            sigma_band = band_sigma(plane)
            rows.append({
                "band": f"{name}{level}",
                "sigma_s": sigma_band,
                "omega_n": noise_weight(sigma_band, sigma_noise),
            })
        print(pd.DataFrame(rows).to_string(index=False, float_format=lambda v: f"{v:.6f}"))
        if args.dump_pyramid:
            dump_pyramid(pyramid, args.dump_pyramid)
    return 0


def cmd_benchmark(args: argparse.Namespace) -> int:
    config = _config(args.config)
    scenario = load_scenario(args.scenario)
    result = run_benchmark(config, scenario)
    print(REPORT_HEADER)
    print(result.table())
    for name, outcome in result.outcomes.items():
        print(f"{name}: background_fp_rate={outcome.background_fp_rate:.4f}")
    return 0


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tgwv", description="伪装场景的纹理引导加权投票前景检测")
    sub = parser.add_subparsers(dest="command", required=True)

    detect = sub.add_parser("detect", help="对帧序列做前景检测")
    detect.add_argument("--config", help="检测器配置文件（key = value）")
    detect.add_argument("--frames", required=True, help="帧目录（PGM/PNG）")
    detect.add_argument("--out", required=True, help="掩码输出目录")
    detect.add_argument("--dump-votes", action="store_true", help="额外导出 V/V_max 图")
    detect.add_argument("--background", choices=["gmm", "static"], default="gmm")
    detect.add_argument("--method", choices=["tgwv", "gmm"], default="tgwv")
    detect.add_argument("--resume", help="从检测器检查点（.npz）接着处理，--frames 为后续帧")
    detect.add_argument("--checkpoint", help="处理完成后写出检测器检查点（.npz）")
    detect.add_argument("--progress", action="store_true", help="显示进度条")
    detect.set_defaults(handler=cmd_detect)

    synth = sub.add_parser("synth", help="生成合成伪装序列")
    synth.add_argument("--scenario", required=True)
    synth.add_argument("--out", required=True)
    synth.set_defaults(handler=cmd_synth)

    evaluate = sub.add_parser("eval", help="评测掩码目录")
    evaluate.add_argument("--masks", required=True)
    evaluate.add_argument("--truth", required=True)
    evaluate.add_argument("--csv", help="逐帧 CSV 输出路径")
    evaluate.set_defaults(handler=cmd_eval)

    calibrate = sub.add_parser("calibrate", help="打印权重表")
    calibrate.add_argument("--config")
    calibrate.add_argument("--frame", help="用于估计 σ_n 与 ω_n 的样本帧")
    calibrate.add_argument("--dump-pyramid", help="把样本帧的小波频带导出到该目录")
    calibrate.set_defaults(handler=cmd_calibrate)

    benchmark = sub.add_parser("benchmark", help="在合成场景上对比 TGWV 与强度 GMM")
    benchmark.add_argument("--config")
    benchmark.add_argument("--scenario", required=True)
    benchmark.set_defaults(handler=cmd_benchmark)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = create_parser().parse_args(argv)
    try:
        return args.handler(args)
    except TgwvError as e:
        logger.error(f"{args.command} 失败: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
