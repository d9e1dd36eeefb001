"""
BinoTherm Komut Satırı
gen → label → train → eval → bench hattı; tek konfigürasyon dosyası + bayraklar
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

from loguru import logger
from rich.console import Console
from rich.table import Table

sys.path.append(str(Path(__file__).parent.parent))

from baseline.label_generator import LabelGenerator, success_rate
from bench.throughput import run_bench
from config import Settings, load_settings, settings as defaults
from data.dataset_loader import LoaderTable
from data.manifest import DatasetManifest
from data.scene_generator import SceneGenerator
from errors import BinoThermError, MissingArtifactError
from evaluation.trend import Evaluator
from models.autodiff.checkpoint import load_checkpoint
from models.binocular.network import BinocularNet, build_binocular
from models.binocular.trainer import set_determinism, train

STAGES = ("gen", "label", "train", "eval", "bench")
EXIT_CODES = {"missing_artifact": 2, "config": 2}

console = Console()


# =============================================================================
# Aşamalar
# =============================================================================

def _stage_dir(out: Path, stage: str) -> Path:
    path = out / stage
    path.mkdir(parents=True, exist_ok=True)
    return path


def _require(path: Path, what: str) -> Path:
    if not path.exists():
        raise MissingArtifactError(f"{what} bulunamadı: {path}")
    return path


def _load_network(cfg: Settings, out: Path) -> BinocularNet:
    summary_path = _require(out / "train" / "train_summary.json", "eğitim özeti (önce `train` çalıştırın)")
    with open(summary_path, "r", encoding="utf-8") as f:
        summary = json.load(f)
    if not summary.get("final_checkpoint"):
        raise MissingArtifactError(f"{summary_path}: final_checkpoint kaydı yok")
    ckpt = _require(out / "train" / summary["final_checkpoint"], "kontrol noktası")
    net = build_binocular(cfg.binocular(), seed=cfg.SEED)
    load_checkpoint(net, ckpt)
    return net


def stage_gen(cfg: Settings, out: Path, args: argparse.Namespace) -> Dict[str, object]:
    stage = _stage_dir(out, "gen")
    generator = SceneGenerator(
        cfg=cfg.pyrometry(),
        ranges=cfg.scene_ranges(),
        mis_ranges=cfg.misalignment_ranges(),
        noise=cfg.noise(),
        channel_shape=cfg.channel_shape,
        sensor_shape=cfg.sensor_shape,
        track_length=cfg.SCENE_TRACK_LENGTH,
        pixel_pitch=cfg.PIXEL_PITCH,
    )
    manifest = generator.write_dataset(
        cfg.SCENE_FRAMES, stage, seed=cfg.SEED, split_ratio=cfg.SCENE_SPLIT_RATIO, threads=cfg.THREADS
    )
    return {
        "frames": len(manifest),
        "train": len(manifest.by_split("train")),
        "test": len(manifest.by_split("test")),
        "manifest": str(stage / "manifest.jsonl"),
    }


def stage_label(cfg: Settings, out: Path, args: argparse.Namespace) -> Dict[str, object]:
    source = _require(out / "gen" / "manifest.jsonl", "gen manifesti (önce `gen` çalıştırın)")
    stage = _stage_dir(out, "label")
    manifest = DatasetManifest.load(source)
    generator = LabelGenerator(cfg.pyrometry(), cfg.search_spec(), cfg.split_spec(), cfg.channel_shape)
    updated, report = generator.run(manifest, stage, threads=cfg.THREADS)
    return {
        "frames": len(updated),
        "success_rate": round(success_rate(report), 4),
        "labelled": sum(1 for r in updated if r.has_label),
        "manifest": str(stage / "manifest.jsonl"),
    }


def stage_train(cfg: Settings, out: Path, args: argparse.Namespace) -> Dict[str, object]:
    source = _require(out / "label" / "manifest.jsonl", "etiket manifesti (önce `label` çalıştırın)")
    stage = _stage_dir(out, "train")
    manifest = DatasetManifest.load(source)
    table = LoaderTable.from_manifest(manifest, cfg.channel_shape, cfg.pyrometry())
    if not table.ids("train"):
        raise MissingArtifactError(
            f"{source}: train bölmesinde label_status=success kaydı yok, eğitilecek etiket bulunamadı"
        )
    net = build_binocular(cfg.binocular(), seed=cfg.SEED)
    result = train(net, table, cfg.schedule(), seed=cfg.SEED, out_dir=stage, threads=cfg.THREADS)
    return {
        "train_frames": len(table.ids("train")),
        "epochs": len(result.loss_history),
        "final_loss": float(result.loss_history["mean_train_loss"].iloc[-1]),
        "checkpoint": str(result.final_checkpoint),
    }


def stage_eval(cfg: Settings, out: Path, args: argparse.Namespace) -> Dict[str, object]:
    source = _require(out / "label" / "manifest.jsonl", "etiket manifesti (önce `label` çalıştırın)")
    net = _load_network(cfg, out)
    stage = _stage_dir(out, "eval")
    manifest = DatasetManifest.load(source)
    evaluator = Evaluator(net, manifest, cfg.pyrometry(), cfg.channel_shape, cfg.EVAL_TAU, cfg.EVAL_BATCH_SIZE)
    summary = evaluator.run(stage, diff_samples=cfg.EVAL_DIFF_SAMPLES, previews=args.previews)
    return {key: summary[key] for key in
            ("frames", "r2_foreground", "r2_all_pixels", "mae_foreground_K", "pearson_mean_T")}


def stage_bench(cfg: Settings, out: Path, args: argparse.Namespace) -> Dict[str, object]:
    source = _require(out / "gen" / "manifest.jsonl", "gen manifesti (önce `gen` çalıştırın)")
    if args.random_init:
        net = build_binocular(cfg.binocular(), seed=cfg.SEED)
    else:
        net = _load_network(cfg, out)
    stage = _stage_dir(out, "bench")
    manifest = DatasetManifest.load(source)
    summary = run_bench(
        net, manifest, stage, cfg.bench_spec(), cfg.pyrometry(), cfg.search_spec(),
        cfg.split_spec(), cfg.channel_shape, random_init=args.random_init,
    )
    return {
        "best_fps": round(summary["best_fps"], 1),
        "best_batch_size": summary["best_batch_size"],
        "baseline_s_per_frame": round(summary["baseline_median_s_per_frame"], 4),
        "speedup_vs_baseline": round(summary["speedup_vs_baseline"], 1),
        "random_init": summary["random_init"],
    }


STAGE_FUNCS: Dict[str, Callable[[Settings, Path, argparse.Namespace], Dict[str, object]]] = {
    "gen": stage_gen,
    "label": stage_label,
    "train": stage_train,
    "eval": stage_eval,
    "bench": stage_bench,
}


# =============================================================================
# Argümanlar
# =============================================================================

def _batch_sizes(text: str) -> List[int]:
    try:
        values = [int(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"virgülle ayrılmış tamsayılar bekleniyordu: {text}")
    if not values:
        raise argparse.ArgumentTypeError("en az bir grup boyutu gerekli")
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None,
                        help="KEY=value konfigürasyon dosyası (varsayılan: yerleşik değerler)")
    common.add_argument("--out", type=Path, default=Path("runs"), help="çıktı kök dizini (varsayılan: %(default)s)")
    common.add_argument("--seed", type=int, default=None, help=f"ana tohum (varsayılan: {defaults.SEED})")
    common.add_argument("--threads", type=int, default=None,
                        help=f"süreç/iş parçacığı sayısı, 1 = tam determinizm (varsayılan: {defaults.THREADS})")
    common.add_argument("--log-level", default="INFO", help="stderr günlük seviyesi (varsayılan: %(default)s)")

    gen = argparse.ArgumentParser(add_help=False)
    gen.add_argument("--frames", type=int, default=None,
                     help=f"üretilecek kare sayısı (varsayılan: {defaults.SCENE_FRAMES})")

    ev = argparse.ArgumentParser(add_help=False)
    ev.add_argument("--tau", type=float, default=None,
                    help=f"eriyik havuzu bölge eşiği, T_max oranı (varsayılan: {defaults.EVAL_TAU})")
    ev.add_argument("--previews", action="store_true", help="fark haritaları için PNG önizleme yaz (varsayılan: kapalı)")

    bench = argparse.ArgumentParser(add_help=False)
    bench.add_argument("--batch-sizes", type=_batch_sizes, default=None,
                       help=f"virgülle ayrılmış grup boyutları (varsayılan: {','.join(map(str, defaults.BENCH_BATCH_SIZES))})")
    bench.add_argument("--random-init", action="store_true",
                       help="kontrol noktası yerine rastgele başlatılmış ağ kullan (varsayılan: kapalı)")

    parser = argparse.ArgumentParser(
        prog="binotherm",
        description="İki dalga boylu eriyik havuzu pirometrisi: sentetik veri, temel yöntem, Binocular ağı",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("gen", parents=[common, gen], help="sentetik veri seti üret")
    sub.add_parser("label", parents=[common], help="kayıt tabanlı temel yöntem etiketleri")
    sub.add_parser("train", parents=[common], help="Binocular ağını eğit")
    sub.add_parser("eval", parents=[common, ev], help="test bölmesinde değerlendir")
    sub.add_parser("bench", parents=[common, bench], help="verim kıyaslaması")
    sub.add_parser("all", parents=[common, gen, ev, bench], help="tüm hattı sırayla çalıştır")
    return parser


def _settings_from_args(args: argparse.Namespace) -> Settings:
    overrides = {
        "SEED": args.seed,
        "THREADS": args.threads,
        "SCENE_FRAMES": getattr(args, "frames", None),
        "EVAL_TAU": getattr(args, "tau", None),
        "BENCH_BATCH_SIZES": getattr(args, "batch_sizes", None),
    }
    return load_settings(args.config, **overrides)


def _print_summary(stage: str, summary: Dict[str, object]) -> None:
    table = Table(title=f"binotherm {stage}")
    table.add_column("Anahtar", style="cyan")
    table.add_column("Değer", style="green")
    for key, value in summary.items():
        table.add_row(key, f"{value:.6g}" if isinstance(value, float) else str(value))
    console.print(table)


def _run_stage(stage: str, cfg: Settings, out: Path, args: argparse.Namespace, level: str) -> None:
    stage_dir = _stage_dir(out, stage)
    cfg.dump_env(stage_dir / "config.env")
    sink = logger.add(stage_dir / "run.log", level=level, mode="w", encoding="utf-8")
    try:
        logger.info(f"Aşama başlıyor: {stage}")
        summary = STAGE_FUNCS[stage](cfg, out, args)
        logger.info(f"Aşama bitti: {stage}")
    finally:
        logger.remove(sink)
    _print_summary(stage, summary)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "previews"):
        args.previews = False
    if not hasattr(args, "random_init"):
        args.random_init = False

    level = args.log_level.upper()
    logger.remove()
    logger.add(sys.stderr, level=level)

    try:
        cfg = _settings_from_args(args)
        set_determinism(cfg.THREADS)
        out = Path(args.out)
        stages = STAGES if args.command == "all" else (args.command,)
        for stage in stages:
            _run_stage(stage, cfg, out, args, level)
    except BinoThermError as e:
        message = str(e).replace("\n", " ")
        print(f"error: {e.kind}: {message}", file=sys.stderr)
        return EXIT_CODES.get(e.kind, 1)
    except Exception as e:  # noqa: BLE001
        message = str(e).replace("\n", " ")
        print(f"error: unexpected: {type(e).__name__}: {message}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
