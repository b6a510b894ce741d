"""Command-line front-end.

Subcommands: chunk, detect-music, diarize, score wer, score der, repair,
windows, cluster. All reports are JSON on stdout (or --out); per-file work
runs in a thread pool but outputs are always ordered by sorted input path,
so results are deterministic regardless of worker count.

Exit codes: 0 success, 1 input error, 2 config error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .audio import MusicDetectConfig, Waveform, highpass, music_presence, peak_normalize, resample, split_on_silence
from .chunking import ChunkConfig, ChunkPlan, chunk_to_samples, plan_chunks
from .clustering import (
    ClusterResult,
    ahc_centroid,
    estimate_k_silhouette,
    gmm_fit,
    kmeans,
    pca_fit,
    pca_transform,
    select_k_gmm,
    smooth_labels_temporal,
)
from .errors import ConfigError, PipelineError
from .interchange import read_embeddings_file, window_schedule
from .metrics import der, merge_der_reports, merge_wer_reports, wer
from .repair import parse_segments_csv, repair_rows, rows_to_csv, write_segments_csv
from .timeline import SpeakerTimeline, merge_adjacent_windows, parse_rttm, suppress_gaps, write_rttm
from .wavefile import load_mono, write_wav

WORKERS_ENV = "SPEECHPIPE_WORKERS"
_INPUT_ERRORS = (PipelineError, OSError, UnicodeDecodeError)


# ---------------------------------------------------------------------------
# Configuration

@dataclass
class SilenceConfig:
    top_db: float = 25.0
    frame_length: int = 2048
    hop_length: int = 512


@dataclass
class PreprocessConfig:
    target_sample_rate: int = 16000
    highpass_hz: float = 60.0       # 0 disables
    peak_target: float = 0.98       # 0 disables
    detect_music: bool = False


@dataclass
class ClusteringConfig:
    method: str = "ahc"             # ahc | gmm | kmeans
    tau: float = 0.65
    min_cluster_size: int = 20
    pca_components: int = 0         # 0 disables
    k_min: int = 2
    k_max: int = 10
    fixed_k: int = 0                # 0 selects k automatically
    criterion: str = "AIC"
    smoothing_window: int = 1       # 1 disables
    # The over-clustering recipe is method=gmm, fixed_k=25, smoothing_window=5.


@dataclass
class DiarizationConfig:
    min_duration_off: float = 0.1


@dataclass
class MetricsConfig:
    collar: float = 0.0
    skip_overlap: bool = False


@dataclass
class PipelineConfig:
    chunking: ChunkConfig = field(default_factory=ChunkConfig)
    silence: SilenceConfig = field(default_factory=SilenceConfig)
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    clustering: ClusteringConfig = field(default_factory=ClusteringConfig)
    diarization: DiarizationConfig = field(default_factory=DiarizationConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)
    music: MusicDetectConfig = field(default_factory=MusicDetectConfig)

    def to_dict(self) -> dict:
        return asdict(self)


def _build_section(cls, doc: dict, section: str):
    known = {f.name for f in fields(cls)}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown keys in config section {section!r}: {sorted(unknown)}")
    try:
        return cls(**doc)
    except (TypeError, PipelineError) as exc:
        raise ConfigError(f"invalid config section {section!r}: {exc}") from None


def load_pipeline_config(path: str | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config file must contain a JSON object")
    sections = {f.name: f.default_factory for f in fields(PipelineConfig)}  # type: ignore[misc]
    unknown = set(doc) - set(sections)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    kwargs = {}
    section_types = {
        "chunking": ChunkConfig,
        "silence": SilenceConfig,
        "preprocess": PreprocessConfig,
        "clustering": ClusteringConfig,
        "diarization": DiarizationConfig,
        "metrics": MetricsConfig,
        "music": MusicDetectConfig,
    }
    for name, value in doc.items():
        if not isinstance(value, dict):
            raise ConfigError(f"config section {name!r} must be an object")
        kwargs[name] = _build_section(section_types[name], value, name)
    return PipelineConfig(**kwargs)


def _apply_overrides(config: PipelineConfig, args: argparse.Namespace) -> None:
    """Flag values override config-file values when the flag was given."""
    overrides = {
        "top_db": (config.silence, "top_db"),
        "min_dur": (config.chunking, "min_dur"),
        "max_dur": (config.chunking, "max_dur"),
        "method": (config.clustering, "method"),
        "tau": (config.clustering, "tau"),
        "min_cluster_size": (config.clustering, "min_cluster_size"),
        "pca_components": (config.clustering, "pca_components"),
        "fixed_k": (config.clustering, "fixed_k"),
        "k_min": (config.clustering, "k_min"),
        "k_max": (config.clustering, "k_max"),
        "criterion": (config.clustering, "criterion"),
        "smoothing_window": (config.clustering, "smoothing_window"),
        "min_duration_off": (config.diarization, "min_duration_off"),
        "collar": (config.metrics, "collar"),
        "skip_overlap": (config.metrics, "skip_overlap"),
        "threshold": (config.music, "decision_threshold"),
    }
    for flag, (target, attr) in overrides.items():
        value = getattr(args, flag, None)
        if value is not None and value is not False:
            setattr(target, attr, value)
    if getattr(args, "min_dur", None) is not None or getattr(args, "max_dur", None) is not None:
        ChunkConfig(config.chunking.min_dur, config.chunking.max_dur)  # re-validate


# ---------------------------------------------------------------------------
# Helpers

def _worker_count(args: argparse.Namespace) -> int:
    if getattr(args, "workers", None):
        return max(1, args.workers)
    env = os.environ.get(WORKERS_ENV)
    if env and env.isdigit() and int(env) > 0:
        return int(env)
    return min(4, os.cpu_count() or 1)


def _map_files(paths: list[str], fn, workers: int) -> tuple[dict, dict]:
    """Run fn over files in a pool; results keyed by path, errors collected."""
    results: dict[str, object] = {}
    errors: dict[str, str] = {}
    if workers <= 1 or len(paths) <= 1:
        for path in paths:
            try:
                results[path] = fn(path)
            except _INPUT_ERRORS as exc:
                errors[path] = str(exc)
        return results, errors
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(fn, path): path for path in paths}
        for future in as_completed(futures):
            path = futures[future]
            try:
                results[path] = future.result()
            except _INPUT_ERRORS as exc:
                errors[path] = str(exc)
    return results, errors


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=2, ensure_ascii=False) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _preprocess(w: Waveform, cfg: PreprocessConfig) -> Waveform:
    if cfg.target_sample_rate and w.sample_rate != cfg.target_sample_rate:
        w = resample(w, cfg.target_sample_rate)
    if cfg.highpass_hz:
        w = highpass(w, cfg.highpass_hz)
    if cfg.peak_target:
        w = peak_normalize(w, cfg.peak_target)
    return w


def _speaker_name(label: int) -> str:
    return f"SPK_{label:02d}"


def _cluster_embeddings(vectors: np.ndarray, cfg: ClusteringConfig, seed: int) -> ClusterResult:
    x = np.asarray(vectors, dtype=np.float64)
    n = len(x)
    method = cfg.method.lower()
    if method == "ahc":
        return ahc_centroid(x, cfg.tau, cfg.min_cluster_size)

    if cfg.pca_components and n >= 2:
        components = min(cfg.pca_components, n, x.shape[1])
        basis = pca_fit(x, components)
        x = pca_transform(basis, x)

    if method == "gmm":
        if cfg.fixed_k:
            model = gmm_fit(x, min(cfg.fixed_k, n), seed)
            k = model.k
        else:
            k_max = min(cfg.k_max, n)
            k_min = min(cfg.k_min, k_max)
            k, model = select_k_gmm(x, (k_min, k_max), cfg.criterion, seed)
        labels = model.predict(x)
        labels = np.asarray(smooth_labels_temporal(list(labels), cfg.smoothing_window))
        kept = {lab: i for i, lab in enumerate(dict.fromkeys(labels.tolist()))}
        labels = np.array([kept[lab] for lab in labels.tolist()])
        centroids = np.stack([x[labels == j].mean(axis=0) for j in range(len(kept))])
        return ClusterResult(
            labels, len(kept), centroids, "gmm",
            {"criterion": cfg.criterion, "log_likelihood": model.log_likelihood,
             "aic": model.aic(), "bic": model.bic(n), "fitted_k": k, "seed": seed},
        )

    if method == "kmeans":
        if cfg.fixed_k:
            k = min(cfg.fixed_k, n)
        elif n <= 2:
            k = 1  # silhouette needs k_max <= N-1 with k >= 2
        else:
            k_max = min(cfg.k_max, n - 1)
            k_min = min(max(2, cfg.k_min), k_max)
            k = estimate_k_silhouette(x, k_min, k_max, seed)
        result = kmeans(x, k, seed)
        labels = np.asarray(smooth_labels_temporal(list(result.labels), cfg.smoothing_window))
        kept = {lab: i for i, lab in enumerate(dict.fromkeys(labels.tolist()))}
        labels = np.array([kept[lab] for lab in labels.tolist()])
        centroids = np.stack([x[labels == j].mean(axis=0) for j in range(len(kept))])
        diagnostics = dict(result.diagnostics)
        diagnostics["estimated_k"] = k
        return ClusterResult(labels, len(kept), centroids, "kmeans", diagnostics)

    raise ConfigError(f"unknown clustering method {cfg.method!r}")


# ---------------------------------------------------------------------------
# Subcommands

def cmd_chunk(args: argparse.Namespace, config: PipelineConfig) -> int:
    paths = sorted(args.paths)

    def work(path: str):
        w = _preprocess(load_mono(path), config.preprocess)
        spans = split_on_silence(
            w, config.silence.top_db, config.silence.frame_length, config.silence.hop_length
        )
        plan = plan_chunks(spans, w.duration_seconds, config.chunking)
        presence = music_presence(w, config.music) if config.preprocess.detect_music else None
        return w, plan, presence

    results, errors = _map_files(paths, work, _worker_count(args))

    files = []
    for path in paths:
        if path in errors:
            continue
        w, plan, presence = results[path]
        rid = Path(path).stem
        entry = {"path": path, **plan.to_dict(rid, config.chunking)}
        if presence is not None:
            entry["music"] = {"score": presence.score, "is_music": presence.is_music}
        files.append(entry)
        if args.write_chunks:
            os.makedirs(args.write_chunks, exist_ok=True)
            for i, piece in enumerate(chunk_to_samples(plan, w)):
                write_wav(os.path.join(args.write_chunks, f"{rid}_chunk{i:03d}.wav"), piece)
        _log(f"chunk: {path}: {len(plan.chunks)} chunks, {plan.forced_split_count} forced")

    report = {"command": "chunk", "config": config.to_dict(), "files": files}
    if errors:
        report["errors"] = {p: errors[p] for p in sorted(errors)}
    _emit(report, args.out)
    return 1 if errors else 0


def cmd_detect_music(args: argparse.Namespace, config: PipelineConfig) -> int:
    paths = sorted(args.paths)

    def work(path: str):
        return music_presence(load_mono(path), config.music)

    results, errors = _map_files(paths, work, _worker_count(args))
    files = []
    for path in paths:
        if path in errors:
            continue
        presence = results[path]
        files.append(
            {
                "path": path,
                "score": presence.score,
                "is_music": presence.is_music,
                "low_confidence": presence.low_confidence,
            }
        )
        _log(f"detect-music: {path}: score={presence.score:.3f} is_music={presence.is_music}")
    report = {"command": "detect-music", "config": asdict(config.music), "files": files}
    if errors:
        report["errors"] = {p: errors[p] for p in sorted(errors)}
    _emit(report, args.out)
    return 1 if errors else 0


def cmd_diarize(args: argparse.Namespace, config: PipelineConfig) -> int:
    paths = sorted(args.paths)
    out_dir = args.out_dir or "."
    os.makedirs(out_dir, exist_ok=True)

    def work(path: str):
        emb = read_embeddings_file(path)
        rid = emb.recording_id or Path(path).stem
        if len(emb) == 0:
            return rid, SpeakerTimeline(rid, []), 0
        result = _cluster_embeddings(emb.vectors, config.clustering, args.seed)
        names = [_speaker_name(int(lab)) for lab in result.labels]
        timeline = merge_adjacent_windows(emb.spans, names, rid)
        timeline = suppress_gaps(timeline, config.diarization.min_duration_off)
        return rid, timeline, result.k

    results, errors = _map_files(paths, work, _worker_count(args))
    files = []
    for path in paths:
        if path in errors:
            continue
        rid, timeline, k = results[path]
        csv_path = os.path.join(out_dir, f"{rid}.csv")
        rttm_path = os.path.join(out_dir, f"{rid}.rttm")
        Path(csv_path).write_text(write_segments_csv([timeline]), encoding="utf-8")
        Path(rttm_path).write_text(write_rttm([timeline]), encoding="utf-8")
        files.append(
            {
                "path": path,
                "recording_id": rid,
                "speakers": k,
                "segments": len(timeline.segments),
                "csv": csv_path,
                "rttm": rttm_path,
            }
        )
        _log(f"diarize: {path}: {k} speakers, {len(timeline.segments)} segments")
    report = {
        "command": "diarize",
        "seed": args.seed,
        "config": config.to_dict(),
        "files": files,
    }
    if errors:
        report["errors"] = {p: errors[p] for p in sorted(errors)}
    _emit(report, args.out)
    return 1 if errors else 0


def _read_transcript_docs(path: str) -> dict[str, str]:
    from .interchange import read_transcripts_jsonl

    if path.endswith(".jsonl"):
        records = read_transcripts_jsonl(Path(path).read_text(encoding="utf-8"))
        docs: dict[str, list[str]] = {}
        for record in records:
            docs.setdefault(record.recording_id, []).append(record.text)
        return {rid: " ".join(texts) for rid, texts in docs.items()}
    return {Path(path).stem: Path(path).read_text(encoding="utf-8")}


def _read_timelines(path: str, repair: bool) -> dict[str, SpeakerTimeline]:
    text = Path(path).read_text(encoding="utf-8")
    if path.endswith(".rttm"):
        timelines = parse_rttm(text)
    else:
        timelines, _ = parse_segments_csv(text, strict=not repair)
    return {t.recording_id: t for t in timelines}


def cmd_score(args: argparse.Namespace, config: PipelineConfig) -> int:
    try:
        if args.metric == "wer":
            refs = _read_transcript_docs(args.ref)
            hyps = _read_transcript_docs(args.hyp)
            extra = set(hyps) - set(refs)
            if extra:
                raise PipelineError(f"hypothesis ids with no reference: {sorted(extra)}")
            per_file = {}
            reports = []
            for rid in sorted(refs):
                report = wer(refs[rid], hyps.get(rid, ""), args.strip_punctuation)
                per_file[rid] = report.to_dict()
                reports.append(report)
            micro = merge_wer_reports(reports)
            macro = float(np.mean([r.wer for r in reports]))
            doc = {
                "command": "score-wer",
                "files": per_file,
                "micro": micro.to_dict(),
                "macro_wer": macro,
            }
        else:
            refs = _read_timelines(args.ref, args.repair)
            hyps = _read_timelines(args.hyp, args.repair)
            extra = set(hyps) - set(refs)
            if extra:
                raise PipelineError(f"hypothesis ids with no reference: {sorted(extra)}")
            per_file = {}
            reports = []
            for rid in sorted(refs):
                hyp_timeline = hyps.get(rid, SpeakerTimeline(rid, []))
                report = der(
                    refs[rid], hyp_timeline,
                    collar=config.metrics.collar,
                    skip_overlap=config.metrics.skip_overlap,
                )
                per_file[rid] = report.to_dict()
                reports.append(report)
            micro = merge_der_reports(reports)
            macro = float(np.mean([r.der for r in reports]))
            doc = {
                "command": "score-der",
                "config": asdict(config.metrics),
                "files": per_file,
                "micro": micro.to_dict(),
                "macro_der": macro,
            }
    except _INPUT_ERRORS as exc:
        _log(f"score: error: {exc}")
        return 1
    _emit(doc, args.out)
    return 0


def cmd_repair(args: argparse.Namespace, config: PipelineConfig) -> int:
    try:
        text = Path(args.path).read_text(encoding="utf-8")
        outcomes, report = repair_rows(text, strict=args.strict)
    except _INPUT_ERRORS as exc:
        _log(f"repair: error: {exc}")
        return 1
    if args.strict:
        bad = [o for o in outcomes if o.status == "dropped"]
        for outcome in bad:
            _log(f"repair: {args.path}:{outcome.line_no}: {outcome.diagnosis}")
        doc = {"command": "repair", "strict": True, "report": report.to_dict()}
        _emit(doc, args.report)
        return 1 if bad else 0
    csv_text = rows_to_csv(outcomes)
    if args.out:
        Path(args.out).write_text(csv_text, encoding="utf-8")
    else:
        sys.stdout.write(csv_text)
    doc = {"command": "repair", "strict": False, "report": report.to_dict()}
    if args.report:
        _emit(doc, args.report)
    else:
        _log(json.dumps(doc["report"], ensure_ascii=False))
    return 0


def cmd_windows(args: argparse.Namespace, config: PipelineConfig) -> int:
    try:
        if args.path.endswith(".json"):
            doc = json.loads(Path(args.path).read_text(encoding="utf-8"))
            plan = ChunkPlan.from_dict(doc if "chunks" in doc else doc["files"][0])
            spans = plan.chunks
        else:
            w = _preprocess(load_mono(args.path), config.preprocess)
            spans = split_on_silence(
                w, config.silence.top_db, config.silence.frame_length, config.silence.hop_length
            )
        schedule = window_schedule(spans, args.window, args.hop)
    except _INPUT_ERRORS + (KeyError, json.JSONDecodeError) as exc:
        _log(f"windows: error: {exc}")
        return 1
    report = {
        "command": "windows",
        "window": args.window,
        "hop": args.hop,
        "windows": [
            {"start": sw.span.start, "end": sw.span.end, "short": sw.short}
            for sw in schedule
        ],
    }
    _emit(report, args.out)
    return 0


def cmd_cluster(args: argparse.Namespace, config: PipelineConfig) -> int:
    paths = sorted(args.paths)

    def work(path: str):
        emb = read_embeddings_file(path)
        if len(emb) == 0:
            return emb.recording_id, None
        return emb.recording_id, _cluster_embeddings(emb.vectors, config.clustering, args.seed)

    results, errors = _map_files(paths, work, _worker_count(args))
    files = []
    for path in paths:
        if path in errors:
            continue
        rid, result = results[path]
        entry = {"path": path, "recording_id": rid}
        entry.update(result.to_dict() if result else {"k": 0, "labels": []})
        files.append(entry)
        _log(f"cluster: {path}: k={entry['k']}")
    report = {
        "command": "cluster",
        "seed": args.seed,
        "config": asdict(config.clustering),
        "files": files,
    }
    if errors:
        report["errors"] = {p: errors[p] for p in sorted(errors)}
    _emit(report, args.out)
    return 1 if errors else 0


# ---------------------------------------------------------------------------
# Parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="speechpipe",
        description="Deterministic long-form speech pipeline tools",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="pipeline config JSON")
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.add_argument("--workers", type=int, help=f"worker threads (or ${WORKERS_ENV})")

    p = sub.add_parser("chunk", help="plan silence-aware chunks for WAV files")
    p.add_argument("paths", nargs="+")
    p.add_argument("--top-db", dest="top_db", type=float)
    p.add_argument("--min-dur", dest="min_dur", type=float)
    p.add_argument("--max-dur", dest="max_dur", type=float)
    p.add_argument("--write-chunks", help="directory for per-chunk WAVs")
    common(p)
    p.set_defaults(fn=cmd_chunk)

    p = sub.add_parser("detect-music", help="spectral-flux music presence per file")
    p.add_argument("paths", nargs="+")
    p.add_argument("--threshold", type=float, help="override the decision threshold")
    common(p)
    p.set_defaults(fn=cmd_detect_music)

    p = sub.add_parser("diarize", help="cluster embedding containers into speaker timelines")
    p.add_argument("paths", nargs="+")
    p.add_argument("--out-dir", help="directory for CSV/RTTM outputs (default .)")
    p.add_argument("--method", choices=["ahc", "gmm", "kmeans"])
    p.add_argument("--tau", type=float)
    p.add_argument("--min-cluster-size", dest="min_cluster_size", type=int)
    p.add_argument("--pca-components", dest="pca_components", type=int)
    p.add_argument("--fixed-k", dest="fixed_k", type=int)
    p.add_argument("--k-min", dest="k_min", type=int)
    p.add_argument("--k-max", dest="k_max", type=int)
    p.add_argument("--criterion", choices=["AIC", "BIC"])
    p.add_argument("--smoothing-window", dest="smoothing_window", type=int)
    p.add_argument("--min-duration-off", dest="min_duration_off", type=float)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(fn=cmd_diarize)

    p = sub.add_parser("score", help="score WER or DER against references")
    score_sub = p.add_subparsers(dest="metric", required=True)
    for metric in ("wer", "der"):
        sp = score_sub.add_parser(metric)
        sp.add_argument("--ref", required=True)
        sp.add_argument("--hyp", required=True)
        sp.add_argument("--repair", action="store_true", help="repair CSV inputs instead of strict parsing")
        if metric == "wer":
            sp.add_argument("--strip-punctuation", dest="strip_punctuation", action="store_true")
        if metric == "der":
            sp.add_argument("--collar", type=float)
            sp.add_argument("--skip-overlap", dest="skip_overlap", action="store_true", default=None)
        common(sp)
        sp.set_defaults(fn=cmd_score, metric=metric)

    p = sub.add_parser("repair", help="repair a segments CSV")
    p.add_argument("path")
    p.add_argument("--strict", action="store_true", help="validate only; list malformed rows")
    p.add_argument("--out", help="write the repaired CSV here instead of stdout")
    p.add_argument("--report", help="write the repair report JSON here")
    p.add_argument("--config")
    p.set_defaults(fn=cmd_repair)

    p = sub.add_parser("windows", help="sliding-window schedule from a plan JSON or WAV")
    p.add_argument("path")
    p.add_argument("--window", type=float, default=1.5)
    p.add_argument("--hop", type=float, default=0.75)
    common(p)
    p.set_defaults(fn=cmd_windows)

    p = sub.add_parser("cluster", help="cluster embedding containers, report labels")
    p.add_argument("paths", nargs="+")
    p.add_argument("--method", choices=["ahc", "gmm", "kmeans"])
    p.add_argument("--tau", type=float)
    p.add_argument("--min-cluster-size", dest="min_cluster_size", type=int)
    p.add_argument("--pca-components", dest="pca_components", type=int)
    p.add_argument("--fixed-k", dest="fixed_k", type=int)
    p.add_argument("--k-min", dest="k_min", type=int)
    p.add_argument("--k-max", dest="k_max", type=int)
    p.add_argument("--criterion", choices=["AIC", "BIC"])
    p.add_argument("--smoothing-window", dest="smoothing_window", type=int)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(fn=cmd_cluster)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_pipeline_config(getattr(args, "config", None))
        _apply_overrides(config, args)
    except ConfigError as exc:
        _log(f"config error: {exc}")
        return 2
    try:
        return args.fn(args, config)
    except ConfigError as exc:
        _log(f"config error: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
