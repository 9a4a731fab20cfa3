"""Command-line interface.

Subcommands mirror the pipeline stages: synth-corpus, train, mix,
detect, features, assign, eval-assignment, eval-sid. Every stochastic
step takes an explicit --seed. Evaluation subcommands write CSV + text
reports and, unless --no-figures, PNG figures next to them.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import sys
from pathlib import Path

from . import harness
from .assignment import build_score_table, exhaustive_pair_search
from .audio import CANONICAL_RATE, load_wav, save_wav
from .detection import DetectionConfig, extract_usable_segments
from .features import FeatureConfig, segment_features, waveform_features
from .figures import render_report_figures
from .mixer import MixtureSpec, mix_at_tir, write_sidecar
from .synth import load_manifest, synth_corpus
from .wavelet import daubechies4, dump_filters


def _add_detection_flags(parser):
    parser.add_argument("--amp-threshold", type=float, default=None)
    parser.add_argument("--lag-threshold", type=int, default=None)
    parser.add_argument("--j-max", type=int, default=None)
    parser.add_argument("--min-segment-frames", type=int, default=None)
    parser.add_argument("--frame-len", type=int, default=None)
    parser.add_argument("--hop", type=int, default=None)


def _detection_config(args, base: DetectionConfig | None = None) -> DetectionConfig:
    config = base or DetectionConfig()
    overrides = {
        "amp_threshold": args.amp_threshold,
        "lag_threshold": args.lag_threshold,
        "j_max": args.j_max,
        "min_segment_frames": args.min_segment_frames,
        "frame_len": args.frame_len,
        "hop": args.hop,
    }
    return dataclasses.replace(
        config, **{k: v for k, v in overrides.items() if v is not None}
    )


def _experiment_config(args) -> harness.ExperimentConfig:
    config = harness.load_config(args.config) if args.config else harness.ExperimentConfig()
    if getattr(args, "corpus", None):
        config.corpus_root = args.corpus
    if args.seed is not None:
        config.seed = args.seed
    if getattr(args, "tir_grid", None):
        config.tir_grid = tuple(float(v) for v in args.tir_grid.split(","))
    config.detection = _detection_config(args, config.detection)
    return config


def cmd_synth_corpus(args) -> int:
    manifest = synth_corpus(
        args.out,
        seed=args.seed,
        n_speakers=args.speakers,
        files_per_speaker=args.files_per_speaker,
        duration_s=args.duration,
        train_files=args.train_files,
    )
    print(f"wrote corpus manifest {manifest}")
    return 0


def cmd_train(args) -> int:
    config = _experiment_config(args)
    corpus = load_manifest(config.corpus_root)
    speakers = harness.train_speaker_models(corpus, config)
    paths = harness.save_speaker_models(speakers, args.models)
    for path in paths:
        print(f"wrote {path}")
    return 0


def cmd_mix(args) -> int:
    target = load_wav(args.target, expect_rate=CANONICAL_RATE)
    interferer = load_wav(args.interferer, expect_rate=CANONICAL_RATE)
    truth = mix_at_tir(
        MixtureSpec(
            target, interferer, args.tir, seed=args.seed or 0,
            target_id=Path(args.target).stem, interferer_id=Path(args.interferer).stem,
        )
    )
    clipped = save_wav(truth.mixture, args.out)
    write_sidecar(truth, args.tir, str(args.out) + ".meta")
    if clipped:
        print(f"warning: {clipped} samples clipped at save time", file=sys.stderr)
    print(f"wrote {args.out} (gain {truth.gain_applied:.6g}, "
          f"joint norm {truth.joint_norm_factor:.6g})")
    return 0


def cmd_detect(args) -> int:
    wav = load_wav(args.wav, expect_rate=CANONICAL_RATE)
    config = _detection_config(args)
    verdicts, segments = extract_usable_segments(wav, daubechies4(), config)
    with open(args.frames_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["frame_index", "start_sample", "usable", "detection_scale",
             "lag1", "lag2", "lag3"]
        )
        for v in verdicts:
            lags = list(v.peak_lags) + [-1] * (3 - len(v.peak_lags))
            writer.writerow(
                [v.frame_index, v.frame_index * config.hop, int(v.usable),
                 v.detection_scale if v.detection_scale is not None else -1, *lags]
            )
    with open(args.segments_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["seg_index", "start_frame", "end_frame", "start_sample", "end_sample"]
        )
        for i, seg in enumerate(segments):
            writer.writerow(
                [i, seg.start_frame, seg.end_frame, seg.sample_span[0], seg.sample_span[1]]
            )
    print(f"{sum(v.usable for v in verdicts)}/{len(verdicts)} usable frames, "
          f"{len(segments)} segments")
    return 0


def cmd_features(args) -> int:
    wav = load_wav(args.wav, expect_rate=CANONICAL_RATE)
    obs = waveform_features(wav, FeatureConfig())
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"c{i:02d}" for i in range(1, obs.shape[1] + 1)])
        for row in obs:
            writer.writerow([f"{v:.9g}" for v in row])
    print(f"wrote {obs.shape[0]} feature frames to {args.out}")
    return 0


def cmd_assign(args) -> int:
    wav = load_wav(args.wav, expect_rate=CANONICAL_RATE)
    speakers = harness.load_speaker_models(args.models)
    config = _detection_config(args)
    _, segments = extract_usable_segments(wav, daubechies4(), config)
    if not segments:
        print("no usable segments found", file=sys.stderr)
        return 1
    obs = [segment_features(wav, s, FeatureConfig()) for s in segments]
    table = build_score_table(speakers, obs)
    result = exhaustive_pair_search(table)
    id_i = speakers[result.speaker_i].speaker_id
    id_ii = speakers[result.speaker_ii].speaker_id
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["seg_index", "label", "speaker_I", "speaker_II",
             "score_I", "score_II", "total_log_score"]
        )
        for i, label in enumerate(result.labeling):
            writer.writerow(
                [i, label, id_i, id_ii,
                 f"{table.scores[i, result.speaker_i]:.17g}",
                 f"{table.scores[i, result.speaker_ii]:.17g}",
                 f"{result.total_log_score:.17g}"]
            )
    print(f"speakers ({id_i}, {id_ii}), {len(segments)} segments, "
          f"total log score {result.total_log_score:.6g}")
    return 0


def _run_eval(args, runner) -> int:
    config = _experiment_config(args)
    corpus = load_manifest(config.corpus_root)
    speakers = harness.load_speaker_models(args.models)
    missing = set(corpus) - set(speakers.speaker_ids)
    if missing:
        print(f"no model for speakers: {sorted(missing)}", file=sys.stderr)
        return 1
    report = runner(corpus, speakers, config)
    paths = harness.emit_report(report, args.out)
    written = [paths["csv"], paths["summary"]]
    if not args.no_figures:
        written.extend(render_report_figures(report, args.out))
    for path in written:
        print(f"wrote {path}")
    # every attempted condition must have produced a row
    return 0 if len(report.rows) == report.aggregates["n_conditions"] else 1


def cmd_eval_assignment(args) -> int:
    return _run_eval(args, harness.run_assignment_eval)


def cmd_eval_sid(args) -> int:
    return _run_eval(args, harness.run_sid_eval)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cosid",
        description="Usable-speech extraction, segment assignment and "
        "speaker identification for two-talker single-channel audio.",
    )
    parser.add_argument(
        "--dump-filters", action="store_true",
        help="print analysis filter coefficients at full precision and exit",
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("synth-corpus", help="generate a synthetic speaker corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--speakers", type=int, default=10)
    p.add_argument("--files-per-speaker", type=int, default=10)
    p.add_argument("--duration", type=float, default=2.0)
    p.add_argument("--train-files", type=int, default=5)
    p.set_defaults(func=cmd_synth_corpus)

    p = sub.add_parser("train", help="train one GMM per speaker from the train split")
    p.add_argument("--corpus", required=True)
    p.add_argument("--models", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--config", default=None)
    _add_detection_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("mix", help="mix two WAVs at a commanded TIR")
    p.add_argument("--target", required=True)
    p.add_argument("--interferer", required=True)
    p.add_argument("--tir", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("detect", help="per-frame usability and segment CSVs")
    p.add_argument("--wav", required=True)
    p.add_argument("--frames-csv", required=True)
    p.add_argument("--segments-csv", required=True)
    _add_detection_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("features", help="MFCC frames of a WAV as CSV")
    p.add_argument("--wav", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("assign", help="segment labeling of a mixture by pair search")
    p.add_argument("--wav", required=True)
    p.add_argument("--models", required=True)
    p.add_argument("--out", required=True)
    _add_detection_flags(p)
    p.set_defaults(func=cmd_assign)

    for name, func in (
        ("eval-assignment", cmd_eval_assignment),
        ("eval-sid", cmd_eval_sid),
    ):
        p = sub.add_parser(name, help=f"run the {name.split('-')[1]} evaluation")
        p.add_argument("--corpus", required=True)
        p.add_argument("--models", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--config", default=None)
        p.add_argument("--tir-grid", default=None,
                       help="comma-separated dB values (eval-sid only)")
        p.add_argument("--no-figures", action="store_true")
        _add_detection_flags(p)
        p.set_defaults(func=func)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.dump_filters:
        print(dump_filters())
        return 0
    if not getattr(args, "command", None):
        parser.print_help()
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
