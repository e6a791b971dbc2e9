"""Command-line interface.

Subcommands: synth, corrupt, filter, detect, analyze, run, presets. Exit
codes: 0 success, 2 configuration error, 3 data-integrity error, 4 numeric
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .channel import ChannelSpec, apply_channel
from .container import RecordContainer, read_record, write_record, write_rr_csv
from .dsp.comodulation import detect_common_mode
from .errors import ConfigError, DataIntegrityError, EcgForgeError, NumericError
from .experiment import ExperimentConfig, run_experiment
from .leads import LeadSystem
from .noise import NoiseSpec, apply_noise
from .pipeline import RecordPipeline
from .presets import list_presets, resolve_preset
from .rhythm import (
    DetectionParams, build_rr, detect_r_peaks, hrv_metrics,
    mask_and_interpolate,
)
from .record import EventLog
from .synth import BeatParams, generate_dipole_trajectory, synthesize_record
from .rhythm import ground_truth_annotations


def _load_config(arg, kind, default_preset=None):
    """Resolve --config: a JSON file path, a preset name, or the default."""
    if arg is None:
        if default_preset is None:
            return None
        return resolve_preset(kind, default_preset)
    if os.path.exists(arg):
        with open(arg) as fh:
            return json.load(fh)
    return resolve_preset(kind, arg)


def _require_seed(args):
    if args.seed is None:
        raise ConfigError("--seed is required; commands never read entropy")
    return int(args.seed)


def _cmd_synth(args):
    seed = _require_seed(args)
    doc = _load_config(args.config, "beat", "fig2-default")
    params = BeatParams.from_dict(doc)
    traj = generate_dipole_trajectory(
        params, args.duration, args.rate, seed
    )
    rec, truth = synthesize_record(traj, LeadSystem())
    container = RecordContainer(
        record=rec,
        annotations=ground_truth_annotations(truth, rec.sample_rate_hz),
        seeds={"synth": seed},
        provenance=[{"stage": "synth", "config_hash": "cli"}],
    )
    write_record(args.out, container)
    print(f"wrote {args.out}.json ({rec.n_leads} leads, "
          f"{rec.n_samples} samples at {rec.sample_rate_hz:g} Hz)")
    return 0


def _cmd_corrupt(args):
    seed = _require_seed(args)
    container = read_record(args.inp)
    noise_doc = _load_config(args.config, "noise", "mild")
    spec = NoiseSpec.from_dict(noise_doc)
    children = np.random.SeedSequence(seed).spawn(2)
    rec, accel, events = apply_noise(
        container.record, spec, int(children[0].generate_state(1)[0])
    )
    all_events = EventLog(container.events or ())
    all_events.extend(events)
    if args.channel:
        channel_doc = _load_config(args.channel, "channel")
        channel = ChannelSpec.from_dict(channel_doc)
        rec, channel_events = apply_channel(
            rec, channel, int(children[1].generate_state(1)[0])
        )
        all_events.extend(channel_events)
    out = RecordContainer(
        record=rec,
        annotations=container.annotations,
        events=all_events,
        accel=accel,
        seeds={**container.seeds, "corrupt": seed},
        provenance=container.provenance
        + [{"stage": "corrupt", "config_hash": "cli"}],
    )
    write_record(args.out, out)
    print(f"wrote {args.out}.json ({len(all_events)} events, units "
          f"{rec.units})")
    return 0


def _cmd_filter(args):
    container = read_record(args.inp)
    stage_list = _load_config(args.config, "pipeline", "standard")
    pipeline = RecordPipeline.from_config(stage_list)

    writer = None
    if args.emit_intermediate:
        os.makedirs(args.emit_intermediate, exist_ok=True)

        def writer(name, rec):
            write_record(
                os.path.join(args.emit_intermediate, name),
                RecordContainer(record=rec),
            )

    rec, provenance = pipeline.apply(
        container.record, accel=container.accel, intermediate_writer=writer
    )
    out = RecordContainer(
        record=rec,
        annotations=container.annotations,
        events=container.events,
        accel=container.accel,
        seeds=container.seeds,
        provenance=container.provenance + provenance,
    )
    write_record(args.out, out)
    print(f"wrote {args.out}.json after {len(provenance)} stages")
    return 0


def _cmd_detect(args):
    container = read_record(args.inp)
    doc = _load_config(args.config, "detection") or {}
    params = DetectionParams(**doc)
    peaks = detect_r_peaks(container.record, params)
    out = RecordContainer(
        record=container.record,
        annotations=peaks,
        events=container.events,
        accel=container.accel,
        seeds=container.seeds,
        provenance=container.provenance
        + [{"stage": "detect", "config_hash": "cli"}],
    )
    write_record(args.out, out)
    print(f"wrote {args.out}.json with {len(peaks)} detected peaks")
    return 0


def _cmd_analyze(args):
    container = read_record(args.inp)
    if container.annotations is None or len(container.annotations) < 2:
        raise ConfigError(
            "analyze needs a container with at least two annotated peaks "
            "(run detect first)"
        )
    rr = build_rr(container.annotations)
    windows = []
    if args.mask:
        windows = detect_common_mode(container.record)
        rr = mask_and_interpolate(rr, windows)
    summary = hrv_metrics(rr)
    write_rr_csv(args.out + ".rr.csv", rr)
    report = {
        "hrv": summary.to_dict(),
        "n_artifact_windows": len(windows),
        "n_intervals": len(rr),
    }
    with open(args.out + ".hrv.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(report["hrv"], indent=2, sort_keys=True))
    return 0


def _cmd_run(args):
    if args.preset:
        config = ExperimentConfig.from_preset(
            args.preset,
            **({"master_seed": int(args.seed)} if args.seed is not None else {}),
        )
    else:
        doc = _load_config(args.config, "experiment")
        if doc is None:
            raise ConfigError("run needs --config or --preset")
        if args.seed is not None:
            doc = {**doc, "master_seed": int(args.seed)}
        config = ExperimentConfig.from_dict(doc)
    report = run_experiment(config, args.out, emit_plots=args.emit_plots)
    print(json.dumps(
        {
            "recovered_snr_db": report["snr_db"]["recovered"],
            "detection_f1": report["detection"]["f1"],
            "report": os.path.join(args.out, "report.json"),
        },
        indent=2, sort_keys=True,
    ))
    return 0


def _cmd_presets(args):
    if args.action != "list":
        raise ConfigError(f"unknown presets action {args.action!r}")
    for kind, names in sorted(list_presets().items()):
        for name in names:
            print(f"{kind}: {name}")
    return 0


def _add_common(sub):
    sub.add_argument("--seed", type=int, default=None,
                     help="seed for any randomized step")
    sub.add_argument("--config", default=None,
                     help="JSON config file or preset name")
    sub.add_argument("--out", required=True, help="output path or directory")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ecgforge",
        description=(
            "Synthesize, corrupt, and recover 12-lead ECG records at desk "
            "scale."
        ),
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("synth", help="generate a clean 12-lead record")
    _add_common(p)
    p.add_argument("--duration", type=float, default=30.0)
    p.add_argument("--rate", type=float, default=500.0)
    p.set_defaults(func=_cmd_synth)

    p = subs.add_parser("corrupt", help="inject interference (and optionally "
                                        "the channel model)")
    _add_common(p)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--channel", default=None,
                   help="channel JSON file or preset name")
    p.set_defaults(func=_cmd_corrupt)

    p = subs.add_parser("filter", help="run a recovery pipeline")
    _add_common(p)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--pipeline", dest="config_alias", default=None,
                   help="alias for --config")
    p.add_argument("--emit-intermediate", default=None,
                   help="directory for per-stage records")
    p.set_defaults(func=_cmd_filter)

    p = subs.add_parser("detect", help="detect R peaks")
    _add_common(p)
    p.add_argument("--in", dest="inp", required=True)
    p.set_defaults(func=_cmd_detect)

    p = subs.add_parser("analyze", help="RR series and HRV metrics")
    _add_common(p)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--mask", action="store_true",
                   help="mask artifact windows before HRV")
    p.set_defaults(func=_cmd_analyze)

    p = subs.add_parser("run", help="full experiment")
    _add_common(p)
    p.add_argument("--preset", default=None, help="experiment preset name")
    p.add_argument("--emit-plots", action="store_true")
    p.set_defaults(func=_cmd_run)

    p = subs.add_parser("presets", help="list available presets")
    p.add_argument("action", nargs="?", default="list")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_presets)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config_alias", None) and not args.config:
        args.config = args.config_alias
    try:
        return args.func(args)
    except (ConfigError, ValueError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except DataIntegrityError as err:
        print(f"data integrity error: {err}", file=sys.stderr)
        return 3
    except NumericError as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return 4
    except EcgForgeError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
