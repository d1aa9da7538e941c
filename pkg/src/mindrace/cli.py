"""Command-line entry point.

Exit codes: 0 success, 2 usage error, 3 data error, 4 runtime error.
``MINDRACE_SEED`` overrides every ``--seed`` flag.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__

log = logging.getLogger("mindrace")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUNTIME = 0, 2, 3, 4


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


def _seed(args) -> int:
    env = os.environ.get("MINDRACE_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as e:
            raise UsageError(f"MINDRACE_SEED must be an integer, got {env!r}") from e
    return int(getattr(args, "seed", 0) or 0)


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _existing(paths) -> list[Path]:
    out = []
    for p in paths:
        p = Path(p)
        if not p.exists():
            raise UsageError(f"no such file or directory: {p}")
        out.append(p)
    return out


# --- synth -------------------------------------------------------------------

PRESETS = ("two_class", "four_class", "band_split")


def synth_configs(spec: dict, seed_override: int | None = None):
    """Expand a synth config file into SynthConfig objects, one per seed.

    Schema: ``{"preset": name, "preset_args": {...}, "seeds": [...]}`` or
    ``{"synth": <full SynthConfig>, "seeds": [...]}``.
    """
    from .io import SynthConfig, band_split_config, four_class_config, two_class_config

    seeds = spec.get("seeds", [spec.get("seed", 0)])
    if seed_override is not None:
        seeds = [seed_override + i for i in range(len(seeds))]
    out = []
    for i, s in enumerate(seeds):
        sid = f"synth{i:03d}"
        if "preset" in spec:
            fn = {"two_class": two_class_config, "four_class": four_class_config,
                  "band_split": band_split_config}.get(spec["preset"])
            if fn is None:
                raise UsageError(f"unknown preset {spec['preset']!r}; choose from {PRESETS}")
            args = dict(spec.get("preset_args", {}))
            for k in ("bands", "distractor_bands"):
                if k in args:
                    args[k] = tuple(tuple(b) for b in args[k])
            out.append(fn(seed=int(s), subject_id=sid, **args))
        elif "synth" in spec:
            d = dict(spec["synth"], seed=int(s))
            d.setdefault("subject_id", sid)
            out.append(SynthConfig.from_dict(d))
        else:
            raise UsageError("synth config needs a 'preset' or a 'synth' section")
    return out


def cmd_synth(args) -> int:
    from .eval import config_fingerprint
    from .io import synthesize, write_container
    from .io.synth import validate_config

    spec = json.loads(Path(args.config).read_text())
    override = int(os.environ["MINDRACE_SEED"]) if "MINDRACE_SEED" in os.environ else None
    try:
        cfgs = synth_configs(spec, override)
        for c in cfgs:
            validate_config(c)
    except (ValueError, TypeError, KeyError) as e:
        raise UsageError(f"bad synth config: {e}") from e
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {"version": __version__, "config": spec, "files": []}
    for c in cfgs:
        fp = config_fingerprint(c.to_dict(), c.seed)
        rec, _ = synthesize(c)
        name = f"{c.subject_id}.mrc"
        write_container(rec, out / name, extra={"seed": c.seed, "fingerprint": fp, "synth": c.to_dict()})
        manifest["files"].append({"file": name, "seed": c.seed, "fingerprint": fp, "subject_id": c.subject_id})
    _write_json(out / "manifest.json", manifest)
    print(f"wrote {len(cfgs)} recordings to {out}")
    return EXIT_OK


# --- convert -----------------------------------------------------------------


def cmd_convert(args) -> int:
    from .io import parse_run_filename, read_edf, relabel_physionet, write_container
    from .io.physionet import EXCLUDED_SUBJECTS

    paths = _existing(args.paths)
    files = []
    for p in paths:
        files.extend(sorted(p.rglob("*.edf")) if p.is_dir() else [p])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    n = 0
    for f in files:
        parsed = parse_run_filename(f)
        if parsed and parsed[0] in EXCLUDED_SUBJECTS:
            print(f"skipping {f.name}: subject {parsed[0]} is excluded")
            continue
        subject = f"S{parsed[0]:03d}" if parsed else f.stem
        rec = read_edf(f, subject_id=subject)
        if parsed:
            rec = relabel_physionet(rec, parsed[1])
        write_container(rec, out / (f.stem + ".mrc"), extra={"source": f.name})
        n += 1
    print(f"converted {n} file(s) to {out}")
    return EXIT_OK


# --- data loading for evaluate / compare-bands / train -------------------------


def load_experiments(paths, scheme_name: str = "auto", epoch_len_s: float = 4.0):
    """Group recordings by subject and cut them into labeled epochs."""
    from .core import FOUR_CLASS, TWO_CLASS
    from .io import concat_epochsets, epochs_from_events, read_container

    files = []
    for p in _existing(paths):
        files.extend(sorted(p.glob("*.mrc")) if p.is_dir() else [p])
    if not files:
        raise UsageError("no recordings found")
    groups: dict[str, list] = {}
    for f in files:
        rec = read_container(f)
        groups.setdefault(rec.subject_id or f.stem, []).append(rec)
    schemes = {"two": TWO_CLASS, "four": FOUR_CLASS}
    out = {}
    for subject, recs in groups.items():
        labels = {e.label for r in recs for e in r.events}
        overlap = {k: len(labels & set(s.mapping)) for k, s in schemes.items()}
        if scheme_name == "auto":
            best = max(overlap, key=overlap.get)
            if overlap[best] == 0:
                raise DataError(f"{subject}: event labels {sorted(labels)} match no class scheme")
            scheme = schemes[best]
        else:
            scheme = schemes[scheme_name]
            other = [k for k in schemes if k != scheme_name and overlap[k] > overlap[scheme_name]]
            if overlap[scheme_name] == 0 or other:
                raise DataError(f"{subject}: labels {sorted(labels)} do not fit the {scheme_name}-class scheme")
        sets = [epochs_from_events(r, scheme, epoch_len_s) for r in recs]
        out[subject] = concat_epochsets(sets) if len(sets) > 1 else sets[0]
    return out


def _cv_config(args):
    from .eval import CvConfig

    return CvConfig(band=args.band, normalization=args.normalization, C=args.C, use_faster=not args.no_faster)


def cmd_evaluate(args) -> int:
    from .eval import cross_validate, write_cv_csv

    seed = _seed(args)
    cfg = _cv_config(args)
    experiments = load_experiments(args.data, args.scheme)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows, summary = [], {}
    for name, epochs in experiments.items():
        rep = cross_validate(epochs, cfg, n_folds=args.folds, seed=seed)
        rows.append((name, cfg.band, rep))
        summary[name] = rep.to_dict()
        print(f"{name}: {cfg.band} mean accuracy {rep.mean:.4f}")
    write_cv_csv(out / "cv_folds.csv", rows)
    means = [r.mean for _, _, r in rows]
    _write_json(out / "cv_summary.json", {
        "band": cfg.band, "folds": args.folds, "seed": seed, "fingerprint": rows[0][2].fingerprint,
        "mean_accuracy": float(np.mean(means)), "experiments": summary,
    })
    return EXIT_OK


def cmd_compare_bands(args) -> int:
    from .eval import band_comparison, write_band_report

    seed = _seed(args)
    cfg = _cv_config(args)
    experiments = load_experiments(args.data, args.scheme)
    names = list(experiments)
    rep = band_comparison([experiments[n] for n in names], args.bands, cfg, args.folds, seed)
    write_band_report(rep, args.out, names)
    for row in rep.summary_rows():
        print(f"{row['band']:>8}: {row['mean_accuracy']:.4f}")
    print(f"Friedman chi2 = {rep.friedman_stat:.3f}, p = {rep.friedman_p:.4g}")
    return EXIT_OK


# --- train -------------------------------------------------------------------


def cmd_train(args) -> int:
    from .eval import config_fingerprint
    from .faster import faster_offline, save_faster_model
    from .features import BandSpec, band_features, fft_abs_array, window_array
    from .io import concat_epochsets
    from .svm import save_voting_svm, train_voting_svm

    seed = _seed(args)
    scheme = "two" if args.classes == 2 else "four"
    experiments = load_experiments(args.data, scheme)
    epochs = concat_epochsets(list(experiments.values())) if len(experiments) > 1 else next(iter(experiments.values()))
    if len(np.unique(epochs.class_ids)) < 2:
        raise DataError("training data contains a single class")
    band = BandSpec.named(args.band)
    clean, model, report = faster_offline(epochs, seed=seed)
    win, _, _, labels = window_array(clean)
    F = band_features(fft_abs_array(win), clean.fs / win.shape[-1], band)
    clf = train_voting_svm(F, labels, C=args.C, band_edges=band.edges(), normalization=args.normalization)
    cfg = {"band": args.band, "C": args.C, "normalization": args.normalization, "classes": args.classes}
    meta = {"seed": seed, "fingerprint": config_fingerprint(cfg, seed), "config": cfg}
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_faster_model(model, out / "faster_model.mrc", extra=meta)
    save_voting_svm(clf, out / "voting_svm.mrc", extra=meta)
    _write_json(out / "faster_report.json", dict(report.to_dict(), **meta))
    print(f"trained on {len(clean)} epochs ({len(labels)} windows); models in {out}")
    return EXIT_OK


# --- race ----------------------------------------------------------------------


def _load_track(spec: str, game_cfg):
    from .game import Track, generate_track

    if spec.startswith("seed:"):
        return generate_track(int(spec[5:]), game_cfg.track_length)
    p = Path(spec)
    if not p.exists():
        raise UsageError(f"track file not found: {p}")
    return Track.load(p)


def _open_stream(spec: str):
    from .control import ReplayStream, loopback_feed
    from .io import read_container

    kind, _, rest = spec.partition(":")
    if kind not in ("replay", "socket") or not rest:
        raise UsageError("stream must be replay:FILE[,paced] or socket:FILE")
    path, _, opt = rest.partition(",")
    rec = read_container(_existing([path])[0])
    src = ReplayStream(rec, rec.fs, paced=(opt == "paced"))
    if kind == "socket":
        return loopback_feed(src)[0]
    return src


def cmd_race(args) -> int:
    from .closedloop import run_closed_loop
    from .control import LoopConfig, write_run_log
    from .eval import config_fingerprint
    from .faster import load_faster_model
    from .game import GameConfig
    from .svm import load_voting_svm

    seed = _seed(args)
    game_cfg = GameConfig.load(args.game_config) if args.game_config else GameConfig()
    models = _existing([args.models])[0]
    model = load_faster_model(models / "faster_model.mrc")
    clf = load_voting_svm(models / "voting_svm.mrc")
    track = _load_track(args.track, game_cfg)
    stream = _open_stream(args.stream)
    loop_cfg = LoopConfig(band=args.band, record_latency=args.latency, code_map=game_cfg.code_map)
    res = run_closed_loop(stream, model, clf, track, game_cfg, loop_cfg, port=args.serve)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_run_log(res.ticks, out / "run_log.jsonl")
    res.race.write_events(out / "race_events.jsonl")
    fp = config_fingerprint({"game": game_cfg.to_dict(), "track": track.to_dict(), "stream": args.stream}, seed)
    summary = dict(res.race.summary(), seed=seed, fingerprint=fp, packets_sent=res.packets_sent,
                   malformed_packets=res.malformed, track=[k.value for k in track.kinds()])
    _write_json(out / "race_summary.json", summary)
    ft = summary["finish_time_s"]
    verdict = "PASS" if res.race.passed else "FAIL"
    print(f"finish time {ft} s: {verdict} (limit {game_cfg.time_limit_s} s)")
    return EXIT_OK


def cmd_make_stream(args) -> int:
    """Scripted replay stream: steering blocks for a track, or all-Calm silence."""
    from .closedloop import plan_steering, plan_to_blocks
    from .game import GameConfig
    from .io import synthesize_blocks, two_class_config, write_container

    seed = _seed(args)
    game_cfg = GameConfig.load(args.game_config) if args.game_config else GameConfig()
    track = _load_track(args.track, game_cfg)
    plan = plan_steering(track, game_cfg)
    blocks = plan_to_blocks(plan)
    if args.silent:
        blocks = [0] * len(blocks)
    cfg = two_class_config(seed=seed, montage=args.montage)
    rec = synthesize_blocks(cfg, blocks, 1.6)
    write_container(rec, args.out, extra={"seed": seed, "track": track.to_dict(), "silent": args.silent})
    print(f"wrote {len(blocks)} blocks ({rec.n_samples / rec.fs:.1f} s) to {args.out}")
    return EXIT_OK


def cmd_gen_track(args) -> int:
    from .game import GameConfig, generate_track

    seed = _seed(args)
    track = generate_track(seed, GameConfig().track_length)
    d = track.to_dict()
    if args.out:
        _write_json(Path(args.out), d)
    else:
        print(json.dumps(d, indent=2))
    return EXIT_OK


# --- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    from .eval import DEFAULT_BANDS

    p = argparse.ArgumentParser(prog="mindrace", description="Motor-imagery EEG pipeline and race simulator.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate synthetic recordings from a JSON config")
    s.add_argument("config")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("convert", help="convert EDF files or dataset directories to containers")
    s.add_argument("paths", nargs="+")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_convert)

    def cv_flags(q, band=True):
        if band:
            q.add_argument("--band", choices=DEFAULT_BANDS, default="range40")
        q.add_argument("--folds", type=int, default=5)
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--C", type=float, default=1.0)
        q.add_argument("--normalization", choices=("per_bin", "per_window", "none"), default="per_bin")
        q.add_argument("--no-faster", action="store_true", help="skip artifact rejection")
        q.add_argument("--scheme", choices=("auto", "two", "four"), default="auto")
        q.add_argument("--out", required=True)
        q.add_argument("data", nargs="+")

    s = sub.add_parser("evaluate", help="k-fold cross-validation for one band")
    cv_flags(s)
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("compare-bands", help="cross-validate every band and run the statistics")
    s.add_argument("--bands", nargs="+", choices=DEFAULT_BANDS, default=list(DEFAULT_BANDS))
    cv_flags(s, band=False)
    s.set_defaults(func=cmd_compare_bands, band="range40")

    s = sub.add_parser("train", help="calibrate FASTER and train the voting SVM")
    s.add_argument("data", nargs="+")
    s.add_argument("--band", choices=DEFAULT_BANDS, default="range40")
    s.add_argument("--classes", type=int, choices=(2, 4), default=2)
    s.add_argument("--C", type=float, default=1.0)
    s.add_argument("--normalization", choices=("per_bin", "per_window", "none"), default="per_bin")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("race", help="closed-loop race against a replayed stream")
    s.add_argument("--models", required=True, help="directory written by 'train'")
    s.add_argument("--stream", required=True, help="replay:FILE[,paced] or socket:FILE")
    s.add_argument("--track", default="seed:0", help="seed:N or a track JSON file")
    s.add_argument("--serve", type=int, default=5555, help="UDP port (0 picks a free one)")
    s.add_argument("--band", choices=DEFAULT_BANDS, default="range40")
    s.add_argument("--game-config")
    s.add_argument("--latency", action="store_true", help="record per-tick latency in the run log")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_race)

    s = sub.add_parser("make-stream", help="write a scripted replay stream for a track")
    s.add_argument("--track", default="seed:0")
    s.add_argument("--silent", action="store_true", help="all-Calm stream")
    s.add_argument("--montage", default="standard16")
    s.add_argument("--game-config")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_make_stream)

    s = sub.add_parser("gen-track", help="generate a random track")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_gen_track)
    return p


def main(argv=None) -> int:
    from .io import ContainerError, EdfError

    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, EdfError, ContainerError, ValueError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except (OSError, RuntimeError) as e:
        print(f"runtime error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
