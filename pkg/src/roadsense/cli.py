"""``roadsense`` command line: one subcommand per pipeline step.

Exit codes: 0 success, 1 usage error, 2 data error, 3 convergence failure,
4 classification server unreachable.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import pipeline
from .errors import NoConvergence, RoadsenseError
from .explore import format_pca_csv
from .mapgen import build_html, build_map, intervals_from_response
from .service import classify_batch, encode_response, read_bundle, replay_client, serve, write_bundle
from .service.replay import ServiceUnavailable
from .telemetry import (
    SynthConfig,
    format_drive_log,
    format_pothole_labels,
    format_regimes,
    parse_drive_log,
    parse_pothole_labels,
    parse_regimes,
    parse_segments,
    synth_drive,
)
from .windows import format_feature_csv, parse_feature_csv

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CONVERGENCE, EXIT_UNAVAILABLE = 0, 1, 2, 3, 4

log = logging.getLogger("roadsense")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise UsageError(message)


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def cmd_synth(args) -> int:
    config = SynthConfig(
        duration_s=args.duration,
        sample_rate_hz=args.rate,
        segments=parse_segments(args.segments),
        pothole_count=args.potholes,
        sigma_good=args.sigma_good,
        sigma_bad=args.sigma_bad,
        pothole_impulse=args.impulse,
        rng_seed=args.seed,
    )
    drive, events, regimes = synth_drive(config)
    _emit(format_drive_log(drive), args.out)
    if args.labels_out:
        _emit(format_pothole_labels(events), args.labels_out)
    if args.truth_out:
        _emit(format_regimes(drive, regimes), args.truth_out)
    log.info("synth: %d samples, %d potholes, seed %d", len(drive), len(events), args.seed)
    return EXIT_OK


def cmd_featurize(args) -> int:
    drive = parse_drive_log(_read(args.log))
    events = parse_pothole_labels(_read(args.labels)) if args.labels else None
    regimes = parse_regimes(_read(args.truth)) if args.truth else None
    windows, unmatched = pipeline.featurize(
        drive, args.task, args.size, condition=args.condition, events=events, regimes=regimes
    )
    if unmatched:
        log.warning("featurize: %d pothole events fell outside every window", unmatched)
    _emit(format_feature_csv(windows), args.out)
    return EXIT_OK


def cmd_train(args) -> int:
    road = parse_feature_csv(_read(args.road))
    pothole = parse_feature_csv(_read(args.pothole))
    bundle, report = pipeline.train_bundle(
        road,
        pothole,
        C=args.C,
        gamma=args.gamma,
        seed=args.seed,
        test_fraction=args.test_fraction,
        min_precision=args.min_precision,
        tol=args.tol,
        max_passes=args.max_passes,
    )
    write_bundle(bundle, args.out)
    _emit(_json(report), args.report)
    if not report["converged"]:
        raise NoConvergence("SMO hit its iteration cap; bundle written with best-so-far models")
    return EXIT_OK


def cmd_eval(args) -> int:
    bundle = read_bundle(args.bundle)
    table = parse_feature_csv(_read(args.features))
    report = pipeline.evaluate_bundle(bundle, table, args.task)
    seed = bundle.metadata.get("seed")
    _emit(_json(report.to_dict(seed, {"task": args.task, "bundle": args.bundle})), args.out)
    return EXIT_OK


def cmd_pr_curve(args) -> int:
    bundle = read_bundle(args.bundle)
    table = parse_feature_csv(_read(args.features))
    _emit(pipeline.bundle_pr_curve(bundle, table, args.task).to_csv(), args.out)
    return EXIT_OK


def cmd_sweep_c(args) -> int:
    table = parse_feature_csv(_read(args.features))
    grid = [float(c) for c in args.grid.split(",") if c.strip()]
    rows = pipeline.sweep_table(table, grid, gamma=args.gamma, seed=args.seed, test_fraction=args.test_fraction)
    _emit(pipeline.format_sweep_csv(rows), args.out)
    return EXIT_OK


def cmd_pca(args) -> int:
    table = parse_feature_csv(_read(args.features))
    _, scores = pipeline.pca_table(table, args.k)
    _emit(format_pca_csv(scores, table.labels), args.out)
    return EXIT_OK


def cmd_classify(args) -> int:
    bundle = read_bundle(args.bundle)
    drive = parse_drive_log(_read(args.log))
    _emit(encode_response(classify_batch(bundle, drive)), args.out)
    return EXIT_OK


def cmd_serve(args) -> int:
    serve(port=args.port, bundle_path=args.bundle, host=args.host)
    return EXIT_OK


def cmd_replay(args) -> int:
    drive = parse_drive_log(_read(args.log))
    replay_client(drive, args.url, chunk_seconds=args.chunk_seconds, speed=args.speed, backoff=args.backoff)
    return EXIT_OK


def cmd_map(args) -> int:
    drive = parse_drive_log(_read(args.log))
    response = json.loads(_read(args.classified))
    road, potholes = intervals_from_response(drive, response, args.road_window, args.pothole_window)
    geojson = build_map(road, potholes)
    _emit(geojson, args.out)
    if args.html:
        _emit(build_html(geojson), args.html)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="roadsense", description="Road condition and pothole classification from IMU/GPS drive logs.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="generate a synthetic drive log")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--duration", type=float, default=300.0, help="seconds")
    s.add_argument("--rate", type=float, default=5.0, help="samples per second")
    s.add_argument("--segments", default="", help='cycled regime plan, e.g. "120:good,30:bad"')
    s.add_argument("--potholes", type=int, default=0)
    s.add_argument("--sigma-good", type=float, default=0.03)
    s.add_argument("--sigma-bad", type=float, default=0.20)
    s.add_argument("--impulse", type=float, default=1.0)
    s.add_argument("--out", help="drive CSV (default stdout)")
    s.add_argument("--labels-out", help="pothole event CSV")
    s.add_argument("--truth-out", help="per-sample regime CSV")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("featurize", help="drive CSV -> window feature CSV")
    s.add_argument("--log", required=True)
    s.add_argument("--task", choices=pipeline.TASKS, required=True)
    s.add_argument("--size", type=int, help="window size (default 25 road, 10 pothole)")
    src = s.add_mutually_exclusive_group()
    src.add_argument("--condition", type=int, choices=(0, 1), help="drive-level road label")
    src.add_argument("--labels", help="pothole event CSV")
    src.add_argument("--truth", help="per-sample regime CSV from synth")
    s.add_argument("--out")
    s.set_defaults(func=cmd_featurize)

    s = sub.add_parser("train", help="feature CSVs -> model bundle; prints the evaluation report")
    s.add_argument("--road", required=True, help="road feature CSV")
    s.add_argument("--pothole", required=True, help="pothole feature CSV")
    s.add_argument("--out", required=True, help="bundle path")
    s.add_argument("--report", help="report path (default stdout)")
    s.add_argument("--C", type=float, default=pipeline.DEFAULT_C)
    s.add_argument("--gamma", type=float, default=pipeline.DEFAULT_GAMMA)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--test-fraction", type=float, default=pipeline.DEFAULT_TEST_FRACTION)
    s.add_argument("--min-precision", type=float, default=pipeline.DEFAULT_MIN_PRECISION)
    s.add_argument("--tol", type=float, default=1e-3)
    s.add_argument("--max-passes", type=int, default=200)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("eval", help="evaluate a bundle on labeled features")
    s.add_argument("--bundle", required=True)
    s.add_argument("--features", required=True)
    s.add_argument("--task", choices=pipeline.TASKS, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("pr-curve", help="precision-recall curve CSV")
    s.add_argument("--bundle", required=True)
    s.add_argument("--features", required=True)
    s.add_argument("--task", choices=pipeline.TASKS, default="pothole")
    s.add_argument("--out")
    s.set_defaults(func=cmd_pr_curve)

    s = sub.add_parser("sweep-c", help="train/test error over a grid of C")
    s.add_argument("--features", required=True)
    s.add_argument("--grid", default="0.1,1,10,100,250,1000")
    s.add_argument("--gamma", type=float, default=pipeline.DEFAULT_GAMMA)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--test-fraction", type=float, default=pipeline.DEFAULT_TEST_FRACTION)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep_c)

    s = sub.add_parser("pca", help="project features onto principal components")
    s.add_argument("--features", required=True)
    s.add_argument("--k", type=int, default=3)
    s.add_argument("--out")
    s.set_defaults(func=cmd_pca)

    s = sub.add_parser("classify", help="offline classification of a drive CSV")
    s.add_argument("--bundle", required=True)
    s.add_argument("--log", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("serve", help="run the HTTP classification server")
    s.add_argument("--bundle", help="bundle path (overrides $ROADSENSE_BUNDLE)")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8080)
    s.set_defaults(func=cmd_serve)

    s = sub.add_parser("replay", help="stream a drive CSV to a running server")
    s.add_argument("--log", required=True)
    s.add_argument("--url", default="http://127.0.0.1:8080")
    s.add_argument("--chunk-seconds", type=float, default=5.0)
    s.add_argument("--speed", type=float, default=1.0, help="1 = real time, 0 = no pacing")
    s.add_argument("--backoff", type=float, default=0.5, help="first retry delay in seconds")
    s.set_defaults(func=cmd_replay)

    s = sub.add_parser("map", help="GeoJSON road-condition map from classify output")
    s.add_argument("--classified", required=True, help="output of `classify`")
    s.add_argument("--log", required=True, help="the drive CSV that was classified")
    s.add_argument("--road-window", type=int, default=25)
    s.add_argument("--pothole-window", type=int, default=10)
    s.add_argument("--out", default="map.geojson")
    s.add_argument("--html", help="also write a static HTML viewer")
    s.set_defaults(func=cmd_map)
    return p


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError:
        return EXIT_USAGE
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        return args.func(args)
    except NoConvergence as exc:
        log.error("%s", exc)
        return EXIT_CONVERGENCE
    except ServiceUnavailable as exc:
        log.error("%s", exc)
        return EXIT_UNAVAILABLE
    except RoadsenseError as exc:
        log.error("%s", exc)
        return EXIT_DATA
    except BrokenPipeError:
        # reader went away (e.g. piped into head); stop quietly
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_DATA
    except json.JSONDecodeError as exc:
        log.error("invalid JSON: %s", exc)
        return EXIT_DATA


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
