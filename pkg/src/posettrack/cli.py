"""Command-line entry point.

    posettrack gen --targets 5 --seed 7 --out run/
    posettrack track run/detections.csv --weighting tailored --out run/
    posettrack eval --tracks run/tracks.csv run/detections.csv --out run/

Exit status: 0 success, 1 validation error or bad usage, 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import get_floats, read_config
from .constraint import PAIRING_MODES, ConstraintGates, custody_loss_rate, separability_curve
from .ingest import (
    ScenarioSpec,
    align_pulses,
    cfar_detect,
    detections_to_csv,
    generate_scenario,
    read_detections_csv,
    read_pulses_csv,
    read_pulses_wav,
    subsample,
)
from .kalman import KalmanParams, kalman_track
from .metrics import evaluate, histogram_csv
from .model import ValidationError
from .poset import width
from .tracker import (
    WEIGHTINGS,
    poset_track,
    read_tracks_csv,
    track_summary,
    tracklet_graph,
    tracks_to_csv,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _radii(text: str) -> tuple[float, ...]:
    vals = tuple(float(v) for v in text.split(","))
    if len(vals) != 4:
        raise argparse.ArgumentTypeError("radii must be rx,ry,rz,rt")
    return vals


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _gates(args) -> ConstraintGates:
    return ConstraintGates.from_config(read_config(args.gates)) if args.gates else ConstraintGates()


def _kparams(args) -> KalmanParams:
    return KalmanParams.from_config(read_config(args.kalman)) if args.kalman else KalmanParams()


def _load(args):
    ds = read_detections_csv(args.input)
    if args.m != 1 or args.n != 1:
        ds = subsample(ds, args.m, args.n)
    return ds


def _write_tracks(tracks, out: Path, stem: str) -> None:
    (out / f"{stem}.csv").write_text(tracks_to_csv(tracks))
    _dump_json(track_summary(tracks), out / f"{stem}_summary.json")


def cmd_gen(args) -> None:
    cfg = read_config(args.config) if args.config else {}
    spec = ScenarioSpec.from_config(
        cfg,
        n_targets=args.targets,
        duration=args.duration,
        sample_interval=args.interval,
        seed=args.seed,
    )
    ds = generate_scenario(spec)
    (_out_dir(args) / "detections.csv").write_text(detections_to_csv(ds))


def cmd_track(args) -> None:
    ds = _load(args)
    mix = None
    if args.mix:
        mix = get_floats(read_config(args.mix), "mix")
    tracks = poset_track(ds, _gates(args), args.window, args.weighting, args.radii, _kparams(args), mix)
    _write_tracks(tracks, _out_dir(args), "tracks")


def cmd_kalman(args) -> None:
    ds = _load(args)
    _write_tracks(kalman_track(ds, _kparams(args)), _out_dir(args), "tracks")


def cmd_eval(args) -> None:
    ds = _load(args)
    report = evaluate(read_tracks_csv(args.tracks), ds)
    out = _out_dir(args)
    _dump_json(report.to_dict(), out / "eval.json")
    (out / "misid_hist.csv").write_text(histogram_csv(report.misid_histogram))
    (out / "length_ratio_hist.csv").write_text(histogram_csv(report.length_ratio_histogram))


def cmd_custody(args) -> None:
    report = custody_loss_rate(_load(args), _gates(args), args.mode)
    _dump_json(report.to_dict(), _out_dir(args) / "custody.json")


def cmd_separability(args) -> None:
    curve = separability_curve(_load(args), _gates(args), args.intervals)
    lines = ["interval_s,fraction_separable\n"]
    lines += [f"{iv!r},{fr!r}\n" for iv, fr in curve.samples]
    (_out_dir(args) / "separability.csv").write_text("".join(lines))


def cmd_width(args) -> None:
    ds = _load(args)
    graph = tracklet_graph(ds, _gates(args), args.window, "simple", args.radii)
    res = width(graph)
    print(f"width {res.width}")
    print(f"chains {len(res.chain_cover)}")


def cmd_sonar(args) -> None:
    path = Path(args.input)
    if path.suffix.lower() == ".wav":
        pm = read_pulses_wav(path, args.prf)
    else:
        pm = read_pulses_csv(path, args.prf, args.sample_rate)
    if not args.no_align:
        pm = align_pulses(pm)
    ds = cfar_detect(pm, args.cfar_window, args.guard, args.factor)
    (_out_dir(args) / "detections.csv").write_text(detections_to_csv(ds))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="posettrack", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, data=True, gates=True):
        p.add_argument("--out", default=".", help="output directory")
        if data:
            p.add_argument("input", help="detections CSV")
            p.add_argument("--m", type=int, default=1, help="keep every m-th target")
            p.add_argument("--n", type=int, default=1, help="keep every n-th sample")
        if gates:
            p.add_argument("--gates", help="gate config file")
        return p

    p = common(sub.add_parser("gen", help="generate a synthetic scenario"), data=False, gates=False)
    p.add_argument("--config", help="scenario config file")
    p.add_argument("--targets", type=int)
    p.add_argument("--duration", type=float)
    p.add_argument("--interval", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_gen)

    for name, func in (("track", cmd_track), ("width", cmd_width)):
        p = common(sub.add_parser(name))
        p.add_argument("--window", type=float, default=300.0)
        p.add_argument("--radii", type=_radii, default=(0.0, 0.0, 0.0, 0.0))
        if name == "track":
            p.add_argument("--weighting", choices=WEIGHTINGS, default="simple")
            p.add_argument("--kalman", help="Kalman config file")
            p.add_argument("--mix", help="config file with 'mix = a,b,c,d,e,f'")
        p.set_defaults(func=func)

    p = common(sub.add_parser("kalman", help="baseline Kalman tracker"), gates=False)
    p.add_argument("--kalman", help="Kalman config file")
    p.set_defaults(func=cmd_kalman)

    p = common(sub.add_parser("eval", help="score tracks against truth"), gates=False)
    p.add_argument("--tracks", required=True)
    p.set_defaults(func=cmd_eval)

    p = common(sub.add_parser("custody", help="loss-of-custody rate"))
    p.add_argument("--mode", choices=PAIRING_MODES, default="consecutive")
    p.set_defaults(func=cmd_custody)

    p = common(sub.add_parser("separability", help="separable-pair fraction vs interval"))
    p.add_argument("--intervals", type=_floats, default=[float(v) for v in range(30, 601, 30)])
    p.set_defaults(func=cmd_separability)

    p = common(sub.add_parser("sonar-detect", help="align pulses and run CFAR"), data=False, gates=False)
    p.add_argument("input", help="pulse CSV (rows = pulses) or 16-bit mono WAV")
    p.add_argument("--prf", type=float, default=29.4)
    p.add_argument("--sample-rate", type=float, default=44100.0)
    p.add_argument("--cfar-window", type=int, default=100)
    p.add_argument("--guard", type=int, default=10)
    p.add_argument("--factor", type=float, default=5.0)
    p.add_argument("--no-align", action="store_true")
    p.set_defaults(func=cmd_sonar)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
