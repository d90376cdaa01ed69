"""Command-line interface.

Subcommands: decompose, tsm, noise-hist, optimize-bounds, masks-dump.
Exit codes: 0 success, 1 usage error, 2 I/O error, 3 numeric failure.
"""

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .config import build_ga_config, build_plan, load_config, merge_settings, parse_value
from .decompose import METHODS, decompose, stage_masks
from .errors import ParameterError, WavFormatError
from .masks import TransitionBounds
from .noise_analysis import noise_tonalness_histogram
from .optimize import GaConfig, make_synthetic_mixture, optimize_stage1, optimize_stage2
from .spectral import StftConfig, stft
from .structure_tensor import StConfig, st_features
from .tsm import TransientDetectConfig, TsmRequest, tsm_stretch
from .wavio import AudioBuffer, read_wav, write_wav

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="stndecomp", description="Sines/transients/noise decomposition toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key = value configuration file")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a configuration key (highest precedence, repeatable)",
        )

    p = sub.add_parser("decompose", help="split a WAV file into three component WAVs")
    p.add_argument("input")
    p.add_argument("--method", choices=METHODS, default="enhanced")
    p.add_argument("--stages", type=int, choices=(1, 2), default=None)
    p.add_argument("-o", "--output-prefix", default=None)
    p.add_argument("--bit-depth", choices=("pcm16", "pcm24", "float32"), default="float32")
    common(p)

    p = sub.add_parser("tsm", help="time-scale modification preserving transients")
    p.add_argument("input")
    p.add_argument("--factor", type=float, required=True)
    p.add_argument("--method", choices=METHODS, default="enhanced")
    p.add_argument("--stages", type=int, choices=(1, 2), default=None)
    p.add_argument("-o", "--output", default=None)
    common(p)

    p = sub.add_parser("noise-hist", help="tonalness histogram of white noise instances")
    p.add_argument("--window", type=int, default=8192)
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default=None, help="CSV path (default stdout)")
    common(p)

    p = sub.add_parser("optimize-bounds", help="search mask transition bounds with a GA")
    p.add_argument("--stage", type=int, choices=(1, 2), required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--population", type=int, default=None)
    p.add_argument("--generations", type=int, default=None)
    p.add_argument("-o", "--output", default=None, help="CSV path (default stdout)")
    common(p)

    p = sub.add_parser("masks-dump", help="export mask (or feature) matrices as CSV")
    p.add_argument("input")
    p.add_argument("--method", choices=METHODS, default="enhanced")
    p.add_argument("--features", action="store_true", help="with --method st, dump orientation/anisotropy/rate")
    p.add_argument("-o", "--output-prefix", default=None)
    common(p)

    return parser


def _settings_from(args) -> dict:
    try:
        file_settings = load_config(args.config) if getattr(args, "config", None) else {}
        cli_settings = {}
        for item in getattr(args, "overrides", []):
            if "=" not in item:
                raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
            key, raw = (part.strip() for part in item.split("=", 1))
            cli_settings[key] = parse_value(key, raw)
    except ParameterError as exc:
        raise UsageError(str(exc)) from exc
    return merge_settings(file_settings, cli_settings)


def _mono_plan_rate(buffer: AudioBuffer, settings: dict) -> dict:
    merged = dict(settings)
    merged.setdefault("sample_rate", float(buffer.sample_rate))
    return merged


def _write_csv(path, header, rows):
    if path is None:
        writer = csv.writer(sys.stdout)
        writer.writerow(header)
        writer.writerows(rows)
        return
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _save_matrix(path, matrix):
    header = ",".join(f"frame_{m}" for m in range(matrix.shape[1]))
    np.savetxt(path, matrix, delimiter=",", header=header, comments="")


def _cmd_decompose(args) -> int:
    buffer = read_wav(args.input)
    settings = _mono_plan_rate(buffer, _settings_from(args))
    plan = build_plan(args.method, args.stages, settings)
    components = [decompose(channel, plan).stack() for channel in buffer.channels]
    prefix = args.output_prefix or str(Path(args.input).with_suffix("")) + f"_{args.method}"
    for idx, name in enumerate(("sines", "transients", "noise")):
        out = AudioBuffer(
            channels=np.stack([comp[idx] for comp in components]),
            sample_rate=buffer.sample_rate,
        )
        write_wav(f"{prefix}_{name}.wav", out, bit_depth=args.bit_depth)
    return EXIT_OK


def _cmd_tsm(args) -> int:
    buffer = read_wav(args.input)
    settings = _mono_plan_rate(buffer, _settings_from(args))
    plan = build_plan(args.method, args.stages, settings)
    pv_cfg = None
    if "tsm_window" in settings:
        window = int(settings["tsm_window"])
        pv_cfg = StftConfig(window, int(settings.get("tsm_hop", window // 4)), float(settings["sample_rate"]))
    detect = TransientDetectConfig(
        threshold_db=float(settings.get("tsm_threshold_db", 12.0)),
        min_separation_ms=float(settings.get("tsm_min_separation_ms", 50.0)),
    )
    request = TsmRequest(
        factor=args.factor,
        plan=plan,
        pv_stft=pv_cfg,
        detect=detect,
        seed=int(settings.get("seed", 0)),
        fade_ms=float(settings.get("tsm_fade_ms", 5.0)),
    )
    stretched = np.stack([tsm_stretch(channel, request) for channel in buffer.channels])
    out_path = args.output or str(Path(args.input).with_suffix("")) + f"_tsm{args.factor:g}.wav"
    write_wav(out_path, AudioBuffer(channels=stretched, sample_rate=buffer.sample_rate))
    return EXIT_OK


def _cmd_noise_hist(args) -> int:
    settings = _settings_from(args)
    sample_rate = float(settings.get("sample_rate", 44100.0))
    hist = noise_tonalness_histogram(
        instances=args.instances,
        stft_cfg=StftConfig(args.window, args.window // 4, sample_rate),
        bins=args.bins,
        seed=args.seed,
    )
    rows = list(zip(hist.bin_centers(), hist.normalized_counts))
    _write_csv(args.output, ["bin_center", "normalized_count"], rows)
    return EXIT_OK


def _cmd_optimize_bounds(args) -> int:
    settings = _settings_from(args)
    cli_ga = {
        "seed": args.seed,
        "ga_population": args.population,
        "ga_generations": args.generations,
    }
    ga = build_ga_config(merge_settings(settings, cli_ga))
    mix = make_synthetic_mixture(seed=ga.seed, f_s=float(settings.get("sample_rate", 44100.0)))
    if args.stage == 1:
        result = optimize_stage1(mix, ga)
        key_u, key_l = "beta_u1", "beta_l1"
    else:
        stage1 = TransitionBounds(
            upper=float(settings.get("beta_u1", 0.8)), lower=float(settings.get("beta_l1", 0.7))
        )
        result = optimize_stage2(mix, stage1, ga)
        key_u, key_l = "beta_u2", "beta_l2"

    rows = [
        (gen, f"{fit:.8f}", f"{result.best.bounds.upper:.6f}", f"{result.best.bounds.lower:.6f}")
        for gen, fit in enumerate(result.history)
    ]
    _write_csv(args.output, ["generation", "best_fitness", "beta_u", "beta_l"], rows)
    print(f"{key_u} = {result.best.bounds.upper:.6f}")
    print(f"{key_l} = {result.best.bounds.lower:.6f}")
    return EXIT_OK


def _cmd_masks_dump(args) -> int:
    buffer = read_wav(args.input)
    settings = _mono_plan_rate(buffer, _settings_from(args))
    plan = build_plan(args.method, 1, settings)
    spec = stft(buffer.channels[0], plan.stage1_stft)
    prefix = args.output_prefix or str(Path(args.input).with_suffix("")) + f"_{args.method}"
    if args.features:
        if args.method != "st":
            raise UsageError("--features requires --method st")
        cfg = plan.stage1_params if isinstance(plan.stage1_params, StConfig) else StConfig()
        feats = st_features(spec, cfg)
        for name, matrix in (
            ("orientation", feats.orientation),
            ("anisotropy", feats.anisotropy),
            ("rate", feats.rate),
        ):
            _save_matrix(f"{prefix}_{name}.csv", matrix)
        return EXIT_OK
    masks = stage_masks(spec, plan.method, plan.stage1_params, plan.stage1_median)
    for name, matrix in (("S", masks.sines), ("T", masks.transients), ("N", masks.noise)):
        _save_matrix(f"{prefix}_{name}.csv", matrix)
    return EXIT_OK


_COMMANDS = {
    "decompose": _cmd_decompose,
    "tsm": _cmd_tsm,
    "noise-hist": _cmd_noise_hist,
    "optimize-bounds": _cmd_optimize_bounds,
    "masks-dump": _cmd_masks_dump,
}


def run_cli(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(parser.format_usage(), file=sys.stderr, end="")
        return EXIT_USAGE
    except WavFormatError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
