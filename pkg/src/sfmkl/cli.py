"""Command line interface: ``sfmkl run``, ``sfmkl kernel-check`` and ``sfmkl slice``."""
import argparse
import logging
import sys
from pathlib import Path

from sfmkl.checks import run_kernel_checks
from sfmkl.config import ConfigError, load_config
from sfmkl.evaluation import EvaluationError, error_slice, parse_plane, write_slice_csv
from sfmkl.kernels import build_gram_set
from sfmkl.runner import export_report, fit_method, make_bank, run_experiment, slice_filename
from sfmkl.scene import observe

logger = logging.getLogger("sfmkl")


def _seed_list(text):
    try:
        return tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from None


def build_parser():
    parser = argparse.ArgumentParser(prog="sfmkl", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a full experiment and write the report files")
    run.add_argument("config", help="YAML config path or shipped config name (e.g. two_monopoles)")
    run.add_argument("--out", help="output directory (overrides output.directory)")
    run.add_argument("--threads", type=int, default=1, help="worker threads over (frequency, seed) cases")
    run.add_argument("--seed-list", type=_seed_list, help="comma separated noise seeds, e.g. 0,1,2")
    run.add_argument("--format", choices=("csv", "json"), help="report format (overrides output.format)")
    run.add_argument("--freq", type=float, action="append", help="restrict to these frequencies (Hz)")

    chk = sub.add_parser("kernel-check", help="verify the closed-form kernel against its oracles")
    chk.add_argument("--seed", type=int, default=0)
    chk.add_argument("--cases", type=int, default=200, help="quadrature comparisons")

    sl = sub.add_parser("slice", help="export a planar cut of the reconstruction")
    sl.add_argument("config")
    sl.add_argument("--plane", default="z=0", help="plane such as z=0 or x=0.1")
    sl.add_argument("--freq", type=float, required=True, help="frequency in Hz")
    sl.add_argument("--method", action="append", help="method(s); defaults to the config's list")
    sl.add_argument("--seed-list", type=_seed_list, help="noise seeds; defaults to the first config seed")
    sl.add_argument("--spacing", type=float, help="in-plane spacing (defaults to the grid spacing)")
    sl.add_argument("--out", help="output directory")
    sl.add_argument("--threads", type=int, default=1, help="accepted for symmetry with 'run'")
    return parser


def cmd_run(args):
    cfg = load_config(args.config)
    cfg = cfg.with_overrides(seeds=args.seed_list, output_format=args.format,
                             frequencies=tuple(args.freq) if args.freq else None)
    out = Path(args.out or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = run_experiment(cfg, threads=max(1, args.threads), slice_dir=out if cfg.slices else None)
    paths = export_report(report, out, cfg.output_format)
    for row in report.aggregates():
        print(f"{row['frequency_hz']:>8g} Hz  {row['method']:<8} NMSE {row['nmse_db_mean']:8.2f} dB "
              f"(min {row['nmse_db_min']:.2f}, max {row['nmse_db_max']:.2f}, n={row['num_seeds']})")
    print(f"wrote {len(paths)} files to {out}")
    return 0


def cmd_kernel_check(args):
    results = run_kernel_checks(seed=args.seed, quadrature_cases=args.cases)
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def cmd_slice(args):
    cfg = load_config(args.config)
    plane = parse_plane(args.plane)
    methods = tuple(args.method) if args.method else cfg.methods
    seeds = args.seed_list or cfg.seeds[:1]
    cfg = cfg.with_overrides(methods=methods)
    spacing = args.spacing or cfg.grid_spacing
    out = Path(args.out or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    mics = cfg.mic_array()
    k = cfg.scene.wavenumber(args.freq)
    grams = {}
    for method in methods:
        grams[method] = build_gram_set(mics, make_bank(cfg, method, k))
    for seed in seeds:
        obs = observe(cfg.scene, mics, args.freq, cfg.snr_db, seed)
        for method in methods:
            state, *_ = fit_method(method, grams[method], obs.values, cfg)
            fs = error_slice(state, cfg.scene, args.freq, plane, spacing)
            path = out / slice_filename(args.plane, args.freq, method, seed)
            write_slice_csv(path, fs, value="full")
            print(f"{path}: slice NMSE {fs.nmse_db:.2f} dB")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"run": cmd_run, "kernel-check": cmd_kernel_check, "slice": cmd_slice}
    try:
        return handlers[args.command](args)
    except (ConfigError, EvaluationError, OSError) as exc:
        print(f"sfmkl: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"sfmkl: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
