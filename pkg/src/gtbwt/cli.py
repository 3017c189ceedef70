"""Command line front end: ``gtbwt approx|denoise|basis|plan``."""
import argparse
import csv
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import imaging
from .denoise import (
    DenoiseParams,
    denoise_cycle_spin,
    denoise_iterative,
)
from .experiments import (
    basis_images,
    contrast_normalize,
    image_tree,
    largest_per_level,
    m_term_curves,
)
from .filters import available_filters, filter_set
from .tree import build_generalized_tree, load_plan, save_plan

log = logging.getLogger("gtbwt")

THREADS_ENV = "GTBWT_THREADS"


class CLIError(Exception):
    pass


def _int_list(text):
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _filter_list(text):
    names = [t.strip() for t in text.split(",") if t.strip()]
    for n in names:
        if n not in available_filters():
            raise argparse.ArgumentTypeError(
                f"unknown filter {n!r} (choose from {', '.join(available_filters())})")
    return names


def _filter_name(text):
    return _filter_list(text)[0]


def _odd(text):
    v = int(text)
    if v < 1 or v % 2 == 0:
        raise argparse.ArgumentTypeError("must be a positive odd integer")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _nonneg_float(text):
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def _default_threads():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _read_input(args):
    if args.input == "synthetic:square":
        img = imaging.rotated_square(args.size)
    else:
        if not Path(args.input).is_file():
            raise CLIError(f"input file not found: {args.input}")
        img = imaging.load_image(args.input)
    if getattr(args, "crop", None):
        img = imaging.center_crop(img, args.crop)
    return img


def _fmt(v):
    return "inf" if v == float("inf") else f"{v:.6f}"


def cmd_approx(args):
    img = _read_input(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    curves = {}
    for name in args.filters:
        rows = m_term_curves(img, name, args.m, args.patch_side, args.seed)
        curves[name] = rows
        path = out / f"approx_{name}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["m", "psnr_gtbwt", "psnr_1d", "psnr_2d"])
            for m, g, o, s in rows:
                w.writerow([m, _fmt(g), _fmt(o), _fmt(s)])
        log.info("wrote %s", path)
    if not args.no_plot:
        from .plotting import plot_m_term
        plot_m_term(curves, out / "approx.png")
    return 0


def cmd_denoise(args):
    img = _read_input(args)
    reference = None
    if args.add_noise:
        reference = img
        noisy = imaging.add_awgn(img, args.sigma, args.noise_seed)
    else:
        noisy = img
        if args.reference:
            reference = imaging.load_image(args.reference)
            if args.crop:
                reference = imaging.center_crop(reference, args.crop)
    oracle = None
    if args.oracle:
        oracle = imaging.load_image(args.oracle)
        if args.crop:
            oracle = imaging.center_crop(oracle, args.crop)
    threshold = args.threshold
    if threshold is None and args.sigma == 0:
        raise CLIError("--threshold is required when --sigma is 0")
    params = DenoiseParams(
        sigma=args.sigma, threshold=threshold, filter_name=args.filter,
        patch_side=args.patch_side, num_trees=args.trees, epsilon=args.epsilon,
        seed=args.seed, iterations=args.iterations, oracle_patch_source=oracle,
        threads=args.threads,
    )
    if args.no_sa:
        if args.iterations != 1 or oracle is not None:
            raise CLIError("--iterations/--oracle need subimage averaging")
        out, report = denoise_cycle_spin(noisy, params, reference)
    else:
        out, report = denoise_iterative(noisy, params, reference)
    if reference is not None:
        report.stages.insert(0, {"stage": "input", "psnr_db": imaging.psnr(reference, noisy),
                                 "mean_nonzeros": None, "seconds": None})
    imaging.save_image(out, args.output)
    report_path = args.report or str(Path(args.output).with_suffix(".csv"))
    if not args.timing:
        for s in report.stages:
            s["seconds"] = None
    report.to_csv(report_path)
    for s in report.stages:
        log.info("%s: psnr=%s nonzeros=%s", s["stage"], s["psnr_db"], s["mean_nonzeros"])
    if not args.no_plot:
        from .plotting import plot_images
        images, titles = [noisy, out], ["input", "denoised"]
        if reference is not None and args.add_noise:
            images.insert(0, reference)
            titles.insert(0, "clean")
        rp = Path(report_path)
        plot_images(images, titles, str(rp.with_name(rp.stem + "_plot.png")))
    return 0


def cmd_basis(args):
    img = _read_input(args)
    fs = filter_set(args.filter)
    plan = image_tree(img, fs, args.patch_side, args.seed)
    f = imaging.column_stack(img)
    nbands = plan.depth + 1
    if args.all:
        lengths = plan.lengths
        band_sizes = [lengths[-1]] + lengths[1:][::-1]
        addresses = [(lvl, i) for lvl in range(nbands) for i in range(band_sizes[lvl])]
    else:
        levels = args.levels if args.levels is not None else list(range(1, plan.depth + 1))
        bad = [lv for lv in levels if not 1 <= lv <= plan.depth]
        if bad:
            raise CLIError(f"level(s) {bad} outside 1..{plan.depth} for this plan")
        picked = largest_per_level(f, plan, fs, args.per_level)
        addresses = [a for a in picked if a[0] == 0 or a[0] in levels]
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    images = basis_images(plan, fs, addresses, img.shape)
    titles = []
    with open(out / "basis.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["file", "level", "index", "kind"])
        for (lvl, pos), atom in zip(addresses, images):
            kind = "scaling" if lvl == 0 else "wavelet"
            name = f"basis_l{lvl:02d}_{pos:05d}.png"
            imaging.save_image(contrast_normalize(atom), out / name)
            w.writerow([name, lvl, pos, kind])
            titles.append(f"{kind} l={max(lvl, 1)} #{pos}")
    if not args.no_plot:
        from .plotting import plot_images
        plot_images([img] + [contrast_normalize(a) for a in images], ["input"] + titles,
                    out / "basis.png")
    log.info("exported %d basis elements to %s", len(images), out)
    return 0


def _describe(plan, smooth=None):
    print(f"filter: {plan.filter_name}")
    print(f"leaves: {plan.leaf_count}")
    print(f"depth: {plan.depth}")
    print("level,length" + (",smoothness" if smooth else ""))
    for i, n in enumerate(plan.lengths[:-1]):
        extra = f",{smooth[i]:.6f}" if smooth else ""
        print(f"{i},{n}{extra}")
    print(f"coarsest,{plan.lengths[-1]}")


def cmd_plan(args):
    if args.action == "inspect":
        if not Path(args.plan).is_file():
            raise CLIError(f"plan file not found: {args.plan}")
        _describe(load_plan(args.plan))
        return 0
    img = _read_input(args)
    fs = filter_set(args.filter)
    if args.epsilon is None:
        plan = image_tree(img, fs, args.patch_side, args.seed, keep_points=True)
    else:
        feats = imaging.extract_patches(imaging.normalized(img), args.patch_side)
        rng = np.random.Generator(np.random.PCG64(args.seed))
        plan = build_generalized_tree(feats, fs, rng=rng, epsilon=args.epsilon,
                                      keep_points=True)
    _describe(plan, plan.smoothness())
    if args.output:
        save_plan(plan, args.output)
        log.info("wrote %s", args.output)
    return 0


def _add_input(p, crop=True):
    p.add_argument("--input", "-i", required=True,
                   help="8-bit grayscale PGM/PNG, or 'synthetic:square'")
    p.add_argument("--size", type=_positive_int, default=64,
                   help="side of the synthetic rotated-square image (default 64)")
    if crop:
        p.add_argument("--crop", type=_positive_int, default=None,
                       help="use the centred crop of this side")


def _add_common(p):
    p.add_argument("--patch-side", type=_odd, default=9, help="patch side (odd, default 9)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--threads", type=_positive_int, default=_default_threads(),
                   help=f"worker threads (default ${THREADS_ENV} or 1)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gtbwt", description="Generalized tree-based wavelet transform tools.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("approx", help="m-term approximation sweep")
    _add_input(p)
    _add_common(p)
    p.add_argument("--filters", type=_filter_list, default=["db1", "db4", "db8"],
                   help="comma-separated filters (default db1,db4,db8)")
    p.add_argument("--m", type=_int_list, default=[500, 1000, 2000, 4000, 8000],
                   help="comma-separated m values")
    p.add_argument("--out-dir", "-o", default=".", help="directory for CSV files and figure")
    p.add_argument("--no-plot", action="store_true", help="skip the figure")
    p.set_defaults(func=cmd_approx)

    p = sub.add_parser("denoise", help="denoise an image")
    _add_input(p)
    _add_common(p)
    p.add_argument("--output", required=True, help="denoised image (.png or .pgm)")
    p.add_argument("--report", help="report CSV (default: output path with .csv)")
    p.add_argument("--sigma", type=_nonneg_float, default=25.0, help="noise std, 0-255 scale")
    p.add_argument("--threshold", type=_positive_float, default=None,
                   help="hard threshold (default 3*sigma)")
    p.add_argument("--filter", type=_filter_name, default="sym8")
    p.add_argument("--trees", type=_positive_int, default=10, help="cycle-spinning trees")
    p.add_argument("--epsilon", type=_positive_float, default=0.1,
                   help="path randomisation scale on [0,1] intensities")
    p.add_argument("--no-sa", action="store_true", help="disable subimage averaging")
    p.add_argument("--iterations", type=int, choices=(1, 2), default=1)
    p.add_argument("--oracle", help="clean image whose patches define the trees")
    p.add_argument("--reference", help="clean image for PSNR reporting")
    p.add_argument("--add-noise", action="store_true",
                   help="treat input as clean: add noise of --sigma and report PSNR")
    p.add_argument("--noise-seed", type=int, default=0)
    p.add_argument("--timing", action="store_true",
                   help="fill the seconds column (makes reports run-dependent)")
    p.add_argument("--no-plot", action="store_true", help="skip the figure")
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("basis", help="export basis elements as images")
    _add_input(p)
    _add_common(p)
    p.add_argument("--filter", type=_filter_name, default="sym8")
    p.add_argument("--levels", type=_int_list, default=None,
                   help="detail levels, e.g. 1-12 (default: all)")
    p.add_argument("--per-level", type=_positive_int, default=2,
                   help="largest coefficients exported per level")
    p.add_argument("--all", action="store_true", help="export every basis element")
    p.add_argument("--out-dir", "-o", default=".", help="output directory")
    p.add_argument("--no-plot", action="store_true", help="skip the montage figure")
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("plan", help="build or inspect a tree plan")
    psub = p.add_subparsers(dest="action", required=True)
    b = psub.add_parser("build", help="build a plan from image patches")
    _add_input(b)
    _add_common(b)
    b.add_argument("--filter", type=_filter_name, default="sym8")
    b.add_argument("--epsilon", type=_positive_float, default=None,
                   help="use the randomised path with this scale")
    b.add_argument("--output", "-o", help="plan file to write")
    b.set_defaults(func=cmd_plan)
    s = psub.add_parser("inspect", help="print a saved plan")
    s.add_argument("plan")
    s.set_defaults(func=cmd_plan)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (CLIError, ValueError, IndexError, OSError) as exc:
        print(f"gtbwt: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
