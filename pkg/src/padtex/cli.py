"""Command-line entry point.

    padtex run       --config CFG [--stage NAME] [--jobs N] [--seed U64]
    padtex extract | gmm-train | fv-encode | svm-train | score | evaluate | report
                     --config CFG [--jobs N] [--seed U64]
    padtex synth-data --out DIR [--n-bona N] [--n-attack N] [--seed U64]
    padtex learn-bsif --out DIR [--sides ...] [--counts ...] [--seed U64]

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
failure. Audio must be 16-bit PCM mono WAV; convert FLAC corpora (such as
ASVspoof 2019 distributions) externally, e.g.
`ffmpeg -i in.flac -ar 16000 -ac 1 -sample_fmt s16 out.wav`.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, derive_seed
from .errors import ConfigError, DataError, NumericError, PadTexError
from .pipeline import STAGES, run_experiment
from .synth import make_corpus
from .texture import learn_filters_ica, save_filter_bank

BSIF_GRID_SIDES = (3, 5, 7, 9, 11, 13, 15, 17)
BSIF_GRID_COUNTS = (5, 6, 7, 8, 9, 10, 11, 12)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="experiment config file")
    parser.add_argument("--jobs", type=int, default=None,
                        help="extraction worker processes (default: from config)")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the master seed from the config")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="padtex", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the full staged pipeline")
    _add_common(run)
    run.add_argument("--stage", choices=STAGES, default=None,
                     help="run a single stage instead of the whole pipeline")

    for stage in STAGES:
        stage_parser = sub.add_parser(stage, help=f"run only the {stage} stage")
        _add_common(stage_parser)

    synth = sub.add_parser("synth-data", help="generate the synthetic mini-corpus")
    synth.add_argument("--out", required=True, help="output directory")
    synth.add_argument("--n-bona", type=int, default=100)
    synth.add_argument("--n-attack", type=int, default=100)
    synth.add_argument("--seed", type=int, default=0)

    learn = sub.add_parser("learn-bsif",
                           help="learn ICA filter banks from synthetic patches")
    learn.add_argument("--out", required=True, help="output directory for .bank files")
    learn.add_argument("--sides", type=int, nargs="+", default=list(BSIF_GRID_SIDES))
    learn.add_argument("--counts", type=int, nargs="+", default=list(BSIF_GRID_COUNTS))
    learn.add_argument("--seed", type=int, default=0)
    return parser


def synth_patch_images(rng: np.random.Generator, n_images: int = 48,
                       size: int = 96) -> np.ndarray:
    """Procedural sparse-structure images for ICA training: 1/f noise plus
    random oriented step edges and impulses."""
    images = np.empty((n_images, size, size))
    freq_r = np.fft.fftfreq(size)[:, None]
    freq_c = np.fft.rfftfreq(size)[None, :]
    radius = np.sqrt(freq_r ** 2 + freq_c ** 2)
    radius[0, 0] = 1.0
    for i in range(n_images):
        spectrum = (rng.standard_normal(radius.shape)
                    + 1j * rng.standard_normal(radius.shape)) / radius
        img = np.fft.irfft2(spectrum, s=(size, size))
        rows = np.arange(size)[:, None]
        cols = np.arange(size)[None, :]
        for _ in range(int(rng.integers(4, 9))):  # step edges
            angle = rng.uniform(0.0, np.pi)
            offset = rng.uniform(-0.5, 0.5) * size
            side = (np.cos(angle) * (cols - size / 2)
                    + np.sin(angle) * (rows - size / 2)) > offset
            img = img + rng.normal(0.0, 1.0) * side
        for _ in range(int(rng.integers(8, 17))):  # impulses
            r, c = rng.integers(0, size, size=2)
            img[r, c] += rng.normal(0.0, 4.0)
        img = img - img.min()
        images[i] = img / max(img.max(), 1e-12)
    return images


def sample_patches(images: np.ndarray, side: int, count: int,
                   rng: np.random.Generator) -> np.ndarray:
    n_images, size, _ = images.shape
    patches = np.empty((count, side, side))
    for i in range(count):
        img = images[rng.integers(n_images)]
        r = rng.integers(0, size - side + 1)
        c = rng.integers(0, size - side + 1)
        patches[i] = img[r:r + side, c:c + side]
    return patches


def learn_bank_grid(out_dir, sides, counts, seed: int, log=print) -> list[Path]:
    """Learn one bank per feasible (side, count) pair and write .bank files.

    Pairs with count > side*side - 1 are skipped (ICA cannot produce more
    filters than the patch dimensionality allows); over the default grid
    this leaves the usual 60 bank configurations.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for side in sides:
        image_rng = np.random.default_rng([seed, side, 0])
        images = synth_patch_images(image_rng)
        for count in counts:
            if count > side * side - 1:
                if log:
                    log(f"skipping l={side} N={count}: needs N <= l*l - 1")
                continue
            rng = np.random.default_rng([seed, side, count])
            n_patches = max(60 * side * side, 6000)
            patches = sample_patches(images, side, n_patches, rng)
            bank = learn_filters_ica(patches, side, count,
                                     seed=derive_seed(seed, f"ica-{side}-{count}"))
            path = out_dir / f"bsif_l{side}_n{count}.bank"
            save_filter_bank(path, bank)
            written.append(path)
            if log:
                log(f"learned bank l={side} N={count} -> {path}")
    meta = {
        "generator": "padtex learn-bsif",
        "source": "ICA on synthetic sparse-structure patches "
                  "(1/f noise + step edges + impulses)",
        "seed": seed,
        "banks": [p.name for p in written],
    }
    with open(out_dir / "banks.meta.json", "w", encoding="ascii") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return written


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "synth-data":
            info = make_corpus(args.out, n_bona=args.n_bona, n_attack=args.n_attack,
                               seed=args.seed)
            print(f"wrote {info['n_train']} train and {info['n_eval']} eval trials "
                  f"under {args.out}")
            return 0
        if args.command == "learn-bsif":
            learn_bank_grid(args.out, args.sides, args.counts, args.seed)
            return 0

        config = ExperimentConfig.from_file(args.config)
        if args.seed is not None:
            config.seed = args.seed
        if args.command == "run":
            stages = [args.stage] if args.stage else None
        else:
            stages = [args.command]
        result = run_experiment(config, stages=stages, jobs=args.jobs)
        for stage, entry in result["stages"].items():
            print(f"{stage}: {entry}")
        if result["metrics"]:
            print(f"metrics: {result['metrics']}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4
    except (PadTexError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
