"""Differential ghost imaging of a small binary mask.

Prints the mean Pearson correlation to the truth against the pattern count
and draws the last reconstruction as ASCII shading.
"""
import argparse

import numpy as np

from gipulse.cli import default_mask
from gipulse.gi import bucket_measure, dgi_reconstruct, pearson
from gipulse.synth import FrameSequence, SpeckleConfig, gen_speckles

SHADES = " .:-=+*#%@"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--patterns", type=int, nargs="+", default=[100, 500, 1000, 5000, 20000])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--kind", choices=("binary", "uniform", "gaussian"), default="binary")
    ap.add_argument("--formula", choices=("canonical", "literal"), default="canonical")
    ap.add_argument("--noise", type=float, default=0.0, help="relative detector noise std")
    args = ap.parse_args()

    obj = default_mask()
    h, w = obj.shape
    img = None
    for n in args.patterns:
        rs = []
        for seed in range(args.seeds):
            sp = gen_speckles(SpeckleConfig(n_patterns=n, width=w, height=h, kind=args.kind, seed=seed))
            rec = bucket_measure(sp, FrameSequence(np.broadcast_to(obj, (n, h, w)), 1.0),
                                 detector_noise_sigma=args.noise, seed=seed)
            img = dgi_reconstruct(rec, sp, formula=args.formula)
            rs.append(pearson(img, obj))
        print(f"patterns={n:6d}  r={np.mean(rs):.4f} +/- {np.std(rs):.4f}")

    span = np.ptp(img) or 1.0
    levels = np.clip(((img - img.min()) / span * (len(SHADES) - 1)).round().astype(int), 0, len(SHADES) - 1)
    for row in levels:
        print("".join(SHADES[v] * 2 for v in row))


if __name__ == "__main__":
    main()
