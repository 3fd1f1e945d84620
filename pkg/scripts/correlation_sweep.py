"""Sampled singlet correlation against -cos(alpha - beta) over a grid of angles.

    python scripts/correlation_sweep.py --points 13 --shots 100000
"""

import argparse
import math

import numpy as np

from qparadox.epr import correlation, sample_pairs
from qparadox.state import RngStream


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=13)
    ap.add_argument("--shots", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    rng = RngStream(args.seed)
    sigma = 1 / math.sqrt(args.shots)
    print(f"{'delta':>8} {'analytic':>10} {'sampled':>10} {'z':>7}")
    for delta in np.linspace(0, 2 * math.pi, args.points):
        left, right, rng = sample_pairs(0.0, delta, args.shots, rng, workers=args.workers)
        sampled = float((left.astype(int) * right).mean())
        exact = correlation(0.0, delta)
        spread = sigma * math.sqrt(max(1 - exact**2, 1e-12))
        print(f"{delta:8.4f} {exact:10.6f} {sampled:10.6f} {(sampled - exact) / spread:7.2f}")


if __name__ == "__main__":
    main()
