"""State-vector length and construction time of joint merge registers, k = 1..10.

    python scripts/register_scaling.py
"""

import argparse
import time

from qparadox.dbmerge import FactRecord, JointRegister, merge
from qparadox.operators import lookup


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kmax", type=int, default=10)
    args = ap.parse_args()

    d = lookup("D")
    print(f"{'k':>3} {'length':>7} {'build_ms':>9} {'apply_ms':>9}")
    for k in range(1, args.kmax + 1):
        recs = [FactRecord(f"fact{i}", merge(0, 1), ("a", "b")) for i in range(k)]
        t0 = time.perf_counter()
        reg = JointRegister(recs)
        t1 = time.perf_counter()
        for i in range(k):
            reg = reg.apply(d, i)
        t2 = time.perf_counter()
        print(f"{k:3d} {reg.state.shape[0]:7d} {1e3 * (t1 - t0):9.3f} {1e3 * (t2 - t1):9.3f}")


if __name__ == "__main__":
    main()
