"""Classical paradox versus quantum resolution for the bundled loop scenarios.

    python scripts/reproduce_paradox.py --shots 100000 --seed 0
"""

import argparse
from importlib import resources

from qparadox import dsl
from qparadox.epr import run_loop
from qparadox.state import RngStream


def load(name):
    text = resources.files("qparadox").joinpath("scenarios", name).read_text()
    return dsl.validate(dsl.parse(text))[0]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--shots", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for name in ("fig2.scn", "fig2-consistent.scn"):
        s = load(name)
        c = run_loop(s, "classical")
        q = run_loop(s, "quantum", RngStream(args.seed), shots=args.shots)
        fixed = q.fixed_point_used
        print(f"{name}: policy {s.agent_policy.name}")
        print(f"  classical: paradox={c.paradox} consistent={[int(x) for x in c.consistent_assignments]}")
        print(f"  quantum:   fixed point {None if fixed is None else (round(fixed.a.real, 6), round(fixed.b.real, 6))}")
        print(f"             rho diag {q.fixed_point_density.matrix.diagonal().real.round(6)}")
        print(f"             histogram {q.outcome_histogram}")


if __name__ == "__main__":
    main()
