#!/usr/bin/env python3
"""Sweep random contractive symbols across the built-in spaces and tabulate
purity verdicts.  The claim under test: at every truncation degree the
adjoint-compression spectral radii sit below 1 exactly when the constant
term's does, so the "inconsistent" column must stay at zero.

Usage: python3 scripts/purity_sweep.py --count 50 --forced 10 --degree-cap 8
"""

import argparse
import time

import numpy as np

from gradedshift import (
    BallDomain,
    PolydiscDomain,
    bergman,
    dirichlet,
    drury_arveson,
    hardy,
    hm_ball,
    multiplier_purity_verdict,
    random_contractive_symbol,
)

SPACES = [
    ("hardy-bidisc", PolydiscDomain((hardy(), hardy()))),
    ("bergman-bidisc", PolydiscDomain((bergman(), bergman()))),
    ("dirichlet-bidisc", PolydiscDomain((dirichlet(), dirichlet()))),
    ("da-ball", BallDomain(drury_arveson(2))),
    ("h2-ball", BallDomain(hm_ball(2, 2))),
    ("h3-ball", BallDomain(hm_ball(2, 3))),
]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--count", type=int, default=50, help="seeded symbols per cell")
    parser.add_argument("--forced", type=int, default=10, help="forced unitary-constant symbols per cell")
    parser.add_argument("--degree-cap", type=int, default=8)
    parser.add_argument("--coeff-dims", type=int, nargs="+", default=[1, 2])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--tol", type=float, default=1e-8)
    args = parser.parse_args()

    header = f"{'space':18s} {'dimE':>4s} {'pure':>5s} {'not_pure':>9s} {'inconsistent':>13s} {'near_boundary':>14s}"
    print(header)
    print("-" * len(header))
    start = time.monotonic()
    total_inconsistent = 0
    for idx, (name, domain) in enumerate(SPACES):
        for coeff_dim in args.coeff_dims:
            rng = np.random.default_rng(args.seed + 1000 * idx + coeff_dim)
            counts = {"pure": 0, "not_pure": 0, "inconsistent": 0}
            near = 0
            for k in range(args.count + args.forced):
                phi = random_contractive_symbol(
                    rng, domain, coeff_dim, 2, args.degree_cap, unitary_constant=k >= args.count
                )
                rep = multiplier_purity_verdict(phi, domain, args.degree_cap, args.tol)
                counts[rep.verdict] += 1
                near += rep.near_boundary
            total_inconsistent += counts["inconsistent"]
            print(
                f"{name:18s} {coeff_dim:4d} {counts['pure']:5d} {counts['not_pure']:9d} "
                f"{counts['inconsistent']:13d} {near:14d}"
            )
    print("-" * len(header))
    print(f"inconsistent verdicts: {total_inconsistent}   elapsed: {time.monotonic() - start:.1f}s")
    raise SystemExit(1 if total_inconsistent else 0)


if __name__ == "__main__":
    main()
