#!/usr/bin/env python3
"""Certify random commuting isometry pairs built from unitary-projection
data and summarize the purity split.

Each trial draws (U, P) with U Haar unitary and P an orthogonal projection,
builds the symbol pair Phi_p = (P + z P^perp)U*, Phi_q = U(P^perp + z P),
and checks the product identity, commutators, isometry defects, and that
the pure/not-pure branch agrees with the spectral radii of P U* and U P^perp.

Usage: python3 scripts/bcl_sweep.py --count 100 --max-dim 6
"""

import argparse

import numpy as np

from gradedshift import bcl_dilation_certify
from gradedshift.dilation import random_bcl_triple


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--count", type=int, default=100)
    parser.add_argument("--max-dim", type=int, default=6)
    parser.add_argument("--degree-cap", type=int, default=4)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    worst = {"product": 0.0, "commutator": 0.0, "isometry": 0.0}
    split = {"pure": 0, "not_pure": 0}
    failures = 0
    for k in range(args.count):
        rng = np.random.default_rng(args.seed + k)
        t = random_bcl_triple(rng, 1 + k % args.max_dim)
        cert = bcl_dilation_certify(t, 2, args.degree_cap)
        worst["product"] = max(worst["product"], cert.product_coeff_error)
        worst["commutator"] = max(worst["commutator"], cert.max_commutator)
        worst["isometry"] = max(worst["isometry"], cert.max_isometry_defect)
        split[cert.verdict_p] += 1
        if not cert.passed:
            failures += 1
            print(f"trial {k}: FAILED (rho_p={cert.rho_p:.6f}, rho_q={cert.rho_q:.6f})")

    print(f"trials: {args.count}  (e_dim cycles 1..{args.max_dim})")
    print(f"worst product coefficient error: {worst['product']:.3e}")
    print(f"worst commutator residual:       {worst['commutator']:.3e}")
    print(f"worst isometry defect:           {worst['isometry']:.3e}")
    print(f"M_phi_p purity split: {split['pure']} pure / {split['not_pure']} not pure")
    print(f"certificate failures: {failures}")
    raise SystemExit(1 if failures else 0)


if __name__ == "__main__":
    main()
