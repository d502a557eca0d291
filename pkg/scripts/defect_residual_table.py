#!/usr/bin/env python3
"""Print the defect-identity residual on H_m(B_n) truncations, and the
coefficient identity residual for certified-cnp ball kernels.

The first identity resolves I - sum_alpha gamma_alpha^{(m)} z^alpha(M)(M*)
against the projection onto the low-degree block; the second replaces the
multinomial weights with the reciprocal-series coefficients of the kernel.

Usage: python3 scripts/defect_residual_table.py --degree-cap 6
"""

import argparse

from gradedshift import (
    BallKernelSpec,
    NotCnpError,
    ball_basis,
    chen_identity_residual,
    defect_identity_residual,
    drury_arveson,
    hm_ball,
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--degree-cap", type=int, default=6)
    parser.add_argument("--orders", type=int, nargs="+", default=[1, 2, 3])
    parser.add_argument("--vars", type=int, nargs="+", default=[2, 3])
    args = parser.parse_args()

    print(f"{'space':12s} {'n':>2s} {'D':>2s} {'residual':>12s} {'terms':>6s}")
    for m in args.orders:
        for n in args.vars:
            basis = ball_basis(hm_ball(n, m), args.degree_cap, coeff_dim=1)
            rep = defect_identity_residual(basis)
            print(
                f"{'H_' + str(m) + '(B_' + str(n) + ')':12s} {n:2d} {args.degree_cap:2d} "
                f"{rep.residual_norm:12.3e} {rep.term_count:6d}"
            )

    print()
    print("cnp coefficient identity")
    kernels = [
        ("drury-arveson", drury_arveson(2)),
        (
            "dirichlet-ball",
            BallKernelSpec(
                n=2,
                family="unitarily_invariant_custom",
                a_coeffs=tuple(1.0 / (j + 1) for j in range(args.degree_cap + 4)),
            ),
        ),
        ("h2-ball", hm_ball(2, 2)),
    ]
    for name, spec in kernels:
        basis = ball_basis(spec, min(args.degree_cap, 5), coeff_dim=1)
        try:
            rep = chen_identity_residual(basis)
        except NotCnpError as exc:
            print(f"{name:16s} refused: {exc}")
            continue
        print(f"{name:16s} residual {rep.residual_norm:.3e}  monotone {rep.monotone}")


if __name__ == "__main__":
    main()
