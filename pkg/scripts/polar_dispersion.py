#!/usr/bin/env python3
"""Polar dispersion/dissipation sweeps of the physical mode.

Writes one CSV per order with rows over incidence angle and normalized
wavenumber, for a uniform grid and for the stretched cases of interest
(gx = 1.1 with gy in {1.0, 0.9}). Radial coordinate of the polar figures
is khat, azimuthal is theta.
"""
import argparse
import sys

from frspectra.cli import main as cli_main


def run(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--orders", default="2,3,4,5")
    parser.add_argument("--family", default="huynh")
    parser.add_argument("--theta", default="0:90:1")
    parser.add_argument("--outdir", default=".")
    args = parser.parse_args(argv)

    cases = [("uniform", "1.0", "1.0"), ("gx11", "1.1", "1.0"), ("gx11_gy09", "1.1", "0.9")]
    for p in args.orders.split(","):
        for tag, gx, gy in cases:
            out = f"{args.outdir}/polar_{args.family}_p{p}_{tag}.csv"
            code = cli_main(
                [
                    "dispersion", "--d", "2", "--p", p, "--family", args.family,
                    "--alpha", "1.0", "--gx", gx, "--gy", gy,
                    "--theta", args.theta, "-o", out,
                ]
            )
            if code != 0:
                return code
            print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(run())
