#!/usr/bin/env python3
"""Split a BER CSV from `fdsc simulate`/`fdsc reproduce` into gnuplot blocks.

One indexed block per (scheme, sigma2) curve, separated by two blank lines,
with columns snr_db ber ci_low ci_high. Zero-error points are dropped since
they have no place on a log axis. With --plot, a ready-to-run gnuplot script
is written next to the data file.
"""

import argparse
import csv
import sys
from collections import OrderedDict


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv", help="BER CSV, or - for stdin")
    ap.add_argument("-o", "--output", default="ber.dat", help="gnuplot data file")
    ap.add_argument("--plot", metavar="PNG", help="also write ber.gp rendering to PNG")
    args = ap.parse_args()

    src = sys.stdin if args.csv == "-" else open(args.csv, newline="")
    curves: "OrderedDict[tuple[str, str], list[list[str]]]" = OrderedDict()
    with src:
        for row in csv.DictReader(src):
            if float(row["ber"]) <= 0.0:
                continue
            key = (row["scheme"], row["sigma2"])
            curves.setdefault(key, []).append([row["snr_db"], row["ber"], row["ci_low"], row["ci_high"]])

    with open(args.output, "w") as out:
        for (scheme, sigma2), rows in curves.items():
            out.write(f"# {scheme} sigma2={sigma2}\n")
            for r in rows:
                out.write(" ".join(r) + "\n")
            out.write("\n\n")

    if args.plot:
        plots = ", \\\n  ".join(
            f"'{args.output}' index {i} using 1:2:3:4 with yerrorlines title '{s.upper()} {chr(963)}^2={v}'"
            for i, (s, v) in enumerate(curves)
        )
        with open("ber.gp", "w") as gp:
            gp.write(
                "set terminal pngcairo size 900,650\n"
                f"set output '{args.plot}'\n"
                "set logscale y\nset format y '10^{%L}'\nset grid\n"
                "set xlabel 'SNR (dB)'\nset ylabel 'BER'\nset key bottom left\n"
                f"plot {plots}\n"
            )
    return 0


if __name__ == "__main__":
    sys.exit(main())
