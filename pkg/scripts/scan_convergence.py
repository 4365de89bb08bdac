"""Detected abpe region of the unit-disk area measure versus basis degree and grid spacing.

Prints the Jaccard index against the open unit disk and the width of the
band between the detected region and the unit circle, which shrinks like 1/N.
"""
import argparse

import numpy as np

from planar_abpe.abpe import FunctionBasis, scan_abpe
from planar_abpe.measure import disk_measure, measure
from planar_abpe.shapes import Disk


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--degrees", type=int, nargs="+", default=[10, 20, 30, 45])
    ap.add_argument("--res", type=float, nargs="+", default=[1 / 32, 1 / 64])
    args = ap.parse_args()
    mu = measure(disk_measure(0, 1))
    print(f"{'N':>4} {'h':>9} {'jaccard':>8} {'band':>7}")
    for h in args.res:
        for n in args.degrees:
            scan = scan_abpe(mu, FunctionBasis(0, n), (-1.25, -1.25, 1.25, 1.25), h, K=[Disk(0, 1)])
            truth = np.abs(scan.points) < 1
            jac = np.sum(scan.region & truth) / np.sum(scan.region | truth)
            band = 1 - np.abs(scan.points[scan.region]).max() if scan.region.any() else float("nan")
            print(f"{n:>4} {h:>9.5f} {jac:>8.3f} {band:>7.3f}")


if __name__ == "__main__":
    main()
