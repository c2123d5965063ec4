"""Check that a results table's Average column is the mean of its four F1 columns.

    python3 scripts/table_average.py
    python3 scripts/table_average.py --row custom 0.9 0.8 0.7 0.6 0.75
"""

import argparse
from statistics import fmean

ROWS = {
    "Base (Northwind)": ((0.9545, 0.5898, 0.5211, 0.8777), 0.7360),
    "NOMAD (Northwind)": ((1.0000, 0.4412, 0.9231, 0.9811), 0.8360),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--row", nargs=6, metavar=("LABEL", "C", "A", "RS", "RR", "AVG"), action="append")
    ap.add_argument("--tolerance", type=float, default=0.0005)
    args = ap.parse_args()
    rows = dict(ROWS)
    for label, *vals in args.row or []:
        nums = [float(v) for v in vals]
        rows[label] = (tuple(nums[:4]), nums[4])
    ok = True
    for label, (f1s, printed) in rows.items():
        mean = fmean(f1s)
        good = abs(mean - printed) <= args.tolerance
        ok &= good
        print(f"{label:<20} mean={mean:.5f} printed={printed:.4f} diff={mean - printed:+.5f} {'ok' if good else 'MISMATCH'}")
    raise SystemExit(0 if ok else 1)


if __name__ == "__main__":
    main()
