#!/usr/bin/env python3
"""Build data/birthwt.csv from the MASS birthwt table.

Input: a CSV with at least the columns age, lwt and bwt (e.g. the Rdatasets
export of MASS::birthwt). Output columns: age1..age3 and lwt1..lwt3 are the
first three powers of the standardized (population sd) age and lwt, bwt is
birth weight in kilograms.
"""

import argparse
import csv
import statistics


def standardized(values):
    mean = statistics.fmean(values)
    sd = statistics.pstdev(values)
    return [(v - mean) / sd for v in values]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("input", help="raw birthwt CSV")
    parser.add_argument("output", help="feature CSV to write")
    args = parser.parse_args()

    with open(args.input, newline="") as f:
        rows = list(csv.DictReader(f))
    age = standardized([float(r["age"]) for r in rows])
    lwt = standardized([float(r["lwt"]) for r in rows])
    bwt = [float(r["bwt"]) / 1000.0 for r in rows]

    with open(args.output, "w", newline="") as f:
        out = csv.writer(f, lineterminator="\n")
        out.writerow(["age1", "age2", "age3", "lwt1", "lwt2", "lwt3", "bwt"])
        for a, w, y in zip(age, lwt, bwt):
            out.writerow([f"{a:.12g}", f"{a**2:.12g}", f"{a**3:.12g}",
                          f"{w:.12g}", f"{w**2:.12g}", f"{w**3:.12g}", f"{y:.12g}"])


if __name__ == "__main__":
    main()
