#!/usr/bin/env python3
"""Plot success rate against p - q from an experiment CSV.

usage: plot_phase.py results.csv [--out phase.png]
"""
import argparse
import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

METRICS = ["cert_rate", "exact_rate_exhaustive", "exact_rate_local_search",
           "exact_rate_conditional_gradient"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv")
    ap.add_argument("--out", default="phase.png")
    args = ap.parse_args()

    series = defaultdict(list)
    with open(args.csv, newline="") as f:
        for row in csv.DictReader(f):
            if row["row_type"] != "aggregate":
                continue
            gap = float(row["p"]) - float(row["q"])
            for metric in METRICS:
                if row.get(metric):
                    label = f"{metric} n={row['n']} m={row['m']} k={row['k']}"
                    series[label].append((gap, float(row[metric])))

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, pts in sorted(series.items()):
        pts.sort()
        ax.plot([g for g, _ in pts], [s for _, s in pts], marker="o", label=label)
    ax.set_xlabel("p - q")
    ax.set_ylabel("success rate")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(args.out, dpi=120)


if __name__ == "__main__":
    main()
