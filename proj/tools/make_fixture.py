#!/usr/bin/env python3
"""Writes the balanced 4-class Gaussian-blob table used by the tests."""

import argparse
import csv
import random

CLASSES = ["north", "east", "south", "west"]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out")
    parser.add_argument("--per-class", type=int, default=100)
    parser.add_argument("--features", type=int, default=6)
    parser.add_argument("--spread", type=float, default=0.6)
    parser.add_argument("--seed", type=int, default=2024)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    centers = [[rng.uniform(-1.0, 1.0) for _ in range(args.features)] for _ in CLASSES]
    rows = []
    for label, center in zip(CLASSES, centers):
        for _ in range(args.per_class):
            rows.append([f"{rng.gauss(m, args.spread):.6f}" for m in center] + [label])
    rng.shuffle(rows)

    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"x{i}" for i in range(args.features)] + ["label"])
        writer.writerows(rows)


if __name__ == "__main__":
    main()
