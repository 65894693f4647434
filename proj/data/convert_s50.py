#!/usr/bin/env python3
"""Converts a 50x50 adjacency matrix file (one row per line, 0/1 entries,
whitespace separated — the format of the Teenage Friends and Lifestyle Study
excerpt) into the edge-list format this tool reads.

Usage: convert_s50.py s50-network1.dat > girls1.edges
"""

import sys


def main():
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    rows = []
    with open(sys.argv[1]) as f:
        for line in f:
            cells = line.split()
            if cells:
                rows.append([int(c) for c in cells])
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        sys.exit(f"error: expected a square 0/1 matrix, got {n} rows")
    labels = [f"g{i + 1:02d}" for i in range(n)]
    print("# directed")
    print("# nodes: " + " ".join(labels))
    for i in range(n):
        for j in range(n):
            if i != j and rows[i][j]:
                print(f"{labels[i]} {labels[j]}")


if __name__ == "__main__":
    main()
