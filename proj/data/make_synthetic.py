#!/usr/bin/env python3
"""Generates the synthetic stand-in datasets shipped under data/synthetic/.

The real datasets (the 50-girl friendship excerpt and the yeast protein
interaction pair) cannot be redistributed here, so these surrogates copy their
shape exactly: same node counts, same per-view link counts, directed vs
undirected structure, and a latent-space generative process so that model fits
and cross-validation behave comparably. See data/fetch_girls.sh for obtaining
the real friendship data.

Deterministic: fixed seed, exact link counts by probability-ranked repair.
"""

import numpy as np

SEED = 20240214


def sample_exact_count(rng, logits_minus_alpha, target):
    """Chooses alpha so the expected count matches, samples, then repairs to
    the exact target by flipping the least-confident entries."""
    lo, hi = -20.0, 20.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        expected = 1.0 / (1.0 + np.exp(-(mid + logits_minus_alpha)))
        if expected.sum() > target:
            hi = mid
        else:
            lo = mid
    alpha = 0.5 * (lo + hi)
    p = 1.0 / (1.0 + np.exp(-(alpha + logits_minus_alpha)))
    draw = rng.random(p.shape) < p
    n_links = int(draw.sum())
    if n_links > target:
        linked = np.flatnonzero(draw)
        order = linked[np.argsort(p[linked], kind="stable")]
        draw[order[: n_links - target]] = False
    elif n_links < target:
        unlinked = np.flatnonzero(~draw)
        order = unlinked[np.argsort(-p[unlinked], kind="stable")]
        draw[order[: target - n_links]] = True
    assert int(draw.sum()) == target
    return draw, alpha


def write_edges(path, labels, pairs, directed):
    lines = ["# directed" if directed else "# undirected"]
    lines.append("# nodes: " + " ".join(labels))
    for i, j in pairs:
        lines.append(f"{labels[i]} {labels[j]}")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
    print(f"{path}: {len(pairs)} links over {len(labels)} nodes")


def clustered_positions(rng, n, centers, spread):
    centers = np.asarray(centers)
    assign = rng.integers(0, len(centers), size=n)
    return centers[assign] + spread * rng.standard_normal((n, 2))


def make_girls(rng, outdir):
    n, counts = 50, [113, 116, 122]
    labels = [f"g{i + 1:02d}" for i in range(n)]
    base = clustered_positions(
        rng, n, [(-1.7, -0.3), (1.5, 0.9), (0.3, -1.9)], 0.55
    )
    idx = [(i, j) for i in range(n) for j in range(n) if i != j]
    z = base
    for wave, target in enumerate(counts, start=1):
        if wave > 1:
            z = z + 0.22 * rng.standard_normal((n, 2))  # longitudinal drift
        d2 = np.array([np.sum((z[i] - z[j]) ** 2) for i, j in idx])
        draw, alpha = sample_exact_count(rng, -d2, target)
        pairs = [idx[k] for k in np.flatnonzero(draw)]
        print(f"girls wave {wave}: alpha={alpha:.3f}")
        write_edges(f"{outdir}/girls{wave}.edges", labels, pairs, directed=True)


def make_protein(rng, outdir):
    n = 67
    labels = [f"y{i + 1:02d}" for i in range(n)]
    base = clustered_positions(
        rng, n, [(-1.5, -1.0), (1.3, 0.2), (-0.2, 1.6), (1.8, -1.5)], 0.5
    )
    idx = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for name, target, jitter in (("genetic", 294, 0.0), ("physical", 190, 0.45)):
        z = base + jitter * rng.standard_normal((n, 2))
        d2 = np.array([np.sum((z[i] - z[j]) ** 2) for i, j in idx])
        draw, alpha = sample_exact_count(rng, -d2, target)
        pairs = [idx[k] for k in np.flatnonzero(draw)]
        print(f"protein {name}: alpha={alpha:.3f}")
        write_edges(f"{outdir}/{name}.edges", labels, pairs, directed=False)


def main():
    import os

    outdir = os.path.join(os.path.dirname(os.path.abspath(__file__)), "synthetic")
    os.makedirs(outdir, exist_ok=True)
    rng = np.random.default_rng(SEED)
    make_girls(rng, outdir)
    make_protein(rng, outdir)


if __name__ == "__main__":
    main()
