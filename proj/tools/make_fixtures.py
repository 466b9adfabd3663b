#!/usr/bin/env python3
"""Regenerates the small datasets under tests/fixtures.

Each labeled fixture has an exact, known count of intra-class edges per view so
the ground-truth homophily ratio is a rational number fixed by construction.
"""
import json
import random
import sys
from pathlib import Path


def write_dataset(root, name, features, labels, views, n_clusters):
    d = root / name
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "features.csv", "w", newline="\n") as f:
        for row in features:
            f.write(",".join(repr(x) for x in row) + "\n")
    with open(d / "labels.csv", "w", newline="\n") as f:
        for y in labels:
            f.write(f"{y}\n")
    graph_files = []
    for v, edges in enumerate(views):
        fn = f"graph_{v}.txt"
        with open(d / fn, "w", newline="\n") as f:
            for i, j in sorted(edges):
                f.write(f"{i} {j}\n")
        graph_files.append(fn)
    manifest = {
        "name": name,
        "n_nodes": len(labels),
        "n_views": len(views),
        "n_features": len(features[0]),
        "n_clusters": n_clusters,
        "feature_file": "features.csv",
        "label_file": "labels.csv",
        "graph_files": graph_files,
    }
    with open(d / "manifest.json", "w", newline="\n") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")


def exact_ratio_view(rng, labels, n_edges, n_intra):
    n = len(labels)
    intra = [(i, j) for i in range(n) for j in range(i + 1, n) if labels[i] == labels[j]]
    inter = [(i, j) for i in range(n) for j in range(i + 1, n) if labels[i] != labels[j]]
    return rng.sample(intra, n_intra) + rng.sample(inter, n_edges - n_intra)


def labeled_fixture(root, name, seed, n_nodes, n_clusters, n_features, edges_per_view, intra_per_view):
    rng = random.Random(seed)
    labels = [i * n_clusters // n_nodes for i in range(n_nodes)]
    features = [[round(rng.gauss(1.0 if k == y % n_features else 0.0, 1.0), 6) for k in range(n_features)]
                for y in labels]
    views = [exact_ratio_view(rng, labels, edges_per_view, m) for m in intra_per_view]
    write_dataset(root, name, features, labels, views, n_clusters)


def main():
    root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "tests" / "fixtures"
    write_dataset(root, "tiny3", [[1.0, 0.0], [0.9, 0.1], [0.0, 1.0]], [0, 0, 1],
                  [[(0, 1), (1, 2)], [(0, 2)]], 2)
    # 100 edges per view: intra-class counts fix hr at 0.82 / 0.64.
    labeled_fixture(root, "acm_like", 11, 60, 3, 8, 100, [82, 64])
    labeled_fixture(root, "texas_like", 12, 50, 5, 8, 100, [9, 9])
    labeled_fixture(root, "chameleon_like", 13, 50, 5, 8, 100, [23, 23])


if __name__ == "__main__":
    main()
