"""Regenerate ``planted_clusters.csv``: 1000 rows, 8 well separated
Gaussian clusters in 6 dimensions, label ``1`` concentrated in clusters
0 and 1.  Run ``python3 generate_planted.py`` from this directory."""
import csv

import numpy as np

ROWS, CLUSTERS, DIM = 1000, 8, 6
SPREAD = 0.35
# probability of label 1 inside each cluster
TARGET_RATE = [0.9, 0.85, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05]


def main(path="planted_clusters.csv", seed=20240611):
    rng = np.random.default_rng(seed)
    centers = rng.normal(0.0, 2.0, (CLUSTERS, DIM))
    cluster = np.repeat(np.arange(CLUSTERS), ROWS // CLUSTERS)
    rng.shuffle(cluster)
    X = centers[cluster] + SPREAD * rng.standard_normal((ROWS, DIM))
    label = (rng.random(ROWS) < np.take(TARGET_RATE, cluster)).astype(int)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{i}" for i in range(DIM)] + ["label"])
        for row, lab in zip(X, label):
            w.writerow([f"{v:.6f}" for v in row] + [lab])


if __name__ == "__main__":
    main()
