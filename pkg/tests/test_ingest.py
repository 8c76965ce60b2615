import json
import logging
from importlib import resources

import numpy as np
import pytest

from zoomsib.ingest import (
    CSVFormatError,
    ReplayDataset,
    ReplayEnvironment,
    build_replay,
    kmeans,
    load_cluster_cache,
    load_csv,
    replay_round,
)

BUNDLED = resources.files("zoomsib") / "data" / "planted_clusters.csv"


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_indicator_rewards(tmp_path):
    p = write(tmp_path, "a,b,label\n1,2,x\n3,5,y\n2,7,x\n")
    data = load_csv(p, target_class="y")
    np.testing.assert_array_equal(data.rewards, [0, 1, 0])
    np.testing.assert_allclose(data.features.mean(axis=0), 0, atol=1e-15)
    np.testing.assert_allclose(data.features.std(axis=0), 1)


def test_constant_column_dropped(tmp_path, caplog):
    p = write(tmp_path, "a,c,b,label\n1,4,2,0\n3,4,5,1\n2,4,7,0\n")
    with caplog.at_level(logging.WARNING):
        data = load_csv(p)
    assert data.columns == ["a", "b"] and data.features.shape == (3, 2)
    assert ("c", "constant") in data.dropped
    assert "constant" in caplog.text


def test_non_numeric_auto_drop(tmp_path):
    p = write(tmp_path, "a,name,label\n1,u,0\n3,v,1\n")
    assert load_csv(p).columns == ["a"]


def test_errors_carry_location(tmp_path):
    with pytest.raises(CSVFormatError, match="empty"):
        load_csv(write(tmp_path, ""))
    with pytest.raises(CSVFormatError, match="label"):
        load_csv(write(tmp_path, "a,b\n1,2\n"))
    with pytest.raises(CSVFormatError, match=r"row 3, column 'b'"):
        load_csv(write(tmp_path, "a,b,label\n1,2,0\n1,oops,1\n"), ["a", "b"])
    with pytest.raises(CSVFormatError, match="missing feature"):
        load_csv(write(tmp_path, "a,label\n1,0\n2,1\n"), ["z"])
    with pytest.raises(CSVFormatError, match="row 2"):
        load_csv(write(tmp_path, "a,label\n1\n"))


def test_wide_file_keeps_all_numeric_columns(tmp_path):
    rng = np.random.default_rng(0)
    X = rng.standard_normal((50, 39))
    lines = [",".join(f"f{i}" for i in range(39)) + ",label"]
    lines += [",".join(f"{v:.5f}" for v in row) + f",{i % 3}" for i, row in enumerate(X)]
    data = load_csv(write(tmp_path, "\n".join(lines) + "\n"), target_class="2")
    assert data.features.shape == (50, 39)


def test_kmeans_separable():
    rng = np.random.default_rng(1)
    X = np.vstack([rng.normal(-10, 0.1, (40, 2)), rng.normal(10, 0.1, (40, 2))])
    res = kmeans(X, 2, seed=3)
    assert len(set(res.assignments[:40])) == 1 and len(set(res.assignments[40:])) == 1
    assert res.assignments[0] != res.assignments[-1]


def test_kmeans_k_equals_rows():
    X = np.random.default_rng(2).standard_normal((12, 3))
    res = kmeans(X, 12, seed=0)
    assert sorted(res.assignments) == list(range(12))
    assert res.inertia == pytest.approx(0, abs=1e-20)


def test_kmeans_monotone_and_deterministic():
    X = np.random.default_rng(3).standard_normal((300, 4))
    a, b = kmeans(X, 7, seed=11), kmeans(X, 7, seed=11)
    np.testing.assert_array_equal(a.assignments, b.assignments)
    h = np.array(a.inertia_history)
    assert np.all(np.diff(h) <= 1e-9 * h[0])
    with pytest.raises(ValueError):
        kmeans(X, 301)


def test_from_assignments_drops_empty():
    ds = ReplayDataset.from_assignments(np.zeros((4, 2)), np.array([0, 1, 1, 0.0]), [0, 3, 3, 0])
    assert ds.K == 2
    np.testing.assert_array_equal(ds.clusters, [0, 1, 1, 0])
    np.testing.assert_allclose(ds.cluster_means, [0, 1])


def test_replay_round_one_row_per_cluster():
    ds = ReplayDataset.from_assignments(np.arange(6.0)[:, None], np.zeros(6), [0, 0, 1, 1, 2, 2])
    X, r = replay_round(ds, np.random.default_rng(0))
    assert X.shape == (3, 1) and set(r) == {0.0}
    for k, x in enumerate(X[:, 0]):
        assert int(x) in ds.members[k]
    X2, _ = replay_round(ds, np.random.default_rng(0))
    np.testing.assert_array_equal(X, X2)


def test_replay_regret_accounting():
    # one cluster always pays, the other never does
    ds = ReplayDataset.from_assignments(np.eye(4), np.array([1, 1, 0, 0.0]), [0, 0, 1, 1])
    blk = ReplayEnvironment(ds, 5).draw(100)
    assert set(np.unique(blk.means)) <= {0.0, 1.0}
    np.testing.assert_array_equal(blk.noise, 0)
    assert np.all(blk.means.max(axis=1) - blk.means[:, 0] == 0)
    np.testing.assert_array_equal(blk.alt_means[0], [1, 0])
    again = ReplayEnvironment(ds, 5).draw(100)
    np.testing.assert_array_equal(blk.contexts, again.contexts)


def test_bundled_file_structure():
    data = load_csv(BUNDLED, target_class="1")
    assert data.features.shape == (1000, 6)
    ds = build_replay(BUNDLED, 8, "1", seed=0)
    assert ds.K == 8
    means = np.sort(ds.cluster_means)
    assert means[-2] > 0.7 and means[-3] < 0.2  # target mass sits in two clusters


def test_cluster_cache_roundtrip(tmp_path):
    cache = tmp_path / "clusters.json"
    a = build_replay(BUNDLED, 8, "1", seed=4, cache=cache)
    payload = json.loads(cache.read_text())
    assert set(payload) == {"centroids", "assignments", "seed"}
    b = build_replay(BUNDLED, 8, "1", seed=4, cache=cache)
    np.testing.assert_array_equal(a.clusters, b.clusters)
    with pytest.raises(ValueError):
        load_cluster_cache(cache, expected_seed=5)
