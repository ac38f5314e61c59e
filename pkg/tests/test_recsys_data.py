import numpy as np
import pytest

from threatgen.recsys import (
    SyntheticRatingsConfig,
    export_profiles,
    load_movie_index,
    load_movielens,
    pick_target_item,
    save_movie_index,
    synthetic_ratings,
)

CFG = SyntheticRatingsConfig(n_users=50, n_items=120, min_ratings_per_user=5,
                             max_ratings_per_user=30)


def test_load_movielens_parses_and_remaps(tmp_path):
    path = tmp_path / "ratings.dat"
    path.write_text(
        "1::1193::5::978300760\n"
        "1::661::3::978302109\n"
        "2::1193::4::978298413\n"
        "\n"
    )
    R, movie_index = load_movielens(path)
    assert R.shape == (2, 2)
    assert movie_index == {661: 0, 1193: 1}  # dense columns in sorted-ID order
    np.testing.assert_array_equal(R, [[3.0, 5.0], [0.0, 4.0]])


def test_movie_index_roundtrip(tmp_path):
    index = {661: 0, 1193: 1, 2: 2}
    path = tmp_path / "index.json"
    save_movie_index(path, index)
    assert load_movie_index(path) == index


def test_export_profiles_roundtrips_through_loader(tmp_path):
    ratings = np.array([[0.0, 5.0, 3.0], [4.0, 0.0, 0.0]])
    movie_index = {10: 0, 20: 1, 30: 2}
    path = tmp_path / "profiles.dat"
    export_profiles(path, ratings, movie_index, first_user_id=6041)
    lines = path.read_text().strip().splitlines()
    assert lines == ["6041::20::5::0", "6041::30::3::0", "6042::10::4::0"]
    R, idx = load_movielens(path)
    np.testing.assert_array_equal(R, [[0.0, 5.0, 3.0], [4.0, 0.0, 0.0]])
    assert idx == movie_index


def test_synthetic_ratings_shape_and_scale():
    R = synthetic_ratings(CFG, np.random.default_rng(0))
    assert R.shape == (50, 120)
    present = R[R > 0]
    assert set(np.unique(present)) <= {1.0, 2.0, 3.0, 4.0, 5.0}
    per_user = (R > 0).sum(axis=1)
    assert per_user.min() >= CFG.min_ratings_per_user
    assert per_user.max() <= CFG.max_ratings_per_user


def test_synthetic_ratings_deterministic_per_seed():
    a = synthetic_ratings(CFG, np.random.default_rng(1))
    b = synthetic_ratings(CFG, np.random.default_rng(1))
    np.testing.assert_array_equal(a, b)
    c = synthetic_ratings(CFG, np.random.default_rng(2))
    assert not np.array_equal(a, c)


def test_synthetic_ratings_have_popularity_skew():
    R = synthetic_ratings(SyntheticRatingsConfig(n_users=300, n_items=200), np.random.default_rng(3))
    counts = np.sort((R > 0).sum(axis=0))[::-1]
    head = counts[:20].sum()
    tail = counts[-20:].sum()
    # head items saturate at n_users (everyone rated them), which caps the ratio
    assert head > 3 * max(tail, 1)
    assert counts[0] > 0.9 * 300


def test_pick_target_item_is_mid_popularity():
    R = synthetic_ratings(CFG, np.random.default_rng(4))
    counts = (R > 0).sum(axis=0)
    rated = np.flatnonzero(counts > 0)
    median = np.median(counts[rated])
    for seed in range(5):
        t = pick_target_item(R, np.random.default_rng(seed))
        assert counts[t] > 0
        assert abs(counts[t] - median) <= max(1.0, 0.1 * median)


def test_pick_target_is_reproducible():
    R = synthetic_ratings(CFG, np.random.default_rng(5))
    assert pick_target_item(R, np.random.default_rng(6)) == pick_target_item(R, np.random.default_rng(6))
