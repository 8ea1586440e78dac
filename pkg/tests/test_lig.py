import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import gradient_oracle, ig_oracle, intensity_oracle, threshold_oracle
from smalltarget.core import Frame
from smalltarget.lig import (
    LigParams,
    adaptive_threshold,
    binarize,
    compute_ig_map,
    local_gradient,
    local_intensity,
    nonzero_mean_threshold,
    threshold_count,
    top_values,
)


def gaussian(k, sigma=1.5, amp=0.8, cx=None, cy=None):
    r = k // 2
    cx = r if cx is None else cx
    cy = r if cy is None else cy
    ys, xs = np.mgrid[0:k, 0:k]
    return amp * np.exp(-((xs - cx) ** 2 + (ys - cy) ** 2) / (2 * sigma**2))


def blob_frame(size=64, cx=30, cy=25, sigma=1.5, amp=0.8, bg=0.2):
    ys, xs = np.mgrid[0:size, 0:size]
    return bg + amp * np.exp(-((xs - cx) ** 2 + (ys - cy) ** 2) / (2 * sigma**2))


# --- local intensity ---------------------------------------------------------


def test_intensity_uniform_window_is_zero():
    assert local_intensity(np.full((7, 7), 0.4), 3) == 0.0


def test_intensity_bright_center_dark_ring():
    w = np.zeros((7, 7))
    w[2:5, 2:5] = 1.0
    assert local_intensity(w, 3) == 1.0


def test_intensity_dark_center_clips_to_zero():
    w = np.ones((7, 7))
    w[2:5, 2:5] = 0.0
    assert local_intensity(w, 3) == 0.0


def test_intensity_random_window_matches_two_mean_oracle():
    rng = np.random.default_rng(1)
    for _ in range(20):
        w = rng.random((7, 7))
        assert local_intensity(w, 3) == pytest.approx(intensity_oracle(w, 3), abs=1e-12)


# --- local gradient ---------------------------------------------------------


def test_gradient_uniform_window_is_zero():
    assert local_gradient(np.full((7, 7), 0.3), 8, 3) == 0.0


def test_gradient_bump_beats_truncated_bump():
    bump = 0.2 + gaussian(7)
    half = bump.copy()
    half[:, :3] = 0.2  # keep only the right half-plane of the bump
    g_bump = local_gradient(bump, 8, 3)
    g_half = local_gradient(half, 8, 3)
    assert g_bump == pytest.approx(gradient_oracle(bump, 8, 3), abs=1e-12)
    assert g_half == pytest.approx(gradient_oracle(half, 8, 3), abs=1e-12)
    assert g_bump > 0
    assert g_bump > g_half


def test_gradient_vertical_step_edge_is_zero():
    w = np.zeros((7, 7))
    w[:, 3:] = 1.0
    assert gradient_oracle(w, 8, 3) == 0.0
    assert local_gradient(w, 8, 3) == 0.0


def test_gradient_random_windows_match_oracle():
    rng = np.random.default_rng(2)
    for k, c in ((7, 3), (9, 3), (19, 7)):
        for _ in range(5):
            w = rng.random((k, k))
            assert local_gradient(w, 8, c) == pytest.approx(gradient_oracle(w, 8, c), abs=1e-12)


# --- IG map ------------------------------------------------------------------


def test_constant_frame_gives_zero_map():
    assert not compute_ig_map(np.full((20, 30), 0.5)).any()


def test_blob_argmax_near_center():
    img = blob_frame()
    ig = compute_ig_map(Frame(img))
    y, x = np.unravel_index(np.argmax(ig), ig.shape)
    assert abs(x - 30) <= 1 and abs(y - 25) <= 1
    ref = ig_oracle(img)
    y2, x2 = np.unravel_index(np.argmax(ref), ref.shape)
    assert (y, x) == (y2, x2)


@pytest.mark.parametrize("shape,k,c", [((24, 31), 7, 3), ((26, 23), 9, 3), ((28, 30), 19, 7)])
def test_ig_map_matches_naive_oracle(shape, k, c):
    img = np.random.default_rng(3).random(shape)
    ig = compute_ig_map(img, LigParams(k, c))
    np.testing.assert_allclose(ig, ig_oracle(img, k, c), atol=1e-9, rtol=0)


def test_ig_map_border_band_zero_and_nonnegative():
    img = np.random.default_rng(4).random((40, 50))
    ig = compute_ig_map(img)
    assert ig.min() >= 0
    r = 3
    assert not ig[:r].any() and not ig[-r:].any() and not ig[:, :r].any() and not ig[:, -r:].any()


def test_ig_map_exactly_patch_sized_frame():
    img = 0.1 + gaussian(7)
    ig = compute_ig_map(img)
    assert ig.shape == (7, 7)
    assert ig[3, 3] == pytest.approx(intensity_oracle(img, 3) * gradient_oracle(img, 8, 3))


def test_rejects_frame_smaller_than_patch():
    with pytest.raises(ValueError):
        compute_ig_map(np.zeros((6, 40)))
    with pytest.raises(ValueError):
        compute_ig_map(np.zeros((40, 18)), LigParams(19))


def test_parallel_bands_bit_identical():
    img = np.random.default_rng(5).random((150, 97))
    seq = compute_ig_map(img, workers=1)
    for w in (2, 3, 8):
        assert np.array_equal(seq, compute_ig_map(img, workers=w))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.0, 0.5))
def test_ig_invariant_to_additive_offset(seed, c):
    img = np.random.default_rng(seed).random((20, 20)) * 0.5
    np.testing.assert_allclose(compute_ig_map(img + c), compute_ig_map(img), atol=1e-9, rtol=0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.05, 1.0))
def test_ig_scales_quadratically(seed, alpha):
    img = np.random.default_rng(seed).random((20, 20))
    base = compute_ig_map(img)
    scaled = compute_ig_map(alpha * img)
    np.testing.assert_allclose(scaled, alpha**2 * base, rtol=1e-6, atol=1e-15)


def test_lig_params_validation():
    assert LigParams(7).center == 3 and LigParams(19).center == 7
    for kw in ({"patch_size": 6}, {"patch_size": 7, "center_size": 9}, {"sector_count": 3}, {"top_fraction": 0}):
        with pytest.raises(ValueError):
            LigParams(**kw)


# --- threshold and binarization --------------------------------------------------


def test_threshold_all_zero_map():
    assert adaptive_threshold(np.zeros((50, 50))) == 0.0


def test_threshold_single_top_value():
    ig = np.arange(1, 10001, dtype=float).reshape(100, 100)
    assert threshold_count(ig.size, 1e-4) == 1
    assert adaptive_threshold(ig, 1e-4) == threshold_oracle(ig, 1e-4)[1] == 10000


def test_threshold_four_top_values():
    ig = np.arange(1, 40001, dtype=float).reshape(200, 200)
    assert threshold_count(ig.size, 1e-4) == 4
    assert threshold_oracle(ig, 1e-4)[1] == 39998.5
    assert adaptive_threshold(ig, 1e-4) == 39998.5


def test_threshold_count_for_vga_frame():
    assert threshold_count(640 * 480, 1e-4) == 31


def test_binarize_examples():
    assert not binarize(np.zeros((10, 10)), 0.0).any()
    ig = np.zeros((10, 10))
    ig[4, 7] = 0.3
    mask = binarize(ig, 0.3)
    assert mask.sum() == 1 and mask[4, 7]
    with pytest.raises(ValueError):
        binarize(ig, -1.0)


def test_binarize_random_matches_brute_force():
    rng = np.random.default_rng(6)
    ig = rng.random((60, 60)) * (rng.random((60, 60)) > 0.5)
    t = threshold_oracle(ig, 0.01)[1]
    mask = binarize(ig, t)
    brute = {(y, x) for y in range(60) for x in range(60) if ig[y, x] >= t and ig[y, x] > 0}
    assert set(zip(*np.nonzero(mask))) == brute


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(0, 1), st.floats(0, 1))
def test_binarize_monotone_in_threshold(seed, t1, t2):
    ig = np.random.default_rng(seed).random((15, 15))
    lo, hi = sorted((t1, t2))
    assert not (binarize(ig, hi) & ~binarize(ig, lo)).any()


def test_top_fraction_mask_is_subset_of_nonzero_mean_mask():
    rng = np.random.default_rng(7)
    for _ in range(5):
        img = np.clip(blob_frame(96, *rng.integers(20, 70, 2)) + rng.normal(0, 0.01, (96, 96)), 0, 1)
        ig = compute_ig_map(img)
        t_old, t_new = nonzero_mean_threshold(ig), adaptive_threshold(ig)
        assert t_new >= t_old
        old, new = binarize(ig, t_old), binarize(ig, t_new)
        assert not (new & ~old).any()
        assert new.sum() < old.sum()


def test_top_values_selected_set_is_exact():
    ig = np.random.default_rng(8).random((37, 41))
    top = top_values(ig, 0.003)
    ref, mean = threshold_oracle(ig, 0.003)
    assert top.tolist() == ref
    assert adaptive_threshold(ig, 0.003) == pytest.approx(mean, abs=1e-12)
