"""Distance fields, height maps, and Hough extraction, against brute force."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linecalib.errors import EmptyTarget, NoLines
from linecalib.image_features import (
    HeightMap,
    SemanticMask,
    _l1_distance_with_border,
    hough_lines,
    idt_height_map,
    l1_distance_field,
)

MANY = settings(max_examples=1000, deadline=None)


def random_mask(rng, h, w, p=0.15):
    bits = rng.random((h, w)) < p
    if not bits.any():
        bits[rng.integers(0, h), rng.integers(0, w)] = True
    if bits.all():
        bits[rng.integers(0, h), rng.integers(0, w)] = False
    return SemanticMask("lane", bits)


def brute_l1(target: np.ndarray) -> np.ndarray:
    h, w = target.shape
    ys, xs = np.nonzero(target)
    out = np.empty((h, w), dtype=np.int64)
    for y in range(h):
        for x in range(w):
            out[y, x] = np.min(np.abs(ys - y) + np.abs(xs - x))
    return out


def brute_l1_with_border(bits: np.ndarray) -> np.ndarray:
    """Distance to the nearest unset pixel, with a virtual unset ring."""
    padded = np.pad(bits, 1, constant_values=False)
    return brute_l1(~padded)[1:-1, 1:-1]


# ---------------------------------------------------------------------------
# distance fields


def test_l1_brute_force_equivalence_100_masks():
    rng = np.random.default_rng(7)
    for _ in range(100):
        mask = random_mask(rng, 32, 32)
        assert np.array_equal(
            l1_distance_field(mask, from_set=True), brute_l1(mask.bits)
        )
        assert np.array_equal(
            l1_distance_field(mask, from_set=False), brute_l1(~mask.bits)
        )


def test_l1_single_pixel_examples():
    bits = np.zeros((8, 8), dtype=bool)
    bits[0, 0] = True
    d = l1_distance_field(SemanticMask("lane", bits), from_set=True)
    assert d[4, 3] == 7
    assert d[0, 0] == 0


def test_l1_empty_target_raises():
    bits = np.zeros((4, 4), dtype=bool)
    with pytest.raises(EmptyTarget):
        l1_distance_field(SemanticMask("lane", bits), from_set=True)
    with pytest.raises(EmptyTarget):
        l1_distance_field(SemanticMask("lane", ~bits), from_set=False)


@MANY
@given(st.integers(0, 2**32 - 1))
def test_l1_lipschitz_over_4_neighbors(seed):
    rng = np.random.default_rng(seed)
    mask = random_mask(rng, 16, 16, p=float(rng.uniform(0.02, 0.6)))
    d = l1_distance_field(mask, from_set=True)
    assert np.abs(np.diff(d, axis=0)).max() <= 1
    assert np.abs(np.diff(d, axis=1)).max() <= 1


# ---------------------------------------------------------------------------
# inverse distance height map


def brute_idt(bits: np.ndarray, g0: float, g1: float) -> np.ndarray:
    # direct evaluation of the max-form: max over target pixels of gamma^L1,
    # computed as gamma^(min distance) with identical float exponentiation
    d_in = brute_l1_with_border(bits)
    d_out = brute_l1(bits)
    return np.where(
        bits,
        np.power(g0, d_in.astype(float)),
        np.power(g1, d_out.astype(float)),
    )


def test_idt_brute_force_bitwise_equality_100_masks():
    rng = np.random.default_rng(11)
    for _ in range(100):
        mask = random_mask(rng, 32, 32)
        ours = idt_height_map(mask, 0.98, 0.90).values
        ref = brute_idt(mask.bits, 0.98, 0.90)
        assert np.array_equal(ours, ref)  # bitwise, not approximate


def test_idt_trivial_exponents():
    bits = np.zeros((9, 9), dtype=bool)
    bits[3:6, 3:6] = True
    hm = idt_height_map(SemanticMask("lane", bits), 0.98, 0.90)
    assert hm.values[3, 3] == 0.98  # inside, adjacent to the boundary
    assert hm.values[4, 4] == 0.98**2
    assert hm.values[4, 0] == 0.90**3  # outside at L1 distance 3


@MANY
@given(st.integers(0, 2**32 - 1), st.floats(0.5, 0.99), st.floats(0.5, 0.99))
def test_idt_monotone_in_distance(seed, g0, g1):
    rng = np.random.default_rng(seed)
    mask = random_mask(rng, 16, 16, p=float(rng.uniform(0.05, 0.5)))
    hm = idt_height_map(mask, g0, g1)
    d_out = l1_distance_field(mask, from_set=True)
    d_in = _l1_distance_with_border(mask, from_set=False)
    v = hm.values
    assert ((v > 0) & (v <= 1)).all()
    # value depends only on the respective L1 distance, decreasing in it
    outside = ~mask.bits
    for d in np.unique(d_out[outside]):
        vals = v[outside & (d_out == d)]
        assert np.all(vals == vals[0])
    ds = d_out[outside].astype(float)
    assert np.all((v[outside] < v[outside].max() + 1e-12) == True)  # noqa: E712
    order = np.argsort(ds)
    assert np.all(np.diff(v[outside].ravel()[order]) <= 1e-15)
    inside = mask.bits
    ds_in = d_in[inside].astype(float)
    order = np.argsort(ds_in)
    assert np.all(np.diff(v[inside].ravel()[order]) <= 1e-15)


def test_idt_rejects_bad_gamma_and_empty():
    bits = np.zeros((4, 4), dtype=bool)
    bits[1, 1] = True
    with pytest.raises(ValueError):
        idt_height_map(SemanticMask("lane", bits), 1.5, 0.9)
    with pytest.raises(EmptyTarget):
        idt_height_map(SemanticMask("lane", np.zeros((4, 4), dtype=bool)), 0.98, 0.9)


# ---------------------------------------------------------------------------
# height map sampling


def test_heightmap_sampling_out_of_frame_zero():
    hm = HeightMap(np.ones((4, 4)))
    assert hm.sample(np.array([-1]), np.array([0]))[0] == 0.0
    assert hm.sample_bilinear(np.array([3.5]), np.array([1.0]))[0] == 0.0
    assert hm.sample_bilinear(np.array([3.0]), np.array([3.0]))[0] == 1.0


@MANY
@given(st.integers(0, 2**32 - 1))
def test_bilinear_interpolates_between_neighbors(seed):
    rng = np.random.default_rng(seed)
    grid = rng.random((5, 5))
    hm = HeightMap(grid)
    u = float(rng.uniform(0, 3.999))
    v = float(rng.uniform(0, 3.999))
    val = hm.sample_bilinear(np.array([u]), np.array([v]))[0]
    u0, v0 = int(u), int(v)
    corners = grid[v0 : v0 + 2, u0 : u0 + 2]
    assert corners.min() - 1e-12 <= val <= corners.max() + 1e-12
    # exact at integer pixels
    val = hm.sample_bilinear(np.array([float(u0)]), np.array([float(v0)]))[0]
    assert abs(val - grid[v0, u0]) < 1e-12


# ---------------------------------------------------------------------------
# hough lines


def draw_line(bits, a, b, c):
    h, w = bits.shape
    for u in range(w):
        for v in range(h):
            if abs(a * u + b * v + c) <= 0.5:
                bits[v, u] = True


def test_hough_recovers_drawn_lines():
    bits = np.zeros((100, 200), dtype=bool)
    draw_line(bits, 0.6, 0.8, -90.0)
    draw_line(bits, 0.8, -0.6, -20.0)
    out = hough_lines(SemanticMask("pole", bits), min_support=30)
    assert len(out) >= 2
    got = sorted((round(l.line.a, 1), round(l.line.b, 1)) for l in out[:2])
    assert got == [(0.6, 0.8), (0.8, -0.6)]


def test_hough_support_order_and_threshold():
    bits = np.zeros((120, 120), dtype=bool)
    draw_line(bits, 1.0, 0.0, -30.0)   # vertical, 120 px
    bits[10, 40:100] = True            # horizontal, 60 px
    out = hough_lines(SemanticMask("pole", bits), min_support=50)
    assert all(
        out[i].support >= out[i + 1].support for i in range(len(out) - 1)
    )
    assert all(s.support >= 50 for s in out)


@MANY
@given(st.integers(0, 2**32 - 1))
def test_hough_translation_consistency(seed):
    rng = np.random.default_rng(seed)
    bits = np.zeros((64, 64), dtype=bool)
    v0 = int(rng.integers(12, 30))
    bits[v0, 5:45] = True
    du, dv = int(rng.integers(0, 15)), int(rng.integers(0, 15))
    shifted = np.zeros_like(bits)
    shifted[v0 + dv, 5 + du : 45 + du] = True
    a = hough_lines(SemanticMask("pole", bits), min_support=30)[0]
    b = hough_lines(SemanticMask("pole", shifted), min_support=30)[0]
    assert a.support == b.support
    # horizontal line: rho shifts by exactly dv
    assert abs(b.line.rho - (a.line.rho + dv)) < 1e-9


def test_hough_lane_near_horizontal_rejected():
    bits = np.zeros((64, 128), dtype=bool)
    bits[30, 10:120] = True
    with pytest.raises(NoLines):
        hough_lines(SemanticMask("lane", bits), min_support=30)
    # same mask accepted for the pole class
    assert hough_lines(SemanticMask("pole", bits), min_support=30)


def test_hough_needs_support():
    bits = np.zeros((32, 32), dtype=bool)
    bits[4, 4:10] = True
    with pytest.raises(NoLines):
        hough_lines(SemanticMask("pole", bits), min_support=50)
