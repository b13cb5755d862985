"""Round trips and error handling for every on-disk format."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linecalib.errors import ParseError
from linecalib.fileio import (
    format_extrinsic,
    load_cloud,
    load_extrinsic,
    load_image,
    load_intrinsics,
    load_pgm,
    parse_kv_text,
    save_cloud,
    save_extrinsic,
    save_pgm,
    save_ppm,
)
from linecalib.geometry import Extrinsic

MANY = settings(max_examples=1000, deadline=None)


# ---------------------------------------------------------------------------
# key = value text


def test_parse_kv_basics():
    kv = parse_kv_text("a = 1\n# comment\n\nb = two words  # trailing\n")
    assert kv == {"a": "1", "b": "two words"}


def test_parse_kv_errors():
    with pytest.raises(ParseError):
        parse_kv_text("just some words\n")
    with pytest.raises(ParseError):
        parse_kv_text("a = 1\na = 2\n")


@MANY
@given(
    st.dictionaries(
        st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,10}", fullmatch=True),
        st.from_regex(r"[!-~][ -~]{0,20}", fullmatch=True).map(str.strip).filter(
            lambda v: v and "#" not in v and "=" not in v
        ),
        max_size=6,
    )
)
def test_parse_kv_round_trip(kv):
    text = "".join(f"{k} = {v}\n" for k, v in kv.items())
    assert parse_kv_text(text) == kv


# ---------------------------------------------------------------------------
# intrinsics / extrinsic


def test_intrinsics_round_trip(tmp_path):
    p = tmp_path / "intr.txt"
    p.write_text(
        "fx = 430.0\nfy = 430.0\ncx = 609.6\ncy = 172.9\n"
        "width = 1242\nheight = 375\n",
        encoding="utf-8",
    )
    k = load_intrinsics(p)
    assert (k.fx, k.fy, k.cx, k.cy, k.width, k.height) == (
        430.0, 430.0, 609.6, 172.9, 1242, 375,
    )


def test_intrinsics_rejects_unknown_and_missing(tmp_path):
    p = tmp_path / "intr.txt"
    p.write_text("fx = 1\nfy = 1\ncx = 1\ncy = 1\nwidth = 2\nheight = 2\nk1 = 0.1\n")
    with pytest.raises(ParseError):
        load_intrinsics(p)
    p.write_text("fx = 430\n")
    with pytest.raises(ParseError):
        load_intrinsics(p)
    with pytest.raises(ParseError):
        load_intrinsics(tmp_path / "nope.txt")


@MANY
@given(
    st.tuples(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3)).map(np.array),
    st.tuples(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5)).map(np.array),
)
def test_extrinsic_text_round_trip_exact(r, t):
    e = Extrinsic(r, t)
    text = format_extrinsic(e)
    kv = parse_kv_text(text)
    back = Extrinsic(
        np.array([float(x) for x in kv["r"].replace('"', "").split()]),
        np.array([float(x) for x in kv["t"].replace('"', "").split()]),
    )
    # %.17g is lossless for doubles
    assert np.array_equal(back.r, e.r)
    assert np.array_equal(back.t, e.t)


def test_extrinsic_file_round_trip(tmp_path):
    e = Extrinsic(np.array([0.01, -0.02, 0.03]), np.array([0.06, -0.3, -0.15]))
    p = tmp_path / "extr.txt"
    save_extrinsic(p, e)
    back = load_extrinsic(p)
    assert np.array_equal(back.r, e.r) and np.array_equal(back.t, e.t)


def test_extrinsic_missing_key(tmp_path):
    p = tmp_path / "extr.txt"
    p.write_text('r = "0 0 0"\n')
    with pytest.raises(ParseError):
        load_extrinsic(p)
    p.write_text('r = "0 0"\nt = "0 0 0"\n')
    with pytest.raises(ParseError):
        load_extrinsic(p)


# ---------------------------------------------------------------------------
# point clouds


def test_cloud_binary_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(100, 4))
    p = tmp_path / "cloud.bin"
    save_cloud(p, pts)
    back = load_cloud(p)
    assert back.shape == (100, 4)
    assert np.abs(back - pts).max() < 1e-4  # float32 storage


def test_cloud_ascii(tmp_path):
    p = tmp_path / "cloud.txt"
    p.write_text("1 2 3 0.5\n4 5 6 0.25\n")
    back = load_cloud(p)
    assert np.array_equal(back, [[1, 2, 3, 0.5], [4, 5, 6, 0.25]])


def test_cloud_errors(tmp_path):
    p = tmp_path / "cloud.bin"
    p.write_bytes(b"\x00" * 17)
    with pytest.raises(ParseError):
        load_cloud(p)
    p.write_bytes(np.array([np.inf, 0, 0, 0], dtype="<f4").tobytes())
    with pytest.raises(ParseError):
        load_cloud(p)
    with pytest.raises(ParseError):
        load_cloud(tmp_path / "nope.bin")


# ---------------------------------------------------------------------------
# PGM / PPM


def test_pgm_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    img = rng.integers(0, 256, size=(37, 53), dtype=np.uint8)
    p = tmp_path / "img.pgm"
    save_pgm(p, img)
    assert np.array_equal(load_pgm(p), img)
    rgb = load_image(p)
    assert rgb.shape == (37, 53, 3)
    assert np.array_equal(rgb[:, :, 0], img)


def test_ppm_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    img = rng.integers(0, 256, size=(16, 24, 3), dtype=np.uint8)
    p = tmp_path / "img.ppm"
    save_ppm(p, img)
    assert np.array_equal(load_image(p), img)


def test_pgm_header_with_comment(tmp_path):
    p = tmp_path / "img.pgm"
    p.write_bytes(b"P5\n# a comment\n2 2\n255\n\x00\x01\x02\x03")
    img = load_pgm(p)
    assert np.array_equal(img, [[0, 1], [2, 3]])


def test_pnm_errors(tmp_path):
    p = tmp_path / "bad"
    p.write_bytes(b"P4\n1 1\n255\n\x00")
    with pytest.raises(ParseError):
        load_pgm(p)
    p.write_bytes(b"P5\n2 2\n255\n\x00")  # truncated pixels
    with pytest.raises(ParseError):
        load_pgm(p)
    p.write_bytes(b"P5\n2 2\n65535\n" + b"\x00" * 8)
    with pytest.raises(ParseError):
        load_pgm(p)
    p.write_bytes(b"P6\n2 2\n255\n" + b"\x00" * 4)  # not enough rgb bytes
    with pytest.raises(ParseError):
        load_image(p)
