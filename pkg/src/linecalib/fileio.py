"""On-disk formats: intrinsics/extrinsic text files, point clouds, PGM/PPM.

Text files are UTF-8 `key = value` lines; `#` starts a comment.  Point
clouds are the usual velodyne layout (contiguous little-endian float32
x, y, z, intensity records) with an ASCII fallback of one
`x y z intensity` line per point.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ParseError
from .geometry import Extrinsic, Intrinsics

_INTRINSIC_KEYS = {"fx", "fy", "cx", "cy", "width", "height"}


def parse_kv_text(text: str, path="<string>") -> dict:
    """Parse `key = value` lines, ignoring comments and blank lines."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if key in out:
            raise ParseError(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def load_kv_file(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ParseError(f"file not found: {path}")
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"{path}: not UTF-8 text ({e})") from e
    return parse_kv_text(text, path=str(path))


def load_intrinsics(path) -> Intrinsics:
    kv = load_kv_file(path)
    extra = set(kv) - _INTRINSIC_KEYS
    if extra:
        # distortion models are deliberately rejected: rectified pinhole only
        raise ParseError(f"{path}: unsupported intrinsics keys {sorted(extra)}")
    missing = _INTRINSIC_KEYS - set(kv)
    if missing:
        raise ParseError(f"{path}: missing intrinsics keys {sorted(missing)}")
    try:
        return Intrinsics(
            fx=float(kv["fx"]),
            fy=float(kv["fy"]),
            cx=float(kv["cx"]),
            cy=float(kv["cy"]),
            width=int(kv["width"]),
            height=int(kv["height"]),
        )
    except ValueError as e:
        raise ParseError(f"{path}: {e}") from e


def _parse_vec3(s: str, what: str):
    parts = s.replace('"', "").split()
    if len(parts) != 3:
        raise ParseError(f"{what}: expected 3 components, got {s!r}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError as e:
        raise ParseError(f"{what}: {e}") from e


def load_extrinsic(path) -> Extrinsic:
    kv = load_kv_file(path)
    for key in ("r", "t"):
        if key not in kv:
            raise ParseError(f"{path}: missing key {key!r}")
    return Extrinsic(_parse_vec3(kv["r"], f"{path}: r"), _parse_vec3(kv["t"], f"{path}: t"))


def format_extrinsic(e: Extrinsic) -> str:
    """Serialize an extrinsic; includes the derived 3x4 matrix as comments."""
    R = e.matrix()
    lines = [
        'r = "%.17g %.17g %.17g"' % tuple(e.r),
        't = "%.17g %.17g %.17g"' % tuple(e.t),
        "#",
        "# derived [R | t], row-major:",
    ]
    for i in range(3):
        lines.append(
            "#   % .9f % .9f % .9f % .9f" % (R[i, 0], R[i, 1], R[i, 2], e.t[i])
        )
    return "\n".join(lines) + "\n"


def save_extrinsic(path, e: Extrinsic) -> None:
    Path(path).write_text(format_extrinsic(e), encoding="utf-8")


def _try_ascii_cloud(data: bytes):
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError:
        return None
    rows = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            return None
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            return None
    if not rows:
        return None
    return np.array(rows, dtype=np.float64)


def load_cloud(path) -> np.ndarray:
    """Load an (N, 4) float array of x, y, z, intensity."""
    path = Path(path)
    if not path.exists():
        raise ParseError(f"file not found: {path}")
    data = path.read_bytes()
    ascii_pts = _try_ascii_cloud(data)
    if ascii_pts is not None:
        return ascii_pts
    if len(data) == 0 or len(data) % 16 != 0:
        raise ParseError(
            f"{path}: binary cloud size {len(data)} is not a multiple of 16 bytes"
        )
    pts = np.frombuffer(data, dtype="<f4").reshape(-1, 4).astype(np.float64)
    if not np.isfinite(pts).all():
        raise ParseError(f"{path}: cloud contains non-finite values")
    return pts


def save_cloud(path, pts: np.ndarray) -> None:
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 4)
    Path(path).write_bytes(pts.astype("<f4").tobytes())


def _read_pnm_header(data: bytes, path):
    """Parse a PGM/PPM header; returns (magic, width, height, maxval, offset)."""
    pos = 0
    fields = []
    if data[:2] not in (b"P5", b"P6"):
        raise ParseError(f"{path}: not a binary PGM/PPM (magic {data[:2]!r})")
    magic = data[:2].decode()
    pos = 2
    while len(fields) < 3:
        if pos >= len(data):
            raise ParseError(f"{path}: truncated header at byte {pos}")
        ch = data[pos : pos + 1]
        if ch == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
        elif ch.isspace():
            pos += 1
        elif ch.isdigit():
            start = pos
            while pos < len(data) and data[pos : pos + 1].isdigit():
                pos += 1
            fields.append(int(data[start:pos]))
        else:
            raise ParseError(f"{path}: bad header byte {ch!r} at offset {pos}")
    pos += 1  # single whitespace after maxval
    width, height, maxval = fields
    if maxval != 255:
        raise ParseError(f"{path}: only maxval 255 supported, got {maxval}")
    return magic, width, height, maxval, pos


def load_pgm(path):
    """Load a binary (P5) 8-bit PGM as a (h, w) uint8 array."""
    path = Path(path)
    if not path.exists():
        raise ParseError(f"file not found: {path}")
    data = path.read_bytes()
    magic, w, h, _, off = _read_pnm_header(data, path)
    if magic != "P5":
        raise ParseError(f"{path}: expected P5, got {magic}")
    need = w * h
    if len(data) - off < need:
        raise ParseError(f"{path}: expected {need} pixel bytes at offset {off}")
    return np.frombuffer(data[off : off + need], dtype=np.uint8).reshape(h, w)


def load_image(path):
    """Load P5 or P6; returns (h, w, 3) uint8 (grayscale replicated)."""
    path = Path(path)
    if not path.exists():
        raise ParseError(f"file not found: {path}")
    data = path.read_bytes()
    magic, w, h, _, off = _read_pnm_header(data, path)
    ch = 1 if magic == "P5" else 3
    need = w * h * ch
    if len(data) - off < need:
        raise ParseError(f"{path}: expected {need} pixel bytes at offset {off}")
    img = np.frombuffer(data[off : off + need], dtype=np.uint8)
    if ch == 1:
        return np.repeat(img.reshape(h, w, 1), 3, axis=2)
    return img.reshape(h, w, 3).copy()


def save_pgm(path, img: np.ndarray) -> None:
    img = np.asarray(img, dtype=np.uint8)
    h, w = img.shape
    header = f"P5\n{w} {h}\n255\n".encode("ascii")
    Path(path).write_bytes(header + img.tobytes())


def save_ppm(path, img: np.ndarray) -> None:
    img = np.asarray(img, dtype=np.uint8)
    h, w, _ = img.shape
    header = f"P6\n{w} {h}\n255\n".encode("ascii")
    Path(path).write_bytes(header + img.tobytes())
