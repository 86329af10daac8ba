"""Test signals, grayscale images, PSNR and file IO."""

from __future__ import annotations

import csv
import io
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import MalformedHeader, ShapeMismatch, TruncatedData


@dataclass(frozen=True)
class Signal1D:
    """A real signal sampled on a strictly increasing grid."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or values.shape != grid.shape:
            raise ShapeMismatch(
                f"grid and values must be 1-D of equal length, got {grid.shape} and {values.shape}"
            )
        if grid.size > 1 and not np.all(np.diff(grid) > 0):
            raise ValueError("grid must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("signal values must be finite")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.grid.size

    def to_csv(self, path):
        rows = [("x", "value")]
        rows += [(_fmt(x), _fmt(v)) for x, v in zip(self.grid, self.values)]
        write_atomic(path, _csv_text(rows))

    @classmethod
    def from_csv(cls, path):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1])


@dataclass(frozen=True)
class ImageGray:
    """Grayscale image with pixel values in [0, 1], indexed ``pixels[row, col]``."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=float)
        if px.ndim != 2:
            raise ShapeMismatch(f"pixels must be a 2-D array, got shape {px.shape}")
        object.__setattr__(self, "pixels", np.clip(px, 0.0, 1.0))

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]


def _fmt(value):
    return format(float(value), ".17g")


def _csv_text(rows):
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def write_atomic(path, data):
    """Write ``data`` (str or bytes) to ``path`` via a temp file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, (bytes, bytearray)) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_rows_csv(path, header, rows):
    """Write rows of mixed strings and numbers; numbers get 17 significant digits."""
    def cell(v):
        return v if isinstance(v, str) else _fmt(v)

    write_atomic(path, _csv_text([tuple(header)] + [tuple(cell(v) for v in row) for row in rows]))


def write_table_csv(path, header, columns):
    """Write equal-length columns as CSV with 17 significant digits."""
    columns = [np.asarray(c, dtype=float).ravel() for c in columns]
    rows = [tuple(header)]
    rows += [tuple(_fmt(c[i]) for c in columns) for i in range(columns[0].size if columns else 0)]
    write_atomic(path, _csv_text(rows))


# --- band-limited generator ---------------------------------------------------


def bandlimited_coefficients(num_terms, seed):
    if num_terms < 1:
        raise ValueError("num_terms must be >= 1")
    return np.random.default_rng(seed).standard_normal(num_terms)


def gen_bandlimited(max_freq, num_terms, seed=0, grid=None, coeffs=None):
    """Random signal band-limited to ``max_freq`` (cycles per unit length).

    The signal is ``s(x) = sum_n c_n sinc(2 W (x - n / 2W))`` for
    ``n = 1..num_terms``, with standard-normal ``c_n`` drawn from ``seed``
    unless ``coeffs`` is given. Each term is a Nyquist-rate sinc, so
    ``s(n / 2W) = c_n`` exactly.

    Returns
    -------
    signal : Signal1D
        Samples on ``grid`` (default: 16 points per Nyquist interval over
        ``[0, (num_terms + 1) / 2W]``).
    evaluate : callable
        Exact evaluator for arbitrary ``x``.
    """
    if max_freq <= 0:
        raise ValueError("max_freq must be positive")
    if coeffs is None:
        coeffs = bandlimited_coefficients(num_terms, seed)
    else:
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (num_terms,):
            raise ShapeMismatch("coeffs must have length num_terms")
    rate = 2.0 * max_freq
    centers = np.arange(1, num_terms + 1) / rate

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        return np.sinc(rate * (x[..., None] - centers)) @ coeffs

    if grid is None:
        grid = np.linspace(0.0, (num_terms + 1) / rate, 16 * (num_terms + 1) + 1)
    grid = np.asarray(grid, dtype=float)
    return Signal1D(grid, evaluate(grid)), evaluate


def sinc_interpolate(samples, rate, x, offset=0.0):
    """Shannon synthesis ``sum_n samples[n] sinc(rate * (x - offset) - n)``."""
    samples = np.asarray(samples, dtype=float)
    n = np.arange(samples.size)
    x = np.asarray(x, dtype=float)
    return np.sinc(rate * (x[..., None] - offset) - n) @ samples


# --- metrics -------------------------------------------------------------------


def psnr(reference, candidate):
    """Peak signal-to-noise ratio in dB for data on a unit range.

    Returns ``inf`` when the inputs are identical.
    """
    reference = np.asarray(reference, dtype=float)
    candidate = np.asarray(candidate, dtype=float)
    if reference.shape != candidate.shape:
        raise ShapeMismatch(f"shapes differ: {reference.shape} vs {candidate.shape}")
    mse = float(np.mean((reference - candidate) ** 2))
    if mse == 0.0:
        return float("inf")
    return -10.0 * np.log10(mse)


def range_psnr(reference, candidate):
    """PSNR after mapping both arrays with the reference's min/max onto [0, 1]."""
    reference = np.asarray(reference, dtype=float)
    lo, hi = reference.min(), reference.max()
    scale = hi - lo if hi > lo else 1.0
    return psnr((reference - lo) / scale, (np.asarray(candidate, dtype=float) - lo) / scale)


# --- PGM -----------------------------------------------------------------------


def _read_token(data, pos):
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise MalformedHeader("unexpected end of PGM header")
    return data[start:pos], pos


def parse_pgm(data):
    if data[:2] != b"P5":
        raise MalformedHeader("not a binary PGM (magic P5 expected)")
    pos = 2
    fields = []
    for _ in range(3):
        tok, pos = _read_token(data, pos)
        try:
            fields.append(int(tok))
        except ValueError:
            raise MalformedHeader(f"non-integer header field {tok!r}") from None
    width, height, maxval = fields
    if width <= 0 or height <= 0:
        raise MalformedHeader("width and height must be positive")
    if maxval != 255:
        raise MalformedHeader(f"only maxval 255 is supported, got {maxval}")
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise MalformedHeader("missing whitespace after maxval")
    pos += 1
    raster = data[pos : pos + width * height]
    if len(raster) < width * height:
        raise TruncatedData(f"expected {width * height} bytes, found {len(raster)}")
    pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    return ImageGray(pixels / 255.0)


def load_pgm(path):
    return parse_pgm(Path(path).read_bytes())


def encode_pgm(image):
    raw = np.floor(image.pixels * 255.0 + 0.5).astype(np.uint8)
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    return header + raw.tobytes()


def save_pgm(image, path):
    write_atomic(path, encode_pgm(image))


def image_to_dataset(image):
    """Pixel-centre coordinates in [0, 1]^2 and targets, row-major.

    Coordinates are ``((row + 0.5) / height, (col + 0.5) / width)``.
    """
    rows = (np.arange(image.height) + 0.5) / image.height
    cols = (np.arange(image.width) + 0.5) / image.width
    rr, cc = np.meshgrid(rows, cols, indexing="ij")
    coords = np.column_stack([rr.ravel(), cc.ravel()])
    return coords, image.pixels.reshape(-1, 1).copy()


def synthetic_image(size=64, seed=0):
    """Deterministic smooth-plus-edges test image for desk-scale experiments."""
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:size, 0:size] / size
    img = 0.5 + 0.25 * np.sin(2 * np.pi * (3 * x + rng.uniform())) * np.cos(2 * np.pi * 2 * y)
    img += 0.2 * ((x - 0.5) ** 2 + (y - 0.5) ** 2 < 0.08)
    return ImageGray(np.clip(img, 0.0, 1.0))
