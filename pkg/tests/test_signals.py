import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sincinr.errors import MalformedHeader, ShapeMismatch, TruncatedData
from sincinr.signals import (
    ImageGray,
    Signal1D,
    encode_pgm,
    gen_bandlimited,
    image_to_dataset,
    load_pgm,
    parse_pgm,
    psnr,
    range_psnr,
    save_pgm,
    sinc_interpolate,
    synthetic_image,
)


def test_signal_validation():
    with pytest.raises(ShapeMismatch):
        Signal1D([0, 1, 2], [1, 2])
    with pytest.raises(ValueError):
        Signal1D([0, 2, 1], [1, 2, 3])
    with pytest.raises(ValueError):
        Signal1D([0, 1], [1, np.nan])


def test_signal_csv_round_trip(tmp_path):
    sig = Signal1D([0.0, 0.1, 1 / 3], [np.pi, -1e-300, 2.5e7])
    path = tmp_path / "s.csv"
    sig.to_csv(path)
    assert path.read_text().splitlines()[0] == "x,value"
    back = Signal1D.from_csv(path)
    np.testing.assert_array_equal(back.grid, sig.grid)
    np.testing.assert_array_equal(back.values, sig.values)


# --- band-limited generator ----------------------------------------------------------


def test_single_term_interpolates():
    _, f = gen_bandlimited(2.0, 1, coeffs=[1.0])
    assert f(1 / 4) == pytest.approx(1.0, abs=1e-15)


def test_samples_at_nyquist_points_are_coefficients():
    sig, f = gen_bandlimited(3.0, 6, seed=7)
    from sincinr.signals import bandlimited_coefficients

    np.testing.assert_allclose(f(np.arange(1, 7) / 6.0), bandlimited_coefficients(6, 7), atol=1e-14)


def test_same_seed_same_signal():
    a, _ = gen_bandlimited(4.0, 8, seed=11)
    b, _ = gen_bandlimited(4.0, 8, seed=11)
    c, _ = gen_bandlimited(4.0, 8, seed=12)
    np.testing.assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_nyquist_resampling_reproduces_signal():
    w = 2.0
    _, f = gen_bandlimited(w, 10, seed=1)
    rate = 2 * w
    n = np.arange(-2000, 2001)
    samples = f(n / rate)
    x = np.linspace(0.5, 2.5, 101)
    np.testing.assert_allclose(sinc_interpolate(samples, rate, x, offset=n[0] / rate), f(x), atol=1e-3)


def test_energy_is_band_limited():
    w = 4.0
    x = np.linspace(-60.0, 61.0, 4096)
    _, f = gen_bandlimited(w, 8, seed=0)
    spec = np.abs(np.fft.rfft(f(x))) ** 2
    freqs = np.fft.rfftfreq(x.size, d=x[1] - x[0])
    assert spec[freqs > 1.25 * w].sum() <= 0.01 * spec.sum()


# --- metrics -----------------------------------------------------------------------------


def test_psnr_examples():
    a = np.linspace(0, 1, 100)
    assert psnr(a, a) == np.inf
    assert psnr(a, a + 0.1) == pytest.approx(20.0, abs=1e-9)
    with pytest.raises(ShapeMismatch):
        psnr(a, a[:-1])


def test_psnr_uniform_noise():
    rng = np.random.default_rng(0)
    img = rng.uniform(0, 1, (64, 64))
    noisy = img + rng.uniform(-0.05, 0.05, img.shape)
    assert psnr(img, noisy) == pytest.approx(-10 * np.log10(0.01 / 12), abs=0.5)


@settings(max_examples=30, deadline=None)
@given(
    a=arrays(np.float64, 16, elements=st.floats(0, 1)),
    b=arrays(np.float64, 16, elements=st.floats(0, 1)),
)
def test_psnr_symmetric(a, b):
    assert psnr(a, b) == psnr(b, a)


def test_range_psnr_scale_invariant():
    ref = np.linspace(-40, 40, 200)
    # offset of 1% of the range
    assert range_psnr(ref, ref + 0.8) == pytest.approx(40.0, abs=1e-9)
    assert range_psnr(ref, ref + 0.8) == pytest.approx(range_psnr(ref / 80, (ref + 0.8) / 80), abs=1e-9)


# --- PGM ------------------------------------------------------------------------------------


def test_pgm_white_pixel():
    assert parse_pgm(b"P5\n1 1\n255\n\xff").pixels[0, 0] == 1.0


def test_pgm_gradient_scaling():
    img = parse_pgm(b"P5 2 2 255\n" + bytes([0, 85, 170, 255]))
    np.testing.assert_allclose(img.pixels.ravel(), [0, 1 / 3, 2 / 3, 1], atol=1e-15)


def test_pgm_comments_allowed():
    img = parse_pgm(b"P5\n# made by hand\n2 1\n# depth\n255\n\x00\x80")
    assert img.pixels.shape == (1, 2)


@pytest.mark.parametrize(
    "data, error",
    [
        (b"P2\n1 1\n255\n0", MalformedHeader),
        (b"P5\n1\n", MalformedHeader),
        (b"P5\n2 2\n65535\n" + bytes(8), MalformedHeader),
        (b"P5\n4 4\n255\n" + bytes(3), TruncatedData),
    ],
)
def test_pgm_errors(data, error):
    with pytest.raises(error):
        parse_pgm(data)


def test_pgm_round_trip_byte_identical(tmp_path):
    rng = np.random.default_rng(3)
    raw = bytes(rng.integers(0, 256, 12 * 7, dtype=np.uint8))
    data = b"P5\n7 12\n255\n" + raw
    img = parse_pgm(data)
    assert img.height == 12 and img.width == 7
    assert encode_pgm(img) == data
    path = tmp_path / "img.pgm"
    save_pgm(img, path)
    np.testing.assert_array_equal(load_pgm(path).pixels, img.pixels)


def test_image_clamped():
    img = ImageGray([[-0.5, 0.5], [1.5, 1.0]])
    assert img.pixels.min() == 0.0 and img.pixels.max() == 1.0


# --- datasets ----------------------------------------------------------------------------------


def test_dataset_single_pixel():
    coords, targets = image_to_dataset(ImageGray([[0.25]]))
    np.testing.assert_array_equal(coords, [[0.5, 0.5]])
    np.testing.assert_array_equal(targets, [[0.25]])


def test_dataset_shape_and_corner():
    img = synthetic_image(4, seed=0)
    coords, targets = image_to_dataset(img)
    assert coords.shape == (16, 2) and targets.shape == (16, 1)
    np.testing.assert_array_equal(coords[0], [0.125, 0.125])
    # row-major: second entry moves along the column index
    np.testing.assert_array_equal(coords[1], [0.125, 0.375])
    assert targets[1, 0] == img.pixels[0, 1]


def test_synthetic_image_deterministic():
    np.testing.assert_array_equal(synthetic_image(16, 2).pixels, synthetic_image(16, 2).pixels)
