import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from s2oiqa.errors import DecodeError, InvalidArgument, ShapeError, UnsupportedFormat
from s2oiqa.raster import (PSNR_INF, Raster, decode_image, encode_image,
                           psnr, resize_bilinear)


def const(v, h=8, w=8):
    return Raster(np.full((h, w), float(v)))


class TestDecode:
    def test_ppm_p3_white_black(self):
        data = b"P3\n2 1\n255\n255 255 255 0 0 0\n"
        r = decode_image(data)
        assert r.width == 2 and r.height == 1
        np.testing.assert_allclose(r.data.ravel(), [255.0, 0.0])

    def test_ppm_p3_pure_red_luma(self):
        data = b"P3\n1 1\n255\n255 0 0\n"
        r = decode_image(data)
        # BT.601: 0.299 * 255
        np.testing.assert_allclose(r.data.ravel(), [76.245])

    def test_ppm_p6(self):
        data = b"P6\n2 2\n255\n" + bytes([10, 10, 10, 200, 200, 200, 0, 0, 0, 255, 255, 255])
        r = decode_image(data)
        np.testing.assert_allclose(r.data.ravel(), [10, 200, 0, 255])

    def test_truncated_png(self):
        with pytest.raises(DecodeError):
            decode_image(b"\x89PNG\r\n\x1a\n\x00\x00\x00")

    def test_truncated_ppm(self):
        with pytest.raises(DecodeError):
            decode_image(b"P6\n4 4\n255\n\x00\x01")

    def test_16bit_ppm_rejected(self):
        with pytest.raises(UnsupportedFormat):
            decode_image(b"P6\n1 1\n65535\n\x00\x01\x00\x01\x00\x01")

    def test_garbage_rejected(self):
        with pytest.raises(DecodeError):
            decode_image(b"not an image at all")

    @pytest.mark.parametrize("fmt", ["PNG", "BMP", "PPM"])
    def test_lossless_round_trip(self, fmt):
        rng = np.random.default_rng(3)
        r = Raster(rng.integers(0, 256, size=(13, 17)).astype(float))
        back = decode_image(encode_image(r, fmt))
        np.testing.assert_array_equal(back.data, r.data)


class TestResize:
    def test_constant_fixed_point(self):
        out = resize_bilinear(const(100.0), 4, 4)
        np.testing.assert_allclose(out.data, 100.0)

    def test_identity(self):
        rng = np.random.default_rng(0)
        r = Raster(rng.uniform(0, 255, (9, 7)))
        out = resize_bilinear(r, 7, 9)
        np.testing.assert_allclose(out.data, r.data, atol=1e-9)

    def test_monotone_upsample(self):
        r = Raster(np.array([[0.0, 255.0]]))
        out = resize_bilinear(r, 4, 1)
        v = out.data.ravel()
        assert np.all(np.diff(v) >= 0)
        # direct bilinear formula with half-pixel centers, clamped
        pos = np.clip((np.arange(4) + 0.5) * 2 / 4 - 0.5, 0, 1)
        np.testing.assert_allclose(v, 255.0 * pos)

    def test_zero_target_rejected(self):
        with pytest.raises(InvalidArgument):
            resize_bilinear(const(1), 0, 4)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 40), st.integers(1, 40), st.integers(0, 10 ** 6))
    def test_bounds_preserved(self, ow, oh, seed):
        rng = np.random.default_rng(seed)
        r = Raster(rng.uniform(0, 255, (rng.integers(1, 30), rng.integers(1, 30))))
        out = resize_bilinear(r, ow, oh)
        assert out.data.min() >= r.data.min() - 1e-9
        assert out.data.max() <= r.data.max() + 1e-9


class TestPsnr:
    def test_identical_is_inf(self):
        assert psnr(const(7), const(7)) == PSNR_INF

    def test_maximal_error_zero_db(self):
        assert psnr(const(0), const(255)) == pytest.approx(0.0, abs=1e-12)

    def test_uniform_error_16(self):
        assert psnr(const(0), const(16)) == pytest.approx(10 * np.log10(255 ** 2 / 256), abs=1e-9)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            psnr(const(0, 4, 4), const(0, 4, 5))

    def test_symmetric_and_monotone_in_noise(self):
        rng = np.random.default_rng(1)
        base = Raster(np.full((16, 16), 128.0))
        noise = rng.standard_normal((16, 16))
        prev = np.inf
        for amp in (1.0, 4.0, 16.0):
            d = Raster(np.clip(128 + amp * noise, 0, 255))
            v = psnr(base, d)
            assert v == psnr(d, base)
            assert v < prev
            prev = v
