import math

import numpy as np
import pytest

from specsynth.metrics import evaluate_pair, lsr, mse_masked, psnr, ssim
from specsynth.testkit import make_checkerboard


class TestMseMasked:
    def test_zero_at_identity(self, rng):
        img = rng.random((8, 8, 3))
        mask = rng.uniform(size=(8, 8)) < 0.5
        mask[0, 0] = True
        assert mse_masked(img, img.copy(), mask) == 0.0

    def test_constant_offset(self, rng):
        ref = rng.random((8, 8, 3)) * 0.5
        mask = np.zeros((8, 8), dtype=bool)
        mask[2:5, 2:5] = True
        pred = ref.copy()
        pred[mask] += 0.1
        assert mse_masked(pred, ref, mask) == pytest.approx(0.01, abs=1e-12)

    def test_mask_isolation(self, rng):
        ref = rng.random((8, 8, 3))
        mask = np.zeros((8, 8), dtype=bool)
        mask[1, 1] = True
        pred = ref.copy()
        pred[~mask] = 0.0
        assert mse_masked(pred, ref, mask) == 0.0

    def test_empty_mask_raises(self, rng):
        with pytest.raises(ValueError):
            mse_masked(rng.random((4, 4, 3)), rng.random((4, 4, 3)),
                       np.zeros((4, 4), dtype=bool))

    def test_full_mask_equals_global_mse(self, rng):
        a, b = rng.random((8, 8, 3)), rng.random((8, 8, 3))
        full = np.ones((8, 8), dtype=bool)
        assert mse_masked(a, b, full) == pytest.approx(((a - b) ** 2).mean(),
                                                       abs=1e-12)


class TestPsnr:
    def test_identical_images_sentinel(self, rng):
        img = rng.random((8, 8, 3))
        assert math.isinf(psnr(img, img.copy()))

    def test_half_offset(self):
        a = np.full((8, 8, 3), 0.25)
        b = np.full((8, 8, 3), 0.75)
        assert psnr(a, b) == pytest.approx(6.0206, abs=1e-3)

    def test_tenth_offset(self):
        a = np.full((8, 8, 3), 0.4)
        b = np.full((8, 8, 3), 0.5)
        assert psnr(a, b) == pytest.approx(20.0, abs=1e-9)

    def test_strictly_decreasing_in_mse(self, rng):
        ref = np.full((8, 8, 3), 0.5)
        values = [psnr(ref + off, ref) for off in (0.05, 0.1, 0.2, 0.4)]
        assert all(a > b for a, b in zip(values, values[1:]))


class TestSsim:
    def test_self_similarity_is_one(self, rng):
        img = rng.random((16, 16, 3))
        assert ssim(img, img.copy()) == pytest.approx(1.0, abs=1e-6)

    def test_symmetric(self, rng):
        a, b = rng.random((16, 16, 3)), rng.random((16, 16, 3))
        assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)

    def test_negative_on_anticorrelated_structure(self):
        checker = make_checkerboard(32, 32, tile=1)
        assert ssim(checker, 1.0 - checker) < 0.0

    def test_constant_images_closed_form(self):
        a = np.zeros((16, 16, 3))
        b = np.full((16, 16, 3), 0.5)
        assert ssim(a, b) == pytest.approx(3.9984e-4, abs=1e-7)

    def test_small_image_rejected(self, rng):
        with pytest.raises(ValueError):
            ssim(rng.random((8, 8, 3)), rng.random((8, 8, 3)))

    def test_range(self, rng):
        for _ in range(5):
            v = ssim(rng.random((16, 16, 3)), rng.random((16, 16, 3)))
            assert -1.0 <= v <= 1.0


def highlight_scene(size=24, excess=0.3):
    """Background 0.4 plus a brighter square; returns (image, mask)."""
    img = np.full((size, size, 3), 0.4, dtype=np.float64)
    mask = np.zeros((size, size), dtype=bool)
    mask[4:9, 4:9] = True
    img[mask] += excess
    return img, mask


class TestLsr:
    def test_identity_output_scores_one(self):
        img, mask = highlight_scene()
        assert lsr(img, img.copy(), mask) == pytest.approx(1.0, abs=1e-6)

    def test_perfect_suppression_scores_zero(self):
        img, mask = highlight_scene()
        out = img.copy()
        out[mask] = 0.4
        assert lsr(img, out, mask) == pytest.approx(0.0, abs=1e-6)

    def test_global_dimming_scores_one(self):
        img, mask = highlight_scene()
        assert lsr(img, 0.5 * img, mask) == pytest.approx(1.0, abs=1e-6)

    def test_dimming_invariance_sweep(self):
        img, mask = highlight_scene()
        for c in (0.1, 0.3, 0.7, 1.0):
            assert lsr(img, c * img, mask) == pytest.approx(1.0, abs=1e-6)

    def test_zero_iff_no_residual_excess(self):
        img, mask = highlight_scene()
        out = img.copy()
        out[mask] = 0.35  # below the background mean
        assert lsr(img, out, mask) == 0.0
        out[mask] = 0.41  # slightly above
        assert lsr(img, out, mask) > 0.0

    def test_partial_suppression_between(self):
        img, mask = highlight_scene(excess=0.4)
        out = img.copy()
        out[mask] = 0.4 + 0.2
        val = lsr(img, out, mask)
        assert 0.0 < val < 1.0

    def test_empty_mask_rejected(self):
        img, _ = highlight_scene()
        with pytest.raises(ValueError):
            lsr(img, img, np.zeros(img.shape[:2], dtype=bool))

    def test_full_mask_rejected(self):
        img, _ = highlight_scene()
        with pytest.raises(ValueError):
            lsr(img, img, np.ones(img.shape[:2], dtype=bool))

    def test_no_input_excess_rejected(self):
        img = np.full((8, 8, 3), 0.5)
        mask = np.zeros((8, 8), dtype=bool)
        mask[0, 0] = True
        with pytest.raises(ValueError):
            lsr(img, img, mask)


class TestEvaluatePair:
    def test_full_report(self):
        img, mask = highlight_scene()
        pred = img.copy()
        pred[mask] = 0.4
        rep = evaluate_pair(pred, pred.copy(), mask=mask, input_img=img)
        assert rep.mse_m == 0.0
        assert math.isinf(rep.psnr)
        assert rep.ssim == pytest.approx(1.0, abs=1e-6)
        assert rep.lsr == pytest.approx(0.0, abs=1e-6)
        assert rep.mask_coverage == pytest.approx(mask.mean())

    def test_mask_from_input_detection(self):
        img = np.full((16, 16, 3), 0.5)
        img[2:4, 2:4] = 0.99
        rep = evaluate_pair(img, img.copy(), input_img=img)
        assert rep.mse_m == 0.0
        assert rep.mask_coverage == pytest.approx(4 / 256)

    def test_no_mask_no_input(self, rng):
        a = rng.random((16, 16, 3))
        rep = evaluate_pair(a, a.copy())
        assert rep.mse_m is None and rep.lsr is None
        assert rep.mask_coverage == 0.0
