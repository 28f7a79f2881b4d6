import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specsynth.losses import (LossWeights, decoder_finetune_loss, fd_check,
                              highlight_loss, reconstruction_loss, seam_loss,
                              seam_ring, spec_penalty)

from conftest import independent_pair, kink_free_delta, margin_uniform, offset_from

W = LossWeights()


class TestLossWeightsDefaults:
    def test_training_defaults(self):
        assert (W.w_dice, W.w_l1, W.w_tv) == (0.2, 0.7, 0.1)
        assert (W.w_seam, W.w_spec, W.w_rgb) == (0.25, 0.25, 0.5)
        assert W.tau_m == 0.85 and W.eps == 1e-6

    def test_validation(self):
        with pytest.raises(ValueError):
            LossWeights(w_dice=-0.1)
        with pytest.raises(ValueError):
            LossWeights(eps=0.0)


class TestHighlightLoss:
    def test_zero_at_equal_binary_maps(self):
        # soft Dice vanishes at equality for {0,1}-valued maps
        for value in (0.0, 1.0):
            m = np.full((4, 4), value)
            rep = highlight_loss(m, m.copy(), W)
            assert rep.total == pytest.approx(0.0, abs=1e-12)
        r = np.random.default_rng(3)
        m = (r.uniform(size=(6, 6)) < 0.4).astype(np.float64)
        rep = highlight_loss(m, m.copy(), LossWeights(w_tv=0.0))
        assert rep.total == pytest.approx(0.0, abs=1e-12)

    def test_empty_vs_empty_dice_is_zero(self):
        z = np.zeros((4, 4))
        rep = highlight_loss(z, z, W)
        assert rep.terms["dice"] == pytest.approx(0.0, abs=1e-12)
        assert rep.total == pytest.approx(0.0, abs=1e-12)

    def test_checkerboard_frozen_value(self):
        # dice 2/3, L1 0.5, TV 2 with weights (0.2, 0.7, 0.1)
        pred = np.array([[0.0, 1.0], [1.0, 0.0]])
        target = np.zeros((2, 2))
        rep = highlight_loss(pred, target, W)
        assert rep.terms["dice"] == pytest.approx(2 / 3, abs=1e-12)
        assert rep.terms["l1"] == pytest.approx(0.5, abs=1e-12)
        assert rep.terms["tv"] == pytest.approx(2.0, abs=1e-12)
        assert rep.total == pytest.approx(0.2 * 2 / 3 + 0.7 * 0.5 + 0.1 * 2.0,
                                          abs=1e-6)

    def test_total_is_weighted_sum_of_terms(self, rng):
        rep = highlight_loss(rng.random((5, 5)), rng.random((5, 5)), W)
        expect = (W.w_dice * rep.terms["dice"] + W.w_l1 * rep.terms["l1"]
                  + W.w_tv * rep.terms["tv"])
        assert rep.total == pytest.approx(expect, abs=1e-6)

    def test_dice_swap_symmetric(self, rng):
        p, t = rng.random((6, 6)), rng.random((6, 6))
        assert (highlight_loss(p, t, W).terms["dice"]
                == highlight_loss(t, p, W).terms["dice"])

    @given(st.floats(-0.3, 0.3))
    @settings(max_examples=30, deadline=None)
    def test_tv_translation_invariant(self, offset):
        r = np.random.default_rng(5)
        p = r.random((6, 6)) * 0.4 + 0.3
        t = r.random((6, 6))
        tv0 = highlight_loss(p, t, W).terms["tv"]
        tv1 = highlight_loss(p + offset, t, W).terms["tv"]
        assert tv1 == pytest.approx(tv0, abs=1e-12)

    def test_gradient_fd(self, rng):
        for _ in range(5):
            t = margin_uniform(rng, (6, 6))
            err = fd_check(lambda x: _pair(highlight_loss(x, t, W)),
                           offset_from(rng, t))
            assert err < 1e-4

    def test_nonnegative(self, rng):
        for _ in range(10):
            assert highlight_loss(rng.random((4, 4)), rng.random((4, 4)), W).total >= 0


def _pair(report):
    return report.total, report.gradient


class TestReconstructionLoss:
    def test_zero_at_identity(self, rng):
        img = rng.random((16, 16, 3))
        rep = reconstruction_loss(img, img.copy())
        assert rep.total == pytest.approx(0.0, abs=1e-9)
        assert rep.terms["one_minus_ssim"] == pytest.approx(0.0, abs=1e-9)

    def test_constant_images_frozen_value(self):
        pred = np.zeros((16, 16, 3))
        ref = np.full((16, 16, 3), 0.5)
        rep = reconstruction_loss(pred, ref)
        assert rep.terms["l1"] == pytest.approx(0.5, abs=1e-12)
        # SSIM of constants 0 vs 0.5: C1 / (0.25 + C1) with C1 = 1e-4
        assert 1.0 - rep.terms["one_minus_ssim"] == pytest.approx(3.9984e-4,
                                                                  abs=1e-7)
        assert rep.total == pytest.approx(1.49960016, abs=1e-6)

    def test_masked_garbage_invisible(self, rng):
        ref = rng.random((16, 16, 3))
        sup = np.ones((16, 16), dtype=bool)
        sup[4:9, 4:9] = False
        pred = ref.copy()
        pred[~sup] = rng.random((pred[~sup].shape[0], 3)) * 37.0
        rep = reconstruction_loss(pred, ref, sup)
        clean = reconstruction_loss(ref, ref, sup)
        assert rep.total == pytest.approx(clean.total, abs=1e-12)
        assert rep.total == pytest.approx(0.0, abs=1e-9)

    def test_empty_mask_defines_zero(self, rng):
        rep = reconstruction_loss(rng.random((12, 12, 3)),
                                  rng.random((12, 12, 3)),
                                  np.zeros((12, 12), dtype=bool))
        assert rep.total == 0.0
        assert (rep.gradient == 0).all()

    def test_l1_gradient_fd_unmasked(self, rng):
        ref = rng.random((12, 12, 3))
        err = fd_check(lambda x: (reconstruction_loss(x, ref).terms["l1"],
                                  reconstruction_loss(x, ref).gradient),
                       offset_from(rng, ref))
        assert err < 1e-4

    def test_l1_gradient_fd_masked(self, rng):
        ref = rng.random((12, 12, 3))
        sup = rng.uniform(size=(12, 12)) < 0.6
        err = fd_check(lambda x: (reconstruction_loss(x, ref, sup).terms["l1"],
                                  reconstruction_loss(x, ref, sup).gradient),
                       offset_from(rng, ref))
        assert err < 1e-4


class TestSeamRing:
    def test_empty_mask_empty_ring(self):
        assert not seam_ring(np.zeros((5, 5), dtype=bool), 1).any()

    def test_full_mask_empty_ring(self):
        assert not seam_ring(np.ones((5, 5), dtype=bool), 1).any()

    def test_center_pixel_ring_is_eight_neighbors(self):
        m = np.zeros((5, 5), dtype=bool)
        m[2, 2] = True
        ring = seam_ring(m, 1)
        expected = np.zeros((5, 5), dtype=bool)
        expected[1:4, 1:4] = True
        expected[2, 2] = False
        assert np.array_equal(ring, expected)

    def test_radius_two(self):
        m = np.zeros((7, 7), dtype=bool)
        m[3, 3] = True
        ring = seam_ring(m, 2)
        assert ring.sum() == 24  # 5x5 square minus the center

    def test_radius_validation(self):
        with pytest.raises(ValueError):
            seam_ring(np.zeros((3, 3), dtype=bool), 0)


class TestSeamLoss:
    def _ring(self, h=8, w=8):
        hole = np.zeros((h, w), dtype=bool)
        hole[3:5, 3:5] = True
        return seam_ring(hole, 1)

    def test_zero_at_identity(self, rng):
        img = rng.random((8, 8, 3))
        rep = seam_loss(img, img.copy(), self._ring(), 1.0)
        assert rep.total == 0.0

    def test_empty_ring_zero(self, rng):
        rep = seam_loss(rng.random((8, 8, 3)), rng.random((8, 8, 3)),
                        np.zeros((8, 8), dtype=bool), 1.0)
        assert rep.total == 0.0
        assert (rep.gradient == 0).all()

    def test_constant_offset_hits_color_term_only(self, rng):
        img = rng.random((8, 8, 3)) * 0.5
        rep = seam_loss(img + 0.1, img, self._ring(), lambda_g=7.3)
        assert rep.terms["grad"] == pytest.approx(0.0, abs=1e-12)
        assert rep.total == pytest.approx(0.1, abs=1e-9)

    def test_total_combines_with_lambda_g(self, rng):
        pred = rng.random((8, 8, 3))
        img = rng.random((8, 8, 3))
        ring = self._ring()
        r1 = seam_loss(pred, img, ring, 0.0)
        r2 = seam_loss(pred, img, ring, 2.0)
        assert r2.total == pytest.approx(r1.terms["color"]
                                         + 2.0 * r2.terms["grad"], abs=1e-9)

    def test_gradient_fd(self, rng):
        img = margin_uniform(rng, (8, 8, 3), lo=0.2, hi=0.8)
        ring = self._ring()
        for lam in (0.0, 1.0, 2.5):
            err = fd_check(lambda x: _pair(seam_loss(x, img, ring, lam)),
                           offset_from(rng, img))
            assert err < 1e-4


class TestSpecPenalty:
    def test_dark_image_zero(self):
        rep = spec_penalty(np.full((4, 4, 3), 0.5), 0.85, 1e-6)
        assert rep.total == 0.0
        assert (rep.gradient == 0).all()

    def test_single_bright_pixel(self):
        img = np.full((4, 4, 3), 0.2)
        img[1, 1] = 0.95
        rep = spec_penalty(img, 0.85, 1e-6)
        assert rep.total == pytest.approx(0.1, abs=1e-6)

    def test_uniform_saturated(self):
        rep = spec_penalty(np.ones((6, 9, 3)), 0.85, 1e-6)
        assert rep.total == pytest.approx(0.15, abs=1e-6)
        # resolution independence
        rep2 = spec_penalty(np.ones((13, 5, 3)), 0.85, 1e-6)
        assert rep2.total == pytest.approx(rep.total, abs=1e-12)

    def test_gradient_fd_away_from_boundary(self, rng):
        for _ in range(5):
            img = rng.uniform(0.6, 1.0, (6, 6, 3))
            b = img.mean(axis=-1)
            img[np.abs(b - 0.85) < 1e-2] += 0.02  # clear the threshold band
            err = fd_check(lambda x: _pair(spec_penalty(x, 0.85, 1e-6)), img)
            assert err < 1e-4

    def test_validation(self):
        with pytest.raises(ValueError):
            spec_penalty(np.ones((4, 4, 3)), 1.0, 1e-6)
        with pytest.raises(ValueError):
            spec_penalty(np.ones((4, 4, 3)), 0.85, 0.0)


class TestDecoderFinetuneLoss:
    def test_total_is_weighted_sum(self, rng):
        pred = rng.random((16, 16, 3))
        img = rng.random((16, 16, 3))
        ref = rng.random((16, 16, 3))
        hole = np.zeros((16, 16), dtype=bool)
        hole[6:10, 6:10] = True
        ring = seam_ring(hole, 1)
        sup = rng.uniform(size=(16, 16)) < 0.8
        rep = decoder_finetune_loss(pred, img, ref, ring, sup, W)
        expect = (W.w_seam * rep.terms["seam"] + W.w_spec * rep.terms["spec"]
                  + W.w_rgb * rep.terms["rgb"])
        assert rep.total == pytest.approx(expect, abs=1e-6)

    def test_matches_individual_ops(self, rng):
        pred = rng.random((16, 16, 3))
        img = rng.random((16, 16, 3))
        ref = rng.random((16, 16, 3))
        hole = np.zeros((16, 16), dtype=bool)
        hole[2:5, 3:8] = True
        ring = seam_ring(hole, 1)
        rep = decoder_finetune_loss(pred, img, ref, ring, None, W)
        assert rep.terms["seam"] == seam_loss(pred, img, ring, W.lambda_g).total
        assert rep.terms["spec"] == spec_penalty(pred, W.tau_m, W.eps).total
        assert rep.terms["rgb"] == reconstruction_loss(pred, ref).total
