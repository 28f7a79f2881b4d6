"""Pixel-space training objectives with analytic gradients.

Every loss evaluates in float64 (inputs are promoted) so the finite-
difference verification harness is meaningful at tight tolerances; the
rendering pipeline's float32 maps are accepted as-is. Gradients at exact
non-differentiable points (absolute values at zero, threshold boundaries)
use the zero-subgradient convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import binary_dilation

from . import ssim as _ssim

__all__ = [
    "LossWeights",
    "LossReport",
    "highlight_loss",
    "reconstruction_loss",
    "seam_ring",
    "seam_loss",
    "spec_penalty",
    "decoder_finetune_loss",
    "fd_check",
]


@dataclass(frozen=True)
class LossWeights:
    """Loss-term weights and constants (training-time defaults)."""

    w_dice: float = 0.2
    w_l1: float = 0.7
    w_tv: float = 0.1
    w_seam: float = 0.25
    w_spec: float = 0.25
    w_rgb: float = 0.5
    lambda_g: float = 1.0     # seam gradient-term weight
    tau_m: float = 0.85       # brightness cutoff for the specular penalty
    eps: float = 1e-6         # Charbonnier stabilizer
    dice_smooth: float = 1.0

    def __post_init__(self):
        for name in ("w_dice", "w_l1", "w_tv", "w_seam", "w_spec", "w_rgb",
                     "lambda_g", "tau_m", "dice_smooth"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.eps <= 0:
            raise ValueError("eps must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "LossWeights":
        return cls(**{k: float(v) for k, v in d.items()})


@dataclass
class LossReport:
    """A loss value, its unweighted terms, and an optional gradient."""

    total: float
    terms: dict[str, float] = field(default_factory=dict)
    gradient: np.ndarray | None = None


def _f64(x: np.ndarray) -> np.ndarray:
    return np.asarray(x, dtype=np.float64)


def _dx(img: np.ndarray) -> np.ndarray:
    """Forward x-difference, zero at the last column (shape-preserving)."""
    out = np.zeros_like(img)
    out[:, :-1] = img[:, 1:] - img[:, :-1]
    return out


def _dy(img: np.ndarray) -> np.ndarray:
    """Forward y-difference, zero at the last row."""
    out = np.zeros_like(img)
    out[:-1] = img[1:] - img[:-1]
    return out


def highlight_loss(pred: np.ndarray, target: np.ndarray,
                   weights: LossWeights = LossWeights()) -> LossReport:
    """Soft Dice + L1 + total variation on a predicted highlight map.

    dice = 1 - (2*sum(p*t) + s) / (sum(p) + sum(t) + s); the smoothing
    constant makes empty-vs-empty score zero. TV is the mean absolute
    forward difference along x plus the same along y. The gradient of the
    weighted total with respect to ``pred`` is returned in the report.
    """
    p = _f64(pred)
    t = _f64(target)
    if p.shape != t.shape or p.ndim != 2:
        raise ValueError(f"expected matching 2-D maps, got {p.shape} vs {t.shape}")
    s = weights.dice_smooth
    n = p.size

    inter = 2.0 * (p * t).sum() + s
    sums = p.sum() + t.sum() + s
    dice = 1.0 - inter / sums
    grad_dice = -(2.0 * t * sums - inter) / sums ** 2

    l1 = np.abs(p - t).mean()
    grad_l1 = np.sign(p - t) / n

    grad_tv = np.zeros_like(p)
    tv = 0.0
    if p.shape[1] > 1:
        dxs = p[:, 1:] - p[:, :-1]
        tv += np.abs(dxs).mean()
        sx = np.sign(dxs) / dxs.size
        grad_tv[:, 1:] += sx
        grad_tv[:, :-1] -= sx
    if p.shape[0] > 1:
        dys = p[1:] - p[:-1]
        tv += np.abs(dys).mean()
        sy = np.sign(dys) / dys.size
        grad_tv[1:] += sy
        grad_tv[:-1] -= sy

    total = weights.w_dice * dice + weights.w_l1 * l1 + weights.w_tv * tv
    grad = weights.w_dice * grad_dice + weights.w_l1 * grad_l1 + weights.w_tv * grad_tv
    return LossReport(total=float(total),
                      terms={"dice": float(dice), "l1": float(l1), "tv": float(tv)},
                      gradient=grad)


def reconstruction_loss(pred: np.ndarray, ref: np.ndarray,
                        sup_mask: np.ndarray | None = None) -> LossReport:
    """Masked L1 plus (1 - masked mean SSIM) between two RGB images.

    With a supervision mask, excluded pixels are nulled in both images
    before the windowed SSIM so untrusted content cannot leak into window
    statistics, and the SSIM map is averaged over mask pixels only. An
    empty mask defines the loss as zero. The reported gradient covers the
    L1 term only; the SSIM term is value-only.
    """
    p = _f64(pred)
    r = _f64(ref)
    if p.shape != r.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {r.shape}")
    if sup_mask is None:
        l1 = np.abs(p - r).mean()
        grad = np.sign(p - r) / p.size
        ssim_val = _ssim.ssim(p, r)
    else:
        nm = int(sup_mask.sum())
        if nm == 0:
            return LossReport(total=0.0,
                              terms={"l1": 0.0, "one_minus_ssim": 0.0},
                              gradient=np.zeros_like(p))
        m3 = sup_mask[..., None] if p.ndim == 3 else sup_mask
        denom = nm * (p.shape[-1] if p.ndim == 3 else 1)
        l1 = (np.abs(p - r) * m3).sum() / denom
        grad = np.sign(p - r) * m3 / denom
        ssim_val = _ssim.masked_ssim_mean(p * m3, r * m3, sup_mask)
    one_minus = 1.0 - ssim_val
    return LossReport(total=float(l1 + one_minus),
                      terms={"l1": float(l1), "one_minus_ssim": float(one_minus)},
                      gradient=grad)


def seam_ring(m_hole: np.ndarray, radius: int = 1) -> np.ndarray:
    """Thin boundary ring around holes: dilate(m_hole) minus m_hole.

    Dilation uses a single (2*radius+1)^2 square structuring element.
    """
    if radius < 1:
        raise ValueError("radius must be >= 1")
    if m_hole.dtype != np.bool_ or m_hole.ndim != 2:
        raise ValueError("m_hole must be a 2-D bool mask")
    size = 2 * radius + 1
    dilated = binary_dilation(m_hole, structure=np.ones((size, size), dtype=bool))
    return dilated & ~m_hole


def seam_loss(pred: np.ndarray, input_img: np.ndarray, ring: np.ndarray,
              lambda_g: float = 1.0) -> LossReport:
    """Color and gradient continuity across the inpainting boundary ring.

    color term: mean over ring pixels (channel-averaged) of |pred - input|;
    gradient term: same mean of |d pred - d input| for forward differences
    along x and y (each term normalized by the ring size independently).
    Empty ring gives zero. The analytic gradient of the weighted total is
    returned.
    """
    p = _f64(pred)
    i = _f64(input_img)
    if p.shape != i.shape or p.ndim != 3:
        raise ValueError(f"expected matching (H, W, 3) images, got {p.shape} vs {i.shape}")
    nr = int(ring.sum())
    if nr == 0:
        return LossReport(total=0.0, terms={"color": 0.0, "grad": 0.0},
                          gradient=np.zeros_like(p))
    m3 = ring[..., None]
    denom = 3.0 * nr

    color = (np.abs(p - i) * m3).sum() / denom
    grad = np.sign(p - i) * m3 / denom

    diff_x = _dx(p) - _dx(i)
    diff_y = _dy(p) - _dy(i)
    gterm = ((np.abs(diff_x) + np.abs(diff_y)) * m3).sum() / denom

    sx = np.sign(diff_x) * m3 / denom
    sy = np.sign(diff_y) * m3 / denom
    ggrad = np.zeros_like(p)
    ggrad[:, 1:] += sx[:, :-1]
    ggrad[:, :-1] -= sx[:, :-1]
    ggrad[1:] += sy[:-1]
    ggrad[:-1] -= sy[:-1]

    total = color + lambda_g * gterm
    return LossReport(total=float(total),
                      terms={"color": float(color), "grad": float(gterm)},
                      gradient=grad + lambda_g * ggrad)


def spec_penalty(pred: np.ndarray, tau_m: float = 0.85,
                 eps: float = 1e-6) -> LossReport:
    """Charbonnier penalty on pixels brighter than the cutoff.

    B is the per-pixel channel mean; over {B > tau_m} the loss is the mean
    of sqrt((B - tau_m)^2 + eps^2). No pixel above the cutoff gives zero.
    """
    if not 0.0 < tau_m < 1.0:
        raise ValueError(f"tau_m must be in (0, 1), got {tau_m}")
    if eps <= 0:
        raise ValueError("eps must be positive")
    p = _f64(pred)
    if p.ndim != 3:
        raise ValueError(f"expected an (H, W, 3) image, got {p.shape}")
    b = p.mean(axis=-1)
    sel = b > tau_m
    n = int(sel.sum())
    if n == 0:
        return LossReport(total=0.0, terms={"charbonnier": 0.0},
                          gradient=np.zeros_like(p))
    excess = b - tau_m
    charb = np.sqrt(excess ** 2 + eps ** 2)
    total = charb[sel].sum() / n
    db = np.where(sel, excess / charb, 0.0) / n
    grad = np.repeat((db / 3.0)[..., None], 3, axis=-1)
    return LossReport(total=float(total), terms={"charbonnier": float(total)},
                      gradient=grad)


def decoder_finetune_loss(pred: np.ndarray, input_img: np.ndarray,
                          ref: np.ndarray, ring: np.ndarray,
                          sup_mask: np.ndarray | None,
                          weights: LossWeights = LossWeights()) -> LossReport:
    """Weighted combination of the seam, specular-penalty, and RGB terms.

    total = w_seam * seam + w_spec * spec + w_rgb * rgb. Term values are
    stored unweighted. No combined gradient is reported (the RGB term's
    SSIM half is value-only); use the individual ops for gradients.
    """
    seam = seam_loss(pred, input_img, ring, weights.lambda_g)
    spec = spec_penalty(pred, weights.tau_m, weights.eps)
    rgb = reconstruction_loss(pred, ref, sup_mask)
    total = (weights.w_seam * seam.total + weights.w_spec * spec.total
             + weights.w_rgb * rgb.total)
    return LossReport(total=float(total),
                      terms={"seam": seam.total, "spec": spec.total,
                             "rgb": rgb.total})


def fd_check(fn, x0: np.ndarray, step: float = 1e-4) -> float:
    """Max relative error between an analytic gradient and central differences.

    ``fn`` maps an array to ``(value, gradient)``. Every coordinate of
    ``x0`` is perturbed by +-step; the relative error uses a small floor so
    coordinates with a genuinely zero gradient compare clean.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    _, grad = fn(x0)
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != x0.shape:
        raise ValueError(f"gradient shape {grad.shape} does not match input {x0.shape}")
    worst = 0.0
    flat = x0.ravel()
    for idx in range(flat.size):
        xp = flat.copy()
        xp[idx] += step
        fp, _ = fn(xp.reshape(x0.shape))
        xm = flat.copy()
        xm[idx] -= step
        fm, _ = fn(xm.reshape(x0.shape))
        fd = (fp - fm) / (2.0 * step)
        a = grad.ravel()[idx]
        err = abs(a - fd) / max(abs(a), abs(fd), 1e-8)
        worst = max(worst, float(err))
    return worst
