"""Pure-numpy implementation of the fused highlight render kernel.

This is the fallback used when the compiled extension is unavailable. Both
implementations compute in float64 and emit float32, so they agree to the
last few ulps.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"


def render_highlight(points: np.ndarray, normals: np.ndarray,
                     valid: np.ndarray, light: np.ndarray,
                     r0: float, k_h: float, shininess: float,
                     view_sign: float) -> np.ndarray:
    """Fused per-pixel specular lobe: directions + Fresnel + Blinn-Phong.

    H = clamp01(k_h * (r0 + (1-r0)(1 - v.h)^5) * max(0, n.h)^S) with
    v = view_sign * X/|X|, l = (L-X)/|L-X|, h = (l+v)/|l+v|. Invalid or
    degenerate pixels render as zero.
    """
    X = points
    xn = np.linalg.norm(X, axis=-1)
    ok = valid & (xn > 0)

    inv_xn = np.divide(1.0, xn, out=np.zeros_like(xn), where=ok)
    v = view_sign * X * inv_xn[..., None]

    d = light[None, None, :] - X
    dn = np.linalg.norm(d, axis=-1)
    ok = ok & (dn > 0)
    inv_dn = np.divide(1.0, dn, out=np.zeros_like(dn), where=ok)
    l = d * inv_dn[..., None]

    hsum = l + v
    hn = np.linalg.norm(hsum, axis=-1)
    ok = ok & (hn >= 1e-8)
    inv_hn = np.divide(1.0, hn, out=np.zeros_like(hn), where=ok)
    h = hsum * inv_hn[..., None]

    nh = np.maximum((normals * h).sum(axis=-1), 0.0)
    vh = np.clip((v * h).sum(axis=-1), 0.0, 1.0)
    fresnel = r0 + (1.0 - r0) * (1.0 - vh) ** 5
    out = np.clip(k_h * fresnel * nh ** shininess, 0.0, 1.0)
    out[~ok] = 0.0
    return out.astype(np.float32)
