# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled render kernel: fused directions + Fresnel + Blinn-Phong loop.

Same contract as specsynth._kernels_np.render_highlight: float64 math,
float32 output, zero on invalid or degenerate pixels.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport pow, sqrt

cnp.import_array()

BACKEND_NAME = "compiled"


def render_highlight(double[:, :, ::1] points, double[:, :, ::1] normals,
                     cnp.uint8_t[:, ::1] valid, double[::1] light,
                     double r0, double k_h, double shininess,
                     double view_sign):
    cdef Py_ssize_t h = points.shape[0]
    cdef Py_ssize_t w = points.shape[1]
    out_arr = np.zeros((h, w), dtype=np.float32)
    cdef float[:, ::1] out = out_arr

    cdef Py_ssize_t i, j
    cdef double px, py, pz, xn, inv_xn, vx, vy, vz
    cdef double dx, dy, dz, dn, lx, ly, lz
    cdef double hx, hy, hz, hn, inv_hn
    cdef double nh, vh, fres, val
    cdef double Lx = light[0], Ly = light[1], Lz = light[2]

    with nogil:
        for i in range(h):
            for j in range(w):
                if not valid[i, j]:
                    continue
                px = points[i, j, 0]
                py = points[i, j, 1]
                pz = points[i, j, 2]
                xn = sqrt(px * px + py * py + pz * pz)
                if xn <= 0.0:
                    continue
                inv_xn = view_sign / xn
                vx = px * inv_xn
                vy = py * inv_xn
                vz = pz * inv_xn

                dx = Lx - px
                dy = Ly - py
                dz = Lz - pz
                dn = sqrt(dx * dx + dy * dy + dz * dz)
                if dn <= 0.0:
                    continue
                lx = dx / dn
                ly = dy / dn
                lz = dz / dn

                hx = lx + vx
                hy = ly + vy
                hz = lz + vz
                hn = sqrt(hx * hx + hy * hy + hz * hz)
                if hn < 1e-8:
                    continue
                inv_hn = 1.0 / hn
                hx *= inv_hn
                hy *= inv_hn
                hz *= inv_hn

                nh = normals[i, j, 0] * hx + normals[i, j, 1] * hy + normals[i, j, 2] * hz
                if nh < 0.0:
                    nh = 0.0
                vh = vx * hx + vy * hy + vz * hz
                if vh < 0.0:
                    vh = 0.0
                elif vh > 1.0:
                    vh = 1.0
                fres = r0 + (1.0 - r0) * pow(1.0 - vh, 5.0)
                val = k_h * fres * pow(nh, shininess)
                if val < 0.0:
                    val = 0.0
                elif val > 1.0:
                    val = 1.0
                out[i, j] = <float> val
    return out_arr
