# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled pixel kernels.

Mirrors ``_numpy_impl`` operation-for-operation; both backends must
produce bit-identical float64 results. When editing one, edit the other.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor, pow, sqrt

cnp.import_array()

BACKEND_NAME = "cython"


def normals_from_depth(depth):
    d_arr = np.ascontiguousarray(depth, dtype=np.float64)
    cdef double[:, ::1] d = d_arr
    cdef Py_ssize_t h = d.shape[0]
    cdef Py_ssize_t w = d.shape[1]
    out_arr = np.empty((h, w, 3), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t r, c
    cdef double gx, gy, inv
    for r in range(h):
        for c in range(w):
            if w < 2:
                gx = 0.0
            elif c == 0:
                gx = d[r, 1] - d[r, 0]
            elif c == w - 1:
                gx = d[r, w - 1] - d[r, w - 2]
            else:
                gx = (d[r, c + 1] - d[r, c - 1]) * 0.5
            if h < 2:
                gy = 0.0
            elif r == 0:
                gy = d[1, c] - d[0, c]
            elif r == h - 1:
                gy = d[h - 1, c] - d[h - 2, c]
            else:
                gy = (d[r + 1, c] - d[r - 1, c]) * 0.5
            inv = 1.0 / sqrt(gx * gx + gy * gy + 1.0)
            out[r, c, 0] = -gx * inv
            out[r, c, 1] = -gy * inv
            out[r, c, 2] = inv
    return out_arr


cdef inline void _sample(const double[:, :, ::1] tex, Py_ssize_t th, Py_ssize_t tw,
                         double u, double v, double tile, double* rgb) noexcept nogil:
    cdef double x = u * tile
    cdef double y = v * tile
    x -= floor(x)
    y -= floor(y)
    cdef double px = x * tw
    cdef double py = y * th
    cdef Py_ssize_t j0 = <Py_ssize_t>floor(px)
    cdef Py_ssize_t i0 = <Py_ssize_t>floor(py)
    cdef double fx = px - j0
    cdef double fy = py - i0
    cdef Py_ssize_t j1 = j0 + 1
    cdef Py_ssize_t i1 = i0 + 1
    if j1 == tw:
        j1 = 0
    if i1 == th:
        i1 = 0
    cdef double top, bot
    cdef Py_ssize_t c
    for c in range(3):
        top = (1.0 - fx) * tex[i0, j0, c] + fx * tex[i0, j1, c]
        bot = (1.0 - fx) * tex[i1, j0, c] + fx * tex[i1, j1, c]
        rgb[c] = (1.0 - fy) * top + fy * bot


def bilinear_wrap(texture, u, v, tile):
    tex_arr = np.ascontiguousarray(texture, dtype=np.float64)
    u_arr = np.ascontiguousarray(u, dtype=np.float64)
    v_arr = np.ascontiguousarray(v, dtype=np.float64)
    cdef const double[:, :, ::1] tex = tex_arr
    cdef const double[::1] uu = u_arr
    cdef const double[::1] vv = v_arr
    cdef Py_ssize_t n = uu.shape[0]
    out_arr = np.empty((n, 3), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t th = tex.shape[0]
    cdef Py_ssize_t tw = tex.shape[1]
    cdef double t = tile
    cdef double rgb[3]
    cdef Py_ssize_t i
    for i in range(n):
        _sample(tex, th, tw, uu[i], vv[i], t, rgb)
        out[i, 0] = rgb[0]
        out[i, 1] = rgb[1]
        out[i, 2] = rgb[2]
    return out_arr


def shade_composite(frame, mask, normals, texture, tile, roughness, specular,
                    metallic, transparency, light_dir, ambient, diffuse,
                    specular_color, view, fill):
    out_arr = np.array(frame, dtype=np.float64, copy=True)
    cdef double[:, :, ::1] out = out_arr
    mask_arr = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef const unsigned char[:, ::1] m = mask_arr
    normals_arr = np.ascontiguousarray(normals, dtype=np.float64)
    cdef const double[:, :, ::1] nrm = normals_arr
    tex_arr = np.ascontiguousarray(texture, dtype=np.float64)
    cdef const double[:, :, ::1] tex = tex_arr
    fill_arr = np.ascontiguousarray(fill, dtype=np.float64)
    cdef const double[:, :, ::1] fb = fill_arr

    cdef Py_ssize_t h = m.shape[0]
    cdef Py_ssize_t w = m.shape[1]
    cdef Py_ssize_t th = tex.shape[0]
    cdef Py_ssize_t tw = tex.shape[1]
    cdef double tile_ = tile
    cdef double rough = roughness
    cdef double spec = specular
    cdef double metal = metallic
    cdef double transp = transparency
    cdef double amb = ambient
    cdef double diff = diffuse
    cdef double lx = light_dir[0]
    cdef double ly = light_dir[1]
    cdef double lz = light_dir[2]
    cdef double vx = view[0]
    cdef double vy = view[1]
    cdef double vz = view[2]
    cdef double sr = specular_color[0]
    cdef double sg = specular_color[1]
    cdef double sb = specular_color[2]

    cdef double hx = lx + vx
    cdef double hy = ly + vy
    cdef double hz = lz + vz
    cdef double hn = 1.0 / sqrt(hx * hx + hy * hy + hz * hz)
    hx *= hn
    hy *= hn
    hz *= hn
    cdef double shininess = pow(2.0, 12.0 * (1.0 - rough))

    cdef Py_ssize_t r, c, ch
    cdef double u, v, ndl, ndh, lobe, term, spec_rgb, col
    cdef double albedo[3]
    for r in range(h):
        for c in range(w):
            if m[r, c] == 0:
                continue
            u = c / (<double>w)
            v = r / (<double>w)
            _sample(tex, th, tw, u, v, tile_, albedo)
            ndl = nrm[r, c, 0] * lx + nrm[r, c, 1] * ly + nrm[r, c, 2] * lz
            if ndl < 0.0:
                ndl = 0.0
            ndh = nrm[r, c, 0] * hx + nrm[r, c, 1] * hy + nrm[r, c, 2] * hz
            if ndh < 0.0:
                ndh = 0.0
            lobe = pow(ndh, shininess)
            term = amb + diff * ndl
            for ch in range(3):
                if ch == 0:
                    spec_rgb = sr * (1.0 - metal) + albedo[0] * metal
                elif ch == 1:
                    spec_rgb = sg * (1.0 - metal) + albedo[1] * metal
                else:
                    spec_rgb = sb * (1.0 - metal) + albedo[2] * metal
                col = albedo[ch] * term + spec * spec_rgb * lobe
                if col < 0.0:
                    col = 0.0
                elif col > 1.0:
                    col = 1.0
                out[r, c, ch] = (1.0 - transp) * col + transp * fb[r, c, ch]
    return out_arr


def background_fill(frame, mask, out):
    frame_arr = np.ascontiguousarray(frame, dtype=np.float64)
    cdef const double[:, :, ::1] f = frame_arr
    mask_arr = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef const unsigned char[:, ::1] m = mask_arr
    cdef double[:, :, ::1] o = out
    cdef Py_ssize_t h = m.shape[0]
    cdef Py_ssize_t w = m.shape[1]
    cdef Py_ssize_t r, c, a, b, ch
    cdef double t, span
    cdef bint has_left, has_right, has_top, has_bot
    deferred = []
    for r in range(h):
        c = 0
        while c < w:
            if m[r, c] == 0:
                c += 1
                continue
            a = c
            b = c
            while b < w - 1 and m[r, b + 1] != 0:
                b += 1
            has_left = a > 0
            has_right = b < w - 1
            if has_left and has_right:
                span = <double>((b + 1) - (a - 1))
                for c in range(a, b + 1):
                    t = (c - (a - 1)) / span
                    for ch in range(3):
                        o[r, c, ch] = f[r, a - 1, ch] + t * (f[r, b + 1, ch] - f[r, a - 1, ch])
            elif has_left:
                for c in range(a, b + 1):
                    for ch in range(3):
                        o[r, c, ch] = f[r, a - 1, ch]
            elif has_right:
                for c in range(a, b + 1):
                    for ch in range(3):
                        o[r, c, ch] = f[r, b + 1, ch]
            else:
                deferred.append(r)
            c = b + 2
    for r in deferred:
        for c in range(w):
            a = r
            while a > 0 and m[a - 1, c] != 0:
                a -= 1
            b = r
            while b < h - 1 and m[b + 1, c] != 0:
                b += 1
            has_top = a > 0
            has_bot = b < h - 1
            if has_top and has_bot:
                span = <double>((b + 1) - (a - 1))
                t = (r - (a - 1)) / span
                for ch in range(3):
                    o[r, c, ch] = f[a - 1, c, ch] + t * (f[b + 1, c, ch] - f[a - 1, c, ch])
            elif has_top:
                for ch in range(3):
                    o[r, c, ch] = f[a - 1, c, ch]
            elif has_bot:
                for ch in range(3):
                    o[r, c, ch] = f[b + 1, c, ch]
            else:
                return 1
    return 0
