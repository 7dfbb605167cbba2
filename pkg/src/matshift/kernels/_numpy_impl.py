"""Vectorized NumPy implementation of the pixel kernels.

Kept operation-for-operation in step with the compiled core in
``_core.pyx`` so both backends produce bit-identical float64 results.
When editing one, edit the other.
"""

import numpy as np

BACKEND_NAME = "python"


def normals_from_depth(depth):
    """Per-pixel unit normals from a depth map.

    Central differences in the interior, one-sided at the borders;
    n = normalize(-dd/dx, -dd/dy, 1).
    """
    d = np.ascontiguousarray(depth, dtype=np.float64)
    h, w = d.shape
    gx = np.zeros_like(d)
    gy = np.zeros_like(d)
    if w >= 2:
        gx[:, 1:-1] = (d[:, 2:] - d[:, :-2]) * 0.5
        gx[:, 0] = d[:, 1] - d[:, 0]
        gx[:, -1] = d[:, -1] - d[:, -2]
    if h >= 2:
        gy[1:-1, :] = (d[2:, :] - d[:-2, :]) * 0.5
        gy[0, :] = d[1, :] - d[0, :]
        gy[-1, :] = d[-1, :] - d[-2, :]
    inv = 1.0 / np.sqrt(gx * gx + gy * gy + 1.0)
    out = np.empty((h, w, 3), dtype=np.float64)
    out[:, :, 0] = -gx * inv
    out[:, :, 1] = -gy * inv
    out[:, :, 2] = inv
    return out


def bilinear_wrap(texture, u, v, tile):
    """Bilinear texture lookup at (u, v) * tile with wrap-around addressing.

    texture: (th, tw, 3) float64; u, v: flat float64 arrays.
    """
    tex = np.ascontiguousarray(texture, dtype=np.float64)
    th, tw = tex.shape[:2]
    x = np.asarray(u, dtype=np.float64) * tile
    y = np.asarray(v, dtype=np.float64) * tile
    x = x - np.floor(x)
    y = y - np.floor(y)
    px = x * tw
    py = y * th
    j0 = np.floor(px).astype(np.intp)
    i0 = np.floor(py).astype(np.intp)
    fx = px - j0
    fy = py - i0
    j1 = j0 + 1
    j1[j1 == tw] = 0
    i1 = i0 + 1
    i1[i1 == th] = 0
    fx = fx[:, None]
    fy = fy[:, None]
    top = (1.0 - fx) * tex[i0, j0] + fx * tex[i0, j1]
    bot = (1.0 - fx) * tex[i1, j0] + fx * tex[i1, j1]
    return (1.0 - fy) * top + fy * bot


def shade_composite(frame, mask, normals, texture, tile, roughness, specular,
                    metallic, transparency, light_dir, ambient, diffuse,
                    specular_color, view, fill):
    """Blinn-Phong shade + transparency composite over masked pixels.

    frame, fill: (H, W, 3) float64 in [0, 1]; mask: (H, W) uint8;
    normals: (H, W, 3) float64. Returns a copy of frame with masked
    pixels replaced.
    """
    out = np.array(frame, dtype=np.float64, copy=True)
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        return out
    h, w = mask.shape
    lx, ly, lz = (float(c) for c in light_dir)
    vx, vy, vz = (float(c) for c in view)
    hx = lx + vx
    hy = ly + vy
    hz = lz + vz
    hn = 1.0 / np.sqrt(hx * hx + hy * hy + hz * hz)
    hx *= hn
    hy *= hn
    hz *= hn
    shininess = 2.0 ** (12.0 * (1.0 - roughness))

    u = xs.astype(np.float64) / w
    v = ys.astype(np.float64) / w
    albedo = bilinear_wrap(texture, u, v, tile)
    n = normals[ys, xs]
    ndl = np.maximum(0.0, n[:, 0] * lx + n[:, 1] * ly + n[:, 2] * lz)
    ndh = np.maximum(0.0, n[:, 0] * hx + n[:, 1] * hy + n[:, 2] * hz)
    lobe = ndh ** shininess
    term = ambient + diffuse * ndl
    color = np.empty_like(albedo)
    for c in range(3):
        spec_rgb = specular_color[c] * (1.0 - metallic) + albedo[:, c] * metallic
        color[:, c] = albedo[:, c] * term + specular * spec_rgb * lobe
    np.clip(color, 0.0, 1.0, out=color)
    fb = fill[ys, xs]
    for c in range(3):
        color[:, c] = (1.0 - transparency) * color[:, c] + transparency * fb[:, c]
    out[ys, xs] = color
    return out


def background_fill(frame, mask, out):
    """Row-wise linear interpolation across masked runs; column fallback.

    Writes into `out` (a copy of frame). Returns 0 on success, 1 if some
    pixel has neither a row nor a column boundary to interpolate from.
    """
    h, w = mask.shape
    m = mask != 0
    deferred = []
    for r in range(h):
        row = m[r]
        if not row.any():
            continue
        edges = np.diff(np.concatenate(([0], row.astype(np.int8), [0])))
        starts = np.nonzero(edges == 1)[0]
        ends = np.nonzero(edges == -1)[0] - 1
        for a, b in zip(starts, ends):
            has_left = a > 0
            has_right = b < w - 1
            if has_left and has_right:
                left = frame[r, a - 1]
                right = frame[r, b + 1]
                span = float((b + 1) - (a - 1))
                for c in range(a, b + 1):
                    t = (c - (a - 1)) / span
                    out[r, c] = left + t * (right - left)
            elif has_left:
                out[r, a:b + 1] = frame[r, a - 1]
            elif has_right:
                out[r, a:b + 1] = frame[r, b + 1]
            else:
                deferred.append(r)
    for r in deferred:
        for c in range(w):
            col = m[:, c]
            a = r
            while a > 0 and col[a - 1]:
                a -= 1
            b = r
            while b < h - 1 and col[b + 1]:
                b += 1
            has_top = a > 0
            has_bot = b < h - 1
            if has_top and has_bot:
                top = frame[a - 1, c]
                bot = frame[b + 1, c]
                span = float((b + 1) - (a - 1))
                t = (r - (a - 1)) / span
                out[r, c] = top + t * (bot - top)
            elif has_top:
                out[r, c] = frame[a - 1, c]
            elif has_bot:
                out[r, c] = frame[b + 1, c]
            else:
                return 1
    return 0
