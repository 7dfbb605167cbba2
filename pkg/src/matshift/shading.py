"""Photometric material model: normals from depth, texture-mapped
Blinn-Phong shading, background in-fill and transparency compositing.

Shared by the simulator's renderer and the augmentation engine. All
computation runs in normalized [0, 1] float64; 8-bit images are converted
on ingest and re-quantized round-to-nearest on output. Roughness maps to
a specular exponent via 2^(12*(1-roughness)).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from matshift import kernels
from matshift.errors import DataError

DEFAULT_VIEW = (0.0, 0.0, 1.0)


def to_float_image(img: np.ndarray) -> np.ndarray:
    """8-bit image -> float64 in [0, 1]; float input is passed through."""
    if img.dtype == np.uint8:
        return img.astype(np.float64) / 255.0
    return np.ascontiguousarray(img, dtype=np.float64)


def to_uint8_image(img: np.ndarray) -> np.ndarray:
    """Round-to-nearest re-quantization of a [0, 1] float image."""
    return np.clip(np.rint(img * 255.0), 0.0, 255.0).astype(np.uint8)


@dataclass(eq=False)
class MaterialParams:
    """Reflectance parameters of one material.

    albedo_texture is a tileable RGB image (uint8 or [0, 1] float);
    tile scales screen-space UV into texture periods.
    """

    albedo_texture: np.ndarray
    tile: float = 1.0
    roughness: float = 0.5
    specular: float = 0.0
    metallic: float = 0.0
    transparency: float = 0.0
    albedo_f: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        tex = np.asarray(self.albedo_texture)
        if tex.ndim != 3 or tex.shape[2] != 3 or tex.shape[0] < 1 or tex.shape[1] < 1:
            raise DataError("albedo_texture must be a non-empty HxWx3 image")
        if not self.tile > 0:
            raise DataError(f"tile must be positive, got {self.tile}")
        for name in ("roughness", "specular", "metallic", "transparency"):
            val = getattr(self, name)
            if not (0.0 <= val <= 1.0):
                raise DataError(f"{name} must be in [0, 1], got {val}")
        self.albedo_f = to_float_image(tex)


@dataclass(eq=False)
class LightConfig:
    """Single directional light plus ambient term."""

    direction: tuple[float, float, float] = (0.3340309062419253, -0.2576809848151995, 0.9066553169423687)
    ambient: float = 0.35
    diffuse: float = 0.6
    specular_color: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=np.float64)
        norm = float(np.sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]))
        if abs(norm - 1.0) > 1e-6:
            raise DataError(f"light direction must be unit length, |d| = {norm}")
        if not (0.0 <= self.ambient <= 1.0 and 0.0 <= self.diffuse <= 1.0):
            raise DataError("ambient and diffuse must be in [0, 1]")
        if self.ambient + self.diffuse > 1.5:
            raise DataError("ambient + diffuse must not exceed 1.5")
        for c in self.specular_color:
            if not (0.0 <= c <= 1.0):
                raise DataError("specular_color components must be in [0, 1]")

    @staticmethod
    def from_unnormalized(direction, ambient=0.35, diffuse=0.6,
                          specular_color=(1.0, 1.0, 1.0)) -> "LightConfig":
        d = np.asarray(direction, dtype=np.float64)
        n = float(np.linalg.norm(d))
        if n == 0.0:
            raise DataError("light direction must be nonzero")
        return LightConfig(tuple(d / n), ambient, diffuse, tuple(specular_color))


def normals_from_depth(depth: np.ndarray) -> np.ndarray:
    """(H, W) depth -> (H, W, 3) unit normals, camera-facing (z > 0).

    normal = normalize(-dd/dx, -dd/dy, 1); central differences inside,
    one-sided at the borders.
    """
    return kernels.normals_from_depth(depth)


def sample_texture(texture: np.ndarray, uv, tile: float) -> np.ndarray:
    """Bilinear sample at uv*tile with wrap-around; period 1/tile in uv."""
    if not tile > 0:
        raise DataError(f"tile must be positive, got {tile}")
    tex = to_float_image(np.asarray(texture))
    u = np.atleast_1d(np.asarray(uv, dtype=np.float64)[..., 0]).ravel()
    v = np.atleast_1d(np.asarray(uv, dtype=np.float64)[..., 1]).ravel()
    out = kernels.bilinear_wrap(tex, u, v, float(tile))
    return out[0] if np.asarray(uv).ndim == 1 else out


def shade(uv, normal, params: MaterialParams, light: LightConfig,
          view=DEFAULT_VIEW) -> np.ndarray:
    """Shade a single pixel; the per-pixel reference for the kernels.

    color = clamp(albedo*(ambient + diffuse*max(0, n.l))
                  + specular*mix(spec_color, albedo, metallic)*max(0, n.h)^shininess)
    """
    albedo = sample_texture(params.albedo_f, np.asarray(uv, dtype=np.float64), params.tile)
    nx, ny, nz = (float(c) for c in normal)
    lx, ly, lz = (float(c) for c in light.direction)
    vx, vy, vz = (float(c) for c in view)
    hx, hy, hz = lx + vx, ly + vy, lz + vz
    hn = 1.0 / np.sqrt(hx * hx + hy * hy + hz * hz)
    hx, hy, hz = hx * hn, hy * hn, hz * hn
    ndl = max(0.0, nx * lx + ny * ly + nz * lz)
    ndh = max(0.0, nx * hx + ny * hy + nz * hz)
    shininess = 2.0 ** (12.0 * (1.0 - params.roughness))
    lobe = ndh ** shininess
    term = light.ambient + light.diffuse * ndl
    out = np.empty(3, dtype=np.float64)
    for c in range(3):
        spec_rgb = light.specular_color[c] * (1.0 - params.metallic) + albedo[c] * params.metallic
        out[c] = albedo[c] * term + params.specular * spec_rgb * lobe
    return np.clip(out, 0.0, 1.0)


def composite(shaded, fill, transparency: float):
    """out = (1 - transparency)*shaded + transparency*fill."""
    if not (0.0 <= transparency <= 1.0):
        raise DataError(f"transparency must be in [0, 1], got {transparency}")
    shaded = np.asarray(shaded, dtype=np.float64)
    fill = np.asarray(fill, dtype=np.float64)
    return (1.0 - transparency) * shaded + transparency * fill


def background_fill(frame: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Estimate the pixels hidden behind the mask.

    Inside the mask each pixel is the linear blend of the nearest
    boundary-ring pixels along its row (column fallback when a run spans
    the whole row); outside the mask the input passes through. Returns
    float64 in [0, 1].
    """
    m = np.ascontiguousarray(mask, dtype=np.uint8)
    if m.all():
        raise DataError("background_fill: mask covers the whole frame, no boundary to interpolate from")
    f = to_float_image(frame)
    out = f.copy()
    status = kernels.background_fill(f, m, out)
    if status != 0:
        raise DataError("background_fill: some masked pixel has no row or column boundary")
    return out


def shade_region(canvas: np.ndarray, mask: np.ndarray, normals: np.ndarray,
                 params: MaterialParams, light: LightConfig,
                 view=DEFAULT_VIEW, fill: np.ndarray | None = None) -> np.ndarray:
    """Shade all masked pixels of a float canvas with one material.

    `fill` is what shows through transparent materials; by default the
    canvas itself (i.e. whatever was already rendered beneath).
    Returns a new canvas; unmasked pixels are copied bit-exactly.
    """
    canvas = np.ascontiguousarray(canvas, dtype=np.float64)
    if fill is None:
        fill = canvas
    return kernels.shade_composite(
        canvas, np.ascontiguousarray(mask, dtype=np.uint8),
        np.ascontiguousarray(normals, dtype=np.float64), params.albedo_f,
        float(params.tile), float(params.roughness), float(params.specular),
        float(params.metallic), float(params.transparency),
        tuple(light.direction), float(light.ambient), float(light.diffuse),
        tuple(light.specular_color), tuple(view), fill)
