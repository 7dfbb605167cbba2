"""Material tables for the simulator.

Three id namespaces resolve to reflectance parameters:

* fixed named materials (the single-material baseline, the neutral lower
  cube, the table),
* ``render_<seed>`` — seeded flat colors with randomized gloss and no
  texture, the sim-side appearance-randomization analogue,
* bank exemplar ids when a material bank is attached.
"""

from __future__ import annotations

import colorsys
import re

import numpy as np

from matshift.errors import DataError
from matshift.shading import MaterialParams

_RENDER_RE = re.compile(r"^render_(\d+)$")


def _flat(rgb, roughness, specular, metallic=0.0, transparency=0.0) -> MaterialParams:
    tex = np.asarray(rgb, dtype=np.float64).reshape(1, 1, 3)
    return MaterialParams(albedo_texture=tex, tile=1.0, roughness=roughness,
                          specular=specular, metallic=metallic,
                          transparency=transparency)


def base_materials() -> dict[str, MaterialParams]:
    return {
        # Single training material for the baseline variant.
        "plastic_red": _flat((0.72, 0.21, 0.19), roughness=0.35, specular=0.5),
        # Neutral lower cube in the stacking task; identical across variants.
        "slate_base": _flat((0.20, 0.23, 0.30), roughness=0.6, specular=0.2),
    }


TABLE_MATERIAL = _flat((0.47, 0.45, 0.43), roughness=0.85, specular=0.04)
GRIPPER_COLOR = (0.13, 0.13, 0.15)


def render_material(seed: int) -> MaterialParams:
    """Flat color with randomized gloss, deterministic in the seed."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([0x52454E44, seed])))
    hue = rng.uniform(0.0, 1.0)
    sat = rng.uniform(0.35, 0.95)
    val = rng.uniform(0.35, 0.95)
    rgb = colorsys.hsv_to_rgb(hue, sat, val)
    return _flat(rgb,
                 roughness=rng.uniform(0.05, 0.9),
                 specular=rng.uniform(0.1, 0.9),
                 metallic=rng.uniform(0.0, 0.6))


class MaterialResolver:
    """material_id -> MaterialParams across all namespaces."""

    def __init__(self, bank=None):
        self._named = base_materials()
        self._bank = bank

    def resolve(self, material_id: str) -> MaterialParams:
        if material_id in self._named:
            return self._named[material_id]
        m = _RENDER_RE.match(material_id)
        if m:
            return render_material(int(m.group(1)))
        if self._bank is not None and material_id in self._bank:
            return self._bank.material_params(material_id)
        raise DataError(f"unknown material id {material_id!r}")

    def __contains__(self, material_id: str) -> bool:
        try:
            self.resolve(material_id)
            return True
        except DataError:
            return False
