"""Toy top-down tabletop simulator: three tasks, material-parameterized
rendering, scripted experts, and ground-truth masks/depths."""

from matshift.sim.collect import collect_demos
from matshift.sim.env import EpisodeResult, SimConfig, SimState, TabletopEnv
from matshift.sim.expert import scripted_expert
from matshift.sim.materials import MaterialResolver, render_material

__all__ = [
    "EpisodeResult",
    "MaterialResolver",
    "SimConfig",
    "SimState",
    "TabletopEnv",
    "collect_demos",
    "render_material",
    "scripted_expert",
]
