"""Scripted experts, one per task. Stateless: each call derives the next
action purely from the current SimState, so experts recover from any
reachable intermediate configuration."""

from __future__ import annotations

import math

import numpy as np

from matshift.demos import ActionStep
from matshift.errors import DataError
from matshift.sim.env import SimConfig, SimState


def _move(dx, dy, dz, grip, cfg: SimConfig) -> np.ndarray:
    a = np.array([dx / cfg.max_step, dy / cfg.max_step, dz / cfg.max_step, grip],
                 dtype=np.float64)
    return np.clip(a, -1.0, 1.0)


def _proprio(state: SimState) -> np.ndarray:
    g = state.gripper
    return np.array([g.x, g.y, g.z, g.grip], dtype=np.float64)


def _pick_action(state: SimState, cube, cfg: SimConfig, carry_z=None) -> np.ndarray:
    """Approach above the cube, descend, close the grip, lift."""
    g = state.gripper
    if cube.held:
        target_z = carry_z if carry_z is not None else 0.85
        return _move(0.0, 0.0, target_z - g.z, 1.0, cfg)
    dx, dy = cube.x - g.x, cube.y - g.y
    horiz = math.hypot(dx, dy)
    grasp_z = cube.top + 0.02
    if horiz > 0.04:
        # Align laterally at hover height first.
        return _move(dx, dy, 0.75 - g.z, -1.0, cfg)
    if abs(g.z - grasp_z) > 0.03:
        return _move(dx, dy, grasp_z - g.z, -1.0, cfg)
    return _move(dx, dy, 0.0, 1.0, cfg)


def _stack_action(state: SimState, cfg: SimConfig) -> np.ndarray:
    a, b = state.object("cube_a"), state.object("cube_b")
    g = state.gripper
    if a.resting_on == b.id and not a.held:
        return np.zeros(4)
    if not a.held:
        return _pick_action(state, a, cfg)
    carry_z = b.top + a.height + 0.10
    place_z = b.top + a.height + 0.005
    dx, dy = b.x - g.x, b.y - g.y
    horiz = math.hypot(dx, dy)
    if horiz > 0.02:
        return _move(dx, dy, carry_z - g.z, 1.0, cfg)
    if g.z - place_z > 0.02:
        return _move(dx, dy, place_z - g.z, 1.0, cfg)
    return _move(dx, dy, 0.0, -1.0, cfg)


def _close_action(state: SimState, env_edge, cfg: SimConfig) -> np.ndarray:
    if state.lid_angle < cfg.close_angle_deg:
        return np.zeros(4)
    g = state.gripper
    ex, ey, ez = env_edge(state)
    in_contact = (abs(g.x - ex) <= cfg.lid_contact_x * 0.8
                  and abs(g.y - ey) <= cfg.lid_contact_y * 0.8
                  and -cfg.lid_contact_z_below * 0.8 <= g.z - ez <= cfg.lid_contact_z_above * 0.8)
    if in_contact:
        return _move(ex - g.x, ey - g.y, -cfg.max_step, 0.0, cfg)
    return _move(ex - g.x, ey - g.y, (ez + 0.02) - g.z, 0.0, cfg)


def scripted_expert(state: SimState, env) -> ActionStep:
    """Next expert action for the given state. The env provides geometry
    helpers and config; it is not mutated."""
    cfg = env.cfg
    if state.task_id == "pick_cube":
        action = _pick_action(state, state.objects[0], cfg)
    elif state.task_id == "stack_cube":
        action = _stack_action(state, cfg)
    elif state.task_id == "close_box":
        action = _close_action(state, env._lid_edge, cfg)
    else:
        raise DataError(f"no expert for task {state.task_id!r}")
    return ActionStep(action=action, proprio=_proprio(state))
