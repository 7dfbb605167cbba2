"""Expert demonstration collection with ground-truth sidecars."""

from __future__ import annotations

import numpy as np

from matshift.demos import DemoMeta, DemoSet, Demonstration
from matshift.errors import DataError
from matshift.sim.env import TabletopEnv
from matshift.sim.expert import scripted_expert


def run_expert_episode(env: TabletopEnv, material_id: str, seed: int):
    """Roll the scripted expert; returns (frames, actions, proprios, masks,
    depths, result_steps). Raises if the expert fails within the horizon."""
    state, frame, mask, depth = env.reset(material_id, seed)
    frames, masks, depths = [frame], [mask], [depth]
    actions, proprios = [], []
    done = False
    while not done:
        step = scripted_expert(state, env)
        actions.append(step.action)
        proprios.append(step.proprio)
        state, frame, mask, depth, success, done = env.step(state, step)
        frames.append(frame)
        masks.append(mask)
        depths.append(depth)
    if not state.success_latched:
        raise DataError(
            f"expert failed on task={env.task_id} material={material_id} seed={seed}")
    # Pair the final observation with a hold action.
    final = scripted_expert(state, env)
    actions.append(final.action)
    proprios.append(final.proprio)
    return frames, actions, proprios, masks, depths, state.step


def collect_demos(env: TabletopEnv, materials: list[str], seeds: list[int]) -> DemoSet:
    """One demonstration per (material, seed) pair, all source=original,
    with exact ground-truth masks and depths attached."""
    if not materials or not seeds:
        raise DataError("collect_demos requires non-empty material and seed lists")
    demos = []
    for material_id in materials:
        for seed in seeds:
            frames, actions, proprios, masks, depths, _ = run_expert_episode(
                env, material_id, seed)
            demos.append(Demonstration(
                frames=np.stack(frames),
                actions=np.stack(actions),
                proprios=np.stack(proprios),
                masks=np.stack(masks),
                depths=np.stack(depths),
                meta=DemoMeta(task_id=env.task_id, material_id=material_id,
                              seed=seed, source="original"),
            ))
    ds = DemoSet(demos)
    ds.validate(require_nonempty=True)
    return ds
