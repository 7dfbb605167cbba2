"""Top-down tabletop environment with kinematic grasping.

Geometry lives in a unit workspace; heights are in z-units where
1.0 z-unit = ``height_scale_mm`` millimeters toward the camera. The
orthographic camera looks straight down, so the photometric model's
fixed view vector (0, 0, 1) is exact. Rendering, ground-truth masks and
16-bit depth all come from one z-buffer pass, which keeps the
mask/pixel/depth consistency invariants exact by construction.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field, replace

import numpy as np

from matshift.demos import ActionStep
from matshift.errors import DataError
from matshift.shading import (LightConfig, normals_from_depth, shade_region,
                              to_uint8_image)
from matshift.sim.materials import GRIPPER_COLOR, TABLE_MATERIAL, MaterialResolver

TASKS = ("pick_cube", "stack_cube", "close_box")

_OWNER_TABLE = 0
_OWNER_GRIPPER = 255


@dataclass
class SimConfig:
    """Normative environment constants (all config-overridable)."""

    workspace_size: float = 1.0
    image_size: int = 96
    horizon_pick: int = 80
    horizon_stack: int = 120
    horizon_close: int = 100
    max_step: float = 0.05
    grip_step: float = 0.5
    grasp_radius: float = 0.08
    grasp_ztol: float = 0.12
    lift_height: float = 0.5
    pick_lift_frac: float = 0.6
    stack_center_frac: float = 0.25
    close_angle_deg: float = 5.0
    cube_size: float = 0.16
    cube_height: float = 0.4
    box_size: float = 0.30
    box_height: float = 0.25
    lid_len_xy: float = 0.30
    lid_len_z: float = 0.55
    lid_thickness: float = 0.03
    lid_gain_deg: float = 9.0
    lid_contact_x: float = 0.10
    lid_contact_y: float = 0.07
    lid_contact_z_below: float = 0.20
    lid_contact_z_above: float = 0.12
    plane_depth_mm: float = 600.0
    height_scale_mm: float = 100.0

    def horizon(self, task_id: str) -> int:
        return {"pick_cube": self.horizon_pick,
                "stack_cube": self.horizon_stack,
                "close_box": self.horizon_close}[task_id]


@dataclass
class GripperState:
    x: float
    y: float
    z: float
    grip: float


@dataclass
class ObjectState:
    id: str
    x: float
    y: float
    z: float          # bottom height, z-units
    yaw: float        # radians
    size: float
    height: float
    material_id: str
    held: bool = False
    resting_on: str | None = None

    @property
    def top(self) -> float:
        return self.z + self.height


@dataclass
class SimState:
    task_id: str
    material_id: str
    seed: int
    gripper: GripperState
    objects: list[ObjectState] = field(default_factory=list)
    lid_angle: float = 0.0    # degrees; close_box only
    step: int = 0
    success_latched: bool = False

    def object(self, oid: str) -> ObjectState:
        for o in self.objects:
            if o.id == oid:
                return o
        raise DataError(f"no object {oid!r} in state")

    def copy(self) -> "SimState":
        return replace(
            self, gripper=replace(self.gripper),
            objects=[replace(o) for o in self.objects])


@dataclass
class EpisodeResult:
    success: bool
    steps_used: int
    task_id: str
    material_id: str
    seed: int


def _stable_rng(*parts) -> np.random.Generator:
    ints = [p if isinstance(p, int) else zlib.crc32(str(p).encode()) for p in parts]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(ints)))


class TabletopEnv:
    """One env instance is single-threaded; run many with distinct seeds
    for parallel evaluation. `step` is a pure function of (state, action);
    all episode state lives in the SimState it returns."""

    def __init__(self, task_id: str, config: SimConfig | None = None,
                 resolver: MaterialResolver | None = None,
                 light: LightConfig | None = None, render: bool = True):
        if task_id not in TASKS:
            raise DataError(f"unknown task {task_id!r} (expected one of {TASKS})")
        self.task_id = task_id
        self.cfg = config or SimConfig()
        self.resolver = resolver or MaterialResolver()
        self.light = light or LightConfig()
        self.render_enabled = render
        s = self.cfg.image_size
        centers = (np.arange(s) + 0.5) / s
        self._px_x = np.broadcast_to(centers[None, :], (s, s))
        self._px_y = np.broadcast_to(centers[:, None], (s, s))

    # ------------------------------------------------------------------
    # episode API

    def reset(self, material_id: str, seed: int):
        """Deterministic initial state from (task, material, seed); returns
        (state, frame, mask, depth)."""
        if material_id not in self.resolver:
            raise DataError(f"material {material_id!r} not known to the resolver")
        rng = _stable_rng(self.task_id, material_id, seed)
        cfg = self.cfg
        gripper = GripperState(x=0.5, y=0.18, z=0.75, grip=0.0)
        objects = []
        lid_angle = 0.0
        if self.task_id == "pick_cube":
            objects.append(self._sample_cube(rng, "cube", material_id))
        elif self.task_id == "stack_cube":
            a = self._sample_cube(rng, "cube_a", material_id)
            while True:
                b = self._sample_cube(rng, "cube_b", "slate_base")
                if math.hypot(a.x - b.x, a.y - b.y) >= 2.0 * cfg.cube_size:
                    break
            objects.extend([a, b])
        else:
            objects.append(ObjectState(
                id="box", x=rng.uniform(0.30, 0.70), y=rng.uniform(0.40, 0.70),
                z=0.0, yaw=0.0, size=cfg.box_size, height=cfg.box_height,
                material_id=material_id))
            lid_angle = rng.uniform(55.0, 85.0)
        state = SimState(task_id=self.task_id, material_id=material_id,
                         seed=seed, gripper=gripper, objects=objects,
                         lid_angle=lid_angle)
        frame, mask, depth = self.render(state)
        return state, frame, mask, depth

    def _sample_cube(self, rng, oid, material_id) -> ObjectState:
        cfg = self.cfg
        return ObjectState(
            id=oid, x=rng.uniform(0.15, 0.85), y=rng.uniform(0.15, 0.85),
            z=0.0, yaw=rng.uniform(0.0, 2.0 * math.pi), size=cfg.cube_size,
            height=cfg.cube_height, material_id=material_id)

    def step(self, state: SimState, action):
        """Kinematic update; returns (state, frame, mask, depth, success, done).

        Actions are clamped to [-1, 1]; position deltas scale by max_step.
        """
        if isinstance(action, ActionStep):
            action = action.action
        a = np.clip(np.asarray(action, dtype=np.float64), -1.0, 1.0)
        if a.shape != (4,):
            raise DataError(f"action must have 4 components, got shape {a.shape}")
        cfg = self.cfg
        st = state.copy()
        g = st.gripper
        g.x = float(np.clip(g.x + a[0] * cfg.max_step, 0.0, 1.0))
        g.y = float(np.clip(g.y + a[1] * cfg.max_step, 0.0, 1.0))
        g.z = float(np.clip(g.z + a[2] * cfg.max_step, 0.0, 1.0))
        g.grip = float(np.clip(g.grip + a[3] * cfg.grip_step, 0.0, 1.0))

        held = next((o for o in st.objects if o.held), None)
        if held is not None:
            if g.grip <= 0.5:
                held.held = False
                self._settle(st, held)
            else:
                held.x, held.y = g.x, g.y
                held.z = max(0.0, g.z - held.height)
                held.resting_on = None
        else:
            if g.grip > 0.5:
                self._try_grasp(st)

        if st.task_id == "close_box" and st.lid_angle > 0.0:
            self._push_lid(st, a)

        succeeded = self._success(st)
        st.success_latched = st.success_latched or succeeded
        st.step += 1
        done = st.success_latched or st.step >= cfg.horizon(st.task_id)
        frame, mask, depth = self.render(st)
        return st, frame, mask, depth, st.success_latched, done

    def _graspable(self, st: SimState):
        if st.task_id == "close_box":
            return []
        return st.objects

    def _try_grasp(self, st: SimState):
        cfg = self.cfg
        g = st.gripper
        best, best_d = None, None
        for o in self._graspable(st):
            d = math.hypot(g.x - o.x, g.y - o.y)
            if d <= cfg.grasp_radius and abs(g.z - o.top) <= cfg.grasp_ztol:
                if best is None or d < best_d:
                    best, best_d = o, d
        if best is not None:
            best.held = True
            best.resting_on = None

    def _settle(self, st: SimState, obj: ObjectState):
        if st.task_id == "stack_cube":
            other = next(o for o in st.objects if o.id != obj.id)
            if math.hypot(obj.x - other.x, obj.y - other.y) < 0.5 * obj.size:
                obj.z = other.top
                obj.resting_on = other.id
                return
        obj.z = 0.0
        obj.resting_on = None

    def _lid_edge(self, st: SimState):
        cfg = self.cfg
        box = st.objects[0]
        theta = math.radians(st.lid_angle)
        hinge_y = box.y - 0.5 * cfg.box_size
        ex = box.x
        ey = hinge_y + cfg.lid_len_xy * math.cos(theta)
        ez = cfg.box_height + cfg.lid_thickness + cfg.lid_len_z * math.sin(theta)
        return ex, ey, ez

    def _push_lid(self, st: SimState, action):
        cfg = self.cfg
        g = st.gripper
        ex, ey, ez = self._lid_edge(st)
        press = max(0.0, -float(action[2]))
        if press <= 0.0:
            return
        if (abs(g.x - ex) <= cfg.lid_contact_x and abs(g.y - ey) <= cfg.lid_contact_y
                and -cfg.lid_contact_z_below <= g.z - ez <= cfg.lid_contact_z_above):
            st.lid_angle = max(0.0, st.lid_angle - cfg.lid_gain_deg * press)

    def _success(self, st: SimState) -> bool:
        cfg = self.cfg
        if st.task_id == "pick_cube":
            cube = st.objects[0]
            return cube.held and cube.z > cfg.pick_lift_frac * cfg.lift_height
        if st.task_id == "stack_cube":
            a, b = st.object("cube_a"), st.object("cube_b")
            centered = math.hypot(a.x - b.x, a.y - b.y) < cfg.stack_center_frac * cfg.cube_size
            return (not a.held) and a.resting_on == b.id and centered
        return st.lid_angle < cfg.close_angle_deg

    # ------------------------------------------------------------------
    # rendering

    def _rect_mask(self, cx, cy, half_x, half_y, yaw):
        dx = self._px_x - cx
        dy = self._px_y - cy
        c, s = math.cos(yaw), math.sin(yaw)
        u = c * dx + s * dy
        v = -s * dx + c * dy
        return (np.abs(u) <= half_x) & (np.abs(v) <= half_y)

    def _surfaces(self, st: SimState):
        """(surface_id, object, footprint, height_map) bottom-up; target
        object surfaces carry the episode material."""
        cfg = self.cfg
        surfaces = []
        if st.task_id in ("pick_cube", "stack_cube"):
            order = sorted(st.objects, key=lambda o: o.top)
            for i, o in enumerate(order):
                fp = self._rect_mask(o.x, o.y, 0.5 * o.size, 0.5 * o.size, o.yaw)
                surfaces.append((o.id, o, fp, np.where(fp, o.top, 0.0)))
        else:
            box = st.objects[0]
            fp = self._rect_mask(box.x, box.y, 0.5 * box.size, 0.5 * box.size, 0.0)
            surfaces.append(("box_base", box, fp, np.where(fp, box.top, 0.0)))
            theta = math.radians(st.lid_angle)
            proj = cfg.lid_len_xy * math.cos(theta)
            hinge_y = box.y - 0.5 * cfg.box_size
            span = self._px_y - hinge_y
            lid_fp = ((np.abs(self._px_x - box.x) <= 0.5 * cfg.lid_len_xy)
                      & (span >= 0.0) & (span <= proj))
            if proj > 0.0:
                frac = np.clip(span / proj, 0.0, 1.0)
            else:
                frac = np.zeros_like(span)
            lid_h = (cfg.box_height + cfg.lid_thickness
                     + frac * (cfg.lid_len_z * math.sin(theta)))
            surfaces.append(("box_lid", box, lid_fp, np.where(lid_fp, lid_h, 0.0)))
        return surfaces

    def _gripper_mask(self, st: SimState):
        s = self.cfg.image_size
        g = st.gripper
        cx = int(np.clip(round(g.x * s - 0.5), 0, s - 1))
        cy = int(np.clip(round(g.y * s - 0.5), 0, s - 1))
        m = np.zeros((s, s), dtype=bool)
        m[max(0, cy - 1):cy + 2, max(0, cx - 4):cx + 5] = True
        m[max(0, cy - 4):cy + 5, max(0, cx - 1):cx + 2] = True
        return m

    def target_ids(self, st: SimState):
        """Surface ids belonging to the material-varied target object."""
        if st.task_id == "pick_cube":
            return ("cube",)
        if st.task_id == "stack_cube":
            return ("cube_a",)
        return ("box_base", "box_lid")

    def render(self, st: SimState):
        """Returns (frame uint8 HxWx3, mask uint8 {0,1}, depth uint16 mm);
        (None, None, None) when rendering is disabled."""
        if not self.render_enabled:
            return None, None, None
        cfg = self.cfg
        s = cfg.image_size
        surfaces = self._surfaces(st)
        height = np.zeros((s, s), dtype=np.float64)
        owner = np.full((s, s), _OWNER_TABLE, dtype=np.uint8)
        sid_codes = {}
        for code, (sid, obj, fp, hmap) in enumerate(surfaces, start=1):
            sid_codes[sid] = code
            claim = fp & (hmap > height)
            height[claim] = hmap[claim]
            owner[claim] = code
        gmask = self._gripper_mask(st)
        g_h = st.gripper.z + 0.08
        claim = gmask & (g_h > height)
        height[claim] = g_h
        owner[claim] = _OWNER_GRIPPER

        depth_mm = cfg.plane_depth_mm - cfg.height_scale_mm * height
        depth = np.clip(np.rint(depth_mm), 0, 65535).astype(np.uint16)
        normals = normals_from_depth(depth.astype(np.float64))

        targets = self.target_ids(st)
        canvas = shade_region(np.zeros((s, s, 3)), np.ones((s, s), np.uint8),
                              normals, TABLE_MATERIAL, self.light)
        # Opaque non-target surfaces, visible either directly or through
        # the target object.
        target_codes = {sid_codes[t] for t in targets if t in sid_codes}
        for sid, obj, fp, hmap in surfaces:
            if sid in targets:
                continue
            visible = fp & (np.isin(owner, [sid_codes[sid]] + sorted(target_codes)))
            params = self.resolver.resolve(obj.material_id)
            canvas = shade_region(canvas, visible.astype(np.uint8), normals,
                                  params, self.light)
        mask_total = np.zeros((s, s), dtype=np.uint8)
        for sid, obj, fp, hmap in surfaces:
            if sid not in targets:
                continue
            vis = (owner == sid_codes[sid]).astype(np.uint8)
            params = self.resolver.resolve(obj.material_id)
            canvas = shade_region(canvas, vis, normals, params, self.light)
            mask_total |= vis
        canvas[owner == _OWNER_GRIPPER] = GRIPPER_COLOR
        frame = to_uint8_image(canvas)
        return frame, mask_total, depth

    def observe(self, st: SimState):
        frame, _, _ = self.render(st)
        proprio = np.array([st.gripper.x, st.gripper.y, st.gripper.z,
                            st.gripper.grip], dtype=np.float64)
        return frame, proprio
