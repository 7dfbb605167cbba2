"""Demonstration storage: single demos, demo sets, and set union.

On-disk layout per demo (bit-exact, auditable with standard tools):

    <dir>/meta.json        task/material/seed/source record
    <dir>/frames/%06d.png  8-bit RGB observations
    <dir>/masks/%06d.png   optional, single channel, exactly {0, 255}
    <dir>/depth/%06d.pgm   optional, 16-bit, millimeters
    <dir>/actions.jsonl    one record per step: t, action, proprio

A demo set is a directory of demo directories plus index.json. Actions
are plain-text records so byte-equality between augmented demos and
their sources is trivially auditable.
"""

from __future__ import annotations

import io
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from matshift.errors import DataError

SOURCES = ("original", "augmented")
_ID_RE = re.compile(r"^[A-Za-z0-9_\-]+$")


@dataclass
class Frame:
    """One visual observation: 8-bit RGB plus its step index."""

    rgb: np.ndarray
    t: int


@dataclass
class ActionStep:
    """Action vector (task-space deltas + grip, each in [-1, 1]) and
    end-effector proprio state for one step."""

    action: np.ndarray
    proprio: np.ndarray


@dataclass
class DemoMeta:
    task_id: str
    material_id: str
    seed: int
    source: str = "original"
    source_demo: str | None = None


@dataclass(eq=False)
class Demonstration:
    """One trajectory: frames and actions of equal length T+1, with
    optional mask/depth sidecars of the same length."""

    frames: np.ndarray            # (T+1, H, W, 3) uint8
    actions: np.ndarray           # (T+1, A) float64
    proprios: np.ndarray          # (T+1, P) float64
    meta: DemoMeta
    masks: np.ndarray | None = None    # (T+1, H, W) uint8 in {0, 1}
    depths: np.ndarray | None = None   # (T+1, H, W) uint16 millimeters

    def __post_init__(self):
        self.validate()

    @property
    def demo_id(self) -> str:
        m = self.meta
        return f"{m.task_id}__{m.material_id}__s{m.seed:05d}__{m.source}"

    @property
    def horizon(self) -> int:
        """T, the last step index."""
        return len(self.frames) - 1

    def frame(self, t: int) -> Frame:
        return Frame(self.frames[t], t)

    def action_step(self, t: int) -> ActionStep:
        return ActionStep(self.actions[t], self.proprios[t])

    def key(self):
        m = self.meta
        return (m.task_id, m.seed, m.material_id, m.source)

    def validate(self):
        f = self.frames
        if f.ndim != 4 or f.shape[3] != 3 or f.dtype != np.uint8 or len(f) < 1:
            raise DataError("frames must be a non-empty (T+1, H, W, 3) uint8 array")
        n = len(f)
        if self.actions.ndim != 2 or len(self.actions) != n:
            raise DataError(
                f"frame/action length mismatch: {n} frames vs {len(self.actions)} actions"
            )
        if self.proprios.ndim != 2 or len(self.proprios) != n:
            raise DataError("proprios must align one-to-one with frames")
        if not np.isfinite(self.actions).all() or not np.isfinite(self.proprios).all():
            raise DataError("actions and proprios must be finite")
        if np.abs(self.actions).max(initial=0.0) > 1.0:
            raise DataError("action components must lie in [-1, 1]")
        if self.masks is not None:
            if self.masks.shape != f.shape[:3]:
                raise DataError("masks must match frames in count and size")
            vals = np.unique(self.masks)
            if not np.isin(vals, (0, 1)).all():
                raise DataError("mask values must be exactly {0, 1}")
        if self.depths is not None:
            if self.depths.shape != f.shape[:3]:
                raise DataError("depths must match frames in count and size")
            if self.depths.dtype != np.uint16:
                raise DataError("depths must be uint16 millimeters")
        m = self.meta
        if m.source not in SOURCES:
            raise DataError(f"meta.source must be one of {SOURCES}, got {m.source!r}")
        for name in ("task_id", "material_id"):
            if not _ID_RE.match(getattr(m, name)):
                raise DataError(f"meta.{name} must match {_ID_RE.pattern}")
        if not isinstance(m.seed, int) or m.seed < 0:
            raise DataError("meta.seed must be a non-negative integer")
        if m.source == "augmented" and not m.source_demo:
            raise DataError("augmented demos must record meta.source_demo")


@dataclass
class DemoSet:
    demos: list[Demonstration] = field(default_factory=list)

    @property
    def provenance(self) -> set[str]:
        return {d.meta.source for d in self.demos}

    def __len__(self):
        return len(self.demos)

    def __iter__(self):
        return iter(self.demos)

    def by_id(self) -> dict[str, Demonstration]:
        return {d.demo_id: d for d in self.demos}

    def validate(self, require_nonempty: bool = False):
        if require_nonempty and not self.demos:
            raise DataError("demo set is empty")
        seen = {}
        for d in self.demos:
            d.validate()
            k = d.key()
            if k in seen:
                raise DataError(f"duplicate demo key {k}")
            seen[k] = d


def actions_jsonl_bytes(demo: Demonstration) -> bytes:
    """Canonical serialized action records; the byte-equality unit for
    the shared-action contract."""
    buf = io.StringIO()
    for t in range(len(demo.actions)):
        rec = {
            "t": t,
            "action": [float(x) for x in demo.actions[t]],
            "proprio": [float(x) for x in demo.proprios[t]],
        }
        buf.write(json.dumps(rec) + "\n")
    return buf.getvalue().encode("ascii")


def _write_pgm16(path: Path, arr: np.ndarray):
    with open(path, "wb") as fh:
        fh.write(f"P5\n{arr.shape[1]} {arr.shape[0]}\n65535\n".encode("ascii"))
        fh.write(arr.astype(">u2").tobytes())


def _read_pgm16(path: Path) -> np.ndarray:
    data = path.read_bytes()
    m = re.match(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s", data)
    if not m:
        raise DataError(f"malformed PGM header in {path}")
    w, h, maxval = (int(g) for g in m.groups())
    if maxval != 65535:
        raise DataError(f"{path}: expected 16-bit PGM (maxval 65535), got {maxval}")
    raw = data[m.end():]
    if len(raw) != w * h * 2:
        raise DataError(f"{path}: truncated PGM payload")
    return np.frombuffer(raw, dtype=">u2").reshape(h, w).astype(np.uint16)


def save_demo(demo: Demonstration, root: Path) -> Path:
    """Write one demo directory; returns the directory path.

    Layout is bit-exact: saving the same demo twice produces identical
    trees.
    """
    demo.validate()
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    # Clear stale step files so overwriting with a shorter demo (or one
    # without sidecars) cannot corrupt a later load.
    for sub, suffix in (("frames", ".png"), ("masks", ".png"), ("depth", ".pgm")):
        d = root / sub
        if d.is_dir():
            for old in d.glob(f"*{suffix}"):
                old.unlink()
            if (sub == "masks" and demo.masks is None) or (
                    sub == "depth" and demo.depths is None):
                d.rmdir()
    meta = {
        "task_id": demo.meta.task_id,
        "material_id": demo.meta.material_id,
        "seed": demo.meta.seed,
        "T": demo.horizon,
        "source": demo.meta.source,
        "source_demo": demo.meta.source_demo,
    }
    (root / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    (root / "actions.jsonl").write_bytes(actions_jsonl_bytes(demo))
    fdir = root / "frames"
    fdir.mkdir(exist_ok=True)
    for t in range(len(demo.frames)):
        Image.fromarray(demo.frames[t], "RGB").save(fdir / f"{t:06d}.png", format="PNG")
    if demo.masks is not None:
        mdir = root / "masks"
        mdir.mkdir(exist_ok=True)
        for t in range(len(demo.masks)):
            Image.fromarray(demo.masks[t] * np.uint8(255), "L").save(
                mdir / f"{t:06d}.png", format="PNG")
    if demo.depths is not None:
        ddir = root / "depth"
        ddir.mkdir(exist_ok=True)
        for t in range(len(demo.depths)):
            _write_pgm16(ddir / f"{t:06d}.pgm", demo.depths[t])
    return root


def _load_indexed(directory: Path, suffix: str, loader, expect: int | None):
    files = sorted(directory.glob(f"*{suffix}"))
    if not files:
        raise DataError(f"no {suffix} files in {directory}")
    for t, path in enumerate(files):
        if path.name != f"{t:06d}{suffix}":
            raise DataError(f"{directory}: step files not contiguous at index {t} (found {path.name})")
    if expect is not None and len(files) != expect:
        raise DataError(f"{directory}: expected {expect} files, found {len(files)}")
    out = []
    for t, path in enumerate(files):
        try:
            out.append(loader(path))
        except DataError:
            raise
        except Exception as exc:
            raise DataError(f"failed to decode {directory.name} step {t}: {exc}") from exc
    return out


def load_demo(root: Path) -> Demonstration:
    """Load and fully validate one demo directory. Any invariant
    violation (length mismatch, bad mask values, corrupt file) is a hard
    error."""
    root = Path(root)
    meta_path = root / "meta.json"
    if not meta_path.is_file():
        raise DataError(f"missing meta.json in {root}")
    meta_raw = json.loads(meta_path.read_text())
    try:
        meta = DemoMeta(
            task_id=meta_raw["task_id"], material_id=meta_raw["material_id"],
            seed=int(meta_raw["seed"]), source=meta_raw["source"],
            source_demo=meta_raw.get("source_demo"),
        )
        declared_t = int(meta_raw["T"])
    except KeyError as exc:
        raise DataError(f"{meta_path}: missing field {exc}") from exc

    actions_path = root / "actions.jsonl"
    if not actions_path.is_file():
        raise DataError(f"missing actions.jsonl in {root}")
    actions, proprios = [], []
    for lineno, line in enumerate(actions_path.read_text().splitlines()):
        try:
            rec = json.loads(line)
            if rec["t"] != lineno:
                raise DataError(f"{actions_path}: non-contiguous step index at line {lineno}")
            actions.append(rec["action"])
            proprios.append(rec["proprio"])
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DataError(f"{actions_path}: malformed record at line {lineno}: {exc}") from exc
    try:
        actions_arr = np.asarray(actions, dtype=np.float64)
        proprios_arr = np.asarray(proprios, dtype=np.float64)
    except (ValueError, TypeError) as exc:
        raise DataError(f"{actions_path}: inconsistent record shapes: {exc}") from exc

    def _load_rgb(path):
        arr = np.asarray(Image.open(path).convert("RGB"), dtype=np.uint8)
        return arr

    frames = np.stack(_load_indexed(root / "frames", ".png", _load_rgb, None))
    if len(frames) != len(actions):
        raise DataError(
            f"{root}: {len(frames)} frames but {len(actions)} action records")
    if declared_t != len(frames) - 1:
        raise DataError(f"{root}: meta.T = {declared_t} but demo has {len(frames)} frames")

    masks = None
    if (root / "masks").is_dir():
        def _load_mask(path):
            arr = np.asarray(Image.open(path), dtype=np.uint8)
            if arr.ndim != 2 or arr.shape != frames.shape[1:3]:
                raise DataError(f"{path}: mask size does not match frames")
            bad = ~np.isin(arr, (0, 255))
            if bad.any():
                raise DataError(f"{path}: mask values must be exactly 0 or 255")
            return (arr // 255).astype(np.uint8)
        masks = np.stack(_load_indexed(root / "masks", ".png", _load_mask, len(frames)))
    depths = None
    if (root / "depth").is_dir():
        def _load_depth(path):
            arr = _read_pgm16(path)
            if arr.shape != frames.shape[1:3]:
                raise DataError(f"{path}: depth size does not match frames")
            return arr
        depths = np.stack(_load_indexed(root / "depth", ".pgm", _load_depth, len(frames)))

    return Demonstration(
        frames=frames, actions=actions_arr, proprios=proprios_arr,
        meta=meta, masks=masks, depths=depths,
    )


def save_set(demoset: DemoSet, root: Path) -> Path:
    demoset.validate()
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    rels = []
    for demo in demoset.demos:
        save_demo(demo, root / demo.demo_id)
        rels.append(demo.demo_id)
    index = {"demos": sorted(rels)}
    (root / "index.json").write_text(json.dumps(index, indent=2, sort_keys=True) + "\n")
    return root


def load_set(root: Path) -> DemoSet:
    root = Path(root)
    index_path = root / "index.json"
    if not index_path.is_file():
        raise DataError(f"missing index.json in {root}")
    rels = json.loads(index_path.read_text())["demos"]
    ds = DemoSet([load_demo(root / rel) for rel in rels])
    ds.validate()
    return ds


def union_sets(original: DemoSet, augmented: DemoSet) -> DemoSet:
    """D-hat = D union D'. Every augmented demo must carry source =
    'augmented' and byte-identical actions to its source original."""
    originals_by_id = original.by_id()
    for demo in augmented:
        if demo.meta.source != "augmented":
            raise DataError(
                f"demo {demo.demo_id} in the augmented set has source "
                f"{demo.meta.source!r}")
        src = originals_by_id.get(demo.meta.source_demo)
        if src is None:
            raise DataError(
                f"augmented demo {demo.demo_id} references unknown source "
                f"{demo.meta.source_demo!r}")
        if actions_jsonl_bytes(demo) != actions_jsonl_bytes(src):
            raise DataError(
                f"augmented demo {demo.demo_id} does not share byte-identical "
                f"actions with its source {src.demo_id}")
    result = DemoSet(list(original.demos) + list(augmented.demos))
    result.validate()
    if len(result) != len(original) + len(augmented):
        raise DataError("union lost demos")  # unreachable; guarded by validate
    return result
