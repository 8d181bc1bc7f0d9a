"""Grid city model: map loading, player kinematics, and orientation math.

World coordinates are continuous; the map is a grid of square cells of
side ``cell_size``. A point (x, z) occupies cell (floor(x/cell_size),
floor(z/cell_size)). y is ground-plane height and stays 0 in this world.
Angles are degrees throughout: pitch about X in (-90, 90), yaw about Y
and roll about Z in [0, 360).
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from enum import Enum

from .errors import Diagnostic, GimbalProximity, ParseError, ValidationError


class CellKind(Enum):
    STREET = "."
    BUILDING = "#"
    BOOTH = "B"
    SPAWN = "S"


_GLYPHS = {kind.value: kind for kind in CellKind}

# Movement envelope: server-authoritative speed and the per-call step cap.
PLAYER_SPEED = 4.0
MAX_DT = 0.5


@dataclass(frozen=True)
class EulerAngles:
    """View rotation in degrees: pitch about X, yaw about Y, roll about Z."""

    pitch_x: float
    yaw_y: float
    roll_z: float

    def __post_init__(self):
        if not -90.0 < self.pitch_x < 90.0:
            raise ValueError(f"pitch {self.pitch_x} outside (-90, 90)")
        if not 0.0 <= self.yaw_y < 360.0:
            raise ValueError(f"yaw {self.yaw_y} outside [0, 360)")
        if not 0.0 <= self.roll_z < 360.0:
            raise ValueError(f"roll {self.roll_z} outside [0, 360)")


@dataclass(frozen=True)
class Quaternion:
    """Unit quaternion in canonical form (w >= 0)."""

    x: float
    y: float
    z: float
    w: float

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z + self.w * self.w)

    @staticmethod
    def canonical(x: float, y: float, z: float, w: float) -> "Quaternion":
        """Normalize to unit length and flip sign so w >= 0 (q and -q are one rotation)."""
        n = math.sqrt(x * x + y * y + z * z + w * w)
        if n == 0.0:
            raise ValueError("zero quaternion")
        if w < 0.0:
            n = -n
        return Quaternion(x / n, y / n, z / n, w / n)


@dataclass(frozen=True)
class TriggerZone:
    """Circular region on the XZ plane."""

    x: float
    z: float
    radius: float


@dataclass(frozen=True)
class PlayerState:
    position: tuple[float, float, float]
    orientation: EulerAngles
    speed: float


@dataclass(frozen=True)
class MoveIntent:
    direction: tuple[float, float]  # unit vector on XZ
    turn: float                     # yaw rate, degrees per second


@dataclass(frozen=True)
class CityMap:
    name: str
    cell_size: float
    rows: tuple[str, ...]

    @property
    def width_cells(self) -> int:
        return len(self.rows[0])

    @property
    def height_cells(self) -> int:
        return len(self.rows)

    def cell(self, ix: int, iz: int) -> CellKind:
        return _GLYPHS[self.rows[iz][ix]]

    def cell_of(self, x: float, z: float) -> tuple[int, int]:
        return math.floor(x / self.cell_size), math.floor(z / self.cell_size)

    def cell_center(self, ix: int, iz: int) -> tuple[float, float]:
        return (ix + 0.5) * self.cell_size, (iz + 0.5) * self.cell_size

    def in_bounds(self, x: float, z: float) -> bool:
        return 0.0 <= x < self.width_cells * self.cell_size and 0.0 <= z < self.height_cells * self.cell_size

    def walkable(self, x: float, z: float) -> bool:
        """True when (x, z) is inside the map and not in a Building cell."""
        if x < 0.0 or z < 0.0:
            return False
        rows = self.rows
        ix = int(x / self.cell_size)
        iz = int(z / self.cell_size)
        if iz >= len(rows) or ix >= len(rows[0]):
            return False
        return rows[iz][ix] != "#"

    @property
    def booth_cell(self) -> tuple[int, int]:
        for iz, row in enumerate(self.rows):
            ix = row.find("B")
            if ix >= 0:
                return ix, iz
        raise AssertionError("validated map has a booth")

    @property
    def spawn_cells(self) -> tuple[tuple[int, int], ...]:
        return tuple(
            (ix, iz)
            for iz, row in enumerate(self.rows)
            for ix, ch in enumerate(row)
            if ch == "S"
        )

    def reachable_from_spawns(self) -> set[tuple[int, int]]:
        """Cells reachable from any spawn via 4-connected non-building cells."""
        seen: set[tuple[int, int]] = set()
        queue = deque(self.spawn_cells)
        seen.update(self.spawn_cells)
        w, h = self.width_cells, self.height_cells
        while queue:
            ix, iz = queue.popleft()
            for nx, nz in ((ix + 1, iz), (ix - 1, iz), (ix, iz + 1), (ix, iz - 1)):
                if 0 <= nx < w and 0 <= nz < h and (nx, nz) not in seen and self.rows[nz][nx] != "#":
                    seen.add((nx, nz))
                    queue.append((nx, nz))
        return seen

    def to_document(self) -> dict:
        return {"name": self.name, "cell_size": self.cell_size, "rows": list(self.rows)}


def load_map(document: str) -> CityMap:
    """Parse and validate a map document.

    The document is a JSON object {name, cell_size, rows}; rows are
    equal-length strings over the alphabet "." street, "#" building,
    "B" booth, "S" spawn. Raises ParseError for malformed documents and
    ValidationError listing every violated invariant otherwise.
    """
    try:
        obj = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"map is not valid JSON: {exc.msg}", line=exc.lineno, column=exc.colno) from None
    if not isinstance(obj, dict):
        raise ParseError("map document must be a JSON object")
    name = obj.get("name")
    if not isinstance(name, str) or not name:
        raise ParseError("map 'name' must be a non-empty string")
    cell_size = obj.get("cell_size")
    if not isinstance(cell_size, (int, float)) or isinstance(cell_size, bool) or cell_size <= 0:
        raise ParseError("map 'cell_size' must be a positive number")
    rows = obj.get("rows")
    if not isinstance(rows, list) or not rows or not all(isinstance(r, str) for r in rows):
        raise ParseError("map 'rows' must be a non-empty list of strings")
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(f"row {i} has length {len(row)}, expected {width}")
        bad = sorted({ch for ch in row if ch not in _GLYPHS})
        if bad:
            raise ParseError(f"row {i} contains unknown glyphs {bad!r}")

    cmap = CityMap(name=name, cell_size=float(cell_size), rows=tuple(rows))
    diags = validate_map(cmap)
    if diags:
        raise ValidationError(diags)
    return cmap


def validate_map(cmap: CityMap) -> list[Diagnostic]:
    """Check map invariants, returning every violation (no short-circuit)."""
    diags: list[Diagnostic] = []
    if cmap.width_cells < 4 or cmap.height_cells < 4:
        diags.append(Diagnostic("TooSmall", f"grid is {cmap.width_cells}x{cmap.height_cells}, minimum 4x4"))
    booths = [(ix, iz) for iz, row in enumerate(cmap.rows) for ix, ch in enumerate(row) if ch == "B"]
    spawns = cmap.spawn_cells
    if not booths:
        diags.append(Diagnostic("NoBooth", "map has no booth cell"))
    elif len(booths) > 1:
        diags.append(Diagnostic("MultipleBooths", f"map has {len(booths)} booth cells at {booths}"))
    if not spawns:
        diags.append(Diagnostic("NoSpawn", "map has no spawn cell"))
    if len(booths) == 1 and spawns:
        reachable = cmap.reachable_from_spawns()
        if booths[0] not in reachable:
            diags.append(Diagnostic("BoothUnreachable", f"booth at {booths[0]} is cut off from the spawns"))
    return diags


def step_player(state: PlayerState, intent: MoveIntent, dt: float, cmap: CityMap) -> PlayerState:
    """Advance the player by one simulation step.

    The full destination is taken when its cell is walkable; otherwise each
    axis is resolved in turn and blocked axes keep their old value (wall
    slide). Blocked movement is a normal outcome, never an error. Pure
    function: identical inputs give bit-identical outputs.
    """
    if not 0.0 < dt <= MAX_DT:
        raise ValueError(f"dt {dt} outside (0, {MAX_DT}]")
    x, y, z = state.position
    walkable = cmap.walkable
    nx = x + intent.direction[0] * state.speed * dt
    nz = z + intent.direction[1] * state.speed * dt
    if walkable(nx, nz):
        x, z = nx, nz
    else:
        if walkable(nx, z):
            x = nx
        if walkable(x, nz):
            z = nz
    if intent.turn == 0.0:
        orientation = state.orientation
    else:
        e = state.orientation
        orientation = EulerAngles(e.pitch_x, _norm_deg(e.yaw_y + intent.turn * dt), e.roll_z)
    return PlayerState(position=(x, y, z), orientation=orientation, speed=state.speed)


def euler_to_quaternion(e: EulerAngles) -> Quaternion:
    """Compose yaw(Y) * pitch(X) * roll(Z), roll applied first."""
    qy = _axis_half(0.0, 1.0, 0.0, e.yaw_y)
    qx = _axis_half(1.0, 0.0, 0.0, e.pitch_x)
    qz = _axis_half(0.0, 0.0, 1.0, e.roll_z)
    x, y, z, w = _hamilton(_hamilton(qy, qx), qz)
    return Quaternion.canonical(x, y, z, w)


def quaternion_to_euler(q: Quaternion) -> EulerAngles:
    """Invert euler_to_quaternion on the canonical Euler domain.

    Raises GimbalProximity when |pitch| > 89.99 degrees; the decomposition
    is ill-conditioned there and the caller decides what to do.
    """
    sin_pitch = 2.0 * (q.w * q.x - q.y * q.z)
    sin_pitch = max(-1.0, min(1.0, sin_pitch))
    pitch = math.degrees(math.asin(sin_pitch))
    if abs(pitch) > 89.99:
        raise GimbalProximity(f"pitch {pitch:.4f} deg is within 0.01 deg of the gimbal pole")
    yaw = math.degrees(math.atan2(2.0 * (q.x * q.z + q.w * q.y), 1.0 - 2.0 * (q.x * q.x + q.y * q.y)))
    roll = math.degrees(math.atan2(2.0 * (q.x * q.y + q.w * q.z), 1.0 - 2.0 * (q.x * q.x + q.z * q.z)))
    return EulerAngles(pitch, _norm_deg(yaw), _norm_deg(roll))


def in_trigger(position: tuple[float, float], zone: TriggerZone) -> bool:
    """True iff the XZ distance to the zone center is <= radius (boundary inclusive)."""
    dx = position[0] - zone.x
    dz = position[1] - zone.z
    return dx * dx + dz * dz <= zone.radius * zone.radius


def _norm_deg(d: float) -> float:
    # d % 360.0 can round to exactly 360.0 for tiny negative d
    d = d % 360.0
    return 0.0 if d >= 360.0 else d


def _axis_half(ax: float, ay: float, az: float, deg: float) -> tuple[float, float, float, float]:
    half = math.radians(deg) * 0.5
    s = math.sin(half)
    return ax * s, ay * s, az * s, math.cos(half)


def _hamilton(a: tuple[float, float, float, float], b: tuple[float, float, float, float]):
    ax, ay, az, aw = a
    bx, by, bz, bw = b
    return (
        aw * bx + bw * ax + ay * bz - az * by,
        aw * by + bw * ay + az * bx - ax * bz,
        aw * bz + bw * az + ax * by - ay * bx,
        aw * bw - ax * bx - ay * by - az * bz,
    )
