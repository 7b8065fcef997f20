"""Geometry of the stadium table B_l and the coordinates of its phase space.

The table is bounded by two unit semicircles, the left one centred at the
origin and the right one at (l, 0), joined by the flats y = 1 (T) and
y = -1 (B) for x in [0, l]. Boundary points are addressed either by a side
label and a local coordinate (polar angle on an arc, abscissa on a flat) or
by a global counterclockwise arc length starting at the junction p = (0, -1).

Phase points carry the signed angle theta between the inward normal and the
outgoing velocity; theta > 0 means the velocity is the normal rotated
counterclockwise.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Tuple

from stadium_entropy.errors import DomainError

logger = logging.getLogger(__name__)

# Distance (arc length, or radians for pi/2 - |theta|) under which a point is
# treated as singular
SINGULAR_TOL = 1e-10

# Points whose Cartesian position misses the boundary equation by more than this
# are rejected
ON_BOUNDARY_TOL = 1e-12

HALF_PI = 0.5 * math.pi


class Side(str, Enum):
    L = "L"
    T = "T"
    R = "R"
    B = "B"

    @property
    def is_arc(self) -> bool:
        return self in (Side.L, Side.R)


class Corner(str, Enum):
    """The four junctions of arcs and flats and the two semicircle centres."""

    b = "b"
    p = "p"
    g = "g"
    r = "r"
    cL = "cL"
    cR = "cR"

    @property
    def is_center(self) -> bool:
        return self in (Corner.cL, Corner.cR)

    @property
    def arc(self) -> Side:
        """The semicircle whose centre this corner is."""
        if self == Corner.cL:
            return Side.L
        if self == Corner.cR:
            return Side.R
        raise DomainError(f"Corner {self.value} is not a semicircle centre")


JUNCTIONS = (Corner.p, Corner.g, Corner.r, Corner.b)

# Sides meeting at each junction, in counterclockwise order
JUNCTION_SIDES: Dict[Corner, Tuple[Side, Side]] = {
    Corner.p: (Side.L, Side.B),
    Corner.g: (Side.B, Side.R),
    Corner.r: (Side.R, Side.T),
    Corner.b: (Side.T, Side.L),
}


@dataclass(frozen=True)
class BoundaryPoint:
    """A point of the boundary with its Cartesian position and inward normal."""

    side: Side
    coord: float
    x: float
    y: float
    nx: float
    ny: float

    @property
    def position(self) -> Tuple[float, float]:
        return self.x, self.y

    @property
    def normal(self) -> Tuple[float, float]:
        return self.nx, self.ny


@dataclass(frozen=True)
class PhasePoint:
    """A point (s, theta) of the phase space M_l."""

    point: BoundaryPoint
    theta: float

    def __post_init__(self):
        if not abs(self.theta) < HALF_PI:
            raise DomainError(f"theta={self.theta} is outside (-pi/2, pi/2)")

    @property
    def side(self) -> Side:
        return self.point.side

    def velocity(self) -> Tuple[float, float]:
        """The outgoing unit velocity: the inward normal rotated by theta."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        nx, ny = self.point.normal
        return nx * c - ny * s, nx * s + ny * c

    def reversed(self) -> "PhasePoint":
        """The involution R(s, theta) = (s, -theta)."""
        return PhasePoint(self.point, -self.theta)


@dataclass(frozen=True)
class StadiumTable:
    """The billiard domain B_l: unit semicircles joined by flats of length l."""

    l: float

    def __post_init__(self):
        if not (self.l > 0 and math.isfinite(self.l)):
            raise DomainError(f"The flat length must be positive, got l={self.l}")

    @property
    def perimeter(self) -> float:
        return 2.0 * self.l + 2.0 * math.pi

    def side_range(self, side: Side) -> Tuple[float, float]:
        if side == Side.L:
            return HALF_PI, 3.0 * HALF_PI
        if side == Side.R:
            return -HALF_PI, HALF_PI
        return 0.0, self.l

    def circle_center(self, side: Side) -> Tuple[float, float]:
        if side == Side.L:
            return 0.0, 0.0
        if side == Side.R:
            return self.l, 0.0
        raise DomainError(f"Side {side.value} is not an arc")

    def boundary_point(self, side: Side, coord: float) -> BoundaryPoint:
        """Build the boundary point of a side at the given local coordinate."""
        lo, hi = self.side_range(side)
        if not lo - ON_BOUNDARY_TOL <= coord <= hi + ON_BOUNDARY_TOL:
            raise DomainError(
                f"Local coordinate {coord} outside [{lo}, {hi}] on side {side.value}"
            )
        coord = min(max(coord, lo), hi)
        if side == Side.T:
            return BoundaryPoint(side, coord, coord, 1.0, 0.0, -1.0)
        if side == Side.B:
            return BoundaryPoint(side, coord, coord, -1.0, 0.0, 1.0)
        cx, cy = self.circle_center(side)
        c, s = math.cos(coord), math.sin(coord)
        return BoundaryPoint(side, coord, cx + c, cy + s, -c, -s)

    def locate(self, x: float, y: float) -> BoundaryPoint:
        """Project a Cartesian point lying on the boundary to its boundary point."""
        if x < 0.0:
            phi = math.atan2(y, x)
            if phi < 0.0:
                phi += 2.0 * math.pi
            side, coord = Side.L, phi
        elif x > self.l:
            side, coord = Side.R, math.atan2(y, x - self.l)
        elif y > 0.0:
            side, coord = Side.T, x
        else:
            side, coord = Side.B, x
        lo, hi = self.side_range(side)
        bp = self.boundary_point(side, min(max(coord, lo), hi))
        if math.hypot(bp.x - x, bp.y - y) > 1e-9:
            raise DomainError(f"Point ({x}, {y}) is not on the boundary")
        return bp

    def arc_length(self, bp: BoundaryPoint) -> float:
        """Global counterclockwise arc length of a boundary point, p at 0."""
        if bp.side == Side.B:
            return bp.coord
        if bp.side == Side.R:
            return self.l + (bp.coord + HALF_PI)
        if bp.side == Side.T:
            return self.l + math.pi + (self.l - bp.coord)
        return 2.0 * self.l + math.pi + (bp.coord - HALF_PI)

    def from_arc_length(self, s: float) -> BoundaryPoint:
        s = s % self.perimeter
        l = self.l
        if s < l:
            return self.boundary_point(Side.B, s)
        if s < l + math.pi:
            return self.boundary_point(Side.R, s - l - HALF_PI)
        if s < 2.0 * l + math.pi:
            return self.boundary_point(Side.T, l - (s - l - math.pi))
        return self.boundary_point(Side.L, s - 2.0 * l - math.pi + HALF_PI)

    def arc_difference(self, s1: float, s2: float) -> float:
        """Signed periodic difference s1 - s2 in (-P/2, P/2]."""
        half = 0.5 * self.perimeter
        d = (s1 - s2) % self.perimeter
        return d - self.perimeter if d > half else d

    def junction_arc_length(self, corner: Corner) -> float:
        return {
            Corner.p: 0.0,
            Corner.g: self.l,
            Corner.r: self.l + math.pi,
            Corner.b: 2.0 * self.l + math.pi,
        }[corner]

    def corner_position(self, corner: Corner) -> Tuple[float, float]:
        return {
            Corner.b: (0.0, 1.0),
            Corner.p: (0.0, -1.0),
            Corner.g: (self.l, -1.0),
            Corner.r: (self.l, 1.0),
            Corner.cL: (0.0, 0.0),
            Corner.cR: (self.l, 0.0),
        }[corner]

    def nearest_junction(self, bp: BoundaryPoint) -> Tuple[Corner, float]:
        """The closest junction and the signed arc length from it to the point."""
        s = self.arc_length(bp)
        best = min(
            JUNCTIONS,
            key=lambda c: abs(self.arc_difference(s, self.junction_arc_length(c))),
        )
        return best, self.arc_difference(s, self.junction_arc_length(best))

    def phase_point(self, side: Side, coord: float, theta: float) -> PhasePoint:
        return PhasePoint(self.boundary_point(side, coord), theta)

    def phase_distance(self, a: PhasePoint, b: PhasePoint) -> float:
        """Distance in the (arc length, theta) metric."""
        ds = self.arc_difference(self.arc_length(a.point), self.arc_length(b.point))
        return math.hypot(ds, a.theta - b.theta)
