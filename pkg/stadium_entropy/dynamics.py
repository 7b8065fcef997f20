"""The billiard map F_l of the stadium, its inverse and orbit iteration."""
import logging
import math
from dataclasses import dataclass, field
from typing import FrozenSet, List, Optional, Tuple

from stadium_entropy.errors import (
    DomainError,
    GeometryError,
    GrazingError,
    SingularOrbitError,
    StadiumError,
    TangentialCollisionError,
)
from stadium_entropy.table import (
    ON_BOUNDARY_TOL,
    SINGULAR_TOL,
    BoundaryPoint,
    PhasePoint,
    Side,
    StadiumTable,
)

logger = logging.getLogger(__name__)

# Intersections closer than this to the departure point are the departure point
FLIGHT_EPS = 1e-12

Vector = Tuple[float, float]

FLAG_JUNCTION = "junction"
FLAG_PERPENDICULAR = "perpendicular"


@dataclass(frozen=True)
class FlightSegment:
    start: Vector
    direction: Vector
    tau: float
    end: BoundaryPoint
    near_singular: bool = False


@dataclass(frozen=True)
class Transit:
    """One application of the map: the flight and the reflected state at its end."""

    segment: FlightSegment
    image: PhasePoint
    flags: FrozenSet[str] = frozenset()


@dataclass
class Orbit:
    """A finite orbit segment.

    `status` is "ok", "singular" (junction hit), "tangential", or "lost" when
    the flight could not be continued (no boundary hit or a non-incoming
    reflection).
    """

    start: Optional[PhasePoint]
    transits: List[Transit] = field(default_factory=list)
    status: str = "ok"
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    @property
    def points(self) -> List[PhasePoint]:
        images = [t.image for t in self.transits]
        return [self.start] + images if self.start is not None else images

    @property
    def segments(self) -> List[FlightSegment]:
        return [t.segment for t in self.transits]


def _circle_hits(rx: float, ry: float, dx: float, dy: float) -> Tuple[float, ...]:
    """Parameters t with |r + t d| = 1 for a unit direction d.

    Uses the cancellation-free form of the quadratic formula.
    """
    b = rx * dx + ry * dy
    c = rx * rx + ry * ry - 1.0
    disc = b * b - c
    if disc < 0.0:
        return ()
    q = -(b + math.copysign(math.sqrt(disc), b))
    if q == 0.0:
        return (0.0,)
    return q, c / q


def next_collision(
    table: StadiumTable,
    position: Vector,
    direction: Vector,
    tol: float = SINGULAR_TOL,
) -> FlightSegment:
    """Follow a ray from a point of the closed table to its next boundary hit.

    Raises:
        GeometryError: If no boundary intersection exists.
        TangentialCollisionError: If the ray meets the boundary with
            |theta| >= pi/2 - tol.
    """
    x, y = position
    dx, dy = direction
    l = table.l

    best_t, best_side = math.inf, None
    if dy > 0.0:
        t = (1.0 - y) / dy
        if FLIGHT_EPS < t < best_t and -ON_BOUNDARY_TOL <= x + t * dx <= l + ON_BOUNDARY_TOL:
            best_t, best_side = t, Side.T
    elif dy < 0.0:
        t = (-1.0 - y) / dy
        if FLIGHT_EPS < t < best_t and -ON_BOUNDARY_TOL <= x + t * dx <= l + ON_BOUNDARY_TOL:
            best_t, best_side = t, Side.B

    for side, cx in ((Side.L, 0.0), (Side.R, l)):
        for t in _circle_hits(x - cx, y, dx, dy):
            if not FLIGHT_EPS < t < best_t:
                continue
            hx = x + t * dx
            if side == Side.L and hx <= ON_BOUNDARY_TOL:
                best_t, best_side = t, side
            elif side == Side.R and hx >= l - ON_BOUNDARY_TOL:
                best_t, best_side = t, side

    if best_side is None:
        raise GeometryError(
            f"No boundary intersection from ({x}, {y}) along ({dx}, {dy})"
        )

    hx, hy = x + best_t * dx, y + best_t * dy
    if best_side.is_arc:
        cx, _ = table.circle_center(best_side)
        phi = math.atan2(hy, hx - cx)
        if best_side == Side.L and phi < 0.0:
            phi += 2.0 * math.pi
        lo, hi = table.side_range(best_side)
        end = table.boundary_point(best_side, min(max(phi, lo), hi))
    else:
        end = table.boundary_point(best_side, min(max(hx, 0.0), l))

    incidence = -(dx * end.nx + dy * end.ny)
    if incidence <= math.sin(tol):
        raise TangentialCollisionError(
            f"Ray meets side {best_side.value} tangentially at ({hx}, {hy})"
        )

    _, offset = table.nearest_junction(end)
    return FlightSegment(
        start=(x, y),
        direction=(dx, dy),
        tau=best_t,
        end=end,
        near_singular=abs(offset) < tol,
    )


def reflect(direction: Vector, normal: Vector, tol: float = SINGULAR_TOL) -> Vector:
    """Specular reflection v' = v - 2 (v.n) n of an incoming direction.

    Raises:
        GrazingError: If the direction is (within tol) parallel to the wall.
        DomainError: If the direction points away from the wall.
    """
    vx, vy = direction
    nx, ny = normal
    dot = vx * nx + vy * ny
    if abs(dot) < tol:
        raise GrazingError(f"Direction ({vx}, {vy}) grazes normal ({nx}, {ny})")
    if dot > 0.0:
        raise DomainError(f"Direction ({vx}, {vy}) is not incoming")
    return vx - 2.0 * dot * nx, vy - 2.0 * dot * ny


def _land(segment: FlightSegment, tol: float) -> Transit:
    end = segment.end
    vx, vy = reflect(segment.direction, end.normal, tol)
    theta = math.atan2(end.nx * vy - end.ny * vx, end.nx * vx + end.ny * vy)
    flags = set()
    if segment.near_singular:
        flags.add(FLAG_JUNCTION)
    if end.side.is_arc and abs(theta) < tol:
        flags.add(FLAG_PERPENDICULAR)
    return Transit(segment, PhasePoint(end, theta), frozenset(flags))


def step(table: StadiumTable, pp: PhasePoint, tol: float = SINGULAR_TOL) -> Transit:
    """One application of F_l, keeping the flight and singularity flags."""
    if abs(pp.theta) >= 0.5 * math.pi - tol:
        raise TangentialCollisionError(f"theta={pp.theta} is tangential")
    segment = next_collision(table, pp.point.position, pp.velocity(), tol)
    return _land(segment, tol)


def shoot(
    table: StadiumTable,
    position: Vector,
    direction: Vector,
    tol: float = SINGULAR_TOL,
) -> Transit:
    """Launch a free ray (e.g. from a corner) and reflect it at its first hit."""
    return _land(next_collision(table, position, direction, tol), tol)


def billiard_map(
    table: StadiumTable, pp: PhasePoint, tol: float = SINGULAR_TOL
) -> PhasePoint:
    """The image F_l(pp).

    Raises:
        SingularOrbitError: If the orbit hits a junction corner within tol.
    """
    transit = step(table, pp, tol)
    if FLAG_JUNCTION in transit.flags:
        raise SingularOrbitError(
            f"Orbit of {pp} hits a junction at {transit.segment.end.position}", 1
        )
    return transit.image


def billiard_map_inverse(
    table: StadiumTable, pp: PhasePoint, tol: float = SINGULAR_TOL
) -> PhasePoint:
    """F_l^{-1} = R o F_l o R with the time reversal R(s, theta) = (s, -theta)."""
    return billiard_map(table, pp.reversed(), tol).reversed()


def _iterate(
    table: StadiumTable,
    orbit: Orbit,
    current: PhasePoint,
    n: int,
    tol: float,
) -> Orbit:
    for k in range(n):
        try:
            transit = step(table, current, tol)
        except (TangentialCollisionError, GrazingError) as e:
            orbit.status, orbit.message = "tangential", str(e)
            return orbit
        except StadiumError as e:
            # Rounding can push a flight off the table; the orbit ends there
            orbit.status, orbit.message = "lost", f"{type(e).__name__}: {e}"
            logger.debug("Orbit lost after %d steps: %s", len(orbit.transits), e)
            return orbit
        orbit.transits.append(transit)
        if FLAG_JUNCTION in transit.flags:
            orbit.status = "singular"
            orbit.message = f"junction hit at step {len(orbit.transits)}"
            return orbit
        current = transit.image
    return orbit


def orbit(
    table: StadiumTable, pp: PhasePoint, n: int, tol: float = SINGULAR_TOL
) -> Orbit:
    """Apply F_l n times, stopping early when a corner or tangency is hit."""
    if n < 1:
        raise DomainError(f"Orbit length must be at least 1, got {n}")
    return _iterate(table, Orbit(start=pp), pp, n, tol)


def trace(
    table: StadiumTable,
    position: Vector,
    direction: Vector,
    n: int,
    tol: float = SINGULAR_TOL,
) -> Orbit:
    """Orbit of a free ray: the first flight from `position`, then n - 1 map steps.

    The returned orbit has no start state; its points are the n collisions.
    """
    result = Orbit(start=None)
    try:
        first = shoot(table, position, direction, tol)
    except (TangentialCollisionError, GrazingError) as e:
        result.status, result.message = "tangential", str(e)
        return result
    except StadiumError as e:
        result.status, result.message = "lost", f"{type(e).__name__}: {e}"
        return result
    result.transits.append(first)
    if FLAG_JUNCTION in first.flags:
        result.status, result.message = "singular", "junction hit at step 1"
        return result
    if n > 1:
        _iterate(table, result, first.image, n - 1, tol)
    return result


def orbit_or_raise(
    table: StadiumTable, pp: PhasePoint, n: int, tol: float = SINGULAR_TOL
) -> Orbit:
    """Like `orbit`, but raise instead of returning a truncated orbit."""
    result = orbit(table, pp, n, tol)
    if result.status == "singular":
        raise SingularOrbitError(result.message, len(result.transits))
    if not result.ok:
        raise StadiumError(result.message)
    return result
